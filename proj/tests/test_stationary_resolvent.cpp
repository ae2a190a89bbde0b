#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dwt/rng.hpp"
#include "dwt/stationary_resolvent.hpp"

using namespace dwt;
using std::numbers::pi;

namespace {

GridFunction random_smooth(const PeriodicGrid& g, std::uint64_t stream, int band = 12) {
    const CounterRng rng(42, stream);
    CVector c = CVector::Zero(g.n());
    std::uint64_t ctr = 0;
    for (int f = -band; f <= band; ++f) {
        const double re = rng.symmetric(ctr++);
        const double im = rng.symmetric(ctr++);
        c[(f + g.n()) % g.n()] = cplx(re, im) / (1.0 + f * f);
    }
    return from_fourier(g, c);
}

// ||(k^2 + i q c - beta)^{-1}|| for the Fourier-diagonal constant case.
double diagonal_norm(double c, double q, double beta, int n) {
    double best = INFINITY;
    for (int k = 0; k <= n / 2; ++k) best = std::min(best, std::abs(cplx(k * k - beta, q * c)));
    return 1.0 / best;
}

}  // namespace

TEST_CASE("assembly") {
    const PeriodicGrid g(32);
    const CMatrix P0 = assemble(StationaryProblem(constant_profile(0.0), 1.0, 0.0, g));
    const CVector e3 = sample([](double x) { return std::exp(cplx(0, 3 * x)); }, g).values;
    CHECK((P0 * e3 - 9.0 * e3).cwiseAbs().maxCoeff() < 1e-11);
    const CMatrix Pc = assemble(StationaryProblem(constant_profile(2.0), 5.0, 1.5, g));
    CHECK((Pc * e3 - cplx(9.0 - 1.5, 10.0) * e3).cwiseAbs().maxCoeff() < 1e-11);

    const DampingProfile strip = strip_constant_profile(1.0, 0.0);
    const StationaryProblem sp(strip, 7.0, 2.0, g);
    const CMatrix P = assemble(sp);
    const CMatrix herm = 0.5 * (P + P.adjoint());
    const CMatrix anti = (P - P.adjoint()) / cplx(0.0, 2.0);
    CHECK((herm - (spectral_laplacian(g).cast<cplx>() - 2.0 * CMatrix::Identity(32, 32))).cwiseAbs().maxCoeff() <
          1e-12);
    const Eigen::VectorXd w = strip.sample_W(g);
    CHECK((anti - CMatrix((7.0 * w).cast<cplx>().asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
    // Im P is q diag(W) >= 0.
    CHECK(Eigen::SelfAdjointEigenSolver<CMatrix>(anti).eigenvalues().minCoeff() >= -1e-12);

    const GridFunction f = random_smooth(g, 1);
    CHECK((apply_operator(sp, f).values - P * f.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("solve") {
    const PeriodicGrid g(64);
    const GridFunction one = sample([](double) { return cplx(1.0); }, g);
    const GridFunction u1 = solve(assemble(StationaryProblem(constant_profile(0.0), 1.0, -1.0, g)), one);
    CHECK((u1.values - one.values).cwiseAbs().maxCoeff() < 1e-12);

    const GridFunction e1 = sample([](double x) { return std::exp(cplx(0, x)); }, g);
    const GridFunction u2 = solve(assemble(StationaryProblem(constant_profile(1.0), 10.0, 0.5, g)), e1);
    CHECK((u2.values - e1.values / cplx(0.5, 10.0)).cwiseAbs().maxCoeff() < 1e-13);

    const StationaryProblem sp(strip_constant_profile(1.0, 0.0), 50.0, 3.0, g);
    const GridFunction f = random_smooth(g, 2);
    const GridFunction u = solve(assemble(sp), f);
    CHECK((apply_operator(sp, u).values - f.values).norm() / f.values.norm() <= 1e-9);

    // W = 0, beta = 4: the k = 2 mode is in the kernel.
    const StationaryProblem singular(constant_profile(0.0), 1.0, 4.0, g);
    CHECK_THROWS_AS(solve(assemble(singular), f, singular.point()), NumericalError);
}

TEST_CASE("resolvent norm: closed forms and the diagonal oracle") {
    const PeriodicGrid g(64);
    CHECK(resolvent_norm(StationaryProblem(constant_profile(0.0), 1.0, -1.0, g)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(resolvent_norm(StationaryProblem(constant_profile(1.0), 10.0, 0.5, g)) ==
          doctest::Approx(1.0 / std::sqrt(100.25)).epsilon(1e-12));
    for (double c : {0.3, 1.0, 4.0})
        for (double q : {1.0, 10.0, 80.0})
            for (double beta : {-5.0, 0.0, 17.3, 400.0}) {
                const double ref = diagonal_norm(c, q, beta, 64);
                CHECK(resolvent_norm(StationaryProblem(constant_profile(c), q, beta, g)) ==
                      doctest::Approx(ref).epsilon(1e-10));
            }
}

TEST_CASE("resolvent norm: frozen values and two-method agreement for the strip") {
    // Independent dense SVD of the same discretization (sigma = 1, sharp edge, n = 256).
    const PeriodicGrid g(256);
    const DampingProfile strip = strip_constant_profile(1.0, 0.0);
    const struct {
        double q, beta, norm;
    } frozen[] = {{100.0, 1.0, 8.539991433323531e-01},
                  {100.0, 37.5, 2.031702699132807e-01},
                  {30.0, 0.4, 6.667083769484836e-01}};
    for (const auto& f : frozen) {
        const StationaryProblem sp(strip, f.q, f.beta, g);
        CHECK(resolvent_norm(sp) == doctest::Approx(f.norm).epsilon(1e-10));
        CHECK(resolvent_norm_iterative(sp) == doctest::Approx(resolvent_norm(sp)).epsilon(1e-6));
    }
}

TEST_CASE("beta sweeps and the worst beta") {
    const PeriodicGrid g(64);
    const DampingProfile c1 = constant_profile(1.0);
    const std::vector<double> betas{0.5, 1.0, 3.9, 16.0, 30.0};
    const auto sweep = beta_sweep(c1, 5.0, betas, g);
    CHECK(sweep.size() == betas.size());
    for (size_t i = 0; i < betas.size(); ++i)
        CHECK(sweep[i].second == doctest::Approx(diagonal_norm(1.0, 5.0, betas[i], 64)).epsilon(1e-10));
    // Diagonal oracle: the maximum over beta in [eps2, q^2] sits at some k^2, norm 1/(q c).
    const WorstBeta w = worst_beta(c1, 5.0, g);
    CHECK(w.norm == doctest::Approx(1.0 / 5.0).epsilon(1e-8));
    CHECK(std::abs(std::sqrt(w.beta) - std::round(std::sqrt(w.beta))) < 1e-3);

    const DampingProfile strip = strip_constant_profile(1.0, 0.0);
    const WorstBeta ws = worst_beta(strip, 20.0, g);
    CHECK(beta_sweep(strip, 20.0, {-400.0}, g)[0].second <= ws.norm);
    for (double b : logspace(0.1, 400.0, 30)) CHECK(beta_sweep(strip, 20.0, {b}, g)[0].second <= ws.norm * (1 + 1e-9));
}

TEST_CASE("two-dimensional resolvent norm") {
    const PeriodicGrid g(128);
    const Resolvent2D r0 = resolvent_2d_norm(constant_profile(0.0), 7.0, g);
    CHECK(r0.singular);

    const Resolvent2D r1 = resolvent_2d_norm(constant_profile(1.0), 7.3, g);
    double ref = 0.0;
    for (int k = 0; k * k <= 7.3 * 7.3 + 10; ++k) ref = std::max(ref, diagonal_norm(1.0, 7.3, 7.3 * 7.3 - k * k, 128));
    CHECK(r1.norm == doctest::Approx(ref).epsilon(1e-9));

    const DampingProfile strip = strip_constant_profile(1.0, 0.0);
    const double q = 50.0;
    const Resolvent2D r = resolvent_2d_norm(strip, q, g);
    const int k = static_cast<int>(std::round(0.9 * q));
    CHECK(r.norm >= resolvent_norm(StationaryProblem(strip, q, q * q - k * k, g)) * (1 - 1e-9));
    const Resolvent2D ex = resolvent_2d_norm(strip, q, g, 10.0, true);
    CHECK(ex.norm == doctest::Approx(r.norm).epsilon(1e-9));
    for (const ModeSample& m : ex.evaluated) CHECK(ex.norm >= m.norm * (1 - 1e-12));
}

TEST_CASE("damping identity Im<Pu,u> = q int W |u|^2") {
    const PeriodicGrid g(128);
    const DampingProfile zero = constant_profile(0.0);
    const StationaryProblem sp0(zero, 3.0, 2.5, g);
    const GridFunction f0 = random_smooth(g, 3);
    const DampingIdentity d0 = damping_identity_check(sp0, solve(assemble(sp0), f0), f0);
    CHECK(d0.lhs == 0.0);
    CHECK(d0.identity_residual <= 1e-10);

    const std::vector<DampingProfile> profiles{strip_constant_profile(1.0, 0.0), strip_constant_profile(1.5, 0.3),
                                               polynomial_profile(1.0, 2.0), oscillating_profile(1.2)};
    for (int i = 0; i < 100; ++i) {
        const CounterRng rng(7, i);
        const DampingProfile& p = profiles[i % profiles.size()];
        const double q = 1.0 + 200.0 * rng.uniform(0);
        const double beta = -10.0 + 500.0 * rng.uniform(1);
        const StationaryProblem sp(p, q, beta, g);
        const GridFunction f = random_smooth(g, 100 + i);
        const GridFunction u = solve(assemble(sp), f, sp.point());
        const DampingIdentity d = damping_identity_check(sp, u, f);
        CHECK(d.identity_residual <= 1e-10);
        CHECK(d.slack >= -1e-8 * d.rhs);
    }
}

TEST_CASE("low-energy certificate") {
    const PeriodicGrid g(256);
    const DampingProfile strip = strip_constant_profile(1.0, 0.0);
    const double eps1 = 0.1;
    const double threshold = pi * pi / (16 * std::pow(1.1, 2));
    const GridFunction f = random_smooth(g, 4);
    const LowEnergyReport r = low_energy_certificate(strip, 100.0, 0.5 * threshold, eps1, g, f);
    CHECK(r.threshold == doctest::Approx(threshold));
    CHECK(r.identity_residual <= 1e-8);
    CHECK(r.constant > 0.0);
    CHECK(r.constant <= r.operator_constant * (1 + 1e-9));
    CHECK_THROWS_AS(low_energy_certificate(strip, 100.0, 1.01 * threshold, eps1, g, f), std::invalid_argument);
    CHECK_NOTHROW(low_energy_certificate(constant_profile(0.0), 1.0, -2.0, eps1, g, f));
}

TEST_CASE("regime table") {
    const double q = 100.0;
    const auto two = regime_table(q, 0.875);
    REQUIRE(two.size() == 2);
    CHECK(two[0].beta_lo == doctest::Approx(0.1));
    CHECK(two[0].beta_hi == doctest::Approx(std::pow(q, 0.875)));
    CHECK(two[0].tau == 0.875);
    CHECK(two[0].gamma == 2);
    CHECK(two[1].beta_lo == doctest::Approx(std::pow(q, 0.875) / 2));
    CHECK(two[1].beta_hi == doctest::Approx(q * q));
    CHECK(two[1].tau == 1.0);
    CHECK(two[1].gamma == 1);

    const auto three = regime_table(q, 0.55);
    REQUIRE(three.size() == 3);
    CHECK(three[0].tau == doctest::Approx(0.55));
    CHECK(three[1].tau == doctest::Approx(1.65));
    CHECK(three[1].gamma == 2);
    CHECK(three[2].tau == 1.0);
    CHECK(three[2].gamma == 1);
    for (size_t i = 1; i < three.size(); ++i) CHECK(three[i].beta_lo <= three[i - 1].beta_hi);
    CHECK(three.back().beta_hi == doctest::Approx(q * q));
}

TEST_CASE("exponent fits") {
    std::vector<double> qs = logspace(10.0, 1e4, 7), norms;
    for (double q : qs) norms.push_back(3.0 * std::pow(q, 0.5));
    const ExponentFit f = fit_resolvent_exponent(qs, norms);
    CHECK(f.slope == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK_THROWS(fit_resolvent_exponent(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}));
    CHECK_THROWS(fit_line({1, 1, 1, 1, 1}, {1, 2, 3, 4, 5}));
}

TEST_CASE("grid resolution study for the resolvent measure") {
    // n = 8 ceil(sqrt q) against a grid twice as fine.
    const DampingProfile strip = strip_constant_profile(2.3, 0.0);
    const double q = 200.0;
    const int n = grid_size_for_q(q);
    CHECK(n == 8 * static_cast<int>(std::ceil(std::sqrt(q))));
    const WorstBeta a = worst_beta(strip, q, PeriodicGrid(n));
    const WorstBeta b = worst_beta(strip, q, PeriodicGrid(2 * n));
    CHECK(a.norm == doctest::Approx(b.norm).epsilon(0.05));
}
