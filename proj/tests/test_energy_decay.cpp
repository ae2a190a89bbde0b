#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dwt/energy_decay.hpp"

using namespace dwt;
using std::numbers::pi;

namespace {

GridFunction fn(const PeriodicGrid& g, std::function<double(double)> f) {
    return sample([f](double x) { return cplx(f(x)); }, g);
}

GridFunction zeros(const PeriodicGrid& g) { return GridFunction(g, CVector::Zero(g.n())); }

std::vector<double> with_zero(std::vector<double> ts) {
    ts.insert(ts.begin(), 0.0);
    return ts;
}

}  // namespace

TEST_CASE("free evolution: sin x cos t with conserved energy") {
    const PeriodicGrid g(64);
    const DampingProfile none = constant_profile(0.0);
    std::vector<double> ts;
    for (int i = 0; i <= 100; ++i) ts.push_back(i);
    const ModeEvolution ev = evolve_mode(none, 0, fn(g, [](double x) { return std::sin(x); }), zeros(g), ts);
    for (size_t i = 0; i < ts.size(); ++i) {
        const CVector expect = fn(g, [&](double x) { return std::sin(x) * std::cos(ts[i]); }).values;
        CHECK((ev.states[i].v.values - expect).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(mode_energy(ev.states[i]) - pi / 2) <= 1e-10 * pi / 2);
    }
}

TEST_CASE("conservation for generic data on a y-mode") {
    const PeriodicGrid g(128);
    const GridFunction v0 = fn(g, [](double x) { return std::exp(std::cos(3 * x)); });
    const GridFunction v1 = fn(g, [](double x) { return std::sin(x) + std::cos(5 * x); });
    const DecayTrace tr = decay_trace(constant_profile(0.0), 7, v0, v1, with_zero(logspace(0.1, 100.0, 50)));
    double worst = 0.0;
    for (double e : tr.energies) worst = std::max(worst, std::abs(e - tr.energies.front()) / tr.energies.front());
    CHECK(worst <= 1e-10);
}

TEST_CASE("constant damping: scalar ODE") {
    const PeriodicGrid g(32);
    const double c = 0.7;
    const std::vector<double> ts{0.0, 0.5, 1.0, 3.0, 10.0};
    const ModeEvolution ev = evolve_mode(constant_profile(c), 0, zeros(g), fn(g, [](double) { return 1.0; }), ts);
    for (size_t i = 0; i < ts.size(); ++i) {
        CHECK(std::abs(ev.states[i].vt.values[5] - std::exp(-c * ts[i])) < 1e-10);
        CHECK(mode_energy(ev.states[i]) == doctest::Approx(pi * std::exp(-2 * c * ts[i])).epsilon(1e-9));
    }
}

TEST_CASE("eigenbasis and matrix exponential agree on the strip") {
    const PeriodicGrid g(64);
    const DampingProfile strip = strip_constant_profile(1.0, 0.0);
    const GridFunction v0 = fn(g, [](double x) { return std::exp(-4 * std::pow(periodic_rep(x), 2)); });
    const GridFunction v1 = fn(g, [](double x) { return std::cos(2 * x); });
    const std::vector<double> ts{0.0, 0.3, 1.0, 2.5, 10.0, 40.0, 100.0};
    const ModeEvolution a = evolve_mode(strip, 8, v0, v1, ts, EvolveMethod::Eigen);
    const ModeEvolution b = evolve_mode(strip, 8, v0, v1, ts, EvolveMethod::Expm);
    CHECK_FALSE(a.used_fallback);
    CHECK(b.used_fallback);
    CHECK(a.eigen_condition > 0.0);
    double scale = 0.0;
    for (const ModeState& s : a.states) scale = std::max(scale, s.v.values.cwiseAbs().maxCoeff());
    for (size_t i = 0; i < ts.size(); ++i) {
        CHECK((a.states[i].v.values - b.states[i].v.values).cwiseAbs().maxCoeff() <= 1e-8 * scale);
        CHECK((a.states[i].vt.values - b.states[i].vt.values).cwiseAbs().maxCoeff() <= 1e-8 * scale);
    }
    const DecayTrace tr = decay_trace(strip, 8, v0, v1, with_zero(logspace(0.1, 500.0, 80)));
    CHECK(tr.monotone());
    CHECK(tr.energies.back() < tr.energies.front());
}

TEST_CASE("total energy") {
    const PeriodicGrid g(32);
    const ModeState z{3, zeros(g), zeros(g)};
    CHECK(total_energy({z}) == 0.0);
    CHECK(total_energy({}) == 0.0);
    const ModeState s{0, fn(g, [](double x) { return std::sin(x); }), zeros(g)};
    CHECK(total_energy({s}) == doctest::Approx(pi / 2).epsilon(1e-13));
    // ||v'||^2 + k^2 ||v||^2 for v = cos 2x, k = 3: (4 + 9) pi.
    const ModeState m{3, fn(g, [](double x) { return std::cos(2 * x); }), fn(g, [](double x) { return 1.0; })};
    CHECK(mode_energy(m) == doctest::Approx(0.5 * (13 * pi + 2 * pi)).epsilon(1e-13));
    CHECK(total_energy({s, m}) == doctest::Approx(mode_energy(s) + mode_energy(m)).epsilon(1e-14));
    const ModeState other{1, zeros(PeriodicGrid(16)), zeros(PeriodicGrid(16))};
    CHECK_THROWS(total_energy({s, other}));
    // ||1||_{H^2} on k = 0 is sqrt(2 pi).
    CHECK(data_norm(0, fn(g, [](double) { return 1.0; }), zeros(g)) == doctest::Approx(std::sqrt(2 * pi)));
}

TEST_CASE("mode decoupling") {
    const PeriodicGrid g(64);
    const DampingProfile strip = strip_constant_profile(1.0, 0.3);
    const GridFunction v0 = fn(g, [](double x) { return std::cos(x); });
    const std::vector<double> ts{0.0, 1.0, 5.0};
    const ModeEvolution a = evolve_mode(strip, 2, v0, zeros(g), ts);
    const ModeEvolution b = evolve_mode(strip, 5, v0, zeros(g), ts);
    const ModeEvolution a2 = evolve_mode(strip, 2, v0, zeros(g), ts);
    for (size_t i = 0; i < ts.size(); ++i) {
        CHECK(total_energy({a.states[i], b.states[i]}) == mode_energy(a.states[i]) + mode_energy(b.states[i]));
        CHECK(a.states[i].v.values == a2.states[i].v.values);
    }
}

TEST_CASE("decay exponent fits") {
    DecayTrace tr;
    for (double t : logspace(1.0, 1e4, 100)) {
        tr.times.push_back(t);
        tr.energies.push_back(std::pow(1.0 + t, -2 * 0.66));
    }
    CHECK(fit_decay_exponent(tr, {10.0, 1e4}).slope == doctest::Approx(0.66).epsilon(1e-3));
    CHECK_THROWS_AS(fit_decay_exponent(tr, {0.5, 10.0}), std::invalid_argument);
    tr.energies[50] = 0.0;
    CHECK_THROWS_AS(fit_decay_exponent(tr, {10.0, 1e4}), std::invalid_argument);

    DecayTrace flat;
    flat.times = {0.0, 1.0, 2.0, 4.0};
    flat.energies = {1.0, 1.0, 1.0 + 1e-12, 1.0};
    CHECK(flat.monotone());
    flat.energies[2] = 1.0 + 1e-8;
    CHECK_FALSE(flat.monotone());

    DecayTrace quick;
    for (int i = 0; i <= 100; ++i) {
        quick.times.push_back(i);
        quick.energies.push_back(std::exp(-0.2 * i));
    }
    const auto w = default_window(quick);
    CHECK(w.second == doctest::Approx(35.0));  // first time with e^{-0.2 t} <= 1e-3
    CHECK(w.first == doctest::Approx(35.0 / 4));
}

TEST_CASE("full damping decays faster than any power") {
    const PeriodicGrid g(32);
    const DampingProfile full = constant_profile(1.0);
    std::vector<double> ts{0.0};
    for (double t : logspace(0.5, 40.0, 60)) ts.push_back(t);
    const DecayTrace tr = decay_trace(full, 1, fn(g, [](double x) { return std::sin(x); }), zeros(g), ts);
    CHECK(tr.monotone());
    const DecayClassification c = classify_decay(tr, {2.0, 30.0});
    CHECK(c.super_polynomial);
    CHECK(c.late.slope > c.early.slope);

    DecayTrace power;
    for (double t : logspace(1.0, 1e4, 60)) {
        power.times.push_back(t);
        power.energies.push_back(std::pow(1.0 + t, -1.0));
    }
    CHECK_FALSE(classify_decay(power, {10.0, 1e4}).super_polynomial);
}

TEST_CASE("worst-case ensemble") {
    const PeriodicGrid g(64);
    std::vector<double> ts{0.0};
    for (double t : logspace(0.5, 400.0, 40)) ts.push_back(t);

    SUBCASE("large damping everywhere but a tiny strip: all members decay fast") {
        const DampingProfile heavy = custom_profile(
            "heavy", [](double x) { return std::abs(periodic_rep(x)) < 0.1 ? 0.0 : 20.0; }, 0.1, 0.0, 20.0);
        const EnsembleResult r = worst_case_ensemble(heavy, 8, g, ts, 1, 2);
        for (const EnsembleMember& m : r.members) CHECK(m.trace.energies.back() < 1e-3 * m.trace.energies.front());
    }
    SUBCASE("strip: max construction, normalization and determinism") {
        const DampingProfile strip = strip_constant_profile(1.0, 0.0);
        const EnsembleResult r = worst_case_ensemble(strip, 16, g, ts, 3, 2, 2);
        const EnsembleResult r2 = worst_case_ensemble(strip, 16, g, ts, 3, 2, 1);
        REQUIRE(r.members.size() == r2.members.size());
        CHECK(r.worst.energies == r2.worst.energies);
        CHECK(r.worst.monotone());
        for (const EnsembleMember& m : r.members) {
            CHECK(m.trace.data_norm == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(m.trace.monotone());
            const double dn2 = m.trace.data_norm * m.trace.data_norm;
            for (size_t i = 0; i < ts.size(); ++i) CHECK(r.worst.energies[i] >= m.trace.energies[i] / dn2);
        }
        REQUIRE(r.slowest >= 0);
        // The envelope drops at least as far as the member dominating at late times.
        CHECK(r.members[r.slowest].fit.slope <= r.worst_fit.slope + 0.05);
        CHECK(r.members[r.slowest].k >= 4);
    }
    CHECK_THROWS_AS(worst_case_ensemble(constant_profile(1.0), 17, g, ts), std::invalid_argument);
}

TEST_CASE("alpha cross-check") {
    CHECK(cross_check_alpha(0.5, 2.0 / 3).predicted == doctest::Approx(2.0 / 3));
    CHECK(cross_check_alpha(0.25, 0.8).predicted == doctest::Approx(0.8));
    CHECK(cross_check_alpha(1.0, 0.5).predicted == doctest::Approx(0.5));
    const AlphaCrossCheck c = cross_check_alpha(0.5, 0.76);
    CHECK(c.difference == doctest::Approx(0.76 - 2.0 / 3));
    CHECK(c.pass);
    CHECK_FALSE(cross_check_alpha(0.5, 0.8).pass);
    CHECK_THROWS_AS(cross_check_alpha(0.0, 0.5), std::invalid_argument);
}

TEST_CASE("integrated energy identity") {
    const PeriodicGrid g(128);
    const GridFunction v0 = fn(g, [](double x) { return std::exp(-2 * std::pow(periodic_rep(x) - 0.5, 2)); });
    const GridFunction v1 = fn(g, [](double x) { return std::sin(2 * x); });
    for (const DampingProfile& p : {strip_constant_profile(1.0, 0.4), polynomial_profile(1.0, 2.0)}) {
        const EnergyIdentity e = energy_identity_check(p, 3, v0, v1, 20.0);
        CHECK(e.energy_loss > 0.0);
        CHECK(e.relative_error <= 0.01);
    }
    CHECK_THROWS(energy_identity_check(constant_profile(1.0), 0, v0, v1, 1.0, 401));
}
