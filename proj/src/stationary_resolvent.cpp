#include "dwt/stationary_resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

#include "dwt/fft.hpp"

namespace dwt {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

CMatrix stiffness(const DampingProfile& p, double q, const PeriodicGrid& g) {
    CMatrix l = spectral_laplacian(g).cast<cplx>();
    const Eigen::VectorXd w = p.sample_W(g);
    for (int j = 0; j < g.n(); ++j) l(j, j) += cplx(0.0, q * w[j]);
    return l;
}

// Golden-section search for a maximum of f on [a, b].
std::pair<double, double> golden_max(const std::function<double(double)>& f, double a, double b,
                                     double xtol) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > xtol; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

}  // namespace

StationaryProblem::StationaryProblem(DampingProfile p, double q_, double beta_, PeriodicGrid g)
    : profile(std::move(p)), q(q_), beta(beta_), grid(g) {
    if (!(q > 0.0)) throw std::invalid_argument("q must be positive");
}

OperatorMatrix assemble(const StationaryProblem& sp) {
    CMatrix p = stiffness(sp.profile, sp.q, sp.grid);
    p.diagonal().array() -= sp.beta;
    return p;
}

GridFunction apply_operator(const StationaryProblem& sp, const GridFunction& u) {
    const Eigen::VectorXd w = sp.profile.sample_W(sp.grid);
    CVector out = -derivative(u, 2).values;
    out.array() += (cplx(0.0, sp.q) * w.array().cast<cplx>() - sp.beta) * u.values.array();
    return GridFunction(u.grid, std::move(out));
}

GridFunction solve(const OperatorMatrix& P, const GridFunction& f, const FailurePoint& where) {
    if (P.rows() != f.grid.n()) throw std::invalid_argument("solve: dimension mismatch");
    Eigen::PartialPivLU<CMatrix> lu(P);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14))
        throw NumericalError("near-singular operator (condition estimate " +
                                 std::to_string(rcond > 0 ? 1.0 / rcond : kInf) + ")",
                             where);
    CVector u = lu.solve(f.values);
    const double fn = f.values.norm();
    auto residual = [&] { return fn > 0 ? (P * u - f.values).norm() / fn : (P * u).norm(); };
    double res = residual();
    if (res > 1e-9) {
        u += lu.solve(CVector(f.values - P * u));
        res = residual();
    }
    if (!(res <= 1e-9))
        throw NumericalError("solve residual " + std::to_string(res) + " exceeds 1e-9", where);
    return GridFunction(f.grid, std::move(u));
}

double resolvent_norm(const StationaryProblem& sp) {
    const CMatrix p = assemble(sp);
    double smin;
    if (sp.profile.even) {
        const ParitySplit s = split_by_parity(p);
        smin = std::min(smallest_singular_value(s.even), smallest_singular_value(s.odd));
    } else {
        smin = smallest_singular_value(p);
    }
    if (!(smin > 1e-14 * std::max(1.0, p.cwiseAbs().maxCoeff())))
        throw NumericalError("singular operator", sp.point());
    return 1.0 / smin;
}

double resolvent_norm_iterative(const StationaryProblem& sp) {
    const ResolventEvaluator ev(sp.profile, sp.q, sp.grid);
    const double v = ev.norm(sp.beta);
    if (!std::isfinite(v)) throw NumericalError("singular operator", sp.point());
    return v;
}

ResolventEvaluator::ResolventEvaluator(const DampingProfile& p, double q, const PeriodicGrid& g)
    : q_(q) {
    const CMatrix l = stiffness(p, q, g);
    if (p.even) {
        const ParitySplit s = split_by_parity(l);
        blocks_.push_back(std::make_unique<ShiftedSigmaMin>(s.even));
        blocks_.push_back(std::make_unique<ShiftedSigmaMin>(s.odd));
    } else {
        blocks_.push_back(std::make_unique<ShiftedSigmaMin>(l));
    }
}

double ResolventEvaluator::norm(double beta) const {
    double smin = kInf;
    for (const auto& b : blocks_) smin = std::min(smin, b->sigma_min(beta));
    return smin > 0.0 ? 1.0 / smin : kInf;
}

double ResolventEvaluator::upper_bound(double beta) const {
    double u = 0.0;
    for (const auto& b : blocks_) u = std::max(u, b->resolvent_upper_bound(beta));
    return u;
}

double ResolventEvaluator::lower_bound(double beta) const {
    double u = 0.0;
    for (const auto& b : blocks_) u = std::max(u, b->resolvent_lower_bound(beta));
    return u;
}

std::vector<std::pair<cplx, double>> ResolventEvaluator::spectrum() const {
    std::vector<std::pair<cplx, double>> out;
    for (const auto& b : blocks_)
        for (int i = 0; i < b->eigenvalues().size(); ++i)
            out.emplace_back(b->eigenvalues()[i], b->condition_numbers()[i]);
    return out;
}

std::vector<std::pair<double, double>> beta_sweep(const DampingProfile& p, double q,
                                                  const std::vector<double>& betas,
                                                  const PeriodicGrid& g) {
    const ResolventEvaluator ev(p, q, g);
    std::vector<std::pair<double, double>> out;
    out.reserve(betas.size());
    for (double b : betas) out.emplace_back(b, ev.norm(b));
    return out;
}

WorstBeta worst_beta(const DampingProfile& p, double q, const PeriodicGrid& g, double eps2) {
    return worst_beta(ResolventEvaluator(p, q, g), eps2);
}

WorstBeta worst_beta(const ResolventEvaluator& ev, double eps2) {
    const double q = ev.q();
    const double lo = eps2, hi = q * q;
    if (!(hi > lo)) throw std::invalid_argument("worst_beta needs q^2 > eps2");
    auto f = [&](double b) { return ev.norm(b); };

    const std::vector<double> coarse = logspace(lo, hi, 64);
    WorstBeta best{coarse[0], f(coarse[0])};
    int best_i = 0;
    for (int i = 1; i < static_cast<int>(coarse.size()); ++i) {
        const double v = f(coarse[i]);
        if (v > best.norm) best = {coarse[i], v}, best_i = i;
    }
    std::vector<std::pair<double, double>> brackets;
    brackets.emplace_back(coarse[std::max(0, best_i - 1)],
                          coarse[std::min<int>(coarse.size() - 1, best_i + 1)]);

    // Eigenvalue seeds ranked by their estimated peak kappa / |Im lambda|.
    struct Seed {
        double re, im, score;
    };
    std::vector<Seed> seeds;
    for (const auto& [lam, kappa] : ev.spectrum()) {
        if (lam.real() < lo || lam.real() > hi) continue;
        const double im = std::abs(lam.imag());
        const double k = std::isfinite(kappa) ? kappa : 1.0;
        seeds.push_back({lam.real(), im, im > 0 ? k / im : kInf});
    }
    std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.score > b.score; });
    const int n_seeds = std::min<int>(12, static_cast<int>(seeds.size()));
    for (int i = 0; i < n_seeds; ++i) {
        const double w = std::max(3.0 * seeds[i].im, 1e-8 * std::max(1.0, seeds[i].re));
        brackets.emplace_back(std::max(lo, seeds[i].re - w), std::min(hi, seeds[i].re + w));
    }
    for (const auto& [a, b] : brackets) {
        if (!(b > a)) continue;
        const auto [x, v] = golden_max(f, a, b, 1e-10 * std::max(1.0, std::abs(a)) + 1e-12 * (b - a));
        if (v > best.norm) best = {x, v};
    }
    return best;
}

Resolvent2D resolvent_2d_norm(const DampingProfile& p, double q, const PeriodicGrid& g,
                              double margin, bool exhaustive) {
    if (!(margin >= 0.0)) throw std::invalid_argument("margin must be nonnegative");
    const ResolventEvaluator ev(p, q, g);
    Resolvent2D r;
    r.k_max = static_cast<int>(std::floor(std::sqrt(q * q + margin)));
    while (static_cast<double>(r.k_max + 1) * (r.k_max + 1) <= q * q + margin) ++r.k_max;
    while (static_cast<double>(r.k_max) * r.k_max > q * q + margin) --r.k_max;
    const double kt = r.k_max + 1.0;
    r.tail_bound = 1.0 / (kt * kt - q * q);

    const int count = r.k_max + 1;
    std::vector<double> ub(count), lb(count);
    for (int k = 0; k < count; ++k) {
        const double b = q * q - static_cast<double>(k) * k;
        ub[k] = exhaustive ? kInf : ev.upper_bound(b);
        lb[k] = ev.lower_bound(b);
    }
    std::vector<int> order(count);
    std::iota(order.begin(), order.end(), 0);
    const int first = static_cast<int>(std::max_element(lb.begin(), lb.end()) - lb.begin());
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (a == first || b == first) return a == first && b != first;
        return ub[a] > ub[b];
    });
    double best = 0.0;
    for (int k : order) {
        if (!exhaustive && ub[k] <= best) break;
        const double b = q * q - static_cast<double>(k) * k;
        const double v = ev.norm(b);
        r.evaluated.push_back({k, b, v});
        if (!std::isfinite(v)) r.singular = true;
        if (v > best) {
            best = v;
            r.k_star = k;
            r.beta_star = b;
        }
    }
    std::sort(r.evaluated.begin(), r.evaluated.end(),
              [](const ModeSample& a, const ModeSample& b) { return a.k < b.k; });
    r.norm = std::max(best, r.tail_bound);
    return r;
}

DampingIdentity damping_identity_check(const StationaryProblem& sp, const GridFunction& u,
                                       const GridFunction& f) {
    const Eigen::VectorXd w = sp.profile.sample_W(sp.grid);
    const double dx = sp.grid.spacing();
    DampingIdentity d;
    d.lhs = dx * (w.array() * u.values.array().abs2()).sum();
    d.rhs = dx * (f.values.array().abs() * u.values.array().abs()).sum() / sp.q;
    d.slack = d.rhs - d.lhs;
    const GridFunction pu = apply_operator(sp, u);
    const double im = l2_inner(pu, u).imag();
    const double scale = l2_norm(pu) * l2_norm(u) + sp.q * d.lhs;
    d.identity_residual = scale > 0 ? std::abs(im - sp.q * d.lhs) / scale : 0.0;
    return d;
}

Jet b_eps1_jet(const Jet& x, double sigma, double eps1) {
    const double shift = periodic_rep(x.real_value()) - x.real_value();
    const Jet xr = x + shift;
    const double edge = sigma + eps1;
    if (std::abs(xr.real_value()) >= edge) return Jet::constant(0.0, x.order_x(), x.order_xi());
    return cos(xr * (kPi / (2.0 * edge))) * plateau(xr, sigma + 0.5 * eps1, edge);
}

LowEnergyReport low_energy_certificate(const DampingProfile& p, double q, double beta, double eps1,
                                       const PeriodicGrid& g, const GridFunction& f) {
    LowEnergyReport r;
    r.threshold = kPi * kPi / (16.0 * (p.sigma + eps1) * (p.sigma + eps1));
    if (!(beta < r.threshold))
        throw std::invalid_argument("beta " + std::to_string(beta) + " not below the low-energy threshold " +
                                    std::to_string(r.threshold));
    const StationaryProblem sp(p, q, beta, g);
    const CMatrix P = assemble(sp);
    const GridFunction u = solve(P, f, sp.point());
    r.u_norm = l2_norm(u);
    r.f_norm = l2_norm(f);
    r.constant = r.u_norm / r.f_norm;
    r.operator_constant = resolvent_norm(sp);

    // Every integrand is b (or b'') times a trigonometric polynomial of
    // degree <= n, so only the Fourier modes |k| <= n of b contribute. Those
    // come from a fine sampling of b alone; afterwards the rectangle rule on
    // nq = 4n points is exact.
    const int n = g.n(), nq = 4 * n, nb = std::max(1 << 16, 64 * n);
    CVector bs(nb);
    for (int j = 0; j < nb; ++j)
        bs[j] = b_eps1_jet(Jet::constant(2.0 * kPi * j / nb, 0, 0), p.sigma, eps1).value();
    const CVector bh = fft::forward(bs) / static_cast<double>(nb);
    CVector b0h = CVector::Zero(nq), b2h = CVector::Zero(nq);
    for (int k = -n; k <= n; ++k) {
        const cplx v = bh[((k % nb) + nb) % nb];
        b0h[((k % nq) + nq) % nq] = v;
        b2h[((k % nq) + nq) % nq] = -static_cast<double>(k) * k * v;
    }
    const CVector bq = fft::backward(b0h), b2q = fft::backward(b2h);

    const CVector c = fourier_coefficients(u);
    CVector c0 = CVector::Zero(nq), c1 = CVector::Zero(nq), c2 = CVector::Zero(nq);
    auto place = [&](int k, cplx v) {
        const int slot = ((k % nq) + nq) % nq;
        c0[slot] += v;
        c1[slot] += cplx(0.0, k) * v;
        c2[slot] += -static_cast<double>(k) * k * v;
    };
    for (int s = 0; s < n; ++s) {
        const int k = g.frequency(s);
        if (k == -n / 2) {
            place(-n / 2, 0.5 * c[s]);
            place(n / 2, 0.5 * c[s]);
        } else {
            place(k, c[s]);
        }
    }
    const CVector uf = fft::backward(c0), duf = fft::backward(c1), d2uf = fft::backward(c2);
    const double dxf = 2.0 * kPi / nq;
    // f = P u for the interpolant of u. Re(i q W b |u|^2) vanishes
    // pointwise, so Re b f conj(u) reduces to Re b (-u'' - beta u) conj(u).
    double t1 = 0, t2 = 0, t3 = 0;
    for (int j = 0; j < nq; ++j) {
        const double b0 = bq[j].real(), b2 = b2q[j].real();
        t1 += b0 * std::norm(duf[j]);
        t2 += (-0.5 * b2 - beta * b0) * std::norm(uf[j]);
        t3 += b0 * ((-d2uf[j] - beta * uf[j]) * std::conj(uf[j])).real();
    }
    r.gradient_term = dxf * t1;
    r.potential_term = dxf * t2;
    r.source_term = dxf * t3;
    const double scale = std::abs(r.gradient_term) + std::abs(r.potential_term) + std::abs(r.source_term);
    r.identity_residual =
        scale > 0 ? std::abs(r.gradient_term + r.potential_term - r.source_term) / scale : 0.0;
    return r;
}

std::vector<Regime> regime_table(double q, double tau_min, double eps2) {
    if (!(tau_min > 0.5 && tau_min <= 1.0)) throw std::invalid_argument("tau_min must lie in (1/2, 1]");
    const double a = std::pow(q, tau_min), b = std::pow(q, 3.0 * tau_min), top = q * q;
    std::vector<Regime> out;
    out.push_back({eps2, a, tau_min, 2});
    if (3.0 * tau_min >= 2.0) {
        out.push_back({0.5 * a, top, 1.0, 1});
    } else {
        out.push_back({0.5 * a, b, 3.0 * tau_min, 2});
        out.push_back({0.5 * b, top, 1.0, 1});
    }
    return out;
}

int grid_size_for_q(double q, int factor, int min_n) {
    int n = factor * static_cast<int>(std::ceil(std::sqrt(q)));
    n = std::max(n, min_n);
    if (n % 2) ++n;
    return n;
}

double peak_aligned_q(const DampingProfile& p, double q_target, int n, double eps2) {
    const PeriodicGrid g(n);
    const double beta0 = worst_beta(p, q_target, g, eps2).beta;
    const double k = std::ceil(std::sqrt(q_target * q_target - beta0));
    double qa = std::sqrt(k * k + beta0);
    const double beta1 = worst_beta(p, qa, g, eps2).beta;
    qa = std::sqrt(k * k + beta1);
    return qa;
}

ResolventPoint resolvent_measure(const DampingProfile& p, double q_target, const ResolventFitOptions& opt) {
    const int n = opt.fixed_n ? *opt.fixed_n : grid_size_for_q(q_target, opt.grid_factor, opt.min_n);
    const PeriodicGrid g(n);
    ResolventPoint pt{q_target, q_target, n, 0.0, -1, 0.0};
    switch (opt.strategy) {
        case BetaStrategy::Modes: {
            if (opt.align_to_peak) pt.q = peak_aligned_q(p, q_target, n, opt.eps2);
            const Resolvent2D r = resolvent_2d_norm(p, pt.q, g, opt.margin);
            if (r.singular)
                throw NumericalError("singular 2D resolvent", {pt.q, r.beta_star, std::nullopt, r.k_star});
            pt.beta = r.beta_star;
            pt.k = r.k_star;
            pt.norm = r.norm;
            break;
        }
        case BetaStrategy::Worst: {
            const WorstBeta w = worst_beta(p, q_target, g, opt.eps2);
            pt.beta = w.beta;
            pt.norm = w.norm;
            break;
        }
        case BetaStrategy::List: {
            if (opt.beta_list.empty()) throw std::invalid_argument("beta list strategy needs betas");
            for (const auto& [b, v] : beta_sweep(p, q_target, opt.beta_list, g))
                if (v > pt.norm) pt.norm = v, pt.beta = b;
            break;
        }
    }
    if (!std::isfinite(pt.norm))
        throw NumericalError("non-finite resolvent norm", {pt.q, pt.beta, std::nullopt, std::nullopt});
    return pt;
}

ResolventFit fit_resolvent_exponent(const DampingProfile& p, const std::vector<double>& q_list,
                                    const ResolventFitOptions& opt) {
    if (q_list.size() < 5) throw std::invalid_argument("resolvent fit needs at least 5 q values");
    ResolventFit out;
    std::vector<double> qs, norms;
    for (double q : q_list) {
        out.points.push_back(resolvent_measure(p, q, opt));
        qs.push_back(out.points.back().q);
        norms.push_back(out.points.back().norm);
    }
    out.fit = fit_loglog(qs, norms);
    return out;
}

ExponentFit fit_resolvent_exponent(const std::vector<double>& q_list, const std::vector<double>& norms) {
    if (q_list.size() < 5) throw std::invalid_argument("resolvent fit needs at least 5 q values");
    return fit_loglog(q_list, norms);
}

}  // namespace dwt
