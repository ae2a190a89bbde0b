#include "dwt/weyl_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dwt/fft.hpp"
#include "dwt/stationary_resolvent.hpp"

namespace dwt {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

double binomial(int m, int r) { return factorial(m) / (factorial(r) * factorial(m - r)); }

// Coefficient of the k-th composition term for Op(xi) = (h/i) d/dx.
cplx moyal_coefficient(double h, int k) { return std::pow(cplx(0.0, -0.5 * h), k) / factorial(k); }

Jet zero_jet(int ox, int oxi) { return Jet::constant(0.0, ox, oxi); }

void hermitize(CMatrix& m) {
    const CMatrix adj = m.adjoint();
    m = 0.5 * (m + adj);
}

double param(const SymbolParams& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) throw std::invalid_argument("symbol parameter '" + key + "' missing");
    return it->second;
}

// Smooth cutoff with a smooth square root: the square of a plateau.
Jet squared_plateau(const Jet& t, double a, double b) {
    const Jet r = plateau(t, a, b);
    return r * r;
}

Jet periodic(const Jet& x) { return x + (periodic_rep(x.real_value()) - x.real_value()); }

Jet z_expr(const Jet& xi, double h, double tau) {
    const Jet t = xi * std::pow(h, tau - 1.0);
    return (1.0 - plateau(t, 1.25, 1.5)) * plateau(xi, 2.0, 3.0);
}

Jet chi_xi_expr(const Jet& xi) { return plateau(xi, 3.5, 4.0); }

RemainderScaling finish_scaling(std::vector<double> hs, std::vector<double> norms, double predicted) {
    RemainderScaling r;
    r.h_values = std::move(hs);
    r.norms = std::move(norms);
    r.predicted_slope = predicted;
    const bool positive = std::all_of(r.norms.begin(), r.norms.end(), [](double v) { return v > 0.0; });
    if (positive) {
        r.fit = fit_loglog(r.h_values, r.norms);
        r.fitted_slope = r.fit.slope;
    } else {
        r.fitted_slope = kInf;
    }
    return r;
}

void check_h_list(const std::vector<double>& h_list) {
    if (h_list.size() < 4) throw std::invalid_argument("scaling study needs at least 4 h values");
    for (size_t i = 1; i < h_list.size(); ++i)
        if (!(h_list[i] < h_list[i - 1])) throw std::invalid_argument("h values must strictly decrease");
}

}  // namespace

bool SymbolSupport::contains(double x, double xi) const {
    return x >= x_lo && x <= x_hi && xi >= xi_lo && xi <= xi_hi;
}

Jet SemiclassicalSymbol::jet(double x, double xi, int ox, int oxi) const {
    if (ox > max_order || oxi > max_order)
        throw std::out_of_range("symbol '" + name + "': derivative order beyond available regularity");
    if (support && !support->contains(periodic_rep(x), xi)) return zero_jet(ox, oxi);
    return sampler(x, xi, ox, oxi);
}

cplx SemiclassicalSymbol::operator()(double x, double xi) const { return jet(x, xi, 0, 0).value(); }

SemiclassicalSymbol make_symbol(std::string name, SymbolExpr expr, double h, SymbolDependence dep,
                                std::optional<SymbolSupport> support, bool real) {
    SemiclassicalSymbol s;
    s.name = std::move(name);
    s.sampler = [expr = std::move(expr)](double x, double xi, int ox, int oxi) {
        return expr(Jet::var_x(x, ox, oxi), Jet::var_xi(xi, ox, oxi));
    };
    s.h = h;
    s.dependence = dep;
    s.support = support;
    s.real = real;
    return s;
}

OperatorMatrix quantize(const SemiclassicalSymbol& a, const PeriodicGrid& g) {
    const int n = g.n();
    const double h = a.h;
    auto nyquist_avg = [&](double x) { return 0.5 * (a(x, -h * n / 2) + a(x, h * n / 2)); };
    auto slot_value = [&](double x, int slot) {
        const int k = g.frequency(slot);
        return k == -n / 2 ? nyquist_avg(x) : a(x, h * k);
    };

    CMatrix m = CMatrix::Zero(n, n);
    if (a.dependence == SymbolDependence::XOnly) {
        for (int j = 0; j < n; ++j) m(j, j) = a(g.node(j), 0.0);
        if (a.real) m.diagonal() = m.diagonal().real().cast<cplx>();
        return m;
    }
    if (a.dependence == SymbolDependence::XiOnly) {
        CVector mult(n);
        for (int s = 0; s < n; ++s) mult[s] = slot_value(0.0, s);
        CVector c = fft::backward(mult);
        c /= static_cast<double>(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = c[((i - j) % n + n) % n];
        if (a.real) hermitize(m);
        return m;
    }

    // Frequency truncation is only faithful if the symbol has died out
    // before the band edge.
    for (int s = 0; s < 64; ++s) {
        const double x = 2.0 * kPi * s / 64.0;
        const double edge = std::max(std::abs(a(x, -h * n / 2)), std::abs(a(x, h * n / 2)));
        if (edge > 1e-12)
            throw std::invalid_argument("symbol '" + a.name + "' is not negligible at the band edge (|a| = " +
                                        std::to_string(edge) + "); refine the grid");
    }

    // Midpoints (x_i + x_j)/2 on the short arc take the 2n values pi s / n.
    CMatrix b(2 * n, n);
    CVector row(n);
    for (int s = 0; s < 2 * n; ++s) {
        const double x = kPi * s / n;
        bool any = false;
        for (int slot = 0; slot < n; ++slot) {
            row[slot] = slot_value(x, slot);
            any = any || row[slot] != cplx(0.0);
        }
        if (!any) {
            b.row(s).setZero();
            continue;
        }
        fft::backward(row.data(), n);
        b.row(s) = row.transpose() / static_cast<double>(n);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int d = i - j;
            int s = i + j;
            if (std::abs(d) > n / 2) s = (s + n) % (2 * n);
            m(i, j) = b(s, ((d % n) + n) % n);
        }
    if (a.real) hermitize(m);
    return m;
}

std::vector<std::string> symbol_names() {
    return {"z", "z_tilde", "chi", "psi", "a", "J_symbol", "s", "b_eps1"};
}

SemiclassicalSymbol symbol_library(const std::string& name, double h, double tau, const SymbolParams& params) {
    if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("h must lie in (0, 1]");
    const double scale = std::pow(h, tau - 1.0);  // xi -> xi h^{tau-1}
    SemiclassicalSymbol s;
    using D = SymbolDependence;
    if (name == "z") {
        s = make_symbol(name, [h, tau](const Jet&, const Jet& xi) { return z_expr(xi, h, tau); }, h, D::XiOnly,
                        SymbolSupport{-1e300, 1e300, -3.0, 3.0});
    } else if (name == "z_tilde") {
        s = make_symbol(name, [](const Jet&, const Jet& xi) { return 1.0 - plateau(xi, 1.0, 1.5); }, h,
                        D::XiOnly);
    } else if (name == "psi") {
        s = make_symbol(name, [scale](const Jet&, const Jet& xi) { return squared_plateau(xi * scale, 2.0, 3.0); },
                        h, D::XiOnly, SymbolSupport{-1e300, 1e300, -3.0 / scale, 3.0 / scale});
    } else if (name == "chi") {
        const double a = param(params, "sigma") + 0.5 * param(params, "sigma1");
        const double b = param(params, "sigma") + param(params, "sigma1");
        s = make_symbol(name, [a, b](const Jet& x, const Jet&) { return squared_plateau(periodic(x), a, b); }, h,
                        D::XOnly, SymbolSupport{-b, b, -1e300, 1e300});
    } else if (name == "a") {
        const double a = param(params, "sigma") + 0.5 * param(params, "sigma1");
        const double b = param(params, "sigma") + param(params, "sigma1");
        s = make_symbol(
            name,
            [a, b, scale](const Jet& x, const Jet& xi) {
                const Jet xr = periodic(x);
                const Jet t = xi * scale;
                return xr * squared_plateau(xr, a, b) * t * squared_plateau(t, 2.0, 3.0);
            },
            h, D::Both, SymbolSupport{-b, b, -3.0 / scale, 3.0 / scale});
    } else if (name == "J_symbol") {
        const double a = param(params, "sigma") + 0.5 * param(params, "sigma1");
        const double b = param(params, "sigma") + param(params, "sigma1");
        s = make_symbol(
            name,
            [a, b, scale](const Jet& x, const Jet& xi) {
                return plateau(periodic(x), a, b) * plateau(xi * scale, 2.0, 3.0);
            },
            h, D::Both, SymbolSupport{-b, b, -3.0 / scale, 3.0 / scale});
    } else if (name == "s") {
        const double a = param(params, "sigma");
        const double b = a + 0.5 * param(params, "sigma1");
        s = make_symbol(name, [a, b](const Jet& x, const Jet&) { return 1.0 - plateau(periodic(x), a, b); }, h,
                        D::XOnly);
    } else if (name == "b_eps1") {
        const double sigma = param(params, "sigma");
        const double eps1 = params.count("eps1") ? params.at("eps1") : 0.1;
        s = make_symbol(name, [sigma, eps1](const Jet& x, const Jet&) { return b_eps1_jet(x, sigma, eps1); }, h,
                        D::XOnly, SymbolSupport{-sigma - eps1, sigma + eps1, -1e300, 1e300});
    } else {
        throw std::out_of_range("unknown symbol '" + name + "'");
    }
    s.tau = tau;
    return s;
}

SemiclassicalSymbol moyal_term(const SemiclassicalSymbol& a, const SemiclassicalSymbol& b, int k) {
    SemiclassicalSymbol s;
    s.name = "moyal" + std::to_string(k) + "(" + a.name + "," + b.name + ")";
    s.h = a.h;
    s.tau = a.tau;
    s.gamma = a.gamma;
    const cplx coef = moyal_coefficient(a.h, k);
    s.sampler = [a, b, k, coef](double x, double xi, int ox, int oxi) {
        const Jet ja = a.jet(x, xi, ox + k, oxi + k);
        if (ja.is_zero()) return zero_jet(ox, oxi);
        const Jet jb = b.jet(x, xi, ox + k, oxi + k);
        Jet acc = zero_jet(ox, oxi);
        for (int r = 0; r <= k; ++r) {
            const double sign = ((k - r) % 2 == 0) ? 1.0 : -1.0;
            acc += (ja.differentiate(k - r, r) * jb.differentiate(r, k - r)) * (sign * binomial(k, r));
        }
        return acc.truncate(ox, oxi) * coef;
    };
    if (a.support && b.support) {
        SymbolSupport u;
        u.x_lo = std::max(a.support->x_lo, b.support->x_lo);
        u.x_hi = std::min(a.support->x_hi, b.support->x_hi);
        u.xi_lo = std::max(a.support->xi_lo, b.support->xi_lo);
        u.xi_hi = std::min(a.support->xi_hi, b.support->xi_hi);
        s.support = u;
    } else if (a.support) {
        s.support = a.support;
    } else if (b.support) {
        s.support = b.support;
    }
    if (a.dependence == b.dependence) s.dependence = a.dependence;
    s.real = a.real && b.real && (k % 2 == 0);
    s.max_order = std::min(a.max_order, b.max_order) - k;
    return s;
}

OperatorMatrix semiclassical_operator(const DampingProfile& p, double h, int gamma, double beta,
                                      const PeriodicGrid& g) {
    CMatrix m = (h * h) * spectral_laplacian(g).cast<cplx>();
    const Eigen::VectorXd w = p.sample_W(g);
    const double c = std::pow(h, 2.0 - gamma);
    for (int j = 0; j < g.n(); ++j) m(j, j) += cplx(-h * h * beta, c * w[j]);
    return m;
}

CommutatorIdentity commutator_identity_terms(const DampingProfile& p, double h, double tau, int gamma,
                                             const OperatorMatrix& A, const GridFunction& f,
                                             const GridFunction& u) {
    const PeriodicGrid& g = u.grid;
    const Eigen::VectorXd w = p.sample_W(g);
    const GridFunction au(g, A * u.values);
    const GridFunction d2au = derivative(au, 2);
    const GridFunction ad2u(g, A * derivative(u, 2).values);
    const GridFunction wu(g, (w.array().cast<cplx>() * u.values.array()).matrix());
    const GridFunction awu(g, A * wu.values);
    const GridFunction wau(g, (w.array().cast<cplx>() * au.values.array()).matrix());

    CommutatorIdentity c;
    c.laplacian_term = std::pow(h, 1.0 - tau) * h * h * (l2_inner(d2au, u) - l2_inner(ad2u, u));
    c.damping_term = cplx(0.0, std::pow(h, 3.0 - gamma - tau)) * (l2_inner(awu, u) + l2_inner(wau, u));
    c.source_term = cplx(0.0, 2.0 * std::pow(h, 3.0 - tau) * l2_inner(f, au).imag());
    const double scale = std::max({std::abs(c.laplacian_term), std::abs(c.damping_term), std::abs(c.source_term)});
    c.residual = scale > 0 ? std::abs(c.laplacian_term + c.damping_term - c.source_term) / scale : 0.0;
    return c;
}

CommutatorIdentity commutator_identity_check(const DampingProfile& p, double h, double tau, int gamma,
                                             double beta, const GridFunction& f) {
    const PeriodicGrid& g = f.grid;
    const SymbolParams params{{"sigma", p.sigma}, {"sigma1", p.sigma1}};
    const CMatrix A = quantize(symbol_library("a", h, tau, params), g);
    const CMatrix P = semiclassical_operator(p, h, gamma, beta, g);
    const GridFunction rhs(g, (h * h) * f.values);
    const GridFunction u = solve(P, rhs, {std::nullopt, beta, std::nullopt, h});
    return commutator_identity_terms(p, h, tau, gamma, A, f, u);
}

int grid_for_frequency(double h, double xi_max, double safety, int min_n) {
    int n = static_cast<int>(std::ceil(safety * 2.0 * xi_max / h));
    n = std::max(n, min_n);
    if (n % 2) ++n;
    return n;
}

namespace {

double xi_extent(const SemiclassicalSymbol& s) {
    if (s.dependence == SymbolDependence::XOnly) return 0.0;
    if (!s.support || s.support->xi_extent() > 1e299)
        throw std::invalid_argument("symbol '" + s.name + "' needs a xi support hint");
    return s.support->xi_extent();
}

}  // namespace

RemainderScaling composition_remainder(const SymbolFactory& a, const SymbolFactory& b, int N,
                                       const std::vector<double>& h_list, double rho) {
    check_h_list(h_list);
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    std::vector<double> norms;
    for (double h : h_list) {
        const SemiclassicalSymbol sa = a(h), sb = b(h);
        if (sa.max_order < N + 1 || sb.max_order < N + 1)
            throw std::invalid_argument("insufficient derivative order for N = " + std::to_string(N));
        const double xi_max = std::max(xi_extent(sa), xi_extent(sb));
        const PeriodicGrid g(grid_for_frequency(h, std::max(xi_max, 1.0)));
        CMatrix r = quantize(sa, g) * quantize(sb, g);
        for (int k = 0; k < N; ++k) r -= quantize(moyal_term(sa, sb, k), g);
        norms.push_back(largest_singular_value(r));
    }
    return finish_scaling(h_list, norms, N * (1.0 - rho));
}

RemainderScaling cutoff_conjugation_error(const SymbolFactory& t, const SymbolFactory& b,
                                          const std::vector<double>& h_list) {
    check_h_list(h_list);
    std::vector<double> norms;
    for (double h : h_list) {
        const SemiclassicalSymbol st = t(h), sb = b(h);
        if (!sb.support) throw std::invalid_argument("b needs a support hint");
        const SymbolSupport& sup = *sb.support;
        const double x0 = std::max(sup.x_lo, -kPi), x1 = std::min(sup.x_hi, kPi);
        const double xi0 = std::max(sup.xi_lo, -1e3), xi1 = std::min(sup.xi_hi, 1e3);
        for (int i = 0; i <= 100; ++i)
            for (int j = 0; j <= 100; ++j) {
                const double x = x0 + (x1 - x0) * i / 100.0, xi = xi0 + (xi1 - xi0) * j / 100.0;
                if (std::abs(st(x, xi) - 1.0) > 1e-12)
                    throw std::invalid_argument("plateau violation: t != 1 on the support of b at x = " +
                                                std::to_string(x));
            }
        const double xi_max = std::max({xi_extent(sb), st.dependence == SymbolDependence::XOnly ? 0.0 : xi_extent(st), 1.0});
        const PeriodicGrid g(grid_for_frequency(h, xi_max));
        const CMatrix T = quantize(st, g), B = quantize(sb, g);
        norms.push_back(largest_singular_value(CMatrix(T * B * T - B)));
    }
    return finish_scaling(h_list, norms, kInf);
}

Jet principal_symbol(const DampingProfile& p, const Jet& x, const Jet& xi, double h, int gamma, double beta) {
    return xi * xi + p.W_at(x) * cplx(0.0, std::pow(h, 2.0 - gamma)) - h * h * beta;
}

namespace {

struct ParametrixContext {
    DampingProfile profile;
    double h, tau, beta;
    int gamma;
};

// Jets of q_0..q_J at (x, xi); q_l carries orders (ox + J - l, oxi + J - l).
std::vector<Jet> parametrix_jets(const ParametrixContext& c, double x, double xi, int J, int ox, int oxi) {
    const int OX = ox + J, OXI = oxi + J;
    const Jet X = Jet::var_x(x, OX, OXI), XI = Jet::var_xi(xi, OX, OXI);
    std::vector<Jet> q;
    const Jet z = z_expr(XI, c.h, c.tau);
    if (z.is_zero()) {
        for (int l = 0; l <= J; ++l) q.push_back(zero_jet(ox + J - l, oxi + J - l));
        return q;
    }
    const Jet chip = chi_xi_expr(XI) * principal_symbol(c.profile, X, XI, c.h, c.gamma, c.beta);
    const Jet inv = reciprocal(chip);
    q.push_back(z * inv * std::pow(c.h, 2.0 - 2.0 * c.tau));
    for (int j = 1; j <= J; ++j) {
        const int oj = ox + J - j, ojxi = oxi + J - j;
        Jet sum = zero_jet(oj, ojxi);
        for (int l = 0; l < j; ++l) {
            const int m = j - l;
            Jet term = zero_jet(oj, ojxi);
            for (int r = 0; r <= m; ++r) {
                const double sign = ((m - r) % 2 == 0) ? 1.0 : -1.0;
                term += (q[l].differentiate(m - r, r) * chip.differentiate(r, m - r)) * (sign * binomial(m, r));
            }
            sum += term * moyal_coefficient(c.h, m);
        }
        q.push_back((-(sum * inv)).truncate(oj, ojxi));
    }
    return q;
}

}  // namespace

SemiclassicalSymbol chi_p_symbol(const DampingProfile& p, double h, int gamma, double beta) {
    SemiclassicalSymbol s = make_symbol(
        "chi_p",
        [p, h, gamma, beta](const Jet& x, const Jet& xi) {
            return chi_xi_expr(xi) * principal_symbol(p, x, xi, h, gamma, beta);
        },
        h, SymbolDependence::Both, SymbolSupport{-1e300, 1e300, -4.0, 4.0}, false);
    s.gamma = gamma;
    s.max_order = p.max_derivative;
    return s;
}

std::vector<SemiclassicalSymbol> parametrix_build(const DampingProfile& p, double h, double tau, int gamma,
                                                  double beta, int j_max) {
    if (!(h * h * beta < std::pow(h, 2.0 - 2.0 * tau)))
        throw std::invalid_argument("parametrix requires h^2 beta < h^{2-2tau}");
    if (j_max < 0) throw std::invalid_argument("j_max must be nonnegative");
    if (p.max_derivative < j_max)
        throw std::invalid_argument("profile '" + p.name + "' provides W derivatives only to order " +
                                    std::to_string(p.max_derivative) + " < j_max = " + std::to_string(j_max));
    const ParametrixContext ctx{p, h, tau, beta, gamma};
    std::vector<SemiclassicalSymbol> out;
    for (int j = 0; j <= j_max; ++j) {
        SemiclassicalSymbol s;
        s.name = "q" + std::to_string(j);
        s.h = h;
        s.tau = tau;
        s.gamma = gamma;
        s.real = false;
        s.support = SymbolSupport{-1e300, 1e300, -3.0, 3.0};
        s.max_order = std::max(0, std::min(Jet::kMaxOrder - j, p.max_derivative - j));
        s.sampler = [ctx, j](double x, double xi, int ox, int oxi) {
            return parametrix_jets(ctx, x, xi, j, ox, oxi)[j];
        };
        out.push_back(std::move(s));
    }
    return out;
}

ParametrixCheck parametrix_composition_check(const DampingProfile& p, const std::vector<double>& h_list,
                                             double tau, int gamma,
                                             const std::function<double(double)>& beta_rule, int j_max) {
    check_h_list(h_list);
    ParametrixCheck out;
    out.qj_norms.assign(j_max + 1, {});
    std::vector<double> norms;
    for (double h : h_list) {
        const double beta = beta_rule(h);
        const std::vector<SemiclassicalSymbol> qs = parametrix_build(p, h, tau, gamma, beta, j_max);
        const PeriodicGrid g(grid_for_frequency(h, 4.0));
        const CMatrix chip = quantize(chi_p_symbol(p, h, gamma, beta), g);
        const CMatrix z = quantize(symbol_library("z", h, tau, {}), g);
        const double scale = std::pow(h, 2.0 - 2.0 * tau);
        const double norm_by = std::pow(h, 3.0 - 2.0 * tau);
        CMatrix qsum = CMatrix::Zero(g.n(), g.n());
        for (int j = 0; j <= j_max; ++j) {
            const CMatrix qj = quantize(qs[j], g);
            out.qj_norms[j].push_back(largest_singular_value(qj));
            if (j == 0) {
                const CMatrix r0 = qj * chip - scale * z;
                out.single_term.push_back(largest_singular_value(r0) / norm_by);
            }
            qsum += qj;
        }
        const CMatrix r = qsum * chip - scale * z;
        norms.push_back(largest_singular_value(r) / norm_by);
    }
    out.normalized = finish_scaling(h_list, norms, 0.0);
    out.decreasing = norms.back() < norms.front();
    for (int j = 0; j <= j_max; ++j) {
        // q_j == 0 (e.g. x-independent p) has no finite slope.
        const auto& v = out.qj_norms[j];
        if (std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; })) {
            out.qj_fits.push_back(fit_loglog(h_list, v));
        } else {
            ExponentFit f;
            f.slope = kInf;
            out.qj_fits.push_back(f);
        }
        out.qj_predicted.push_back(j * (2.0 * tau - 1.0) + tau - 1.0);
    }
    return out;
}

EllipticReport elliptic_estimate_check(const DampingProfile& p, double h, double tau, int gamma, double beta,
                                       const GridFunction& f) {
    if (!(h * h * beta < std::pow(h, 2.0 - 2.0 * tau)))
        throw std::invalid_argument("elliptic estimate requires h^2 beta < h^{2-2tau}");
    const PeriodicGrid& g = f.grid;
    const CMatrix P = semiclassical_operator(p, h, gamma, beta, g);
    const GridFunction u = solve(P, GridFunction(g, (h * h) * f.values), {std::nullopt, beta, std::nullopt, h});
    const CMatrix Z = quantize(symbol_library("z", h, tau, {}), g);
    const CMatrix Zt = quantize(symbol_library("z_tilde", h, tau, {}), g);
    EllipticReport r;
    r.zu2 = std::pow(l2_norm(GridFunction(g, Z * u.values)), 2);
    r.ztu2 = std::pow(l2_norm(GridFunction(g, Zt * u.values)), 2);
    r.u2 = std::pow(l2_norm(u), 2);
    r.f2 = std::pow(l2_norm(f), 2);
    r.c_main = r.zu2 / (std::pow(h, 5.0 * tau - 1.0) * r.f2);
    r.c_weak = r.ztu2 / (std::pow(h, 4.0) * r.f2 + std::pow(h, 4.0 - gamma) * std::sqrt(r.f2 * r.u2));
    return r;
}

}  // namespace dwt
