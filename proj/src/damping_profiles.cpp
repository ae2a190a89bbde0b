#include "dwt/damping_profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dwt {
namespace {

constexpr double kPi = std::numbers::pi;

Jet zero_like(const Jet& x) { return Jet::constant(0.0, x.order_x(), x.order_xi()); }

// Blend W_pure(d) into the constant W_pure(d_a) on [d_a, d_b].
XJetFn blended(std::function<Jet(const Jet&)> pure, double sigma, double d_a, double d_b) {
    const double c = pure(Jet::constant(d_a, 0, 0)).real_value();
    return [=](const Jet& x) {
        const Jet d = strip_distance(x, sigma);
        const double dv = d.real_value();
        if (dv <= 0.0) return zero_like(x);
        if (dv <= d_a) return pure(d);
        if (dv >= d_b) return Jet::constant(c, x.order_x(), x.order_xi());
        const Jet s = smooth_step((d - d_a) / (d_b - d_a));
        return pure(d) * (1.0 - s) + s * c;
    };
}

// Smallest m with W(sigma + d) >= floor for every sampled d in [m, pi - sigma].
double floor_margin(const DampingProfile& p) {
    const int samples = 20000;
    const double span = kPi - p.sigma;
    double last_bad = -1.0;
    for (int i = 0; i <= samples; ++i) {
        const double d = span * i / samples;
        if (p.W(p.sigma + d) < p.floor) last_bad = d;
    }
    if (last_bad < 0.0) return 0.0;
    double lo = last_bad, hi = std::min(span, last_bad + span / samples);
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (p.W(p.sigma + mid) < p.floor) lo = mid; else hi = mid;
    }
    return hi;
}

void finish(DampingProfile& p) {
    p.floor = 0.5 * p.W(kPi);
    p.floor_margin = floor_margin(p);
}

void check_sigma(double sigma) {
    if (!(sigma > 0.0 && sigma < kPi))
        throw std::invalid_argument("sigma must lie in (0, pi), got " + std::to_string(sigma));
}

}  // namespace

Jet strip_distance(const Jet& x, double sigma) {
    const double shift = periodic_rep(x.real_value()) - x.real_value();
    Jet xr = x + shift;
    return abs_jet(xr) - sigma;
}

double DampingProfile::W(double x) const { return W_jet(Jet::constant(x, 0, 0)).real_value(); }

double DampingProfile::dW(double x) const {
    return W_jet(Jet::var_x(x, 1, 0)).derivative(1, 0).real();
}

Eigen::VectorXd DampingProfile::sample_W(const PeriodicGrid& g) const {
    const int n = g.n();
    Eigen::VectorXd w(n);
    if (even) {
        for (int j = 0; j <= n / 2; ++j) w[j] = W(g.node(j));
        for (int j = n / 2 + 1; j < n; ++j) w[j] = w[n - j];
    } else {
        for (int j = 0; j < n; ++j) w[j] = W(g.node(j));
    }
    return w;
}

DampingProfile strip_constant_profile(double sigma, double smoothing) {
    check_sigma(sigma);
    if (!(smoothing >= 0.0 && smoothing < kPi - sigma))
        throw std::invalid_argument("smoothing must lie in [0, pi - sigma)");
    DampingProfile p;
    p.name = "strip_constant";
    p.sigma = sigma;
    p.sigma1 = std::max(smoothing, 0.5 * (kPi - sigma));
    if (smoothing == 0.0) {
        p.W_jet = [sigma](const Jet& x) {
            const double d = strip_distance(Jet::constant(x.real_value(), 0, 0), sigma).real_value();
            return Jet::constant(d > 0.0 ? 1.0 : 0.0, x.order_x(), x.order_xi());
        };
        p.k0 = 0;
        p.max_derivative = 0;
    } else {
        p.W_jet = [sigma, smoothing](const Jet& x) {
            return smooth_step(strip_distance(x, sigma) / smoothing);
        };
        p.k0.reset();
        p.max_derivative = Jet::kMaxOrder;
    }
    finish(p);
    return p;
}

DampingProfile polynomial_profile(double sigma, double beta_exp) {
    check_sigma(sigma);
    if (!(beta_exp > 0.0)) throw std::invalid_argument("beta_exp must be positive");
    DampingProfile p;
    p.name = "polynomial";
    p.sigma = sigma;
    const double d_a = 0.6 * (kPi - sigma), d_b = 0.9 * (kPi - sigma);
    p.sigma1 = d_a;
    const bool integer_exp = beta_exp == std::floor(beta_exp);
    auto pure = [beta_exp, integer_exp](const Jet& d) {
        return integer_exp ? ipow(d, static_cast<int>(beta_exp)) : pow(d, beta_exp);
    };
    p.W_jet = blended(pure, sigma, d_a, d_b);
    const double half = 0.5 * beta_exp;
    p.factors.push_back([sigma, half](const Jet& x) {
        const Jet d = strip_distance(x, sigma);
        if (d.real_value() <= 0.0) return zero_like(x);
        return half == std::floor(half) ? ipow(d, static_cast<int>(half)) : pow(d, half);
    });
    p.k0 = static_cast<int>(std::floor(half));
    p.max_derivative = integer_exp ? Jet::kMaxOrder : static_cast<int>(std::floor(beta_exp));
    finish(p);
    return p;
}

DampingProfile oscillating_profile(double sigma) {
    check_sigma(sigma);
    DampingProfile p;
    p.name = "oscillating";
    p.sigma = sigma;
    const double d_a = 0.6 * (kPi - sigma), d_b = 0.9 * (kPi - sigma);
    p.sigma1 = d_a;
    auto pure = [](const Jet& d) {
        const Jet inv = reciprocal(d);
        const Jet s = sin(inv);
        return exp(-inv) * s * s;
    };
    p.W_jet = blended(pure, sigma, d_a, d_b);
    p.factors.push_back([sigma](const Jet& x) {
        const Jet d = strip_distance(x, sigma);
        if (d.real_value() <= 0.0) return zero_like(x);
        const Jet inv = reciprocal(d);
        return exp(-0.5 * inv) * sin(inv);
    });
    p.k0.reset();
    p.max_derivative = Jet::kMaxOrder;
    finish(p);
    return p;
}

DampingProfile constant_profile(double c, double sigma) {
    DampingProfile p;
    p.name = "constant";
    p.sigma = sigma;
    p.sigma1 = 0.5 * (kPi - sigma);
    p.W_jet = [c](const Jet& x) { return Jet::constant(c, x.order_x(), x.order_xi()); };
    p.k0.reset();
    p.max_derivative = Jet::kMaxOrder;
    p.floor = 0.5 * c;
    p.floor_margin = 0.0;
    return p;
}

DampingProfile custom_profile(std::string name, std::function<double(double)> W, double sigma,
                              double sigma1, double floor) {
    DampingProfile p;
    p.name = std::move(name);
    p.sigma = sigma;
    p.sigma1 = sigma1;
    p.W_jet = [W](const Jet& x) {
        return Jet::constant(W(x.real_value()), x.order_x(), x.order_xi());
    };
    p.max_derivative = 0;
    p.even = false;
    p.floor = floor;
    p.floor_margin = 0.0;
    return p;
}

std::vector<std::string> profile_names() {
    return {"strip_constant", "polynomial", "oscillating", "constant"};
}

DampingProfile profile_by_name(const std::string& name,
                               const std::vector<std::pair<std::string, double>>& params) {
    auto get = [&](const std::string& key, double fallback) {
        for (const auto& [k, v] : params)
            if (k == key) return v;
        return fallback;
    };
    if (name == "strip_constant") return strip_constant_profile(get("sigma", 1.0), get("smoothing", 0.0));
    if (name == "polynomial") return polynomial_profile(get("sigma", 1.0), get("beta_exp", 2.0));
    if (name == "oscillating") return oscillating_profile(get("sigma", 1.0));
    if (name == "constant") return constant_profile(get("c", 1.0), get("sigma", 1.0));
    throw std::out_of_range("unknown profile '" + name + "'");
}

HypothesisReport check_hypotheses(const DampingProfile& p, const PeriodicGrid& g) {
    HypothesisReport r;
    r.floor = p.floor;
    r.min_outside = std::numeric_limits<double>::infinity();
    const double edge = p.sigma + p.floor_margin + 1e-9;
    for (int j = 0; j < g.n(); ++j) {
        const double x = g.node(j);
        const double xr = periodic_rep(x);
        const double w = p.W(x);
        if (w < 0.0) {
            ++r.negative_count;
            r.most_negative = std::min(r.most_negative, w);
        }
        if (std::abs(xr) > edge) r.min_outside = std::min(r.min_outside, w);
        if (!p.factors.empty() && std::abs(xr) < p.sigma + p.sigma1) {
            r.factors_checked = true;
            double sum = 0.0;
            for (const auto& v : p.factors) {
                const double vj = v(Jet::constant(x, 0, 0)).real_value();
                sum += vj * vj;
            }
            r.max_factor_residual = std::max(r.max_factor_residual, std::abs(w - sum));
        }
    }
    r.floor_ok = !(p.floor > 0.0) ? false : r.min_outside >= p.floor;
    r.factors_ok = !r.factors_checked || r.max_factor_residual <= 1e-12;
    return r;
}

namespace {

double collar_sup(const DampingProfile& p, int n, bool spectral) {
    const PeriodicGrid g(n);
    Eigen::VectorXd w = p.sample_W(g);
    Eigen::VectorXd dw(n);
    if (spectral) {
        GridFunction f(g, w.cast<cplx>());
        dw = derivative(f, 1).values.real();
    } else {
        for (int j = 0; j < n; ++j) dw[j] = p.dW(g.node(j));
    }
    double sup = 0.0;
    for (int j = 0; j < n; ++j) {
        const double xr = std::abs(periodic_rep(g.node(j)));
        if (xr <= p.sigma || xr >= p.sigma + p.sigma1) continue;
        if (w[j] <= 1e-12) continue;
        sup = std::max(sup, std::abs(dw[j]) / std::sqrt(w[j]));
    }
    return sup;
}

}  // namespace

GradientBound gradient_bound_constant(const DampingProfile& p, const PeriodicGrid& g) {
    GradientBound b;
    b.spectral = p.max_derivative < 1;
    // Cumulative sup over nested refinements: finer grids contain the coarse
    // nodes, so the sequence is monotone and growth reflects the zero set.
    constexpr int kLevels = 6;
    b.constant = collar_sup(p, g.n(), b.spectral);
    double cumulative = b.constant;
    if (!b.spectral) {
        for (int level = 1; level <= kLevels; ++level)
            cumulative = std::max(cumulative, collar_sup(p, g.n() << level, false));
    } else {
        cumulative = std::max(cumulative, collar_sup(p, 2 * g.n(), true));
    }
    b.refined = cumulative;
    b.divergent = cumulative > 1.25 * b.constant;
    return b;
}

double tau_min(int k0) {
    if (k0 < 9) throw std::invalid_argument("tau_min requires k0 >= 9");
    const double a = (k0 + 2.0) / (2.0 * k0 - 4.0);
    const double b = 7.0 / (k0 - 1.0);
    return std::max(a, b);
}

double alpha_of_tau(double tau) { return 2.0 / (tau + 2.0); }

}  // namespace dwt
