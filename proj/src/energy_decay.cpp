#include "dwt/energy_decay.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "dwt/linalg.hpp"
#include "dwt/rng.hpp"

namespace dwt {
namespace {

constexpr double kConditionLimit = 1e12;

Eigen::MatrixXd generator(const DampingProfile& p, int k, const PeriodicGrid& g) {
    const int n = g.n();
    const Eigen::MatrixXd lap = spectral_laplacian(g);
    const Eigen::VectorXd w = p.sample_W(g);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    G.topRightCorner(n, n).setIdentity();
    G.bottomLeftCorner(n, n) = -lap;
    G.bottomLeftCorner(n, n).diagonal().array() -= double(k) * k;
    G.bottomRightCorner(n, n).diagonal() = -w;
    return G;
}

ModeState split_state(int k, const PeriodicGrid& g, const CVector& y) {
    const int n = g.n();
    return ModeState{k, GridFunction(g, y.head(n)), GridFunction(g, y.tail(n))};
}

// Rectangle-rule pairing with a real weight.
double weighted_norm2(const GridFunction& u, const Eigen::VectorXd& w) {
    return u.grid.spacing() * (w.array() * u.values.array().abs2()).sum();
}

std::vector<double> sqrt_ratio(const DecayTrace& t) {
    std::vector<double> r;
    for (double e : t.energies) r.push_back(std::sqrt(std::max(e, 0.0)) / t.data_norm);
    return r;
}

}  // namespace

ModeEvolution evolve_mode(const DampingProfile& p, int k, const GridFunction& v0, const GridFunction& v1,
                          const std::vector<double>& t_list, EvolveMethod method) {
    if (v0.grid != v1.grid) throw std::invalid_argument("v0 and v1 live on different grids");
    if (t_list.empty() || t_list.front() != 0.0) throw std::invalid_argument("t_list must start at 0");
    for (size_t i = 1; i < t_list.size(); ++i)
        if (!(t_list[i] > t_list[i - 1])) throw std::invalid_argument("t_list must be increasing");

    const PeriodicGrid& g = v0.grid;
    const int n = g.n();
    const Eigen::MatrixXd G = generator(p, k, g);
    CVector x0(2 * n);
    x0 << v0.values, v1.values;

    ModeEvolution out;
    if (method != EvolveMethod::Expm) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(G, true);
        if (es.info() == Eigen::Success) {
            const CMatrix V = es.eigenvectors();
            const Eigen::VectorXd sv = Eigen::BDCSVD<CMatrix>(V).singularValues();
            out.eigen_condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
            if (out.eigen_condition <= kConditionLimit || method == EvolveMethod::Eigen) {
                const CVector lambda = es.eigenvalues();
                const CVector c = V.partialPivLu().solve(x0);
                for (double t : t_list) {
                    const CVector y = V * (lambda * t).array().exp().matrix().cwiseProduct(c);
                    out.states.push_back(split_state(k, g, y));
                }
                return out;
            }
        } else if (method == EvolveMethod::Eigen) {
            throw NumericalError("generator eigendecomposition failed", {std::nullopt, std::nullopt, std::nullopt, k});
        }
    }

    // Propagate increment by increment; equal increments share one exponential.
    out.used_fallback = true;
    const double tol = 1e-13 * std::max(1.0, t_list.back());
    std::map<double, Eigen::MatrixXd> cache;
    CVector y = x0;
    out.states.push_back(split_state(k, g, y));
    for (size_t i = 1; i < t_list.size(); ++i) {
        const double dt = t_list[i] - t_list[i - 1];
        auto it = cache.lower_bound(dt - tol);
        if (it == cache.end() || it->first > dt + tol) {
            const Eigen::MatrixXd E = (G * dt).exp();
            it = cache.emplace(dt, E).first;
        }
        y = it->second.cast<cplx>() * y;
        out.states.push_back(split_state(k, g, y));
    }
    return out;
}

double mode_energy(const ModeState& s) {
    if (s.v.grid != s.vt.grid) throw std::invalid_argument("mode state on mismatched grids");
    const double grad2 = -l2_inner(derivative(s.v, 2), s.v).real();
    const double v2 = std::pow(l2_norm(s.v), 2);
    const double vt2 = std::pow(l2_norm(s.vt), 2);
    return 0.5 * (grad2 + double(s.k) * s.k * v2 + vt2);
}

double total_energy(const std::vector<ModeState>& states) {
    double e = 0.0;
    for (const ModeState& s : states) {
        if (s.v.grid != states.front().v.grid) throw std::invalid_argument("modes on different grids");
        e += mode_energy(s);
    }
    return e;
}

double data_norm(int k, const GridFunction& v0, const GridFunction& v1) {
    auto norm = [k](const GridFunction& u, int s) {
        const CVector c = fourier_coefficients(u);
        double acc = 0.0;
        for (int slot = 0; slot < u.grid.n(); ++slot) {
            const double kx = u.grid.frequency(slot);
            acc += std::pow(1.0 + kx * kx + double(k) * k, s) * std::norm(c[slot]);
        }
        return std::sqrt(2.0 * M_PI * acc);
    };
    return norm(v0, 2) + norm(v1, 1);
}

double DecayTrace::max_increase() const {
    double m = -INFINITY;
    for (size_t i = 1; i < energies.size(); ++i) m = std::max(m, energies[i] - energies[i - 1]);
    return m;
}

DecayTrace decay_trace(const DampingProfile& p, int k, const GridFunction& v0, const GridFunction& v1,
                       const std::vector<double>& t_list) {
    const ModeEvolution ev = evolve_mode(p, k, v0, v1, t_list);
    DecayTrace tr;
    tr.times = t_list;
    for (const ModeState& s : ev.states) tr.energies.push_back(mode_energy(s));
    tr.data_norm = data_norm(k, v0, v1);
    return tr;
}

ExponentFit fit_decay_exponent(const DecayTrace& trace, std::pair<double, double> window) {
    if (trace.times.empty() || window.first < trace.times.front() || window.second > trace.times.back() ||
        !(window.first < window.second))
        throw std::invalid_argument("fit window outside the trace");
    std::vector<double> x, y;
    for (size_t i = 0; i < trace.times.size(); ++i) {
        const double t = trace.times[i];
        if (t < window.first || t > window.second) continue;
        if (!(trace.energies[i] > 0.0)) throw std::invalid_argument("nonpositive energy in fit window");
        x.push_back(std::log1p(t));
        y.push_back(std::log(std::sqrt(trace.energies[i]) / trace.data_norm));
    }
    ExponentFit f = fit_line(x, y);
    f.slope = -f.slope;
    f.window = window;
    return f;
}

std::pair<double, double> default_window(const DecayTrace& trace) {
    const double e0 = trace.energies.front();
    double T = trace.times.back();
    for (size_t i = 0; i < trace.times.size(); ++i)
        if (trace.energies[i] <= 1e-3 * e0) {
            T = trace.times[i];
            break;
        }
    // Stop before the rounding floor.
    for (size_t i = 0; i < trace.times.size() && trace.times[i] <= T; ++i)
        if (trace.energies[i] < 1e-12 * e0) {
            T = trace.times[i > 0 ? i - 1 : 0];
            break;
        }
    return {0.25 * T, T};
}

DecayClassification classify_decay(const DecayTrace& trace, std::pair<double, double> window) {
    const double mid = std::exp(0.5 * (std::log1p(window.first) + std::log1p(window.second))) - 1.0;
    DecayClassification c;
    c.early = fit_decay_exponent(trace, {window.first, mid});
    c.late = fit_decay_exponent(trace, {mid, window.second});
    c.super_polynomial = c.late.slope > 1.5 * c.early.slope;
    return c;
}

EnsembleResult worst_case_ensemble(const DampingProfile& p, int k_max, const PeriodicGrid& g,
                                   const std::vector<double>& t_list, std::uint64_t seed, int random_members,
                                   int jobs) {
    if (k_max < 1 || k_max > g.n() / 4) throw std::invalid_argument("k_max must lie in [1, n/4]");
    struct Datum {
        std::string label;
        int k;
        GridFunction v0, v1;
    };
    std::vector<Datum> data;
    const double r = 0.9 * p.sigma;
    const GridFunction bump = sample(
        [r](double x) -> cplx {
            const double t = periodic_rep(x) / r;
            return std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
        },
        g);
    // Flat tops sit closer to the undamped x-invariant rays and decay slowest.
    auto flat = [&](double a) {
        return sample([a, s = p.sigma](double x) -> cplx { return plateau(std::abs(periodic_rep(x)), a * s, s); }, g);
    };
    const GridFunction flat50 = flat(0.5);
    const GridFunction zero(g);
    std::vector<int> ks;
    // Powers of two plus their sqrt(2) midpoints: a sparser set leaves the
    // envelope scalloped between modes and biases the fitted exponent up.
    for (int j = 0; std::lround(std::pow(2.0, 0.5 * j)) <= k_max; ++j) {
        const int k = static_cast<int>(std::lround(std::pow(2.0, 0.5 * j)));
        if (ks.empty() || ks.back() != k) ks.push_back(k);
    }
    for (int k : ks) {
        data.push_back({"bump_v0_k" + std::to_string(k), k, bump, zero});
        data.push_back({"bump_v1_k" + std::to_string(k), k, zero, bump});
        data.push_back({"flat50_v1_k" + std::to_string(k), k, zero, flat50});
    }
    const int band = std::min(16, g.n() / 4);
    for (int m = 0; m < random_members; ++m) {
        const CounterRng rng(seed, static_cast<std::uint64_t>(m));
        std::uint64_t ctr = 0;
        const int k = ks[static_cast<size_t>(rng.uniform(ctr++) * ks.size())];
        auto draw = [&]() {
            CVector c = CVector::Zero(g.n());
            for (int f = 0; f <= band; ++f) {
                const double re = rng.symmetric(ctr++);
                const double im = f == 0 ? 0.0 : rng.symmetric(ctr++);
                const cplx a(re, im);
                c[f] += a;
                if (f > 0) c[g.n() - f] += std::conj(a);
            }
            return from_fourier(g, c);
        };
        GridFunction a = draw(), b = draw();
        data.push_back({"random" + std::to_string(m) + "_k" + std::to_string(k), k, a, b});
    }

    // Unit data norm keeps energies O(1), so monotonicity is testable at 1e-10.
    for (Datum& d : data) {
        const double dn = data_norm(d.k, d.v0, d.v1);
        d.v0.values /= dn;
        d.v1.values /= dn;
    }

    EnsembleResult res;
    res.members.resize(data.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (size_t i = next++; i < data.size(); i = next++) {
            EnsembleMember m;
            m.label = data[i].label;
            m.k = data[i].k;
            m.trace = decay_trace(p, m.k, data[i].v0, data[i].v1, t_list);
            res.members[i] = std::move(m);
        }
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    res.worst.times = t_list;
    res.worst.energies.assign(t_list.size(), 0.0);
    res.worst.data_norm = 1.0;
    double final_best = -1.0;
    for (size_t i = 0; i < res.members.size(); ++i) {
        const DecayTrace& tr = res.members[i].trace;
        const std::vector<double> ratio = sqrt_ratio(tr);
        const double dn2 = tr.data_norm * tr.data_norm;
        for (size_t j = 0; j < ratio.size(); ++j)
            res.worst.energies[j] = std::max(res.worst.energies[j], tr.energies[j] / dn2);
        if (ratio.back() > final_best) {
            final_best = ratio.back();
            res.slowest = static_cast<int>(i);
        }
    }
    const auto window = default_window(res.worst);
    res.worst_fit = fit_decay_exponent(res.worst, window);
    for (EnsembleMember& m : res.members) {
        try {
            m.fit = fit_decay_exponent(m.trace, window);
        } catch (const std::invalid_argument&) {
            m.fit = ExponentFit{};  // member fully decayed inside the window
            m.fit.slope = INFINITY;
            m.fit.window = window;
        }
    }
    return res;
}

AlphaCrossCheck cross_check_alpha(double s, double fitted_alpha, double tolerance) {
    if (!(s > 0.0)) throw std::invalid_argument("resolvent slope must be positive");
    AlphaCrossCheck c;
    c.resolvent_slope = s;
    c.predicted = 1.0 / (1.0 + s);
    c.fitted = fitted_alpha;
    c.difference = std::abs(c.predicted - fitted_alpha);
    c.pass = c.difference <= tolerance;
    return c;
}

EnergyIdentity energy_identity_check(const DampingProfile& p, int k, const GridFunction& v0,
                                     const GridFunction& v1, double T, int steps) {
    if (steps < 2 || steps % 2) throw std::invalid_argument("Simpson quadrature needs an even step count");
    std::vector<double> ts;
    for (int i = 0; i <= steps; ++i) ts.push_back(T * i / steps);
    const ModeEvolution ev = evolve_mode(p, k, v0, v1, ts);
    const Eigen::VectorXd w = p.sample_W(v0.grid);
    double integral = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double wt = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        integral += wt * weighted_norm2(ev.states[i].vt, w);
    }
    integral *= (T / steps) / 3.0;
    EnergyIdentity r;
    r.energy_loss = mode_energy(ev.states.front()) - mode_energy(ev.states.back());
    r.dissipation = integral;
    r.relative_error = std::abs(r.energy_loss - r.dissipation) / std::max(std::abs(r.energy_loss), 1e-300);
    return r;
}

}  // namespace dwt
