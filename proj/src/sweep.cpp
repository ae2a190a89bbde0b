#include "dwt/sweep.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "dwt/damping_profiles.hpp"
#include "dwt/energy_decay.hpp"
#include "dwt/rng.hpp"
#include "dwt/weyl_calculus.hpp"

namespace dwt {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

const std::map<std::string, std::set<std::string>>& profile_params() {
    static const std::map<std::string, std::set<std::string>> m{
        {"strip_constant", {"sigma", "smoothing"}},
        {"polynomial", {"sigma", "beta_exp"}},
        {"oscillating", {"sigma"}},
        {"constant", {"c", "sigma"}},
    };
    return m;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (seps.find(c) != std::string::npos) {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError("key '" + key + "': not a number: '" + t + "'");
    return v;
}

long long parse_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError("key '" + key + "': not an integer: '" + t + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError("key '" + key + "': not a boolean: '" + t + "'");
}

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

std::string strategy_name(BetaStrategy s) {
    switch (s) {
        case BetaStrategy::Modes: return "modes";
        case BetaStrategy::Worst: return "worst";
        case BetaStrategy::List: return "list";
    }
    return "?";
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

GridFunction random_smooth(const PeriodicGrid& g, const CounterRng& rng, int band) {
    CVector c = CVector::Zero(g.n());
    std::uint64_t ctr = 0;
    for (int f = -band; f <= band; ++f) {
        const double re = rng.symmetric(ctr++);
        const double im = rng.symmetric(ctr++);
        c[(f + g.n()) % g.n()] = cplx(re, im) / (1.0 + f * f);
    }
    return from_fourier(g, c);
}

// Stream ids separate the random inputs of different checks.
std::uint64_t stream_id(const std::string& name, std::uint64_t index) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : name) h = (h ^ c) * 1099511628211ULL;
    return h ^ (index * 0x9e3779b97f4a7c15ULL);
}

struct Context {
    const SweepConfig& cfg;
    const RunOptions& opt;
    DampingProfile profile;
    RunReport& report;
    fs::path out;

    double tau() const { return cfg.tau.value_or(0.875); }
    int gamma() const { return cfg.gamma.value_or(2); }
    int grid_n(int fallback) const { return cfg.grid_n > 0 ? cfg.grid_n : fallback; }
};

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << body;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

template <class F>
void parallel_for(size_t count, int jobs, F&& body) {
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    auto worker = [&]() {
        for (size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

void check_resolvent_fit(Context& c) {
    ResolventFitOptions o;
    o.strategy = c.cfg.beta_strategy;
    o.align_to_peak = c.cfg.align_to_peak;
    o.beta_list = c.cfg.beta_list;
    if (c.cfg.grid_n > 0) o.fixed_n = c.cfg.grid_n;
    const auto& qs = c.cfg.q_values;
    if (qs.size() < 5) throw ConfigError("resolvent_fit needs at least 5 q values");
    std::vector<ResolventPoint> pts(qs.size());
    parallel_for(qs.size(), c.opt.jobs, [&](size_t i) { pts[i] = resolvent_measure(c.profile, qs[i], o); });

    std::ostringstream csv;
    csv << "q,beta,k,norm\n";
    FitSeries s{"q", "resolvent_norm", {}, {}};
    for (const ResolventPoint& p : pts) {
        csv << format_double(p.q) << ',' << format_double(p.beta) << ',' << p.k << ',' << format_double(p.norm)
            << '\n';
        s.x.push_back(p.q);
        s.y.push_back(p.norm);
    }
    write_file(c.out / "resolvent.csv", csv.str());
    const ExponentFit fit = fit_loglog(s.x, s.y);
    c.report.fits["resolvent"] = fit;
    c.report.series["resolvent"] = s;
}

void check_hypotheses(Context& c) {
    const PeriodicGrid g(c.grid_n(1024));
    const HypothesisReport h = check_hypotheses(c.profile, g);
    CheckResult r;
    r.pass = h.ok();
    r.values = {{"min_outside", h.min_outside},
                {"floor", h.floor},
                {"max_factor_residual", h.max_factor_residual},
                {"negative_count", double(h.negative_count)}};
    try {
        const GradientBound gb = gradient_bound_constant(c.profile, g);
        r.values["gradient_constant"] = gb.constant;
        r.values["gradient_constant_refined"] = gb.refined;
        r.values["gradient_divergent"] = gb.divergent ? 1.0 : 0.0;
    } catch (const std::invalid_argument&) {
        // Profiles without a collar have no gradient constant.
    }
    c.report.checks["hypotheses"] = r;
}

void check_damping_identity(Context& c) {
    const PeriodicGrid g(c.grid_n(512));
    CheckResult r;
    double worst = 0.0, min_slack = INFINITY;
    for (size_t i = 0; i < c.cfg.q_values.size(); ++i) {
        const CounterRng rng(c.cfg.seed, stream_id("damping_identity", i));
        const double q = c.cfg.q_values[i];
        const double beta = 50.0 * rng.uniform(1u << 20);
        const StationaryProblem sp(c.profile, q, beta, g);
        const GridFunction f = random_smooth(g, rng, 16);
        const GridFunction u = solve(assemble(sp), f, sp.point());
        const DampingIdentity d = damping_identity_check(sp, u, f);
        worst = std::max(worst, d.identity_residual);
        min_slack = std::min(min_slack, d.slack / std::max(d.rhs, 1e-300));
    }
    r.pass = worst <= 1e-10 && min_slack >= -1e-12;
    r.values = {{"max_identity_residual", worst}, {"min_relative_slack", min_slack}};
    c.report.checks["damping_identity"] = r;
}

void check_commutator_identity(Context& c) {
    const PeriodicGrid g(c.grid_n(512));
    CheckResult r;
    double worst = 0.0;
    for (size_t i = 0; i < c.cfg.q_values.size(); ++i) {
        const CounterRng rng(c.cfg.seed, stream_id("commutator_identity", i));
        const double h = std::pow(c.cfg.q_values[i], -1.0 / c.gamma());
        const GridFunction f = random_smooth(g, rng, 16);
        const CommutatorIdentity ci = commutator_identity_check(c.profile, h, c.tau(), c.gamma(), 1.0, f);
        worst = std::max(worst, ci.residual);
    }
    r.pass = worst <= 1e-10;
    r.values = {{"max_residual", worst}};
    c.report.checks["commutator_identity"] = r;
}

void check_low_energy(Context& c) {
    const PeriodicGrid g(c.grid_n(512));
    const double eps1 = 0.1;
    const double threshold = kPi * kPi / (16.0 * std::pow(c.profile.sigma + eps1, 2));
    const double beta = 0.5 * threshold;
    const CounterRng rng(c.cfg.seed, stream_id("low_energy", 0));
    const GridFunction f = random_smooth(g, rng, 16);
    CheckResult r;
    double cmin = INFINITY, cmax = 0.0, worst = 0.0;
    for (double q : c.cfg.q_values) {
        const LowEnergyReport le = low_energy_certificate(c.profile, q, beta, eps1, g, f);
        cmin = std::min(cmin, le.constant);
        cmax = std::max(cmax, le.constant);
        worst = std::max(worst, le.identity_residual);
    }
    const double spread = (cmax - cmin) / cmin;
    r.pass = spread < 0.2 && worst <= 1e-8;
    r.values = {{"beta", beta}, {"constant_min", cmin}, {"constant_max", cmax}, {"spread", spread},
                {"max_identity_residual", worst}};
    c.report.checks["low_energy"] = r;
}

SymbolFactory trig_symbol(bool sine) {
    return [sine](double h) {
        return make_symbol(
            sine ? "sin_psi" : "cos_psi",
            [sine](const Jet& x, const Jet& xi) { return (sine ? sin(x) : cos(x)) * plateau(xi, 1.0, 2.0); }, h,
            SymbolDependence::Both, SymbolSupport{-1e300, 1e300, -2.0, 2.0}, true);
    };
}

void check_moyal(Context& c) {
    std::vector<double> hs;
    for (int e = 3; e <= 8; ++e) hs.push_back(std::ldexp(1.0, -e));
    CheckResult r;
    r.pass = true;
    FitSeries last;
    for (int N = 1; N <= 3; ++N) {
        const RemainderScaling s = composition_remainder(trig_symbol(true), trig_symbol(false), N, hs);
        r.values["slope_N" + std::to_string(N)] = s.fitted_slope;
        r.pass = r.pass && s.fitted_slope >= N - 0.3;
        c.report.fits["moyal_N" + std::to_string(N)] = s.fit;
        c.report.series["moyal_N" + std::to_string(N)] = FitSeries{"h", "remainder_norm", s.h_values, s.norms};
    }
    auto xi_only = [](bool first) {
        return [first](double h) {
            return make_symbol(
                first ? "xi_cut" : "xi_sq_cut",
                [first](const Jet&, const Jet& xi) {
                    return first ? plateau(xi, 1.0, 2.0) : xi * xi * plateau(xi, 1.5, 2.5);
                },
                h, SymbolDependence::XiOnly, SymbolSupport{-1e300, 1e300, -2.5, 2.5}, true);
        };
    };
    const RemainderScaling z = composition_remainder(xi_only(true), xi_only(false), 1, hs);
    const double zmax = *std::max_element(z.norms.begin(), z.norms.end());
    r.values["xi_only_max_remainder"] = zmax;
    r.pass = r.pass && zmax <= 1e-12;
    c.report.checks["moyal"] = r;
}

void check_parametrix(Context& c) {
    std::vector<double> hs;
    for (int e = 4; e <= 7; ++e) hs.push_back(std::ldexp(1.0, -e));
    const ParametrixCheck pc =
        parametrix_composition_check(c.profile, hs, c.tau(), c.gamma(), [](double) { return 1.0; }, 3);
    CheckResult r;
    r.pass = pc.decreasing;
    r.values["normalized_first"] = pc.normalized.norms.front();
    r.values["normalized_last"] = pc.normalized.norms.back();
    for (int j = 0; j <= 2; ++j) {
        const double dev = std::abs(pc.qj_fits[j].slope - pc.qj_predicted[j]);
        r.values["q" + std::to_string(j) + "_slope"] = pc.qj_fits[j].slope;
        r.values["q" + std::to_string(j) + "_predicted"] = pc.qj_predicted[j];
        r.pass = r.pass && dev <= 0.3;
        c.report.fits["parametrix_q" + std::to_string(j)] = pc.qj_fits[j];
        c.report.series["parametrix_q" + std::to_string(j)] = FitSeries{"h", "operator_norm", hs, pc.qj_norms[j]};
    }
    c.report.checks["parametrix"] = r;
}

void check_decay(Context& c) {
    const PeriodicGrid g(c.cfg.decay_n);
    std::vector<double> ts{0.0};
    for (double t : logspace(0.5, c.cfg.decay_t_max, c.cfg.decay_samples)) ts.push_back(t);
    const EnsembleResult e = worst_case_ensemble(c.profile, c.cfg.decay_k_max, g, ts, c.cfg.seed, 4, c.opt.jobs);

    std::ostringstream csv;
    csv << "t,E,E_sqrt_over_datanorm\n";
    FitSeries s{"1+t", "E_sqrt_over_datanorm", {}, {}};
    for (size_t i = 0; i < ts.size(); ++i) {
        const double ratio = std::sqrt(e.worst.energies[i]);
        csv << format_double(ts[i]) << ',' << format_double(e.worst.energies[i]) << ',' << format_double(ratio)
            << '\n';
        c.report.decay_trace.push_back({ts[i], e.worst.energies[i], ratio});
        if (ts[i] >= e.worst_fit.window.first && ts[i] <= e.worst_fit.window.second) {
            s.x.push_back(1.0 + ts[i]);
            s.y.push_back(ratio);
        }
    }
    write_file(c.out / "decay.csv", csv.str());
    c.report.fits["decay_alpha"] = e.worst_fit;
    c.report.series["decay_alpha"] = s;

    CheckResult r;
    double max_inc = -INFINITY;
    for (const EnsembleMember& m : e.members) max_inc = std::max(max_inc, m.trace.max_increase());
    r.pass = max_inc <= 1e-10;
    r.values = {{"alpha", e.worst_fit.slope},
                {"r_squared", e.worst_fit.r_squared},
                {"window_lo", e.worst_fit.window.first},
                {"window_hi", e.worst_fit.window.second},
                {"max_energy_increase", max_inc},
                {"slowest_k", double(e.members[e.slowest].k)}};
    c.report.checks["decay_ensemble"] = r;

    auto it = c.report.fits.find("resolvent");
    if (it != c.report.fits.end() && it->second.slope > 0.0) {
        const AlphaCrossCheck x = cross_check_alpha(it->second.slope, e.worst_fit.slope);
        c.report.checks["alpha_cross_check"] = CheckResult{
            x.pass, {{"predicted", x.predicted}, {"fitted", x.fitted}, {"difference", x.difference}}};
    }
}

using CheckFn = void (*)(Context&);

// Order matters: the alpha cross-check reads the resolvent fit.
const std::vector<std::pair<std::string, CheckFn>>& registry() {
    static const std::vector<std::pair<std::string, CheckFn>> r{
        {"resolvent_fit", check_resolvent_fit},
        {"hypotheses", check_hypotheses},
        {"damping_identity", check_damping_identity},
        {"commutator_identity", check_commutator_identity},
        {"low_energy", check_low_energy},
        {"moyal", check_moyal},
        {"parametrix", check_parametrix},
        {"decay_ensemble", check_decay},
    };
    return r;
}

json fit_json(const ExponentFit& f) {
    return {{"slope", f.slope},
            {"intercept", f.intercept},
            {"r_squared", f.r_squared},
            {"window", {f.window.first, f.window.second}}};
}

std::string svg_plot(const std::string& name, const ExponentFit& fit, const FitSeries& s) {
    const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    std::vector<double> lx, ly;
    for (size_t i = 0; i < s.x.size(); ++i) {
        lx.push_back(std::log10(s.x[i]));
        ly.push_back(std::log10(s.y[i]));
    }
    // Decay fits store the negated slope; the line follows the data.
    const double sign = name == "decay_alpha" ? -1.0 : 1.0;
    auto line = [&](double x) { return (fit.intercept + sign * fit.slope * x * std::log(10.0)) / std::log(10.0); };
    double x0 = *std::min_element(lx.begin(), lx.end()), x1 = *std::max_element(lx.begin(), lx.end());
    double y0 = std::min({*std::min_element(ly.begin(), ly.end()), line(x0), line(x1)});
    double y1 = std::max({*std::max_element(ly.begin(), ly.end()), line(x0), line(x1)});
    if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
    if (y1 - y0 < 1e-12) y1 = y0 + 1.0;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream o;
    o.imbue(std::locale::classic());
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">log10 " << s.x_label
      << "</text>\n";
    o << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
      << ")\" text-anchor=\"middle\">log10 " << s.y_label << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
        o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" font-size=\"10\" text-anchor=\"middle\">"
          << format_double(std::round(xv * 100) / 100) << "</text>\n";
        o << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 3 << "\" font-size=\"10\" text-anchor=\"end\">"
          << format_double(std::round(yv * 100) / 100) << "</text>\n";
    }
    o << "<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
    for (size_t i = 0; i < lx.size(); ++i) o << px(lx[i]) << ',' << py(ly[i]) << ' ';
    o << "\"/>\n";
    for (size_t i = 0; i < lx.size(); ++i)
        o << "<circle cx=\"" << px(lx[i]) << "\" cy=\"" << py(ly[i]) << "\" r=\"2.5\" fill=\"steelblue\"/>\n";
    o << "<line x1=\"" << px(x0) << "\" y1=\"" << py(line(x0)) << "\" x2=\"" << px(x1) << "\" y2=\"" << py(line(x1))
      << "\" stroke=\"firebrick\" stroke-dasharray=\"6 4\"/>\n";
    o << "<text x=\"" << L + 10 << "\" y=\"" << T - 12 << "\">" << name << ": "
      << (name == "decay_alpha" ? "alpha" : "slope") << " = " << format_double(std::round(fit.slope * 1e4) / 1e4)
      << ", R^2 = " << format_double(std::round(fit.r_squared * 1e4) / 1e4) << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string SweepConfig::canonical() const {
    std::ostringstream o;
    o << "profile.name=" << profile << '\n';
    auto params = profile_params;
    std::sort(params.begin(), params.end());
    for (const auto& [k, v] : params) o << "profile." << k << '=' << format_double(v) << '\n';
    o << "sweep.grid_n=" << grid_n << '\n';
    o << "sweep.q_values=" << join_doubles(q_values) << '\n';
    o << "sweep.beta_strategy=" << strategy_name(beta_strategy) << '\n';
    o << "sweep.beta_list=" << join_doubles(beta_list) << '\n';
    o << "sweep.align_to_peak=" << (align_to_peak ? "true" : "false") << '\n';
    o << "sweep.tau=" << (tau ? format_double(*tau) : "default") << '\n';
    o << "sweep.gamma=" << (gamma ? std::to_string(*gamma) : "default") << '\n';
    o << "sweep.seed=" << seed << '\n';
    std::string names;
    for (size_t i = 0; i < checks.size(); ++i) names += (i ? "," : "") + checks[i];
    o << "checks.names=" << names << '\n';
    o << "decay.n=" << decay_n << "\ndecay.k_max=" << decay_k_max << "\ndecay.t_max=" << format_double(decay_t_max)
      << "\ndecay.samples=" << decay_samples << '\n';
    return o.str();
}

std::vector<std::string> check_names() {
    std::vector<std::string> out;
    for (const auto& [n, f] : registry()) out.push_back(n);
    return out;
}

SweepConfig parse_config(const std::string& text) {
    boost::property_tree::ptree tree;
    // The ini reader only knows whole-line ';' comments; drop '#' and ';' tails first.
    std::string cleaned;
    for (const std::string& line : split(text, "\n")) cleaned += line.substr(0, line.find_first_of("#;")) + '\n';
    std::istringstream in(cleaned);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.message() + " (line " +
                          std::to_string(e.line()) + ")");
    }

    SweepConfig cfg;
    bool have_profile = false;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("key '" + section + "' outside of a section");
        for (const auto& [key, node] : body) {
            const std::string v = node.get_value<std::string>();
            const std::string where = section + "." + key;
            if (section == "profile") {
                if (key == "name") {
                    cfg.profile = trim(v);
                    have_profile = true;
                } else {
                    cfg.profile_params.emplace_back(key, parse_double(where, v));
                }
            } else if (section == "sweep") {
                if (key == "grid_n") cfg.grid_n = static_cast<int>(parse_int(where, v));
                else if (key == "q_values") {
                    for (const std::string& s : split(v, ", ")) cfg.q_values.push_back(parse_double(where, s));
                } else if (key == "q_range") {
                    const auto parts = split(v, ", ");
                    if (parts.size() != 3) throw ConfigError(where + ": expected 'lo hi count'");
                    const double lo = parse_double(where, parts[0]), hi = parse_double(where, parts[1]);
                    const long long n = parse_int(where, parts[2]);
                    if (!(lo > 0 && hi > lo && n >= 2)) throw ConfigError(where + ": need 0 < lo < hi, count >= 2");
                    cfg.q_values = logspace(lo, hi, static_cast<int>(n));
                } else if (key == "beta_strategy") {
                    const std::string s = trim(v);
                    if (s == "modes") cfg.beta_strategy = BetaStrategy::Modes;
                    else if (s == "worst") cfg.beta_strategy = BetaStrategy::Worst;
                    else if (s == "list") cfg.beta_strategy = BetaStrategy::List;
                    else throw ConfigError(where + ": unknown strategy '" + s + "' (modes, worst, list)");
                } else if (key == "beta_list") {
                    for (const std::string& s : split(v, ", ")) cfg.beta_list.push_back(parse_double(where, s));
                } else if (key == "align_to_peak") cfg.align_to_peak = parse_bool(where, v);
                else if (key == "tau") cfg.tau = parse_double(where, v);
                else if (key == "gamma") cfg.gamma = static_cast<int>(parse_int(where, v));
                else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(where, v));
                else if (key == "output_dir") cfg.output_dir = trim(v);
                else throw ConfigError("unknown key '" + where + "'");
            } else if (section == "checks") {
                if (key != "names") throw ConfigError("unknown key '" + where + "'");
                cfg.checks = split(v, ", ");
            } else if (section == "decay") {
                if (key == "n") cfg.decay_n = static_cast<int>(parse_int(where, v));
                else if (key == "k_max") cfg.decay_k_max = static_cast<int>(parse_int(where, v));
                else if (key == "t_max") cfg.decay_t_max = parse_double(where, v);
                else if (key == "samples") cfg.decay_samples = static_cast<int>(parse_int(where, v));
                else throw ConfigError("unknown key '" + where + "'");
            } else {
                throw ConfigError("unknown section '[" + section + "]'");
            }
        }
    }
    if (!have_profile) throw ConfigError("missing [profile] name");
    auto known = profile_params().find(cfg.profile);
    if (known == profile_params().end()) throw UnknownNameError("unknown profile '" + cfg.profile + "'");
    for (const auto& [k, v] : cfg.profile_params)
        if (!known->second.count(k))
            throw ConfigError("profile '" + cfg.profile + "' has no parameter '" + k + "'");
    const auto names = check_names();
    for (const std::string& c : cfg.checks)
        if (std::find(names.begin(), names.end(), c) == names.end())
            throw UnknownNameError("unknown check '" + c + "'");
    if (cfg.beta_strategy == BetaStrategy::List && cfg.beta_list.empty())
        throw ConfigError("beta_strategy = list needs beta_list");
    if (cfg.grid_n != 0 && (cfg.grid_n < 8 || cfg.grid_n % 2))
        throw ConfigError("grid_n must be 0 or an even number >= 8");
    return cfg;
}

SweepConfig load_config(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return parse_config(os.str());
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string config_hash(const SweepConfig& cfg) {
    return sha256_hex(cfg.canonical() + "version=" + kToolkitVersion + "\n");
}

std::string report_to_json(const RunReport& r) {
    json j;
    j["config_hash"] = r.config_hash;
    j["fits"] = json::object();
    for (const auto& [name, f] : r.fits) j["fits"][name] = fit_json(f);
    j["checks"] = json::object();
    for (const auto& [name, c] : r.checks) j["checks"][name] = {{"pass", c.pass}, {"values", c.values}};
    j["provenance"] = r.provenance;
    j["series"] = json::object();
    for (const auto& [name, s] : r.series)
        j["series"][name] = {{"x_label", s.x_label}, {"y_label", s.y_label}, {"x", s.x}, {"y", s.y}};
    j["decay_trace"] = r.decay_trace;
    return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
    RunReport r;
    const json j = json::parse(text);
    r.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& [name, f] : j.at("fits").items()) {
        ExponentFit e;
        e.slope = f.at("slope").get<double>();
        e.intercept = f.at("intercept").get<double>();
        e.r_squared = f.at("r_squared").get<double>();
        e.window = {f.at("window")[0].get<double>(), f.at("window")[1].get<double>()};
        r.fits[name] = e;
    }
    for (const auto& [name, c] : j.at("checks").items())
        r.checks[name] = CheckResult{c.at("pass").get<bool>(), c.at("values").get<std::map<std::string, double>>()};
    r.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
    if (j.contains("series"))
        for (const auto& [name, s] : j.at("series").items())
            r.series[name] = FitSeries{s.at("x_label"), s.at("y_label"), s.at("x").get<std::vector<double>>(),
                                       s.at("y").get<std::vector<double>>()};
    if (j.contains("decay_trace")) r.decay_trace = j.at("decay_trace").get<std::vector<std::array<double, 3>>>();
    return r;
}

fs::path cache_directory(const RunOptions& opt) {
    if (opt.cache_dir) return *opt.cache_dir;
    if (const char* env = std::getenv("DWT_CACHE_DIR"); env && *env) return env;
    if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "dwt";
    return fs::temp_directory_path() / "dwt-cache";
}

RunReport run(const SweepConfig& cfg, const RunOptions& opt) {
    const std::string hash = config_hash(cfg);
    const fs::path out = cfg.output_dir;
    fs::create_directories(out);
    const fs::path cached = cache_directory(opt) / hash;

    if (!opt.force && fs::exists(cached / "report.json")) {
        for (const auto& e : fs::directory_iterator(cached))
            fs::copy_file(e.path(), out / e.path().filename(), fs::copy_options::overwrite_existing);
        RunReport r = report_from_json(read_file(cached / "report.json"));
        r.provenance["cache"] = "hit";
        write_file(out / "report.json", report_to_json(r));
        return r;
    }

    RunReport report;
    report.config_hash = hash;
    report.provenance = {{"toolkit_version", kToolkitVersion},
                         {"started", utc_now()},
                         {"cache", "miss"},
                         {"profile", cfg.profile}};
    Context ctx{cfg, opt, profile_by_name(cfg.profile, cfg.profile_params), report, out};
    for (const auto& [name, fn] : registry()) {
        if (std::find(cfg.checks.begin(), cfg.checks.end(), name) == cfg.checks.end()) continue;
        try {
            fn(ctx);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("check '" + name + "': " + e.what());
        }
    }
    report.provenance["finished"] = utc_now();
    write_file(out / "report.json", report_to_json(report));

    // Publish through a temporary directory so cache entries appear whole.
    const fs::path staging = cached.string() + ".tmp";
    fs::remove_all(staging);
    fs::create_directories(staging);
    for (const char* f : {"report.json", "resolvent.csv", "decay.csv"})
        if (fs::exists(out / f)) fs::copy_file(out / f, staging / f);
    fs::remove_all(cached);
    fs::rename(staging, cached);
    return report;
}

RunReport run(const fs::path& config_path, const RunOptions& opt) { return run(load_config(config_path), opt); }

std::vector<fs::path> report_render(const fs::path& report_json) {
    const RunReport r = report_from_json(read_file(report_json));
    const fs::path dir = report_json.parent_path().empty() ? fs::path(".") : report_json.parent_path();
    std::vector<fs::path> written;
    if (r.fits.empty()) std::cerr << "warning: report has no fits; no plots written\n";
    for (const auto& [name, fit] : r.fits) {
        auto it = r.series.find(name);
        if (it == r.series.end() || it->second.x.empty()) {
            std::cerr << "warning: fit '" << name << "' has no data series; skipped\n";
            continue;
        }
        const FitSeries& s = it->second;
        std::ostringstream csv;
        csv << s.x_label << ',' << s.y_label << ",log_x,log_y\n";
        for (size_t i = 0; i < s.x.size(); ++i)
            csv << format_double(s.x[i]) << ',' << format_double(s.y[i]) << ',' << format_double(std::log(s.x[i]))
                << ',' << format_double(std::log(s.y[i])) << '\n';
        const fs::path csv_path = dir / (name + "_series.csv");
        const fs::path svg_path = dir / (name + ".svg");
        write_file(csv_path, csv.str());
        write_file(svg_path, svg_plot(name, fit, s));
        written.push_back(csv_path);
        written.push_back(svg_path);
    }
    if (!r.decay_trace.empty()) {
        std::ostringstream csv;
        csv << "t,E,E_sqrt_over_datanorm\n";
        for (const auto& row : r.decay_trace)
            csv << format_double(row[0]) << ',' << format_double(row[1]) << ',' << format_double(row[2]) << '\n';
        const fs::path p = dir / "decay_timeseries.csv";
        write_file(p, csv.str());
        written.push_back(p);
    }
    return written;
}

}  // namespace dwt
