#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dwt/damping_profiles.hpp"
#include "dwt/fitting.hpp"
#include "dwt/torus_grid.hpp"

namespace dwt {

/// One y-Fourier mode of the damped wave: v_k(x) and its time derivative.
struct ModeState {
    int k = 0;
    GridFunction v;
    GridFunction vt;
};

enum class EvolveMethod { Auto, Eigen, Expm };

struct ModeEvolution {
    std::vector<ModeState> states;
    /// Dense matrix exponential used instead of the eigenbasis.
    bool used_fallback = false;
    /// Condition number of the generator eigenbasis (0 if not formed).
    double eigen_condition = 0.0;
};

/// Exact evolution of v_tt - v_xx + k^2 v + W v_t = 0 at the requested times.
///
/// The 2n x 2n generator [[0, I], [d^2 - k^2, -W]] is diagonalized once;
/// an eigenbasis with condition above 1e12 (or EvolveMethod::Expm) switches
/// to scaling-and-squaring exponentials of the time increments.
ModeEvolution evolve_mode(const DampingProfile& p, int k, const GridFunction& v0, const GridFunction& v1,
                          const std::vector<double>& t_list, EvolveMethod method = EvolveMethod::Auto);

/// 1/2 sum_k (||v_k'||^2 + k^2 ||v_k||^2 + ||d_t v_k||^2). The gradient term
/// is <-v'', v>, so it includes the Nyquist mode like the generator does.
double total_energy(const std::vector<ModeState>& states);
double mode_energy(const ModeState& s);

/// ||v0||_{H^2} + ||v1||_{H^1} of the mode v(x) e^{iky}.
double data_norm(int k, const GridFunction& v0, const GridFunction& v1);

struct DecayTrace {
    std::vector<double> times;
    std::vector<double> energies;
    double data_norm = 1.0;

    /// Largest increase E(t_{j+1}) - E(t_j) (<= 0 for a monotone trace).
    double max_increase() const;
    bool monotone(double tol = 1e-10) const { return max_increase() <= tol; }
};

DecayTrace decay_trace(const DampingProfile& p, int k, const GridFunction& v0, const GridFunction& v1,
                       const std::vector<double>& t_list);

/// Fit of log(E^{1/2}/data_norm) against log(1+t) on times in the window;
/// `slope` holds the negated slope, i.e. the decay exponent alpha.
ExponentFit fit_decay_exponent(const DecayTrace& trace, std::pair<double, double> window);

/// [T/4, T] with T the first time E <= 1e-3 E(0) (last time if never);
/// times with E < 1e-12 E(0) are excluded.
std::pair<double, double> default_window(const DecayTrace& trace);

struct DecayClassification {
    ExponentFit early;  ///< first half of the window (log-time)
    ExponentFit late;   ///< second half
    /// Late exponent exceeds 1.5 x the early one: faster than any power.
    bool super_polynomial = false;
};

DecayClassification classify_decay(const DecayTrace& trace, std::pair<double, double> window);

struct EnsembleMember {
    std::string label;
    int k = 0;
    DecayTrace trace;
    ExponentFit fit;
};

struct EnsembleResult {
    /// Pointwise max of E^{1/2}/data_norm, stored squared with data_norm 1.
    DecayTrace worst;
    ExponentFit worst_fit;
    std::vector<EnsembleMember> members;
    int slowest = -1;  ///< member with the largest ratio at the final time
};

/// Strip-concentrated bumps times y-modes k in {1, 2, 4, ..., k_max} and the
/// rounded midpoints 2^{j+1/2}, plus `random_members` band-limited data.
EnsembleResult worst_case_ensemble(const DampingProfile& p, int k_max, const PeriodicGrid& g,
                                   const std::vector<double>& t_list, std::uint64_t seed = 0,
                                   int random_members = 4, int jobs = 1);

struct AlphaCrossCheck {
    double resolvent_slope = 0.0;
    double predicted = 0.0;
    double fitted = 0.0;
    double difference = 0.0;
    bool pass = false;
};

/// Decay exponent 1/(1+s) implied by resolvent growth q^s, against a fit.
AlphaCrossCheck cross_check_alpha(double s, double fitted_alpha, double tolerance = 0.1);

struct EnergyIdentity {
    double energy_loss = 0.0;  ///< E(0) - E(T)
    double dissipation = 0.0;  ///< Simpson quadrature of int W |v_t|^2
    double relative_error = 0.0;
};

/// Integrated energy balance on `steps` (even) uniform intervals of [0, T].
EnergyIdentity energy_identity_check(const DampingProfile& p, int k, const GridFunction& v0,
                                     const GridFunction& v1, double T, int steps = 400);

}  // namespace dwt
