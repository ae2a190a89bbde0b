#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "dwt/damping_profiles.hpp"
#include "dwt/fitting.hpp"
#include "dwt/linalg.hpp"
#include "dwt/torus_grid.hpp"

namespace dwt {

/// -u'' + i q W u - beta u = f on the circle.
struct StationaryProblem {
    DampingProfile profile;
    double q;
    double beta;
    PeriodicGrid grid;

    StationaryProblem(DampingProfile p, double q_, double beta_, PeriodicGrid g);
    FailurePoint point() const { return {q, beta, std::nullopt, std::nullopt}; }
};

OperatorMatrix assemble(const StationaryProblem& sp);
/// P u evaluated with the FFT Laplacian (no dense matrix).
GridFunction apply_operator(const StationaryProblem& sp, const GridFunction& u);

/// Solves P u = f with LU; raises NumericalError on a condition estimate
/// above 1e14 or a relative residual above 1e-9 after one refinement step.
GridFunction solve(const OperatorMatrix& P, const GridFunction& f, const FailurePoint& where = {});

/// 1/sigma_min(P) by dense SVD.
double resolvent_norm(const StationaryProblem& sp);
/// Same quantity by Schur-based inverse Lanczos (scalable cross-check).
double resolvent_norm_iterative(const StationaryProblem& sp);

/// Resolvent norms of -d^2 + i q W - beta for many beta at fixed q.
class ResolventEvaluator {
public:
    ResolventEvaluator(const DampingProfile& p, double q, const PeriodicGrid& g);

    double norm(double beta) const;
    double upper_bound(double beta) const;
    double lower_bound(double beta) const;
    /// Eigenvalues of -d^2 + i q W, with their condition numbers.
    std::vector<std::pair<cplx, double>> spectrum() const;
    double q() const { return q_; }

private:
    double q_;
    std::vector<std::unique_ptr<ShiftedSigmaMin>> blocks_;
};

std::vector<std::pair<double, double>> beta_sweep(const DampingProfile& p, double q,
                                                  const std::vector<double>& betas,
                                                  const PeriodicGrid& g);

struct WorstBeta {
    double beta;
    double norm;
};

WorstBeta worst_beta(const DampingProfile& p, double q, const PeriodicGrid& g, double eps2 = 0.1);
WorstBeta worst_beta(const ResolventEvaluator& ev, double eps2 = 0.1);

struct ModeSample {
    int k;
    double beta;
    double norm;
};

struct Resolvent2D {
    double norm = 0.0;
    int k_star = -1;
    double beta_star = 0.0;
    double tail_bound = 0.0;
    bool singular = false;
    int k_max = 0;
    std::vector<ModeSample> evaluated;  ///< exact evaluations, by k
};

/// max over k with k^2 <= q^2 + margin of the resolvent norm at
/// beta = q^2 - k^2, with the elliptic tail bound for larger k. Modes whose
/// spectral-projector upper bound cannot exceed the running maximum are
/// skipped unless `exhaustive` is set.
Resolvent2D resolvent_2d_norm(const DampingProfile& p, double q, const PeriodicGrid& g,
                              double margin = 10.0, bool exhaustive = false);

struct DampingIdentity {
    double lhs;                ///< int W |u|^2
    double rhs;                ///< q^{-1} int |f u|
    double slack;              ///< rhs - lhs
    double identity_residual;  ///< |Im<Pu,u> - q int W|u|^2| relative
};

DampingIdentity damping_identity_check(const StationaryProblem& sp, const GridFunction& u,
                                       const GridFunction& f);

/// Jet of the low-energy multiplier b_{eps1}.
Jet b_eps1_jet(const Jet& x, double sigma, double eps1);

struct LowEnergyReport {
    double threshold;           ///< pi^2 / (16 (sigma + eps1)^2)
    double gradient_term;       ///< int b |u'|^2
    double potential_term;      ///< int (-b''/2 - beta b) |u|^2
    double source_term;         ///< Re int b f u-bar
    double identity_residual;   ///< relative
    double constant;            ///< ||u|| / ||f||
    double operator_constant;   ///< ||P^{-1}||
    double u_norm, f_norm;
};

LowEnergyReport low_energy_certificate(const DampingProfile& p, double q, double beta, double eps1,
                                       const PeriodicGrid& g, const GridFunction& f);

struct Regime {
    double beta_lo, beta_hi;
    double tau;
    int gamma;
};

std::vector<Regime> regime_table(double q, double tau_min, double eps2 = 0.1);

enum class BetaStrategy { Modes, Worst, List };

struct ResolventFitOptions {
    BetaStrategy strategy = BetaStrategy::Modes;
    /// Modes only: move each q to a nearby value where some q^2 - k^2 hits
    /// the worst beta, so the sampled 2D norm sits on a resonance peak.
    bool align_to_peak = false;
    double margin = 10.0;
    double eps2 = 0.1;
    int grid_factor = 8;
    int min_n = 64;
    std::optional<int> fixed_n;
    std::vector<double> beta_list;
};

struct ResolventPoint {
    double q_target;
    double q;
    int n;
    double beta;
    int k;  ///< -1 for one-dimensional measures
    double norm;
};

struct ResolventFit {
    ExponentFit fit;
    std::vector<ResolventPoint> points;
};

int grid_size_for_q(double q, int factor = 8, int min_n = 64);
/// q' >= q_target near q_target with q'^2 - k^2 equal to the worst beta at q'.
double peak_aligned_q(const DampingProfile& p, double q_target, int n, double eps2 = 0.1);
/// Resolvent measure at one q per the strategy.
ResolventPoint resolvent_measure(const DampingProfile& p, double q_target,
                                 const ResolventFitOptions& opt);

ResolventFit fit_resolvent_exponent(const DampingProfile& p, const std::vector<double>& q_list,
                                    const ResolventFitOptions& opt);
/// Fit from precomputed measures (e.g. synthetic or cached).
ExponentFit fit_resolvent_exponent(const std::vector<double>& q_list,
                                   const std::vector<double>& norms);

}  // namespace dwt
