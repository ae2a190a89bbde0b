#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dwt/jet.hpp"
#include "dwt/torus_grid.hpp"

namespace dwt {

/// Map from an x-jet to the jet of a real function of x.
using XJetFn = std::function<Jet(const Jet&)>;

/// Damping coefficient W on the circle with its metadata.
struct DampingProfile {
    std::string name;
    XJetFn W_jet;
    std::vector<XJetFn> factors;
    double sigma = 1.0;
    double sigma1 = 0.5;
    std::optional<int> k0;  ///< empty means infinitely regular factors
    double floor = 0.0;
    /// W >= floor holds outside [-sigma - floor_margin, sigma + floor_margin].
    double floor_margin = 0.0;
    /// Highest order of a.e.-bounded analytic derivatives of W.
    int max_derivative = 0;
    /// W(-x) == W(x); enables parity splitting of discrete operators.
    bool even = true;

    double W(double x) const;
    double dW(double x) const;
    Jet W_at(const Jet& x) const { return W_jet(x); }
    /// W at the grid nodes; even profiles are mirrored exactly.
    Eigen::VectorXd sample_W(const PeriodicGrid& g) const;
};

/// Distance d = |x~| - sigma, as a jet (x~ periodic representative).
Jet strip_distance(const Jet& x, double sigma);

DampingProfile strip_constant_profile(double sigma, double smoothing);
DampingProfile polynomial_profile(double sigma, double beta_exp);
DampingProfile oscillating_profile(double sigma);
/// W == c everywhere; sigma is nominal metadata only.
DampingProfile constant_profile(double c, double sigma = 1.0);
/// Arbitrary sampled-by-closure profile (no analytic derivatives).
DampingProfile custom_profile(std::string name, std::function<double(double)> W, double sigma,
                              double sigma1, double floor);

/// Registered profile by name with a parameter map (used by the CLI).
DampingProfile profile_by_name(const std::string& name,
                               const std::vector<std::pair<std::string, double>>& params);
std::vector<std::string> profile_names();

struct HypothesisReport {
    double min_outside = 0.0;       ///< min W outside the strip (plus margin)
    double floor = 0.0;
    bool floor_ok = true;
    bool factors_checked = false;
    double max_factor_residual = 0.0;
    bool factors_ok = true;
    int negative_count = 0;
    double most_negative = 0.0;
    bool ok() const { return floor_ok && factors_ok && negative_count == 0; }
};

HypothesisReport check_hypotheses(const DampingProfile& p, const PeriodicGrid& g);

struct GradientBound {
    double constant = 0.0;      ///< sup |W'|/W^{1/2} on the collar at the base grid
    double refined = 0.0;       ///< same sup after refinement
    bool divergent = false;
    bool spectral = false;      ///< derivative from the spectral fallback
};

GradientBound gradient_bound_constant(const DampingProfile& p, const PeriodicGrid& g);

double tau_min(int k0);
double alpha_of_tau(double tau);

}  // namespace dwt
