#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dwt/damping_profiles.hpp"
#include "dwt/fitting.hpp"
#include "dwt/jet.hpp"
#include "dwt/linalg.hpp"
#include "dwt/torus_grid.hpp"

namespace dwt {

/// Closed rectangle in (x~, xi); x~ is the periodic representative.
struct SymbolSupport {
    double x_lo = -1e300, x_hi = 1e300;
    double xi_lo = -1e300, xi_hi = 1e300;
    bool contains(double x, double xi) const;
    double xi_extent() const { return std::max(std::abs(xi_lo), std::abs(xi_hi)); }
};

enum class SymbolDependence { Both, XOnly, XiOnly };

/// (x, xi, ox, oxi) -> jet of the symbol truncated at (ox, oxi).
using SymbolSampler = std::function<Jet(double, double, int, int)>;
/// Symbol written once over jets; derivatives follow automatically.
using SymbolExpr = std::function<Jet(const Jet& x, const Jet& xi)>;

struct SemiclassicalSymbol {
    std::string name;
    SymbolSampler sampler;
    double h = 1.0;
    double tau = 1.0;
    int gamma = 2;
    std::optional<SymbolSupport> support;  ///< zero (with derivatives) outside
    SymbolDependence dependence = SymbolDependence::Both;
    bool real = true;
    int max_order = Jet::kMaxOrder;

    cplx operator()(double x, double xi) const;
    Jet jet(double x, double xi, int ox, int oxi) const;
};

SemiclassicalSymbol make_symbol(std::string name, SymbolExpr expr, double h,
                                SymbolDependence dep = SymbolDependence::Both,
                                std::optional<SymbolSupport> support = std::nullopt, bool real = true);

/// Weyl quantization on the grid with short-arc midpoints.
OperatorMatrix quantize(const SemiclassicalSymbol& a, const PeriodicGrid& g);

/// Geometry parameters read by the symbol library: sigma, sigma1, eps1.
using SymbolParams = std::map<std::string, double>;
SemiclassicalSymbol symbol_library(const std::string& name, double h, double tau,
                                   const SymbolParams& params);
std::vector<std::string> symbol_names();

/// k-th Moyal term of a # b (including its h^k prefactor).
SemiclassicalSymbol moyal_term(const SemiclassicalSymbol& a, const SemiclassicalSymbol& b, int k);

/// -h^2 d^2 + i h^{2-gamma} W - h^2 beta.
OperatorMatrix semiclassical_operator(const DampingProfile& p, double h, int gamma, double beta,
                                      const PeriodicGrid& g);

struct CommutatorIdentity {
    cplx laplacian_term;  ///< h^{1-tau} <[h^2 d^2, A] u, u>
    cplx damping_term;    ///< i h^{3-gamma-tau} <(AW + WA) u, u>
    cplx source_term;     ///< 2 i h^{3-tau} Im <f, A u>
    double residual;      ///< |lap + damp - source| / max magnitude
};

CommutatorIdentity commutator_identity_check(const DampingProfile& p, double h, double tau, int gamma,
                                             double beta, const GridFunction& f);
/// Same terms for an arbitrary u (not necessarily a solution).
CommutatorIdentity commutator_identity_terms(const DampingProfile& p, double h, double tau, int gamma,
                                             const OperatorMatrix& A, const GridFunction& f,
                                             const GridFunction& u);

struct RemainderScaling {
    std::vector<double> h_values;
    std::vector<double> norms;
    ExponentFit fit;  ///< log norm against log h
    double fitted_slope = 0.0;
    double predicted_slope = 0.0;
};

using SymbolFactory = std::function<SemiclassicalSymbol(double h)>;

/// Even grid size resolving |xi| <= xi_max at scale h with a safety factor.
int grid_for_frequency(double h, double xi_max, double safety = 1.15, int min_n = 32);

RemainderScaling composition_remainder(const SymbolFactory& a, const SymbolFactory& b, int N,
                                       const std::vector<double>& h_list, double rho = 0.0);

RemainderScaling cutoff_conjugation_error(const SymbolFactory& t, const SymbolFactory& b,
                                          const std::vector<double>& h_list);

/// p = xi^2 + i h^{2-gamma} W(x) - h^2 beta, as a jet expression.
Jet principal_symbol(const DampingProfile& p, const Jet& x, const Jet& xi, double h, int gamma,
                     double beta);

/// Symbols q_0..q_jmax of the elliptic parametrix.
std::vector<SemiclassicalSymbol> parametrix_build(const DampingProfile& p, double h, double tau,
                                                  int gamma, double beta, int j_max);
/// chi(xi) p(x, xi) with chi = 1 on |xi| < 3.5 and 0 on |xi| > 4.
SemiclassicalSymbol chi_p_symbol(const DampingProfile& p, double h, int gamma, double beta);

struct ParametrixCheck {
    RemainderScaling normalized;           ///< norms / h^{3-2tau}
    bool decreasing = false;               ///< last < first
    std::vector<double> single_term;       ///< normalized remainder with q_0 only
    std::vector<std::vector<double>> qj_norms;  ///< [j][h]
    std::vector<ExponentFit> qj_fits;
    std::vector<double> qj_predicted;      ///< j(2tau-1) + tau - 1
};

ParametrixCheck parametrix_composition_check(const DampingProfile& p, const std::vector<double>& h_list,
                                             double tau, int gamma,
                                             const std::function<double(double)>& beta_rule, int j_max);

struct EllipticReport {
    double zu2, ztu2, u2, f2;
    double c_main;  ///< ||Zu||^2 / (h^{5tau-1} ||f||^2)
    double c_weak;  ///< ||Z~u||^2 / (h^4 ||f||^2 + h^{4-gamma} ||f|| ||u||)
};

EllipticReport elliptic_estimate_check(const DampingProfile& p, double h, double tau, int gamma,
                                       double beta, const GridFunction& f);

}  // namespace dwt
