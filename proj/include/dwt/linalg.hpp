#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dwt/torus_grid.hpp"

namespace dwt {

/// Dense complex matrix acting on grid-function values.
using OperatorMatrix = CMatrix;

/// Coordinates of a numerical failure; unset fields are not applicable.
struct FailurePoint {
    std::optional<double> q, beta, h;
    std::optional<int> k;
    std::string describe() const;
};

class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, FailurePoint where = {});
    const FailurePoint& where() const { return where_; }

private:
    FailurePoint where_;
};

/// Dense matrix of -d^2/dx^2 (Nyquist mode cosine-only).
Eigen::MatrixXd spectral_laplacian(const PeriodicGrid& g);
/// Dense matrix of d^m/dx^m.
CMatrix derivative_matrix(const PeriodicGrid& g, int m);

/// Orthogonal change of basis to even/odd functions under x -> -x.
struct ParitySplit {
    CMatrix even, odd;
};

/// Blocks of a matrix commuting with the reflection (x_j -> x_{n-j}).
ParitySplit split_by_parity(const CMatrix& m);
/// Largest |R M R - M| entry.
double reflection_defect(const CMatrix& m);

double smallest_singular_value(const CMatrix& m);
/// Exact SVD up to n = 1024, power iteration (tolerance `tol`) above.
double largest_singular_value(const CMatrix& m, double tol = 1e-8);

/// sigma_min(A - beta I) for many real shifts of a fixed square matrix.
///
/// A complex Schur factorization is computed once; each shift costs a
/// few triangular solves inside an inverse Lanczos iteration. The
/// eigenvector matrix of the triangular factor provides the spectral
/// projector bound ||(A - beta)^{-1}|| <= sum_j kappa_j / |lambda_j - beta|.
class ShiftedSigmaMin {
public:
    explicit ShiftedSigmaMin(const CMatrix& a, bool with_projector_bound = true);

    double sigma_min(double beta) const;
    /// Upper bound on 1/sigma_min(A - beta) from eigenvalue condition numbers.
    double resolvent_upper_bound(double beta) const;
    /// Lower bound on 1/sigma_min(A - beta) from the nearest eigenvalue.
    double resolvent_lower_bound(double beta) const;
    const Eigen::VectorXcd& eigenvalues() const { return lambda_; }
    const Eigen::VectorXd& condition_numbers() const { return kappa_; }
    double scale() const { return scale_; }

private:
    CMatrix t_;
    Eigen::VectorXcd lambda_;
    Eigen::VectorXd kappa_;
    double scale_ = 0.0;
};

}  // namespace dwt
