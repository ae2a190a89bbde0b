#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace dwt {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Uniform periodic grid on R/2piZ with an even number of nodes.
class PeriodicGrid {
public:
    explicit PeriodicGrid(int n);

    int n() const { return n_; }
    double spacing() const;
    double node(int j) const;
    std::vector<double> nodes() const;
    /// Frequency carried by FFT slot `slot` (0..n-1), in -n/2..n/2-1.
    int frequency(int slot) const { return slot < n_ / 2 ? slot : slot - n_; }
    std::vector<int> frequencies() const;

    bool operator==(const PeriodicGrid& o) const { return n_ == o.n_; }
    bool operator!=(const PeriodicGrid& o) const { return n_ != o.n_; }

private:
    int n_;
};

PeriodicGrid make_grid(int n);

/// Complex samples of a function at the nodes of a grid.
struct GridFunction {
    PeriodicGrid grid;
    CVector values;

    GridFunction(PeriodicGrid g, CVector v);
    explicit GridFunction(PeriodicGrid g);
};

GridFunction sample(const std::function<cplx(double)>& f, const PeriodicGrid& g);

/// Discrete Fourier coefficients u_hat[slot], normalized so that
/// u_j = sum_k u_hat_k e^{i k x_j}.
CVector fourier_coefficients(const GridFunction& u);
GridFunction from_fourier(const PeriodicGrid& g, const CVector& coeffs);

/// Fourier multiplier of d^m/dx^m. The Nyquist mode is cosine-only: its
/// odd derivatives vanish, even ones use (i n/2)^m.
cplx derivative_multiplier(const PeriodicGrid& g, int slot, int m);

GridFunction derivative(const GridFunction& u, int m);

/// Rectangle-rule pairing (2pi/n) sum u_j conj(v_j).
cplx l2_inner(const GridFunction& u, const GridFunction& v);
double l2_norm(const GridFunction& u);

double sobolev_norm(const GridFunction& u, double s);

/// Periodic representative of x in [-pi, pi).
double periodic_rep(double x);

}  // namespace dwt
