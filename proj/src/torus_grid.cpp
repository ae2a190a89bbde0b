#include "dwt/torus_grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dwt/fft.hpp"

namespace dwt {

PeriodicGrid::PeriodicGrid(int n) : n_(n) {
    if (n < 8) throw std::invalid_argument("grid size must be >= 8, got " + std::to_string(n));
    if (n % 2 != 0) throw std::invalid_argument("grid size must be even, got " + std::to_string(n));
}

double PeriodicGrid::spacing() const { return 2.0 * std::numbers::pi / n_; }

double PeriodicGrid::node(int j) const { return 2.0 * std::numbers::pi * j / n_; }

std::vector<double> PeriodicGrid::nodes() const {
    std::vector<double> x(n_);
    for (int j = 0; j < n_; ++j) x[j] = node(j);
    return x;
}

std::vector<int> PeriodicGrid::frequencies() const {
    std::vector<int> k(n_);
    for (int j = 0; j < n_; ++j) k[j] = j - n_ / 2;
    return k;
}

PeriodicGrid make_grid(int n) { return PeriodicGrid(n); }

GridFunction::GridFunction(PeriodicGrid g, CVector v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.n())
        throw std::invalid_argument("grid function length does not match grid");
}

GridFunction::GridFunction(PeriodicGrid g) : grid(g), values(CVector::Zero(g.n())) {}

GridFunction sample(const std::function<cplx(double)>& f, const PeriodicGrid& g) {
    CVector v(g.n());
    for (int j = 0; j < g.n(); ++j) v[j] = f(g.node(j));
    return GridFunction(g, std::move(v));
}

CVector fourier_coefficients(const GridFunction& u) {
    CVector c = fft::forward(u.values);
    c /= static_cast<double>(u.grid.n());
    return c;
}

GridFunction from_fourier(const PeriodicGrid& g, const CVector& coeffs) {
    return GridFunction(g, fft::backward(coeffs));
}

cplx derivative_multiplier(const PeriodicGrid& g, int slot, int m) {
    const int k = g.frequency(slot);
    if (k == -g.n() / 2 && m % 2 == 1) return 0.0;
    return std::pow(cplx(0.0, static_cast<double>(k)), m);
}

GridFunction derivative(const GridFunction& u, int m) {
    if (m < 1) throw std::invalid_argument("derivative order must be >= 1");
    CVector c = fft::forward(u.values);
    const int n = u.grid.n();
    for (int s = 0; s < n; ++s) c[s] *= derivative_multiplier(u.grid, s, m) / static_cast<double>(n);
    return GridFunction(u.grid, fft::backward(c));
}

cplx l2_inner(const GridFunction& u, const GridFunction& v) {
    if (u.grid != v.grid) throw std::invalid_argument("l2_inner: grid mismatch");
    return u.grid.spacing() * v.values.dot(u.values);
}

double l2_norm(const GridFunction& u) { return std::sqrt(u.grid.spacing()) * u.values.norm(); }

double sobolev_norm(const GridFunction& u, double s) {
    const CVector c = fourier_coefficients(u);
    double acc = 0.0;
    for (int slot = 0; slot < u.grid.n(); ++slot) {
        const double k = u.grid.frequency(slot);
        acc += std::pow(1.0 + k * k, s) * std::norm(c[slot]);
    }
    return std::sqrt(2.0 * std::numbers::pi * acc);
}

double periodic_rep(double x) {
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(x + std::numbers::pi, two_pi);
    if (r < 0) r += two_pi;
    return r - std::numbers::pi;
}

}  // namespace dwt
