#pragma once

#include <complex>
#include <functional>

namespace dwt {

/// Truncated bivariate Taylor expansion in (x, xi) around a point.
///
/// Coefficient (i, j) multiplies dx^i dxi^j, so the partial derivative
/// d_x^i d_xi^j equals coeff(i, j) * i! * j!. Storage tracks the extents
/// of the nonzero block, which keeps separable symbols cheap.
class Jet {
public:
    static constexpr int kMaxOrder = 7;

    Jet() = default;
    Jet(const Jet& o) { copy_from(o); }
    Jet& operator=(const Jet& o) {
        if (this != &o) copy_from(o);
        return *this;
    }

    static Jet constant(std::complex<double> v, int ox, int oxi);
    static Jet var_x(double x, int ox, int oxi);
    static Jet var_xi(double xi, int ox, int oxi);

    int order_x() const { return ox_; }
    int order_xi() const { return oxi_; }
    int extent_x() const { return ex_; }
    int extent_xi() const { return exi_; }

    std::complex<double> value() const { return at(0, 0); }
    double real_value() const { return at(0, 0).real(); }
    std::complex<double> coeff(int i, int j) const;
    /// Partial derivative d_x^i d_xi^j at the expansion point.
    std::complex<double> derivative(int i, int j) const;
    bool is_zero() const;

    /// Jet of d_x^mx d_xi^mxi f, with orders reduced accordingly.
    Jet differentiate(int mx, int mxi) const;
    /// Same point, lower truncation orders.
    Jet truncate(int ox, int oxi) const;

    Jet operator-() const;
    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(const Jet& o);
    Jet& operator+=(std::complex<double> s);
    Jet& operator*=(std::complex<double> s);

    friend Jet operator*(const Jet& a, const Jet& b);

    /// f(g) from the univariate Taylor coefficients f_m = f^{(m)}(g0)/m!.
    Jet compose(const std::function<std::complex<double>(int)>& taylor) const;

private:
    void copy_from(const Jet& o);
    // Raw storage stays uninitialized; only the extent block is ever read.
    std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(raw_); }
    const std::complex<double>* data() const { return reinterpret_cast<const std::complex<double>*>(raw_); }
    std::complex<double>& at(int i, int j) { return data()[i * (kMaxOrder + 1) + j]; }
    const std::complex<double>& at(int i, int j) const { return data()[i * (kMaxOrder + 1) + j]; }
    void shrink();

    int ox_ = 0, oxi_ = 0;
    int ex_ = 0, exi_ = 0;
    alignas(16) double raw_[2 * (kMaxOrder + 1) * (kMaxOrder + 1)];
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator+(Jet a, std::complex<double> s);
Jet operator+(std::complex<double> s, Jet a);
Jet operator-(Jet a, std::complex<double> s);
Jet operator-(std::complex<double> s, const Jet& a);
Jet operator*(Jet a, std::complex<double> s);
Jet operator*(std::complex<double> s, Jet a);
Jet operator/(const Jet& a, const Jet& b);
Jet operator/(std::complex<double> s, const Jet& a);
Jet operator/(Jet a, std::complex<double> s);

Jet exp(const Jet& g);
Jet log(const Jet& g);
Jet sin(const Jet& g);
Jet cos(const Jet& g);
Jet pow(const Jet& g, double alpha);
Jet sqrt(const Jet& g);
Jet reciprocal(const Jet& g);
/// Integer power by repeated multiplication (exact for polynomials).
Jet ipow(const Jet& g, int m);

/// psi0(t) = e^{-1/t} for t > 0, else 0.
Jet bump_primitive(const Jet& t);
/// Monotone C-infinity transition: 0 for t <= 0, 1 for t >= 1.
Jet smooth_step(const Jet& t);
double smooth_step(double t);
/// 1 for |t| <= a, 0 for |t| >= b, smooth and monotone in |t| between.
Jet plateau(const Jet& t, double a, double b);
double plateau(double t, double a, double b);
/// |t| for t away from 0 (sign of the value).
Jet abs_jet(const Jet& t);

}  // namespace dwt
