#include "dwt/jet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dwt {
namespace {

using cplx = std::complex<double>;

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

void check_orders(int ox, int oxi) {
    if (ox < 0 || oxi < 0 || ox > Jet::kMaxOrder || oxi > Jet::kMaxOrder)
        throw std::invalid_argument("jet order out of range");
}

}  // namespace

void Jet::copy_from(const Jet& o) {
    ox_ = o.ox_;
    oxi_ = o.oxi_;
    ex_ = o.ex_;
    exi_ = o.exi_;
    for (int i = 0; i <= ex_; ++i)
        for (int j = 0; j <= exi_; ++j) at(i, j) = o.at(i, j);
}

Jet Jet::constant(cplx v, int ox, int oxi) {
    check_orders(ox, oxi);
    Jet r;
    r.ox_ = ox;
    r.oxi_ = oxi;
    r.at(0, 0) = v;
    return r;
}

Jet Jet::var_x(double x, int ox, int oxi) {
    Jet r = constant(x, ox, oxi);
    if (ox >= 1) {
        r.ex_ = 1;
        r.at(1, 0) = 1.0;
    }
    return r;
}

Jet Jet::var_xi(double xi, int ox, int oxi) {
    Jet r = constant(xi, ox, oxi);
    if (oxi >= 1) {
        r.exi_ = 1;
        r.at(0, 1) = 1.0;
    }
    return r;
}

cplx Jet::coeff(int i, int j) const {
    if (i < 0 || j < 0 || i > ex_ || j > exi_) return 0.0;
    return at(i, j);
}

cplx Jet::derivative(int i, int j) const {
    if (i > ox_ || j > oxi_) throw std::out_of_range("jet derivative beyond truncation order");
    return coeff(i, j) * factorial(i) * factorial(j);
}

bool Jet::is_zero() const {
    for (int i = 0; i <= ex_; ++i)
        for (int j = 0; j <= exi_; ++j)
            if (at(i, j) != cplx(0.0)) return false;
    return true;
}

void Jet::shrink() {
    ex_ = std::min(ex_, ox_);
    exi_ = std::min(exi_, oxi_);
}

Jet Jet::differentiate(int mx, int mxi) const {
    if (mx < 0 || mxi < 0 || mx > ox_ || mxi > oxi_)
        throw std::out_of_range("jet differentiation beyond truncation order");
    Jet r;
    r.ox_ = ox_ - mx;
    r.oxi_ = oxi_ - mxi;
    r.ex_ = std::max(0, ex_ - mx);
    r.exi_ = std::max(0, exi_ - mxi);
    for (int i = 0; i <= r.ex_; ++i)
        for (int j = 0; j <= r.exi_; ++j) {
            const double w = factorial(i + mx) / factorial(i) * factorial(j + mxi) / factorial(j);
            r.at(i, j) = coeff(i + mx, j + mxi) * w;
        }
    return r;
}

Jet Jet::truncate(int ox, int oxi) const {
    Jet r(*this);
    r.ox_ = std::min(ox, ox_);
    r.oxi_ = std::min(oxi, oxi_);
    r.shrink();
    return r;
}

Jet Jet::operator-() const {
    Jet r(*this);
    for (int i = 0; i <= ex_; ++i)
        for (int j = 0; j <= exi_; ++j) r.at(i, j) = -at(i, j);
    return r;
}

Jet& Jet::operator+=(const Jet& o) {
    const int nox = std::min(ox_, o.ox_), noxi = std::min(oxi_, o.oxi_);
    const int nex = std::min(std::max(ex_, o.ex_), nox);
    const int nexi = std::min(std::max(exi_, o.exi_), noxi);
    for (int i = 0; i <= nex; ++i)
        for (int j = 0; j <= nexi; ++j) {
            const cplx mine = (i <= ex_ && j <= exi_) ? at(i, j) : cplx(0.0);
            at(i, j) = mine + o.coeff(i, j);
        }
    ox_ = nox;
    oxi_ = noxi;
    ex_ = nex;
    exi_ = nexi;
    return *this;
}

Jet& Jet::operator-=(const Jet& o) { return *this += -o; }

Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    r.ox_ = std::min(a.ox_, b.ox_);
    r.oxi_ = std::min(a.oxi_, b.oxi_);
    r.ex_ = std::min(a.ex_ + b.ex_, r.ox_);
    r.exi_ = std::min(a.exi_ + b.exi_, r.oxi_);
    for (int i = 0; i <= r.ex_; ++i)
        for (int j = 0; j <= r.exi_; ++j) r.at(i, j) = 0.0;
    for (int i1 = 0; i1 <= std::min(a.ex_, r.ox_); ++i1)
        for (int j1 = 0; j1 <= std::min(a.exi_, r.oxi_); ++j1) {
            const cplx ca = a.at(i1, j1);
            if (ca == cplx(0.0)) continue;
            const int imax = std::min(b.ex_, r.ox_ - i1);
            const int jmax = std::min(b.exi_, r.oxi_ - j1);
            for (int i2 = 0; i2 <= imax; ++i2)
                for (int j2 = 0; j2 <= jmax; ++j2) r.at(i1 + i2, j1 + j2) += ca * b.at(i2, j2);
        }
    return r;
}

Jet& Jet::operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
}

Jet& Jet::operator+=(cplx s) {
    at(0, 0) += s;
    return *this;
}

Jet& Jet::operator*=(cplx s) {
    for (int i = 0; i <= ex_; ++i)
        for (int j = 0; j <= exi_; ++j) at(i, j) *= s;
    return *this;
}

Jet Jet::compose(const std::function<cplx(int)>& taylor) const {
    const int degree = (ex_ > 0 ? ox_ : 0) + (exi_ > 0 ? oxi_ : 0);
    Jet delta(*this);
    delta.at(0, 0) = 0.0;
    Jet r = constant(taylor(degree), ox_, oxi_);
    for (int m = degree - 1; m >= 0; --m) {
        r = r * delta;
        r += taylor(m);
    }
    return r;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator+(Jet a, cplx s) { return a += s; }
Jet operator+(cplx s, Jet a) { return a += s; }
Jet operator-(Jet a, cplx s) { return a += -s; }
Jet operator-(cplx s, const Jet& a) { return (-a) += s; }
Jet operator*(Jet a, cplx s) { return a *= s; }
Jet operator*(cplx s, Jet a) { return a *= s; }
Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator/(cplx s, const Jet& a) { return reciprocal(a) * s; }
Jet operator/(Jet a, cplx s) { return a *= (1.0 / s); }

Jet exp(const Jet& g) {
    const cplx e = std::exp(g.value());
    return g.compose([&](int m) { return e / factorial(m); });
}

Jet log(const Jet& g) {
    const cplx g0 = g.value();
    return g.compose([&](int m) -> cplx {
        if (m == 0) return std::log(g0);
        const double sign = (m % 2 == 1) ? 1.0 : -1.0;
        return sign / (static_cast<double>(m) * std::pow(g0, m));
    });
}

Jet sin(const Jet& g) {
    const cplx s = std::sin(g.value()), c = std::cos(g.value());
    return g.compose([&](int m) -> cplx {
        const cplx v[4] = {s, c, -s, -c};
        return v[m % 4] / factorial(m);
    });
}

Jet cos(const Jet& g) {
    const cplx s = std::sin(g.value()), c = std::cos(g.value());
    return g.compose([&](int m) -> cplx {
        const cplx v[4] = {c, -s, -c, s};
        return v[m % 4] / factorial(m);
    });
}

Jet pow(const Jet& g, double alpha) {
    const cplx g0 = g.value();
    return g.compose([&](int m) -> cplx {
        double binom = 1.0;
        for (int i = 0; i < m; ++i) binom *= (alpha - i) / (i + 1);
        if (binom == 0.0) return 0.0;
        return binom * std::pow(g0, alpha - m);
    });
}

Jet sqrt(const Jet& g) { return pow(g, 0.5); }

Jet reciprocal(const Jet& g) {
    const cplx g0 = g.value();
    if (g0 == cplx(0.0)) throw std::domain_error("jet reciprocal of zero");
    const cplx inv = 1.0 / g0;
    return g.compose([&](int m) -> cplx {
        const cplx p = std::pow(inv, m + 1);
        return (m % 2 == 0) ? p : -p;
    });
}

Jet ipow(const Jet& g, int m) {
    if (m < 0) return reciprocal(ipow(g, -m));
    Jet r = Jet::constant(1.0, g.order_x(), g.order_xi());
    for (int i = 0; i < m; ++i) r *= g;
    return r;
}

Jet bump_primitive(const Jet& t) {
    if (t.real_value() <= 0.0) return Jet::constant(0.0, t.order_x(), t.order_xi());
    return exp(-reciprocal(t));
}

Jet smooth_step(const Jet& t) {
    const double v = t.real_value();
    if (v <= 0.0) return Jet::constant(0.0, t.order_x(), t.order_xi());
    if (v >= 1.0) return Jet::constant(1.0, t.order_x(), t.order_xi());
    const Jet a = bump_primitive(t);
    const Jet b = bump_primitive(1.0 - t);
    return a / (a + b);
}

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

Jet abs_jet(const Jet& t) { return t.real_value() < 0.0 ? -t : t; }

Jet plateau(const Jet& t, double a, double b) {
    const double u = std::abs(t.real_value());
    if (u <= a) return Jet::constant(1.0, t.order_x(), t.order_xi());
    if (u >= b) return Jet::constant(0.0, t.order_x(), t.order_xi());
    return 1.0 - smooth_step((abs_jet(t) - a) / (b - a));
}

double plateau(double t, double a, double b) {
    const double u = std::abs(t);
    return 1.0 - smooth_step((u - a) / (b - a));
}

}  // namespace dwt
