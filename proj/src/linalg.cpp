#include "dwt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "dwt/fft.hpp"

namespace dwt {
namespace {

// Largest eigenvalue of a Hermitian positive operator by Lanczos with full
// reorthogonalization; stops on the Ritz residual bound.
double lanczos_max_eig(const std::function<CVector(const CVector&)>& apply, int n, double rtol,
                       int max_steps = 80) {
    CVector v(n);
    for (int i = 0; i < n; ++i)
        v[i] = cplx(1.0 + 0.5 * std::sin(1.3 * i), 0.3 * std::cos(0.7 * i));
    v.normalize();
    const int m_max = std::min(max_steps, n);
    std::vector<CVector> basis;
    std::vector<double> alpha, beta;
    double theta = 0.0;
    for (int j = 0; j < m_max; ++j) {
        basis.push_back(v);
        CVector w = apply(v);
        const double a = v.dot(w).real();
        alpha.push_back(a);
        w -= a * v;
        if (j > 0) w -= beta.back() * basis[j - 1];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) w -= b.dot(w) * b;
        const double bnorm = w.norm();
        const int m = j + 1;
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            tri(i, i) = alpha[i];
            if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        theta = es.eigenvalues()[m - 1];
        const double resid = bnorm * std::abs(es.eigenvectors()(m - 1, m - 1));
        if (!std::isfinite(theta)) return theta;
        if (resid <= rtol * std::abs(theta) || bnorm <= 1e-300) break;
        beta.push_back(bnorm);
        v = w / bnorm;
    }
    return theta;
}

CVector circulant_column(const PeriodicGrid& g, const std::function<cplx(int)>& mult) {
    const int n = g.n();
    CVector m(n);
    for (int s = 0; s < n; ++s) m[s] = mult(s);
    CVector c = fft::backward(m);
    c /= static_cast<double>(n);
    return c;
}

}  // namespace

std::string FailurePoint::describe() const {
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    auto put = [&](const char* name, auto v) {
        os << (first ? "" : ", ") << name << "=" << v;
        first = false;
    };
    if (q) put("q", *q);
    if (beta) put("beta", *beta);
    if (k) put("k", *k);
    if (h) put("h", *h);
    return first ? std::string("(no coordinates)") : "(" + os.str() + ")";
}

NumericalError::NumericalError(const std::string& what, FailurePoint where)
    : std::runtime_error(what + " at " + where.describe()), where_(where) {}

Eigen::MatrixXd spectral_laplacian(const PeriodicGrid& g) {
    const CVector c = circulant_column(g, [&](int s) { return -derivative_multiplier(g, s, 2); });
    const int n = g.n();
    Eigen::MatrixXd lap(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) lap(i, j) = c[((i - j) % n + n) % n].real();
    return lap;
}

CMatrix derivative_matrix(const PeriodicGrid& g, int m) {
    const CVector c = circulant_column(g, [&](int s) { return derivative_multiplier(g, s, m); });
    const int n = g.n();
    CMatrix d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = c[((i - j) % n + n) % n];
    return d;
}

namespace {

struct BasisVector {
    int i1, i2;
    double w1, w2;
};

std::vector<BasisVector> parity_basis(int n, bool even) {
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<BasisVector> b;
    if (even) {
        b.push_back({0, -1, 1.0, 0.0});
        for (int j = 1; j < n / 2; ++j) b.push_back({j, n - j, r, r});
        b.push_back({n / 2, -1, 1.0, 0.0});
    } else {
        for (int j = 1; j < n / 2; ++j) b.push_back({j, n - j, r, -r});
    }
    return b;
}

CMatrix project(const CMatrix& m, const std::vector<BasisVector>& b) {
    const int d = static_cast<int>(b.size());
    CMatrix out(d, d);
    for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c) {
            cplx s = b[a].w1 * b[c].w1 * m(b[a].i1, b[c].i1);
            if (b[c].i2 >= 0) s += b[a].w1 * b[c].w2 * m(b[a].i1, b[c].i2);
            if (b[a].i2 >= 0) {
                s += b[a].w2 * b[c].w1 * m(b[a].i2, b[c].i1);
                if (b[c].i2 >= 0) s += b[a].w2 * b[c].w2 * m(b[a].i2, b[c].i2);
            }
            out(a, c) = s;
        }
    return out;
}

}  // namespace

ParitySplit split_by_parity(const CMatrix& m) {
    const int n = static_cast<int>(m.rows());
    return {project(m, parity_basis(n, true)), project(m, parity_basis(n, false))};
}

double reflection_defect(const CMatrix& m) {
    const int n = static_cast<int>(m.rows());
    double d = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            d = std::max(d, std::abs(m((n - i) % n, (n - j) % n) - m(i, j)));
    return d;
}

double smallest_singular_value(const CMatrix& m) {
    Eigen::BDCSVD<CMatrix> svd(m);
    return svd.singularValues()[svd.singularValues().size() - 1];
}

double largest_singular_value(const CMatrix& m, double tol) {
    if (m.rows() <= 1024 && m.cols() <= 1024) {
        Eigen::BDCSVD<CMatrix> svd(m);
        return svd.singularValues()[0];
    }
    const double theta = lanczos_max_eig(
        [&](const CVector& x) { return CVector(m.adjoint() * (m * x)); },
        static_cast<int>(m.cols()), tol);
    return std::sqrt(std::max(theta, 0.0));
}

ShiftedSigmaMin::ShiftedSigmaMin(const CMatrix& a, bool with_projector_bound) {
    Eigen::ComplexSchur<CMatrix> schur(a, false);
    if (schur.info() != Eigen::Success) throw NumericalError("Schur factorization failed");
    t_ = schur.matrixT();
    const int n = static_cast<int>(t_.rows());
    lambda_ = t_.diagonal();
    scale_ = t_.cwiseAbs().maxCoeff();
    kappa_ = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    if (!with_projector_bound) return;

    // Eigenvectors of T by back substitution (unit diagonal), guarded
    // against near-equal eigenvalues as in standard triangular solvers.
    const double smin = std::max(1e-14 * scale_, std::numeric_limits<double>::min());
    CMatrix x = CMatrix::Identity(n, n);
    for (int j = 1; j < n; ++j) {
        for (int i = j - 1; i >= 0; --i) {
            cplx s = 0.0;
            for (int l = i + 1; l <= j; ++l) s += t_(i, l) * x(l, j);
            cplx d = t_(i, i) - t_(j, j);
            if (std::abs(d) < smin) d = smin;
            x(i, j) = -s / d;
        }
    }
    const CMatrix xinv = x.triangularView<Eigen::Upper>().solve(CMatrix::Identity(n, n));
    for (int j = 0; j < n; ++j) {
        const double kj = x.col(j).norm() * xinv.row(j).norm();
        kappa_[j] = std::isfinite(kj) ? kj : std::numeric_limits<double>::infinity();
    }
}

double ShiftedSigmaMin::sigma_min(double beta) const {
    const int n = static_cast<int>(t_.rows());
    double nearest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) nearest = std::min(nearest, std::abs(lambda_[i] - beta));
    if (nearest <= 1e-14 * std::max(1.0, scale_)) return 0.0;
    CMatrix s = t_;
    s.diagonal().array() -= beta;
    const auto upper = s.triangularView<Eigen::Upper>();
    const double theta = lanczos_max_eig(
        [&](const CVector& v) {
            CVector w = upper.adjoint().solve(v);
            return CVector(upper.solve(w));
        },
        n, 1e-12);
    if (!(theta > 0.0) || !std::isfinite(theta)) return 0.0;
    return std::min(1.0 / std::sqrt(theta), nearest);
}

double ShiftedSigmaMin::resolvent_upper_bound(double beta) const {
    double u = 0.0;
    for (int i = 0; i < lambda_.size(); ++i) {
        const double d = std::abs(lambda_[i] - beta);
        if (d == 0.0) return std::numeric_limits<double>::infinity();
        u += kappa_[i] / d;
    }
    return u;
}

double ShiftedSigmaMin::resolvent_lower_bound(double beta) const {
    double nearest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < lambda_.size(); ++i) nearest = std::min(nearest, std::abs(lambda_[i] - beta));
    return 1.0 / nearest;
}

}  // namespace dwt
