#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace bflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when an input fails a structural precondition (bad dimensions,
/// degenerate form, incompatible pair, Jacobi violation, ...).
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

inline Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }
inline Matrix skew(const Matrix& a) { return 0.5 * (a - a.transpose()); }

/// Frobenius inner product tr(A B^t).
inline double frob(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }
inline double frob_norm(const Matrix& a) { return a.norm(); }

inline bool is_symmetric(const Matrix& a, double tol = 1e-12) {
    return (a - a.transpose()).norm() <= tol * (1.0 + a.norm());
}
inline bool is_antisymmetric(const Matrix& a, double tol = 1e-12) {
    return (a + a.transpose()).norm() <= tol * (1.0 + a.norm());
}

/// Orthonormal basis of the null space of a, columns of the result.
/// A singular value counts as zero below rel_cutoff * sigma_max.
inline Matrix nullspace(const Matrix& a, double rel_cutoff = 1e-10) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_cutoff * smax) ++rank;
    if (smax == 0.0) rank = 0;  // zero map: everything is null
    const int n = static_cast<int>(a.cols());
    Matrix null(n, n - rank);
    for (int c = rank; c < n; ++c) null.col(c - rank) = svd.matrixV().col(c);
    return null;
}

/// Minimum-norm least-squares solution of a x = b via SVD (rank revealing).
/// JacobiSVD on purpose: the divide-and-conquer solver returns NaN on
/// systems with exactly zero columns, which rank-deficient derivation
/// fits produce, and every system here is small.
inline Vector lstsq(const Matrix& a, const Vector& b) {
    return a.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
}

/// Cholesky factor L of an SPD matrix g (g = L L^t). Conjugating a basis by
/// L^t turns g into the identity; used to push general metrics into an
/// orthonormal working frame.
inline Matrix cholesky_factor(const Matrix& g) {
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success)
        throw validation_error("metric is not positive definite");
    return Matrix(llt.matrixL());
}

/// Principal square root of a symmetric matrix. Eigenvalues slightly below
/// zero are clamped to zero; anything below -clamp_tol*(1+|a|) is an error.
inline Matrix sqrt_symmetric(const Matrix& a, double clamp_tol = 1e-10) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    Vector ev = es.eigenvalues();
    const double scale = 1.0 + a.norm();
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) < -clamp_tol * scale)
            throw validation_error("matrix square root of an indefinite matrix");
        if (ev(i) < 0.0) ev(i) = 0.0;
        ev(i) = std::sqrt(ev(i));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

inline double condition_number(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) == 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / (sv(sv.size() - 1));
}

}  // namespace bflow
