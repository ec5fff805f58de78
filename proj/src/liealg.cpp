#include "bflow/liealg.hpp"

namespace bflow {

std::vector<Matrix> derivation_basis(const LieBracket& mu, double rel_cutoff) {
    const int d = mu.dim();
    const int pairs = d * (d - 1) / 2;
    Matrix L = Matrix::Zero(pairs * d, d * d);
    // Row (i<j, k), column (r,s): coefficient of D_rs in (pi(D)mu)_ij^k
    //   = [k==r] c_ij^s - [s==i] c_rj^k - [s==j] c_ir^k.
    int row = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            for (int k = 0; k < d; ++k, ++row) {
                for (int s = 0; s < d; ++s) L(row, k * d + s) += mu.coeff(i, j, s);
                for (int r = 0; r < d; ++r) {
                    L(row, r * d + i) -= mu.coeff(r, j, k);
                    L(row, r * d + j) -= mu.coeff(i, r, k);
                }
            }
    const Matrix null = nullspace(L, rel_cutoff);
    std::vector<Matrix> basis;
    basis.reserve(null.cols());
    for (int c = 0; c < null.cols(); ++c) {
        Matrix D(d, d);
        for (int r = 0; r < d; ++r)
            for (int s = 0; s < d; ++s) D(r, s) = null(r * d + s, c);
        basis.push_back(D);
    }
    return basis;
}

KillingMean killing_and_mean(const LieBracket& mu, const Matrix& g0) {
    const int d = mu.dim();
    std::vector<Matrix> ads(d);
    for (int i = 0; i < d; ++i) ads[i] = mu.ad_basis(i);
    KillingMean out;
    out.killing = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            const double v = (ads[i] * ads[j]).trace();
            out.killing(i, j) = v;
            out.killing(j, i) = v;
        }
    Vector t(d);
    for (int i = 0; i < d; ++i) t(i) = ads[i].trace();
    out.mean = g0.isIdentity(1e-14) ? t : Vector(g0.ldlt().solve(t));
    return out;
}

namespace {

Matrix moment_map_orthonormal(const LieBracket& mu) {
    const int d = mu.dim();
    std::vector<Matrix> ads(d);
    for (int i = 0; i < d; ++i) ads[i] = mu.ad_basis(i);
    Matrix m1 = Matrix::Zero(d, d);
    Matrix gram = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        m1 += ads[i] * ads[i].transpose();
        for (int j = i; j < d; ++j) {
            const double v = frob(ads[i], ads[j]);
            gram(i, j) = v;
            gram(j, i) = v;
        }
    }
    return 0.25 * m1 - 0.5 * gram;
}

Matrix ricci_orthonormal(const LieBracket& mu) {
    const KillingMean km = killing_and_mean(mu, Matrix::Identity(mu.dim(), mu.dim()));
    const Matrix ad_h = mu.ad(km.mean);
    return moment_map_orthonormal(mu) - 0.5 * km.killing - sym(ad_h);
}

}  // namespace

Matrix moment_map(const LieBracket& mu, const Matrix& g0) {
    if (g0.isIdentity(1e-14)) return moment_map_orthonormal(mu);
    const Matrix L = cholesky_factor(g0);
    const Matrix phi = L.transpose();  // phi-frame is orthonormal for g0
    const Matrix m = moment_map_orthonormal(gl_action(phi, mu));
    return phi.inverse() * m * phi;
}

Matrix ricci_operator(const LieBracket& mu, const Matrix& g0) {
    if (g0.isIdentity(1e-14)) return ricci_orthonormal(mu);
    const Matrix L = cholesky_factor(g0);
    const Matrix phi = L.transpose();
    const Matrix r = ricci_orthonormal(gl_action(phi, mu));
    return phi.inverse() * r * phi;
}

double scalar_curvature(const LieBracket& mu, const Matrix& g0) {
    return ricci_operator(mu, g0).trace();
}

}  // namespace bflow
