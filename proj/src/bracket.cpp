#include "bflow/bracket.hpp"

namespace bflow {

Vector LieBracket::eval(const Vector& x, const Vector& y) const {
    Vector out = Vector::Zero(dim_);
    for (int i = 0; i < dim_; ++i) {
        if (x(i) == 0.0) continue;
        for (int j = 0; j < dim_; ++j) {
            if (y(j) == 0.0) continue;
            const double w = x(i) * y(j);
            for (int k = 0; k < dim_; ++k) out(k) += w * c_[idx(i, j, k)];
        }
    }
    return out;
}

Matrix LieBracket::ad_basis(int i) const {
    Matrix m = Matrix::Zero(dim_, dim_);
    for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k) m(k, j) = c_[idx(i, j, k)];
    return m;
}

Matrix LieBracket::ad(const Vector& x) const {
    Matrix m = Matrix::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
        if (x(i) == 0.0) continue;
        for (int j = 0; j < dim_; ++j)
            for (int k = 0; k < dim_; ++k) m(k, j) += x(i) * c_[idx(i, j, k)];
    }
    return m;
}

double LieBracket::dot(const LieBracket& other) const {
    if (other.dim_ != dim_) throw validation_error("bracket dimension mismatch");
    double s = 0.0;
    for (size_t n = 0; n < c_.size(); ++n) s += c_[n] * other.c_[n];
    return s;
}

double LieBracket::jacobi_residual() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i)
        for (int j = i + 1; j < dim_; ++j)
            for (int k = j + 1; k < dim_; ++k) {
                Vector r = Vector::Zero(dim_);
                for (int m = 0; m < dim_; ++m) {
                    // mu(mu(e_i,e_j),e_k) + mu(mu(e_j,e_k),e_i) + mu(mu(e_k,e_i),e_j)
                    for (int l = 0; l < dim_; ++l) {
                        r(l) += c_[idx(i, j, m)] * c_[idx(m, k, l)];
                        r(l) += c_[idx(j, k, m)] * c_[idx(m, i, l)];
                        r(l) += c_[idx(k, i, m)] * c_[idx(m, j, l)];
                    }
                }
                s += r.squaredNorm();
            }
    return std::sqrt(s);
}

LieBracket& LieBracket::operator+=(const LieBracket& o) {
    if (o.dim_ != dim_) throw validation_error("bracket dimension mismatch");
    for (size_t n = 0; n < c_.size(); ++n) c_[n] += o.c_[n];
    return *this;
}

LieBracket& LieBracket::operator-=(const LieBracket& o) {
    if (o.dim_ != dim_) throw validation_error("bracket dimension mismatch");
    for (size_t n = 0; n < c_.size(); ++n) c_[n] -= o.c_[n];
    return *this;
}

LieBracket& LieBracket::operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
}

Vector LieBracket::flatten() const {
    Vector v(static_cast<Eigen::Index>(c_.size()));
    for (size_t n = 0; n < c_.size(); ++n) v(static_cast<Eigen::Index>(n)) = c_[n];
    return v;
}

LieBracket LieBracket::unflatten(int dim, const Vector& v) {
    LieBracket mu(dim);
    if (v.size() != static_cast<Eigen::Index>(mu.c_.size()))
        throw validation_error("unflatten size mismatch");
    for (size_t n = 0; n < mu.c_.size(); ++n) mu.c_[n] = v(static_cast<Eigen::Index>(n));
    return mu;
}

LieBracket gl_action(const Matrix& h, const LieBracket& mu, double cond_max) {
    const int d = mu.dim();
    if (h.rows() != d || h.cols() != d) throw validation_error("gl_action: shape mismatch");
    if (condition_number(h) > cond_max) throw validation_error("gl_action: h is singular");
    const Matrix hinv = h.inverse();
    // c'[i][j][k] = sum_{p,q,r} hinv(p,i) hinv(q,j) h(k,r) c[p][q][r],
    // contracted one index at a time.
    std::vector<Matrix> slabs(d);  // slabs[p](q,k) = sum_r h(k,r) c[p][q][r]
    for (int p = 0; p < d; ++p) {
        Matrix s(d, d);
        for (int q = 0; q < d; ++q) {
            Vector cpq(d);
            for (int r = 0; r < d; ++r) cpq(r) = mu.coeff(p, q, r);
            s.row(q) = (h * cpq).transpose();
        }
        slabs[p] = s;
    }
    for (int p = 0; p < d; ++p) slabs[p] = hinv.transpose() * slabs[p];  // contract q -> j
    LieBracket out(d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                double v = 0.0;
                for (int p = 0; p < d; ++p) v += hinv(p, i) * slabs[p](j, k);
                out.set(i, j, k, v);
            }
    return out;
}

LieBracket delta(const LieBracket& mu, const Matrix& a) {
    const int d = mu.dim();
    LieBracket out(d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                double v = 0.0;
                for (int m = 0; m < d; ++m) {
                    v += a(m, i) * mu.coeff(m, j, k);   // mu(A e_i, e_j)
                    v += a(m, j) * mu.coeff(i, m, k);   // mu(e_i, A e_j)
                    v -= a(k, m) * mu.coeff(i, j, m);   // -A mu(e_i, e_j)
                }
                out.set(i, j, k, v);
            }
    return out;
}

LieBracket pi_rep(const Matrix& a, const LieBracket& mu) {
    LieBracket d = delta(mu, a);
    d *= -1.0;
    return d;
}

Matrix delta_transpose(const LieBracket& mu, const LieBracket& nu) {
    const int d = mu.dim();
    if (nu.dim() != d) throw validation_error("delta_transpose: dimension mismatch");
    Matrix out(d, d);
    // <delta_mu(E_rs), nu> entry by entry; delta_mu(E_rs) has coefficients
    //   [E_rs mu]_ij^k - mu(E_rs e_i, e_j)^k - mu(e_i, E_rs e_j)^k with sign
    // matching delta(): c'_ij^k = [s==i] c_rj^k + [s==j] c_ir^k - [k==r] c_ij^s.
    for (int r = 0; r < d; ++r)
        for (int s = 0; s < d; ++s) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    acc += mu.coeff(r, j, k) * nu.coeff(s, j, k);  // i = s terms
                    acc += mu.coeff(j, r, k) * nu.coeff(j, s, k);  // j = s terms
                }
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) acc -= mu.coeff(i, j, s) * nu.coeff(i, j, r);
            out(r, s) = acc;
        }
    return out;
}

void require_jacobi(const LieBracket& mu, double tol) {
    const double n = mu.norm();
    const double res = mu.jacobi_residual();
    if (res > tol * (1.0 + n * n * n))
        throw validation_error("Jacobi identity violated (residual " + std::to_string(res) + ")");
}

}  // namespace bflow
