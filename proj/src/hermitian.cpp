#include "bflow/hermitian.hpp"

namespace bflow {

double HermitianTriple::compatibility_residual() const {
    const int d = dim();
    const Matrix I = Matrix::Identity(d, d);
    double r = (J * J + I).norm();
    r = std::max(r, (omega - J.transpose() * metric).norm());  // omega(x,y) = g(Jx,y)
    r = std::max(r, (metric - metric.transpose()).norm());
    r = std::max(r, (omega + omega.transpose()).norm());
    return r;
}

void HermitianTriple::require_compatible(double tol) const {
    const double r = compatibility_residual();
    if (r > tol * (1.0 + metric.norm()))
        throw validation_error("incompatible (omega, g, J) triple, residual " + std::to_string(r));
}

HermitianTriple triple_from_pair(const Matrix& omega, const Matrix& metric, double tol) {
    const int d = static_cast<int>(omega.rows());
    if (d % 2 != 0) throw validation_error("dimension must be even");
    if (!is_antisymmetric(omega, tol)) throw validation_error("omega is not antisymmetric");
    Eigen::FullPivLU<Matrix> lu(omega);
    if (!lu.isInvertible()) throw validation_error("degenerate form");
    // omega(x,y) = g(Jx,y) => W = J^t G => J = (W G^{-1})^t
    HermitianTriple t;
    t.omega = omega;
    t.metric = metric;
    t.J = (omega * metric.inverse()).transpose();
    const Matrix j2 = t.J * t.J + Matrix::Identity(d, d);
    if (j2.norm() > tol * (1.0 + metric.norm()))
        throw validation_error("incompatible pair: J^2 != -I (residual " +
                               std::to_string(j2.norm()) + ")");
    return t;
}

Matrix g_transpose(const Matrix& a, const HermitianTriple& t) {
    if (t.metric.isIdentity(1e-14)) return a.transpose();
    return t.metric.inverse() * a.transpose() * t.metric;
}

Matrix omega_transpose(const Matrix& a, const HermitianTriple& t) {
    return -t.J * g_transpose(a, t) * t.J;
}

Matrix op_c_part(const Matrix& a, const Matrix& J) { return 0.5 * (a - J * a * J); }
Matrix op_ac_part(const Matrix& a, const Matrix& J) { return 0.5 * (a + J * a * J); }

Matrix form_c_part(const Matrix& p, const Matrix& J) {
    return 0.5 * (p + J.transpose() * p * J);
}
Matrix form_ac_part(const Matrix& p, const Matrix& J) {
    return 0.5 * (p - J.transpose() * p * J);
}

LieBracket nijenhuis(const LieBracket& mu, const Matrix& J) {
    const int d = mu.dim();
    LieBracket n(d);
    for (int i = 0; i < d; ++i) {
        const Vector Jei = J.col(i);
        for (int j = i + 1; j < d; ++j) {
            const Vector Jej = J.col(j);
            Vector ei = Vector::Zero(d), ej = Vector::Zero(d);
            ei(i) = 1.0;
            ej(j) = 1.0;
            const Vector v = mu.eval(Jei, Jej) - mu.eval(ei, ej) -
                             J * mu.eval(Jei, ej) - J * mu.eval(ei, Jej);
            for (int k = 0; k < d; ++k) n.set(i, j, k, v(k));
        }
    }
    return n;
}

bool is_integrable(const LieBracket& mu, const Matrix& J, double tol) {
    return nijenhuis(mu, J).norm() <= tol * (1.0 + mu.norm());
}

double ThreeForm::max_abs() const {
    double m = 0.0;
    for (double v : c) m = std::max(m, std::abs(v));
    return m;
}

double ThreeForm::norm() const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
            for (int k = j + 1; k < dim; ++k) {
                const double v = coeff(i, j, k);
                s += v * v;
            }
    return std::sqrt(s);
}

ThreeForm ce_differential(const LieBracket& mu, const Matrix& form) {
    const int d = mu.dim();
    ThreeForm out;
    out.dim = d;
    out.c.assign(static_cast<size_t>(d) * d * d, 0.0);
    auto omega_of = [&](const Vector& v, int a) {  // form(v, e_a)
        double s = 0.0;
        for (int m = 0; m < d; ++m) s += v(m) * form(m, a);
        return s;
    };
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            for (int k = j + 1; k < d; ++k) {
                Vector ei = Vector::Zero(d), ej = Vector::Zero(d), ek = Vector::Zero(d);
                ei(i) = 1.0;
                ej(j) = 1.0;
                ek(k) = 1.0;
                const double v = -omega_of(mu.eval(ei, ej), k) + omega_of(mu.eval(ei, ek), j) -
                                 omega_of(mu.eval(ej, ek), i);
                // fill all six permutations with alternating sign
                const int idx[6][3] = {{i, j, k}, {j, k, i}, {k, i, j},
                                       {j, i, k}, {i, k, j}, {k, j, i}};
                const double sgn[6] = {1, 1, 1, -1, -1, -1};
                for (int p = 0; p < 6; ++p)
                    out.c[(static_cast<size_t>(idx[p][0]) * d + idx[p][1]) * d + idx[p][2]] =
                        sgn[p] * v;
            }
    return out;
}

bool is_closed(const LieBracket& mu, const Matrix& form, double tol) {
    return ce_differential(mu, form).max_abs() <= tol * (1.0 + mu.norm() * form.norm());
}

bool in_unitary_algebra(const Matrix& a, const HermitianTriple& t, double tol) {
    const double scale = 1.0 + a.norm();
    const Matrix at = g_transpose(a, t);
    return (a + at).norm() <= tol * scale && (a * t.J - t.J * a).norm() <= tol * scale;
}

}  // namespace bflow
