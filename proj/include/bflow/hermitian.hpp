#pragma once

#include "bflow/bracket.hpp"

namespace bflow {

/// Compatible (omega, g, J) data on R^d, d even: omega = g(J., .), J^2 = -I,
/// g SPD. Stored as matrices in the working basis; compatibility drift is
/// checked on construction and can be re-checked during flows.
struct HermitianTriple {
    Matrix omega;   // antisymmetric, nondegenerate
    Matrix metric;  // SPD
    Matrix J;       // almost complex structure

    int dim() const { return static_cast<int>(J.rows()); }

    /// max of |J^2 + I|, |omega - J^t G| and metric symmetry drift.
    double compatibility_residual() const;
    void require_compatible(double tol = 1e-9) const;
};

/// Builds J from a nondegenerate 2-form and a metric via omega = g(J.,.),
/// i.e. J = G^{-1} W^t. Throws validation_error when omega is degenerate
/// ("degenerate form") or when J^2 != -I ("incompatible pair", tol 1e-9).
HermitianTriple triple_from_pair(const Matrix& omega, const Matrix& metric,
                                 double tol = 1e-9);

/// g-adjoint A^{t_g} = G^{-1} A^t G (plain transpose for orthonormal g).
Matrix g_transpose(const Matrix& a, const HermitianTriple& t);

/// omega-adjoint A^{t_omega} = -J A^{t_g} J; satisfies
/// omega(Ax, y) = omega(x, A^{t_omega} y).
Matrix omega_transpose(const Matrix& a, const HermitianTriple& t);

/// J-commuting part A^c = (A - JAJ)/2 and anticommuting part
/// A^{ac} = (A + JAJ)/2; A = A^c + A^{ac}.
Matrix op_c_part(const Matrix& a, const Matrix& J);
Matrix op_ac_part(const Matrix& a, const Matrix& J);

/// Form counterparts on bilinear-form matrices: p^c = (p + J^t p J)/2
/// evaluates to (p(x,y) + p(Jx,Jy))/2, and p^{ac} the difference.
Matrix form_c_part(const Matrix& p, const Matrix& J);
Matrix form_ac_part(const Matrix& p, const Matrix& J);

/// Nijenhuis tensor N(x,y) = mu(Jx,Jy) - mu(x,y) - J mu(Jx,y) - J mu(x,Jy)
/// as a bracket-shaped tensor; J is integrable iff N = 0.
LieBracket nijenhuis(const LieBracket& mu, const Matrix& J);

bool is_integrable(const LieBracket& mu, const Matrix& J, double tol = 1e-9);

/// Chevalley-Eilenberg differential of a 2-form against mu:
/// (d omega)(x,y,z) = -omega(mu(x,y),z) + omega(mu(x,z),y) - omega(mu(y,z),x).
/// Returned as the full antisymmetric coefficient tensor.
struct ThreeForm {
    int dim = 0;
    std::vector<double> c;  // index (i*d + j)*d + k
    double coeff(int i, int j, int k) const { return c[(static_cast<size_t>(i) * dim + j) * dim + k]; }
    double max_abs() const;
    double norm() const;  // sqrt of sum over i<j<k of coeff^2
};
ThreeForm ce_differential(const LieBracket& mu, const Matrix& form);

bool is_closed(const LieBracket& mu, const Matrix& form, double tol = 1e-9);
inline bool is_almost_kahler(const LieBracket& mu, const HermitianTriple& t, double tol = 1e-9) {
    return is_closed(mu, t.omega, tol);
}

/// True when A is in u(n) for the triple: g-skew and commuting with J.
bool in_unitary_algebra(const Matrix& a, const HermitianTriple& t, double tol = 1e-9);

}  // namespace bflow
