#pragma once

#include <vector>

#include "bflow/linalg.hpp"

namespace bflow {

/// Dense rank-3 tensor c[i][j][k], antisymmetric in (i,j): the structure
/// constants of a bilinear skew product mu(e_i, e_j) = sum_k c[i][j][k] e_k.
///
/// The same type holds genuine Lie brackets (Jacobi residual ~ 0) and
/// bracket-shaped tensors such as flow right-hand sides; callers that need
/// the Jacobi identity check it explicitly via jacobi_residual().
///
/// Inner product and norm sum over ordered index pairs, so each i<j term
/// counts twice: <mu,la> = sum_{i,j,k} c_ij^k l_ij^k.
class LieBracket {
public:
    LieBracket() : dim_(0) {}
    explicit LieBracket(int dim) : dim_(dim), c_(static_cast<size_t>(dim) * dim * dim, 0.0) {}

    int dim() const { return dim_; }

    double coeff(int i, int j, int k) const { return c_[idx(i, j, k)]; }

    /// Sets c[i][j][k] = v and c[j][i][k] = -v.
    void set(int i, int j, int k, double v) {
        if (i == j && v != 0.0) throw validation_error("diagonal bracket entry must vanish");
        c_[idx(i, j, k)] = v;
        c_[idx(j, i, k)] = -v;
    }
    void add(int i, int j, int k, double v) { set(i, j, k, coeff(i, j, k) + v); }

    Vector eval(const Vector& x, const Vector& y) const;

    /// Matrix of ad(e_i): column j is mu(e_i, e_j).
    Matrix ad_basis(int i) const;
    /// Matrix of ad(x): y -> mu(x, y).
    Matrix ad(const Vector& x) const;

    double dot(const LieBracket& other) const;
    double norm_sq() const { return dot(*this); }
    double norm() const { return std::sqrt(norm_sq()); }

    /// sqrt of sum over i<j<k of |mu(mu(e_i,e_j),e_k) + cyclic|^2.
    double jacobi_residual() const;

    LieBracket& operator+=(const LieBracket& o);
    LieBracket& operator-=(const LieBracket& o);
    LieBracket& operator*=(double s);
    friend LieBracket operator+(LieBracket a, const LieBracket& b) { return a += b; }
    friend LieBracket operator-(LieBracket a, const LieBracket& b) { return a -= b; }
    friend LieBracket operator*(double s, LieBracket a) { return a *= s; }

    /// Flat view for ODE state vectors; unflatten must see the same dim.
    Vector flatten() const;
    static LieBracket unflatten(int dim, const Vector& v);

private:
    size_t idx(int i, int j, int k) const {
        return (static_cast<size_t>(i) * dim_ + j) * dim_ + k;
    }
    int dim_;
    std::vector<double> c_;
};

/// Basis-change action h.mu = h mu(h^{-1}., h^{-1}.). Left action:
/// (h1 h2).mu = h1.(h2.mu). Throws if h is ill conditioned (> cond_max).
LieBracket gl_action(const Matrix& h, const LieBracket& mu, double cond_max = 1e12);

/// delta_mu(A) = mu(A.,.) + mu(.,A.) - A mu(.,.), the derivative of
/// t -> exp(-tA).mu at t = 0. Equals -pi(A) mu.
LieBracket delta(const LieBracket& mu, const Matrix& a);

/// Representation pi(A)mu = A mu(.,.) - mu(A.,.) - mu(.,A.); vanishes
/// exactly when A is a derivation of mu.
LieBracket pi_rep(const Matrix& a, const LieBracket& mu);

/// Adjoint of delta_mu: <delta_mu(A), nu> = <A, delta_transpose(mu, nu)>.
Matrix delta_transpose(const LieBracket& mu, const LieBracket& nu);

/// Throws validation_error when the Jacobi residual exceeds
/// tol * (1 + |mu|^3).
void require_jacobi(const LieBracket& mu, double tol = 1e-9);

}  // namespace bflow
