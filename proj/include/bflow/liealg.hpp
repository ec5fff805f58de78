#pragma once

#include <vector>

#include "bflow/bracket.hpp"

namespace bflow {

/// Orthonormal (Frobenius) basis of the derivation algebra
/// Der(mu) = { D : D mu(x,y) = mu(Dx,y) + mu(x,Dy) }, found as the null
/// space of D -> pi(D)mu with singular values cut at rel_cutoff * sigma_max.
std::vector<Matrix> derivation_basis(const LieBracket& mu, double rel_cutoff = 1e-10);

struct KillingMean {
    Matrix killing;  // B(i,j) = tr(ad e_i ad e_j), symmetric
    Vector mean;     // H with g0(H, x) = tr ad(x); zero iff unimodular
};

/// Killing form matrix and mean (unimodularity) vector of mu with respect
/// to the metric g0 (SPD; identity means the basis is orthonormal).
KillingMean killing_and_mean(const LieBracket& mu, const Matrix& g0);

/// Moment map M of mu in a g0-orthonormal basis, defined by
/// <M, E> = -(1/4) <delta_mu(E), mu> for every endomorphism E.
/// Closed form (orthonormal frame): M = (1/4) sum_i ad_i ad_i^t - (1/2) Gram,
/// Gram(a,b) = tr(ad_a^t ad_b). Satisfies tr M = -(1/4)|mu|^2.
Matrix moment_map(const LieBracket& mu, const Matrix& g0);

/// Ricci operator Ric = M - (1/2) B - S(ad H) of the left-invariant metric
/// defined by g0. General g0 is handled by Cholesky conjugation into an
/// orthonormal frame and back.
Matrix ricci_operator(const LieBracket& mu, const Matrix& g0);

/// tr Ric; equals -(1/4)|mu|^2 - (1/2) tr B - |H|^2.
double scalar_curvature(const LieBracket& mu, const Matrix& g0);

}  // namespace bflow
