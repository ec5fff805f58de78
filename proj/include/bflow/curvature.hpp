#pragma once

#include "bflow/hermitian.hpp"
#include "bflow/liealg.hpp"

namespace bflow {

/// Flow families on almost-hermitian data. crf fixes the metric coupling
/// q = p(., J.), scf couples the symplectic form to the metric through the
/// anti-invariant Ricci part, acrf moves only the metric.
enum class FlowKind { crf, scf, acrf };

const char* flow_name(FlowKind k);
FlowKind flow_from_name(const std::string& name);

/// Chern-Ricci 2-form of (mu, J) in a unimodular-agnostic trace form:
/// p(x,y) = -(1/2) tr(J ad mu(x,y)) + (1/2) tr(ad J mu(x,y)).
/// Depends only on mu and J; returned as the antisymmetric matrix p(e_i,e_j).
Matrix chern_ricci_form(const LieBracket& mu, const Matrix& J);

/// Operator P with p = omega(P., .); P^{t_omega} = P and P vanishes on the
/// center of mu.
Matrix chern_ricci_operator(const LieBracket& mu, const HermitianTriple& t,
                            double compat_tol = 1e-9);

/// dp = 0 check through the Chevalley-Eilenberg differential.
bool chern_ricci_closed(const LieBracket& mu, const Matrix& p, double tol = 1e-9);

/// When omega is closed, p has a potential vector: omega(Z, mu(x,y)) = p(x,y)
/// and P = ad Z + (ad Z)^{t_omega}. Solves for Z (least squares) and returns
/// the reconstruction residual. For unimodular mu, P must be nilpotent;
/// p_nilpotent reports max |eigenvalue(P)| <= 1e-8 (1 + |P|).
struct PotentialCheck {
    Vector Z;
    double residual = 0.0;
    bool unimodular = false;
    bool p_nilpotent = false;
};
PotentialCheck chern_ricci_potential(const LieBracket& mu, const HermitianTriple& t);

struct VanishingFlags {
    bool biinvariant = false;       // mu(Jx,y) = J mu(x,y)
    bool anti_biinvariant = false;  // mu(Jx,y) = -J mu(x,y)
    bool abelian_unimodular = false;  // mu(Jx,Jy) = mu(x,y) and tr ad = 0
    bool any() const { return biinvariant || anti_biinvariant || abelian_unimodular; }
};

/// Structural conditions under which the Chern-Ricci form vanishes. When any
/// flag holds, p = 0 is verified internally (throws if violated: that would
/// mean inconsistent inputs or a broken trace formula).
VanishingFlags vanishing_predicates(const LieBracket& mu, const HermitianTriple& t,
                                    double tol = 1e-9);

/// Operator pair (P, Q) entering the flow: dw/dt = -2 omega(P.,.),
/// dg/dt = -2 g(Q.,.). P is omega-symmetric, Q is g-symmetric and
/// P^c = Q^c (compatibility). Preconditions: compatible triple; scf and
/// acrf additionally require omega closed against mu.
struct FlowPQ {
    Matrix P;
    Matrix Q;
};
FlowPQ flow_pq(FlowKind kind, const LieBracket& mu, const HermitianTriple& t,
               double compat_tol = 1e-9);

/// The endomorphism driving both the bracket flow delta_mu(driver) and the
/// reparametrization ODEs: P + Q^{ac} for scf/acrf; for crf the flow is
/// driven by P alone (on integrable J this coincides, since P^{ac} = 0).
Matrix flow_driver(FlowKind kind, const LieBracket& mu, const HermitianTriple& t);
Matrix flow_driver(FlowKind kind, const FlowPQ& pq, const HermitianTriple& t);

/// Curvature summary of one state, computed in a g0-orthonormal frame.
struct CurvatureReport {
    Matrix ricci;
    Matrix moment;
    Matrix killing;
    Vector mean;
    double scalar = 0.0;
    Matrix P;
    Matrix Q;
    double chern_scalar = 0.0;  // tr P
    double mu_norm = 0.0;
};
CurvatureReport curvature_report(FlowKind kind, const LieBracket& mu, const HermitianTriple& t);

/// Flow operators for a state with an arbitrary SPD metric and compatible
/// omega (used by the direct flow): conjugates into an orthonormal frame,
/// evaluates, and conjugates back.
FlowPQ flow_pq_general(FlowKind kind, const LieBracket& mu, const Matrix& omega,
                       const Matrix& metric);

}  // namespace bflow
