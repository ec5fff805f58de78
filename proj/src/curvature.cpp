#include "bflow/curvature.hpp"

#include <Eigen/LU>

namespace bflow {

const char* flow_name(FlowKind k) {
    switch (k) {
        case FlowKind::crf: return "crf";
        case FlowKind::scf: return "scf";
        case FlowKind::acrf: return "acrf";
    }
    return "?";
}

FlowKind flow_from_name(const std::string& name) {
    if (name == "crf") return FlowKind::crf;
    if (name == "scf") return FlowKind::scf;
    if (name == "acrf") return FlowKind::acrf;
    throw validation_error("unknown flow kind: " + name);
}

Matrix chern_ricci_form(const LieBracket& mu, const Matrix& J) {
    const int d = mu.dim();
    // Both traces are linear in mu(x,y); precompute against the basis.
    Vector tr_jad(d), tr_ad(d);
    for (int m = 0; m < d; ++m) {
        Matrix adm = mu.ad_basis(m);
        tr_jad(m) = (J * adm).trace();
        tr_ad(m) = adm.trace();
    }
    Matrix p = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        Matrix adi = mu.ad_basis(i);
        for (int j = i + 1; j < d; ++j) {
            Vector v = adi.col(j);
            double val = -0.5 * tr_jad.dot(v) + 0.5 * tr_ad.dot(J * v);
            p(i, j) = val;
            p(j, i) = -val;
        }
    }
    return p;
}

Matrix chern_ricci_operator(const LieBracket& mu, const HermitianTriple& t,
                            double compat_tol) {
    t.require_compatible(compat_tol);
    Matrix p = chern_ricci_form(mu, t.J);
    // omega(P x, y) = p(x, y)  <=>  W P = p (both sides antisymmetric).
    Eigen::FullPivLU<Matrix> lu(t.omega);
    if (!lu.isInvertible()) throw validation_error("degenerate form");
    return lu.solve(p);
}

bool chern_ricci_closed(const LieBracket& mu, const Matrix& p, double tol) {
    ThreeForm dp = ce_differential(mu, p);
    double scale = 1.0 + mu.norm() * frob_norm(p);
    return dp.max_abs() <= tol * scale;
}

VanishingFlags vanishing_predicates(const LieBracket& mu, const HermitianTriple& t,
                                    double tol) {
    const int d = mu.dim();
    const Matrix& J = t.J;
    double res_bi = 0.0, res_anti = 0.0, res_ab = 0.0, res_uni = 0.0;
    for (int i = 0; i < d; ++i) {
        Matrix adi = mu.ad_basis(i);       // columns mu(e_i, e_j)
        Matrix adJi = mu.ad(J.col(i));     // columns mu(J e_i, e_j)
        res_bi = std::max(res_bi, (adJi - J * adi).cwiseAbs().maxCoeff());
        res_anti = std::max(res_anti, (adJi + J * adi).cwiseAbs().maxCoeff());
        res_ab = std::max(res_ab, (adJi * J - adi).cwiseAbs().maxCoeff());
        res_uni = std::max(res_uni, std::abs(adi.trace()));
    }
    double scale = tol * (1.0 + mu.norm());
    VanishingFlags f;
    f.biinvariant = res_bi <= scale;
    f.anti_biinvariant = res_anti <= scale;
    f.abelian_unimodular = res_ab <= scale && res_uni <= scale;
    if (f.any()) {
        // Each predicate forces the trace form to vanish; a violation means
        // the inputs were inconsistent.
        double pnorm = frob_norm(chern_ricci_form(mu, J));
        if (pnorm > 1e-8 * (1.0 + mu.norm_sq()))
            throw validation_error("vanishing predicate holds but the trace form is nonzero");
    }
    return f;
}

PotentialCheck chern_ricci_potential(const LieBracket& mu, const HermitianTriple& t) {
    t.require_compatible();
    if (!is_closed(mu, t.omega))
        throw validation_error("potential identity needs a closed form");
    const int d = mu.dim();
    Matrix p = chern_ricci_form(mu, t.J);
    // omega(Z, mu(e_i,e_j)) = p_ij, one equation per ordered pair i<j.
    const int rows = d * (d - 1) / 2;
    Matrix sys(rows, d);
    Vector rhs(rows);
    int r = 0;
    for (int i = 0; i < d; ++i) {
        Matrix adi = mu.ad_basis(i);
        for (int j = i + 1; j < d; ++j, ++r) {
            sys.row(r) = (t.omega * adi.col(j)).transpose();
            rhs(r) = p(i, j);
        }
    }
    PotentialCheck out;
    out.Z = lstsq(sys, rhs);
    Matrix adz = mu.ad(out.Z);
    Matrix P = chern_ricci_operator(mu, t);
    out.residual = frob_norm(P - adz - omega_transpose(adz, t));
    double tr_res = 0.0;
    for (int i = 0; i < d; ++i) tr_res = std::max(tr_res, std::abs(mu.ad_basis(i).trace()));
    out.unimodular = tr_res <= 1e-9 * (1.0 + mu.norm());
    Eigen::EigenSolver<Matrix> es(P);
    out.p_nilpotent = es.eigenvalues().cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + frob_norm(P));
    return out;
}

FlowPQ flow_pq(FlowKind kind, const LieBracket& mu, const HermitianTriple& t,
               double compat_tol) {
    t.require_compatible(compat_tol);
    FlowPQ pq;
    const int d = mu.dim();
    switch (kind) {
        case FlowKind::crf: {
            pq.P = chern_ricci_operator(mu, t, compat_tol);
            pq.Q = pq.P;
            break;
        }
        case FlowKind::scf: {
            if (!is_closed(mu, t.omega, compat_tol))
                throw validation_error("scf needs a closed symplectic form");
            pq.P = chern_ricci_operator(mu, t, compat_tol);
            Matrix ric = ricci_operator(mu, t.metric);
            pq.Q = op_c_part(pq.P, t.J) + op_ac_part(ric, t.J);
            break;
        }
        case FlowKind::acrf: {
            if (!is_closed(mu, t.omega, compat_tol))
                throw validation_error("acrf needs a closed symplectic form");
            pq.P = Matrix::Zero(d, d);
            Matrix ric = ricci_operator(mu, t.metric);
            pq.Q = op_ac_part(ric, t.J);
            break;
        }
    }
    // P^c = Q^c holds for each pair by construction; drift here would mean a
    // broken J.
    double cc = frob_norm(op_c_part(pq.P, t.J) - op_c_part(pq.Q, t.J));
    if (cc > compat_tol * (1.0 + frob_norm(pq.P) + frob_norm(pq.Q)))
        throw validation_error("flow pair lost P^c = Q^c compatibility");
    return pq;
}

Matrix flow_driver(FlowKind kind, const FlowPQ& pq, const HermitianTriple& t) {
    if (kind == FlowKind::crf) return pq.P;
    return pq.P + op_ac_part(pq.Q, t.J);
}

Matrix flow_driver(FlowKind kind, const LieBracket& mu, const HermitianTriple& t) {
    return flow_driver(kind, flow_pq(kind, mu, t), t);
}

CurvatureReport curvature_report(FlowKind kind, const LieBracket& mu,
                                 const HermitianTriple& t) {
    CurvatureReport r;
    r.ricci = ricci_operator(mu, t.metric);
    r.moment = moment_map(mu, t.metric);
    KillingMean km = killing_and_mean(mu, t.metric);
    r.killing = km.killing;
    r.mean = km.mean;
    r.scalar = scalar_curvature(mu, t.metric);
    FlowPQ pq = flow_pq(kind, mu, t);
    r.P = pq.P;
    r.Q = pq.Q;
    r.chern_scalar = pq.P.trace();
    r.mu_norm = mu.norm();
    return r;
}

FlowPQ flow_pq_general(FlowKind kind, const LieBracket& mu, const Matrix& omega,
                       const Matrix& metric) {
    // phi pushes the metric to the identity: g(x,y) = (phi x).(phi y).
    Matrix phi = cholesky_factor(metric).transpose();
    Matrix phi_inv = phi.inverse();
    LieBracket mu_on = gl_action(phi, mu);
    HermitianTriple t;
    t.omega = phi_inv.transpose() * omega * phi_inv;
    t.metric = Matrix::Identity(mu.dim(), mu.dim());
    t.J = (t.omega * t.metric.inverse()).transpose();
    // Called on Runge-Kutta stage states, which sit O(h^3) off the compatible
    // manifold; keep only a coarse net here. Accepted samples are re-checked
    // at 1e-6 by the integrator.
    FlowPQ pq = flow_pq(kind, mu_on, t, 1e-4);
    pq.P = phi_inv * pq.P * phi;
    pq.Q = phi_inv * pq.Q * phi;
    return pq;
}

}  // namespace bflow
