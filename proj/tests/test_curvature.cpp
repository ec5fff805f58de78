#include <random>

#include "bflow/curvature.hpp"
#include "bflow/fixtures.hpp"
#include "test_harness.hpp"

using namespace bflow;
using bflow::test::banner;
using bflow::test::qoi;
using bflow::test::record;

namespace {

std::mt19937 rng(60601);

double u(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Matrix diag4(double a, double b, double c, double d) {
    Matrix m = Matrix::Zero(4, 4);
    m.diagonal() << a, b, c, d;
    return m;
}

// The pair kind each fixture supports: crf everywhere, scf only when the
// canonical form is closed.
FlowKind natural_kind(const Fixture& f) {
    return is_almost_kahler(f.mu, f.triple) ? FlowKind::scf : FlowKind::crf;
}

// Realification of the complex 2x2 trace-zero matrices over the basis
// (h, e, f, ih, ie, if); multiplication by i becomes the complex structure
// u_m -> u_{m+3}. The bracket commutes with it by construction.
LieBracket sl2_realified() {
    LieBracket mu(6);
    mu.set(0, 1, 1, 2.0);
    mu.set(0, 4, 4, 2.0);
    mu.set(3, 1, 4, 2.0);
    mu.set(3, 4, 1, -2.0);
    mu.set(0, 2, 2, -2.0);
    mu.set(0, 5, 5, -2.0);
    mu.set(3, 2, 5, -2.0);
    mu.set(3, 5, 2, 2.0);
    mu.set(1, 2, 0, 1.0);
    mu.set(1, 5, 3, 1.0);
    mu.set(4, 2, 3, 1.0);
    mu.set(4, 5, 0, -1.0);
    return mu;
}

void test_trace_form() {
    banner("trace form values");
    double a = 1.3, b = 0.6;

    Matrix p = chern_ricci_form(fixture_aff(a).mu, fixture_aff(a).triple.J);
    record("aff: p = -a^2 e1^e2", std::abs(p(0, 1) + a * a) <= 1e-14 &&
                                      std::abs(p.cwiseAbs().sum() - 2 * a * a) <= 1e-13);

    Fixture n4 = fixture_n4(a, b);
    p = chern_ricci_form(n4.mu, n4.triple.J);
    record("n4: p = -(ab/2) e1^e2", std::abs(p(0, 1) + 0.5 * a * b) <= 1e-14 &&
                                        std::abs(p.cwiseAbs().sum() - a * b) <= 1e-13);

    Fixture anna = fixture_anna(a, b);
    p = chern_ricci_form(anna.mu, anna.triple.J);
    double want = -a * (4 * a + b);
    record("anna: p = -a(4a+b) e1^e3", std::abs(p(0, 2) - want) <= 1e-12 &&
                                           std::abs(p.cwiseAbs().sum() - 2 * std::abs(want)) <= 1e-12,
           qoi(p(0, 2), want));

    Fixture h3 = fixture_h3h3(a, b);
    record("h3h3 is Chern-Ricci flat",
           chern_ricci_form(h3.mu, h3.triple.J).norm() <= 1e-14);
    record("abelian has p = 0",
           chern_ricci_form(fixture_abelian().mu, fixture_abelian().triple.J).norm() == 0.0);

    // Same J, perturbed compatible metric: the form only sees (mu, J).
    HermitianTriple t = n4.triple;
    Vector v(4);
    for (int i = 0; i < 4; ++i) v(i) = u(-1.0, 1.0);
    Matrix Gp = Matrix::Identity(4, 4) +
                0.5 * (v * v.transpose() + (t.J * v) * (t.J * v).transpose());
    HermitianTriple tp = triple_from_pair(-t.J * Gp, Gp);
    record("p is independent of the metric",
           (chern_ricci_form(n4.mu, tp.J) - chern_ricci_form(n4.mu, t.J)).norm() == 0.0);
}

void test_operator() {
    banner("trace form operator");
    for (const std::string& name : fixture_names()) {
        Fixture f = fixture_by_name(name);
        Matrix P = chern_ricci_operator(f.mu, f.triple);
        Matrix p = chern_ricci_form(f.mu, f.triple.J);
        record("W P = p on " + name, (f.triple.omega * P - p).norm() <= 1e-12);
        record("P is omega-symmetric on " + name,
               (omega_transpose(P, f.triple) - P).norm() <= 1e-12);
        // P kills the center {z : mu(z,.) = 0}.
        const int d = f.mu.dim();
        double center_err = 0.0;
        for (int i = 0; i < d; ++i)
            if (f.mu.ad_basis(i).norm() == 0.0)
                center_err = std::max(center_err, (P * Vector::Unit(d, i)).norm());
        record("P vanishes on the center of " + name, center_err <= 1e-13);
    }

    double a = 1.3, b = 0.6;
    Matrix P = chern_ricci_operator(fixture_aff(a).mu, fixture_aff(a).triple);
    record("aff: P = -a^2 I", (P + a * a * Matrix::Identity(2, 2)).norm() <= 1e-13);

    P = chern_ricci_operator(fixture_n4(a, b).mu, fixture_n4(a, b).triple);
    Matrix want = Matrix::Zero(4, 4);
    want(2, 0) = 0.5 * a * b;
    want(3, 1) = -0.5 * a * b;
    record("n4: P maps e1 -> (ab/2) e3, e2 -> -(ab/2) e4", (P - want).norm() <= 1e-13,
           qoi((P - want).norm(), 1e-13));
    record("n4: P is nilpotent of square zero", (P * P).norm() <= 1e-26);
    Matrix Pc = op_c_part(P, fixture_n4(a, b).triple.J);
    Matrix pc_want = Matrix::Zero(4, 4);
    pc_want(2, 0) = 0.25 * a * b;
    pc_want(3, 1) = -0.25 * a * b;
    pc_want(0, 2) = 0.25 * a * b;
    pc_want(1, 3) = -0.25 * a * b;
    record("n4: P^c has the quarter-coefficient pattern", (Pc - pc_want).norm() <= 1e-13);

    P = chern_ricci_operator(fixture_anna(a, b).mu, fixture_anna(a, b).triple);
    record("anna: P = -a(4a+b) diag(1,0,1,0)",
           (P - diag4(-a * (4 * a + b), 0.0, -a * (4 * a + b), 0.0)).norm() <= 1e-12,
           qoi((P - diag4(-a * (4 * a + b), 0, -a * (4 * a + b), 0)).norm(), 1e-12));

    P = chern_ricci_operator(fixture_product().mu, fixture_product().triple);
    Matrix wp = Matrix::Zero(6, 6);
    wp(0, 0) = -1.0;
    wp(1, 1) = -1.0;
    record("product: P = diag(-1,-1,0,0,0,0)", (P - wp).norm() <= 1e-13);
}

void test_closedness_and_potential() {
    banner("dp = 0 and the potential identity");
    for (const std::string& name : fixture_names()) {
        Fixture f = fixture_by_name(name);
        Matrix p = chern_ricci_form(f.mu, f.triple.J);
        record("dp = 0 on " + name, chern_ricci_closed(f.mu, p));
    }

    PotentialCheck pc = chern_ricci_potential(fixture_n4(1.0, 1.3).mu, fixture_n4(1.0, 1.3).triple);
    record("n4 potential reconstructs P", pc.residual <= 1e-12, qoi(pc.residual, 1e-12));
    record("n4 is unimodular with nilpotent P", pc.unimodular && pc.p_nilpotent);

    pc = chern_ricci_potential(fixture_anna(1.0, 1.0).mu, fixture_anna(1.0, 1.0).triple);
    record("anna potential reconstructs P", pc.residual <= 1e-12, qoi(pc.residual, 1e-12));
    record("anna: non-unimodular, P not nilpotent", !pc.unimodular && !pc.p_nilpotent);

    pc = chern_ricci_potential(fixture_abelian().mu, fixture_abelian().triple);
    record("abelian potential residual is zero", pc.residual == 0.0);

    pc = chern_ricci_potential(fixture_aff().mu, fixture_aff().triple);
    record("aff potential reconstructs P = -I", pc.residual <= 1e-13 && !pc.unimodular);

    bool threw = false;
    try {
        chern_ricci_potential(fixture_product().mu, fixture_product().triple);
    } catch (const validation_error&) {
        threw = true;
    }
    record("potential identity rejects a non-closed form", threw);
}

void test_vanishing() {
    banner("vanishing predicates");
    Fixture ab = fixture_abelian();
    VanishingFlags f = vanishing_predicates(ab.mu, ab.triple);
    record("abelian raises all flags", f.biinvariant && f.anti_biinvariant && f.abelian_unimodular);

    LieBracket sl2 = sl2_realified();
    record("realified sl2 satisfies Jacobi", sl2.jacobi_residual() <= 1e-13);
    Matrix J = Matrix::Zero(6, 6);
    for (int i = 0; i < 3; ++i) {
        J(i + 3, i) = 1.0;
        J(i, i + 3) = -1.0;
    }
    HermitianTriple t{J.transpose(), Matrix::Identity(6, 6), J};
    t.require_compatible();
    f = vanishing_predicates(sl2, t);
    record("multiplication by i is bi-invariant", f.biinvariant);
    record("bi-invariance forces p = 0", chern_ricci_form(sl2, J).norm() <= 1e-13,
           qoi(chern_ricci_form(sl2, J).norm(), 1e-13));

    Fixture n4 = fixture_n4(1.0, 1.0);
    f = vanishing_predicates(n4.mu, n4.triple);
    record("n4 raises no flag and has p != 0",
           !f.any() && chern_ricci_form(n4.mu, n4.triple.J).norm() > 0.1);
}

void test_flow_pairs() {
    banner("flow operator pairs");
    FlowPQ pq = flow_pq(FlowKind::crf, fixture_aff().mu, fixture_aff().triple);
    record("crf on aff gives (-I, -I)",
           (pq.P + Matrix::Identity(2, 2)).norm() <= 1e-13 && (pq.Q - pq.P).norm() == 0.0);

    double a = 1.0, b = 2.0;
    Fixture n4 = fixture_n4(a, b);
    pq = flow_pq(FlowKind::scf, n4.mu, n4.triple);
    Matrix ric_ac_want = -0.25 * diag4(a * a + 2 * b * b, 2 * a * a - b * b,
                                       -2 * a * a + b * b, -a * a - 2 * b * b);
    Matrix qac = op_ac_part(pq.Q, n4.triple.J);
    record("scf on n4: Q^{ac} is the anti-invariant Ricci part",
           (qac - ric_ac_want).norm() <= 1e-12, qoi((qac - ric_ac_want).norm(), 1e-12));
    Matrix ric = ricci_operator(n4.mu, n4.triple.metric);
    record("scf Q = P^c + Ric^{ac}",
           (pq.Q - op_c_part(pq.P, n4.triple.J) - op_ac_part(ric, n4.triple.J)).norm() <= 1e-12);

    pq = flow_pq(FlowKind::acrf, fixture_abelian().mu, fixture_abelian().triple);
    record("acrf on a flat state is the zero pair", pq.P.norm() == 0.0 && pq.Q.norm() == 0.0);

    bool threw = false;
    try {
        flow_pq(FlowKind::scf, fixture_product().mu, fixture_product().triple);
    } catch (const validation_error&) {
        threw = true;
    }
    record("scf refuses a non-closed form", threw);

    // Driver composition per kind.
    Matrix d_crf = flow_driver(FlowKind::crf, n4.mu, n4.triple);
    record("crf driver is P alone",
           (d_crf - chern_ricci_operator(n4.mu, n4.triple)).norm() == 0.0);
    Matrix d_scf = flow_driver(FlowKind::scf, n4.mu, n4.triple);
    record("scf driver is P + Ric^{ac}",
           (d_scf - chern_ricci_operator(n4.mu, n4.triple) - ric_ac_want).norm() <= 1e-12);
    Matrix d_ac = flow_driver(FlowKind::acrf, n4.mu, n4.triple);
    record("acrf driver is Ric^{ac}", (d_ac - ric_ac_want).norm() <= 1e-12);
}

void test_scaling_and_orthogonality() {
    banner("homogeneity and driver orthogonality");
    double worst_scale = 0.0, worst_orth = 0.0;
    for (const std::string& name : fixture_names()) {
        Fixture f = fixture_by_name(name);
        FlowKind kind = natural_kind(f);
        const int d = f.mu.dim();
        double c = u(0.4, 1.9);
        Matrix drv = flow_driver(kind, f.mu, f.triple);
        Matrix drv_scaled = flow_driver(kind, gl_action((1.0 / c) * Matrix::Identity(d, d), f.mu),
                                        f.triple);
        worst_scale = std::max(worst_scale,
                               (drv_scaled - c * c * drv).norm() / (1.0 + drv.norm()));

        FlowPQ pq = flow_pq(kind, f.mu, f.triple);
        Matrix qac = op_ac_part(pq.Q, f.triple.J);
        double dot = std::abs(frob(pq.P, qac));
        double pyth = std::abs(frob_norm(pq.P + qac) * frob_norm(pq.P + qac) -
                               frob_norm(pq.P) * frob_norm(pq.P) - frob_norm(qac) * frob_norm(qac));
        worst_orth = std::max(worst_orth, std::max(dot, pyth));
    }
    record("driver scales as c^2 under mu -> c mu", worst_scale <= 1e-12, qoi(worst_scale, 1e-12));
    record("<P, Q^{ac}> = 0 with the Pythagorean norm split", worst_orth <= 1e-12,
           qoi(worst_orth, 1e-12));
}

void test_report() {
    banner("curvature report");
    Fixture n4 = fixture_n4(1.0, 2.0);
    CurvatureReport r = curvature_report(FlowKind::scf, n4.mu, n4.triple);
    record("report scalar equals tr Ric",
           std::abs(r.scalar - r.ricci.trace()) <= 1e-13);
    record("report chern scalar equals tr P", std::abs(r.chern_scalar - r.P.trace()) <= 1e-13);
    record("report carries |mu|", std::abs(r.mu_norm - n4.mu.norm()) == 0.0);
    record("nilpotent state: killing and mean vanish",
           r.killing.norm() == 0.0 && r.mean.norm() == 0.0);

    FlowPQ direct = flow_pq(FlowKind::scf, n4.mu, n4.triple);
    FlowPQ general = flow_pq_general(FlowKind::scf, n4.mu, n4.triple.omega, n4.triple.metric);
    record("general-metric path reduces to the orthonormal one",
           (direct.P - general.P).norm() <= 1e-12 && (direct.Q - general.Q).norm() <= 1e-12);
}

}  // namespace

int main() {
    return bflow::test::run("curvature operators", [] {
        test_trace_form();
        test_operator();
        test_closedness_and_potential();
        test_vanishing();
        test_flow_pairs();
        test_scaling_and_orthogonality();
        test_report();
    });
}
