#include <random>

#include "bflow/fixtures.hpp"
#include "bflow/liealg.hpp"
#include "koszul_oracle.hpp"
#include "test_harness.hpp"

using namespace bflow;
using bflow::test::banner;
using bflow::test::qoi;
using bflow::test::record;

namespace {

std::mt19937 rng(911);

double u(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Matrix random_matrix(int d, double amp = 1.0) {
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = u(-amp, amp);
    return m;
}

double ricci_vs_koszul(const LieBracket& mu) {
    Matrix ric = ricci_operator(mu, Matrix::Identity(mu.dim(), mu.dim()));
    Matrix oracle = bflow::test::koszul_ricci(mu);
    return (ric - oracle).norm() / (1.0 + oracle.norm());
}

void test_ricci_oracle() {
    banner("Ricci vs Koszul oracle");
    for (const std::string& name : fixture_names()) {
        Fixture f = fixture_by_name(name);
        double err = ricci_vs_koszul(f.mu);
        record("Koszul agreement on " + name, err <= 1e-10, qoi(err, 1e-10));
    }
    double worst = 0.0;
    for (int rep = 0; rep < 6; ++rep) {
        Fixture f = fixture_by_name(fixture_names()[rep % fixture_names().size()]);
        const int d = f.mu.dim();
        Matrix h = Matrix::Identity(d, d) + 0.4 * random_matrix(d);
        worst = std::max(worst, ricci_vs_koszul(gl_action(h, f.mu)));
    }
    record("Koszul agreement on randomized basis images", worst <= 1e-10, qoi(worst, 1e-10));
}

void test_ricci_closed_forms() {
    banner("closed-form Ricci diagonals");
    auto diag_err = [](const Matrix& ric, std::initializer_list<double> want) {
        Matrix expect = Matrix::Zero(ric.rows(), ric.cols());
        int i = 0;
        for (double w : want) expect(i, i) = w, ++i;
        return (ric - expect).norm();
    };
    const Matrix I2 = Matrix::Identity(2, 2), I4 = Matrix::Identity(4, 4),
                 I6 = Matrix::Identity(6, 6);

    record("abelian is flat", ricci_operator(fixture_abelian().mu, I4).norm() == 0.0);
    record("aff has Ric = -I",
           (ricci_operator(fixture_aff().mu, I2) + I2).norm() <= 1e-14);

    double a = 1.3, b = 0.8;
    Matrix ric = ricci_operator(fixture_n4(a, b).mu, I4);
    double err = diag_err(ric, {-0.5 * (a * a + b * b), -0.5 * a * a,
                                0.5 * (a * a - b * b), 0.5 * b * b});
    record("n4 Ricci diagonal", err <= 1e-13, qoi(err, 1e-13));

    ric = ricci_operator(fixture_anna(a, b).mu, I4);
    err = diag_err(ric, {-6 * a * a, 2 * a * a - 0.5 * b * b,
                         -4 * a * a - 0.5 * b * b, -2 * a * a + 0.5 * b * b});
    record("anna Ricci diagonal", err <= 1e-12, qoi(err, 1e-12));

    ric = ricci_operator(fixture_h3h3(a, b).mu, I6);
    err = diag_err(ric, {-0.5 * a * a, -0.5 * a * a, -0.5 * b * b, -0.5 * b * b,
                         0.5 * a * a, 0.5 * b * b});
    record("h3h3 Ricci diagonal", err <= 1e-13, qoi(err, 1e-13));
}

void test_killing_and_mean() {
    banner("Killing form and mean vector");
    const Matrix I2 = Matrix::Identity(2, 2), I4 = Matrix::Identity(4, 4);

    KillingMean km = killing_and_mean(fixture_abelian().mu, I4);
    record("abelian: B = 0, H = 0", km.killing.norm() == 0.0 && km.mean.norm() == 0.0);

    km = killing_and_mean(fixture_aff().mu, I2);
    Matrix b_aff = Matrix::Zero(2, 2);
    b_aff(0, 0) = 1.0;
    record("aff: B = diag(1,0)", (km.killing - b_aff).norm() <= 1e-14);
    record("aff: H = e1", (km.mean - Vector::Unit(2, 0)).norm() <= 1e-14);

    km = killing_and_mean(fixture_n4(1.0, 2.0).mu, I4);
    record("n4 (nilpotent): B = 0, H = 0", km.killing.norm() == 0.0 && km.mean.norm() == 0.0);
    km = killing_and_mean(fixture_h3h3(1.0, 2.0).mu, Matrix::Identity(6, 6));
    record("h3h3 (nilpotent): B = 0, H = 0",
           km.killing.norm() == 0.0 && km.mean.norm() == 0.0);

    km = killing_and_mean(fixture_anna(1.0, 2.0).mu, I4);
    Matrix b_anna = Matrix::Zero(4, 4);
    b_anna(0, 0) = 6.0;
    record("anna: B = diag(6a^2,0,0,0)", (km.killing - b_anna).norm() <= 1e-13);
    record("anna: H = 2a e1", (km.mean - 2.0 * Vector::Unit(4, 0)).norm() <= 1e-13);
}

void test_moment_map() {
    banner("moment map");
    for (const std::string& name : fixture_names()) {
        Fixture f = fixture_by_name(name);
        const int d = f.mu.dim();
        Matrix M = moment_map(f.mu, Matrix::Identity(d, d));
        double worst = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                Matrix E = Matrix::Zero(d, d);
                E(i, j) = 1.0;
                worst = std::max(worst,
                                 std::abs(frob(M, E) + 0.25 * delta(f.mu, E).dot(f.mu)));
            }
        record("defining identity on " + name, worst <= 1e-12 * (1.0 + f.mu.norm_sq()),
               qoi(worst, 1e-12));
        record("trace identity on " + name,
               std::abs(M.trace() + 0.25 * f.mu.norm_sq()) <= 1e-12 * (1.0 + f.mu.norm_sq()));
        record("symmetry on " + name, is_symmetric(M, 1e-12));
    }
    Matrix M = moment_map(fixture_aff().mu, Matrix::Identity(2, 2));
    Matrix want = Matrix::Zero(2, 2);
    want(0, 0) = -0.5;
    record("aff: M = diag(-1/2, 0)", (M - want).norm() <= 1e-14);
}

void test_scalar_curvature() {
    banner("scalar curvature");
    for (const std::string& name : fixture_names()) {
        Fixture f = fixture_by_name(name);
        const int d = f.mu.dim();
        const Matrix I = Matrix::Identity(d, d);
        double R = scalar_curvature(f.mu, I);
        record("R = tr Ric on " + name,
               std::abs(R - ricci_operator(f.mu, I).trace()) <= 1e-12 * (1.0 + std::abs(R)));
        KillingMean km = killing_and_mean(f.mu, I);
        double formula = -0.25 * f.mu.norm_sq() - 0.5 * km.killing.trace() -
                         km.mean.squaredNorm();
        record("structure formula on " + name, std::abs(R - formula) <= 1e-12 * (1.0 + std::abs(R)),
               qoi(std::abs(R - formula), 1e-12));
    }
    record("aff: R = -2",
           std::abs(scalar_curvature(fixture_aff().mu, Matrix::Identity(2, 2)) + 2.0) <= 1e-14);
}

void test_derivations() {
    banner("derivation algebra");
    auto span_sizes_ok = [](const LieBracket& mu, size_t want) {
        return derivation_basis(mu).size() == want;
    };
    record("Der(n4) has dimension 7", span_sizes_ok(fixture_n4(1.0, 1.3).mu, 7));
    record("Der(aff) has dimension 2", span_sizes_ok(fixture_aff().mu, 2));
    record("Der(abelian dim 2) is all of End", span_sizes_ok(LieBracket(2), 4));

    std::vector<Matrix> basis = derivation_basis(fixture_n4(1.0, 2.0).mu);
    double gram_err = 0.0;
    for (size_t i = 0; i < basis.size(); ++i)
        for (size_t j = 0; j < basis.size(); ++j)
            gram_err = std::max(gram_err,
                                std::abs(frob(basis[i], basis[j]) - (i == j ? 1.0 : 0.0)));
    record("basis is Frobenius-orthonormal", gram_err <= 1e-12, qoi(gram_err, 1e-12));

    // Der is a Lie subalgebra: commutators stay in the span.
    double closure_err = 0.0;
    for (size_t i = 0; i < basis.size(); ++i)
        for (size_t j = i + 1; j < basis.size(); ++j) {
            Matrix c = basis[i] * basis[j] - basis[j] * basis[i];
            Matrix proj = Matrix::Zero(c.rows(), c.cols());
            for (const Matrix& d : basis) proj += frob(c, d) * d;
            closure_err = std::max(closure_err, (c - proj).norm());
        }
    record("closed under commutator", closure_err <= 1e-8, qoi(closure_err, 1e-8));
}

void test_general_metric() {
    banner("non-orthonormal metrics");
    // g0 = L L^t makes phi = L^t an isometry onto (phi.mu, I); operators and
    // scalars must transform accordingly.
    for (const std::string& name : {std::string("n4"), std::string("anna")}) {
        Fixture f = fixture_by_name(name, {1.0, 2.0});
        const int d = f.mu.dim();
        Matrix A = random_matrix(d, 0.3);
        Matrix g0 = Matrix::Identity(d, d) + A * A.transpose();
        Matrix L = cholesky_factor(g0);
        LieBracket nu = gl_action(L.transpose(), f.mu);
        Matrix expect = L.transpose().inverse() *
                        ricci_operator(nu, Matrix::Identity(d, d)) * L.transpose();
        double err = (ricci_operator(f.mu, g0) - expect).norm() / (1.0 + expect.norm());
        record("Ricci conjugation covariance on " + name, err <= 1e-11, qoi(err, 1e-11));
        double rs = scalar_curvature(f.mu, g0);
        double rn = scalar_curvature(nu, Matrix::Identity(d, d));
        record("scalar curvature is an isometry invariant on " + name,
               std::abs(rs - rn) <= 1e-11 * (1.0 + std::abs(rn)));
    }
}

}  // namespace

int main() {
    return bflow::test::run("metric Lie algebra curvature", [] {
        test_ricci_oracle();
        test_ricci_closed_forms();
        test_killing_and_mean();
        test_moment_map();
        test_scalar_curvature();
        test_derivations();
        test_general_metric();
    });
}
