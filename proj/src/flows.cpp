#include "bflow/flows.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

namespace bflow {

const char* flow_status_name(FlowStatus s) {
    switch (s) {
        case FlowStatus::completed: return "completed";
        case FlowStatus::blowup: return "blowup";
        case FlowStatus::step_underflow: return "step_underflow";
    }
    return "?";
}

LieBracket bracket_rhs(FlowKind kind, const LieBracket& mu, const HermitianTriple& t0) {
    return delta(mu, flow_driver(kind, mu, t0));
}

namespace {

void put_mat(Vector& y, int off, const Matrix& m) {
    Eigen::Map<Matrix>(y.data() + off, m.rows(), m.cols()) = m;
}

Matrix get_mat(const Vector& y, int off, int d) {
    return Eigen::Map<const Matrix>(y.data() + off, d, d);
}

struct LineFit {
    double a = 0.0, b = 0.0;  // y = a + b x
    bool ok = false;
};

// Centered least squares; the abscissas can cluster within 1e-12 of a large
// value near a blow-up, where the textbook normal equations cancel to noise.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    const size_t n = x.size();
    if (n < 2 || y.size() != n) return f;
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx < 1e-300) return f;
    f.b = sxy / sxx;
    f.a = my - f.b * mx;
    f.ok = true;
    return f;
}

// Extinction-time estimate: near a norm blow-up 1/|mu|^2 decays linearly, so
// a line through the trailing accepted points crosses zero at the singular
// time. The exponent is then fitted over the final decade before it.
SingularityInfo estimate_singularity(const std::vector<std::pair<double, double>>& pts,
                                     int dir, double t_last) {
    SingularityInfo si;
    si.side = dir;
    const size_t n = pts.size();
    if (n < 3) return si;
    std::vector<double> ts, us;
    for (size_t i = n - 3; i < n; ++i) {
        ts.push_back(pts[i].first);
        us.push_back(1.0 / (pts[i].second * pts[i].second));
    }
    LineFit lf = fit_line(ts, us);
    if (!lf.ok || lf.b * dir >= 0.0) return si;
    double T = -lf.a / lf.b;
    if (dir * (T - t_last) <= 0.0) return si;
    si.t_est = T;

    double delta = std::abs(T - t_last);
    std::vector<double> lx, ly;
    for (const auto& [t, norm] : pts) {
        double gap = std::abs(T - t);
        if (gap >= delta && gap <= 10.0 * delta && norm > 0.0) {
            lx.push_back(std::log(gap));
            ly.push_back(std::log(norm));
        }
    }
    LineFit ef = fit_line(lx, ly);
    if (ef.ok && lx.size() >= 3) si.fit_exponent = ef.b;
    return si;
}

}  // namespace

FlowTrajectory integrate_bracket(FlowKind kind, const LieBracket& mu0,
                                 const HermitianTriple& t0, double t_end,
                                 const FlowOptions& opt) {
    t0.require_compatible();
    if (opt.with_h && opt.normalized)
        throw validation_error("with_h and normalized are mutually exclusive");
    if (opt.samples < 1) throw validation_error("samples must be >= 1");
    const int d = mu0.dim();
    const int d3 = d * d * d;
    const int nh = opt.with_h ? d * d : 0;

    LieBracket start = mu0;
    if (opt.normalized) {
        double n0 = start.norm();
        if (n0 <= 0.0) throw validation_error("cannot normalize the zero bracket");
        start *= 1.0 / n0;
    }

    FlowTrajectory traj;
    traj.kind = kind;

    auto rhs = [&](double, const Vector& y) -> Vector {
        LieBracket mu = LieBracket::unflatten(d, y.head(d3));
        Matrix A = flow_driver(kind, mu, t0);
        LieBracket dmu = delta(mu, A);
        if (opt.normalized) {
            // keep |nu| = 1: remove the radial component of the field
            double ip = dmu.dot(mu) / mu.norm_sq();
            LieBracket radial = mu;
            radial *= ip;
            dmu -= radial;
        }
        Vector dy(y.size());
        dy.head(d3) = dmu.flatten();
        if (opt.with_h) {
            Matrix h = get_mat(y, d3, d);
            put_mat(dy, d3, Matrix(-A * h));
        }
        return dy;
    };

    auto push_sample = [&](double t, const Vector& y) {
        FlowSample s;
        s.t = t;
        s.mu = LieBracket::unflatten(d, y.head(d3));
        require_jacobi(s.mu, opt.jacobi_tol);
        if (opt.with_h) {
            s.h = get_mat(y, d3, d);
            LieBracket rec = gl_action(s.h, mu0);
            rec -= s.mu;
            if (rec.norm() > 1e-5 * (1.0 + s.mu.norm()))
                throw validation_error("frame reconstruction drifted beyond tolerance");
        }
        FlowPQ pq = flow_pq(kind, s.mu, t0);
        Matrix A = flow_driver(kind, pq, t0);
        Matrix ric = ricci_operator(s.mu, t0.metric);
        s.mu_norm = s.mu.norm();
        s.scalar = scalar_curvature(s.mu, t0.metric);
        s.chern_scalar = pq.P.trace();
        s.ric_ac_norm = frob_norm(op_ac_part(ric, t0.J));
        s.driver_norm = frob_norm(A);
        traj.samples.push_back(std::move(s));
    };

    Vector y(d3 + nh);
    y.head(d3) = start.flatten();
    if (opt.with_h) put_mat(y, d3, Matrix::Identity(d, d));
    push_sample(0.0, y);
    traj.t_stop = 0.0;
    if (t_end == 0.0) return traj;
    const int dir = t_end > 0.0 ? +1 : -1;

    const double B = opt.blowup_norm;
    const bool track_blowup = !opt.normalized && B > 0.0;
    if (track_blowup && start.norm() > B) {
        traj.status = FlowStatus::blowup;
        return traj;
    }

    // Accepted-step history for extinction-time extrapolation. Kept ordered;
    // only the trailing part matters, so the front is dropped in blocks.
    constexpr size_t kKeep = 4096;
    std::vector<std::pair<double, double>> hist;
    double t_pre = 0.0;
    Vector y_pre = y;
    auto observer = [&](double t, const Vector& yy) {
        double n = yy.head(d3).norm();
        hist.emplace_back(t, n);
        if (hist.size() > 2 * kKeep) hist.erase(hist.begin(), hist.begin() + kKeep);
        if (track_blowup && n <= B) {
            t_pre = t;
            y_pre = yy;
        }
    };
    auto stopfn = [&](double, const Vector& yy) {
        return track_blowup && yy.head(d3).norm() > B;
    };

    OdeOptions oo;
    oo.rel_tol = opt.rel_tol;
    oo.abs_tol = opt.abs_tol;
    oo.max_steps = opt.max_steps;

    double t_cur = 0.0;
    for (int i = 1; i <= opt.samples; ++i) {
        double t_target = t_end * (static_cast<double>(i) / opt.samples);
        OdeOutcome out = rk45(rhs, t_cur, y, t_target, oo, observer, stopfn);
        t_cur = out.t;
        y = out.y;
        if (out.status == OdeStatus::reached_end) {
            push_sample(t_cur, y);
            traj.t_stop = t_cur;
            oo.h_init = out.h_last;
            continue;
        }
        if (out.status == OdeStatus::max_steps)
            throw validation_error("step budget exhausted before t_end");
        if (out.status == OdeStatus::step_underflow) {
            traj.status = FlowStatus::step_underflow;
            push_sample(t_cur, y);
            traj.t_stop = t_cur;
            return traj;
        }
        // stopped: norm crossed the blow-up threshold at (t_cur, y).
        // Bisect between the last sub-threshold state and here to pin the
        // crossing, then extrapolate the singular time.
        double ta = t_pre, tb = t_cur;
        Vector ya = y_pre, yb = y;
        OdeOptions ro = oo;
        ro.h_init = 0.0;
        auto no_obs = [](double, const Vector&) {};
        auto no_stop = [](double, const Vector&) { return false; };
        for (int it = 0; it < 60; ++it) {
            if (std::abs(tb - ta) <= 1e-12 * std::max(1.0, std::abs(tb))) break;
            double tm = 0.5 * (ta + tb);
            OdeOutcome mid = rk45(rhs, ta, ya, tm, ro, no_obs, no_stop);
            if (mid.status != OdeStatus::reached_end) break;
            if (mid.y.head(d3).norm() > B) {
                tb = mid.t;
                yb = mid.y;
            } else {
                ta = mid.t;
                ya = mid.y;
            }
        }
        t_cur = tb;
        y = yb;
        hist.emplace_back(tb, yb.head(d3).norm());
        push_sample(t_cur, y);
        traj.t_stop = t_cur;
        traj.status = FlowStatus::blowup;
        traj.singularity = estimate_singularity(hist, dir, t_cur);
        return traj;
    }
    traj.status = FlowStatus::completed;
    if (opt.normalized)
        traj.limit = detect_limit(traj, std::max(3, opt.samples / 20), 1e-4);
    return traj;
}

FlowTrajectory integrate_direct(FlowKind kind, const LieBracket& mu_fixed,
                                const HermitianTriple& t0, double t_end,
                                const FlowOptions& opt) {
    t0.require_compatible();
    require_jacobi(mu_fixed, 1e-6);
    if (opt.normalized)
        throw validation_error("normalized mode applies to the structure-constant flow");
    if (opt.samples < 1) throw validation_error("samples must be >= 1");
    const int d = mu_fixed.dim();
    const int d2 = d * d;
    const int nh = opt.with_h ? d2 : 0;
    const Matrix W0 = t0.omega, G0 = t0.metric, J0 = t0.J;
    const Matrix G0_inv = G0.inverse();
    const Matrix W0_inv = t0.omega.fullPivLu().inverse();

    FlowTrajectory traj;
    traj.kind = kind;

    // y = [vec Om; vec G; (vec h)], omega(t) = omega0(Om.,.), g(t) = g0(G.,.)
    auto decode = [&](const Vector& y, Matrix& Om, Matrix& Gm, Matrix& W, Matrix& Gmat) {
        Om = get_mat(y, 0, d);
        Gm = get_mat(y, d2, d);
        W = 0.5 * (Om.transpose() * W0 + W0 * Om);    // antisymmetric part
        Gmat = 0.5 * (Gm.transpose() * G0 + G0 * Gm); // symmetric part
    };

    auto rhs = [&](double, const Vector& y) -> Vector {
        Matrix Om, Gm, W, Gmat;
        decode(y, Om, Gm, W, Gmat);
        FlowPQ pq = flow_pq_general(kind, mu_fixed, W, Gmat);
        Vector dy(y.size());
        put_mat(dy, 0, Matrix(-2.0 * Om * pq.P));
        put_mat(dy, d2, Matrix(-2.0 * Gm * pq.Q));
        if (opt.with_h) {
            Matrix h = get_mat(y, 2 * d2, d);
            Matrix A;
            if (kind == FlowKind::crf) {
                A = pq.P;
            } else {
                HermitianTriple ts = triple_from_pair(W, Gmat, 1e-4);
                A = pq.P + op_ac_part(pq.Q, ts.J);
            }
            put_mat(dy, 2 * d2, Matrix(-(h * A)));
        }
        return dy;
    };

    auto push_sample = [&](double t, const Vector& y) {
        Matrix Om, Gm, W, Gmat;
        decode(y, Om, Gm, W, Gmat);
        HermitianTriple ts = triple_from_pair(W, Gmat, 1e-4);
        double scale = 1.0 + Om.norm() + Gm.norm();
        if ((J0 * Om - Gm * ts.J).norm() > 1e-6 * scale)
            throw validation_error("compatibility lost along the direct flow");
        FlowSample s;
        s.t = t;
        s.mu = mu_fixed;
        s.omega = W;
        s.metric = Gmat;
        if (opt.with_h) {
            s.h = get_mat(y, 2 * d2, d);
            // Om = h^{t_omega} h and G = h^t h up to integration drift
            Matrix om_rec = W0_inv * s.h.transpose() * W0 * s.h;
            Matrix g_rec = G0_inv * s.h.transpose() * G0 * s.h;
            if ((om_rec - Om).norm() + (g_rec - Gm).norm() > 1e-5 * scale)
                throw validation_error("frame reconstruction drifted beyond tolerance");
        }
        FlowPQ pq = flow_pq_general(kind, mu_fixed, W, Gmat);
        Matrix ric = ricci_operator(mu_fixed, Gmat);
        s.mu_norm = mu_fixed.norm();
        s.scalar = scalar_curvature(mu_fixed, Gmat);
        s.chern_scalar = pq.P.trace();
        s.ric_ac_norm = frob_norm(op_ac_part(ric, ts.J));
        Matrix A = (kind == FlowKind::crf) ? pq.P : Matrix(pq.P + op_ac_part(pq.Q, ts.J));
        s.driver_norm = frob_norm(A);
        traj.samples.push_back(std::move(s));
    };

    Vector y(2 * d2 + nh);
    put_mat(y, 0, Matrix::Identity(d, d));
    put_mat(y, d2, Matrix::Identity(d, d));
    if (opt.with_h) put_mat(y, 2 * d2, Matrix::Identity(d, d));
    push_sample(0.0, y);
    traj.t_stop = 0.0;
    if (t_end == 0.0) return traj;

    const double B = opt.blowup_norm;
    auto observer = [](double, const Vector&) {};
    auto stopfn = [&](double, const Vector& yy) {
        return B > 0.0 && yy.head(2 * d2).norm() > B;
    };

    OdeOptions oo;
    oo.rel_tol = opt.rel_tol;
    oo.abs_tol = opt.abs_tol;
    oo.max_steps = opt.max_steps;

    double t_cur = 0.0;
    for (int i = 1; i <= opt.samples; ++i) {
        double t_target = t_end * (static_cast<double>(i) / opt.samples);
        OdeOutcome out = rk45(rhs, t_cur, y, t_target, oo, observer, stopfn);
        t_cur = out.t;
        y = out.y;
        if (out.status == OdeStatus::reached_end) {
            push_sample(t_cur, y);
            traj.t_stop = t_cur;
            oo.h_init = out.h_last;
            continue;
        }
        if (out.status == OdeStatus::max_steps)
            throw validation_error("step budget exhausted before t_end");
        push_sample(t_cur, y);
        traj.t_stop = t_cur;
        traj.status = (out.status == OdeStatus::stopped) ? FlowStatus::blowup
                                                         : FlowStatus::step_underflow;
        return traj;
    }
    traj.status = FlowStatus::completed;
    return traj;
}

Matrix CrfClosedForm::omega_at(double t) const { return triple.omega - 2.0 * t * p0; }

Matrix CrfClosedForm::h_at(double t) const {
    if (!(t > t_minus && t < t_plus))
        throw validation_error("time outside the existence interval");
    const int d = P0.rows();
    Matrix S = Matrix::Identity(d, d) - 2.0 * t * P0;
    double scale = 1.0 + S.norm();
    Matrix root;
    if (is_symmetric(S, 1e-12 * scale)) {
        root = sqrt_symmetric(S);
    } else {
        root = S.sqrt();  // principal branch (real Schur based)
    }
    if ((root * root - S).norm() > 1e-8 * scale)
        throw validation_error("matrix square root failed");
    return root;
}

LieBracket CrfClosedForm::mu_at(double t) const { return gl_action(h_at(t), mu0); }

Matrix CrfClosedForm::P_at(double t) const {
    const int d = P0.rows();
    Matrix S = Matrix::Identity(d, d) - 2.0 * t * P0;
    return S.fullPivLu().solve(P0);
}

double CrfClosedForm::trP_at(double t) const { return P_at(t).trace(); }

CrfClosedForm crf_closed_form(const LieBracket& mu0, const HermitianTriple& t0) {
    t0.require_compatible();
    CrfClosedForm cf;
    cf.mu0 = mu0;
    cf.triple = t0;
    cf.p0 = chern_ricci_form(mu0, t0.J);
    cf.P0 = chern_ricci_operator(mu0, t0);
    double scale = 1.0 + cf.P0.norm();
    Eigen::EigenSolver<Matrix> es(cf.P0);
    if (es.info() != Eigen::Success)
        throw validation_error("eigendecomposition failed");
    double p_plus = 0.0, p_minus = 0.0;
    for (int i = 0; i < cf.P0.rows(); ++i) {
        auto ev = es.eigenvalues()[i];
        if (std::abs(ev.imag()) > 1e-9 * scale) continue;
        double re = ev.real();
        if (re > 1e-12 * scale) p_plus = std::max(p_plus, re);
        if (re < -1e-12 * scale) p_minus = std::min(p_minus, re);
    }
    if (p_plus > 0.0) cf.t_plus = 1.0 / (2.0 * p_plus);
    if (p_minus < 0.0) cf.t_minus = 1.0 / (2.0 * p_minus);
    return cf;
}

DiagnosticsRhs diagnostics_rhs(FlowKind kind, const LieBracket& mu,
                               const HermitianTriple& t0) {
    t0.require_compatible();
    const int d = mu.dim();
    const Matrix id = Matrix::Identity(d, d);
    bool unit_metric = (t0.metric - id).cwiseAbs().maxCoeff() <= 1e-13;
    Matrix phi = id, phi_inv = id;
    LieBracket m = mu;
    HermitianTriple ton = t0;
    if (!unit_metric) {
        phi = cholesky_factor(t0.metric).transpose();
        phi_inv = phi.inverse();
        m = gl_action(phi, mu);
        ton.omega = phi_inv.transpose() * t0.omega * phi_inv;
        ton.metric = id;
        ton.J = phi * t0.J * phi_inv;
    }
    Matrix A = flow_driver(kind, m, ton);
    Matrix ric = ricci_operator(m, id);
    Matrix mm = moment_map(m, id);
    KillingMean km = killing_and_mean(m, id);
    const Vector& H = km.mean;
    Matrix adH = m.ad(H);

    DiagnosticsRhs out;
    out.dR = 2.0 * frob(A, ric) + 2.0 * frob(A, sym(adH)) - 2.0 * (A * H).dot(H);
    out.d_mu_norm_sq = -8.0 * frob(A, mm);
    Matrix lap = sym(delta_transpose(m, delta(m, A)));
    Matrix dric = -0.5 * lap - 0.5 * (km.killing * A + A.transpose() * km.killing) -
                  2.0 * sym(m.ad(Vector(sym(A) * H))) - sym(adH * A - A * adH);
    out.d_ric = phi_inv * dric * phi;
    return out;
}

std::optional<LimitInfo> detect_limit(const FlowTrajectory& traj, int window,
                                      double tol) {
    if (window < 2 || static_cast<int>(traj.samples.size()) < window)
        return std::nullopt;
    std::vector<LieBracket> tail;
    for (size_t i = traj.samples.size() - window; i < traj.samples.size(); ++i) {
        const LieBracket& mu = traj.samples[i].mu;
        double n = mu.norm();
        if (n <= 0.0) return std::nullopt;
        LieBracket unit = mu;
        unit *= 1.0 / n;
        tail.push_back(std::move(unit));
    }
    double spread = 0.0;
    for (size_t i = 0; i < tail.size(); ++i)
        for (size_t j = i + 1; j < tail.size(); ++j) {
            LieBracket diff = tail[i];
            diff -= tail[j];
            spread = std::max(spread, diff.norm());
        }
    if (spread >= tol) return std::nullopt;
    return LimitInfo{tail.back(), spread};
}

SingularityInfo estimate_singularity_tail(const FlowTrajectory& traj) {
    if (traj.samples.size() < 3) return {};
    std::vector<std::pair<double, double>> pts;
    for (const FlowSample& s : traj.samples) pts.emplace_back(s.t, s.mu_norm);
    const int dir = traj.samples.back().t >= traj.samples.front().t ? +1 : -1;
    return estimate_singularity(pts, dir, traj.samples.back().t);
}

}  // namespace bflow
