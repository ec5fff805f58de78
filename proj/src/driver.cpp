#include "bflow/driver.hpp"

#include <nlohmann/json.hpp>

#ifdef BFLOW_HAVE_OPENMP
#include <omp.h>
#endif

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "bflow/liealg.hpp"

namespace bflow {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}

void log_at(LogLevel want, const char* tag, const std::string& msg) {
    if (static_cast<int>(log_level()) < static_cast<int>(want)) return;
    std::lock_guard<std::mutex> lock(log_mutex());
    std::cerr << "[" << tag << "] " << msg << "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write '" + path + "'");
    out << content;
}

json matrix_rows(const Matrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

json soliton_json(const SolitonCertificate& cert) {
    json j;
    j["kind"] = soliton_kind_name(cert.kind);
    j["c"] = cert.c;
    j["D"] = matrix_rows(cert.D);
    j["residual_algebraic"] = cert.residual_algebraic;
    j["residual_full"] = cert.residual_full;
    return j;
}

json bracket_constants(const LieBracket& mu) {
    json cs = json::array();
    const int d = mu.dim();
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            for (int k = 0; k < d; ++k)
                if (mu.coeff(i, j, k) != 0.0)
                    cs.push_back({{"i", i + 1}, {"j", j + 1}, {"k", k + 1},
                                  {"c", mu.coeff(i, j, k)}});
    return cs;
}

}  // namespace

LogLevel log_level() {
    static const LogLevel lvl = [] {
        const char* e = std::getenv("FLOW_LOG");
        if (e != nullptr) {
            const std::string s(e);
            if (s == "debug") return LogLevel::debug;
            if (s == "info") return LogLevel::info;
        }
        return LogLevel::error;
    }();
    return lvl;
}

void log_info(const std::string& msg) { log_at(LogLevel::info, "info", msg); }
void log_debug(const std::string& msg) { log_at(LogLevel::debug, "debug", msg); }

void validate_config(const RunConfig& cfg) {
    if (cfg.t_end == 0.0 || !std::isfinite(cfg.t_end))
        throw validation_error("t-end must be a nonzero finite number");
    if (!(cfg.tol > 1e-14 && cfg.tol < 1e-2))
        throw validation_error("tol must lie in (1e-14, 1e-2)");
    if (cfg.samples < 1) throw validation_error("samples must be >= 1");
    if (cfg.blowup_norm < 0.0) throw validation_error("blowup-norm must be >= 0");
}

std::string series_csv(const FlowTrajectory& traj, int dim) {
    std::ostringstream os;
    os << "t,mu_norm,R,trP,ric_ac_norm,pq_norm";
    for (int i = 1; i <= dim; ++i)
        for (int j = i + 1; j <= dim; ++j)
            for (int k = 1; k <= dim; ++k)
                os << ",c_" << i << "_" << j << "_" << k;
    os << "\n";
    for (const FlowSample& s : traj.samples) {
        os << fmt_double(s.t) << "," << fmt_double(s.mu_norm) << "," << fmt_double(s.scalar)
           << "," << fmt_double(s.chern_scalar) << "," << fmt_double(s.ric_ac_norm) << ","
           << fmt_double(s.driver_norm);
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j)
                for (int k = 0; k < dim; ++k) os << "," << fmt_double(s.mu.coeff(i, j, k));
        os << "\n";
    }
    return os.str();
}

RunResult run_one(const RunConfig& cfg, const ModelFile& model) {
    validate_config(cfg);
    const LieBracket mu0 = model_bracket(model);
    const HermitianTriple t0 = model_triple(model);
    log_info("run: flow=" + std::string(flow_name(cfg.flow)) + " dim=" +
             std::to_string(model.dim) + " t_end=" + fmt_double(cfg.t_end));

    // Certificate of the starting structure; also rejects flows that do not
    // apply to this model (e.g. a non-closed form) before integrating. The
    // fixed-J flow self-similarity is the one-equation form, so crf uses the
    // algebraic detector.
    const SolitonCertificate cert = cfg.flow == FlowKind::crf
                                        ? detect_algebraic(cfg.flow, mu0, t0)
                                        : detect_full(cfg.flow, mu0, t0);

    FlowOptions opt;
    opt.rel_tol = cfg.tol;
    opt.abs_tol = std::min(1e-12, cfg.tol);
    opt.blowup_norm = cfg.blowup_norm;
    opt.samples = cfg.samples;
    opt.normalized = cfg.normalized || cfg.emit_limit;

    RunResult rr;
    try {
        rr.traj = integrate_bracket(cfg.flow, mu0, t0, cfg.t_end, opt);
    } catch (const std::exception& e) {
        rr.exit_code = 3;
        rr.message = e.what();
        rr.traj.kind = cfg.flow;
    }
    if (rr.exit_code == 0 && rr.traj.status == FlowStatus::step_underflow) {
        rr.exit_code = 3;
        rr.message = "step size underflow at t = " + fmt_double(rr.traj.t_stop);
    }

    std::optional<SingularityInfo> sing = rr.traj.singularity;
    if (!sing.has_value() && rr.traj.samples.size() >= 3) {
        const SingularityInfo est = estimate_singularity_tail(rr.traj);
        if (std::isfinite(est.t_est)) sing = est;
    }

    const auto& S = rr.traj.samples;
    json inv = json::array();
    const auto add_inv = [&](const std::string& name, bool ok, const std::string& detail) {
        inv.push_back({{"name", name}, {"passed", ok}, {"detail", detail}});
        if (!ok) log_info("invariant failed: " + name + " (" + detail + ")");
    };
    if (!S.empty()) {
        add_inv("jacobi_preserved", true,
                "enforced at all " + std::to_string(S.size()) + " samples");
        if (cfg.flow != FlowKind::crf) {
            double worst = 0.0;
            for (const FlowSample& s : S)
                worst = std::max(worst, ce_differential(s.mu, t0.omega).max_abs());
            add_inv("omega_closed_along_flow", worst <= 1e-7,
                    "max |d omega| = " + fmt_double(worst));
        }
        const double dir = cfg.t_end > 0.0 ? 1.0 : -1.0;
        if (cfg.flow == FlowKind::crf) {
            bool mono = true;
            for (std::size_t i = 1; i < S.size(); ++i)
                if (dir * (S[i].chern_scalar - S[i - 1].chern_scalar) <
                    -1e-7 * (1.0 + std::abs(S[i].chern_scalar)))
                    mono = false;
            add_inv("chern_trace_monotone", mono, "tr P non-decreasing in t");
        }
        if (cfg.flow == FlowKind::acrf) {
            bool r_mono = true, a_mono = true;
            for (std::size_t i = 1; i < S.size(); ++i) {
                if (dir * (S[i].scalar - S[i - 1].scalar) < -1e-7 * (1.0 + std::abs(S[i].scalar)))
                    r_mono = false;
                if (dir * (S[i].ric_ac_norm - S[i - 1].ric_ac_norm) >
                    1e-7 * (1.0 + S[i].ric_ac_norm))
                    a_mono = false;
            }
            add_inv("scalar_nondecreasing", r_mono, "R non-decreasing in t");
            if (!opt.normalized)
                add_inv("ric_ac_norm_nonincreasing", a_mono, "|Ric^ac| non-increasing in t");
        }
    }

    json rep;
    rep["flow"] = flow_name(cfg.flow);
    rep["status"] = S.empty() ? "failed" : flow_status_name(rr.traj.status);
    rep["normalized"] = opt.normalized;
    rep["t_end_requested"] = cfg.t_end;
    rep["t_reached"] = rr.traj.t_stop;
    rep["samples"] = S.size();
    rep["soliton"] = soliton_json(cert);
    if (sing.has_value()) {
        json sj;
        sj["t_est"] = sing->t_est;
        sj["side"] = sing->side;
        if (std::isfinite(sing->fit_exponent)) sj["fit_exponent"] = sing->fit_exponent;
        rep["singularity"] = sj;
    }
    if (rr.traj.limit.has_value()) {
        rep["limit"] = {{"residual", rr.traj.limit->residual},
                        {"constants", bracket_constants(rr.traj.limit->lambda)},
                        {"mu_norm", rr.traj.limit->lambda.norm()}};
    }
    rep["invariants"] = inv;
    if (!rr.message.empty()) rep["error"] = rr.message;
    if (!S.empty()) {
        const FlowSample& last = S.back();
        rep["final"] = {{"t", last.t},
                        {"mu_norm", last.mu_norm},
                        {"R", last.scalar},
                        {"trP", last.chern_scalar},
                        {"ric_ac_norm", last.ric_ac_norm}};
    }
    rr.report_json = rep.dump(2) + "\n";

    if (cfg.emit_series && !cfg.series_path.empty())
        write_file(cfg.series_path, series_csv(rr.traj, model.dim));
    if (cfg.emit_report && !cfg.report_path.empty()) write_file(cfg.report_path, rr.report_json);
    return rr;
}

SweepResult run_sweep(const RunConfig& cfg, const ModelFile& model,
                      const std::map<std::string, std::vector<double>>& grid,
                      const std::string& out_dir, int jobs) {
    validate_config(cfg);
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
    for (const auto& kv : grid) {
        if (!model.family.count(kv.first))
            throw validation_error("model declares no family parameter '" + kv.first + "'");
        if (kv.second.empty())
            throw validation_error("empty value list for parameter '" + kv.first + "'");
        names.push_back(kv.first);
        values.push_back(kv.second);
    }

    std::vector<std::map<std::string, double>> points;
    if (!names.empty()) {
        std::vector<std::size_t> idx(names.size(), 0);
        while (true) {
            std::map<std::string, double> p;
            for (std::size_t q = 0; q < names.size(); ++q) p[names[q]] = values[q][idx[q]];
            points.push_back(std::move(p));
            std::size_t q = 0;
            while (q < idx.size() && ++idx[q] == values[q].size()) idx[q++] = 0;
            if (q == idx.size()) break;
        }
    }

    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    log_info("sweep: " + std::to_string(points.size()) + " points");

    struct PointResult {
        json summary;
    };
    std::vector<PointResult> res(points.size());

    int nthreads = jobs;
    if (nthreads <= 0) {
        nthreads = static_cast<int>(std::thread::hardware_concurrency());
        if (nthreads < 1) nthreads = 1;
    }

    const int npoints = static_cast<int>(points.size());
#ifdef BFLOW_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
#endif
    for (int i = 0; i < npoints; ++i) {
        json summary;
        summary["params"] = points[i];
        try {
            ModelFile pm = model;
            for (const auto& kv : points[i]) pm.family[kv.first] = kv.second;
            RunConfig pc = cfg;
            pc.emit_series = false;
            pc.series_path.clear();
            pc.report_path =
                out_dir.empty() ? "" : out_dir + "/point_" + std::to_string(i) + ".json";
            const RunResult r = run_one(pc, pm);
            const json rep = json::parse(r.report_json);
            summary["status"] = rep["status"];
            summary["soliton"] = {{"kind", rep["soliton"]["kind"]},
                                  {"c", rep["soliton"]["c"]}};
            if (rep.contains("singularity")) summary["singularity"] = rep["singularity"];
            if (rep.contains("limit"))
                summary["limit"] = {{"residual", rep["limit"]["residual"]},
                                    {"constants", rep["limit"]["constants"]}};
            if (!out_dir.empty()) summary["report"] = "point_" + std::to_string(i) + ".json";
            if (r.exit_code != 0) summary["error"] = r.message;
        } catch (const std::exception& e) {
            summary["error"] = e.what();
        }
        res[i].summary = std::move(summary);
    }

    json index;
    index["points"] = json::array();
    for (const PointResult& p : res) index["points"].push_back(p.summary);

    SweepResult out;
    out.index_json = index.dump(2) + "\n";
    if (!out_dir.empty()) write_file(out_dir + "/index.json", out.index_json);
    return out;
}

std::vector<FixtureCheck> fixture_suite() {
    std::vector<FixtureCheck> out;
    const auto rec = [&](const std::string& fx, const std::string& name, bool ok,
                         const std::string& detail = "") {
        out.push_back({fx, name, ok, detail});
    };

    {
        const Fixture f = fixture_abelian();
        rec("abelian", "ricci vanishes",
            frob_norm(ricci_operator(f.mu, f.triple.metric)) <= 1e-14);
        rec("abelian", "first Chern-Ricci form vanishes",
            chern_ricci_form(f.mu, f.triple.J).cwiseAbs().maxCoeff() <= 1e-14);
        const SolitonCertificate c = detect_full(FlowKind::scf, f.mu, f.triple);
        rec("abelian", "static certificate with c = 0",
            c.kind == SolitonKind::static_structure && std::abs(c.c) <= 1e-12 &&
                frob_norm(c.D) <= 1e-12);
    }
    {
        const Fixture f = fixture_aff();
        const Matrix id = Matrix::Identity(2, 2);
        rec("aff", "Ricci = -I",
            frob_norm(ricci_operator(f.mu, f.triple.metric) + id) <= 1e-12);
        rec("aff", "Chern-Ricci operator = -I",
            frob_norm(chern_ricci_operator(f.mu, f.triple) + id) <= 1e-12);
        const SolitonCertificate c = detect_algebraic(FlowKind::crf, f.mu, f.triple);
        rec("aff", "static certificate (c, D) = (-1, 0)",
            c.kind == SolitonKind::static_structure && std::abs(c.c + 1.0) <= 1e-12 &&
                frob_norm(c.D) <= 1e-12,
            "c = " + fmt_double(c.c));
        const CrfClosedForm cf = crf_closed_form(f.mu, f.triple);
        rec("aff", "existence interval (-1/2, inf)",
            std::abs(cf.t_minus + 0.5) <= 1e-12 && std::isinf(cf.t_plus));
    }
    {
        const Fixture f = fixture_n4(1.0, 1.0);
        rec("n4", "omega closed", is_almost_kahler(f.mu, f.triple));
        Matrix p_expect = Matrix::Zero(4, 4);
        p_expect(0, 1) = -0.5;
        p_expect(1, 0) = 0.5;
        rec("n4", "first form = -(ab/2) e1^e2",
            frob_norm(chern_ricci_form(f.mu, f.triple.J) - p_expect) <= 1e-12);
        const Matrix ric_ac = op_ac_part(ricci_operator(f.mu, f.triple.metric), f.triple.J);
        Matrix ac_expect = Matrix::Zero(4, 4);
        ac_expect.diagonal() << -0.75, -0.25, 0.25, 0.75;
        rec("n4", "anti-invariant Ricci part matches", frob_norm(ric_ac - ac_expect) <= 1e-12);
        const SolitonCertificate c = detect_full(FlowKind::scf, f.mu, f.triple);
        rec("n4", "expanding certificate at a = b, c = -5/4",
            (c.kind == SolitonKind::full || c.kind == SolitonKind::static_structure) &&
                std::abs(c.c + 1.25) <= 1e-10 && c.residual_full <= 1e-10,
            "c = " + fmt_double(c.c));
        const SolitonCertificate n = detect_full(FlowKind::scf, fixture_n4(1.0, 2.0).mu,
                                                 fixture_n4(1.0, 2.0).triple);
        rec("n4", "no certificate at (a, b) = (1, 2)",
            n.kind == SolitonKind::none && n.residual_full > 1e-3,
            "residual = " + fmt_double(n.residual_full));
    }
    {
        const Fixture f = fixture_anna(1.0, 1.0);
        rec("anna", "omega closed", is_almost_kahler(f.mu, f.triple));
        rec("anna", "|mu_{1,2}|^2 = 20",
            std::abs(fixture_anna(1.0, 2.0).mu.norm_sq() - 20.0) <= 1e-12);
        Matrix p_expect = Matrix::Zero(4, 4);
        p_expect.diagonal() << -5.0, 0.0, -5.0, 0.0;
        rec("anna", "Chern-Ricci operator = -a(4a+b) diag(1,0,1,0)",
            frob_norm(chern_ricci_operator(f.mu, f.triple) - p_expect) <= 1e-12);
        const Fixture s = fixture_anna(1.0, 2.0);
        const SolitonCertificate c = detect_algebraic(FlowKind::scf, s.mu, s.triple);
        Matrix d_expect = Matrix::Zero(4, 4);
        d_expect.diagonal() << 0.0, 6.0, 0.0, 6.0;
        rec("anna", "certificate at b = 2a: c = -6a^2, D = 6a^2 diag(0,1,0,1)",
            c.residual_algebraic <= 1e-10 && std::abs(c.c + 6.0) <= 1e-9 &&
                frob_norm(c.D - d_expect) <= 1e-9,
            "c = " + fmt_double(c.c));
    }
    {
        const Fixture f = fixture_product();
        Matrix p_expect = Matrix::Zero(6, 6);
        p_expect.diagonal() << -1.0, -1.0, 0.0, 0.0, 0.0, 0.0;
        rec("product", "Chern-Ricci operator = diag(-1,-1,0,0,0,0)",
            frob_norm(chern_ricci_operator(f.mu, f.triple) - p_expect) <= 1e-12);
        const SolitonCertificate c = detect_algebraic(FlowKind::crf, f.mu, f.triple);
        rec("product", "factor structure admits no certificate",
            c.kind == SolitonKind::none && c.residual_algebraic > 1e-3,
            "residual = " + fmt_double(c.residual_algebraic));
    }
    return out;
}

}  // namespace bflow
