#pragma once

#include <map>
#include <string>
#include <vector>

#include "bflow/model.hpp"
#include "bflow/soliton.hpp"

namespace bflow {

/// Log verbosity, read once from the FLOW_LOG environment variable
/// (error | info | debug). Messages go to stderr.
enum class LogLevel { error = 0, info = 1, debug = 2 };
LogLevel log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

struct RunConfig {
    FlowKind flow = FlowKind::scf;
    double t_end = 1.0;
    double tol = 1e-9;          // must lie in (1e-14, 1e-2)
    double blowup_norm = 1e6;
    int samples = 200;
    bool normalized = false;    // unit-sphere flow; enables limit detection
    bool emit_series = true;
    bool emit_report = true;
    bool emit_limit = false;    // implies normalized
    std::string series_path;
    std::string report_path;
};
void validate_config(const RunConfig& cfg);

struct RunResult {
    int exit_code = 0;          // 0 ok; 3 when the integration gave up early
    FlowTrajectory traj;
    std::string report_json;
    std::string message;        // failure description when exit_code != 0
};

/// Integrates one model and assembles the report: status, estimated
/// singular time (with side), soliton certificate at the start point,
/// detected limit, and the per-flow invariant checks. Writes the series
/// CSV and report when paths are configured (partial series on failure).
RunResult run_one(const RunConfig& cfg, const ModelFile& model);

/// CSV with header t,mu_norm,R,trP,ric_ac_norm,pq_norm followed by one
/// column per structure constant c_i_j_k, lexicographic over i<j, all k.
std::string series_csv(const FlowTrajectory& traj, int dim);

struct SweepResult {
    int exit_code = 0;
    std::string index_json;
};

/// One run per grid point (cartesian product over the named value lists),
/// executed concurrently with at most `jobs` workers. Per-point reports go
/// to out_dir/point_<n>.json; failures are recorded and do not stop the
/// sweep. The returned index maps parameters to the per-point outcome.
SweepResult run_sweep(const RunConfig& cfg, const ModelFile& model,
                      const std::map<std::string, std::vector<double>>& grid,
                      const std::string& out_dir, int jobs);

struct FixtureCheck {
    std::string fixture;
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Built-in checks for the embedded catalog (closed forms, curvature
/// values, certificates). Needs no external data.
std::vector<FixtureCheck> fixture_suite();

}  // namespace bflow
