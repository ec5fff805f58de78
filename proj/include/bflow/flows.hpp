#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "bflow/curvature.hpp"
#include "bflow/rk45.hpp"

namespace bflow {

struct FlowOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double blowup_norm = 1e6;
    int samples = 200;   // evenly spaced output rows after t = 0
    bool with_h = false;     // co-integrate the frame change h(t)
    bool normalized = false; // integrate the unit-sphere projected field
    long max_steps = 2000000;
    double jacobi_tol = 1e-6;  // per-sample structure-constant check
};

enum class FlowStatus { completed, blowup, step_underflow };
const char* flow_status_name(FlowStatus s);

struct FlowSample {
    double t = 0.0;
    LieBracket mu;
    Matrix h;      // empty unless co-integrated
    Matrix omega;  // direct flow only
    Matrix metric; // direct flow only
    // diagnostics
    double mu_norm = 0.0;
    double scalar = 0.0;       // R
    double chern_scalar = 0.0; // tr P
    double ric_ac_norm = 0.0;
    double driver_norm = 0.0;  // |P + Q^{ac}|
};

struct SingularityInfo {
    double t_est = std::numeric_limits<double>::quiet_NaN();
    int side = +1;  // +1 forward in time, -1 backward
    double fit_exponent = std::numeric_limits<double>::quiet_NaN();
};

struct LimitInfo {
    LieBracket lambda;
    double residual = 0.0;
};

struct FlowTrajectory {
    FlowKind kind = FlowKind::crf;
    FlowStatus status = FlowStatus::completed;
    std::vector<FlowSample> samples;
    double t_stop = 0.0;
    std::optional<SingularityInfo> singularity;
    std::optional<LimitInfo> limit;
};

/// Right-hand side of the structure-constant flow: delta_mu applied to the
/// driving endomorphism of `kind`, with the background triple held fixed.
LieBracket bracket_rhs(FlowKind kind, const LieBracket& mu, const HermitianTriple& t0);

/// Integrates the structure-constant flow from mu0. Samples are evenly
/// spaced on [0, t_end] (t_end may be negative). Stops early on blow-up
/// (|mu| > blowup_norm, crossing refined by bisection, extinction time
/// extrapolated from the trailing accepted steps) or on step underflow.
/// opt.with_h adds the ODE h' = -A h, h(0) = I, so mu(t) = h(t).mu0;
/// opt.normalized integrates d nu = rhs(nu) - <rhs(nu),nu> nu on the unit
/// sphere instead (mu0 is normalized first; incompatible with with_h).
FlowTrajectory integrate_bracket(FlowKind kind, const LieBracket& mu0,
                                 const HermitianTriple& t0, double t_end,
                                 const FlowOptions& opt = {});

/// Integrates the form-side flow d omega = -2 omega(P.,.), d g = -2 g(Q.,.)
/// on the fixed bracket, as the operator system Om' = -2 Om P, G' = -2 G Q
/// with omega(t) = omega0(Om.,.), g(t) = g0(G.,.). Maintains J0 Om = G J;
/// throws when compatibility degrades beyond tolerance. opt.with_h adds
/// h' = -h (P + Q^{ac}) so that (omega, g) = (omega0(h.,h.), g0(h.,h.)).
FlowTrajectory integrate_direct(FlowKind kind, const LieBracket& mu_fixed,
                                const HermitianTriple& t0, double t_end,
                                const FlowOptions& opt = {});

/// Exact solution data for the fixed-J flow, where the form moves linearly:
/// omega(t) = omega0 - 2t p0.
struct CrfClosedForm {
    LieBracket mu0;
    HermitianTriple triple;
    Matrix p0;  // Chern-Ricci form at t = 0
    Matrix P0;  // its operator
    double t_plus = std::numeric_limits<double>::infinity();
    double t_minus = -std::numeric_limits<double>::infinity();

    Matrix omega_at(double t) const;  // omega0 - 2t p0
    Matrix h_at(double t) const;      // (I - 2t P0)^{1/2}, principal root
    LieBracket mu_at(double t) const; // h(t) . mu0
    Matrix P_at(double t) const;      // (I - 2t P0)^{-1} P0
    double trP_at(double t) const;
};
CrfClosedForm crf_closed_form(const LieBracket& mu0, const HermitianTriple& t0);

/// Instantaneous derivatives of scalar curvature, |mu|^2, and the Ricci
/// operator along the flow, from the first-order variation formulas (all in
/// terms of the driver A and the moment map / Killing data). Validated
/// against finite differences in the tests.
struct DiagnosticsRhs {
    double dR = 0.0;
    double d_mu_norm_sq = 0.0;
    Matrix d_ric;
};
DiagnosticsRhs diagnostics_rhs(FlowKind kind, const LieBracket& mu,
                               const HermitianTriple& t0);

/// Trailing-window stabilization check of the normalized trajectory: if the
/// unit brackets of the last `window` samples differ pairwise by less than
/// tol, returns the final one together with the spread. Makes no uniqueness
/// claim about omega-limits.
std::optional<LimitInfo> detect_limit(const FlowTrajectory& traj, int window,
                                      double tol);

/// Extinction-time extrapolation from the trailing samples of a finished
/// run: fits a line to 1/|mu|^2 and reports the zero crossing when it lies
/// beyond the last sample in the direction of integration.
SingularityInfo estimate_singularity_tail(const FlowTrajectory& traj);

}  // namespace bflow
