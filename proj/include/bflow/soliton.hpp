#pragma once

#include "bflow/flows.hpp"

namespace bflow {

/// Certificate strength, ordered weakest to strongest claim:
/// none          far from any soliton form (residual > reject threshold)
/// inconclusive  between the certification and rejection thresholds
/// algebraic     driver = cI + D with D a derivation (straight-line flow)
/// full          (P,Q) soliton system solvable with D a derivation
/// static        certified and D in u(n): evolution is pure scaling
enum class SolitonKind { none, inconclusive, algebraic, full, static_structure };
const char* soliton_kind_name(SolitonKind k);

struct SolitonCertificate {
    SolitonKind kind = SolitonKind::none;
    double c = 0.0;  // cosmological constant; existence requires -2ct+1 > 0
    Matrix D;        // derivation part, in span(derivation_basis)
    Matrix A_twist;  // (1/2)(D - D^t)^c, the unitary drift of the trajectory
    double residual_algebraic = std::numeric_limits<double>::quiet_NaN();
    double residual_full = std::numeric_limits<double>::quiet_NaN();
};

/// Least-squares projection of the flow driver A onto span{I} + Der(mu),
/// solved jointly (rank-revealing), with certification when the relative
/// residual |A - cI - D| / |A| is below tol.
SolitonCertificate detect_algebraic(FlowKind kind, const LieBracket& mu,
                                    const HermitianTriple& t0, double tol = 1e-8);

/// Joint least squares for the two-equation soliton system
///   P = cI + (1/2)(D - J D^t J),   Q = cI + (1/2)(D + D^t),
/// over c and D in Der(mu). The residual is scaled so that an exact
/// algebraic certificate always bounds it: residual_full <= residual_alg.
/// When both detectors certify, their (c, D) must agree.
SolitonCertificate detect_full(FlowKind kind, const LieBracket& mu,
                               const HermitianTriple& t0, double tol = 1e-8);

/// Compares an integrated trajectory against the certified evolution
/// mu(t) = (-2ct+1)^{-1/2} exp(s(t) A_twist) . mu0 with
/// s(t) = log(-2ct+1)/(-2c) (s = t when c = 0). Samples inside the
/// extinction boundary layer |(-2ct+1)| <= 1e-6 are skipped (a blow-up stop
/// may overshoot the wall by integration error); samples clearly beyond the
/// wall throw, as does a deviation above tol.
struct TrajectoryCheck {
    double max_rel_err = 0.0;
    int samples_checked = 0;
    bool passed = false;
};
TrajectoryCheck verify_trajectory(const SolitonCertificate& cert, const LieBracket& mu0,
                                  const FlowTrajectory& traj, double tol = 1e-5);

/// Same check on the form side: omega(t) = (-2ct+1) exp(s(t)D)-pullback of
/// omega0, and likewise for the metric, against an integrate_direct run.
TrajectoryCheck verify_direct_trajectory(const SolitonCertificate& cert,
                                         const HermitianTriple& t0,
                                         const FlowTrajectory& traj, double tol = 1e-5);

/// Structural consequences for a certified fixed-J soliton: spectrum(P)
/// inside {0, c}, Ker P an abelian ideal, and its orthogonal complement a
/// subalgebra. Violations throw (they would contradict the certificate).
struct CrfStructureReport {
    double c = 0.0;
    int kernel_dim = 0;
    double spectrum_residual = 0.0;
    double kernel_ideal_residual = 0.0;
    double kernel_abelian_residual = 0.0;
    double complement_closed_residual = 0.0;
    bool passed = false;
};
CrfStructureReport crf_structure_check(const LieBracket& mu, const HermitianTriple& t0,
                                       double tol = 1e-8);

}  // namespace bflow
