#pragma once

#include <cmath>

#include "bflow/linalg.hpp"

namespace bflow {

struct OdeOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double h_init = 0.0;  // 0 = choose from the first rhs evaluation
    double h_min = 1e-14;
    long max_steps = 2000000;
};

enum class OdeStatus { reached_end, stopped, step_underflow, max_steps };

struct OdeOutcome {
    OdeStatus status = OdeStatus::reached_end;
    double t = 0.0;
    Vector y;
    double h_last = 0.0;  // signed, magnitude of the last accepted step
    long n_accepted = 0;
    long n_rejected = 0;
};

/// Dormand-Prince 5(4) with PI step-size control. observer(t, y) fires after
/// every accepted step; stop(t, y) is polled after accepted steps and ends
/// the run with status `stopped`. Integrates in either time direction.
template <class F, class Obs, class Stop>
OdeOutcome rk45(F&& f, double t0, Vector y0, double t1, const OdeOptions& opt,
                Obs&& observer, Stop&& stop) {
    static const double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    // b5 - b4: error weights of the embedded pair
    static const double e[7] = {71.0 / 57600,    0.0,         -71.0 / 16695, 71.0 / 1920,
                                -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

    OdeOutcome out;
    out.t = t0;
    out.y = std::move(y0);
    if (t0 == t1) return out;
    const double dir = (t1 > t0) ? 1.0 : -1.0;
    const int n = static_cast<int>(out.y.size());

    Vector k[7];
    k[0] = f(t0, out.y);
    double h = opt.h_init != 0.0 ? std::abs(opt.h_init) : 0.0;
    if (h == 0.0) {
        double ynorm = out.y.norm() + opt.abs_tol;
        double fnorm = k[0].norm() + 1e-300;
        h = std::min(0.01 * std::abs(t1 - t0), 0.01 * ynorm / fnorm);
        if (!(h > 0.0)) h = 1e-6;
    }
    double err_old = 1e-4;
    Vector ynew(n), yerr(n), ystage(n);

    while (true) {
        if (out.n_accepted + out.n_rejected >= opt.max_steps) {
            out.status = OdeStatus::max_steps;
            return out;
        }
        double remaining = std::abs(t1 - out.t);
        bool last = false;
        if (h >= remaining) {
            h = remaining;
            last = true;
        }
        if (h < opt.h_min * std::max(1.0, std::abs(out.t))) {
            out.status = OdeStatus::step_underflow;
            return out;
        }
        const double hs = dir * h;
        for (int s = 1; s < 7; ++s) {
            ystage = out.y;
            for (int j = 0; j < s; ++j)
                if (a[s][j] != 0.0) ystage += (hs * a[s][j]) * k[j];
            k[s] = f(out.t + c[s] * hs, ystage);
        }
        ynew = ystage;  // stage 7 uses the 5th-order weights (FSAL)
        yerr.setZero();
        for (int s = 0; s < 7; ++s)
            if (e[s] != 0.0) yerr += (hs * e[s]) * k[s];
        double err = 0.0;
        for (int i = 0; i < n; ++i) {
            double sc = opt.abs_tol +
                        opt.rel_tol * std::max(std::abs(out.y[i]), std::abs(ynew[i]));
            double r = yerr[i] / sc;
            err += r * r;
        }
        err = std::sqrt(err / n);

        if (err <= 1.0) {
            out.t = last ? t1 : out.t + hs;
            out.y = ynew;
            out.h_last = hs;
            k[0] = k[6];
            ++out.n_accepted;
            observer(out.t, out.y);
            if (stop(out.t, out.y)) {
                out.status = OdeStatus::stopped;
                return out;
            }
            if (last) {
                out.status = OdeStatus::reached_end;
                return out;
            }
            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.17) *
                         std::pow(err_old, 0.04);
            h *= std::min(10.0, std::max(0.2, fac));
            err_old = std::max(err, 1e-4);
        } else {
            // k[0] still holds f at (t, y); nothing to restore on rejection
            ++out.n_rejected;
            double fac = 0.9 * std::pow(err, -0.2);
            h *= std::min(1.0, std::max(0.1, fac));
        }
    }
}

}  // namespace bflow
