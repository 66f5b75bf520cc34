#pragma once

// Two-timescale control: the slow capacitor heuristic over the affine
// (linearised) voltage constraints and the exact fast D-STATCOM problem.

#include <algorithm>
#include <utility>

#include "voltsize/circuit.hpp"
#include "voltsize/load.hpp"

namespace voltsize {

/// Constant bounds on the next-stage squared current, l_lo <= (i+)^2 <= l_hi.
struct LossCurrentBounds {
    double lo = 0.0;
    double hi = 0.0;
};

LossCurrentBounds loss_current_bounds(const CircuitParams& params, double p_lo, double p_hi);

/// Right-hand sides of the four affine reactive-power constraints at one stage power.
struct ConstraintBounds {
    double g1 = 0.0;  ///< upper bound on q_vc1, current stage
    double g2 = 0.0;  ///< lower bound on q_vc2, current stage
    double h1 = 0.0;  ///< upper bound on q_vc1, next stage (chance-derived)
    double h2 = 0.0;  ///< lower bound on q_vc2, next stage (chance-derived)
    double l_tilde = 0.0;
    double l_plus_lo = 0.0;
    double l_plus_hi = 0.0;
    double h_tilde1 = 0.0;  ///< lower quantile of next-stage power
    double h_tilde2 = 0.0;  ///< upper quantile of next-stage power
    bool chance_active = true;  ///< false drops the h1/h2 rows (delta = 1)

    double upper() const { return chance_active ? std::min(g1, h1) : g1; }
    double lower() const { return chance_active ? std::max(g2, h2) : g2; }
};

/// (g1, g2) for stage power p and squared-current proxy l_tilde.
std::pair<double, double> deterministic_bounds(double p, double l_tilde, const CircuitParams& params);

/// (r/x + phi) h + ... with the chance-row offsets; sign = +1 for h1, -1 for h2.
double chance_bound(double h_tilde, double l_plus, int sign, const CircuitParams& params);

/// Bounds at stage power p. delta >= 1 marks the chance rows inactive while
/// still reporting their quantile values.
ConstraintBounds constraint_bounds(double p, const TransitionModel& model, double delta, double l_tilde,
                                   const CircuitParams& params);

/// Injection terms of the constraints: f0 (v0^2 +/- eps)(C0 + cs) + qf.
double q_vc1(double c_total, double qf, const CircuitParams& params);
double q_vc2(double c_total, double qf, const CircuitParams& params);

struct SlowControlResult {
    bool feasible = false;
    int level = -1;  ///< k of the chosen capacitor level
    double cs_star = 0.0;
    double qf_star = 0.0;
    double loss_tilde = 0.0;  ///< exact i^2 r at (cs*, qf*)
    bool chance_active = true;
};

/// Capacitor control heuristic: first level k = 0..K for which the extreme D-STATCOM
/// settings satisfy both aggregated bounds; qf* clamps onto the g2 line.
SlowControlResult slow_control(double p, const DeviceSizes& sizes, const ConstraintBounds& bounds,
                               const CircuitParams& params);

struct FastControlResult {
    double qf = 0.0;
    OperatingPoint op;
    bool feasible = false;
};

/// Loss-minimising D-STATCOM setting on the exact model: the smallest qf in
/// [-qf_max, qf_max] keeping v^2 >= v0^2 - eps. Throws NoConvergence from the
/// power flow; infeasible clamped points are returned with feasible = false.
FastControlResult fast_control(double p, double c0, double cs, double qf_max, const CircuitParams& params);

bool in_voltage_band(double v_sq, const CircuitParams& params);

}  // namespace voltsize
