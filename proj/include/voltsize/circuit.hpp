#pragma once

// Single-branch radial circuit: slack bus -> (r, x) -> load bus with a fixed
// capacitor, a K-level switchable capacitor and a D-STATCOM installed at the load.
// All quantities are per unit on a 1 kW base.


namespace voltsize {

struct CircuitParams {
    double r = 1.1e-5;      ///< branch resistance
    double x = 1.1e-5;      ///< branch reactance
    double f0 = 1.0;        ///< system frequency
    double v0 = 1.0;        ///< slack-bus voltage magnitude
    double phi = 0.2;       ///< load reactive-to-real power ratio
    double epsilon = 0.02;  ///< half-width of the allowed band on v^2

    double z_sq() const { return r * r + x * x; }
    double v0_sq() const { return v0 * v0; }

    /// Throws std::invalid_argument unless all sign constraints hold and
    /// epsilon < 2 r p_lo.
    void validate(double p_lo) const;
};

struct DeviceSizes {
    double c0 = 0.0;      ///< fixed capacitance
    double cs_max = 0.0;  ///< switchable capacitance at its top level
    int k_levels = 1;     ///< K; the switchable capacitor has K+1 levels
    double qf_max = 0.0;  ///< D-STATCOM half-range

    double level(int k) const { return k_levels > 0 ? cs_max * k / k_levels : 0.0; }
    bool nonnegative() const { return c0 >= 0.0 && cs_max >= 0.0 && qf_max >= 0.0 && k_levels >= 1; }
};

struct ControlDecision {
    double cs = 0.0;
    double qf = 0.0;
};

struct OperatingPoint {
    double v = 0.0;
    double i = 0.0;
    double p_send = 0.0;
    double q_send = 0.0;
    double v_sq = 0.0;  ///< v^2 as solved; v is its square root
    double i_sq = 0.0;  ///< i^2 as solved; i is its square root

    double loss(const CircuitParams& params) const { return i_sq * params.r; }
};

/// Absolute residuals of the four branch-flow equations at an operating point.
/// The current equation is measured on magnitudes, |i - sqrt(P^2+Q^2)/v0|.
struct DistFlowResiduals {
    double current = 0.0;
    double real_power = 0.0;
    double reactive_power = 0.0;
    double voltage = 0.0;

    double max() const;
};

/// 1 - 2 x f0 c_total; positive iff the operating point is on the stable side.
double stability_margin(const CircuitParams& params, double c_total);
bool is_stable(const CircuitParams& params, double c_total);

/// Closed-form v^2 given the squared current (affine in p, qf and i^2).
/// Throws StabilityViolation when 1 - 2 x f0 c_total <= 0.
double v_squared_closed_form(double p, double qf, double i_sq, double c_total, const CircuitParams& params);

/// High-voltage (small current) solution of the branch-flow equations for a total
/// capacitance c_total and D-STATCOM injection qf.
/// Throws StabilityViolation or NoConvergence.
OperatingPoint solve_distflow(double p, const CircuitParams& params, double c_total, double qf);

OperatingPoint solve_distflow(double p, const CircuitParams& params, const DeviceSizes& sizes,
                              const ControlDecision& decision);

DistFlowResiduals distflow_residuals(double p, const CircuitParams& params, double c_total, double qf,
                                     const OperatingPoint& op);

}  // namespace voltsize
