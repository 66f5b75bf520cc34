#include "voltsize/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "voltsize/errors.hpp"

namespace voltsize {

namespace {

constexpr int kIterationCap = 200;
constexpr double kRelTol = 1e-12;

struct Reduced {
    double p;
    double phi;
    double r;
    double x;
    double f0c;     // f0 * c_total
    double v0_sq;
    double denom;   // 1 - 2 x f0 c_total
    double base;    // v0^2 - 2 (r + phi x) p + 2 x qf
    double qf;
    double z_sq;

    double v_sq(double i_sq) const { return (base - i_sq * z_sq) / denom; }
    double p_send(double i_sq) const { return p + i_sq * r; }
    double q_send(double i_sq) const { return phi * p - v_sq(i_sq) * f0c - qf + i_sq * x; }

    // i^2 implied by the sending-end powers at a trial i^2.
    double image(double i_sq) const {
        const double P = p_send(i_sq);
        const double Q = q_send(i_sq);
        return (P * P + Q * Q) / v0_sq;
    }

    double image_slope(double i_sq) const {
        const double dq = f0c * z_sq / denom + x;
        return 2.0 * (p_send(i_sq) * r + q_send(i_sq) * dq) / v0_sq;
    }
};

bool converged(double prev, double next) {
    return std::abs(next - prev) <= kRelTol * std::max(1.0, std::abs(next));
}

// Newton on G(l) = image(l) - l from l = 0. G is a convex quadratic with G(0) >= 0,
// so the iterates increase monotonically toward the smaller root.
bool newton(const Reduced& red, double& i_sq, int& iterations) {
    double l = 0.0;
    for (; iterations < 2 * kIterationCap; ++iterations) {
        const double g = red.image(l) - l;
        const double dg = red.image_slope(l) - 1.0;
        if (!std::isfinite(g) || !std::isfinite(dg) || dg >= 0.0) return false;
        double next = l - g / dg;
        // damp on overshoot into the region where the residual grows
        double step = next - l;
        for (int k = 0; k < 30; ++k) {
            const double trial = l + step;
            if (std::abs(red.image(trial) - trial) <= std::abs(g) || converged(l, trial)) break;
            step *= 0.5;
        }
        next = l + step;
        if (converged(l, next)) {
            i_sq = next;
            return true;
        }
        l = next;
    }
    return false;
}

}  // namespace

void CircuitParams::validate(double p_lo) const {
    if (!(r > 0 && x > 0 && f0 > 0 && v0 > 0 && phi >= 0 && epsilon > 0)) {
        throw std::invalid_argument("circuit parameters must satisfy r, x, f0, v0, epsilon > 0 and phi >= 0");
    }
    if (!(epsilon < 2.0 * r * p_lo)) {
        throw std::invalid_argument("epsilon must be smaller than 2 r p_lo");
    }
}

double DistFlowResiduals::max() const { return std::max({current, real_power, reactive_power, voltage}); }

double stability_margin(const CircuitParams& params, double c_total) {
    return 1.0 - 2.0 * params.x * params.f0 * c_total;
}

bool is_stable(const CircuitParams& params, double c_total) { return stability_margin(params, c_total) > 0.0; }

double v_squared_closed_form(double p, double qf, double i_sq, double c_total, const CircuitParams& params) {
    const double denom = stability_margin(params, c_total);
    if (!(denom > 0.0)) {
        throw StabilityViolation("1 - 2 x f0 (C0 + cs) <= 0 for total capacitance " + std::to_string(c_total));
    }
    return (params.v0_sq() - 2.0 * (params.r + params.phi * params.x) * p + 2.0 * params.x * qf -
            i_sq * params.z_sq()) /
           denom;
}

OperatingPoint solve_distflow(double p, const CircuitParams& params, double c_total, double qf) {
    if (!(p >= 0.0)) throw std::invalid_argument("load power must be nonnegative");
    const double denom = stability_margin(params, c_total);
    if (!(denom > 0.0)) {
        throw StabilityViolation("1 - 2 x f0 (C0 + cs) <= 0 for total capacitance " + std::to_string(c_total));
    }

    const Reduced red{p,
                      params.phi,
                      params.r,
                      params.x,
                      params.f0 * c_total,
                      params.v0_sq(),
                      denom,
                      params.v0_sq() - 2.0 * (params.r + params.phi * params.x) * p + 2.0 * params.x * qf,
                      qf,
                      params.z_sq()};

    double i_sq = 0.0;
    bool ok = false;
    int iterations = 0;
    double prev_step = std::numeric_limits<double>::infinity();
    int growing = 0;
    for (; iterations < kIterationCap; ++iterations) {
        const double next = red.image(i_sq);
        if (!std::isfinite(next)) break;
        const double step = std::abs(next - i_sq);
        if (converged(i_sq, next)) {
            i_sq = next;
            ok = true;
            break;
        }
        growing = step >= prev_step ? growing + 1 : 0;
        if (growing >= 3) break;
        prev_step = step;
        i_sq = next;
    }
    if (!ok) ok = newton(red, i_sq, iterations);

    const double v_sq = ok ? red.v_sq(i_sq) : -1.0;
    if (!ok || !(v_sq > 0.0) || !(i_sq >= 0.0)) {
        std::ostringstream msg;
        msg << "power flow did not converge to the high-voltage solution (p=" << p << ", C=" << c_total
            << ", qf=" << qf << ")";
        throw NoConvergence(msg.str());
    }

    OperatingPoint op;
    op.i_sq = i_sq;
    op.v_sq = v_sq;
    op.v = std::sqrt(v_sq);
    op.i = std::sqrt(i_sq);
    op.p_send = red.p_send(i_sq);
    op.q_send = red.q_send(i_sq);
    return op;
}

OperatingPoint solve_distflow(double p, const CircuitParams& params, const DeviceSizes& sizes,
                              const ControlDecision& decision) {
    if (!(decision.cs >= 0.0 && decision.cs <= sizes.cs_max * (1.0 + 1e-12))) {
        throw std::invalid_argument("switchable capacitance outside [0, Cs]");
    }
    if (sizes.cs_max > 0.0) {
        const double k = decision.cs / sizes.cs_max * sizes.k_levels;
        if (std::abs(k - std::round(k)) > 1e-9) throw std::invalid_argument("switchable capacitance is not a level");
    }
    if (!(std::abs(decision.qf) <= sizes.qf_max * (1.0 + 1e-12))) {
        throw std::invalid_argument("D-STATCOM injection outside [-qf_max, qf_max]");
    }
    return solve_distflow(p, params, sizes.c0 + decision.cs, decision.qf);
}

DistFlowResiduals distflow_residuals(double p, const CircuitParams& params, double c_total, double qf,
                                     const OperatingPoint& op) {
    const double P = op.p_send;
    const double Q = op.q_send;
    const double i_sq = op.i * op.i;
    const double v_sq = op.v * op.v;
    DistFlowResiduals res;
    res.current = std::abs(op.i - std::sqrt(P * P + Q * Q) / params.v0);
    res.real_power = std::abs(P - (p + i_sq * params.r));
    res.reactive_power = std::abs(Q - (params.phi * p - v_sq * params.f0 * c_total - qf + i_sq * params.x));
    res.voltage = std::abs(v_sq - (params.v0_sq() - 2.0 * (params.r * P + params.x * Q) + i_sq * params.z_sq()));
    return res;
}

}  // namespace voltsize
