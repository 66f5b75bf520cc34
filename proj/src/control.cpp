#include "voltsize/control.hpp"

#include <cmath>
#include <tuple>
#include <stdexcept>

#include "voltsize/errors.hpp"

namespace voltsize {

namespace {

constexpr double kQfTolerance = 1e-10;

}  // namespace

LossCurrentBounds loss_current_bounds(const CircuitParams& params, double p_lo, double p_hi) {
    if (!(p_lo <= p_hi)) throw std::invalid_argument("loss current bounds require p_lo <= p_hi");
    const double ratio = params.r / params.x;
    const double offset = params.epsilon / (2.0 * params.x);
    const double lo_q = ratio * p_lo - offset;
    const double hi_q = ratio * p_hi + offset;
    return {(p_lo * p_lo + lo_q * lo_q) / params.v0_sq(), (p_hi * p_hi + hi_q * hi_q) / params.v0_sq()};
}

std::pair<double, double> deterministic_bounds(double p, double l_tilde, const CircuitParams& params) {
    const double slope = params.r / params.x + params.phi;
    const double offset = params.epsilon / (2.0 * params.x);
    const double loss = l_tilde * params.z_sq() / (2.0 * params.x);
    return {slope * p + offset + loss, slope * p - offset + loss};
}

double chance_bound(double h_tilde, double l_plus, int sign, const CircuitParams& params) {
    const double slope = params.r / params.x + params.phi;
    const double offset = params.epsilon / (2.0 * params.x);
    return slope * h_tilde + sign * offset + l_plus * params.z_sq() / (2.0 * params.x);
}

ConstraintBounds constraint_bounds(double p, const TransitionModel& model, double delta, double l_tilde,
                                   const CircuitParams& params) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in [0, 1]");
    const auto lplus = loss_current_bounds(params, model.p_lo(), model.p_hi());
    ConstraintBounds b;
    std::tie(b.g1, b.g2) = deterministic_bounds(p, l_tilde, params);
    b.l_tilde = l_tilde;
    b.l_plus_lo = lplus.lo;
    b.l_plus_hi = lplus.hi;
    b.h_tilde1 = quantile_h1(model, p, delta);
    b.h_tilde2 = quantile_h2(model, p, delta);
    b.h1 = chance_bound(b.h_tilde1, lplus.lo, +1, params);
    b.h2 = chance_bound(b.h_tilde2, lplus.hi, -1, params);
    b.chance_active = delta < 1.0;
    return b;
}

double q_vc1(double c_total, double qf, const CircuitParams& params) {
    return params.f0 * (params.v0_sq() + params.epsilon) * c_total + qf;
}

double q_vc2(double c_total, double qf, const CircuitParams& params) {
    return params.f0 * (params.v0_sq() - params.epsilon) * c_total + qf;
}

SlowControlResult slow_control(double p, const DeviceSizes& sizes, const ConstraintBounds& bounds,
                               const CircuitParams& params) {
    SlowControlResult res;
    res.chance_active = bounds.chance_active;
    const double upper = bounds.upper();
    const double lower = bounds.lower();
    for (int k = 0; k <= sizes.k_levels; ++k) {
        const double cs = sizes.level(k);
        const double c_total = sizes.c0 + cs;
        if (!is_stable(params, c_total)) break;
        if (q_vc1(c_total, -sizes.qf_max, params) <= upper && q_vc2(c_total, sizes.qf_max, params) >= lower) {
            const double qf = std::max(-sizes.qf_max, bounds.g2 - params.f0 * (params.v0_sq() - params.epsilon) * c_total);
            try {
                const auto op = solve_distflow(p, params, c_total, qf);
                res.loss_tilde = op.loss(params);
            } catch (const NoConvergence&) {
                return res;
            }
            res.feasible = true;
            res.level = k;
            res.cs_star = cs;
            res.qf_star = qf;
            return res;
        }
    }
    return res;
}

bool in_voltage_band(double v_sq, const CircuitParams& params) {
    // Compared against the same endpoints fast_control targets so a setting placed
    // exactly on the band edge is not rejected by rounding of the difference.
    return v_sq >= params.v0_sq() - params.epsilon && v_sq <= params.v0_sq() + params.epsilon;
}

FastControlResult fast_control(double p, double c0, double cs, double qf_max, const CircuitParams& params) {
    if (!(qf_max >= 0.0)) throw std::invalid_argument("D-STATCOM range must be nonnegative");
    const double c_total = c0 + cs;
    const double target = params.v0_sq() - params.epsilon;
    auto v_sq_at = [&](double qf) { return solve_distflow(p, params, c_total, qf).v_sq; };

    FastControlResult res;
    auto finish = [&](double qf) {
        res.qf = qf;
        res.op = solve_distflow(p, params, c_total, qf);
        res.feasible = in_voltage_band(res.op.v_sq, params);
        return res;
    };

    if (qf_max == 0.0) return finish(0.0);

    // Expand a bracket [lo, hi] with v^2(lo) < target <= v^2(hi) outward from 0 so the
    // power flow is only evaluated near the answer.
    double lo = 0.0;
    double hi = 0.0;
    if (v_sq_at(0.0) >= target) {
        hi = 0.0;
        double step = 64.0;
        for (;;) {
            const double trial = std::max(-qf_max, hi - step);
            if (v_sq_at(trial) < target) {
                lo = trial;
                break;
            }
            if (trial <= -qf_max) return finish(-qf_max);
            hi = trial;
            step *= 2.0;
        }
    } else {
        lo = 0.0;
        double step = 64.0;
        for (;;) {
            const double trial = std::min(qf_max, lo + step);
            if (v_sq_at(trial) >= target) {
                hi = trial;
                break;
            }
            if (trial >= qf_max) return finish(qf_max);
            lo = trial;
            step *= 2.0;
        }
    }

    while (hi - lo > kQfTolerance) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (v_sq_at(mid) >= target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return finish(hi);
}

}  // namespace voltsize
