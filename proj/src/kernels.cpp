#include "voltsize/kernels.hpp"

#include <omp.h>

#include <exception>
#include <limits>
#include <stdexcept>

namespace voltsize {

namespace {

void check_sizes(std::size_t in, std::size_t out) {
    if (in != out) throw std::invalid_argument("kernel input and output lengths differ");
}

// Runs body(k) for k in [0, n) across threads, then rethrows the exception raised
// at the smallest index so failures are reported as the serial loop would.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
    const auto count = static_cast<std::ptrdiff_t>(n);
    std::ptrdiff_t first_fail = std::numeric_limits<std::ptrdiff_t>::max();
    std::exception_ptr error;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        try {
            body(static_cast<std::size_t>(k));
        } catch (...) {
#pragma omp critical(voltsize_kernel_error)
            if (k < first_fail) {
                first_fail = k;
                error = std::current_exception();
            }
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace

void solve_distflow_batch_serial(std::span<const PowerFlowCase> cases, const CircuitParams& params,
                                 std::span<OperatingPoint> out) {
    check_sizes(cases.size(), out.size());
    for (std::size_t k = 0; k < cases.size(); ++k) {
        out[k] = solve_distflow(cases[k].p, params, cases[k].c_total, cases[k].qf);
    }
}

void solve_distflow_batch(std::span<const PowerFlowCase> cases, const CircuitParams& params,
                          std::span<OperatingPoint> out, Execution exec) {
    if (exec == Execution::Serial) return solve_distflow_batch_serial(cases, params, out);
    check_sizes(cases.size(), out.size());
    parallel_for(cases.size(), [&](std::size_t k) {
        out[k] = solve_distflow(cases[k].p, params, cases[k].c_total, cases[k].qf);
    });
}

void slow_control_batch_serial(std::span<const double> powers, const DeviceSizes& sizes,
                               std::span<const ConstraintBounds> bounds, const CircuitParams& params,
                               std::span<SlowControlResult> out) {
    check_sizes(powers.size(), out.size());
    check_sizes(powers.size(), bounds.size());
    for (std::size_t k = 0; k < powers.size(); ++k) out[k] = slow_control(powers[k], sizes, bounds[k], params);
}

void slow_control_batch(std::span<const double> powers, const DeviceSizes& sizes,
                        std::span<const ConstraintBounds> bounds, const CircuitParams& params,
                        std::span<SlowControlResult> out, Execution exec) {
    if (exec == Execution::Serial) return slow_control_batch_serial(powers, sizes, bounds, params, out);
    check_sizes(powers.size(), out.size());
    check_sizes(powers.size(), bounds.size());
    parallel_for(powers.size(), [&](std::size_t k) { out[k] = slow_control(powers[k], sizes, bounds[k], params); });
}

void fast_control_batch_serial(std::span<const double> powers, std::span<const double> c_total, double qf_max,
                               const CircuitParams& params, std::span<FastControlResult> out) {
    check_sizes(powers.size(), out.size());
    check_sizes(powers.size(), c_total.size());
    for (std::size_t k = 0; k < powers.size(); ++k) {
        out[k] = fast_control(powers[k], c_total[k], 0.0, qf_max, params);
    }
}

void fast_control_batch(std::span<const double> powers, std::span<const double> c_total, double qf_max,
                        const CircuitParams& params, std::span<FastControlResult> out, Execution exec) {
    if (exec == Execution::Serial) return fast_control_batch_serial(powers, c_total, qf_max, params, out);
    check_sizes(powers.size(), out.size());
    check_sizes(powers.size(), c_total.size());
    parallel_for(powers.size(),
                 [&](std::size_t k) { out[k] = fast_control(powers[k], c_total[k], 0.0, qf_max, params); });
}

int kernel_threads() { return omp_get_max_threads(); }

}  // namespace voltsize
