#pragma once

// Data-parallel kernels. Every kernel has a plain serial reference
// (`*_serial`) and an OpenMP version selected through Execution; both produce
// identical results element by element. When elements fail, the error of the
// lowest failing index is rethrown after the loop.

#include <cstddef>
#include <span>

#include "voltsize/circuit.hpp"
#include "voltsize/control.hpp"

namespace voltsize {

enum class Execution { Serial, Parallel };

struct PowerFlowCase {
    double p = 0.0;
    double c_total = 0.0;
    double qf = 0.0;
};

void solve_distflow_batch_serial(std::span<const PowerFlowCase> cases, const CircuitParams& params,
                                 std::span<OperatingPoint> out);
void solve_distflow_batch(std::span<const PowerFlowCase> cases, const CircuitParams& params,
                          std::span<OperatingPoint> out, Execution exec = Execution::Parallel);

/// One slow-control evaluation per stage power, each with its own bounds.
void slow_control_batch_serial(std::span<const double> powers, const DeviceSizes& sizes,
                               std::span<const ConstraintBounds> bounds, const CircuitParams& params,
                               std::span<SlowControlResult> out);
void slow_control_batch(std::span<const double> powers, const DeviceSizes& sizes,
                        std::span<const ConstraintBounds> bounds, const CircuitParams& params,
                        std::span<SlowControlResult> out, Execution exec = Execution::Parallel);

/// Fast control for every sample given the capacitance applied at that sample.
void fast_control_batch_serial(std::span<const double> powers, std::span<const double> c_total, double qf_max,
                               const CircuitParams& params, std::span<FastControlResult> out);
void fast_control_batch(std::span<const double> powers, std::span<const double> c_total, double qf_max,
                        const CircuitParams& params, std::span<FastControlResult> out,
                        Execution exec = Execution::Parallel);

/// Number of OpenMP threads a parallel kernel would use.
int kernel_threads();

}  // namespace voltsize
