#pragma once

#include "mrident/multirate.hpp"

namespace mrident {

/// Benchmark scenario: a lightly damped mass-spring-damper sampled at 240 Hz
/// (resonance at 60 Hz, above the 40 Hz low-rate Nyquist) under a strictly
/// proper first-order low-pass controller at 80 Hz, F = 3. The plant matrices
/// are a frozen zero-order-hold discretization.
LtiSystem benchmark_plant();
LtiSystem benchmark_controller();
MultirateLoop benchmark_loop();

}  // namespace mrident
