#include "mrident/benchmark.hpp"

namespace mrident {

LtiSystem benchmark_plant() {
    // Two lightly damped modes at 60 and 140 Hz, frozen zero-order-hold
    // discretization at 240 Hz. Both resonances sit above the 40 Hz low-rate
    // Nyquist, and the second lands on an alias image of the first.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
    Eigen::MatrixXd B(4, 1), C(1, 4), D(1, 1);
    A.block<2, 2>(0, 0) << 0.048097378848838357, 0.0024552865343735581,
        -348.95097771247737, -0.044464742817312608;
    A.block<2, 2>(2, 2) << -0.74358614715231219, -0.00047005668197043921,
        363.71904217553322, -0.70223780182453666;
    B << 0.95190262115116164, 348.95097771247737, 0.8717930735761561, -181.85952108776664;
    C << 1.0, 0.0, 1.0, 0.0;
    D << 0.0;
    return LtiSystem(std::move(A), std::move(B), std::move(C), std::move(D), 1.0 / 240.0);
}

LtiSystem benchmark_controller() {
    Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
    // K(z) = 0.21/(z - 0.3): first-order low-pass, DC gain 0.3.
    A << 0.3;
    B << 1.0;
    C << 0.21;
    D << 0.0;
    return LtiSystem(std::move(A), std::move(B), std::move(C), std::move(D), 3.0 / 240.0);
}

MultirateLoop benchmark_loop() {
    return MultirateLoop(benchmark_plant(), benchmark_controller(), 3);
}

}  // namespace mrident
