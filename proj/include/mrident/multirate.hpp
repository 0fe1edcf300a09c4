#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <utility>

#include "mrident/lifting.hpp"
#include "mrident/signal.hpp"
#include "mrident/systems.hpp"

namespace mrident {

/// Closed multirate loop: high-rate plant, low-rate controller behind a
/// downsampler and a zero-order-hold reconstructor, reference entering at the
/// plant input: u_h = r_h - H_u K_l S_d y_h, y_h = P_h u_h (+ output noise).
class MultirateLoop {
public:
    MultirateLoop(LtiSystem plant, LtiSystem controller, int factor);

    const LtiSystem& plant() const { return plant_; }
    const LtiSystem& controller() const { return controller_; }
    int factor() const { return factor_; }
    double high_rate_period() const { return plant_.sample_period(); }
    double low_rate_period() const { return controller_.sample_period(); }

    /// Spectral radius of the lifted closed-loop state matrix.
    double closed_loop_spectral_radius() const { return rho_closed_; }
    bool stable() const { return rho_closed_ < 1.0; }

    /// Settling horizon in high-rate samples for steady-state extraction,
    /// ceil(10/(1-rho)) low-rate blocks expressed at the high rate.
    Eigen::Index settle_samples() const;

    /// Analytic lifted closed-loop maps at the block rate: r block -> y block
    /// and r block -> u block. These realize the loop exactly.
    const LtiSystem& lifted_closed_loop_J() const { return lifted_J_; }
    const LtiSystem& lifted_closed_loop_S() const { return lifted_S_; }

private:
    MultirateLoop(LtiSystem plant, LtiSystem controller, int factor,
                  std::pair<LtiSystem, LtiSystem> lifted_maps);

    LtiSystem plant_;
    LtiSystem controller_;
    int factor_;
    LtiSystem lifted_J_;
    LtiSystem lifted_S_;
    double rho_closed_;
};

Signal downsample(const Signal& signal, int factor);
Signal zoh_upsample(const Signal& signal, int factor);

/// I_ZOH(e^{j w h}) = sum_f e^{-j w h f}: frequency response of holding one
/// low-rate sample over F high-rate samples.
std::complex<double> zoh_frequency_gain(int factor, double omega, double high_rate_period);

struct LoopSignals {
    Signal u;
    Signal y;
};

/// Sample-by-sample simulation of the interconnection. Optional noise is added
/// to the plant output before feedback sampling and appears in y.
LoopSignals simulate_loop(const MultirateLoop& loop, const Signal& reference,
                          const std::optional<Signal>& noise = std::nullopt);

/// Low-rate plant FRF P_l = S_d P_h H_u: first block row of the time-lifted
/// plant times the stacked hold identity.
Eigen::MatrixXcd low_rate_plant_frf(const MultirateLoop& loop, double omega_low);

/// Q_d = (I + K_l P_l)^{-1} K_l on the low-rate bin grid.
std::vector<Eigen::MatrixXcd> low_rate_q_grid(const MultirateLoop& loop,
                                              Eigen::Index num_low_bins);

/// Analytic closed-loop output spectrum: Y = P R - P I_ZOH Q_d (1/F) sum of
/// shifted P R products over the alias set.
Spectrum closed_loop_output_spectrum(const MultirateLoop& loop, const Spectrum& reference);

}  // namespace mrident
