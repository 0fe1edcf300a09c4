#pragma once

#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <vector>

#include "mrident/systems.hpp"

namespace mrident {

enum class LiftKind { TimeLifted, FrequencyLifted };

/// Lifted frequency response: (F*ny) x (F*nu) complex matrix per grid point.
/// Time-lifted FRFs live on the low-rate bin grid (L points, spacing
/// 2*pi/(L*F*h)); frequency-lifted FRFs live on the high-rate grid (N = F*L
/// points, spacing 2*pi/(N*h)). base_period is the high-rate sample period h.
class LiftedFrf {
public:
    LiftedFrf(LiftKind kind, Eigen::VectorXd grid, std::vector<Eigen::MatrixXcd> values,
              int lift_factor, Eigen::Index base_outputs, Eigen::Index base_inputs,
              double base_period);

    LiftKind kind() const { return kind_; }
    Eigen::Index size() const { return grid_.size(); }
    const Eigen::VectorXd& grid() const { return grid_; }
    const std::vector<Eigen::MatrixXcd>& values() const { return values_; }
    const Eigen::MatrixXcd& at(Eigen::Index k) const { return values_[size_t(k)]; }
    Eigen::MatrixXcd& at(Eigen::Index k) { return values_[size_t(k)]; }
    int lift_factor() const { return lift_factor_; }
    Eigen::Index base_outputs() const { return base_outputs_; }
    Eigen::Index base_inputs() const { return base_inputs_; }
    double base_period() const { return base_period_; }

    /// Number of high-rate bins represented (N = F*L for time-lifted).
    Eigen::Index highrate_bins() const {
        return kind_ == LiftKind::TimeLifted ? size() * lift_factor_ : size();
    }

private:
    LiftKind kind_;
    Eigen::VectorXd grid_;
    std::vector<Eigen::MatrixXcd> values_;
    int lift_factor_;
    Eigen::Index base_outputs_, base_inputs_;
    double base_period_;
};

/// The lifting operator's matrix M(z): block (i,f) = (z*phi^i)^{-f} * I, with
/// phi = e^{j*2*pi/F}.
class ModulationMatrix {
public:
    ModulationMatrix(int lift_factor, std::complex<double> z, Eigen::Index block_dim = 1);

    const Eigen::MatrixXcd& value() const { return value_; }
    Eigen::MatrixXcd inverse() const;
    int lift_factor() const { return lift_factor_; }
    std::complex<double> point() const { return z_; }

private:
    int lift_factor_;
    std::complex<double> z_;
    Eigen::Index block_dim_;
    Eigen::MatrixXcd value_;
};

/// Exact F-step block lifting of the state recursion: an LTI system at the
/// block period F*h mapping stacked inputs to stacked outputs.
LtiSystem lifted_state_space(const LptvSystem& sys, int lift_factor);
LtiSystem lifted_state_space(const LtiSystem& sys, int lift_factor);

/// Time-lifted FRF on the low-rate bin grid with num_low_bins points.
LiftedFrf time_lift_lti(const LtiSystem& sys, int lift_factor, Eigen::Index num_low_bins);
LiftedFrf time_lift_lptv(const LptvSystem& sys, int lift_factor, Eigen::Index num_low_bins);

/// FRF of an already block-lifted system (F*nu inputs, F*ny outputs at the
/// block period) wrapped as a time-lifted FRF on the low-rate bin grid.
LiftedFrf block_system_frf(const LtiSystem& block_sys, int lift_factor,
                           Eigen::Index num_low_bins, Eigen::Index base_outputs,
                           Eigen::Index base_inputs);

/// Frequency-lifted FRF of an LTI system: diag{G(e^{j w h} phi^p)} on the
/// high-rate bin grid with num_high_bins points (requires F | num_high_bins).
LiftedFrf freq_lift_lti(const LtiSystem& sys, int lift_factor, Eigen::Index num_high_bins);

LiftedFrf convert_time_to_freq(const LiftedFrf& lifted);
LiftedFrf convert_freq_to_time(const LiftedFrf& lifted);

/// Inverse time-lifting for LTI content: P(e^{j w h}) from the first block
/// column, P = sum_sigma P^(sigma) e^{-j sigma w h}. omega must be a high-rate
/// bin of the underlying N = F*L grid.
Eigen::MatrixXcd inverse_time_lift(const LiftedFrf& lifted, double omega);

/// Inverse frequency-lifting: diagonal block (p,p) at the phi^{-p}-shifted bin.
Eigen::MatrixXcd inverse_freq_lift(const LiftedFrf& lifted, double omega, int p);

/// How far a lifted FRF deviates from exact LTI structure (0 for true LTI):
/// relative off-diagonal content for frequency lifts, relative deviation from
/// the delay-Toeplitz pattern for time lifts.
double lti_consistency(const LiftedFrf& lifted);

void write_csv(const LiftedFrf& lifted, const std::filesystem::path& csv_path);
LiftedFrf read_lifted_frf_csv(const std::filesystem::path& csv_path);

}  // namespace mrident
