#pragma once

#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <vector>

#include "mrident/errors.hpp"
#include "mrident/signal.hpp"

#include <nlohmann/json_fwd.hpp>

namespace mrident {

/// Discrete-time state-space system x+ = Ax + Bu, y = Cx + Du at a fixed rate.
/// A may be 0x0 for a static gain. Unstable A is allowed at construction (a
/// warning is printed); FRF-based oracles refuse it.
class LtiSystem {
public:
    LtiSystem(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C, Eigen::MatrixXd D,
              double sample_period);

    static LtiSystem static_gain(const Eigen::MatrixXd& gain, double sample_period);

    Eigen::Index order() const { return A_.rows(); }
    Eigen::Index inputs() const { return B_.cols(); }
    Eigen::Index outputs() const { return C_.rows(); }
    double sample_period() const { return sample_period_; }
    double spectral_radius() const { return spectral_radius_; }
    bool stable() const { return order() == 0 || spectral_radius_ < 1.0; }

    /// Number of samples after which the free response has decayed enough for
    /// steady-state frequency-domain comparisons: ceil(10 / (1 - rho(A))).
    Eigen::Index settle_samples() const;

    const Eigen::MatrixXd& A() const { return A_; }
    const Eigen::MatrixXd& B() const { return B_; }
    const Eigen::MatrixXd& C() const { return C_; }
    const Eigen::MatrixXd& D() const { return D_; }

    nlohmann::json to_json() const;
    static LtiSystem from_json(const nlohmann::json& j);

private:
    Eigen::MatrixXd A_, B_, C_, D_;
    double sample_period_;
    double spectral_radius_;
};

/// Periodic state-space system: matrices cycle with period F, phase = t mod F.
class LptvSystem {
public:
    struct Phase {
        Eigen::MatrixXd A, B, C, D;
    };

    LptvSystem(std::vector<Phase> phases, double sample_period);

    /// Embeds an LTI system as the F-periodic system with identical phases.
    static LptvSystem from_lti(const LtiSystem& sys, int period);

    int period() const { return int(phases_.size()); }
    const Phase& phase(int tau) const { return phases_[size_t(tau % period())]; }
    double sample_period() const { return sample_period_; }
    Eigen::Index order() const { return phases_[0].A.rows(); }
    Eigen::Index inputs() const { return phases_[0].B.cols(); }
    Eigen::Index outputs() const { return phases_[0].C.rows(); }

    nlohmann::json to_json() const;
    static LptvSystem from_json(const nlohmann::json& j);

private:
    std::vector<Phase> phases_;
    double sample_period_;
};

/// Frequency response samples on a strictly increasing grid (rad/s).
class Frf {
public:
    Frf(Eigen::VectorXd grid, std::vector<Eigen::MatrixXcd> values);

    Eigen::Index size() const { return grid_.size(); }
    const Eigen::VectorXd& grid() const { return grid_; }
    const std::vector<Eigen::MatrixXcd>& values() const { return values_; }
    const Eigen::MatrixXcd& at(Eigen::Index k) const { return values_[size_t(k)]; }
    Eigen::Index outputs() const { return values_[0].rows(); }
    Eigen::Index inputs() const { return values_[0].cols(); }

private:
    Eigen::VectorXd grid_;
    std::vector<Eigen::MatrixXcd> values_;
};

/// G(e^{j omega h}) = D + C (zI - A)^{-1} B.
Eigen::MatrixXcd frf_eval(const LtiSystem& sys, double omega);

/// frf_eval on the N-point DFT bin grid omega_k = 2 pi k / (N h).
Frf frf_bin_grid(const LtiSystem& sys, Eigen::Index num_bins);

Signal simulate(const LtiSystem& sys, const Signal& input,
                const Eigen::VectorXd& x0 = Eigen::VectorXd());
Signal simulate(const LptvSystem& sys, const Signal& input,
                const Eigen::VectorXd& x0 = Eigen::VectorXd());

/// Impulse-response coefficients M_0[phase], ..., M_{count-1}[phase] of Eq-style
/// periodic convolution y[t] = sum_i M_i[t mod F] u[t-i].
std::vector<Eigen::MatrixXd> lptv_impulse_coefficients(const LptvSystem& sys, int phase,
                                                       int count);

void write_csv(const Frf& frf, const std::filesystem::path& path);
Frf read_frf_csv(const std::filesystem::path& path);

}  // namespace mrident
