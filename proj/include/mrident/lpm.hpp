#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "mrident/errors.hpp"

namespace mrident {

/// Window and order configuration for the local polynomial estimator.
/// Identifiability requires 2n+1 - (R+1)(nu_eff+1) > ny_eff.
class LpmConfig {
public:
    LpmConfig(int order, int half_width, Eigen::Index effective_inputs,
              Eigen::Index effective_outputs);

    /// Smallest n >= requested half_width satisfying the identifiability
    /// inequality; escalated is set when the request had to grow.
    static LpmConfig escalated(int order, int half_width, Eigen::Index effective_inputs,
                               Eigen::Index effective_outputs, bool* escalated = nullptr);

    int order() const { return order_; }
    int half_width() const { return half_width_; }
    int window_size() const { return 2 * half_width_ + 1; }
    Eigen::Index effective_inputs() const { return nu_eff_; }
    Eigen::Index effective_outputs() const { return ny_eff_; }
    Eigen::Index regressor_rows() const { return (order_ + 1) * (nu_eff_ + 1); }
    Eigen::Index degrees_of_freedom() const { return window_size() - regressor_rows(); }

private:
    int order_;
    int half_width_;
    Eigen::Index nu_eff_, ny_eff_;
};

/// Per-bin least-squares result. Parameter layout along theta's columns:
/// [G, g_1..g_R, T, t_1..t_R].
struct LpmBin {
    Eigen::MatrixXcd plant;                  ///< G-hat, ny_eff x nu_eff
    Eigen::VectorXcd transient;              ///< T-hat, ny_eff
    std::vector<Eigen::MatrixXcd> plant_poly;      ///< g_s, s = 1..R
    std::vector<Eigen::VectorXcd> transient_poly;  ///< t_s, s = 1..R
    Eigen::MatrixXcd residual;               ///< Y_n - theta K_n, ny_eff x (2n+1)
    Eigen::MatrixXd plant_variance;          ///< var of each G-hat entry from the proxy
    double condition;                        ///< cond(K_n K_n^H)
    bool ill_conditioned;
};

class LpmFit {
public:
    LpmFit(std::vector<LpmBin> bins, LpmConfig config);

    Eigen::Index size() const { return Eigen::Index(bins_.size()); }
    const LpmBin& bin(Eigen::Index k) const { return bins_[size_t(k)]; }
    const LpmConfig& config() const { return config_; }

private:
    std::vector<LpmBin> bins_;
    LpmConfig config_;
};

/// Per-bin complex least squares with polynomial plant and transient models.
/// U is nu_eff x N, Y is ny_eff x N on a common bin grid; windows near the
/// edges are shifted inward so every fit uses exactly 2n+1 bins.
LpmFit lpm_estimate(const Eigen::MatrixXcd& input, const Eigen::MatrixXcd& output,
                    const LpmConfig& config);

/// T-hat block of theta at a bin.
Eigen::VectorXcd lpm_transient(const LpmFit& fit, Eigen::Index bin);

/// Sample noise covariance proxy: residual outer products averaged over the
/// window and scaled by 1/dof.
Eigen::MatrixXcd lpm_covariance_proxy(const LpmFit& fit, Eigen::Index bin);

/// CSV export: bin,freq_hz,row,col,re,im,cond,residual_norm.
void write_csv(const LpmFit& fit, const Eigen::VectorXd& grid_rad,
               const std::filesystem::path& path);

}  // namespace mrident
