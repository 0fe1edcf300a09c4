#pragma once

#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <vector>

#include "mrident/errors.hpp"

namespace mrident {

/// Uniformly sampled real signal, possibly multichannel.
/// Samples are stored channel-major: column t is the sample vector at time t.
class Signal {
public:
    Signal(Eigen::MatrixXd samples, double sample_period);

    /// Single-channel convenience constructor.
    static Signal from_vector(const std::vector<double>& samples, double sample_period);

    Eigen::Index length() const { return samples_.cols(); }
    Eigen::Index channels() const { return samples_.rows(); }
    double sample_period() const { return sample_period_; }
    double duration() const { return double(length()) * sample_period_; }

    const Eigen::MatrixXd& samples() const { return samples_; }
    double operator()(Eigen::Index channel, Eigen::Index t) const { return samples_(channel, t); }

private:
    Eigen::MatrixXd samples_;
    double sample_period_;
};

/// DFT of a Signal on the bin grid omega_k = 2*pi*k/(N*h), symmetric 1/sqrt(N)
/// normalization both ways.
class Spectrum {
public:
    Spectrum(Eigen::MatrixXcd bins, double sample_period);

    Eigen::Index length() const { return bins_.cols(); }
    Eigen::Index channels() const { return bins_.rows(); }
    double sample_period() const { return sample_period_; }

    /// Bin frequency in rad/s.
    double bin_frequency(Eigen::Index k) const {
        return 2.0 * 3.14159265358979323846 * double(k) / (double(length()) * sample_period_);
    }
    double bin_hz(Eigen::Index k) const { return double(k) / (double(length()) * sample_period_); }

    const Eigen::MatrixXcd& bins() const { return bins_; }
    std::complex<double> operator()(Eigen::Index channel, Eigen::Index k) const {
        return bins_(channel, k);
    }

private:
    Eigen::MatrixXcd bins_;
    double sample_period_;
};

/// Time-lifted signal: block l stacks samples lF..lF+F-1 (channel-major within
/// each sample). The blocks form a multichannel signal at the block period F*h.
class LiftedSignal {
public:
    LiftedSignal(Signal blocks, int lift_factor, Eigen::Index base_channels);

    const Signal& blocks() const { return blocks_; }
    int lift_factor() const { return lift_factor_; }
    Eigen::Index base_channels() const { return base_channels_; }
    Eigen::Index block_count() const { return blocks_.length(); }
    double block_period() const { return blocks_.sample_period(); }

private:
    Signal blocks_;
    int lift_factor_;
    Eigen::Index base_channels_;
};

/// Frequency-lifted spectrum: component i holds the base spectrum evaluated at
/// the phi^i-shifted argument, i.e. a circular shift by i*N/F bins.
class LiftedSpectrum {
public:
    LiftedSpectrum(Eigen::MatrixXcd components, int lift_factor, Eigen::Index base_channels,
                   double sample_period);

    /// Stacked components, (F * base_channels) x N.
    const Eigen::MatrixXcd& components() const { return components_; }
    Eigen::MatrixXcd component(int i) const;
    int lift_factor() const { return lift_factor_; }
    Eigen::Index base_channels() const { return base_channels_; }
    Eigen::Index length() const { return components_.cols(); }
    double sample_period() const { return sample_period_; }

private:
    Eigen::MatrixXcd components_;
    int lift_factor_;
    Eigen::Index base_channels_;
    double sample_period_;
};

Spectrum dft(const Signal& signal);
Signal idft(const Spectrum& spectrum);

/// Forward/inverse DFT of complex multichannel data with the same 1/sqrt(N)
/// convention; used for lifted channels.
Eigen::MatrixXcd dft_rows(const Eigen::MatrixXd& samples);

LiftedSignal lift_time(const Signal& signal, int lift_factor);
Signal unlift_time(const LiftedSignal& lifted);
LiftedSpectrum lift_frequency(const Spectrum& spectrum, int lift_factor);

void write_csv(const Signal& signal, const std::filesystem::path& path);
Signal read_signal_csv(const std::filesystem::path& path);
void write_csv(const Spectrum& spectrum, const std::filesystem::path& path);
Spectrum read_spectrum_csv(const std::filesystem::path& path);

}  // namespace mrident
