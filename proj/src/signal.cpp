#include "mrident/signal.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <cstdlib>

#include "mrident/io.hpp"

namespace mrident {

Signal::Signal(Eigen::MatrixXd samples, double sample_period)
    : samples_(std::move(samples)), sample_period_(sample_period) {
    if (samples_.cols() < 1 || samples_.rows() < 1)
        throw DimensionMismatch("signal needs at least one channel and one sample");
    if (!(sample_period_ > 0.0)) throw Error("sample period must be positive");
    if (!samples_.allFinite()) throw Error("signal samples must be finite");
}

Signal Signal::from_vector(const std::vector<double>& samples, double sample_period) {
    Eigen::MatrixXd m(1, Eigen::Index(samples.size()));
    for (Eigen::Index t = 0; t < m.cols(); ++t) m(0, t) = samples[size_t(t)];
    return Signal(std::move(m), sample_period);
}

Spectrum::Spectrum(Eigen::MatrixXcd bins, double sample_period)
    : bins_(std::move(bins)), sample_period_(sample_period) {
    if (bins_.cols() < 1 || bins_.rows() < 1)
        throw DimensionMismatch("spectrum needs at least one channel and one bin");
    if (!(sample_period_ > 0.0)) throw Error("sample period must be positive");
}

LiftedSignal::LiftedSignal(Signal blocks, int lift_factor, Eigen::Index base_channels)
    : blocks_(std::move(blocks)), lift_factor_(lift_factor), base_channels_(base_channels) {
    if (lift_factor_ < 1) throw Error("lift factor must be >= 1");
    if (blocks_.channels() != Eigen::Index(lift_factor_) * base_channels_)
        throw DimensionMismatch("lifted block dimension must be F * base channels");
}

LiftedSpectrum::LiftedSpectrum(Eigen::MatrixXcd components, int lift_factor,
                               Eigen::Index base_channels, double sample_period)
    : components_(std::move(components)),
      lift_factor_(lift_factor),
      base_channels_(base_channels),
      sample_period_(sample_period) {
    if (lift_factor_ < 1) throw Error("lift factor must be >= 1");
    if (components_.rows() != Eigen::Index(lift_factor_) * base_channels_)
        throw DimensionMismatch("lifted spectrum row count must be F * base channels");
}

Eigen::MatrixXcd LiftedSpectrum::component(int i) const {
    if (i < 0 || i >= lift_factor_) throw BadIndex("lifted spectrum component out of range");
    return components_.middleRows(Eigen::Index(i) * base_channels_, base_channels_);
}

namespace {

Eigen::MatrixXcd dft_complex_rows(const Eigen::MatrixXcd& rows) {
    const Eigen::Index n = rows.cols();
    const double scale = 1.0 / std::sqrt(double(n));
    Eigen::MatrixXcd out(rows.rows(), n);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> in(static_cast<size_t>(n)), res(static_cast<size_t>(n));
    for (Eigen::Index ch = 0; ch < rows.rows(); ++ch) {
        for (Eigen::Index t = 0; t < n; ++t) in[size_t(t)] = rows(ch, t);
        fft.fwd(res, in);
        for (Eigen::Index k = 0; k < n; ++k) out(ch, k) = res[size_t(k)] * scale;
    }
    return out;
}

}  // namespace

Eigen::MatrixXcd dft_rows(const Eigen::MatrixXd& samples) {
    return dft_complex_rows(samples.cast<std::complex<double>>());
}

Spectrum dft(const Signal& signal) {
    return Spectrum(dft_rows(signal.samples()), signal.sample_period());
}

Signal idft(const Spectrum& spectrum) {
    const Eigen::Index n = spectrum.length();
    const double scale = std::sqrt(double(n));  // undo fft.inv's 1/N, keep 1/sqrt(N)
    Eigen::MatrixXd out(spectrum.channels(), n);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> in(static_cast<size_t>(n)), res(static_cast<size_t>(n));
    for (Eigen::Index ch = 0; ch < spectrum.channels(); ++ch) {
        for (Eigen::Index k = 0; k < n; ++k) in[size_t(k)] = spectrum(ch, k);
        fft.inv(res, in);
        for (Eigen::Index t = 0; t < n; ++t) out(ch, t) = res[size_t(t)].real() * scale;
    }
    return Signal(std::move(out), spectrum.sample_period());
}

LiftedSignal lift_time(const Signal& signal, int lift_factor) {
    if (lift_factor < 1) throw Error("lift factor must be >= 1");
    const Eigen::Index n = signal.length();
    if (n % lift_factor != 0) throw NotDivisible(n, lift_factor);
    const Eigen::Index blocks = n / lift_factor;
    const Eigen::Index nch = signal.channels();
    Eigen::MatrixXd stacked(Eigen::Index(lift_factor) * nch, blocks);
    for (Eigen::Index l = 0; l < blocks; ++l)
        for (int f = 0; f < lift_factor; ++f)
            stacked.block(Eigen::Index(f) * nch, l, nch, 1) =
                signal.samples().col(l * lift_factor + f);
    return LiftedSignal(Signal(std::move(stacked), signal.sample_period() * lift_factor),
                        lift_factor, nch);
}

Signal unlift_time(const LiftedSignal& lifted) {
    const int factor = lifted.lift_factor();
    const Eigen::Index nch = lifted.base_channels();
    const Eigen::Index blocks = lifted.block_count();
    Eigen::MatrixXd samples(nch, blocks * factor);
    for (Eigen::Index l = 0; l < blocks; ++l)
        for (int f = 0; f < factor; ++f)
            samples.col(l * factor + f) =
                lifted.blocks().samples().block(Eigen::Index(f) * nch, l, nch, 1);
    return Signal(std::move(samples), lifted.block_period() / factor);
}

LiftedSpectrum lift_frequency(const Spectrum& spectrum, int lift_factor) {
    if (lift_factor < 1) throw Error("lift factor must be >= 1");
    const Eigen::Index n = spectrum.length();
    if (n % lift_factor != 0) throw NotDivisible(n, lift_factor);
    const Eigen::Index shift = n / lift_factor;
    const Eigen::Index nch = spectrum.channels();
    Eigen::MatrixXcd components(Eigen::Index(lift_factor) * nch, n);
    for (int i = 0; i < lift_factor; ++i)
        for (Eigen::Index k = 0; k < n; ++k)
            components.block(Eigen::Index(i) * nch, k, nch, 1) =
                spectrum.bins().col((k + Eigen::Index(i) * shift) % n);
    return LiftedSpectrum(std::move(components), lift_factor, nch, spectrum.sample_period());
}

void write_csv(const Signal& signal, const std::filesystem::path& path) {
    auto out = open_output(path);
    if (signal.channels() == 1) {
        out << "t,value\n";
    } else {
        out << "t";
        for (Eigen::Index ch = 0; ch < signal.channels(); ++ch) out << ",ch" << ch;
        out << "\n";
    }
    for (Eigen::Index t = 0; t < signal.length(); ++t) {
        out << format_double(double(t) * signal.sample_period());
        for (Eigen::Index ch = 0; ch < signal.channels(); ++ch)
            out << "," << format_double(signal(ch, t));
        out << "\n";
    }
}

Signal read_signal_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw IngestError("empty signal CSV: " + path.string());
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "t")
        throw IngestError("signal CSV must start with a 't' column: " + path.string());
    const Eigen::Index nch = Eigen::Index(header.size()) - 1;
    std::vector<double> times;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (Eigen::Index(fields.size()) != nch + 1)
            throw IngestError("signal CSV row width mismatch: " + path.string());
        times.push_back(std::strtod(fields[0].c_str(), nullptr));
        for (Eigen::Index ch = 0; ch < nch; ++ch)
            values.push_back(std::strtod(fields[size_t(ch) + 1].c_str(), nullptr));
    }
    if (times.size() < 2) throw IngestError("signal CSV needs at least two samples");
    const double h = times[1] - times[0];
    Eigen::MatrixXd samples(nch, Eigen::Index(times.size()));
    for (Eigen::Index t = 0; t < samples.cols(); ++t)
        for (Eigen::Index ch = 0; ch < nch; ++ch)
            samples(ch, t) = values[size_t(t) * size_t(nch) + size_t(ch)];
    return Signal(std::move(samples), h);
}

void write_csv(const Spectrum& spectrum, const std::filesystem::path& path) {
    auto out = open_output(path);
    if (spectrum.channels() == 1) {
        out << "freq_hz,re,im\n";
    } else {
        out << "freq_hz";
        for (Eigen::Index ch = 0; ch < spectrum.channels(); ++ch)
            out << ",re" << ch << ",im" << ch;
        out << "\n";
    }
    for (Eigen::Index k = 0; k < spectrum.length(); ++k) {
        out << format_double(spectrum.bin_hz(k));
        for (Eigen::Index ch = 0; ch < spectrum.channels(); ++ch)
            out << "," << format_double(spectrum(ch, k).real()) << ","
                << format_double(spectrum(ch, k).imag());
        out << "\n";
    }
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw IngestError("empty spectrum CSV: " + path.string());
    const auto header = split_csv_line(line);
    if (header.size() < 3 || (header.size() - 1) % 2 != 0)
        throw IngestError("spectrum CSV header must be freq_hz followed by re/im pairs");
    const Eigen::Index nch = Eigen::Index((header.size() - 1) / 2);
    std::vector<double> freqs;
    std::vector<std::complex<double>> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (Eigen::Index(fields.size()) != 2 * nch + 1)
            throw IngestError("spectrum CSV row width mismatch");
        freqs.push_back(std::strtod(fields[0].c_str(), nullptr));
        for (Eigen::Index ch = 0; ch < nch; ++ch)
            values.emplace_back(std::strtod(fields[size_t(2 * ch + 1)].c_str(), nullptr),
                                std::strtod(fields[size_t(2 * ch + 2)].c_str(), nullptr));
    }
    const Eigen::Index n = Eigen::Index(freqs.size());
    if (n < 2) throw IngestError("spectrum CSV needs at least two bins");
    const double df = freqs[1] - freqs[0];
    const double h = 1.0 / (df * double(n));
    Eigen::MatrixXcd bins(nch, n);
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index ch = 0; ch < nch; ++ch)
            bins(ch, k) = values[size_t(k) * size_t(nch) + size_t(ch)];
    return Spectrum(std::move(bins), h);
}

}  // namespace mrident
