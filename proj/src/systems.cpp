#include "mrident/systems.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "mrident/io.hpp"

namespace mrident {

namespace {

double spectral_radius_of(const Eigen::MatrixXd& A) {
    if (A.rows() == 0) return 0.0;
    return A.eigenvalues().cwiseAbs().maxCoeff();
}

void check_dims(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C,
                const Eigen::MatrixXd& D) {
    if (A.rows() != A.cols()) throw DimensionMismatch("A must be square");
    if (B.rows() != A.rows()) throw DimensionMismatch("B row count must match state order");
    if (C.cols() != A.rows()) throw DimensionMismatch("C column count must match state order");
    if (D.rows() != C.rows() || D.cols() != B.cols())
        throw DimensionMismatch("D must be outputs x inputs");
}

Eigen::MatrixXd json_matrix(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw IngestError(std::string("state-space JSON missing \"") + key + "\"");
    const auto& rows = j.at(key);
    if (!rows.is_array()) throw IngestError(std::string("\"") + key + "\" must be an array of rows");
    const Eigen::Index nr = Eigen::Index(rows.size());
    Eigen::Index nc = 0;
    if (nr > 0) nc = Eigen::Index(rows[0].size());
    Eigen::MatrixXd m(nr, nc);
    for (Eigen::Index r = 0; r < nr; ++r) {
        if (Eigen::Index(rows[size_t(r)].size()) != nc)
            throw IngestError(std::string("ragged rows in \"") + key + "\"");
        for (Eigen::Index c = 0; c < nc; ++c) m(r, c) = rows[size_t(r)][size_t(c)].get<double>();
    }
    return m;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

LtiSystem::LtiSystem(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C, Eigen::MatrixXd D,
                     double sample_period)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(std::move(D)),
      sample_period_(sample_period) {
    check_dims(A_, B_, C_, D_);
    if (!(sample_period_ > 0.0)) throw Error("sample period must be positive");
    spectral_radius_ = spectral_radius_of(A_);
    if (order() > 0 && spectral_radius_ >= 1.0)
        std::cerr << "warning: state matrix spectral radius " << spectral_radius_
                  << " >= 1; steady-state FRF not defined\n";
}

LtiSystem LtiSystem::static_gain(const Eigen::MatrixXd& gain, double sample_period) {
    return LtiSystem(Eigen::MatrixXd(0, 0), Eigen::MatrixXd(0, gain.cols()),
                     Eigen::MatrixXd(gain.rows(), 0), gain, sample_period);
}

Eigen::Index LtiSystem::settle_samples() const {
    if (order() == 0) return 0;
    if (spectral_radius_ >= 1.0) throw UnstableLoop("system has no settling horizon");
    return Eigen::Index(std::ceil(10.0 / (1.0 - spectral_radius_)));
}

nlohmann::json LtiSystem::to_json() const {
    return nlohmann::json{{"A", matrix_json(A_)}, {"B", matrix_json(B_)}, {"C", matrix_json(C_)},
                          {"D", matrix_json(D_)}, {"h", sample_period_}};
}

LtiSystem LtiSystem::from_json(const nlohmann::json& j) {
    if (!j.contains("h")) throw IngestError("state-space JSON missing \"h\"");
    return LtiSystem(json_matrix(j, "A"), json_matrix(j, "B"), json_matrix(j, "C"),
                     json_matrix(j, "D"), j.at("h").get<double>());
}

LptvSystem::LptvSystem(std::vector<Phase> phases, double sample_period)
    : phases_(std::move(phases)), sample_period_(sample_period) {
    if (phases_.empty()) throw Error("periodic system needs at least one phase");
    if (!(sample_period_ > 0.0)) throw Error("sample period must be positive");
    for (const auto& ph : phases_) {
        check_dims(ph.A, ph.B, ph.C, ph.D);
        if (ph.A.rows() != phases_[0].A.rows() || ph.B.cols() != phases_[0].B.cols() ||
            ph.C.rows() != phases_[0].C.rows())
            throw DimensionMismatch("all phases must share state/input/output dimensions");
    }
}

LptvSystem LptvSystem::from_lti(const LtiSystem& sys, int period) {
    std::vector<Phase> phases(static_cast<size_t>(period), Phase{sys.A(), sys.B(), sys.C(), sys.D()});
    return LptvSystem(std::move(phases), sys.sample_period());
}

nlohmann::json LptvSystem::to_json() const {
    nlohmann::json phases = nlohmann::json::array();
    for (const auto& ph : phases_)
        phases.push_back(nlohmann::json{{"A", matrix_json(ph.A)}, {"B", matrix_json(ph.B)},
                                        {"C", matrix_json(ph.C)}, {"D", matrix_json(ph.D)}});
    return nlohmann::json{{"phases", std::move(phases)}, {"h", sample_period_}};
}

LptvSystem LptvSystem::from_json(const nlohmann::json& j) {
    if (!j.contains("phases")) throw IngestError("periodic state-space JSON missing \"phases\"");
    std::vector<Phase> phases;
    for (const auto& pj : j.at("phases"))
        phases.push_back(Phase{json_matrix(pj, "A"), json_matrix(pj, "B"), json_matrix(pj, "C"),
                               json_matrix(pj, "D")});
    return LptvSystem(std::move(phases), j.at("h").get<double>());
}

Frf::Frf(Eigen::VectorXd grid, std::vector<Eigen::MatrixXcd> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (grid_.size() != Eigen::Index(values_.size()))
        throw DimensionMismatch("FRF grid and value counts differ");
    if (values_.empty()) throw DimensionMismatch("FRF needs at least one point");
    for (Eigen::Index k = 1; k < grid_.size(); ++k)
        if (!(grid_[k] > grid_[k - 1])) throw Error("FRF grid must be strictly increasing");
}

Eigen::MatrixXcd frf_eval(const LtiSystem& sys, double omega) {
    if (sys.order() == 0) return sys.D().cast<std::complex<double>>();
    const std::complex<double> z = std::polar(1.0, omega * sys.sample_period());
    Eigen::MatrixXcd resolvent =
        z * Eigen::MatrixXcd::Identity(sys.order(), sys.order()) - sys.A().cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(resolvent, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (!(smin > 0.0) || smax / smin > 1e14)
        throw SingularResolvent("zI - A numerically singular at omega = " + std::to_string(omega));
    return sys.D().cast<std::complex<double>>() +
           sys.C().cast<std::complex<double>>() *
               svd.solve(sys.B().cast<std::complex<double>>());
}

Frf frf_bin_grid(const LtiSystem& sys, Eigen::Index num_bins) {
    Eigen::VectorXd grid(num_bins);
    std::vector<Eigen::MatrixXcd> values(static_cast<size_t>(num_bins));
    for (Eigen::Index k = 0; k < num_bins; ++k) {
        grid[k] = 2.0 * std::numbers::pi * double(k) / (double(num_bins) * sys.sample_period());
        values[size_t(k)] = frf_eval(sys, grid[k]);
    }
    return Frf(std::move(grid), std::move(values));
}

namespace {

Signal simulate_phased(const LptvSystem& sys, const Signal& input, const Eigen::VectorXd& x0) {
    if (std::abs(input.sample_period() - sys.sample_period()) >
        1e-12 * sys.sample_period())
        throw DimensionMismatch("input sample period must match system sample period");
    if (input.channels() != sys.inputs())
        throw DimensionMismatch("input channel count must match system inputs");
    Eigen::VectorXd x = x0.size() ? x0 : Eigen::VectorXd::Zero(sys.order());
    if (x.size() != sys.order()) throw DimensionMismatch("initial state dimension mismatch");
    const Eigen::Index n = input.length();
    Eigen::MatrixXd y(sys.outputs(), n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto& ph = sys.phase(int(t % sys.period()));
        const auto u = input.samples().col(t);
        y.col(t) = ph.C * x + ph.D * u;
        x = ph.A * x + ph.B * u;
    }
    return Signal(std::move(y), input.sample_period());
}

}  // namespace

Signal simulate(const LtiSystem& sys, const Signal& input, const Eigen::VectorXd& x0) {
    return simulate_phased(LptvSystem::from_lti(sys, 1), input, x0);
}

Signal simulate(const LptvSystem& sys, const Signal& input, const Eigen::VectorXd& x0) {
    return simulate_phased(sys, input, x0);
}

std::vector<Eigen::MatrixXd> lptv_impulse_coefficients(const LptvSystem& sys, int phase,
                                                       int count) {
    if (phase < 0 || phase >= sys.period()) throw BadIndex("phase out of range");
    const int F = sys.period();
    auto at = [&](int tau) -> const LptvSystem::Phase& {
        return sys.phase(((tau % F) + F) % F);
    };
    std::vector<Eigen::MatrixXd> coeffs;
    coeffs.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        if (i == 0) {
            coeffs.push_back(at(phase).D);
            continue;
        }
        // M_i[tau] = C_tau A_{tau-1} ... A_{tau-i+1} B_{tau-i}
        Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(sys.order(), sys.order());
        for (int j = 1; j < i; ++j) prod = prod * at(phase - j).A;
        coeffs.push_back(at(phase).C * prod * at(phase - i).B);
    }
    return coeffs;
}

void write_csv(const Frf& frf, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "freq_hz,row,col,re,im\n";
    for (Eigen::Index k = 0; k < frf.size(); ++k) {
        const double hz = frf.grid()[k] / (2.0 * std::numbers::pi);
        for (Eigen::Index r = 0; r < frf.outputs(); ++r)
            for (Eigen::Index c = 0; c < frf.inputs(); ++c)
                out << format_double(hz) << "," << r << "," << c << ","
                    << format_double(frf.at(k)(r, c).real()) << ","
                    << format_double(frf.at(k)(r, c).imag()) << "\n";
    }
}

Frf read_frf_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw IngestError("empty FRF CSV: " + path.string());
    std::vector<double> freqs;
    std::vector<std::tuple<Eigen::Index, Eigen::Index, std::complex<double>>> entries;
    std::vector<Eigen::Index> point_of;
    Eigen::Index rows = 0, cols = 0;
    double last_freq = -1.0;
    Eigen::Index npoints = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5) throw IngestError("FRF CSV row width mismatch");
        const double hz = std::strtod(f[0].c_str(), nullptr);
        const Eigen::Index r = std::strtol(f[1].c_str(), nullptr, 10);
        const Eigen::Index c = std::strtol(f[2].c_str(), nullptr, 10);
        if (freqs.empty() || hz != last_freq) {
            freqs.push_back(hz);
            last_freq = hz;
            ++npoints;
        }
        rows = std::max(rows, r + 1);
        cols = std::max(cols, c + 1);
        entries.emplace_back(r, c, std::complex<double>(std::strtod(f[3].c_str(), nullptr),
                                                        std::strtod(f[4].c_str(), nullptr)));
        point_of.push_back(npoints - 1);
    }
    Eigen::VectorXd grid(npoints);
    for (Eigen::Index k = 0; k < npoints; ++k)
        grid[k] = 2.0 * std::numbers::pi * freqs[size_t(k)];
    std::vector<Eigen::MatrixXcd> values(static_cast<size_t>(npoints), Eigen::MatrixXcd::Zero(rows, cols));
    for (size_t i = 0; i < entries.size(); ++i) {
        auto [r, c, v] = entries[i];
        values[size_t(point_of[i])](r, c) = v;
    }
    return Frf(std::move(grid), std::move(values));
}

}  // namespace mrident
