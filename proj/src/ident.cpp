#include "mrident/ident.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mrident/parallel.hpp"

namespace mrident {

namespace {

constexpr double kPi = std::numbers::pi;

/// Deterministic standard normals: explicit Box-Muller over mt19937_64 so the
/// stream is pinned independent of standard-library distribution internals.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        spare_ = radius * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return radius * std::cos(2.0 * kPi * u2);
    }

    double uniform() {
        return double(engine_() >> 11) * 0x1.0p-53;  // [0,1) with 53 bits
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace

ExcitationSpec::Type ExcitationSpec::type_from_name(const std::string& name) {
    if (name == "multisine") return Type::Multisine;
    if (name == "white" || name == "white_noise") return Type::WhiteNoise;
    throw ConfigError("unknown excitation type: " + name);
}

std::string ExcitationSpec::type_name() const {
    return type == Type::Multisine ? "multisine" : "white";
}

Signal generate_excitation(const ExcitationSpec& spec, Eigen::Index num_samples,
                           double sample_period) {
    if (num_samples < 2) throw Error("excitation needs at least two samples");
    NormalStream stream(spec.seed);
    Eigen::MatrixXd samples(1, num_samples);
    if (spec.type == ExcitationSpec::Type::WhiteNoise) {
        for (Eigen::Index t = 0; t < num_samples; ++t)
            samples(0, t) = spec.amplitude * stream.next();
        return Signal(std::move(samples), sample_period);
    }
    // Random-phase multisine exciting every bin with equal magnitude: draw
    // phases for bins 1..N/2, enforce conjugate symmetry, real DC/Nyquist.
    const Eigen::Index n = num_samples;
    Eigen::MatrixXcd bins(1, n);
    bins(0, 0) = 1.0;
    for (Eigen::Index k = 1; k <= n / 2; ++k) {
        if (2 * k == n) {
            bins(0, k) = (stream.uniform() < 0.5) ? -1.0 : 1.0;
        } else {
            bins(0, k) = std::polar(1.0, 2.0 * kPi * stream.uniform());
            bins(0, n - k) = std::conj(bins(0, k));
        }
    }
    Signal raw = idft(Spectrum(std::move(bins), sample_period));
    const double rms = std::sqrt(raw.samples().row(0).squaredNorm() / double(n));
    Eigen::MatrixXd scaled = raw.samples() * (spec.amplitude / rms);
    return Signal(std::move(scaled), sample_period);
}

ExperimentRecord run_experiment(const MultirateLoop& loop, const ExcitationSpec& excitation,
                                double duration_seconds, const std::optional<Signal>& noise) {
    const double h = loop.high_rate_period();
    const Eigen::Index n = Eigen::Index(std::llround(duration_seconds / h));
    if (n % loop.factor() != 0) throw NotDivisible(n, loop.factor());
    Signal r = generate_excitation(excitation, n, h);
    LoopSignals sig = simulate_loop(loop, r, noise);
    return ExperimentRecord{std::move(r), std::move(sig.u), std::move(sig.y), loop.factor(),
                            excitation};
}

std::string method_name(Method method) {
    switch (method) {
        case Method::Etfe: return "etfe";
        case Method::NaiveLpm: return "naive_lpm";
        case Method::TimeLifted: return "time_lifted";
        case Method::FrequencyLifted: return "frequency_lifted";
    }
    throw BadIndex("unknown method");
}

Method method_from_name(const std::string& name) {
    if (name == "etfe") return Method::Etfe;
    if (name == "naive_lpm" || name == "lpm") return Method::NaiveLpm;
    if (name == "time_lifted") return Method::TimeLifted;
    if (name == "frequency_lifted") return Method::FrequencyLifted;
    throw ConfigError("unknown method: " + name);
}

namespace {

Eigen::VectorXd highrate_grid(Eigen::Index n, double h) {
    Eigen::VectorXd grid(n);
    for (Eigen::Index k = 0; k < n; ++k) grid[k] = 2.0 * kPi * double(k) / (double(n) * h);
    return grid;
}

std::pair<LiftedFrf, LiftedFrf> lpm_on_lifted(const Eigen::MatrixXcd& R,
                                              const Eigen::MatrixXcd& U,
                                              const Eigen::MatrixXcd& Y, LiftKind kind,
                                              const LpmConfig& config, int F, double h,
                                              Eigen::Index ny, Eigen::Index nu) {
    const Eigen::Index bins = R.cols();
    const LpmFit fitJ = lpm_estimate(R, Y, config);
    const LpmFit fitS = lpm_estimate(R, U, config);
    Eigen::VectorXd grid =
        kind == LiftKind::TimeLifted
            ? highrate_grid(bins, h * F)  // low-rate grid: spacing 2*pi/(L*h_l)
            : highrate_grid(bins, h);
    std::vector<Eigen::MatrixXcd> jv(static_cast<size_t>(bins)), sv(static_cast<size_t>(bins));
    for (Eigen::Index k = 0; k < bins; ++k) {
        jv[size_t(k)] = fitJ.bin(k).plant;
        sv[size_t(k)] = fitS.bin(k).plant;
    }
    LiftedFrf J(kind, grid, std::move(jv), F, ny, nu, h);
    LiftedFrf S(kind, std::move(grid), std::move(sv), F, nu, nu, h);
    return {std::move(J), std::move(S)};
}

}  // namespace

std::pair<LiftedFrf, LiftedFrf> estimate_lifted_JS(const ExperimentRecord& record,
                                                   LiftKind kind, const LpmConfig& config) {
    const int F = record.factor;
    const Eigen::Index n = record.length();
    if (n % F != 0) throw NotDivisible(n, F);
    const Eigen::Index nu = record.input.channels();
    const Eigen::Index ny = record.output.channels();
    if (config.effective_inputs() != F * nu || config.effective_outputs() != F * ny)
        throw DimensionMismatch("LPM configuration does not match the lifted dimensions");

    if (kind == LiftKind::TimeLifted) {
        const Eigen::MatrixXcd R = dft_rows(lift_time(record.reference, F).blocks().samples());
        const Eigen::MatrixXcd U = dft_rows(lift_time(record.input, F).blocks().samples());
        const Eigen::MatrixXcd Y = dft_rows(lift_time(record.output, F).blocks().samples());
        return lpm_on_lifted(R, U, Y, kind, config, F, record.sample_period(), ny, nu);
    }
    const Eigen::MatrixXcd R = lift_frequency(dft(record.reference), F).components();
    const Eigen::MatrixXcd U = lift_frequency(dft(record.input), F).components();
    const Eigen::MatrixXcd Y = lift_frequency(dft(record.output), F).components();
    return lpm_on_lifted(R, U, Y, kind, config, F, record.sample_period(), ny, nu);
}

LiftedFrf recover_plant(const LiftedFrf& J, const LiftedFrf& S,
                        Eigen::VectorXd* condition_out) {
    if (J.kind() != S.kind() || J.size() != S.size() || J.lift_factor() != S.lift_factor())
        throw DimensionMismatch("J and S must share kind, grid, and factor");
    const Eigen::Index bins = J.size();
    std::vector<Eigen::MatrixXcd> values(static_cast<size_t>(bins));
    Eigen::VectorXd cond(bins);
    parallel_for(static_cast<size_t>(bins), [&](size_t k) {
        const Eigen::MatrixXcd& s = S.at(Eigen::Index(k));
        // P = J S^{-1} through the adjoint system S^H P^H = J^H.
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s.adjoint(),
                                               Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double smin = svd.singularValues().minCoeff();
        cond[Eigen::Index(k)] = smin > 0.0
                                    ? svd.singularValues().maxCoeff() / smin
                                    : std::numeric_limits<double>::infinity();
        if (cond[Eigen::Index(k)] > 1e12) {
            values[k] = Eigen::MatrixXcd::Constant(J.at(Eigen::Index(k)).rows(), s.rows(),
                                                   std::numeric_limits<double>::quiet_NaN());
        } else {
            values[k] = svd.solve(J.at(Eigen::Index(k)).adjoint()).adjoint();
        }
    });
    if (condition_out) *condition_out = std::move(cond);
    return LiftedFrf(J.kind(), J.grid(), std::move(values), J.lift_factor(), J.base_outputs(),
                     S.base_outputs(), J.base_period());
}

PlantEstimate recover_highrate_frf(const LiftedFrf& plant, int p_choice,
                                   const Eigen::VectorXd* lifted_condition) {
    const int F = plant.lift_factor();
    const Eigen::Index n = plant.highrate_bins();
    const Eigen::Index L = n / F;
    const double h = plant.base_period();
    Eigen::VectorXd grid = highrate_grid(n, h);
    std::vector<Eigen::MatrixXcd> values(static_cast<size_t>(n));
    Eigen::VectorXd cond = Eigen::VectorXd::Zero(n);
    Eigen::Index nan_bins = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index source = k;
        if (plant.kind() == LiftKind::TimeLifted) {
            values[size_t(k)] = inverse_time_lift(plant, grid[k]);
            source = k % L;
        } else if (p_choice >= 0) {
            values[size_t(k)] = inverse_freq_lift(plant, grid[k], p_choice);
            source = (k + n - Eigen::Index(p_choice) * L) % n;
        } else {
            Eigen::MatrixXcd sum = inverse_freq_lift(plant, grid[k], 0);
            for (int p = 1; p < F; ++p) sum += inverse_freq_lift(plant, grid[k], p);
            values[size_t(k)] = sum / double(F);
        }
        if (lifted_condition && source < lifted_condition->size())
            cond[k] = (*lifted_condition)[source];
        if (!values[size_t(k)].allFinite()) ++nan_bins;
    }
    const Method method =
        plant.kind() == LiftKind::TimeLifted ? Method::TimeLifted : Method::FrequencyLifted;
    return PlantEstimate{method, Frf(std::move(grid), std::move(values)), std::move(cond),
                         nan_bins};
}

PlantEstimate etfe(const ExperimentRecord& record) {
    if (record.reference.channels() != 1 || record.input.channels() != 1 ||
        record.output.channels() != 1)
        throw DimensionMismatch("the ETFE baseline handles single-channel records");
    const Spectrum R = dft(record.reference);
    const Spectrum U = dft(record.input);
    const Spectrum Y = dft(record.output);
    const Eigen::Index n = R.length();
    const double peak = R.bins().cwiseAbs().maxCoeff();
    Eigen::VectorXd grid = highrate_grid(n, record.sample_period());
    std::vector<Eigen::MatrixXcd> values(static_cast<size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(R(0, k)) < 1e-14 * peak)
            throw ZeroInput("reference unexcited at bin " + std::to_string(k));
        values[size_t(k)] = Eigen::MatrixXcd::Constant(1, 1, Y(0, k) / U(0, k));
    }
    return PlantEstimate{Method::Etfe, Frf(std::move(grid), std::move(values)),
                         Eigen::VectorXd::Zero(n), 0};
}

PlantEstimate naive_lpm(const ExperimentRecord& record, const LpmConfig& config) {
    const Eigen::Index nu = record.input.channels();
    const Eigen::Index ny = record.output.channels();
    if (config.effective_inputs() != nu || config.effective_outputs() != ny)
        throw DimensionMismatch("LPM configuration does not match the record dimensions");
    const Spectrum R = dft(record.reference);
    const Spectrum U = dft(record.input);
    const Spectrum Y = dft(record.output);
    const LpmFit fitJ = lpm_estimate(R.bins(), Y.bins(), config);
    const LpmConfig config_s(config.order(), config.half_width(), nu, nu);
    const LpmFit fitS = lpm_estimate(R.bins(), U.bins(), config_s);
    const Eigen::Index n = R.length();
    Eigen::VectorXd grid = highrate_grid(n, record.sample_period());
    std::vector<Eigen::MatrixXcd> values(static_cast<size_t>(n));
    Eigen::VectorXd cond(n);
    Eigen::Index nan_bins = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::MatrixXcd& s = fitS.bin(k).plant;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s.adjoint(),
                                               Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double smin = svd.singularValues().minCoeff();
        cond[k] = smin > 0.0 ? svd.singularValues().maxCoeff() / smin
                             : std::numeric_limits<double>::infinity();
        if (cond[k] > 1e12) {
            values[size_t(k)] = Eigen::MatrixXcd::Constant(
                ny, nu, std::numeric_limits<double>::quiet_NaN());
            ++nan_bins;
        } else {
            values[size_t(k)] = svd.solve(fitJ.bin(k).plant.adjoint()).adjoint();
        }
    }
    return PlantEstimate{Method::NaiveLpm, Frf(std::move(grid), std::move(values)),
                         std::move(cond), nan_bins};
}

std::pair<LiftedFrf, LiftedFrf> analytic_lifted_JS(const MultirateLoop& loop, LiftKind kind,
                                                   Eigen::Index num_high_bins) {
    const int F = loop.factor();
    if (num_high_bins % F != 0) throw NotDivisible(num_high_bins, F);
    const Eigen::Index L = num_high_bins / F;
    const Eigen::Index ny = loop.plant().outputs(), nu = loop.plant().inputs();
    LiftedFrf J = block_system_frf(loop.lifted_closed_loop_J(), F, L, ny, nu);
    LiftedFrf S = block_system_frf(loop.lifted_closed_loop_S(), F, L, nu, nu);
    if (kind == LiftKind::TimeLifted) return {std::move(J), std::move(S)};
    return {convert_time_to_freq(J), convert_time_to_freq(S)};
}

void write_csv(const PlantEstimate& estimate, const std::filesystem::path& path) {
    write_csv(estimate.frf, path);
}

}  // namespace mrident
