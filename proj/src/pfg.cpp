#include "mrident/pfg.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numbers>

#include "mrident/io.hpp"

namespace mrident {

namespace {

constexpr double kPi = std::numbers::pi;

std::string hash_controller(const LtiSystem& controller, int factor) {
    // FNV-1a over the controller realization and the rate factor.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    for (const auto* m : {&controller.A(), &controller.B(), &controller.C(), &controller.D()})
        for (Eigen::Index r = 0; r < m->rows(); ++r)
            for (Eigen::Index c = 0; c < m->cols(); ++c) mix((*m)(r, c));
    mix(controller.sample_period());
    mix(double(factor));
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

PfgCurve pfg_closed_form(const Frf& plant, const LtiSystem& controller, int factor) {
    const Eigen::Index n = plant.size();
    if (n < 2) throw InsufficientData("PFG needs the full bin grid");
    if (n % factor != 0) throw NotDivisible(n, factor);
    const Eigen::Index L = n / factor;
    const Eigen::Index ny = plant.outputs(), nu = plant.inputs();
    if (controller.inputs() != ny || controller.outputs() != nu)
        throw DimensionMismatch("controller dimensions must close the loop");
    const double h = 2.0 * kPi / (plant.grid()[1] * double(n));  // grid spacing 2*pi/(N*h)

    Eigen::VectorXcd izoh(n);
    for (Eigen::Index k = 0; k < n; ++k)
        izoh[k] = zoh_frequency_gain(factor, plant.grid()[k], h);

    // Fold the low-rate plant from the same samples: P_l(m) = (1/F) sum over
    // the alias set of P I_ZOH, then Q_d = (I + K P_l)^{-1} K.
    std::vector<Eigen::MatrixXcd> q(static_cast<size_t>(L));
    std::vector<bool> q_ok(static_cast<size_t>(L), true);
    for (Eigen::Index m = 0; m < L; ++m) {
        Eigen::MatrixXcd pl = Eigen::MatrixXcd::Zero(ny, nu);
        for (int f = 0; f < factor; ++f) {
            const Eigen::Index kk = (m + Eigen::Index(f) * L) % n;
            pl += plant.at(kk) * izoh[kk];
        }
        pl /= double(factor);
        if (!pl.allFinite()) {
            q_ok[size_t(m)] = false;
            continue;
        }
        const double omega_low = 2.0 * kPi * double(m) / (double(L) * h * factor);
        const Eigen::MatrixXcd kl = frf_eval(controller, omega_low);
        Eigen::MatrixXcd sens = Eigen::MatrixXcd::Identity(nu, nu) + kl * pl;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sens, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double smin = svd.singularValues().minCoeff();
        if (!(smin > 0.0) || svd.singularValues().maxCoeff() / smin > 1e14)
            throw SingularSensitivity("I + K_l P_l singular at low-rate bin " +
                                      std::to_string(m));
        q[size_t(m)] = svd.solve(kl);
    }

    Eigen::VectorXd values(n);
    Eigen::Index nan_bins = 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index m = k % L;
        if (!q_ok[size_t(m)] || !plant.at(k).allFinite()) {
            values[k] = nan;
            ++nan_bins;
            continue;
        }
        Eigen::MatrixXcd accum = Eigen::MatrixXcd::Zero(nu, nu);
        bool finite = true;
        for (int f = 0; f < factor; ++f) {
            const Eigen::Index kk = (k + Eigen::Index(f) * L) % n;
            if (!plant.at(kk).allFinite()) {
                finite = false;
                break;
            }
            Eigen::MatrixXcd cf;
            if (f == 0) {
                cf = plant.at(k) -
                     plant.at(k) * izoh[k] * q[size_t(m)] * plant.at(k) / double(factor);
            } else {
                cf = -plant.at(kk) * izoh[kk] * q[size_t(m)] * plant.at(k) / double(factor);
            }
            accum += cf.adjoint() * cf;
        }
        if (!finite) {
            values[k] = nan;
            ++nan_bins;
            continue;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(accum);
        values[k] = std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
    }
    return PfgCurve{plant.grid(), std::move(values), PfgProvenance::ClosedForm,
                    hash_controller(controller, factor), nan_bins};
}

double pfg_brute_force(const MultirateLoop& loop, double omega, Eigen::Index grid_bins,
                       double duration_seconds) {
    if (!loop.stable()) throw UnstableLoop("PFG undefined for an unstable loop");
    const double h = loop.high_rate_period();
    const double exact = omega * h * double(grid_bins) / (2.0 * kPi);
    if (std::abs(exact - std::round(exact)) > 1e-9 * std::max(1.0, std::abs(exact)) + 1e-9)
        throw OffGrid("probe frequency must lie on the bin grid");
    const Eigen::Index total = Eigen::Index(std::llround(duration_seconds / h));
    const Eigen::Index settle = loop.settle_samples();
    // Integer number of periods of every tone in the response: the aliased
    // tones all repeat over grid_bins samples.
    const Eigen::Index periods = (total - settle) / grid_bins;
    if (periods < 1)
        throw InsufficientData("duration leaves no full steady-state period after settling");
    const Eigen::Index window = periods * grid_bins;
    const Eigen::Index n = settle + window;
    const Eigen::Index n_padded = (n % loop.factor() == 0)
                                      ? n
                                      : n + loop.factor() - (n % loop.factor());

    Eigen::MatrixXd rc(1, n_padded), rs(1, n_padded);
    for (Eigen::Index t = 0; t < n_padded; ++t) {
        rc(0, t) = std::cos(omega * h * double(t));
        rs(0, t) = std::sin(omega * h * double(t));
    }
    const LoopSignals cos_run = simulate_loop(loop, Signal(std::move(rc), h));
    const LoopSignals sin_run = simulate_loop(loop, Signal(std::move(rs), h));

    // Complex-exponential response by linearity; power norms over the window.
    double power_y = 0.0;
    for (Eigen::Index t = settle; t < settle + window; ++t) {
        for (Eigen::Index chan = 0; chan < cos_run.y.channels(); ++chan) {
            const std::complex<double> yc(cos_run.y(chan, t), sin_run.y(chan, t));
            power_y += std::norm(yc);
        }
    }
    power_y /= double(window);
    const double power_r = 1.0;  // |e^{j w t}|^2
    return std::sqrt(power_y / power_r);
}

PfgCurve pfg_from_estimate(const PlantEstimate& estimate, const LtiSystem& controller,
                           int factor) {
    return pfg_closed_form(estimate.frf, controller, factor);
}

void write_csv(const PfgCurve& curve, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "freq_hz,pfg,provenance\n";
    const char* tag = curve.provenance == PfgProvenance::ClosedForm ? "closed_form" : "brute_force";
    for (Eigen::Index k = 0; k < curve.grid.size(); ++k)
        out << format_double(curve.grid[k] / (2.0 * kPi)) << "," << format_double(curve.values[k])
            << "," << tag << "\n";
}

}  // namespace mrident
