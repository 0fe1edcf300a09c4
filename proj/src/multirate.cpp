#include "mrident/multirate.hpp"

#include <cmath>
#include <iostream>
#include <numbers>

namespace mrident {

namespace {

constexpr double kPi = std::numbers::pi;

/// Assemble the lifted closed-loop state-space from the block-lifted plant and
/// the low-rate controller. States are [x_plant; x_controller]. Also validates
/// the interconnection dimensions.
std::pair<LtiSystem, LtiSystem> build_lifted_loop(const LtiSystem& plant,
                                                  const LtiSystem& controller, int F) {
    if (F < 1) throw Error("rate factor must be >= 1");
    if (plant.outputs() != controller.inputs() || controller.outputs() != plant.inputs())
        throw DimensionMismatch("controller dimensions must close the loop");
    const double expected_low = plant.sample_period() * F;
    if (std::abs(controller.sample_period() - expected_low) > 1e-12 * expected_low)
        throw DimensionMismatch("controller period must be F times the plant period");

    const LtiSystem lp = lifted_state_space(plant, F);
    const Eigen::Index np = lp.order(), nc = controller.order();
    const Eigen::Index nu = plant.inputs(), ny = plant.outputs();

    // Sampler picks the first output of each block; hold repeats the low-rate
    // input over the block.
    Eigen::MatrixXd E0 = Eigen::MatrixXd::Zero(ny, F * ny);
    E0.leftCols(ny) = Eigen::MatrixXd::Identity(ny, ny);
    Eigen::MatrixXd H(F * nu, nu);
    for (int f = 0; f < F; ++f) H.middleRows(f * nu, nu) = Eigen::MatrixXd::Identity(nu, nu);

    const Eigen::MatrixXd& Ak = controller.A();
    const Eigen::MatrixXd& Bk = controller.B();
    const Eigen::MatrixXd& Ck = controller.C();
    const Eigen::MatrixXd& Dk = controller.D();

    const Eigen::MatrixXd lam =
        (Eigen::MatrixXd::Identity(nu, nu) + Dk * E0 * lp.D() * H).inverse();

    Eigen::MatrixXd Cs(F * nu, np + nc);
    Cs.leftCols(np) = -H * lam * Dk * E0 * lp.C();
    Cs.rightCols(nc) = -H * lam * Ck;
    Eigen::MatrixXd Ds = Eigen::MatrixXd::Identity(F * nu, F * nu) - H * lam * Dk * E0 * lp.D();

    Eigen::MatrixXd Cj = Eigen::MatrixXd::Zero(F * ny, np + nc);
    Cj.leftCols(np) = lp.C();
    Cj += lp.D() * Cs;
    Eigen::MatrixXd Dj = lp.D() * Ds;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(np + nc, np + nc);
    A.topLeftCorner(np, np) = lp.A();
    A.bottomRightCorner(nc, nc) = Ak;
    Eigen::MatrixXd Bp_pad = Eigen::MatrixXd::Zero(np + nc, F * nu);
    Bp_pad.topRows(np) = lp.B();
    Eigen::MatrixXd Bc_pad = Eigen::MatrixXd::Zero(np + nc, F * ny);
    Bc_pad.bottomRows(nc) = Bk * E0;
    A += Bp_pad * Cs + Bc_pad * Cj;
    Eigen::MatrixXd B = Bp_pad * Ds + Bc_pad * Dj;

    const double hl = plant.sample_period() * F;
    return {LtiSystem(A, B, Cj, Dj, hl),
            LtiSystem(A, std::move(B), std::move(Cs), std::move(Ds), hl)};
}

}  // namespace

MultirateLoop::MultirateLoop(LtiSystem plant, LtiSystem controller, int factor)
    : MultirateLoop(plant, controller, factor, build_lifted_loop(plant, controller, factor)) {}

MultirateLoop::MultirateLoop(LtiSystem plant, LtiSystem controller, int factor,
                             std::pair<LtiSystem, LtiSystem> lifted_maps)
    : plant_(std::move(plant)),
      controller_(std::move(controller)),
      factor_(factor),
      lifted_J_(std::move(lifted_maps.first)),
      lifted_S_(std::move(lifted_maps.second)),
      rho_closed_(lifted_J_.spectral_radius()) {
    if (rho_closed_ >= 1.0)
        std::cerr << "warning: multirate loop unstable (lifted spectral radius " << rho_closed_
                  << ")\n";
}

Eigen::Index MultirateLoop::settle_samples() const {
    if (!stable()) throw UnstableLoop("loop has no settling horizon");
    if (lifted_J_.order() == 0) return 0;
    return Eigen::Index(std::ceil(10.0 / (1.0 - rho_closed_))) * factor_;
}

Signal downsample(const Signal& signal, int factor) {
    if (factor < 1) throw Error("rate factor must be >= 1");
    if (signal.length() % factor != 0) throw NotDivisible(signal.length(), factor);
    const Eigen::Index blocks = signal.length() / factor;
    Eigen::MatrixXd samples(signal.channels(), blocks);
    for (Eigen::Index l = 0; l < blocks; ++l) samples.col(l) = signal.samples().col(l * factor);
    return Signal(std::move(samples), signal.sample_period() * factor);
}

Signal zoh_upsample(const Signal& signal, int factor) {
    if (factor < 1) throw Error("rate factor must be >= 1");
    Eigen::MatrixXd samples(signal.channels(), signal.length() * factor);
    for (Eigen::Index l = 0; l < signal.length(); ++l)
        for (int f = 0; f < factor; ++f)
            samples.col(l * factor + f) = signal.samples().col(l);
    return Signal(std::move(samples), signal.sample_period() / factor);
}

std::complex<double> zoh_frequency_gain(int factor, double omega, double high_rate_period) {
    std::complex<double> sum = 0.0;
    for (int f = 0; f < factor; ++f) sum += std::polar(1.0, -omega * high_rate_period * f);
    return sum;
}

LoopSignals simulate_loop(const MultirateLoop& loop, const Signal& reference,
                          const std::optional<Signal>& noise) {
    const int F = loop.factor();
    const Eigen::Index n = reference.length();
    if (n % F != 0) throw NotDivisible(n, F);
    if (!loop.stable()) throw UnstableLoop("refusing to simulate an unstable loop");
    if (std::abs(reference.sample_period() - loop.high_rate_period()) >
        1e-12 * loop.high_rate_period())
        throw DimensionMismatch("reference must be sampled at the plant rate");
    if (noise && (noise->length() != n || noise->channels() != loop.plant().outputs()))
        throw DimensionMismatch("noise must match the output signal dimensions");

    const auto& P = loop.plant();
    const auto& K = loop.controller();
    const Eigen::Index nu = P.inputs(), ny = P.outputs();
    // Algebraic loop at sampling instants when both D's are nonzero.
    const Eigen::MatrixXd gain =
        (Eigen::MatrixXd::Identity(nu, nu) + K.D() * P.D()).inverse();

    Eigen::VectorXd xp = Eigen::VectorXd::Zero(P.order());
    Eigen::VectorXd xc = Eigen::VectorXd::Zero(K.order());
    Eigen::VectorXd held = Eigen::VectorXd::Zero(nu);
    Eigen::MatrixXd u(nu, n), y(ny, n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const Eigen::VectorXd r = reference.samples().col(t);
        const Eigen::VectorXd v =
            noise ? Eigen::VectorXd(noise->samples().col(t)) : Eigen::VectorXd::Zero(ny);
        if (t % F == 0) {
            held = gain * (K.C() * xc + K.D() * (P.C() * xp + P.D() * r + v));
        }
        u.col(t) = r - held;
        y.col(t) = P.C() * xp + P.D() * u.col(t) + v;
        if (t % F == 0) xc = K.A() * xc + K.B() * y.col(t);
        xp = P.A() * xp + P.B() * u.col(t);
    }
    return LoopSignals{Signal(std::move(u), reference.sample_period()),
                       Signal(std::move(y), reference.sample_period())};
}

Eigen::MatrixXcd low_rate_plant_frf(const MultirateLoop& loop, double omega_low) {
    const int F = loop.factor();
    const Eigen::Index nu = loop.plant().inputs(), ny = loop.plant().outputs();
    const LtiSystem lifted = lifted_state_space(loop.plant(), F);
    const Eigen::MatrixXcd block = frf_eval(lifted, omega_low);
    Eigen::MatrixXcd result = Eigen::MatrixXcd::Zero(ny, nu);
    for (int f = 0; f < F; ++f) result += block.block(0, f * nu, ny, nu);
    return result;
}

std::vector<Eigen::MatrixXcd> low_rate_q_grid(const MultirateLoop& loop,
                                              Eigen::Index num_low_bins) {
    const Eigen::Index nu = loop.plant().inputs(), ny = loop.plant().outputs();
    const LtiSystem lifted = lifted_state_space(loop.plant(), loop.factor());
    std::vector<Eigen::MatrixXcd> q(static_cast<size_t>(num_low_bins));
    for (Eigen::Index m = 0; m < num_low_bins; ++m) {
        const double omega =
            2.0 * kPi * double(m) / (double(num_low_bins) * loop.low_rate_period());
        const Eigen::MatrixXcd block = frf_eval(lifted, omega);
        Eigen::MatrixXcd pl = Eigen::MatrixXcd::Zero(ny, nu);
        for (int f = 0; f < loop.factor(); ++f) pl += block.block(0, f * nu, ny, nu);
        const Eigen::MatrixXcd kl = frf_eval(loop.controller(), omega);
        Eigen::MatrixXcd sens = Eigen::MatrixXcd::Identity(nu, nu) + kl * pl;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sens, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double smin = svd.singularValues().minCoeff();
        if (!(smin > 0.0) ||
            svd.singularValues().maxCoeff() / smin > 1e14)
            throw SingularSensitivity("I + K_l P_l singular at low-rate bin " +
                                      std::to_string(m));
        q[size_t(m)] = svd.solve(kl);
    }
    return q;
}

Spectrum closed_loop_output_spectrum(const MultirateLoop& loop, const Spectrum& reference) {
    const int F = loop.factor();
    const Eigen::Index n = reference.length();
    if (n % F != 0) throw NotDivisible(n, F);
    if (!loop.stable()) throw UnstableLoop("closed-loop spectrum undefined for unstable loop");
    if (reference.channels() != loop.plant().inputs())
        throw DimensionMismatch("reference channel count must match plant inputs");
    const Eigen::Index L = n / F;
    const Eigen::Index nu = loop.plant().inputs(), ny = loop.plant().outputs();

    const Frf plant_grid = frf_bin_grid(loop.plant(), n);
    const auto q_grid = low_rate_q_grid(loop, L);

    Eigen::MatrixXcd out(ny, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double omega = reference.bin_frequency(k);
        const Eigen::MatrixXcd& pk = plant_grid.at(k);
        Eigen::MatrixXcd aliased = Eigen::MatrixXcd::Zero(ny, 1);
        for (int f = 0; f < F; ++f) {
            const Eigen::Index kk = (k + Eigen::Index(f) * L) % n;
            aliased += plant_grid.at(kk) * reference.bins().col(kk);
        }
        const std::complex<double> izoh =
            zoh_frequency_gain(F, omega, loop.high_rate_period());
        out.col(k) = pk * reference.bins().col(k) -
                     pk * izoh * q_grid[size_t(k % L)] * aliased / double(F);
    }
    return Spectrum(std::move(out), reference.sample_period());
}

}  // namespace mrident
