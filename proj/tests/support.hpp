#pragma once

// Shared fixtures and independent oracles for the test suites. Everything here
// must stay independent of the library code paths it is used to check: DFTs by
// direct summation, FRFs from long impulse responses, lifted FRFs from either
// the frequency-sum formula or steady-state simulation fits.

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "mrident/benchmark.hpp"
#include "mrident/signal.hpp"
#include "mrident/systems.hpp"

namespace testsup {

constexpr double kPi = std::numbers::pi;
using Complex = std::complex<double>;

inline double urand(std::mt19937_64& eng) { return double(eng() >> 11) * 0x1.0p-53; }
inline double srand1(std::mt19937_64& eng) { return 2.0 * urand(eng) - 1.0; }

inline Eigen::MatrixXd random_matrix(std::mt19937_64& eng, Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = srand1(eng);
    return m;
}

/// Random stable state-space system with spectral radius scaled to rho.
inline mrident::LtiSystem random_stable_system(std::uint64_t seed, Eigen::Index states,
                                               Eigen::Index outputs, Eigen::Index inputs,
                                               double h, double rho = 0.8) {
    std::mt19937_64 eng(seed);
    Eigen::MatrixXd A = random_matrix(eng, states, states);
    const double radius = A.eigenvalues().cwiseAbs().maxCoeff();
    if (radius > 0.0) A *= rho / radius;
    return mrident::LtiSystem(A, random_matrix(eng, states, inputs),
                              random_matrix(eng, outputs, states),
                              random_matrix(eng, outputs, inputs), h);
}

inline mrident::Signal random_signal(std::uint64_t seed, Eigen::Index channels,
                                     Eigen::Index length, double h) {
    std::mt19937_64 eng(seed);
    Eigen::MatrixXd s(channels, length);
    for (Eigen::Index c = 0; c < channels; ++c)
        for (Eigen::Index t = 0; t < length; ++t) s(c, t) = srand1(eng);
    return mrident::Signal(std::move(s), h);
}

/// O(N^2) DFT by direct summation, 1/sqrt(N) normalization.
inline Eigen::VectorXcd naive_dft(const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    Eigen::VectorXcd out(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        Complex acc = 0.0;
        for (Eigen::Index t = 0; t < n; ++t)
            acc += x[t] * std::polar(1.0, -2.0 * kPi * double(t) * double(k) / double(n));
        out[k] = acc / std::sqrt(double(n));
    }
    return out;
}

/// FRF magnitude/phase from the DFT of a long impulse response.
inline Eigen::MatrixXcd impulse_response_frf(const mrident::LtiSystem& sys, double omega,
                                             Eigen::Index length) {
    Eigen::MatrixXcd acc = sys.D().cast<Complex>();
    Eigen::MatrixXd state_map = Eigen::MatrixXd::Identity(sys.order(), sys.order());
    for (Eigen::Index i = 1; i < length; ++i) {
        // M_i = C A^{i-1} B
        acc += std::polar(1.0, -omega * sys.sample_period() * double(i)) *
               (sys.C() * state_map * sys.B()).cast<Complex>();
        state_map = sys.A() * state_map;
    }
    return acc;
}

/// Direct convolution with the truncated impulse response (zero initial state).
inline Eigen::MatrixXd convolution_response(const mrident::LtiSystem& sys,
                                            const Eigen::MatrixXd& input,
                                            Eigen::Index truncation) {
    const Eigen::Index n = input.cols();
    std::vector<Eigen::MatrixXd> markov;
    markov.push_back(sys.D());
    Eigen::MatrixXd state_map = Eigen::MatrixXd::Identity(sys.order(), sys.order());
    for (Eigen::Index i = 1; i < truncation; ++i) {
        markov.push_back(sys.C() * state_map * sys.B());
        state_map = sys.A() * state_map;
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(sys.outputs(), n);
    for (Eigen::Index t = 0; t < n; ++t)
        for (Eigen::Index i = 0; i <= std::min(t, truncation - 1); ++i)
            out.col(t) += markov[size_t(i)] * input.col(t - i);
    return out;
}

/// Time-lifted FRF at low-rate bin m of L from the frequency-sum formula:
/// P^(sigma)(w) = w_h^sigma / F * sum_k P(w_h phi^k) phi^{k sigma}, assembled
/// into the Toeplitz-with-delay block pattern. Independent of the state-space
/// lifting route.
inline Eigen::MatrixXcd gsigma_time_lift(const mrident::LtiSystem& sys, int F, Eigen::Index m,
                                         Eigen::Index num_low_bins) {
    const Eigen::Index N = num_low_bins * F;
    const Complex zh = std::polar(1.0, 2.0 * kPi * double(m) / double(N));
    const Complex phi = std::polar(1.0, 2.0 * kPi / double(F));
    const Eigen::Index ny = sys.outputs(), nu = sys.inputs();
    std::vector<Eigen::MatrixXcd> column(static_cast<size_t>(F));
    for (int sigma = 0; sigma < F; ++sigma) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(ny, nu);
        for (int k = 0; k < F; ++k) {
            const double omega_shift =
                (2.0 * kPi * double(m) / double(N) + 2.0 * kPi * double(k) / double(F)) /
                sys.sample_period();
            acc += mrident::frf_eval(sys, omega_shift) * std::pow(phi, k * sigma);
        }
        column[size_t(sigma)] = std::pow(zh, sigma) / double(F) * acc;
    }
    const Complex winv = std::pow(std::polar(1.0, -2.0 * kPi * double(m) / double(N)), F);
    Eigen::MatrixXcd out(F * ny, F * nu);
    for (int p = 0; p < F; ++p)
        for (int q = 0; q < F; ++q) {
            const int sigma = p >= q ? p - q : F + p - q;
            Eigen::MatrixXcd blk = column[size_t(sigma)];
            if (p < q) blk *= winv;
            out.block(p * ny, q * nu, ny, nu) = blk;
        }
    return out;
}

/// Lifted FRF of a (possibly periodic) system by steady-state simulation: one
/// periodic random experiment per lifted input channel, second period used,
/// per-bin solve of Y = G U. The oracle sees only simulate().
inline std::vector<Eigen::MatrixXcd> simulated_lifted_frf(const mrident::LptvSystem& sys, int F,
                                                          Eigen::Index num_low_bins,
                                                          std::uint64_t seed) {
    const Eigen::Index L = num_low_bins;
    const Eigen::Index N = L * F;
    const Eigen::Index ny = sys.outputs(), nu = sys.inputs();
    const Eigen::Index channels = Eigen::Index(F) * nu;
    std::mt19937_64 eng(seed);

    std::vector<Eigen::MatrixXcd> U(size_t(L), Eigen::MatrixXcd(channels, channels));
    std::vector<Eigen::MatrixXcd> Y(size_t(L), Eigen::MatrixXcd(Eigen::Index(F) * ny, channels));
    for (Eigen::Index exp = 0; exp < channels; ++exp) {
        Eigen::MatrixXd u(nu, N);
        for (Eigen::Index c = 0; c < nu; ++c)
            for (Eigen::Index t = 0; t < N; ++t) u(c, t) = srand1(eng);
        Eigen::MatrixXd u2(nu, 2 * N);
        u2 << u, u;
        const mrident::Signal out2 =
            simulate(sys, mrident::Signal(u2, sys.sample_period()));
        Eigen::MatrixXd y = out2.samples().rightCols(N);

        const Eigen::MatrixXcd Ul =
            mrident::dft_rows(mrident::lift_time(mrident::Signal(u, sys.sample_period()), F)
                                  .blocks()
                                  .samples());
        const Eigen::MatrixXcd Yl =
            mrident::dft_rows(mrident::lift_time(mrident::Signal(y, sys.sample_period()), F)
                                  .blocks()
                                  .samples());
        for (Eigen::Index m = 0; m < L; ++m) {
            U[size_t(m)].col(exp) = Ul.col(m);
            Y[size_t(m)].col(exp) = Yl.col(m);
        }
    }
    std::vector<Eigen::MatrixXcd> G(static_cast<size_t>(L));
    for (Eigen::Index m = 0; m < L; ++m)
        G[size_t(m)] = Y[size_t(m)] * U[size_t(m)].partialPivLu().inverse();
    return G;
}

}  // namespace testsup
