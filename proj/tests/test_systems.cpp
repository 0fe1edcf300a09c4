#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include <nlohmann/json.hpp>

#include "mrident/systems.hpp"
#include "support.hpp"

using namespace mrident;
using testsup::Complex;

namespace {

LtiSystem unit_delay(double h) {
    Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
    A << 0.0;
    B << 1.0;
    C << 1.0;
    D << 0.0;
    return LtiSystem(A, B, C, D, h);
}

}  // namespace

TEST_CASE("frf of a static gain is the gain at every frequency") {
    Eigen::MatrixXd g(1, 1);
    g << -2.5;
    LtiSystem sys = LtiSystem::static_gain(g, 0.1);
    for (double omega : {0.0, 1.0, 17.3})
        CHECK(frf_eval(sys, omega)(0, 0) == Complex(-2.5, 0.0));
}

TEST_CASE("frf of a unit delay is a pure phase") {
    const double h = 0.25;
    LtiSystem sys = unit_delay(h);
    for (double omega : {0.3, 1.7, 5.0}) {
        const Complex expected = std::polar(1.0, -omega * h);
        CHECK(std::abs(frf_eval(sys, omega)(0, 0) - expected) < 1e-14);
    }
}

TEST_CASE("frf matches the impulse-response DFT oracle on the benchmark plant") {
    LtiSystem plant = benchmark_plant();
    for (Eigen::Index k : {1, 10, 40, 80}) {
        const double omega = 2.0 * testsup::kPi * double(k) / (240.0 * plant.sample_period());
        const Eigen::MatrixXcd truth = testsup::impulse_response_frf(plant, omega, 4000);
        const Eigen::MatrixXcd actual = frf_eval(plant, omega);
        CHECK(std::abs(std::abs(actual(0, 0)) - std::abs(truth(0, 0))) <
              1e-6 * std::abs(truth(0, 0)));
    }
}

TEST_CASE("frf is 2*pi/h periodic") {
    LtiSystem sys = testsup::random_stable_system(3, 3, 1, 1, 0.5);
    const double omega = 1.234;
    const Complex a = frf_eval(sys, omega)(0, 0);
    const Complex b = frf_eval(sys, omega + 2.0 * testsup::kPi / 0.5)(0, 0);
    CHECK(std::abs(a - b) < 1e-12 * std::abs(a));
}

TEST_CASE("frf reports a singular resolvent") {
    Eigen::MatrixXd one(1, 1), zero(1, 1);
    one << 1.0;
    zero << 0.0;
    LtiSystem marginal(one, one, one, zero, 1.0);  // pole exactly at z = 1
    CHECK_THROWS_AS(frf_eval(marginal, 0.0), SingularResolvent);
}

TEST_CASE("simulation of zero input from zero state is zero") {
    LtiSystem sys = testsup::random_stable_system(4, 2, 1, 1, 0.1);
    Signal zero(Eigen::MatrixXd::Zero(1, 20), 0.1);
    CHECK(simulate(sys, zero).samples().norm() == 0.0);
}

TEST_CASE("lti simulation matches direct convolution") {
    LtiSystem sys = testsup::random_stable_system(5, 3, 1, 1, 0.2, 0.6);
    Signal input = testsup::random_signal(50, 1, 64, 0.2);
    Signal out = simulate(sys, input);
    Eigen::MatrixXd expected = testsup::convolution_response(sys, input.samples(), 64);
    CHECK((out.samples() - expected).norm() < 1e-10 * expected.norm());
}

TEST_CASE("simulation honors a nonzero initial state") {
    LtiSystem sys = testsup::random_stable_system(6, 2, 1, 1, 1.0);
    Eigen::VectorXd x0(2);
    x0 << 1.0, -0.5;
    Signal zero(Eigen::MatrixXd::Zero(1, 3), 1.0);
    Signal out = simulate(sys, zero, x0);
    CHECK(out(0, 0) == doctest::Approx((sys.C() * x0)(0)));
    CHECK(out(0, 1) == doctest::Approx((sys.C() * sys.A() * x0)(0)));
}

TEST_CASE("simulation validates rates and dimensions") {
    LtiSystem sys = testsup::random_stable_system(7, 2, 1, 1, 0.1);
    CHECK_THROWS_AS(simulate(sys, testsup::random_signal(1, 1, 8, 0.2)), DimensionMismatch);
    CHECK_THROWS_AS(simulate(sys, testsup::random_signal(1, 2, 8, 0.1)), DimensionMismatch);
}

TEST_CASE("lti simulation is time invariant") {
    LtiSystem sys = testsup::random_stable_system(8, 2, 1, 1, 1.0, 0.5);
    const Eigen::Index n = 64, shift = 5;
    Signal input = testsup::random_signal(51, 1, n, 1.0);
    Eigen::MatrixXd shifted = Eigen::MatrixXd::Zero(1, n + shift);
    shifted.rightCols(n) = input.samples();
    Signal out = simulate(sys, input);
    Signal out_shifted = simulate(sys, Signal(shifted, 1.0));
    CHECK((out_shifted.samples().rightCols(n) - out.samples()).norm() <
          1e-12 * out.samples().norm());
}

namespace {

LptvSystem alternating_gain_system(double h) {
    LtiSystem base = testsup::random_stable_system(9, 2, 1, 1, h, 0.5);
    std::vector<LptvSystem::Phase> phases;
    for (double gain : {1.0, 2.0})
        phases.push_back(LptvSystem::Phase{base.A(), base.B(), gain * base.C(),
                                           gain * base.D()});
    return LptvSystem(std::move(phases), h);
}

}  // namespace

TEST_CASE("lptv simulation is invariant under shifts by the period only") {
    LptvSystem sys = alternating_gain_system(1.0);
    const Eigen::Index n = 64;
    Signal input = testsup::random_signal(52, 1, n, 1.0);

    Eigen::MatrixXd by_period = Eigen::MatrixXd::Zero(1, n + 2);
    by_period.rightCols(n) = input.samples();
    Signal out = simulate(sys, input);
    Signal out_shifted = simulate(sys, Signal(by_period, 1.0));
    CHECK((out_shifted.samples().rightCols(n) - out.samples()).norm() <
          1e-12 * out.samples().norm());

    Eigen::MatrixXd by_one = Eigen::MatrixXd::Zero(1, n + 1);
    by_one.rightCols(n) = input.samples();
    Signal out_one = simulate(sys, Signal(by_one, 1.0));
    CHECK((out_one.samples().rightCols(n) - out.samples()).norm() >
          1e-3 * out.samples().norm());
}

TEST_CASE("lptv impulse responses differ by phase and match the direct expansion") {
    LptvSystem sys = alternating_gain_system(1.0);
    const Eigen::Index n = 32;
    for (int phase : {0, 1}) {
        Eigen::MatrixXd impulse = Eigen::MatrixXd::Zero(1, n);
        impulse(0, phase) = 1.0;
        Signal out = simulate(sys, Signal(impulse, 1.0));
        // y[t] = sum_i M_i[t mod F] u[t-i] with u = delta at t0 = phase.
        for (Eigen::Index t = phase; t < n; ++t) {
            const auto coeffs = lptv_impulse_coefficients(sys, int(t % 2), int(t - phase) + 1);
            CHECK(std::abs(out(0, t) - coeffs.back()(0, 0)) < 1e-12);
        }
    }
}

TEST_CASE("impulse coefficients of an embedded lti system are phase independent") {
    LtiSystem base = testsup::random_stable_system(10, 3, 1, 1, 1.0);
    LptvSystem embedded = LptvSystem::from_lti(base, 3);
    const auto c0 = lptv_impulse_coefficients(embedded, 0, 6);
    for (int phase : {1, 2}) {
        const auto cp = lptv_impulse_coefficients(embedded, phase, 6);
        for (size_t i = 0; i < c0.size(); ++i) CHECK((c0[i] - cp[i]).norm() < 1e-14);
    }
}

TEST_CASE("alternating output gain scales the feedthrough coefficient") {
    Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
    A << 0.5;
    B << 1.0;
    C << 1.0;
    D << 0.7;
    std::vector<LptvSystem::Phase> phases;
    for (double gain : {1.0, 2.0})
        phases.push_back(LptvSystem::Phase{A, B, gain * C, gain * D});
    LptvSystem sys(std::move(phases), 1.0);
    CHECK(lptv_impulse_coefficients(sys, 0, 1)[0](0, 0) == doctest::Approx(0.7));
    CHECK(lptv_impulse_coefficients(sys, 1, 1)[0](0, 0) == doctest::Approx(1.4));
}

TEST_CASE("state-space JSON round trip") {
    LtiSystem sys = testsup::random_stable_system(11, 2, 2, 1, 0.25);
    LtiSystem back = LtiSystem::from_json(sys.to_json());
    CHECK((back.A() - sys.A()).norm() == 0.0);
    CHECK((back.B() - sys.B()).norm() == 0.0);
    CHECK((back.C() - sys.C()).norm() == 0.0);
    CHECK((back.D() - sys.D()).norm() == 0.0);
    CHECK(back.sample_period() == sys.sample_period());

    LptvSystem periodic = alternating_gain_system(0.5);
    LptvSystem periodic_back = LptvSystem::from_json(periodic.to_json());
    CHECK(periodic_back.period() == periodic.period());
    for (int tau = 0; tau < 2; ++tau)
        CHECK((periodic_back.phase(tau).C - periodic.phase(tau).C).norm() == 0.0);
}

TEST_CASE("state-space JSON rejects malformed input") {
    CHECK_THROWS_AS(LtiSystem::from_json(nlohmann::json{{"A", {{0.0}}}}), IngestError);
    nlohmann::json ragged{{"A", {{0.0, 1.0}, {2.0}}},
                          {"B", {{1.0}}},
                          {"C", {{1.0}}},
                          {"D", {{0.0}}},
                          {"h", 1.0}};
    CHECK_THROWS_AS(LtiSystem::from_json(ragged), IngestError);
}

TEST_CASE("dimension checks reject inconsistent matrices") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(1, 1);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(1, 2);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(1, 1);
    CHECK_THROWS_AS(LtiSystem(A, B, C, D, 1.0), DimensionMismatch);
}

TEST_CASE("frf CSV round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "mrident_test_frf";
    fs::create_directories(dir);
    Frf frf = frf_bin_grid(testsup::random_stable_system(12, 2, 2, 2, 0.1), 8);
    write_csv(frf, dir / "frf.csv");
    Frf back = read_frf_csv(dir / "frf.csv");
    REQUIRE(back.size() == frf.size());
    for (Eigen::Index k = 0; k < frf.size(); ++k)
        CHECK((back.at(k) - frf.at(k)).norm() == 0.0);
    fs::remove_all(dir);
}

TEST_CASE("settle horizon follows the geometric decay bound") {
    LtiSystem sys = testsup::random_stable_system(13, 2, 1, 1, 1.0, 0.9);
    CHECK(sys.settle_samples() ==
          Eigen::Index(std::ceil(10.0 / (1.0 - sys.spectral_radius()))));
}
