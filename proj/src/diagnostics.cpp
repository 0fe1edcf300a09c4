#include "mrident/diagnostics.hpp"

#include <random>

#include <nlohmann/json.hpp>

#include "mrident/ident.hpp"

namespace mrident {

namespace {

Eigen::MatrixXcd solve_right(const Eigen::MatrixXcd& num, const Eigen::MatrixXcd& den) {
    // num * den^{-1}
    return den.adjoint().partialPivLu().solve(num.adjoint()).adjoint();
}

}  // namespace

BiasCheckResult first_order_bias_lifted(const PerturbationProbe& probe) {
    const Eigen::Index bins = probe.J.size();
    if (probe.S.size() != bins || probe.Jdelta.size() != bins || probe.Sdelta.size() != bins)
        throw DimensionMismatch("probe FRFs must share the grid");
    if (!(probe.eps > 0.0)) throw Error("perturbation scale must be positive");
    BiasCheckResult result;
    result.predicted.resize(static_cast<size_t>(bins));
    result.actual.resize(static_cast<size_t>(bins));
    double pred_sq = 0.0, act_sq = 0.0, rem_sq = 0.0;
    for (Eigen::Index k = 0; k < bins; ++k) {
        const auto& J = probe.J.at(k);
        const auto& S = probe.S.at(k);
        const auto& Jd = probe.Jdelta.at(k);
        const auto& Sd = probe.Sdelta.at(k);
        const Eigen::FullPivLU<Eigen::MatrixXcd> lu(S);
        if (!lu.isInvertible()) throw SingularS("base S singular at bin " + std::to_string(k));
        const Eigen::MatrixXcd P = solve_right(J, S);
        result.predicted[size_t(k)] = probe.eps * solve_right(Jd - P * Sd, S);
        const Eigen::MatrixXcd S_pert = S + probe.eps * Sd;
        const Eigen::FullPivLU<Eigen::MatrixXcd> lu_pert(S_pert);
        if (!lu_pert.isInvertible())
            throw SingularS("perturbed S singular at bin " + std::to_string(k));
        result.actual[size_t(k)] = solve_right(J + probe.eps * Jd, S_pert) - P;
        pred_sq += result.predicted[size_t(k)].squaredNorm();
        act_sq += result.actual[size_t(k)].squaredNorm();
        rem_sq += (result.actual[size_t(k)] - result.predicted[size_t(k)]).squaredNorm();
    }
    result.predicted_norm = std::sqrt(pred_sq);
    result.actual_norm = std::sqrt(act_sq);
    result.remainder_ratio = std::sqrt(rem_sq) / (probe.eps * probe.eps);
    return result;
}

HighrateBias highrate_bias_from_lifted(const PerturbationProbe& probe, LiftKind kind, int p) {
    if (probe.J.kind() != kind)
        throw WrongKind("probe kind does not match the requested inverse lift");
    const BiasCheckResult first_order = first_order_bias_lifted(probe);
    LiftedFrf bias(probe.J.kind(), probe.J.grid(), first_order.predicted,
                   probe.J.lift_factor(), probe.J.base_outputs(), probe.S.base_outputs(),
                   probe.J.base_period());
    const Eigen::Index n = bias.highrate_bins();
    HighrateBias out;
    out.grid.resize(n);
    out.values.resize(static_cast<size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        out.grid[k] =
            2.0 * 3.14159265358979323846 * double(k) / (double(n) * bias.base_period());
        out.values[size_t(k)] = kind == LiftKind::TimeLifted
                                    ? inverse_time_lift(bias, out.grid[k])
                                    : inverse_freq_lift(bias, out.grid[k], p);
    }
    return out;
}

PerturbationProbe make_random_probe(const LiftedFrf& J, const LiftedFrf& S, double eps,
                                    std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    auto unit = [&] { return double(engine() >> 11) * 0x1.0p-53 - 0.5; };
    auto perturb_like = [&](const LiftedFrf& base) {
        std::vector<Eigen::MatrixXcd> values(static_cast<size_t>(base.size()));
        for (Eigen::Index k = 0; k < base.size(); ++k) {
            Eigen::MatrixXcd m(base.at(k).rows(), base.at(k).cols());
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c)
                    m(r, c) = std::complex<double>(unit(), unit());
            values[size_t(k)] = std::move(m);
        }
        return LiftedFrf(base.kind(), base.grid(), std::move(values), base.lift_factor(),
                         base.base_outputs(), base.base_inputs(), base.base_period());
    };
    return PerturbationProbe{J, S, perturb_like(J), perturb_like(S), eps};
}

nlohmann::json diagnostics_report(const LiftedFrf& J, const LiftedFrf& S, std::uint64_t seed) {
    nlohmann::json checks = nlohmann::json::array();
    bool all_ok = true;

    // Second-order remainder: the ratio ||actual - predicted||/eps^2 must stay
    // level (within 3x) as eps shrinks.
    double ratio_coarse = 0.0, ratio_fine = 0.0;
    {
        PerturbationProbe coarse = make_random_probe(J, S, 1e-2, seed);
        ratio_coarse = first_order_bias_lifted(coarse).remainder_ratio;
        PerturbationProbe fine = coarse;
        fine.eps = 1e-3;
        ratio_fine = first_order_bias_lifted(fine).remainder_ratio;
    }
    const double ratio_spread =
        std::max(ratio_coarse, ratio_fine) / std::max(1e-300, std::min(ratio_coarse, ratio_fine));
    const bool remainder_ok = ratio_spread < 3.0;
    all_ok = all_ok && remainder_ok;
    checks.push_back({{"name", "first_order_remainder_eps_sweep"},
                      {"ratio_eps_1e-2", ratio_coarse},
                      {"ratio_eps_1e-3", ratio_fine},
                      {"spread", ratio_spread},
                      {"pass", remainder_ok}});

    // Affine case: with Sdelta = 0 the identity is exact.
    {
        PerturbationProbe probe = make_random_probe(J, S, 1e-3, seed + 1);
        for (Eigen::Index k = 0; k < probe.Sdelta.size(); ++k) probe.Sdelta.at(k).setZero();
        const BiasCheckResult res = first_order_bias_lifted(probe);
        double diff = 0.0;
        for (size_t k = 0; k < res.predicted.size(); ++k)
            diff = std::max(diff, (res.predicted[k] - res.actual[k]).norm());
        const bool ok = diff <= 1e-12 * std::max(1.0, res.actual_norm);
        all_ok = all_ok && ok;
        checks.push_back({{"name", "affine_in_J_exact"},
                          {"max_abs_difference", diff},
                          {"pass", ok}});
    }

    nlohmann::json report;
    report["checks"] = std::move(checks);
    report["pass"] = all_ok;
    return report;
}

}  // namespace mrident
