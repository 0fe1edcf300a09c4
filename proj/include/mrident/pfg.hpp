#pragma once

#include <string>

#include "mrident/ident.hpp"
#include "mrident/multirate.hpp"

namespace mrident {

enum class PfgProvenance { ClosedForm, BruteForce };

/// Performance frequency gain per high-rate bin: worst-case power-norm
/// amplification of a single-frequency reference through the multirate loop.
struct PfgCurve {
    Eigen::VectorXd grid;     ///< rad/s, high-rate bin grid
    Eigen::VectorXd values;   ///< nonnegative; NaN where the estimate had no data
    PfgProvenance provenance;
    std::string loop_hash;
    Eigen::Index nan_bins = 0;
};

/// Closed-form PFG from plant FRF samples on the full high-rate bin grid and
/// the known low-rate controller. The low-rate plant inside Q_d is folded from
/// the same FRF samples, so estimated plants need no side information.
PfgCurve pfg_closed_form(const Frf& plant, const LtiSystem& controller, int factor);

/// Single-frequency simulation of the defining supremum: excites the complex
/// exponential class via a cosine and a quadrature run, and returns the
/// steady-state power-norm ratio over an integer number of tone periods.
/// omega must be a bin of the grid with grid_bins points.
double pfg_brute_force(const MultirateLoop& loop, double omega, Eigen::Index grid_bins,
                       double duration_seconds);

PfgCurve pfg_from_estimate(const PlantEstimate& estimate, const LtiSystem& controller,
                           int factor);

void write_csv(const PfgCurve& curve, const std::filesystem::path& path);

}  // namespace mrident
