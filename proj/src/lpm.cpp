#include "mrident/lpm.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "mrident/io.hpp"
#include "mrident/parallel.hpp"

namespace mrident {

LpmConfig::LpmConfig(int order, int half_width, Eigen::Index effective_inputs,
                     Eigen::Index effective_outputs)
    : order_(order), half_width_(half_width), nu_eff_(effective_inputs),
      ny_eff_(effective_outputs) {
    if (order_ < 0) throw Error("polynomial order must be nonnegative");
    if (half_width_ < 1) throw Error("window half-width must be positive");
    if (nu_eff_ < 1 || ny_eff_ < 1) throw Error("effective dimensions must be positive");
    if (degrees_of_freedom() <= ny_eff_)
        throw NotIdentifiable("window too small: 2n+1 - (R+1)(nu_eff+1) = " +
                              std::to_string(degrees_of_freedom()) +
                              " must exceed ny_eff = " + std::to_string(ny_eff_));
}

LpmConfig LpmConfig::escalated(int order, int half_width, Eigen::Index effective_inputs,
                               Eigen::Index effective_outputs, bool* escalated) {
    // 2n+1 > (R+1)(nu_eff+1) + ny_eff
    const Eigen::Index needed = (order + 1) * (effective_inputs + 1) + effective_outputs;
    int n = half_width;
    while (2 * n + 1 <= needed) ++n;
    if (escalated) *escalated = (n != half_width);
    return LpmConfig(order, n, effective_inputs, effective_outputs);
}

LpmFit::LpmFit(std::vector<LpmBin> bins, LpmConfig config)
    : bins_(std::move(bins)), config_(std::move(config)) {
    if (bins_.empty()) throw Error("LPM fit needs at least one bin");
}

LpmFit lpm_estimate(const Eigen::MatrixXcd& input, const Eigen::MatrixXcd& output,
                    const LpmConfig& config) {
    const Eigen::Index n_bins = input.cols();
    if (output.cols() != n_bins)
        throw DimensionMismatch("input and output must share the bin grid");
    if (input.rows() != config.effective_inputs() ||
        output.rows() != config.effective_outputs())
        throw DimensionMismatch("channel counts must match the LPM configuration");
    const int n = config.half_width();
    const int R = config.order();
    const Eigen::Index window = config.window_size();
    if (n_bins < window)
        throw InsufficientData("spectrum shorter than the LPM window (" +
                               std::to_string(n_bins) + " < " + std::to_string(window) + ")");
    const Eigen::Index nu = config.effective_inputs();
    const Eigen::Index ny = config.effective_outputs();
    const Eigen::Index d = config.regressor_rows();

    std::vector<LpmBin> bins(static_cast<size_t>(n_bins));
    parallel_for(static_cast<size_t>(n_bins), [&](size_t ki) {
        const Eigen::Index k = Eigen::Index(ki);
        // Window shifted inward at the edges, never shortened.
        const Eigen::Index lo = std::min(std::max<Eigen::Index>(k - n, 0), n_bins - window);

        Eigen::MatrixXcd K(d, window);
        for (Eigen::Index j = 0; j < window; ++j) {
            const Eigen::Index bin = lo + j;
            const double r = double(bin - k);
            double rs = 1.0;
            for (int s = 0; s <= R; ++s) {
                K.block(Eigen::Index(s) * nu, j, nu, 1) = rs * input.col(bin);
                K(Eigen::Index(R + 1) * nu + s, j) = rs;
                rs *= r;
            }
        }
        const Eigen::MatrixXcd Yn = output.middleCols(lo, window);

        // theta-hat = Y_n K_n^H (K_n K_n^H)^{-1}, solved through an orthogonal
        // factorization of K_n^H instead of forming the normal equations.
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(K.adjoint(),
                                               Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double smax = svd.singularValues().maxCoeff();
        const double smin = svd.singularValues().minCoeff();
        const double cond_k = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();

        LpmBin& out = bins[ki];
        out.condition = cond_k * cond_k;  // cond(K K^H) = cond(K)^2
        out.ill_conditioned = !(out.condition <= 1e12);
        const Eigen::MatrixXcd theta = svd.solve(Yn.adjoint()).adjoint();

        out.plant = theta.leftCols(nu);
        out.transient = theta.col(Eigen::Index(R + 1) * nu);
        out.plant_poly.reserve(static_cast<size_t>(R));
        out.transient_poly.reserve(static_cast<size_t>(R));
        for (int s = 1; s <= R; ++s) {
            out.plant_poly.push_back(theta.middleCols(Eigen::Index(s) * nu, nu));
            out.transient_poly.push_back(theta.col(Eigen::Index(R + 1) * nu + s));
        }
        out.residual = Yn - theta * K;

        // var(G(i,j)) = proxy(i,i) * [(K K^H)^{-1}]_{jj}, with (K K^H)^{-1}
        // assembled from the factorization already at hand.
        const double dof = double(config.degrees_of_freedom());
        out.plant_variance.resize(ny, nu);
        for (Eigen::Index j = 0; j < nu; ++j) {
            double kk_inv = 0.0;
            for (Eigen::Index m = 0; m < svd.singularValues().size(); ++m) {
                const double s = svd.singularValues()[m];
                if (s > 0.0) kk_inv += std::norm(svd.matrixV()(j, m)) / (s * s);
            }
            for (Eigen::Index i = 0; i < ny; ++i)
                out.plant_variance(i, j) = out.residual.row(i).squaredNorm() / dof * kk_inv;
        }
    });
    return LpmFit(std::move(bins), config);
}

Eigen::VectorXcd lpm_transient(const LpmFit& fit, Eigen::Index bin) {
    if (bin < 0 || bin >= fit.size()) throw BadIndex("bin out of range");
    return fit.bin(bin).transient;
}

Eigen::MatrixXcd lpm_covariance_proxy(const LpmFit& fit, Eigen::Index bin) {
    if (bin < 0 || bin >= fit.size()) throw BadIndex("bin out of range");
    const auto& residual = fit.bin(bin).residual;
    const double dof = double(fit.config().degrees_of_freedom());
    return residual * residual.adjoint() / dof;
}

void write_csv(const LpmFit& fit, const Eigen::VectorXd& grid_rad,
               const std::filesystem::path& path) {
    if (grid_rad.size() != fit.size())
        throw DimensionMismatch("grid length must match the fit");
    auto out = open_output(path);
    out << "bin,freq_hz,row,col,re,im,cond,residual_norm\n";
    for (Eigen::Index k = 0; k < fit.size(); ++k) {
        const auto& b = fit.bin(k);
        const double hz = grid_rad[k] / (2.0 * std::numbers::pi);
        const double rnorm = b.residual.norm();
        for (Eigen::Index r = 0; r < b.plant.rows(); ++r)
            for (Eigen::Index c = 0; c < b.plant.cols(); ++c)
                out << k << "," << format_double(hz) << "," << r << "," << c << ","
                    << format_double(b.plant(r, c).real()) << ","
                    << format_double(b.plant(r, c).imag()) << "," << format_double(b.condition)
                    << "," << format_double(rnorm) << "\n";
    }
}

}  // namespace mrident
