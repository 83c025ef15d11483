#pragma once

#include <cmath>
#include <string>

#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"

namespace cbge {

/// Cost-share and revenue-share views of the production network.
///
/// `omega_tilde` holds cost shares (columns sum to one); `omega` holds
/// revenue shares, which scale each column by the destination's materials
/// share gamma = (1-beta)(1-rho) and deduct the tariff component of the
/// price wedge.
struct ShareMatrices {
    Mat omega_tilde;
    Mat omega;
    Vec gamma;
};

/// Share matrices of a counterfactual state given its cost shares and
/// wedges. Pass all-ones for `tau_tilde` at the steady state.
inline ShareMatrices make_share_matrices(const WorldEconomy& econ, const Mat& omega_tilde,
                                         const Mat& tau_tilde) {
    const int nj = econ.cells();
    if (omega_tilde.rows() != nj || omega_tilde.cols() != nj ||
        tau_tilde.rows() != nj || tau_tilde.cols() != nj)
        throw ArgumentError("make_share_matrices: matrix dimensions do not match the economy");
    ShareMatrices s;
    s.gamma = econ.gamma_vec();
    s.omega_tilde = omega_tilde;
    s.omega = (omega_tilde.array() / tau_tilde.array()).matrix() * s.gamma.asDiagonal();
    return s;
}

/// Steady-state share matrices: cost shares equal the input weights and all
/// wedges are absent.
inline ShareMatrices make_share_matrices(const WorldEconomy& econ) {
    ShareMatrices s;
    s.gamma = econ.gamma_vec();
    s.omega_tilde = econ.iota;
    s.omega = econ.iota * s.gamma.asDiagonal();
    return s;
}

/// Spectral radius estimate by power iteration on |M|.
inline double spectral_radius(const Mat& m, int max_iterations = 200, double tol = 1e-9) {
    const Eigen::Index n = m.rows();
    if (n == 0) return 0.0;
    Mat a = m.cwiseAbs();
    Vec v = Vec::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double lambda = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        Vec w = a * v;
        double norm = w.norm();
        if (norm == 0.0) return 0.0;
        w /= norm;
        double next = w.dot(a * w);
        if (std::abs(next - lambda) < tol * std::max(1.0, std::abs(next))) return next;
        lambda = next;
        v = w;
    }
    return lambda;
}

/// Leontief inverse Psi = (I - Omega)^{-1}, summing all direct and indirect
/// input requirements. Refuses to invert when the revenue-share matrix has
/// spectral radius at or above one, naming the heaviest column sums.
inline Mat leontief_inverse(const ShareMatrices& shares) {
    const Eigen::Index nj = shares.omega.rows();
    double radius = spectral_radius(shares.omega);
    if (radius >= 1.0 - 1e-9) {
        Eigen::Index worst = 0;
        Vec colsums = shares.omega.colwise().sum();
        colsums.maxCoeff(&worst);
        throw ModelIllPosedError(
            "leontief_inverse: revenue-share matrix has spectral radius " +
            std::to_string(radius) + " >= 1; heaviest column " + std::to_string(worst) +
            " sums to " + std::to_string(colsums[worst]));
    }
    Mat system = Mat::Identity(nj, nj) - shares.omega;
    Eigen::PartialPivLU<Mat> lu(system);
    Mat psi = lu.solve(Mat::Identity(nj, nj));
    // One pass of iterative refinement keeps the residual near machine epsilon.
    psi += lu.solve(Mat::Identity(nj, nj) - system * psi);
    // Exact zeros (disconnected cells) may come back as roundoff-scale
    // negatives from the LU; snap those without disturbing the residual.
    psi = psi.unaryExpr([](double x) { return (x < 0.0 && x > -1e-13) ? 0.0 : x; });
    return psi;
}

/// Sales as a share of nominal world GNE.
inline Vec domar_weights(const Vec& sales, double world_gne) {
    if (!(world_gne > 0.0))
        throw InvalidStateError("domar_weights: world GNE must be positive, got " +
                                std::to_string(world_gne));
    if ((sales.array() < 0.0).any())
        throw ArgumentError("domar_weights: sales must be nonnegative");
    return sales / world_gne;
}

} // namespace cbge
