#pragma once

#include <cmath>

#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"
#include "cbge/core/io_algebra.hpp"
#include "cbge/core/steady_state.hpp"
#include "cbge/metrics/emissions.hpp"
#include "cbge/policy/solver.hpp"

namespace cbge {

/// One shocked trade flow: a wedge on good (origin_country, origin_sector)
/// purchased by (dest_country, dest_sector). Countries and sectors 1-based.
struct ShockFlow {
    int origin_country = 0;
    int origin_sector = 0;
    int dest_country = 0;
    int dest_sector = 0;
};

/// Factor-price responses per unit of the wedge shock: log-derivatives of
/// wages, of carbon prices (zero for exogenous-price countries), and of
/// emission supplies (zero for carbon-market countries). The factor-market
/// block is not differentiated analytically; responses come from a small
/// nonlinear solve, or are zero in partial-equilibrium mode.
struct FactorDerivatives {
    Vec dlogw;
    Vec dlogt;
    Vec dlogE;
};

inline FactorDerivatives zero_factor_response(const WorldEconomy& econ) {
    const int n = econ.dims.n_countries;
    return {Vec::Zero(n), Vec::Zero(n), Vec::Zero(n)};
}

namespace detail {

inline void require_steady_state(const WorldEconomy& econ, const char* who) {
    SteadyStateReport rep = steady_state_check(econ);
    if (!rep.pass())
        throw InvalidStateError(std::string(who) +
                                ": economy is not at its steady state (max residual " +
                                std::to_string(rep.max_residual()) + ")");
}

inline int flow_origin(const WorldEconomy& econ, const ShockFlow& f) {
    return econ.dims.flat(f.origin_country, f.origin_sector);
}
inline int flow_dest(const WorldEconomy& econ, const ShockFlow& f) {
    return econ.dims.flat(f.dest_country, f.dest_sector);
}

} // namespace detail

/// Central-difference factor responses from the nonlinear solver: the flow
/// is shocked with an ad valorem wedge of +/- h0 and the log changes of
/// wages, carbon prices, and emission supplies are differenced.
inline FactorDerivatives fd_factor_derivatives(const WorldEconomy& econ, const ShockFlow& flow,
                                               double h0 = 1e-4) {
    detail::require_steady_state(econ, "fd_factor_derivatives");
    auto run = [&](double h) {
        PolicyScenario scen;
        scen.name = "fd_probe";
        scen.tariff_overrides.push_back(
            {flow.origin_country, flow.origin_sector, flow.dest_country, flow.dest_sector, h});
        scen.tolerance = 1e-13;
        return solve(econ, scen);
    };
    HatSolution up = run(h0);
    HatSolution down = run(-h0);
    const int n = econ.dims.n_countries;
    FactorDerivatives fd = zero_factor_response(econ);
    for (int i = 0; i < n; ++i) {
        fd.dlogw[i] = (std::log(up.w_hat[i]) - std::log(down.w_hat[i])) / (2 * h0);
        if (is_capped(econ.carbon_regime[i]))
            fd.dlogt[i] = (std::log(up.t_hat[i]) - std::log(down.t_hat[i])) / (2 * h0);
        else
            fd.dlogE[i] = (std::log(up.e_hat[i]) - std::log(down.e_hat[i])) / (2 * h0);
    }
    return fd;
}

/// Log-derivative of every producer price with respect to the wedge on the
/// shocked flow: the cost-based Leontief inverse applied to the direct
/// factor-cost terms plus the selector that places the shocked flow's input
/// weight on its destination.
inline Vec dlog_prices(const WorldEconomy& econ, const ShockFlow& flow,
                       const FactorDerivatives& fd) {
    detail::require_steady_state(econ, "dlog_prices");
    const int nj = econ.cells();
    const int j = econ.dims.n_sectors;
    const int origin = detail::flow_origin(econ, flow);
    const int dest = detail::flow_dest(econ, flow);
    Vec gamma = econ.gamma_vec();

    Vec rhs(nj);
    for (int f = 0; f < nj; ++f) {
        const int country = f / j;
        rhs[f] = econ.beta[f] * (1.0 - econ.rho[f]) * fd.dlogw[country] +
                 econ.rho[f] * fd.dlogt[country];
    }
    rhs[dest] += gamma[dest] * econ.iota(origin, dest);

    Mat system = Mat::Identity(nj, nj) - gamma.asDiagonal() * econ.iota.transpose();
    return detail::solve_linear(system, rhs);
}

/// First-order endogenous adjustment of the CBAM wedge itself when carbon
/// prices respond to the shock.
inline double dcbam(double rho_l_q, double dlogt_s, double dlogt_l) {
    return rho_l_q * rho_l_q * (dlogt_s - dlogt_l);
}

/// Log-derivatives of the price indices faced by every destination cell.
inline Vec dlog_price_indices(const WorldEconomy& econ, const ShockFlow& flow,
                              const Vec& dlogp) {
    const int origin = detail::flow_origin(econ, flow);
    const int dest = detail::flow_dest(econ, flow);
    Vec dlogP = econ.iota.transpose() * dlogp;
    dlogP[dest] += econ.iota(origin, dest);
    return dlogP;
}

/// Log-derivatives of all cost shares. Cells with a zero input weight carry
/// a zero entry (their share is identically zero). At theta = 1 the matrix
/// vanishes: Cobb-Douglas spending shares do not respond to prices.
inline Mat dlog_cost_shares(const WorldEconomy& econ, const ShockFlow& flow,
                            const FactorDerivatives& fd) {
    detail::require_steady_state(econ, "dlog_cost_shares");
    const int nj = econ.cells();
    const int origin = detail::flow_origin(econ, flow);
    const int dest = detail::flow_dest(econ, flow);
    Vec dlogp = dlog_prices(econ, flow, fd);
    Vec dlogP = dlog_price_indices(econ, flow, dlogp);

    Mat out(nj, nj);
    for (int d = 0; d < nj; ++d)
        for (int o = 0; o < nj; ++o) {
            if (econ.iota(o, d) == 0.0) {
                out(o, d) = 0.0;
                continue;
            }
            double self = (o == origin && d == dest) ? 1.0 : 0.0;
            out(o, d) = (1.0 - econ.theta) * (dlogp[o] + self - dlogP[d]);
        }
    return out;
}

/// Log-derivative of real GNE per country: income-share-weighted factor
/// responses plus the tariff-revenue selector, deflated by the consumption
/// price response.
inline Vec dlog_welfare(const WorldEconomy& econ, const ShockFlow& flow,
                        const FactorDerivatives& fd) {
    detail::require_steady_state(econ, "dlog_welfare");
    const int n = econ.dims.n_countries, j = econ.dims.n_sectors;
    const int origin = detail::flow_origin(econ, flow);
    const int dest = detail::flow_dest(econ, flow);
    SteadyStateAccounts acc = steady_state_accounts(econ);
    Vec dlogp = dlog_prices(econ, flow, fd);

    Vec out(n);
    for (int i = 0; i < n; ++i) {
        double income = acc.income[i];
        double value = econ.labor[i] * fd.dlogw[i];
        value += acc.emission_value[i] *
                 (is_capped(econ.carbon_regime[i]) ? fd.dlogt[i] : fd.dlogE[i]);
        if (i == dest / j)
            value += econ.gamma(dest) * acc.sales[dest] * econ.iota(origin, dest);
        double consumption_price = 0.0;
        for (int jj = 0; jj < j; ++jj) consumption_price += econ.chi(i, jj) * dlogp[i * j + jj];
        out[i] = value / income - consumption_price;
    }
    return out;
}

/// Log-derivative of aggregate emissions embodied in the ETS area's imports:
/// the exact differential of the embodied-emissions expression, combining
/// the emission-intensity term, the Leontief network term, and the
/// import-flow term, aggregated with baseline EEI weights over extra-area
/// origins.
inline double dlog_eei(const WorldEconomy& econ, const ShockFlow& flow,
                       const FactorDerivatives& fd, bool direct_only = false) {
    detail::require_steady_state(econ, "dlog_eei");
    const int n = econ.dims.n_countries, j = econ.dims.n_sectors, nj = econ.cells();
    const int origin = detail::flow_origin(econ, flow);
    const int dest = detail::flow_dest(econ, flow);
    SteadyStateAccounts acc = steady_state_accounts(econ);
    Vec gamma = econ.gamma_vec();

    Vec dlogp = dlog_prices(econ, flow, fd);
    Mat dlog_shares = dlog_cost_shares(econ, flow, fd);

    // Sales response: differentiate sales = alpha*income + revenue-share
    // flows around the steady state.
    Vec dincome(n);
    for (int i = 0; i < n; ++i) {
        dincome[i] = econ.labor[i] * fd.dlogw[i] +
                     acc.emission_value[i] *
                         (is_capped(econ.carbon_regime[i]) ? fd.dlogt[i] : fd.dlogE[i]);
        if (i == dest / j) dincome[i] += gamma[dest] * acc.sales[dest] * econ.iota(origin, dest);
    }
    Vec rhs = Vec::Zero(nj);
    for (int i = 0; i < n; ++i) {
        double mean_price = 0.0;
        for (int jj = 0; jj < j; ++jj) mean_price += econ.chi(i, jj) * dlogp[i * j + jj];
        for (int jj = 0; jj < j; ++jj) {
            const int f = i * j + jj;
            double dlog_alpha = (1.0 - econ.sigma) * (dlogp[f] - mean_price);
            rhs[f] += econ.chi(i, jj) * (acc.income[i] * dlog_alpha + dincome[i]);
        }
    }
    Mat omega = econ.iota * gamma.asDiagonal();
    Mat d_omega(nj, nj);
    for (int d = 0; d < nj; ++d)
        for (int o = 0; o < nj; ++o) {
            double self = (o == origin && d == dest) ? 1.0 : 0.0;
            d_omega(o, d) = omega(o, d) * (dlog_shares(o, d) - self);
        }
    rhs += d_omega * acc.sales;
    Vec dsales = detail::solve_linear(Mat::Identity(nj, nj) - omega, rhs);

    // Emission intensities: rho-tilde moves only with the carbon price.
    Vec rho_tilde = (econ.emissions_tons.array() / acc.sales.array()).matrix();
    Vec d_rho_tilde(nj);
    for (int f = 0; f < nj; ++f) d_rho_tilde[f] = -rho_tilde[f] * fd.dlogt[f / j];

    // Import flows into the area and their differential.
    const BoolVec& area = econ.eu_mask;
    Mat x_eu = Mat::Zero(nj, nj), dx_eu = Mat::Zero(nj, nj);
    for (int d = 0; d < nj; ++d) {
        if (!area[d / j]) continue;
        for (int o = 0; o < nj; ++o) {
            if (area[o / j]) continue;
            x_eu(o, d) = gamma[d] * econ.iota(o, d) * acc.sales[d];
            dx_eu(o, d) = x_eu(o, d) * dlog_shares(o, d) +
                          gamma[d] * econ.iota(o, d) * dsales[d];
        }
    }

    Vec import_demand = x_eu.rowwise().sum();
    Vec d_import = dx_eu.rowwise().sum();
    Vec eei_vec, d_eei;
    if (direct_only) {
        eei_vec = rho_tilde.asDiagonal() * import_demand;
        d_eei = d_rho_tilde.asDiagonal() * import_demand +
                rho_tilde.asDiagonal() * d_import;
    } else {
        ShareMatrices shares;
        shares.omega = omega;
        shares.omega_tilde = econ.iota;
        shares.gamma = gamma;
        Mat psi = leontief_inverse(shares);
        Vec chain = psi * import_demand;
        eei_vec = rho_tilde.asDiagonal() * chain;
        d_eei = d_rho_tilde.asDiagonal() * chain +
                rho_tilde.asDiagonal() * (psi * (d_omega * chain)) +
                rho_tilde.asDiagonal() * (psi * d_import);
    }

    double total = 0.0, d_total = 0.0;
    for (int f = 0; f < nj; ++f) {
        if (area[f / j]) continue;
        total += eei_vec[f];
        d_total += d_eei[f];
    }
    if (total == 0.0) return 0.0;  // no embodied imports, no response
    return d_total / total;
}

} // namespace cbge
