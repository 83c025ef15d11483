#pragma once

#include <map>
#include <string>

#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"
#include "cbge/core/io_algebra.hpp"

namespace cbge {

/// Baseline levels implied by the calibrated economy at unit prices.
struct SteadyStateAccounts {
    Vec sales;           ///< gross output value per cell
    Vec income;          ///< GNE per country
    Vec emission_value;  ///< carbon payments per country (= supply value for Capped)
    double world_gne = 0.0;
};

namespace detail {

/// Sales system at given shares/wedges: sales = A * sales + b. Final demand
/// falls on domestic goods; a Priced country's permit income and all tariff
/// revenue feed back through A, everything else enters b.
inline Mat sales_system_matrix(const WorldEconomy& econ, const Mat& omega, const Mat& alpha,
                               const Vec& tariff_margin) {
    const int nj = econ.cells();
    const int j = econ.dims.n_sectors;
    Mat a = omega;
    for (int i = 1; i <= econ.dims.n_countries; ++i) {
        for (int jj = 1; jj <= j; ++jj) {
            const int row = econ.dims.flat(i, jj);
            for (int k = 1; k <= j; ++k) {
                const int col = econ.dims.flat(i, k);
                double feedback = tariff_margin[col];
                if (is_priced(econ.carbon_regime[i - 1])) feedback += econ.rho[col];
                a(row, col) += alpha(i - 1, jj - 1) * feedback;
            }
        }
    }
    (void)nj;
    return a;
}

inline Vec solve_linear(const Mat& system, const Vec& rhs) {
    Eigen::PartialPivLU<Mat> lu(system);
    Vec x = lu.solve(rhs);
    x += lu.solve(rhs - system * x);  // one refinement pass
    return x;
}

} // namespace detail

/// Solves the goods-market system at unit prices for baseline sales and
/// incomes. Capped permit endowments enter income directly; Priced supply is
/// endogenous and resolved inside the linear system.
inline SteadyStateAccounts steady_state_accounts(const WorldEconomy& econ) {
    const int n = econ.dims.n_countries;
    const int j = econ.dims.n_sectors;
    const int nj = econ.cells();

    ShareMatrices shares = make_share_matrices(econ);
    Mat a = detail::sales_system_matrix(econ, shares.omega, econ.chi, Vec::Zero(nj));

    Vec exogenous_income(n);
    for (int i = 0; i < n; ++i) {
        exogenous_income[i] = econ.labor[i] + econ.deficits[i];
        if (const auto* cap = std::get_if<Capped>(&econ.carbon_regime[i]))
            exogenous_income[i] += cap->emission_supply;
    }
    Vec b(nj);
    for (int i = 1; i <= n; ++i)
        for (int jj = 1; jj <= j; ++jj)
            b[econ.dims.flat(i, jj)] = econ.chi(i - 1, jj - 1) * exogenous_income[i - 1];

    SteadyStateAccounts acc;
    acc.sales = detail::solve_linear(Mat::Identity(nj, nj) - a, b);

    acc.emission_value = Vec::Zero(n);
    acc.income = Vec::Zero(n);
    for (int i = 1; i <= n; ++i) {
        double ev = 0.0;
        for (int jj = 1; jj <= j; ++jj)
            ev += econ.rho[econ.dims.flat(i, jj)] * acc.sales[econ.dims.flat(i, jj)];
        acc.emission_value[i - 1] = ev;
        acc.income[i - 1] = econ.labor[i - 1] + ev + econ.deficits[i - 1];
    }
    acc.world_gne = acc.income.sum();
    return acc;
}

/// Residuals of every equilibrium condition evaluated at unit prices, wages,
/// and carbon prices with all wedges absent.
struct SteadyStateReport {
    std::map<std::string, double> residuals;
    double tolerance = 1e-10;

    double max_residual() const {
        double m = 0.0;
        for (const auto& [k, v] : residuals) m = std::max(m, v);
        return m;
    }
    bool pass() const { return max_residual() < tolerance; }
};

/// Evaluates the full equilibrium system at the normalization point. A valid
/// calibration satisfies every condition to near machine precision; monetary
/// residuals are reported relative to world GNE.
inline SteadyStateReport steady_state_check(const WorldEconomy& econ) {
    econ.validate();
    const int n = econ.dims.n_countries;
    const int j = econ.dims.n_sectors;
    const int nj = econ.cells();

    SteadyStateAccounts acc = steady_state_accounts(econ);
    ShareMatrices shares = make_share_matrices(econ);
    const double money = std::max(1.0, acc.world_gne);

    SteadyStateReport rep;

    // Unit-cost and price-index equations at unit prices. The cost equation
    // is an identity under the productivity normalization; the price index
    // exposes any column-sum defect in iota.
    double cost_res = 0.0, pidx_res = 0.0, cshare_res = 0.0, alpha_res = 0.0;
    for (int d = 0; d < nj; ++d) {
        double mc = std::pow(1.0, (1.0 - econ.beta[d]) * (1.0 - econ.rho[d]));
        cost_res = std::max(cost_res, std::abs(mc - 1.0));
        double colsum = econ.iota.col(d).sum();
        double pidx = std::pow(colsum, 1.0 / (1.0 - econ.theta));
        pidx_res = std::max(pidx_res, std::abs(pidx - 1.0));
        for (int o = 0; o < nj; ++o) {
            double omega_tilde = econ.iota(o, d) * std::pow(1.0 / pidx, 1.0 - econ.theta);
            cshare_res = std::max(cshare_res, std::abs(omega_tilde - econ.iota(o, d)));
        }
    }
    for (int i = 0; i < n; ++i) {
        double denom = econ.chi.row(i).sum();
        for (int jj = 0; jj < j; ++jj)
            alpha_res = std::max(alpha_res, std::abs(econ.chi(i, jj) / denom - econ.chi(i, jj)));
    }
    rep.residuals["input_cost"] = cost_res;
    rep.residuals["price_index"] = pidx_res;
    rep.residuals["cost_shares"] = cshare_res;
    rep.residuals["consumption_shares"] = alpha_res;

    // Goods market: sales = final demand + intermediate demand.
    Vec demand = shares.omega * acc.sales;
    for (int i = 1; i <= n; ++i)
        for (int jj = 1; jj <= j; ++jj)
            demand[econ.dims.flat(i, jj)] += econ.chi(i - 1, jj - 1) * acc.income[i - 1];
    rep.residuals["goods_market"] = (acc.sales - demand).cwiseAbs().maxCoeff() / money;

    // Factor markets: the stored endowments must match demand at unit prices.
    double labor_res = 0.0, emis_res = 0.0;
    for (int i = 1; i <= n; ++i) {
        double labor_demand = 0.0;
        for (int jj = 1; jj <= j; ++jj) {
            const int f = econ.dims.flat(i, jj);
            labor_demand += econ.beta[f] * (1.0 - econ.rho[f]) * acc.sales[f];
        }
        labor_res = std::max(labor_res, std::abs(labor_demand - econ.labor[i - 1]) / money);
        if (const auto* cap = std::get_if<Capped>(&econ.carbon_regime[i - 1]))
            emis_res = std::max(emis_res,
                                std::abs(acc.emission_value[i - 1] - cap->emission_supply) / money);
    }
    rep.residuals["labor_market"] = labor_res;
    rep.residuals["emission_market"] = emis_res;

    // World closure: income-side GNE equals production-side value added.
    double value_added = 0.0;
    for (int f = 0; f < nj; ++f) value_added += (1.0 - econ.gamma(f)) * acc.sales[f];
    rep.residuals["walras"] = std::abs(acc.world_gne - value_added) / money;

    return rep;
}

} // namespace cbge
