#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"
#include "cbge/core/io_algebra.hpp"
#include "cbge/core/steady_state.hpp"
#include "cbge/policy/scenario.hpp"

namespace cbge {

/// Converged counterfactual equilibrium in relative changes, plus the
/// counterfactual levels of sales and income. Hats are ratios to the
/// baseline steady state.
struct HatSolution {
    Vec w_hat;    ///< wages, per country
    Vec t_hat;    ///< carbon prices; identically 1 for Priced countries
    Vec e_hat;    ///< emission quantities; equals the supply shock for Capped
    Vec mc_hat;   ///< marginal costs, per cell
    Vec p_hat;    ///< goods prices (= mc_hat under perfect competition)
    Vec P_hat;    ///< intermediate price indices, per cell
    Mat omega_tilde_prime;  ///< counterfactual cost shares
    Mat alpha_prime;        ///< counterfactual consumption shares, N x J
    Vec sales_prime;        ///< counterfactual sales levels
    Vec income_prime;       ///< counterfactual GNE per country
    Mat tau_tilde_prime;    ///< counterfactual tariff-and-CBAM wedge
    Vec allowance_cost_hat; ///< hat of (1-eps) applied in this scenario
    BoolVec importer_mask;  ///< resolved CBAM importer area

    long iterations = 0;
    bool converged = false;
    std::map<std::string, double> residuals;
    double world_gne = 0.0;  ///< baseline = counterfactual by the numeraire
};

/// Raised when the fixed point fails to converge; carries the last residual
/// snapshot and the number of outer iterations performed.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& msg, std::map<std::string, double> last_residuals,
               long iterations)
        : std::runtime_error(msg), residuals(std::move(last_residuals)), iterations(iterations) {}
    std::map<std::string, double> residuals;
    long iterations = 0;
};

namespace detail {

struct SolverContext {
    const WorldEconomy* econ = nullptr;
    const PolicyScenario* scen = nullptr;
    SteadyStateAccounts base;
    BoolVec importers;      // CBAM importer countries
    BoolVec cbam_sectors;   // CBAM origin-good scope
    Vec supply_mult;        // N
    Vec f_hat;              // NJ, hat of (1-eps)
    Mat kappa;              // NJ x NJ counterfactual tariffs
    Mat frozen_cbam;        // exogenous-mode wedge, fixed after first evaluation
    bool cbam_frozen = false;
};

inline SolverContext make_context(const WorldEconomy& econ, const PolicyScenario& scen) {
    SolverContext ctx;
    ctx.econ = &econ;
    ctx.scen = &scen;
    ctx.base = steady_state_accounts(econ);
    ctx.importers = resolve_importers(econ, scen);
    ctx.cbam_sectors = resolve_cbam_sectors(econ, scen);
    ctx.supply_mult = scen.emission_supply_multipliers.size()
                          ? scen.emission_supply_multipliers
                          : Vec::Ones(econ.dims.n_countries);
    ctx.f_hat = scen.allowance_cost_hat.size() ? scen.allowance_cost_hat
                                               : Vec::Ones(econ.cells());
    ctx.kappa = Mat::Zero(econ.cells(), econ.cells());
    for (const auto& ov : scen.tariff_overrides)
        ctx.kappa(econ.dims.flat(ov.origin_country, ov.origin_sector),
                  econ.dims.flat(ov.dest_country, ov.dest_sector)) = ov.rate;
    return ctx;
}

/// CBAM component of the wedge at carbon prices t_hat, per (origin, dest).
inline Mat cbam_matrix(const SolverContext& ctx, const Vec& t_hat) {
    const WorldEconomy& econ = *ctx.econ;
    const int n = econ.dims.n_countries, j = econ.dims.n_sectors;
    Mat cbam = Mat::Zero(econ.cells(), econ.cells());
    if (!cbam_active(ctx.scen->cbam_mode)) return cbam;
    for (int dc = 1; dc <= n; ++dc) {
        if (!ctx.importers[dc - 1]) continue;
        const double obs_i = econ.observed_carbon_price[dc - 1];
        if (!(obs_i > 0.0)) continue;  // importer prices carbon at zero: no wedge
        for (int oc = 1; oc <= n; ++oc) {
            if (ctx.importers[oc - 1]) continue;
            const double obs_n = econ.observed_carbon_price[oc - 1];
            for (int ok = 1; ok <= j; ++ok) {
                if (!ctx.cbam_sectors[ok - 1]) continue;
                const int origin = econ.dims.flat(oc, ok);
                double wedge;
                if (obs_n > 0.0)
                    wedge = cbam_wedge(econ.rho[origin], t_hat[dc - 1], t_hat[oc - 1],
                                       obs_i / obs_n, true);
                else
                    wedge = cbam_wedge(econ.rho[origin], t_hat[dc - 1], 0.0, obs_i, true);
                if (wedge == 0.0) continue;
                for (int dj = 1; dj <= j; ++dj)
                    cbam(origin, econ.dims.flat(dc, dj)) = wedge;
            }
        }
    }
    return cbam;
}

inline Mat wedge_matrix(SolverContext& ctx, const Vec& t_hat) {
    Mat cbam;
    if (cbam_endogenous(ctx.scen->cbam_mode)) {
        cbam = cbam_matrix(ctx, t_hat);
    } else {
        if (!ctx.cbam_frozen) {
            // Exogenous mode prices the wedge once, at the pre-CBAM equilibrium.
            ctx.frozen_cbam = cbam_matrix(ctx, Vec::Ones(ctx.econ->dims.n_countries));
            ctx.cbam_frozen = true;
        }
        cbam = ctx.frozen_cbam;
    }
    return (1.0 + ctx.kappa.array() + ctx.scen->wedge_scale * cbam.array()).matrix();
}

/// One full evaluation of the equilibrium system at (w_hat, t_hat): wedges,
/// the inner price fixed point, shares, and the sales/income linear solve.
struct IterationState {
    Mat tau_tilde;
    Vec mc_hat, P_hat;
    Mat omega_tilde_prime;  // NJ x NJ
    Mat alpha_prime;        // N x J
    Vec sales_prime;        // NJ
    Vec income_prime;       // N
    Vec tariff_margin;      // per destination cell: gamma * sum (tau-1)*share/tau
    Vec w_hat_next, t_hat_next, e_hat;
};

inline IterationState evaluate(SolverContext& ctx, const Vec& w_hat, const Vec& t_hat,
                               const Vec& mc_warm) {
    const WorldEconomy& econ = *ctx.econ;
    const int n = econ.dims.n_countries, j = econ.dims.n_sectors, nj = econ.cells();
    const double one_minus_theta = 1.0 - econ.theta;

    IterationState st;
    st.tau_tilde = wedge_matrix(ctx, t_hat);

    // Inner fixed point on marginal costs and price indices (contraction:
    // the materials exponent gamma is below one everywhere).
    Mat weighted = econ.iota.array() * st.tau_tilde.array().pow(one_minus_theta);
    Vec mc = mc_warm;
    Vec p_index_pow(nj), factor(nj);
    for (int f = 0; f < nj; ++f) {
        const int country = f / j;
        factor[f] = std::pow(w_hat[country], econ.beta[f] * (1.0 - econ.rho[f])) *
                    std::pow(t_hat[country] * ctx.f_hat[f], econ.rho[f]);
        if (!std::isfinite(factor[f]) || factor[f] <= 0.0)
            throw SolveError("solve: nonpositive factor-cost term at cell " + std::to_string(f) +
                                 "; check rho and beta calibration",
                             {}, 0);
    }
    bool inner_converged = false;
    for (int pass = 0; pass < 10000; ++pass) {
        Vec mc_pow = mc.array().pow(one_minus_theta);
        p_index_pow = weighted.transpose() * mc_pow;
        double gap = 0.0;
        for (int f = 0; f < nj; ++f) {
            double p_hat = std::pow(p_index_pow[f], 1.0 / one_minus_theta);
            if (!std::isfinite(p_hat) || p_hat <= 0.0)
                throw SolveError("solve: price index iterate became nonpositive at cell " +
                                     std::to_string(f),
                                 {}, 0);
            double next = factor[f] * std::pow(p_hat, (1.0 - econ.beta[f]) * (1.0 - econ.rho[f]));
            gap = std::max(gap, std::abs(next - mc[f]));
            mc[f] = next;
        }
        if (gap < 1e-12) {
            inner_converged = true;
            break;
        }
    }
    if (!inner_converged)
        throw SolveError("solve: inner price fixed point did not reach 1e-12 in 10000 passes", {},
                         0);
    st.mc_hat = mc;
    st.P_hat = p_index_pow.array().pow(1.0 / one_minus_theta);

    // Cost shares; columns renormalized to guard the unit-sum invariant.
    Vec mc_pow = mc.array().pow(one_minus_theta);
    st.omega_tilde_prime = weighted.array().colwise() * mc_pow.array();
    for (int d = 0; d < nj; ++d) st.omega_tilde_prime.col(d) /= st.omega_tilde_prime.col(d).sum();

    // Consumption shares from domestic goods prices.
    st.alpha_prime = Mat(n, j);
    const double one_minus_sigma = 1.0 - econ.sigma;
    for (int i = 1; i <= n; ++i) {
        double denom = 0.0;
        for (int jj = 1; jj <= j; ++jj)
            denom += econ.chi(i - 1, jj - 1) *
                     std::pow(mc[econ.dims.flat(i, jj)], one_minus_sigma);
        for (int jj = 1; jj <= j; ++jj)
            st.alpha_prime(i - 1, jj - 1) =
                econ.chi(i - 1, jj - 1) * std::pow(mc[econ.dims.flat(i, jj)], one_minus_sigma) /
                denom;
    }

    // Counterfactual revenue shares and the tariff-revenue margin.
    Mat omega_prime =
        (st.omega_tilde_prime.array() / st.tau_tilde.array()).matrix() *
        econ.gamma_vec().asDiagonal();
    st.tariff_margin = Vec(nj);
    for (int d = 0; d < nj; ++d) {
        double margin = 0.0;
        if (ctx.scen->income_share_mode == IncomeShareMode::Counterfactual) {
            for (int o = 0; o < nj; ++o)
                margin += st.omega_tilde_prime(o, d) * (1.0 - 1.0 / st.tau_tilde(o, d));
        } else {
            for (int o = 0; o < nj; ++o) margin += (st.tau_tilde(o, d) - 1.0) * econ.iota(o, d);
        }
        st.tariff_margin[d] = econ.gamma(d) * margin;
    }

    // Sales and income solve: sales' = A sales' + b.
    Mat a = sales_system_matrix(econ, omega_prime, st.alpha_prime, st.tariff_margin);
    Vec exogenous_income(n);
    for (int i = 0; i < n; ++i) {
        exogenous_income[i] = w_hat[i] * econ.labor[i] + econ.deficits[i];
        if (const auto* cap = std::get_if<Capped>(&econ.carbon_regime[i]))
            exogenous_income[i] += t_hat[i] * ctx.supply_mult[i] * cap->emission_supply;
    }
    Vec b(nj);
    for (int i = 1; i <= n; ++i)
        for (int jj = 1; jj <= j; ++jj)
            b[econ.dims.flat(i, jj)] =
                st.alpha_prime(i - 1, jj - 1) * exogenous_income[i - 1];
    st.sales_prime = solve_linear(Mat::Identity(nj, nj) - a, b);

    st.income_prime = Vec(n);
    st.w_hat_next = Vec(n);
    st.t_hat_next = t_hat;
    st.e_hat = Vec::Ones(n);
    for (int i = 1; i <= n; ++i) {
        double labor_demand = 0.0, emission_demand = 0.0, revenue = 0.0;
        for (int jj = 1; jj <= j; ++jj) {
            const int f = econ.dims.flat(i, jj);
            labor_demand += econ.beta[f] * (1.0 - econ.rho[f]) * st.sales_prime[f];
            emission_demand += econ.rho[f] * st.sales_prime[f];
            revenue += st.tariff_margin[f] * st.sales_prime[f];
        }
        double emission_income;
        if (const auto* cap = std::get_if<Capped>(&econ.carbon_regime[i - 1])) {
            const double supply = ctx.supply_mult[i - 1] * cap->emission_supply;
            // An empty carbon market (no demand, no supply) clears at any
            // price; keep the baseline one.
            st.t_hat_next[i - 1] = supply > 0.0 ? emission_demand / supply : 1.0;
            st.e_hat[i - 1] = ctx.supply_mult[i - 1];
            emission_income = t_hat[i - 1] * supply;
        } else {
            st.t_hat_next[i - 1] = 1.0;
            st.e_hat[i - 1] = ctx.base.emission_value[i - 1] > 0.0
                                  ? emission_demand / ctx.base.emission_value[i - 1]
                                  : 1.0;
            emission_income = emission_demand;
        }
        st.income_prime[i - 1] =
            w_hat[i - 1] * econ.labor[i - 1] + emission_income + revenue + econ.deficits[i - 1];
        st.w_hat_next[i - 1] = labor_demand / econ.labor[i - 1];
    }
    return st;
}

} // namespace detail

/// Re-derives every equilibrium condition from a solution object and reports
/// the max-abs residual per condition, independently of the iteration path.
/// Monetary residuals are relative to baseline world GNE.
inline std::map<std::string, double> verify_solution(const WorldEconomy& econ,
                                                     const PolicyScenario& scen,
                                                     const HatSolution& sol) {
    const int n = econ.dims.n_countries, j = econ.dims.n_sectors, nj = econ.cells();
    const double one_minus_theta = 1.0 - econ.theta;
    SteadyStateAccounts base = steady_state_accounts(econ);
    const double money = std::max(1.0, base.world_gne);
    Vec supply_mult = scen.emission_supply_multipliers.size()
                          ? scen.emission_supply_multipliers
                          : Vec::Ones(n);

    std::map<std::string, double> res;

    // Wedge reconstruction.
    {
        detail::SolverContext ctx = detail::make_context(econ, scen);
        Mat tau = detail::wedge_matrix(ctx, sol.t_hat);
        res["tariff"] = (tau - sol.tau_tilde_prime).cwiseAbs().maxCoeff();
    }

    // Unit-cost equation.
    double cost_res = 0.0;
    for (int f = 0; f < nj; ++f) {
        const int country = f / j;
        double rhs = std::pow(sol.w_hat[country], econ.beta[f] * (1.0 - econ.rho[f])) *
                     std::pow(sol.P_hat[f], (1.0 - econ.beta[f]) * (1.0 - econ.rho[f])) *
                     std::pow(sol.t_hat[country] * sol.allowance_cost_hat[f], econ.rho[f]);
        cost_res = std::max(cost_res, std::abs(sol.mc_hat[f] - rhs));
    }
    res["input_cost"] = cost_res;

    // Price index and cost shares.
    double pidx_res = 0.0, cshare_res = 0.0;
    Vec mc_pow = sol.mc_hat.array().pow(one_minus_theta);
    for (int d = 0; d < nj; ++d) {
        double acc = 0.0;
        for (int o = 0; o < nj; ++o)
            acc += econ.iota(o, d) * mc_pow[o] *
                   std::pow(sol.tau_tilde_prime(o, d), one_minus_theta);
        pidx_res = std::max(pidx_res,
                            std::abs(sol.P_hat[d] - std::pow(acc, 1.0 / one_minus_theta)));
        for (int o = 0; o < nj; ++o) {
            double share = econ.iota(o, d) * mc_pow[o] *
                           std::pow(sol.tau_tilde_prime(o, d), one_minus_theta) / acc;
            cshare_res = std::max(cshare_res, std::abs(sol.omega_tilde_prime(o, d) - share));
        }
    }
    res["price_index"] = pidx_res;
    res["cost_shares"] = cshare_res;

    // Consumption shares.
    double alpha_res = 0.0;
    const double one_minus_sigma = 1.0 - econ.sigma;
    for (int i = 1; i <= n; ++i) {
        double denom = 0.0;
        for (int jj = 1; jj <= j; ++jj)
            denom += econ.chi(i - 1, jj - 1) *
                     std::pow(sol.p_hat[econ.dims.flat(i, jj)], one_minus_sigma);
        for (int jj = 1; jj <= j; ++jj) {
            double share = econ.chi(i - 1, jj - 1) *
                           std::pow(sol.p_hat[econ.dims.flat(i, jj)], one_minus_sigma) / denom;
            alpha_res = std::max(alpha_res, std::abs(sol.alpha_prime(i - 1, jj - 1) - share));
        }
    }
    res["consumption_shares"] = alpha_res;

    // Goods market at the counterfactual shares and wedges.
    Mat omega_prime = (sol.omega_tilde_prime.array() / sol.tau_tilde_prime.array()).matrix() *
                      econ.gamma_vec().asDiagonal();
    Vec demand = omega_prime * sol.sales_prime;
    for (int i = 1; i <= n; ++i)
        for (int jj = 1; jj <= j; ++jj)
            demand[econ.dims.flat(i, jj)] +=
                sol.alpha_prime(i - 1, jj - 1) * sol.income_prime[i - 1];
    res["goods_market"] = (sol.sales_prime - demand).cwiseAbs().maxCoeff() / money;

    // Tariff revenue per destination country.
    Vec revenue = Vec::Zero(n);
    for (int d = 0; d < nj; ++d) {
        double margin = 0.0;
        if (scen.income_share_mode == IncomeShareMode::Counterfactual) {
            for (int o = 0; o < nj; ++o)
                margin += sol.omega_tilde_prime(o, d) * (1.0 - 1.0 / sol.tau_tilde_prime(o, d));
        } else {
            for (int o = 0; o < nj; ++o)
                margin += (sol.tau_tilde_prime(o, d) - 1.0) * econ.iota(o, d);
        }
        revenue[d / j] += econ.gamma(d) * margin * sol.sales_prime[d];
    }

    // Factor markets, budgets, and world closure.
    double labor_res = 0.0, emis_res = 0.0, budget_res = 0.0;
    double production_side = 0.0;
    for (int i = 1; i <= n; ++i) {
        double labor_demand = 0.0, emission_demand = 0.0;
        for (int jj = 1; jj <= j; ++jj) {
            const int f = econ.dims.flat(i, jj);
            labor_demand += econ.beta[f] * (1.0 - econ.rho[f]) * sol.sales_prime[f];
            emission_demand += econ.rho[f] * sol.sales_prime[f];
            production_side += (1.0 - econ.gamma(f)) * sol.sales_prime[f];
        }
        labor_res = std::max(
            labor_res, std::abs(sol.w_hat[i - 1] * econ.labor[i - 1] - labor_demand) / money);
        double emission_income;
        if (const auto* cap = std::get_if<Capped>(&econ.carbon_regime[i - 1])) {
            const double supply = supply_mult[i - 1] * cap->emission_supply;
            emis_res = std::max(emis_res,
                                std::abs(sol.t_hat[i - 1] * supply - emission_demand) / money);
            emission_income = sol.t_hat[i - 1] * supply;
        } else {
            emis_res = std::max(emis_res, std::abs(sol.e_hat[i - 1] * base.emission_value[i - 1] -
                                                   emission_demand) /
                                              money);
            emission_income = emission_demand;
        }
        double budget = sol.w_hat[i - 1] * econ.labor[i - 1] + emission_income +
                        revenue[i - 1] + econ.deficits[i - 1];
        budget_res = std::max(budget_res, std::abs(sol.income_prime[i - 1] - budget) / money);
    }
    res["labor_market"] = labor_res;
    res["emission_market"] = emis_res;
    res["budget"] = budget_res;
    res["walras"] =
        std::abs(sol.income_prime.sum() - (production_side + revenue.sum())) / money;
    res["numeraire"] = std::abs(sol.income_prime.sum() / base.world_gne - 1.0);
    return res;
}

/// Solves the counterfactual equilibrium in relative changes by dampened
/// fixed-point iteration on wages and Capped carbon prices. Each outer pass
/// re-prices the wedge (endogenous mode), resolves the inner price fixed
/// point, updates shares, solves the sales/income system by dense LU, and
/// applies the damped factor-price update; world nominal GNE is held at its
/// baseline value as the numeraire.
inline HatSolution solve(const WorldEconomy& econ, const PolicyScenario& scen,
                         const std::optional<HatSolution>& warm_start = std::nullopt) {
    {
        SteadyStateReport rep = steady_state_check(econ);
        if (!rep.pass())
            throw InvalidStateError(
                "solve: economy fails the steady-state check (max residual " +
                std::to_string(rep.max_residual()) + "); re-calibrate before solving");
    }
    validate_scenario(econ, scen);

    const int n = econ.dims.n_countries;
    detail::SolverContext ctx = detail::make_context(econ, scen);

    Vec w_hat = Vec::Ones(n), t_hat = Vec::Ones(n);
    Vec mc_warm = Vec::Ones(econ.cells());
    if (warm_start) {
        w_hat = warm_start->w_hat;
        t_hat = warm_start->t_hat;
        mc_warm = warm_start->mc_hat;
        for (int i = 0; i < n; ++i)
            if (is_priced(econ.carbon_regime[i])) t_hat[i] = 1.0;
    }

    Vec e_hat_prev = Vec::Ones(n);
    long iterations = 0;

    for (long outer = 1; outer <= scen.max_iterations; ++outer) {
        iterations = outer;
        detail::IterationState st = detail::evaluate(ctx, w_hat, t_hat, mc_warm);
        mc_warm = st.mc_hat;

        const double scale = ctx.base.world_gne / st.income_prime.sum();
        double gap = std::abs(scale - 1.0);
        for (int i = 0; i < n; ++i) {
            gap = std::max(gap, std::abs(st.w_hat_next[i] - w_hat[i]));
            if (is_capped(econ.carbon_regime[i]))
                gap = std::max(gap, std::abs(st.t_hat_next[i] - t_hat[i]));
            gap = std::max(gap, std::abs(st.e_hat[i] - e_hat_prev[i]));
        }
        e_hat_prev = st.e_hat;

        if (gap < scen.tolerance) {
            // Assemble the solution coherently at the converged factor prices.
            HatSolution sol;
            sol.w_hat = w_hat;
            sol.t_hat = t_hat;
            sol.e_hat = st.e_hat;
            sol.mc_hat = st.mc_hat;
            sol.p_hat = st.mc_hat;
            sol.P_hat = st.P_hat;
            sol.omega_tilde_prime = st.omega_tilde_prime;
            sol.alpha_prime = st.alpha_prime;
            sol.sales_prime = st.sales_prime;
            sol.income_prime = st.income_prime;
            sol.tau_tilde_prime = st.tau_tilde;
            sol.allowance_cost_hat = ctx.f_hat;
            sol.importer_mask = ctx.importers;
            sol.iterations = iterations;
            sol.converged = true;
            sol.world_gne = ctx.base.world_gne;
            sol.residuals = verify_solution(econ, scen, sol);
            return sol;
        }

        // Damped update, then the numeraire rescale.
        for (int i = 0; i < n; ++i) {
            w_hat[i] += scen.damping * (st.w_hat_next[i] - w_hat[i]);
            if (is_capped(econ.carbon_regime[i]))
                t_hat[i] += scen.damping * (st.t_hat_next[i] - t_hat[i]);
        }
        const double rescale = ctx.base.world_gne / st.income_prime.sum();
        for (int i = 0; i < n; ++i) {
            w_hat[i] *= rescale;
            if (is_capped(econ.carbon_regime[i])) t_hat[i] *= rescale;
            if (!(w_hat[i] > 0.0) || !(t_hat[i] > 0.0))
                throw SolveError("solve: factor price iterate became nonpositive in country " +
                                     std::to_string(i + 1) +
                                     "; the calibration is likely invalid",
                                 {}, outer);
        }
    }

    // Not converged: report the residual snapshot at the last iterate.
    HatSolution last;
    last.w_hat = w_hat;
    last.t_hat = t_hat;
    last.e_hat = e_hat_prev;
    last.iterations = iterations;
    last.converged = false;
    std::map<std::string, double> snapshot;
    snapshot["update_gap"] = scen.tolerance;  // placeholder overwritten below
    {
        detail::IterationState st = detail::evaluate(ctx, w_hat, t_hat, mc_warm);
        double gap = 0.0;
        for (int i = 0; i < n; ++i) {
            gap = std::max(gap, std::abs(st.w_hat_next[i] - w_hat[i]));
            if (is_capped(econ.carbon_regime[i]))
                gap = std::max(gap, std::abs(st.t_hat_next[i] - t_hat[i]));
        }
        snapshot["update_gap"] = gap;
    }
    throw SolveError("solve: no convergence after " + std::to_string(iterations) +
                         " outer iterations (last update gap " +
                         std::to_string(snapshot["update_gap"]) + ")",
                     snapshot, iterations);
}

} // namespace cbge
