#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "cbge/core/common.hpp"
#include "cbge/core/indexing.hpp"

namespace cbge {

/// A country with a national carbon market: emission supply is fixed
/// (in baseline value units, i.e. at a unit carbon price) and the permit
/// price clears the market.
struct Capped {
    double emission_supply = 0.0;
};

/// A country without a national carbon market: the carbon price is pinned
/// at an exogenous level and emission supply adjusts.
struct Priced {
    double price = 0.0;
};

using CarbonRegime = std::variant<Capped, Priced>;

inline bool is_capped(const CarbonRegime& r) { return std::holds_alternative<Capped>(r); }
inline bool is_priced(const CarbonRegime& r) { return std::holds_alternative<Priced>(r); }

/// Sector classification: ETS coverage defines the "dirty" goods and the
/// full-CBAM scope; the reduced-CBAM scope is a subset of ETS sectors.
struct SectorTaxonomy {
    BoolVec ets_flag;
    BoolVec cbam_reduced_flag;

    void validate(int n_sectors) const {
        if (static_cast<int>(ets_flag.size()) != n_sectors ||
            static_cast<int>(cbam_reduced_flag.size()) != n_sectors)
            throw InvalidStateError("SectorTaxonomy: flag lengths do not match sector count");
        for (int j = 0; j < n_sectors; ++j)
            if (cbam_reduced_flag[j] && !ets_flag[j])
                throw InvalidStateError("SectorTaxonomy: reduced-CBAM sector " +
                                        std::to_string(j + 1) + " is not an ETS sector");
    }
};

/// Calibrated parameters of the world economy at its steady state.
///
/// All monetary fields are in one world currency unit, normalized so that
/// baseline prices, wages, and carbon prices equal one. `labor` is the
/// per-country labor endowment valued at the unit wage; a Capped country's
/// `emission_supply` is its permit endowment valued at the unit carbon
/// price. `observed_carbon_price` carries its own currency-per-ton unit and
/// is used only to form cross-country price ratios and to anchor physical
/// emissions. Instances are immutable after construction; operations on
/// them are pure functions, so sharing across threads is safe.
struct WorldEconomy {
    Dimensions dims;

    /// Steady-state input weights iota, rows = origin cell, cols = destination
    /// cell; every column sums to one.
    Mat iota;
    Vec beta;           ///< labor share per cell, in (0,1)
    Vec rho;            ///< emissions elasticity per cell, in [0,1)
    Mat chi;            ///< consumption weights, N x J, rows sum to one
    Vec labor;          ///< endowment per country, valued at unit wage
    Vec deficits;       ///< exogenous trade deficits, sum exactly zero
    std::vector<CarbonRegime> carbon_regime;
    Vec free_alloc;     ///< free allowance share per cell, in [0,1)
    Vec observed_carbon_price;  ///< currency per ton, per country
    Vec emissions_tons; ///< baseline physical emissions per cell (tons)
    double theta = 4.0; ///< substitution elasticity between intermediates
    double sigma = 4.0; ///< substitution elasticity between final goods
    SectorTaxonomy taxonomy;
    BoolVec eu_mask;    ///< ETS-area membership per country

    std::vector<std::string> country_names;
    std::vector<std::string> sector_names;

    int cells() const { return dims.size(); }

    double gamma(int flat) const { return (1.0 - beta[flat]) * (1.0 - rho[flat]); }

    Vec gamma_vec() const {
        return ((1.0 - beta.array()) * (1.0 - rho.array())).matrix();
    }

    const std::string& country_name(int country) const { return country_names[country - 1]; }
    const std::string& sector_name(int sector) const { return sector_names[sector - 1]; }

    /// Checks every construction invariant; throws InvalidStateError with the
    /// offending field on the first violation.
    void validate() const;

    /// Returns a copy with a different intermediate-input elasticity. The
    /// steady state does not depend on theta, so the copy is valid as-is.
    WorldEconomy with_theta(double new_theta) const {
        WorldEconomy e = *this;
        e.theta = new_theta;
        e.validate();
        return e;
    }
};

inline void WorldEconomy::validate() const {
    const int n = dims.n_countries, j = dims.n_sectors, nj = dims.size();
    if (n < 2 || j < 1) throw InvalidStateError("WorldEconomy: bad dimensions");
    auto want = [&](Eigen::Index got, Eigen::Index need, const char* field) {
        if (got != need)
            throw InvalidStateError(std::string("WorldEconomy: ") + field + " has length " +
                                    std::to_string(got) + ", expected " + std::to_string(need));
    };
    want(iota.rows(), nj, "iota rows");
    want(iota.cols(), nj, "iota cols");
    want(beta.size(), nj, "beta");
    want(rho.size(), nj, "rho");
    want(chi.rows(), n, "chi rows");
    want(chi.cols(), j, "chi cols");
    want(labor.size(), n, "labor");
    want(deficits.size(), n, "deficits");
    want(static_cast<Eigen::Index>(carbon_regime.size()), n, "carbon_regime");
    want(free_alloc.size(), nj, "free_alloc");
    want(observed_carbon_price.size(), n, "observed_carbon_price");
    want(emissions_tons.size(), nj, "emissions_tons");
    want(static_cast<Eigen::Index>(eu_mask.size()), n, "eu_mask");
    want(static_cast<Eigen::Index>(country_names.size()), n, "country_names");
    want(static_cast<Eigen::Index>(sector_names.size()), j, "sector_names");
    taxonomy.validate(j);

    if (!(theta > 1.0)) throw InvalidStateError("WorldEconomy: theta must exceed 1");
    if (!(sigma > 1.0)) throw InvalidStateError("WorldEconomy: sigma must exceed 1");

    if ((iota.array() < 0.0).any())
        throw InvalidStateError("WorldEconomy: iota has negative entries");
    for (int d = 0; d < nj; ++d) {
        double colsum = iota.col(d).sum();
        if (std::abs(colsum - 1.0) > 1e-9)
            throw InvalidStateError("WorldEconomy: iota column for cell " + std::to_string(d) +
                                    " sums to " + std::to_string(colsum) + ", expected 1");
    }
    for (int f = 0; f < nj; ++f) {
        if (!(beta[f] > 0.0 && beta[f] < 1.0))
            throw InvalidStateError("WorldEconomy: beta out of (0,1) at cell " + std::to_string(f));
        if (!(rho[f] >= 0.0 && rho[f] < 1.0))
            throw InvalidStateError("WorldEconomy: rho out of [0,1) at cell " + std::to_string(f));
        if (!(free_alloc[f] >= 0.0 && free_alloc[f] < 1.0))
            throw InvalidStateError("WorldEconomy: free_alloc out of [0,1) at cell " +
                                    std::to_string(f));
        if (emissions_tons[f] < 0.0)
            throw InvalidStateError("WorldEconomy: negative emissions_tons at cell " +
                                    std::to_string(f));
    }
    if ((chi.array() < 0.0).any())
        throw InvalidStateError("WorldEconomy: chi has negative entries");
    for (int i = 0; i < n; ++i) {
        double rowsum = chi.row(i).sum();
        if (std::abs(rowsum - 1.0) > 1e-9)
            throw InvalidStateError("WorldEconomy: chi row for country " + std::to_string(i + 1) +
                                    " sums to " + std::to_string(rowsum) + ", expected 1");
        if (!(labor[i] > 0.0))
            throw InvalidStateError("WorldEconomy: nonpositive labor endowment in country " +
                                    std::to_string(i + 1));
        if (observed_carbon_price[i] < 0.0)
            throw InvalidStateError("WorldEconomy: negative observed carbon price in country " +
                                    std::to_string(i + 1));
        if (const auto* cap = std::get_if<Capped>(&carbon_regime[i]); cap && cap->emission_supply < 0.0)
            throw InvalidStateError("WorldEconomy: negative emission supply in country " +
                                    std::to_string(i + 1));
        if (const auto* pr = std::get_if<Priced>(&carbon_regime[i]); pr && pr->price < 0.0)
            throw InvalidStateError("WorldEconomy: negative exogenous carbon price in country " +
                                    std::to_string(i + 1));
    }
    double dsum = compensated_sum(deficits);
    double dscale = deficits.cwiseAbs().sum();
    if (std::abs(dsum) > 1e-9 * std::max(1.0, dscale))
        throw InvalidStateError("WorldEconomy: deficits sum to " + std::to_string(dsum) +
                                ", expected 0");
}

} // namespace cbge
