#pragma once

#include <string>
#include <vector>

#include "cbge/core/common.hpp"
#include "cbge/core/economy.hpp"

namespace cbge {

/// Raw input-output extract: bilateral intermediate flows, final-demand
/// flows by origin and destination country, and the output/value-added
/// margins. All values in one currency unit.
struct RawIoTable {
    Mat intermediate_flows;  ///< NJ x NJ, origin cell by destination cell
    Mat final_flows;         ///< NJ x N, origin cell by destination country
    Vec gross_output;        ///< NJ
    Vec value_added;         ///< NJ

    void validate(const Dimensions& dims) const {
        const int nj = dims.size(), n = dims.n_countries;
        if (intermediate_flows.rows() != nj || intermediate_flows.cols() != nj ||
            final_flows.rows() != nj || final_flows.cols() != n ||
            gross_output.size() != nj || value_added.size() != nj)
            throw CalibrationError("RawIoTable: dimension mismatch");
        if ((intermediate_flows.array() < 0.0).any() || (final_flows.array() < 0.0).any() ||
            (gross_output.array() < 0.0).any() || (value_added.array() < 0.0).any())
            throw CalibrationError("RawIoTable: negative entries");
        for (int f = 0; f < nj; ++f)
            if (gross_output[f] > 0.0 && gross_output[f] < value_added[f])
                throw CalibrationError("RawIoTable: value added exceeds gross output at cell " +
                                       std::to_string(f));
    }
};

/// Emission quantities and carbon-price data.
struct EmissionsInputs {
    Vec scope1_emissions;       ///< NJ, tons CO2e (permit-priced coverage)
    Vec effective_carbon_rate;  ///< N, currency per ton
    Vec free_allowance_share;   ///< NJ, in [0,1)

    void validate(const Dimensions& dims) const {
        if (scope1_emissions.size() != dims.size() ||
            effective_carbon_rate.size() != dims.n_countries ||
            free_allowance_share.size() != dims.size())
            throw CalibrationError("EmissionsInputs: dimension mismatch");
        if ((scope1_emissions.array() < 0.0).any())
            throw CalibrationError("EmissionsInputs: negative emissions");
        if ((effective_carbon_rate.array() < 0.0).any())
            throw CalibrationError("EmissionsInputs: negative carbon rate");
        if ((free_allowance_share.array() < 0.0).any() ||
            (free_allowance_share.array() >= 1.0).any())
            throw CalibrationError("EmissionsInputs: free allowance share outside [0,1)");
    }
};

/// Country metadata accompanying the carbon-price file.
struct CountryRecord {
    std::string name;
    bool capped = false;  ///< has a national carbon market
    bool eu_ets = false;  ///< belongs to the ETS area
};

/// Everything the calibration stage consumes, as loaded from disk.
struct CalibrationInput {
    Dimensions dims;
    RawIoTable io;
    EmissionsInputs emissions;
    SectorTaxonomy taxonomy;
    std::vector<CountryRecord> countries;
    std::vector<std::string> sector_names;
    double theta = 4.0;
    double sigma = 4.0;
};

} // namespace cbge
