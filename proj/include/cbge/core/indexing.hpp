#pragma once

#include <string>

#include "cbge/core/common.hpp"

namespace cbge {

/// Index conventions for the N-country, J-sector world.
///
/// Countries and sectors are 1-based in the public API. The flat layout is
/// country-major: (country i, sector j) -> (i-1)*J + (j-1). Every NJ-length
/// vector and NJ x NJ matrix in the library follows this convention, with
/// matrix rows indexing the origin cell and columns the destination cell.
struct Dimensions {
    int n_countries = 0;
    int n_sectors = 0;

    Dimensions() = default;
    Dimensions(int countries, int sectors)
        : n_countries(countries), n_sectors(sectors) {
        if (countries < 2)
            throw ArgumentError("Dimensions: need at least 2 countries, got " +
                                std::to_string(countries));
        if (sectors < 1)
            throw ArgumentError("Dimensions: need at least 1 sector, got " +
                                std::to_string(sectors));
    }

    int size() const { return n_countries * n_sectors; }

    int flat(int country, int sector) const {
        if (country < 1 || country > n_countries)
            throw ArgumentError("flat_index: country " + std::to_string(country) +
                                " out of range 1.." + std::to_string(n_countries));
        if (sector < 1 || sector > n_sectors)
            throw ArgumentError("flat_index: sector " + std::to_string(sector) +
                                " out of range 1.." + std::to_string(n_sectors));
        return (country - 1) * n_sectors + (sector - 1);
    }

    int country_of(int flat_index) const {
        check_flat(flat_index);
        return flat_index / n_sectors + 1;
    }

    int sector_of(int flat_index) const {
        check_flat(flat_index);
        return flat_index % n_sectors + 1;
    }

    bool operator==(const Dimensions& other) const = default;

private:
    void check_flat(int flat_index) const {
        if (flat_index < 0 || flat_index >= size())
            throw ArgumentError("flat index " + std::to_string(flat_index) +
                                " out of range 0.." + std::to_string(size() - 1));
    }
};

} // namespace cbge
