#include <catch2/catch_amalgamated.hpp>

#include "cbge/core/indexing.hpp"

using namespace cbge;

TEST_CASE("flat index follows the country-major layout") {
    Dimensions big(33, 44);
    CHECK(big.flat(1, 1) == 0);
    CHECK(big.flat(2, 1) == 44);

    Dimensions two(3, 2);
    CHECK(two.flat(3, 2) == 5);
}

TEST_CASE("flat index round-trips over the full range") {
    Dimensions dims(5, 7);
    for (int c = 1; c <= 5; ++c)
        for (int s = 1; s <= 7; ++s) {
            int f = dims.flat(c, s);
            CHECK(dims.country_of(f) == c);
            CHECK(dims.sector_of(f) == s);
        }
    // and the inverse direction
    for (int f = 0; f < dims.size(); ++f)
        CHECK(dims.flat(dims.country_of(f), dims.sector_of(f)) == f);
}

TEST_CASE("out-of-range indices are rejected") {
    Dimensions dims(2, 3);
    CHECK_THROWS_AS(dims.flat(0, 1), ArgumentError);
    CHECK_THROWS_AS(dims.flat(3, 1), ArgumentError);
    CHECK_THROWS_AS(dims.flat(1, 0), ArgumentError);
    CHECK_THROWS_AS(dims.flat(1, 4), ArgumentError);
    CHECK_THROWS_AS(dims.country_of(-1), ArgumentError);
    CHECK_THROWS_AS(dims.country_of(6), ArgumentError);
    CHECK_THROWS_AS(Dimensions(1, 3), ArgumentError);
    CHECK_THROWS_AS(Dimensions(2, 0), ArgumentError);
}
