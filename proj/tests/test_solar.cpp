#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sunbroker/solar.hpp"

using namespace sunbroker;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("geo location bounds enforced at construction") {
    CHECK_NOTHROW(GeoLocation(41.53, 2.23));
    CHECK_NOTHROW(GeoLocation(-90.0, 180.0));
    CHECK_THROWS_AS(GeoLocation(90.1, 0.0), DomainError);
    CHECK_THROWS_AS(GeoLocation(0.0, -180.1), DomainError);
}

TEST_CASE("plant config bounds enforced at construction") {
    GeoLocation bcn{41.4, 2.2};
    CHECK_NOTHROW(PlantConfig(bcn, 0.0, 180.0, 380.0, 0.2261));
    CHECK_THROWS_AS(PlantConfig(bcn, 91.0, 180.0, 1.0, 0.1), DomainError);
    CHECK_THROWS_AS(PlantConfig(bcn, 0.0, 360.0, 1.0, 0.1), DomainError);
    CHECK_THROWS_AS(PlantConfig(bcn, 0.0, 180.0, 0.0, 0.1), DomainError);
    CHECK_THROWS_AS(PlantConfig(bcn, 0.0, 180.0, 1.0, 1.0), DomainError);
}

TEST_CASE("solar position at the equator near equinox noon is close to zenith") {
    GeoLocation loc{0.0, 0.0};
    auto pos = solar_position(loc, make_utc(2016, 3, 20, 12, 0));
    CHECK(pos.elevation >= 85.0);
    CHECK(pos.elevation <= 90.0);
}

TEST_CASE("sun below horizon at local midnight") {
    GeoLocation loc{41.4, 2.2};
    for (unsigned month : {1u, 4u, 7u, 10u}) {
        auto pos = solar_position(loc, make_utc(2020, month, 15, 0, 0));
        CHECK(pos.elevation < 0.0);
    }
}

TEST_CASE("polar night: no sun at 89.9N in mid-December") {
    GeoLocation loc{89.9, 0.0};
    auto pos = solar_position(loc, make_utc(2019, 12, 15, 12, 0));
    CHECK(pos.elevation < 0.0);
}

TEST_CASE("solar position is deterministic and zenith complements elevation") {
    GeoLocation loc{41.53, 2.23};
    auto t = make_utc(2016, 7, 1, 12, 0);
    auto a = solar_position(loc, t);
    auto b = solar_position(loc, t);
    CHECK(a.elevation == b.elevation);
    CHECK(a.azimuth == b.azimuth);
    CHECK(a.zenith() + a.elevation == 90.0);
}

TEST_CASE("timestamps outside 1950-2100 are rejected") {
    GeoLocation loc{0.0, 0.0};
    CHECK_THROWS_AS(solar_position(loc, make_utc(1949, 12, 31, 23, 59)), DomainError);
    CHECK_THROWS_AS(solar_position(loc, make_utc(2101, 1, 1, 0, 0)), DomainError);
    CHECK_NOTHROW(solar_position(loc, make_utc(1950, 1, 1, 0, 0)));
    CHECK_NOTHROW(solar_position(loc, make_utc(2100, 12, 31, 23, 0)));
}

// Noon elevation must equal 90 - |lat - declination|. Cooper's formula gives
// an independent declination estimate good to about a degree.
TEST_CASE("noon elevation matches first-principles declination geometry") {
    auto cooper_decl = [](int day_of_year) {
        return 23.45 * std::sin(2.0 * std::numbers::pi * (284.0 + day_of_year) / 365.0);
    };
    struct Case {
        int y, doy;
        unsigned mo, d;
    };
    for (auto c : {Case{2018, 172, 6, 21}, Case{2018, 355, 12, 21}, Case{2018, 80, 3, 21}}) {
        GeoLocation loc{45.0, 0.0};
        // scan around noon UTC for the daily maximum (equation of time shifts it)
        double best = -90.0;
        for (int m = -30; m <= 30; m += 5) {
            auto t = make_utc(c.y, c.mo, c.d, 12, 0) + std::chrono::minutes{m};
            best = std::max(best, solar_position(loc, t).elevation);
        }
        const double expected = 90.0 - std::abs(45.0 - cooper_decl(c.doy));
        CHECK_THAT(best, WithinAbs(expected, 1.0));
    }
}

TEST_CASE("azimuth quadrants: east in the morning, south at noon, west in the evening") {
    GeoLocation loc{41.4, 2.2};
    auto morning = solar_position(loc, make_utc(2020, 6, 21, 6, 0));
    auto noon = solar_position(loc, make_utc(2020, 6, 21, 12, 0));
    auto evening = solar_position(loc, make_utc(2020, 6, 21, 18, 0));
    CHECK(morning.azimuth > 0.0);
    CHECK(morning.azimuth < 180.0);
    CHECK_THAT(noon.azimuth, WithinAbs(180.0, 15.0));
    CHECK(evening.azimuth > 180.0);
    CHECK(evening.azimuth < 360.0);
}

TEST_CASE("haurwitz clear-sky GHI at zenith") {
    CHECK_THAT(haurwitz_ghi(0.0), WithinAbs(1037.1642881644427, 1e-9));
    CHECK(haurwitz_ghi(90.0) == 0.0);
    CHECK(haurwitz_ghi(120.0) == 0.0);
}

TEST_CASE("clear-sky power is zero at local midnight") {
    PlantConfig plant{GeoLocation{41.4, 2.2}, 0.0, 180.0, 1.0, 0.0};
    CHECK(clearsky_poa(plant, make_utc(2020, 7, 1, 0, 0)) == 0.0);
}

TEST_CASE("clear-sky power clips to nominal power near an overhead sun") {
    // At the equator near equinox noon the Haurwitz GHI slightly exceeds
    // 1 kW/m2, so a lossless plant saturates at p_mpp.
    PlantConfig plant{GeoLocation{0.0, 0.0}, 0.0, 180.0, 1.0, 0.0};
    CHECK(clearsky_poa(plant, make_utc(2016, 3, 20, 12, 0)) == 1.0);
}

TEST_CASE("clear-sky power is linear in nominal power before clipping") {
    GeoLocation loc{41.4, 2.2};
    auto t = make_utc(2020, 7, 1, 11, 0);
    PlantConfig small{loc, 0.0, 180.0, 1.0, 0.5};
    PlantConfig big{loc, 0.0, 180.0, 2.0, 0.5};
    const double p1 = clearsky_poa(small, t);
    REQUIRE(p1 > 0.0);
    REQUIRE(p1 < 0.6); // unclipped at 50% loss
    CHECK(clearsky_poa(big, t) == 2.0 * p1);
}

TEST_CASE("clear-sky power is zero whenever the sun is below the horizon") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> lat(-90.0, 90.0), lon(-180.0, 180.0);
    std::uniform_int_distribution<int> day(0, 364), hour(0, 23);
    for (int i = 0; i < 300; ++i) {
        GeoLocation loc{lat(rng), lon(rng)};
        auto t = make_utc(2021, 1, 1, unsigned(hour(rng)), 0) + std::chrono::days{day(rng)};
        PlantConfig plant{loc, 30.0, 180.0, 5.0, 0.1};
        auto pos = solar_position(loc, t);
        const double kw = clearsky_poa(plant, t);
        CHECK(kw >= 0.0);
        CHECK(kw <= plant.p_mpp);
        if (pos.elevation <= 0.0) CHECK(kw == 0.0);
    }
}

TEST_CASE("psh of constant full irradiance equals the hour count") {
    std::vector<IrradianceSample> s;
    auto t0 = make_utc(2020, 6, 1, 0, 0);
    for (int i = 0; i < 3; ++i) s.push_back({t0 + std::chrono::hours{i}, 1000.0});
    CHECK(psh_total(s) == 3.0);

    std::vector<IrradianceSample> day;
    for (int i = 0; i < 24; ++i) day.push_back({t0 + std::chrono::hours{i}, 1000.0});
    CHECK(psh_total(day) == 24.0);
}

TEST_CASE("psh of all-zero night samples is zero") {
    std::vector<IrradianceSample> s;
    auto t0 = make_utc(2020, 6, 1, 0, 0);
    for (int i = 0; i < 8; ++i) s.push_back({t0 + std::chrono::hours{i}, 0.0});
    CHECK(psh_total(s) == 0.0);
}

TEST_CASE("psh is additive over consecutive disjoint series") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> poa(0.0, 1100.0);
    std::vector<IrradianceSample> all;
    auto t0 = make_utc(2019, 3, 1, 0, 0);
    for (int i = 0; i < 100; ++i) all.push_back({t0 + std::chrono::hours{i}, poa(rng)});
    std::span<const IrradianceSample> a(all.data(), 40), b(all.data() + 40, 60);
    CHECK_THAT(psh_total(a) + psh_total(b), WithinAbs(psh_total(all), 1e-9));
}

TEST_CASE("psh rejects empty and unordered series") {
    CHECK_THROWS_AS(psh_total(std::vector<IrradianceSample>{}), Error);
    std::vector<IrradianceSample> bad = {{make_utc(2020, 1, 1, 5, 0), 100.0},
                                         {make_utc(2020, 1, 1, 4, 0), 100.0}};
    CHECK_THROWS_AS(psh_total(bad), Error);
}

TEST_CASE("psh summary groups by year with mean and std") {
    std::vector<IrradianceSample> s = {{make_utc(2015, 6, 1, 12, 0), 1000.0},
                                       {make_utc(2016, 6, 1, 12, 0), 2000.0}};
    auto sum = psh_summary(s, Period::year);
    CHECK(sum.psh == 3.0);
    CHECK(sum.mean == 1.5);
    CHECK_THAT(sum.std, WithinAbs(std::sqrt(0.5), 1e-12));

    auto groups = psh_by_period(s, Period::year);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].label == "2015");
    CHECK(groups[1].label == "2016");
}

TEST_CASE("annual energy reproduces the reference site yields") {
    CHECK_THAT(annual_energy(1670.7, 1.0, 0.7739), WithinAbs(1293.0, 0.5));
    CHECK_THAT(annual_energy(1968.8, 1.0, 0.7840), WithinAbs(1543.4, 0.5));
    CHECK(annual_energy(0.0, 1.0, 0.5) == 0.0);
    CHECK_THROWS_AS(annual_energy(-1.0, 1.0, 0.5), DomainError);
    CHECK_THROWS_AS(annual_energy(100.0, -1.0, 0.5), DomainError);
    CHECK_THROWS_AS(annual_energy(100.0, 1.0, 1.5), DomainError);
}

TEST_CASE("annual energy is exactly linear under power-of-two scaling") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> psh(1.0, 2500.0), pm(0.1, 500.0), eta(0.1, 1.0);
    for (int i = 0; i < 100; ++i) {
        double h = psh(rng), p = pm(rng), e = eta(rng);
        CHECK(annual_energy(h, 2.0 * p, e) == 2.0 * annual_energy(h, p, e));
        CHECK(annual_energy(h, 0.5 * p, e) == 0.5 * annual_energy(h, p, e));
    }
}

TEST_CASE("derived system efficiency matches the reference sites") {
    CHECK_THAT(derive_eta_sys(1293.0, 1670.7, 1.0), WithinAbs(0.7739, 1e-4));
    CHECK_THAT(derive_eta_sys(1543.4, 1968.8, 1.0), WithinAbs(0.7840, 1e-4));
    CHECK(derive_eta_sys(100.0, 100.0, 1.0) == 1.0);
    CHECK_THROWS_AS(derive_eta_sys(1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("derive_eta_sys inverts annual_energy") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> psh(1.0, 2500.0), pm(0.1, 500.0), eta(0.05, 1.0);
    for (int i = 0; i < 200; ++i) {
        double h = psh(rng), p = pm(rng), e = eta(rng);
        CHECK_THAT(derive_eta_sys(annual_energy(h, p, e), h, p), WithinAbs(e, 1e-12));
    }
}
