#include <catch2/catch_amalgamated.hpp>

#include "jcas/geometry.hpp"
#include "scene_fixture.hpp"

using Catch::Approx;
using namespace jcas;

TEST_CASE("half-wavelength factory and steering phase law", "[geometry]") {
    const UpaGeometry g = UpaGeometry::half_wavelength(2, 3, 28e9);
    REQUIRE(g.size() == 6);
    REQUIRE(g.wavelength() == Approx(kSpeedOfLight / 28e9));
    REQUIRE(g.spacing == Approx(0.5 * g.wavelength()));

    const AnglePair ang{deg2rad(30.0), deg2rad(60.0)};
    const VectorXcd a = steering_vector(g, ang);
    REQUIRE(a.size() == 6);
    const double ux = std::cos(ang.azimuth) * std::sin(ang.elevation);
    const double uy = std::sin(ang.azimuth) * std::sin(ang.elevation);
    for (int p = 0; p < g.rows; ++p) {
        for (int q = 0; q < g.cols; ++q) {
            const Cplx want = std::polar(1.0, -kPi * (p * ux + q * uy));
            REQUIRE(std::abs(a(p * g.cols + q) - want) < 1e-14);
        }
    }
    REQUIRE(a(0) == Cplx{1.0, 0.0});  // reference element carries no phase
    for (int i = 0; i < a.size(); ++i) REQUIRE(std::abs(a(i)) == Approx(1.0));
}

TEST_CASE("steering degenerates at zenith and validates its inputs", "[geometry]") {
    const UpaGeometry g = UpaGeometry::half_wavelength(4, 4, 28e9);
    const VectorXcd zenith = steering_vector(g, {1.234, 0.0});
    for (int i = 0; i < zenith.size(); ++i) {
        REQUIRE(std::abs(zenith(i) - Cplx{1.0, 0.0}) < 1e-15);
    }

    UpaGeometry empty = g;
    empty.rows = 0;
    REQUIRE_THROWS_AS(steering_vector(empty, {0.0, 1.0}), std::invalid_argument);
    UpaGeometry no_carrier = g;
    no_carrier.carrier_hz = 0.0;
    REQUIRE_THROWS_AS(steering_vector(no_carrier, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("free-space path gains", "[geometry]") {
    const double lambda = kSpeedOfLight / 28e9;
    using namespace jcas_test::truth;
    REQUIRE(path_gain_los(lambda, kLosRange) == Approx(kLosGain).epsilon(1e-12));
    REQUIRE(path_gain_nlos(lambda, kScatterLeg1, kScatterLeg2) ==
            Approx(kNlosGain).epsilon(1e-12));
    REQUIRE_THROWS_AS(path_gain_los(lambda, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(path_gain_nlos(lambda, 1.0, -2.0), std::invalid_argument);
}

TEST_CASE("derive_paths reproduces the reference-scene truth", "[geometry]") {
    using namespace jcas_test::truth;
    const SceneConfig scene = jcas_test::reference_scene();
    const auto paths = derive_paths(scene);
    REQUIRE(paths.size() == 2);

    const PathParams& los = paths[0];
    REQUIRE(los.is_los);
    REQUIRE(los.scatterer_index == -1);
    REQUIRE(los.aggregate_range == Approx(kLosRange).epsilon(1e-12));
    REQUIRE(los.delay == Approx(kLosRange / kSpeedOfLight).epsilon(1e-12));
    REQUIRE(los.doppler_hz == Approx(kLosDoppler).epsilon(1e-10));
    REQUIRE(los.aoa.azimuth == Approx(kLosAz).margin(1e-12));
    REQUIRE(los.aoa.elevation == Approx(kLosEl).margin(1e-12));
    // Departure direction is the arrival direction seen from the other end.
    REQUIRE(los.aod.azimuth == Approx(kPi + kLosAz).margin(1e-12));
    REQUIRE(los.aod.elevation == Approx(kPi - kLosEl).margin(1e-12));
    REQUIRE(los.gain == Approx(kLosGain).epsilon(1e-12));

    const PathParams& nlos = paths[1];
    REQUIRE_FALSE(nlos.is_los);
    REQUIRE(nlos.scatterer_index == 0);
    REQUIRE(nlos.aggregate_range == Approx(kAggregateRange).epsilon(1e-12));
    REQUIRE(nlos.doppler_hz == Approx(kScatterDoppler).epsilon(1e-10));
    REQUIRE(nlos.aoa.azimuth == Approx(kScatterAz).margin(1e-12));
    REQUIRE(nlos.aoa.elevation == Approx(kScatterEl).margin(1e-12));
    REQUIRE(nlos.gain == Approx(kNlosGain).epsilon(1e-12));
    REQUIRE(nlos.reflection_var == Approx(10.0));
}

TEST_CASE("Doppler sign follows the closing-positive convention", "[geometry]") {
    SceneConfig scene = jcas_test::reference_scene();
    scene.scatterers.clear();
    // UE already moves toward the BS: positive LoS Doppler.
    REQUIRE(derive_paths(scene)[0].doppler_hz > 0.0);
    // Reverse the velocity: the UE recedes and the shift flips sign exactly.
    scene.ue_velocity = -scene.ue_velocity;
    REQUIRE(derive_paths(scene)[0].doppler_hz ==
            Approx(-jcas_test::truth::kLosDoppler).epsilon(1e-10));
}

TEST_CASE("derive_paths rejects degenerate geometry", "[geometry]") {
    SceneConfig scene = jcas_test::reference_scene();
    scene.ue_position = scene.bs_position;
    REQUIRE_THROWS_AS(derive_paths(scene), std::invalid_argument);

    SceneConfig scene2 = jcas_test::reference_scene();
    scene2.scatterers[0].position = scene2.ue_position;
    REQUIRE_THROWS_AS(derive_paths(scene2), std::invalid_argument);
}

TEST_CASE("angle helpers round trip", "[geometry]") {
    const AnglePair p{0.7, 2.1};
    const AnglePair q = angles_from_unit(unit_from_angles(p));
    REQUIRE(q.azimuth == Approx(p.azimuth).margin(1e-12));
    REQUIRE(q.elevation == Approx(p.elevation).margin(1e-12));
    REQUIRE(angle_between(p, p) == Approx(0.0).margin(1e-7));
    REQUIRE(angle_between({0.0, kPi / 2.0}, {kPi / 2.0, kPi / 2.0}) ==
            Approx(kPi / 2.0).epsilon(1e-12));
    REQUIRE_THROWS_AS(angles_from_unit(Vector3d::Zero()), std::invalid_argument);
}
