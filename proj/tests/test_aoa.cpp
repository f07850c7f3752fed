#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "jcas/aoa.hpp"
#include "scene_fixture.hpp"

using Catch::Approx;
using namespace jcas;

namespace {

/// Explicit two-source covariance on the reference 8x8 panel (no
/// finite-sample effects): R = sum_k p_k a_k a_k^H + noise * I.
MatrixXcd two_source_covariance(const UpaGeometry& geom, double p1, double p2,
                                double noise) {
    using namespace jcas_test::truth;
    const VectorXcd a1 = steering_vector(geom, {kLosAz, kLosEl});
    const VectorXcd a2 = steering_vector(geom, {kScatterAz, kScatterEl});
    return p1 * a1 * a1.adjoint() + p2 * a2 * a2.adjoint() +
           noise * MatrixXcd::Identity(geom.size(), geom.size());
}

}  // namespace

TEST_CASE("correlation matrix is the snapshot-averaged outer product", "[aoa]") {
    CsiTensor t(2, 1, 2);
    t.snapshot(0, 0) << Cplx{1.0, 0.0}, Cplx{0.0, 1.0};
    t.snapshot(0, 1) << Cplx{2.0, 0.0}, Cplx{0.0, 0.0};
    const MatrixXcd r = correlation_matrix(t);
    // By hand: (h0 h0^H + h1 h1^H) / 2.
    REQUIRE(std::abs(r(0, 0) - Cplx{2.5, 0.0}) < 1e-14);
    REQUIRE(std::abs(r(1, 1) - Cplx{0.5, 0.0}) < 1e-14);
    REQUIRE(std::abs(r(0, 1) - Cplx{0.0, -0.5}) < 1e-14);
    REQUIRE((r - r.adjoint()).norm() < 1e-14);
}

TEST_CASE("correlation matrix ignores per-snapshot unit phases", "[aoa]") {
    std::mt19937_64 rng(11);
    CsiTensor t(4, 8, 6);
    for (Cplx& v : t.data) v = draw_cn(rng, 1.0);
    const MatrixXcd r0 = correlation_matrix(t);

    CsiTensor rotated = t;
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int m = 0; m < t.packets; ++m) {
        for (int n = 0; n < t.subcarriers; ++n) {
            const Cplx rot = std::polar(1.0, u(rng));
            auto snap = rotated.snapshot(n, m);
            snap *= rot;
        }
    }
    const MatrixXcd r1 = correlation_matrix(rotated);
    REQUIRE((r1 - r0).norm() < 1e-13 * r0.norm());
}

TEST_CASE("2D MUSIC recovers both reference AoAs from an explicit covariance", "[aoa]") {
    using namespace jcas_test::truth;
    const UpaGeometry geom = UpaGeometry::half_wavelength(8, 8, 28e9);
    const MatrixXcd r = two_source_covariance(geom, 1.0, 0.36, 0.01);
    const SearchConfig cfg = jcas_test::reference_search().aoa_search();
    const AoaResult res = estimate_aoas(r, geom, cfg);

    REQUIRE(res.model_order == 2);
    REQUIRE(res.noise_power == Approx(0.01).epsilon(1e-6));
    REQUIRE(res.angles.size() == 2);

    // Match each truth angle to its nearest estimate.
    const AnglePair truths[2] = {{kLosAz, kLosEl}, {kScatterAz, kScatterEl}};
    for (const AnglePair& want : truths) {
        double best = 1e9;
        for (const AoaEstimate& e : res.angles) {
            best = std::min(best, angle_between(e.angle, want));
        }
        REQUIRE(best < 1e-6);
    }
    // Exact noise subspace: the spectrum bottoms out at the regularizer level.
    REQUIRE(res.angles[0].spectrum_value < 1.0);
}

TEST_CASE("model order zero yields no angles but reports the spectrum", "[aoa]") {
    const UpaGeometry geom = UpaGeometry::half_wavelength(4, 4, 28e9);
    const MatrixXcd r = MatrixXcd::Identity(16, 16);
    const AoaResult res = estimate_aoas(r, geom, SearchConfig::aoa_defaults());
    REQUIRE(res.model_order == 0);
    REQUIRE(res.angles.empty());
    REQUIRE(res.eigenvalues.size() == 16);
    REQUIRE(res.noise_power == Approx(1.0));
}

TEST_CASE("estimate_aoas validates the array size", "[aoa]") {
    const UpaGeometry geom = UpaGeometry::half_wavelength(4, 4, 28e9);
    REQUIRE_THROWS_AS(estimate_aoas(MatrixXcd::Identity(9, 9), geom,
                                    SearchConfig::aoa_defaults()),
                      std::invalid_argument);
}

TEST_CASE("matched spatial filter has unit norm and full array gain", "[aoa]") {
    using namespace jcas_test::truth;
    const UpaGeometry geom = UpaGeometry::half_wavelength(8, 8, 28e9);
    const AnglePair ang{kLosAz, kLosEl};
    const VectorXcd w = make_spatial_filter(geom, ang);
    REQUIRE(w.norm() == Approx(1.0).epsilon(1e-12));
    const Cplx gain = w.dot(steering_vector(geom, ang));  // w^H a
    REQUIRE(std::abs(gain) == Approx(8.0).epsilon(1e-12));
}

TEST_CASE("LS filter bank nulls the other arrival exactly", "[aoa]") {
    using namespace jcas_test::truth;
    const UpaGeometry geom = UpaGeometry::half_wavelength(8, 8, 28e9);
    const AnglePair ue{kLosAz, kLosEl};
    const AnglePair sc{kScatterAz, kScatterEl};
    const VectorXcd a_ue = steering_vector(geom, ue);
    const VectorXcd a_sc = steering_vector(geom, sc);

    // The two reference arrivals overlap strongly on the 8x8 panel.
    REQUIRE(std::abs(a_sc.dot(a_ue)) == Approx(kSteeringOverlap8).epsilon(1e-9));

    const MatrixXcd bank = make_spatial_filter_bank(geom, {ue, sc});
    REQUIRE(bank.rows() == 64);
    REQUIRE(bank.cols() == 2);
    REQUIRE(bank.col(0).norm() == Approx(1.0).epsilon(1e-12));
    REQUIRE(bank.col(1).norm() == Approx(1.0).epsilon(1e-12));

    REQUIRE(std::abs(bank.col(0).dot(a_ue)) == Approx(kLsBankGain8).epsilon(1e-9));
    REQUIRE(std::abs(bank.col(1).dot(a_sc)) == Approx(kLsBankGain8).epsilon(1e-9));
    REQUIRE(std::abs(bank.col(0).dot(a_sc)) < 1e-10);
    REQUIRE(std::abs(bank.col(1).dot(a_ue)) < 1e-10);
}

TEST_CASE("single-angle LS bank reduces to the matched filter", "[aoa]") {
    const UpaGeometry geom = UpaGeometry::half_wavelength(8, 8, 28e9);
    const AnglePair ang{0.3, 2.0};
    const MatrixXcd bank = make_spatial_filter_bank(geom, {ang});
    const VectorXcd matched = make_spatial_filter(geom, ang);
    REQUIRE((bank.col(0) - matched).norm() < 1e-12);
    REQUIRE_THROWS_AS(make_spatial_filter_bank(geom, {}), std::invalid_argument);
}

TEST_CASE("apply_spatial_filter beamforms every snapshot", "[aoa]") {
    std::mt19937_64 rng(23);
    CsiTensor t(4, 3, 5);
    for (Cplx& v : t.data) v = draw_cn(rng, 1.0);

    // A unit-impulse beam extracts one antenna exactly.
    VectorXcd e2 = VectorXcd::Zero(4);
    e2(2) = Cplx{1.0, 0.0};
    const MatrixXcd h = apply_spatial_filter(t, e2);
    REQUIRE(h.rows() == 3);
    REQUIRE(h.cols() == 5);
    for (int n = 0; n < 3; ++n) {
        for (int m = 0; m < 5; ++m) {
            REQUIRE(std::abs(h(n, m) - t.at(2, n, m)) < 1e-15);
        }
    }
    REQUIRE_THROWS_AS(apply_spatial_filter(t, VectorXcd::Ones(3)), std::invalid_argument);
}
