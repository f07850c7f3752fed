#ifndef JCAS_AOA_HPP
#define JCAS_AOA_HPP

/**
 * @file aoa.hpp
 * @brief Spatial-correlation 2D MUSIC AoA estimation and per-angle spatial filtering.
 *
 * The antenna correlation matrix R_x = sum_{n,m} h h^H / (N_c M_s) discards the
 * per-snapshot phase, which makes the AoA stage exactly invariant to timing and
 * carrier-frequency offsets: multiplying any snapshot by a unit-modulus scalar
 * leaves R_x unchanged bit-for-bit up to rounding.
 */

#include <vector>

#include "jcas/channel.hpp"
#include "jcas/geometry.hpp"
#include "jcas/subspace.hpp"

namespace jcas {

/// Snapshot-averaged antenna correlation matrix (Hermitian PSD, A x A).
inline MatrixXcd correlation_matrix(const CsiTensor& h) {
    const int A = h.antennas;
    const Eigen::Index snaps =
        static_cast<Eigen::Index>(h.subcarriers) * static_cast<Eigen::Index>(h.packets);
    if (A < 1 || snaps < 1) {
        throw std::invalid_argument("correlation_matrix: empty tensor");
    }
    Eigen::Map<const MatrixXcd> snapshots(h.data.data(), A, snaps);
    MatrixXcd R = MatrixXcd::Zero(A, A);
    R.selfadjointView<Eigen::Lower>().rankUpdate(snapshots, 1.0 / static_cast<double>(snaps));
    return R.selfadjointView<Eigen::Lower>();
}

struct AoaEstimate {
    AnglePair angle;
    double spectrum_value = 0.0;  ///< MUSIC objective at the refined minimum
    bool newton_ok = true;
};

struct AoaResult {
    std::vector<AoaEstimate> angles;  ///< ascending spectrum value (deepest first)
    int model_order = 0;              ///< N_A from the eigenvalue gap rule
    double noise_power = 0.0;         ///< sigma_hat^2 from the sub-noise eigenvalues
    VectorXd eigenvalues;             ///< descending, for diagnostics
};

namespace detail {

/// Diagonal phase-derivative weights of the UPA response at (az, el).
struct UpaDerivWeights {
    VectorXd g_az, g_el, g_azaz, g_azel;  // g_elel == g_azaz

    UpaDerivWeights(const UpaGeometry& geom, const AnglePair& ang) {
        const double kappa = 2.0 * kPi * geom.spacing / geom.wavelength();
        const double se = std::sin(ang.elevation), ce = std::cos(ang.elevation);
        const double ca = std::cos(ang.azimuth), sa = std::sin(ang.azimuth);
        const int n = geom.size();
        g_az.resize(n);
        g_el.resize(n);
        g_azaz.resize(n);
        g_azel.resize(n);
        for (int p = 0; p < geom.rows; ++p) {
            for (int q = 0; q < geom.cols; ++q) {
                const int i = p * geom.cols + q;
                const double u = p * ca + q * sa;
                const double w = p * sa - q * ca;
                g_az(i) = kappa * se * w;
                g_el(i) = -kappa * ce * u;
                g_azaz(i) = kappa * se * u;
                g_azel(i) = kappa * ce * w;
            }
        }
    }
};

}  // namespace detail

/**
 * @brief 2D MUSIC with eigenvalue-gap model order and Newton-refined peaks.
 *
 * The search domain comes from @c cfg (axis 0 azimuth, axis 1 elevation).
 * Because the UPA phase depends only on the direction cosines
 * (sin(el)cos(az), sin(el)sin(az)), elevations el and pi-el alias; the domain
 * must stay inside one hemisphere.  With model order 0 the angle list is
 * empty but order/noise power are still reported.  @c snapshots is the number
 * of snapshots averaged into @c R (see estimate_model_order; 0 = unknown).
 */
inline AoaResult estimate_aoas(const MatrixXcd& R, const UpaGeometry& geom,
                               const SearchConfig& cfg, int snapshots = 0) {
    if (R.rows() != geom.size()) {
        throw std::invalid_argument("estimate_aoas: correlation size does not match array");
    }
    const EigResult eig = herm_eig(R);
    AoaResult out;
    out.eigenvalues = eig.values;
    out.model_order = estimate_model_order(eig.values, 1.0, snapshots);
    out.noise_power = estimate_noise_power(eig.values, out.model_order);
    if (out.model_order == 0) return out;

    const NoiseProjector proj(eig.signal_subspace(out.model_order));

    auto make_a = [&](const Eigen::Vector2d& x) {
        return steering_vector(geom, {x(0), x(1)});
    };
    auto f = [&](const Eigen::Vector2d& x) { return proj.spectrum(make_a(x)); };
    auto grad = [&](const Eigen::Vector2d& x) {
        const VectorXcd a = make_a(x);
        const detail::UpaDerivWeights d(geom, {x(0), x(1)});
        Eigen::Vector2d g;
        g(0) = -2.0 * std::imag(proj.quad(a, d.g_az.asDiagonal() * a));
        g(1) = -2.0 * std::imag(proj.quad(a, d.g_el.asDiagonal() * a));
        return g;
    };
    auto hess = [&](const Eigen::Vector2d& x) {
        const VectorXcd a = make_a(x);
        const detail::UpaDerivWeights d(geom, {x(0), x(1)});
        const VectorXcd a_az = d.g_az.asDiagonal() * a;
        const VectorXcd a_el = d.g_el.asDiagonal() * a;
        Eigen::Matrix2d H;
        H(0, 0) = 2.0 * std::real(proj.quad(a_az, a_az)) -
                  2.0 * std::imag(proj.quad(a, d.g_azaz.asDiagonal() * a)) -
                  2.0 * std::real(proj.quad(a, (d.g_az.cwiseProduct(d.g_az)).asDiagonal() * a));
        H(1, 1) = 2.0 * std::real(proj.quad(a_el, a_el)) -
                  2.0 * std::imag(proj.quad(a, d.g_azaz.asDiagonal() * a)) -
                  2.0 * std::real(proj.quad(a, (d.g_el.cwiseProduct(d.g_el)).asDiagonal() * a));
        H(0, 1) = 2.0 * std::real(proj.quad(a_el, a_az)) -
                  2.0 * std::imag(proj.quad(a, d.g_azel.asDiagonal() * a)) -
                  2.0 * std::real(proj.quad(a, (d.g_az.cwiseProduct(d.g_el)).asDiagonal() * a));
        H(1, 0) = H(0, 1);
        return H;
    };

    const auto mins = newton_minimum_search(f, grad, hess, cfg, out.model_order);
    out.angles.reserve(mins.size());
    for (const auto& m : mins) {
        out.angles.push_back({{m.point(0), m.point(1)}, m.value, m.newton_ok});
    }
    return out;
}

/// Matched receive beam a(angle) / sqrt(A); |w^H a| = sqrt(A) on the matched AoA.
inline VectorXcd make_spatial_filter(const UpaGeometry& geom, const AnglePair& angle) {
    return steering_vector(geom, angle) / std::sqrt(static_cast<double>(geom.size()));
}

/**
 * @brief LS receive beam bank for a set of estimated AoAs (one unit-norm column per angle).
 *
 * Column l is the conjugate of the l-th row of the pseudo-inverse of the
 * steering matrix [a(p_0) ... a(p_{L-1})], normalized to unit norm: the
 * least-squares amplitude estimator for path l.  Each beam nulls every other
 * steering vector in the set exactly, so the per-path Doppler/range stages do
 * not inherit cross-path leakage even when the paths sit within one
 * beamwidth.  For a single angle this reduces to the matched beam
 * a / sqrt(A).  Coincident angles are handled by the rank-revealing
 * pseudo-inverse (the min-norm solution splits the gain between them).
 */
inline MatrixXcd make_spatial_filter_bank(const UpaGeometry& geom,
                                          const std::vector<AnglePair>& angles) {
    const int L = static_cast<int>(angles.size());
    if (L < 1) {
        throw std::invalid_argument("make_spatial_filter_bank: need at least one angle");
    }
    MatrixXcd steer(geom.size(), L);
    for (int l = 0; l < L; ++l) steer.col(l) = steering_vector(geom, angles[l]);
    MatrixXcd bank = steer.completeOrthogonalDecomposition().pseudoInverse().adjoint();
    for (int l = 0; l < L; ++l) {
        const double nrm = bank.col(l).norm();
        if (nrm > 0.0) {
            bank.col(l) /= nrm;
        } else {
            bank.col(l) = make_spatial_filter(geom, angles[l]);  // unreachable in practice
        }
    }
    return bank;
}

/// Beamformed CSI matrix H[n, m] = w^H h[:, n, m]  (N_c x M_s).
inline MatrixXcd apply_spatial_filter(const CsiTensor& h, const VectorXcd& w) {
    if (w.size() != h.antennas) {
        throw std::invalid_argument("apply_spatial_filter: beam does not match antenna count");
    }
    const Eigen::Index snaps =
        static_cast<Eigen::Index>(h.subcarriers) * static_cast<Eigen::Index>(h.packets);
    Eigen::Map<const MatrixXcd> snapshots(h.data.data(), h.antennas, snaps);
    Eigen::RowVectorXcd flat = w.adjoint() * snapshots;
    return Eigen::Map<const MatrixXcd>(flat.data(), h.subcarriers, h.packets);
}

}  // namespace jcas

#endif  // JCAS_AOA_HPP
