#ifndef JCAS_DRDE_HPP
#define JCAS_DRDE_HPP

/**
 * @file drde.hpp
 * @brief Decoupled range/Doppler estimation on beamformed CSI, and the
 *        Kalman-filter CSI enhancer that suppresses per-packet phase noise.
 *
 * Given the beamformed matrix H (subcarriers x packets), two correlations
 * decouple the dimensions:
 *
 *   R_f = H^T conj(H) / N_c   -- products along each subcarrier row cancel all
 *                                row-common (delay) phases, leaving Doppler;
 *   R_r = H H^H / M_s         -- products along each packet column cancel all
 *                                column-common (Doppler + CFO) phases, leaving
 *                                delay.
 *
 * Per-packet timing offsets are *not* row-common and survive into R_r as
 * multiplicative phase noise; the enhancer below removes them by smoothing
 * each subcarrier row along packets with the Doppler progression as the state
 * transition.
 */

#include <vector>

#include "jcas/channel.hpp"
#include "jcas/subspace.hpp"

namespace jcas {

/// Frequency-domain range response a_r(r)[n] = exp(-j 2 pi n df r / c).
inline VectorXcd range_steering(int subcarriers, double subcarrier_spacing, double range_m) {
    VectorXcd a(subcarriers);
    const double slope = -2.0 * kPi * subcarrier_spacing * range_m / kSpeedOfLight;
    for (int n = 0; n < subcarriers; ++n) {
        a(n) = Cplx{std::cos(slope * n), std::sin(slope * n)};
    }
    return a;
}

/// Slow-time Doppler response a_f(f)[m] = exp(+j 2 pi m T_p f).
inline VectorXcd doppler_steering(int packets, double packet_interval, double doppler_hz) {
    VectorXcd a(packets);
    const double slope = 2.0 * kPi * packet_interval * doppler_hz;
    for (int m = 0; m < packets; ++m) {
        a(m) = Cplx{std::cos(slope * m), std::sin(slope * m)};
    }
    return a;
}

/// Doppler-dimension correlation R_f = H^T conj(H) / N_c  (M_s x M_s).
inline MatrixXcd doppler_covariance(const MatrixXcd& H) {
    MatrixXcd R = H.transpose() * H.conjugate() / static_cast<double>(H.rows());
    return 0.5 * (R + R.adjoint());
}

/// Range-dimension correlation R_r = H H^H / M_s  (N_c x N_c).
inline MatrixXcd range_covariance(const MatrixXcd& H) {
    MatrixXcd R = H * H.adjoint() / static_cast<double>(H.cols());
    return 0.5 * (R + R.adjoint());
}

namespace detail {

/// Minima of a 1-D MUSIC spectrum whose steering phase is linear in x with
/// per-entry slope coeff[n]; analytic first/second derivatives feed Newton.
inline std::vector<SpectrumMinimum> linear_phase_music(const NoiseProjector& proj,
                                                       const VectorXd& coeff,
                                                       const SearchConfig& cfg, int n_peaks) {
    const int n = static_cast<int>(coeff.size());
    auto make_a = [&](double x) {
        VectorXcd a(n);
        for (int i = 0; i < n; ++i) {
            const double ph = coeff(i) * x;
            a(i) = Cplx{std::cos(ph), std::sin(ph)};
        }
        return a;
    };
    auto f = [&](double x) { return proj.spectrum(make_a(x)); };
    auto df = [&](double x) {
        const VectorXcd a = make_a(x);
        return -2.0 * std::imag(proj.quad(a, coeff.asDiagonal() * a));
    };
    auto d2f = [&](double x) {
        const VectorXcd a = make_a(x);
        const VectorXcd ca = coeff.asDiagonal() * a;
        return 2.0 * std::real(proj.quad(ca, ca)) -
               2.0 * std::real(proj.quad(a, coeff.cwiseProduct(coeff).asDiagonal() * a));
    };
    return newton_minimum_search_1d(f, df, d2f, cfg, n_peaks);
}

}  // namespace detail

struct DpoEstimate {
    double doppler_hz = 0.0;  ///< Doppler-plus-offset frequency
    Cplx transfer{1.0, 0.0};  ///< A_s = exp(j 2 pi T_p f), the KF state transition
    double spectrum_value = 0.0;
};

struct DpoResult {
    std::vector<DpoEstimate> estimates;  ///< ascending spectrum value
    int model_order = 0;
    double noise_power = 0.0;
    VectorXd eigenvalues;
};

/// MUSIC over the Doppler dimension of a beamformed CSI matrix.
inline DpoResult estimate_dpo(const MatrixXcd& H, const OfdmConfig& ofdm,
                              const SearchConfig& cfg) {
    if (H.cols() != ofdm.packets || H.rows() != ofdm.subcarriers) {
        throw std::invalid_argument("estimate_dpo: matrix does not match the numerology");
    }
    const EigResult eig = herm_eig(doppler_covariance(H));
    DpoResult out;
    out.eigenvalues = eig.values;
    out.model_order = estimate_model_order(eig.values, 1.0, ofdm.subcarriers);
    out.noise_power = estimate_noise_power(eig.values, out.model_order);
    if (out.model_order >= ofdm.packets) {
        throw std::runtime_error("estimate_dpo: empty noise subspace");
    }
    if (out.model_order == 0) return out;

    const NoiseProjector proj(eig.signal_subspace(out.model_order));
    VectorXd coeff(ofdm.packets);
    const double T_p = ofdm.packet_interval();
    for (int m = 0; m < ofdm.packets; ++m) coeff(m) = 2.0 * kPi * T_p * m;

    for (const auto& m : detail::linear_phase_music(proj, coeff, cfg, out.model_order)) {
        DpoEstimate e;
        e.doppler_hz = m.point(0);
        const double ph = 2.0 * kPi * T_p * e.doppler_hz;
        e.transfer = Cplx{std::cos(ph), std::sin(ph)};
        e.spectrum_value = m.value;
        out.estimates.push_back(e);
    }
    return out;
}

struct RangeEstimate {
    double range_m = 0.0;
    double spectrum_value = 0.0;
};

struct RangeResult {
    std::vector<RangeEstimate> estimates;  ///< ascending spectrum value
    int model_order = 0;
    double noise_power = 0.0;
    VectorXd eigenvalues;
};

/// How estimate_ranges picks the signal-subspace dimension.
enum class RangeOrderRule {
    noise_gap,       ///< eigenvalue-gap rule against the thermal-noise floor
    spectral_cliff,  ///< largest eigenvalue ratio; for Kalman-smoothed matrices
};

/// Range-dimension detection gate on a raw (pre-enhancement) CSI matrix:
/// the number of range components the gap rule resolves above the thermal
/// floor.  Zero means the branch carries no detectable path, which is the
/// one answer a smoothed matrix can never give (see spectral_cliff_order),
/// so an enhancement stage must consult the matrix as observed first.
inline int range_model_order(const MatrixXcd& H, const OfdmConfig& ofdm) {
    if (H.cols() != ofdm.packets || H.rows() != ofdm.subcarriers) {
        throw std::invalid_argument("range_model_order: matrix does not match the numerology");
    }
    return estimate_model_order(herm_eig(range_covariance(H)).values, 1.0, ofdm.packets);
}

/// MUSIC over the range dimension of a (possibly enhanced) CSI matrix.
inline RangeResult estimate_ranges(const MatrixXcd& H, const OfdmConfig& ofdm,
                                   const SearchConfig& cfg,
                                   RangeOrderRule rule = RangeOrderRule::noise_gap) {
    if (H.cols() != ofdm.packets || H.rows() != ofdm.subcarriers) {
        throw std::invalid_argument("estimate_ranges: matrix does not match the numerology");
    }
    const EigResult eig = herm_eig(range_covariance(H));
    RangeResult out;
    out.eigenvalues = eig.values;
    out.model_order = rule == RangeOrderRule::spectral_cliff
                          ? spectral_cliff_order(eig.values, ofdm.packets)
                          : estimate_model_order(eig.values, 1.0, ofdm.packets);
    if (out.model_order >= ofdm.subcarriers) {
        throw std::invalid_argument("estimate_ranges: order leaves no noise subspace");
    }
    out.noise_power = estimate_noise_power(eig.values, out.model_order);
    if (out.model_order == 0) return out;

    const NoiseProjector proj(eig.signal_subspace(out.model_order));
    VectorXd coeff(ofdm.subcarriers);
    const double slope = -2.0 * kPi * ofdm.subcarrier_spacing / kSpeedOfLight;
    for (int n = 0; n < ofdm.subcarriers; ++n) coeff(n) = slope * n;

    for (const auto& m : detail::linear_phase_music(proj, coeff, cfg, out.model_order)) {
        out.estimates.push_back({m.point(0), m.value});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Kalman-filter CSI enhancer
// ---------------------------------------------------------------------------

/// Output of the forward/backward scalar Kalman smoother on one CSI sequence.
struct KfEnhanceResult {
    VectorXcd smoothed;
    double noise_var_estimate = 0.0;       ///< p_w after the final backward update
    std::vector<double> forward_gain;      ///< K_p, p = 1..M-1
    std::vector<double> backward_gain;     ///< K_p, p = M-1..1
    std::vector<double> forward_var;       ///< posterior p_w after each forward update
    std::vector<double> backward_var;      ///< posterior p_w after each backward update
};

/**
 * @brief Forward/backward Kalman smoothing of one slow-time CSI sequence.
 *
 * State model: h[p] = A h[p-1] with unit-modulus transfer A from the DPO
 * estimate; deviations (thermal noise, per-packet timing/CFO phase jitter) are
 * treated as observation noise of variance @c sigma_n2.  The initial process
 * variance is estimated from the data over the first @c init_window samples
 * (0 selects the full sequence),
 *
 *   p_w0 = (1/P) sum_p | obs[p] A^-p - obs[0] |^2 .
 *
 * The backward pass re-fuses the original observations against predictions
 * propagated with A^-1 from the already-filtered sequence.  All gains are real
 * and confined to [0, 1]; with sigma_n2 = 0 the smoother is an exact identity.
 */
inline KfEnhanceResult kf_enhance(const VectorXcd& obs, Cplx A, double sigma_n2,
                                  int init_window = 0) {
    const int M = static_cast<int>(obs.size());
    if (M < 2) {
        throw std::invalid_argument("kf_enhance: need at least two observations");
    }
    if (std::abs(std::abs(A) - 1.0) > 1e-6) {
        throw std::invalid_argument("kf_enhance: transfer factor must be unit modulus");
    }
    if (sigma_n2 < 0.0) {
        throw std::invalid_argument("kf_enhance: negative noise variance");
    }
    const int P = init_window > 0 ? std::min(init_window, M) : M;
    const Cplx A_inv = std::conj(A) / std::norm(A);

    // Initial process variance from the de-rotated spread around obs[0].
    double p_w = 0.0;
    {
        Cplx rot{1.0, 0.0};
        for (int p = 0; p < P; ++p) {
            p_w += std::norm(obs(p) * rot - obs(0));
            rot *= A_inv;
        }
        p_w /= static_cast<double>(P);
    }

    KfEnhanceResult out;
    out.smoothed = obs;
    out.smoothed(0) = obs(0);

    auto update = [&](Cplx prior, double prior_var, Cplx observation, double& gain_out) {
        const double denom = prior_var + sigma_n2;
        const double K = denom > 0.0 ? prior_var / denom : 1.0;  // conj of a real prior var
        gain_out = K;
        p_w = (1.0 - K) * prior_var;
        return prior + K * (observation - prior);
    };

    for (int p = 1; p < M; ++p) {
        const Cplx prior = A * out.smoothed(p - 1);
        const double prior_var = std::norm(A) * p_w;
        double K = 0.0;
        out.smoothed(p) = update(prior, prior_var, obs(p), K);
        out.forward_gain.push_back(K);
        out.forward_var.push_back(p_w);
    }
    for (int p = M - 1; p >= 1; --p) {
        const Cplx prior = A_inv * out.smoothed(p);
        const double prior_var = std::norm(A_inv) * p_w;
        double K = 0.0;
        out.smoothed(p - 1) = update(prior, prior_var, obs(p - 1), K);
        out.backward_gain.push_back(K);
        out.backward_var.push_back(p_w);
    }
    out.noise_var_estimate = p_w;
    return out;
}

/// Row-wise kf_enhance over a beamformed CSI matrix (rows = subcarriers).
inline MatrixXcd enhance_csi_matrix(const MatrixXcd& H, Cplx A, double sigma_n2,
                                    int init_window = 0) {
    MatrixXcd out(H.rows(), H.cols());
    for (Eigen::Index n = 0; n < H.rows(); ++n) {
        out.row(n) = kf_enhance(H.row(n).transpose(), A, sigma_n2, init_window)
                         .smoothed.transpose();
    }
    return out;
}

/**
 * @brief Orthogonality residuals certifying the range/Doppler decoupling.
 *
 * For a noiseless single-path H the rank-1 noise subspaces of R_r and R_f must
 * be orthogonal to the true steering vectors.  Returns the relative residuals
 * (||U_N^H a|| / ||a||) for range and Doppler; both are ~1e-15 when the
 * decoupling holds.
 */
inline std::pair<double, double> verify_decoupling(const MatrixXcd& H, const OfdmConfig& ofdm,
                                                   double range_m, double doppler_hz) {
    const EigResult er = herm_eig(range_covariance(H));
    const EigResult ef = herm_eig(doppler_covariance(H));
    const VectorXcd ar = range_steering(ofdm.subcarriers, ofdm.subcarrier_spacing, range_m);
    const VectorXcd af = doppler_steering(ofdm.packets, ofdm.packet_interval(), doppler_hz);
    const double res_r = (er.noise_subspace(1).adjoint() * ar).norm() / ar.norm();
    const double res_f = (ef.noise_subspace(1).adjoint() * af).norm() / af.norm();
    return {res_r, res_f};
}

}  // namespace jcas

#endif  // JCAS_DRDE_HPP
