#ifndef JCAS_CHANNEL_HPP
#define JCAS_CHANNEL_HPP

/**
 * @file channel.hpp
 * @brief OFDM uplink CSI synthesis under clock asynchronism.
 *
 * The simulator produces the per-packet CSI estimate tensor seen at the BS:
 * for antenna a, subcarrier n and packet m
 *
 *   h[a,n,m] = sqrt(P_t) * sum_k b_k * chi_Tk
 *              * exp(+j 2 pi m T_p (f_k + cfo(m)))
 *              * exp(-j 2 pi n df (tau_k + to(m)))
 *              * a_k[a]                                + CN(0, sigma_N^2),
 *
 * with per-packet timing offset to(m) and carrier frequency offset cfo(m)
 * shared by all subcarriers/antennas of the packet.  chi_Tk is the transmit
 * gain a(aod_k)^T w_T.
 */

#include <random>
#include <vector>

#include "jcas/common.hpp"
#include "jcas/geometry.hpp"

namespace jcas {

/// OFDM numerology and link powers (SI units).
struct OfdmConfig {
    int subcarriers = 256;        ///< N_c
    int packets = 64;             ///< M_s
    int symbols_per_packet = 7;   ///< P_s
    double subcarrier_spacing = 480e3;  ///< delta_f [Hz]
    double tx_power = 1.0;        ///< P_t^U [W]
    double noise_power = 0.0;     ///< sigma_N^2 [W]

    /// Packet interval T_s^p = P_s / delta_f [s].
    double packet_interval() const { return symbols_per_packet / subcarrier_spacing; }
    double bandwidth() const { return subcarriers * subcarrier_spacing; }
};

/// Gaussian clock-offset model; both offsets are drawn independently per packet.
struct ClockModel {
    double timing_std = 0.0;  ///< std of delta_tau(m) [s]
    double cfo_std = 0.0;     ///< std of delta_f(m) [Hz]
};

/// One realization of the per-packet offsets.
struct ClockDraws {
    VectorXd timing;  ///< [s], length M_s
    VectorXd cfo;     ///< [Hz], length M_s

    static ClockDraws zero(int packets) {
        return {VectorXd::Zero(packets), VectorXd::Zero(packets)};
    }
};

template <class Rng>
inline ClockDraws draw_clock_offsets(const ClockModel& model, int packets, Rng& rng) {
    if (packets < 1) {
        throw std::invalid_argument("draw_clock_offsets: packets must be positive");
    }
    ClockDraws d;
    d.timing.resize(packets);
    d.cfo.resize(packets);
    std::normal_distribution<double> nt(0.0, model.timing_std);
    std::normal_distribution<double> nf(0.0, model.cfo_std);
    for (int m = 0; m < packets; ++m) d.timing(m) = model.timing_std > 0.0 ? nt(rng) : 0.0;
    for (int m = 0; m < packets; ++m) d.cfo(m) = model.cfo_std > 0.0 ? nf(rng) : 0.0;
    return d;
}

/**
 * @brief Complex CSI tensor over (antenna, subcarrier, packet).
 *
 * Storage is antenna-fastest: index a + A*(n + N*m), so each (n, m) snapshot
 * is a contiguous length-A vector.
 */
struct CsiTensor {
    int antennas = 0;
    int subcarriers = 0;
    int packets = 0;
    std::vector<Cplx> data;

    CsiTensor() = default;
    CsiTensor(int a, int n, int m)
        : antennas(a), subcarriers(n), packets(m),
          data(static_cast<size_t>(a) * n * m, Cplx{0.0, 0.0}) {}

    Cplx& at(int a, int n, int m) {
        return data[static_cast<size_t>(a) + static_cast<size_t>(antennas) * (n + static_cast<size_t>(subcarriers) * m)];
    }
    Cplx at(int a, int n, int m) const {
        return data[static_cast<size_t>(a) + static_cast<size_t>(antennas) * (n + static_cast<size_t>(subcarriers) * m)];
    }

    Eigen::Map<VectorXcd> snapshot(int n, int m) {
        return {data.data() + static_cast<size_t>(antennas) * (n + static_cast<size_t>(subcarriers) * m),
                antennas};
    }
    Eigen::Map<const VectorXcd> snapshot(int n, int m) const {
        return {data.data() + static_cast<size_t>(antennas) * (n + static_cast<size_t>(subcarriers) * m),
                antennas};
    }
};

/// Matched transmit beam towards the first (LoS) departure direction,
/// conj(a(aod)) / sqrt(array size); reduces to the scalar 1 for a 1x1 UE.
inline VectorXcd matched_tx_beam(const UpaGeometry& ue_array, const AnglePair& aod) {
    VectorXcd a = steering_vector(ue_array, aod);
    return a.conjugate() / std::sqrt(static_cast<double>(ue_array.size()));
}

/**
 * @brief Synthesize the CSI tensor for one coherent processing interval.
 *
 * @param scene      geometry (BS array defines the antenna dimension)
 * @param ofdm       numerology and powers
 * @param paths      output of derive_paths(scene)
 * @param draws      per-packet clock offsets (inject zeros for a synchronous link)
 * @param w_T        UE-side beam, length scene.ue_array.size()
 * @param betas      reflection coefficient per scatterer (indexed by
 *                   PathParams::scatterer_index); LoS ignores it
 * @param rng        noise stream; kept separate from the clock/reflection draws
 *                   so offset injection never perturbs the noise realization
 */
template <class Rng>
inline CsiTensor simulate_csi(const SceneConfig& scene, const OfdmConfig& ofdm,
                              const std::vector<PathParams>& paths, const ClockDraws& draws,
                              const VectorXcd& w_T, const std::vector<Cplx>& betas, Rng& rng) {
    const int A = scene.bs_array.size();
    const int N = ofdm.subcarriers;
    const int M = ofdm.packets;
    if (draws.timing.size() != M || draws.cfo.size() != M) {
        throw std::invalid_argument("simulate_csi: clock draws sized for a different packet count");
    }
    if (w_T.size() != scene.ue_array.size()) {
        throw std::invalid_argument("simulate_csi: w_T does not match the UE array");
    }
    const double amp = std::sqrt(ofdm.tx_power);
    const double T_p = ofdm.packet_interval();
    const double df = ofdm.subcarrier_spacing;

    const int K = static_cast<int>(paths.size());
    std::vector<VectorXcd> rx(K);
    std::vector<Cplx> coeff(K);
    for (int k = 0; k < K; ++k) {
        const PathParams& p = paths[k];
        rx[k] = steering_vector(scene.bs_array, p.aoa);
        const Cplx chi_T = steering_vector(scene.ue_array, p.aod).transpose() * w_T;
        Cplx b{p.gain, 0.0};
        if (!p.is_los) {
            if (p.scatterer_index < 0 || p.scatterer_index >= static_cast<int>(betas.size())) {
                throw std::invalid_argument("simulate_csi: missing reflection draw for scatterer");
            }
            b *= betas[p.scatterer_index];
        }
        coeff[k] = amp * b * chi_T;
    }

    // Per-packet phase ramps; the per-(n,m) timing-offset factor is common to
    // all paths and antennas and is applied once.
    CsiTensor h(A, N, M);
    VectorXcd combo(A);
    for (int m = 0; m < M; ++m) {
        const double f_off = draws.cfo(m);
        const double t_off = draws.timing(m);
        for (int n = 0; n < N; ++n) {
            combo.setZero();
            for (int k = 0; k < K; ++k) {
                const double phase = 2.0 * kPi * (m * T_p * (paths[k].doppler_hz + f_off) -
                                                  n * df * (paths[k].delay + t_off));
                combo += (coeff[k] * Cplx{std::cos(phase), std::sin(phase)}) * rx[k];
            }
            auto snap = h.snapshot(n, m);
            snap = combo;
            if (ofdm.noise_power > 0.0) {
                for (int a = 0; a < A; ++a) snap(a) += draw_cn(rng, ofdm.noise_power);
            }
        }
    }
    return h;
}

/**
 * @brief Uplink communication SNR, gamma_c = P_t * sum_k |b_k chi_Tk|^2 / sigma_N^2.
 *
 * NLoS terms use the expected reflection power E|beta|^2 = sigma^2_{C beta};
 * the returned value is linear (see to_db).
 */
inline double uplink_snr(const SceneConfig& scene, const OfdmConfig& ofdm,
                         const std::vector<PathParams>& paths, const VectorXcd& w_T) {
    if (ofdm.noise_power <= 0.0) {
        throw std::invalid_argument("uplink_snr: noise power must be positive");
    }
    double s = 0.0;
    for (const PathParams& p : paths) {
        const Cplx chi_T = steering_vector(scene.ue_array, p.aod).transpose() * w_T;
        const double scale = p.is_los ? 1.0 : p.reflection_var;
        s += scale * p.gain * p.gain * std::norm(chi_T);
    }
    return ofdm.tx_power * s / ofdm.noise_power;
}

/// Transmit power achieving a target uplink SNR (dB) for the given scene.
inline double calibrate_power_for_snr(const SceneConfig& scene, const OfdmConfig& ofdm,
                                      const std::vector<PathParams>& paths,
                                      const VectorXcd& w_T, double target_snr_db) {
    OfdmConfig unit = ofdm;
    unit.tx_power = 1.0;
    const double snr_at_unit = uplink_snr(scene, unit, paths, w_T);
    return from_db(target_snr_db) / snr_at_unit;
}

}  // namespace jcas

#endif  // JCAS_CHANNEL_HPP
