#ifndef JCAS_CRB_HPP
#define JCAS_CRB_HPP

/**
 * @file crb.hpp
 * @brief Cramer-Rao bound for range over the OFDM frequency grid.
 *
 * For a single path observed on N_c subcarriers over M_s packets at
 * post-beamforming SNR gamma, the range bound is
 *
 *   C_r = c^2 / ( gamma * 8 pi^2 * df^2 * M_s * sum_{n=0}^{N_c-1} n^2 ).
 *
 * fisher_numeric() rebuilds the Fisher information by finite differences of
 * the noiseless frequency response; C_r * I(r) == 1 up to the O(step^2)
 * discretisation error, independent of the evaluation range.
 */

#include <cmath>
#include <stdexcept>

#include "jcas/channel.hpp"

namespace jcas {

/// Closed-form range CRB (m^2) at linear SNR @c snr_linear.
inline double crb_range(double snr_linear, const OfdmConfig& ofdm) {
    if (snr_linear <= 0.0) {
        throw std::invalid_argument("crb_range: SNR must be positive");
    }
    if (ofdm.subcarriers < 2 || ofdm.packets < 1) {
        throw std::invalid_argument("crb_range: degenerate numerology");
    }
    double sum_n2 = 0.0;
    for (int n = 0; n < ofdm.subcarriers; ++n) sum_n2 += static_cast<double>(n) * n;
    const double df = ofdm.subcarrier_spacing;
    const double denom =
        snr_linear * 8.0 * kPi * kPi * df * df * static_cast<double>(ofdm.packets) * sum_n2;
    return kSpeedOfLight * kSpeedOfLight / denom;
}

/**
 * @brief Range Fisher information of the noiseless grid response, by central
 *        finite differences of B_n(r) = sqrt(gamma) exp(-j 2 pi n df r / c).
 *
 * I(r) = (1/step^2) sum_{n,m} ( |B_n(r+step) - B_n(r)|^2
 *                             + |B_n(r-step) - B_n(r)|^2 ),
 *
 * with unit noise power folded into the gamma scaling.  The phase-difference
 * magnitudes do not depend on r, which the tests exploit.  The step must stay
 * well below the delay-resolution cell c/(N_c df) or the outermost subcarrier
 * phases wrap.
 */
inline double fisher_numeric(const OfdmConfig& ofdm, double snr_linear, double range_m,
                             double step_m) {
    if (snr_linear <= 0.0 || step_m <= 0.0) {
        throw std::invalid_argument("fisher_numeric: SNR and step must be positive");
    }
    const double cell = kSpeedOfLight / (ofdm.subcarrier_spacing * ofdm.subcarriers);
    if (step_m >= 0.1 * cell) {
        throw std::invalid_argument("fisher_numeric: step too coarse for the subcarrier grid");
    }
    const double slope = -2.0 * kPi * ofdm.subcarrier_spacing / kSpeedOfLight;
    double acc = 0.0;
    for (int n = 0; n < ofdm.subcarriers; ++n) {
        const Cplx b0 = std::polar(1.0, slope * n * range_m);
        const Cplx bp = std::polar(1.0, slope * n * (range_m + step_m));
        const Cplx bm = std::polar(1.0, slope * n * (range_m - step_m));
        acc += std::norm(bp - b0) + std::norm(bm - b0);
    }
    return snr_linear * static_cast<double>(ofdm.packets) * acc / (step_m * step_m);
}

}  // namespace jcas

#endif  // JCAS_CRB_HPP
