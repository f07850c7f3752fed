#ifndef JCAS_PIPELINE_HPP
#define JCAS_PIPELINE_HPP

/**
 * @file pipeline.hpp
 * @brief End-to-end sensing trials and Monte-Carlo sweeps.
 *
 * One trial:
 *   1. synthesize CSI for the scene (clock offsets, reflection coefficients
 *      and thermal noise drawn from the trial RNG);
 *   2. AoA MUSIC on the spatial correlation of all snapshots;
 *   3. per AoA branch: beamform with the LS beam bank (each beam nulls the
 *      other estimated arrivals), Doppler-plus-offset MUSIC, optionally the
 *      Kalman enhancer keyed by the DPO estimate, then range MUSIC;
 *   4. the candidate with the shortest propagation range is declared the UE
 *      and localized along its arrival ray; scatterers are matched to the
 *      remaining candidates by arrival-angle proximity and localized on the
 *      BS/UE spheroid.
 *
 * Estimation failures inside a branch (empty spectra, vanishing model order)
 * drop that branch's candidates; the trial still completes and the evaluation
 * counts the resulting misses instead of aborting the sweep.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "jcas/aoa.hpp"
#include "jcas/channel.hpp"
#include "jcas/config.hpp"
#include "jcas/drde.hpp"
#include "jcas/geometry.hpp"
#include "jcas/io.hpp"
#include "jcas/localization.hpp"

namespace jcas {

/// Shallow range peaks this much above a branch's deepest minimum are spurious.
constexpr double kRangeDepthGate = 1e3;

/// Absolute spectrum-depth floor for the gate.  Exact noise subspaces drive
/// minima to the rounding level (~1e-13, either sign), where a relative gate
/// is meaningless; anything below this floor counts as a perfect minimum.
constexpr double kRangeDepthFloor = 1e-8;

/// Everything the estimation stages produce for one CSI tensor.
struct TrialOutcome {
    std::vector<TargetCandidate> candidates;
    int ue_index = -1;  ///< into candidates, -1 when nothing was detected
    Vector3d ue_position = Vector3d::Zero();
    int aoa_order = 0;
    VectorXd aoa_eigenvalues;
};

/// Full estimation chain on an existing CSI tensor.
inline TrialOutcome sense_csi(const SceneConfig& scene, const OfdmConfig& ofdm,
                              const SearchSettings& search, bool use_kf, const CsiTensor& csi) {
    TrialOutcome out;
    AoaResult aoa;
    try {
        aoa = estimate_aoas(correlation_matrix(csi), scene.bs_array, search.aoa_search(),
                            csi.subcarriers * csi.packets);
    } catch (const std::runtime_error&) {
        return out;  // no resolvable arrival directions
    }
    out.aoa_order = aoa.model_order;
    out.aoa_eigenvalues = aoa.eigenvalues;
    if (aoa.angles.empty()) return out;

    std::vector<AnglePair> directions;
    directions.reserve(aoa.angles.size());
    for (const AoaEstimate& a : aoa.angles) directions.push_back(a.angle);
    const MatrixXcd bank = make_spatial_filter_bank(scene.bs_array, directions);

    const SearchConfig doppler_cfg = search.doppler_search(ofdm.packet_interval());
    const SearchConfig range_cfg = search.range_search(ofdm.subcarrier_spacing);
    for (size_t i = 0; i < aoa.angles.size(); ++i) {
        try {
            MatrixXcd H = apply_spatial_filter(csi, bank.col(static_cast<Eigen::Index>(i)));
            const DpoResult dpo = estimate_dpo(H, ofdm, doppler_cfg);
            if (dpo.estimates.empty()) continue;
            const DpoEstimate& d = dpo.estimates.front();
            RangeOrderRule order_rule = RangeOrderRule::noise_gap;
            if (use_kf) {
                // Detection gate before smoothing: the cliff rule always
                // reports at least one component, so a branch that carries
                // nothing must be dropped while the thermal floor is still
                // there to prove it.
                if (range_model_order(H, ofdm) == 0) continue;
                // Observation variance for the smoother: the spatial-stage
                // eigen-tail estimate.  The unit-norm beam leaves the thermal
                // variance of a filtered row at the per-antenna value, whereas
                // the slow-time eigen-tail also absorbs clock-jitter leakage.
                // (The smoothed output is insensitive to this choice once the
                // initial state variance dominates; the tail estimate can
                // round to a tiny negative on noiseless data, hence the clamp.)
                H = enhance_csi_matrix(H, d.transfer, std::max(0.0, aoa.noise_power));
                order_rule = RangeOrderRule::spectral_cliff;
            }
            const RangeResult ranges = estimate_ranges(H, ofdm, range_cfg, order_rule);
            if (ranges.estimates.empty()) continue;
            const double gate = std::max(
                kRangeDepthGate * ranges.estimates.front().spectrum_value, kRangeDepthFloor);
            for (size_t j = 0; j < ranges.estimates.size(); ++j) {
                const RangeEstimate& r = ranges.estimates[j];
                if (r.spectrum_value > gate || r.range_m <= 0.0) continue;
                TargetCandidate c;
                c.aoa_index = static_cast<int>(i);
                c.dpo_index = 0;
                c.range_index = static_cast<int>(j);
                c.angle = aoa.angles[i].angle;
                c.doppler_hz = d.doppler_hz;
                c.range_m = r.range_m;
                c.aoa_depth = aoa.angles[i].spectrum_value;
                c.dpo_depth = d.spectrum_value;
                c.range_depth = r.spectrum_value;
                out.candidates.push_back(c);
            }
        } catch (const std::runtime_error&) {
            continue;  // branch yielded no usable spectra
        }
    }
    if (!out.candidates.empty()) {
        out.ue_index = identify_ue(out.candidates);
        const TargetCandidate& ue = out.candidates[out.ue_index];
        out.ue_position = locate_ue(scene.bs_position, ue.angle, ue.range_m);
    }
    return out;
}

/// Synthesize one CSI tensor and run the estimation chain on it.
template <typename Rng>
TrialOutcome run_trial(const SceneConfig& scene, const OfdmConfig& ofdm, const ClockModel& clock,
                       const SearchSettings& search, bool use_kf, Rng& rng) {
    const std::vector<PathParams> paths = derive_paths(scene);
    const VectorXcd w_T = matched_tx_beam(scene.ue_array, paths.front().aod);
    const ClockDraws draws = draw_clock_offsets(clock, ofdm.packets, rng);
    std::vector<Cplx> betas;
    betas.reserve(scene.scatterers.size());
    for (const Scatterer& s : scene.scatterers) betas.push_back(draw_cn(rng, s.reflection_var));
    const CsiTensor csi = simulate_csi(scene, ofdm, paths, draws, w_T, betas, rng);
    return sense_csi(scene, ofdm, search, use_kf, csi);
}

/// Truth-referenced errors of one trial.
struct TrialErrors {
    bool ue_found = false;
    double ue_range_error = 0.0;     ///< |estimated - true| LoS propagation range
    double ue_position_error = 0.0;  ///< Euclidean position error
    std::vector<bool> scatterer_found;
    std::vector<double> scatterer_range_error;  ///< aggregate-range errors, where found
    std::vector<bool> scatterer_feasible;
    std::vector<double> scatterer_position_error;  ///< where found and feasible
    int miss_count = 0;
    int infeasible_count = 0;
};

/// Associate candidates with the ground truth and measure the errors.
inline TrialErrors evaluate_trial(const SceneConfig& scene, const TrialOutcome& out) {
    const std::vector<PathParams> paths = derive_paths(scene);
    const size_t n_scat = scene.scatterers.size();
    TrialErrors err;
    err.scatterer_found.assign(n_scat, false);
    err.scatterer_range_error.assign(n_scat, 0.0);
    err.scatterer_feasible.assign(n_scat, false);
    err.scatterer_position_error.assign(n_scat, 0.0);

    if (out.ue_index >= 0) {
        const TargetCandidate& ue = out.candidates[out.ue_index];
        err.ue_found = true;
        err.ue_range_error = std::abs(ue.range_m - paths.front().aggregate_range);
        err.ue_position_error = (out.ue_position - scene.ue_position).norm();
    } else {
        ++err.miss_count;
    }

    std::vector<bool> used(out.candidates.size(), false);
    if (out.ue_index >= 0) used[out.ue_index] = true;
    for (size_t k = 0; k < n_scat; ++k) {
        const PathParams& truth = paths[k + 1];
        int best = -1;
        double best_sep = std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < out.candidates.size(); ++c) {
            if (used[c]) continue;
            const double sep = angle_between(out.candidates[c].angle, truth.aoa);
            if (sep < best_sep) {
                best_sep = sep;
                best = static_cast<int>(c);
            }
        }
        if (best < 0) {
            ++err.miss_count;
            continue;
        }
        used[best] = true;
        const TargetCandidate& cand = out.candidates[best];
        err.scatterer_found[k] = true;
        err.scatterer_range_error[k] = std::abs(cand.range_m - truth.aggregate_range);
        const auto pos = locate_scatterer(scene.bs_position, out.ue_position, cand.angle,
                                          cand.range_m);
        if (!pos) {
            ++err.infeasible_count;
            continue;
        }
        err.scatterer_feasible[k] = true;
        err.scatterer_position_error[k] = (*pos - scene.scatterers[k].position).norm();
    }
    return err;
}

namespace detail {

struct RmseAccumulator {
    double sum_sq = 0.0;
    int n = 0;
    void add(double e) {
        sum_sq += e * e;
        ++n;
    }
    double rmse() const {
        return n > 0 ? std::sqrt(sum_sq / n) : std::numeric_limits<double>::quiet_NaN();
    }
};

}  // namespace detail

/// Scene/numerology/clock for one sweep point, after applying the axis value.
struct PointSetup {
    SceneConfig scene;
    OfdmConfig ofdm;
    ClockModel clock;
    double sensing_snr_db = 0.0;
};

/// Apply one sweep-axis value to the base configuration.
inline PointSetup apply_sweep_axis(const ExperimentConfig& cfg, const std::string& axis,
                                   double value) {
    PointSetup p{cfg.scene, cfg.ofdm, cfg.clock, 0.0};
    if (axis == "snr_db") {
        const auto paths = derive_paths(p.scene);
        const VectorXcd w_T = matched_tx_beam(p.scene.ue_array, paths.front().aod);
        p.ofdm.tx_power = calibrate_power_for_snr(p.scene, p.ofdm, paths, w_T, value);
    } else if (axis == "tx_power") {
        p.ofdm.tx_power = value;
    } else if (axis == "timing_std_ns") {
        p.clock.timing_std = value * 1e-9;
    } else if (axis == "cfo_std_hz") {
        p.clock.cfo_std = value;
    } else if (axis == "array_size") {
        const int side = static_cast<int>(value);
        p.scene.bs_array =
            UpaGeometry::half_wavelength(side, side, cfg.scene.bs_array.carrier_hz);
    } else {
        throw std::invalid_argument("sweep: unknown axis '" + axis + "'");
    }
    {
        const auto paths = derive_paths(p.scene);
        const VectorXcd w_T = matched_tx_beam(p.scene.ue_array, paths.front().aod);
        p.sensing_snr_db = to_db(uplink_snr(p.scene, p.ofdm, paths, w_T));
    }
    return p;
}

/// Aggregated metrics of one (sweep value, case) pair.
struct PointReport {
    double sweep_value = 0.0;
    std::string case_name;
    int trials = 0;
    double sensing_snr_db = 0.0;
    double ue_range_rmse = 0.0;
    double ue_position_rmse = 0.0;
    double scatterer_range_rmse = 0.0;
    double scatterer_position_rmse = 0.0;
    int miss_count = 0;
    int infeasible_count = 0;
};

struct SweepResult {
    std::vector<PointReport> points;
    std::vector<CsvRow> rows;
};

/**
 * @brief Monte-Carlo sweep over the configured axis, for every configured case.
 *
 * Trial t of sweep point s is seeded with {base_seed, s, t} regardless of the
 * processing case, so "kf" and "plain" runs see identical channel, clock and
 * noise realizations and differ only in the estimation chain.
 */
inline SweepResult run_sweep(const ExperimentConfig& cfg) {
    if (cfg.sweep.values.empty()) {
        throw std::invalid_argument("run_sweep: no sweep values configured");
    }
    if (cfg.sweep.trials < 1) {
        throw std::invalid_argument("run_sweep: trials must be positive");
    }
    SweepResult result;
    for (const std::string& case_name : cfg.sweep.cases) {
        const bool use_kf = case_name == "kf";
        for (size_t si = 0; si < cfg.sweep.values.size(); ++si) {
            const double value = cfg.sweep.values[si];
            const PointSetup setup = apply_sweep_axis(cfg, cfg.sweep.axis, value);

            detail::RmseAccumulator ue_range, ue_pos, sc_range, sc_pos;
            int misses = 0, infeasible = 0;
            for (int ti = 0; ti < cfg.sweep.trials; ++ti) {
                std::seed_seq seq{cfg.sweep.base_seed, static_cast<unsigned int>(si),
                                  static_cast<unsigned int>(ti)};
                std::mt19937_64 rng(seq);
                const TrialOutcome out =
                    run_trial(setup.scene, setup.ofdm, setup.clock, cfg.search, use_kf, rng);
                const TrialErrors err = evaluate_trial(setup.scene, out);
                if (err.ue_found) {
                    ue_range.add(err.ue_range_error);
                    ue_pos.add(err.ue_position_error);
                }
                for (size_t k = 0; k < err.scatterer_found.size(); ++k) {
                    if (err.scatterer_found[k]) sc_range.add(err.scatterer_range_error[k]);
                    if (err.scatterer_feasible[k]) sc_pos.add(err.scatterer_position_error[k]);
                }
                misses += err.miss_count;
                infeasible += err.infeasible_count;
            }

            PointReport rep;
            rep.sweep_value = value;
            rep.case_name = case_name;
            rep.trials = cfg.sweep.trials;
            rep.sensing_snr_db = setup.sensing_snr_db;
            rep.ue_range_rmse = ue_range.rmse();
            rep.ue_position_rmse = ue_pos.rmse();
            rep.scatterer_range_rmse = sc_range.rmse();
            rep.scatterer_position_rmse = sc_pos.rmse();
            rep.miss_count = misses;
            rep.infeasible_count = infeasible;
            result.points.push_back(rep);

            const auto row = [&](const std::string& kind, const std::string& metric, double v) {
                result.rows.push_back(
                    {cfg.sweep.axis, value, kind, metric, v, cfg.sweep.trials, case_name});
            };
            row("ue", "range_rmse_m", rep.ue_range_rmse);
            row("ue", "position_rmse_m", rep.ue_position_rmse);
            if (!setup.scene.scatterers.empty()) {
                row("scatterer", "range_rmse_m", rep.scatterer_range_rmse);
                row("scatterer", "position_rmse_m", rep.scatterer_position_rmse);
            }
            row("all", "miss_count", static_cast<double>(misses));
            row("all", "infeasible_count", static_cast<double>(infeasible));
            row("all", "sensing_snr_db", rep.sensing_snr_db);
        }
    }
    return result;
}

}  // namespace jcas

#endif  // JCAS_PIPELINE_HPP
