// Command-line front end: simulate | sense | sweep | crb.

#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "jcas/crb.hpp"
#include "jcas/pipeline.hpp"

namespace {

using nlohmann::json;

jcas::ExperimentConfig load_or_die(const std::string& path) { return jcas::load_experiment_config(path); }

int cmd_simulate(const std::string& config_path, unsigned long long seed,
                 const std::string& out_path) {
    const jcas::ExperimentConfig cfg = load_or_die(config_path);
    const auto paths = jcas::derive_paths(cfg.scene);
    const jcas::VectorXcd w_T = jcas::matched_tx_beam(cfg.scene.ue_array, paths.front().aod);
    std::mt19937_64 rng(seed);
    const jcas::ClockDraws draws = jcas::draw_clock_offsets(cfg.clock, cfg.ofdm.packets, rng);
    std::vector<jcas::Cplx> betas;
    for (const auto& s : cfg.scene.scatterers) betas.push_back(jcas::draw_cn(rng, s.reflection_var));
    const jcas::CsiTensor csi =
        jcas::simulate_csi(cfg.scene, cfg.ofdm, paths, draws, w_T, betas, rng);
    jcas::save_csi(out_path, csi);
    std::cerr << "wrote " << csi.antennas << "x" << csi.subcarriers << "x" << csi.packets
              << " CSI tensor to " << out_path << "\n";
    return 0;
}

json candidate_to_json(const jcas::TargetCandidate& c) {
    return json{{"aoa_index", c.aoa_index},
                {"azimuth_deg", jcas::rad2deg(c.angle.azimuth)},
                {"elevation_deg", jcas::rad2deg(c.angle.elevation)},
                {"doppler_hz", c.doppler_hz},
                {"range_m", c.range_m},
                {"aoa_depth", c.aoa_depth},
                {"dpo_depth", c.dpo_depth},
                {"range_depth", c.range_depth}};
}

int cmd_sense(const std::string& config_path, const std::string& csi_path,
              const std::string& case_name, const std::string& out_path) {
    const jcas::ExperimentConfig cfg = load_or_die(config_path);
    const jcas::CsiTensor csi = jcas::load_csi(csi_path);
    const bool use_kf = case_name == "kf";
    const jcas::TrialOutcome out = jcas::sense_csi(cfg.scene, cfg.ofdm, cfg.search, use_kf, csi);
    const jcas::TrialErrors err = jcas::evaluate_trial(cfg.scene, out);

    json j;
    j["case"] = case_name;
    j["aoa_model_order"] = out.aoa_order;
    j["candidates"] = json::array();
    for (const auto& c : out.candidates) j["candidates"].push_back(candidate_to_json(c));
    j["ue_index"] = out.ue_index;
    if (out.ue_index >= 0) {
        j["ue_position"] = {out.ue_position.x(), out.ue_position.y(), out.ue_position.z()};
        j["ue_range_error_m"] = err.ue_range_error;
        j["ue_position_error_m"] = err.ue_position_error;
    }
    j["miss_count"] = err.miss_count;
    j["infeasible_count"] = err.infeasible_count;
    json sc = json::array();
    for (size_t k = 0; k < err.scatterer_found.size(); ++k) {
        json e;
        e["found"] = static_cast<bool>(err.scatterer_found[k]);
        if (err.scatterer_found[k]) e["range_error_m"] = err.scatterer_range_error[k];
        e["feasible"] = static_cast<bool>(err.scatterer_feasible[k]);
        if (err.scatterer_feasible[k]) e["position_error_m"] = err.scatterer_position_error[k];
        sc.push_back(e);
    }
    j["scatterers"] = sc;

    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot open '" + out_path + "'");
        f << j.dump(2) << "\n";
        std::cerr << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path, int trials_override,
              long long seed_override, const std::vector<std::string>& cases_override) {
    jcas::ExperimentConfig cfg = load_or_die(config_path);
    if (trials_override > 0) cfg.sweep.trials = trials_override;
    if (seed_override >= 0) cfg.sweep.base_seed = static_cast<unsigned int>(seed_override);
    if (!cases_override.empty()) cfg.sweep.cases = cases_override;

    const jcas::SweepResult result = jcas::run_sweep(cfg);
    for (const auto& p : result.points) {
        std::cerr << "case=" << p.case_name << " " << cfg.sweep.axis << "=" << p.sweep_value
                  << " trials=" << p.trials << " ue_range_rmse=" << p.ue_range_rmse
                  << " m, misses=" << p.miss_count << "\n";
    }
    if (out_path.empty()) {
        jcas::write_csv(std::cout, result.rows);
    } else {
        jcas::write_csv(out_path, result.rows);
        std::cerr << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_crb(const std::string& config_path, std::vector<double> snr_db, bool array_gain) {
    const jcas::ExperimentConfig cfg = load_or_die(config_path);
    if (snr_db.empty()) {
        if (cfg.sweep.axis == "snr_db") snr_db = cfg.sweep.values;
        if (snr_db.empty()) {
            std::cerr << "no SNR points: pass --snr-db or configure an snr_db sweep\n";
            return 1;
        }
    }
    const double gain = array_gain ? static_cast<double>(cfg.scene.bs_array.size()) : 1.0;
    std::cout << "snr_db,crb_m2,sqrt_crb_m\n";
    for (double s : snr_db) {
        const double c = jcas::crb_range(jcas::from_db(s) * gain, cfg.ofdm);
        std::cout << jcas::format_csv_number(s) << ',' << jcas::format_csv_number(c) << ','
                  << jcas::format_csv_number(std::sqrt(c)) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uplink joint communication and sensing toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, csi_path, case_name = "kf";
    unsigned long long seed = 1;
    int trials_override = 0;
    long long seed_override = -1;
    std::vector<std::string> cases_override;
    std::vector<double> snr_db;
    bool array_gain = false;

    auto* sim = app.add_subcommand("simulate", "synthesize a CSI tensor and write it to disk");
    sim->add_option("--config", config_path, "experiment INI file")->required();
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--out", out_path, "output tensor path")->required();

    auto* sense = app.add_subcommand("sense", "run the estimation chain on a stored CSI tensor");
    sense->add_option("--config", config_path, "experiment INI file")->required();
    sense->add_option("--csi", csi_path, "input tensor path")->required();
    sense->add_option("--case", case_name, "processing case")
        ->check(CLI::IsMember({"kf", "plain"}));
    sense->add_option("--out", out_path, "JSON output path (default: stdout)");

    auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep from the [sweep] section");
    sweep->add_option("--config", config_path, "experiment INI file")->required();
    sweep->add_option("--out", out_path, "CSV output path (default: stdout)");
    sweep->add_option("--trials", trials_override, "override [sweep] trials");
    sweep->add_option("--seed", seed_override, "override [sweep] base_seed");
    sweep->add_option("--case", cases_override, "override [sweep] cases")
        ->check(CLI::IsMember({"kf", "plain"}));

    auto* crb = app.add_subcommand("crb", "closed-form range CRB for the configured numerology");
    crb->add_option("--config", config_path, "experiment INI file")->required();
    crb->add_option("--snr-db", snr_db, "sensing SNR points in dB");
    crb->add_flag("--array-gain", array_gain, "fold the BS array gain into the SNR");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(config_path, seed, out_path);
        if (sense->parsed()) return cmd_sense(config_path, csi_path, case_name, out_path);
        if (sweep->parsed())
            return cmd_sweep(config_path, out_path, trials_override, seed_override, cases_override);
        if (crb->parsed()) return cmd_crb(config_path, snr_db, array_gain);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
