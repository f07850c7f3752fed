#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "jcas/config.hpp"
#include "jcas/io.hpp"
#include "scene_fixture.hpp"

using Catch::Approx;
using namespace jcas;

namespace {

const char* kReferenceIni = R"ini(
# Reference scene (see configs/baseline.ini)
[scene]
carrier_hz      = 28e9
bs_position     = 50 4.75 7
bs_array        = 8 8
ue_position     = 140 0 2
ue_velocity_kmh = -40 0 0
ue_array        = 1 1
scatterer       = 60 3 3 0 0 0 10

[ofdm]
subcarriers        = 256
packets            = 64
symbols_per_packet = 7
subcarrier_spacing = 480e3
tx_power           = 0.34531
noise_power        = 4.9177e-12

[clock]
timing_std = 5e-9
cfo_std    = 240

[sweep]
axis      = snr_db
values    = 8 12 16   ; three SNR points
trials    = 100
base_seed = 2024
cases     = kf plain

[search]
azimuth_deg   = -90 90
elevation_deg = 91 179
aoa_grid      = 64 64
doppler_grid  = 256
range_grid    = 512
)ini";

}  // namespace

TEST_CASE("parse_ini keeps section order, comments and duplicates", "[config]") {
    std::istringstream in(
        "[alpha]\n"
        "a = 1  # trailing comment\n"
        "a = 2\n"
        "; full-line comment\n"
        "[beta]\n"
        "b = hello world\n");
    const auto sections = parse_ini(in);
    REQUIRE(sections.size() == 2);
    REQUIRE(sections[0].name == "alpha");
    REQUIRE(sections[0].entries.size() == 2);
    REQUIRE(sections[0].entries[0] == std::pair<std::string, std::string>{"a", "1"});
    REQUIRE(sections[0].entries[1].second == "2");
    REQUIRE(sections[1].entries[0].second == "hello world");
}

TEST_CASE("parse_ini rejects malformed lines", "[config]") {
    std::istringstream unterminated("[scene\n");
    REQUIRE_THROWS_AS(parse_ini(unterminated), std::invalid_argument);
    std::istringstream no_eq("[s]\nvalue without equals\n");
    REQUIRE_THROWS_AS(parse_ini(no_eq), std::invalid_argument);
    std::istringstream orphan("key = 1\n");
    REQUIRE_THROWS_AS(parse_ini(orphan), std::invalid_argument);
}

TEST_CASE("experiment config loads the reference INI", "[config]") {
    std::istringstream in(kReferenceIni);
    const ExperimentConfig cfg = load_experiment_config(in);

    REQUIRE((cfg.scene.bs_position - Vector3d{50.0, 4.75, 7.0}).norm() < 1e-12);
    REQUIRE(cfg.scene.bs_array.rows == 8);
    REQUIRE(cfg.scene.bs_array.cols == 8);
    REQUIRE(cfg.scene.bs_array.carrier_hz == Approx(28e9));
    REQUIRE(cfg.scene.bs_array.spacing ==
            Approx(0.5 * kSpeedOfLight / 28e9).epsilon(1e-12));
    REQUIRE(cfg.scene.ue_array.size() == 1);
    // -40 km/h along x becomes m/s on load.
    REQUIRE(cfg.scene.ue_velocity.x() == Approx(-40.0 / 3.6).epsilon(1e-12));
    REQUIRE(cfg.scene.scatterers.size() == 1);
    REQUIRE((cfg.scene.scatterers[0].position - Vector3d{60.0, 3.0, 3.0}).norm() < 1e-12);
    REQUIRE(cfg.scene.scatterers[0].velocity.norm() == 0.0);
    REQUIRE(cfg.scene.scatterers[0].reflection_var == Approx(10.0));

    REQUIRE(cfg.ofdm.subcarriers == 256);
    REQUIRE(cfg.ofdm.packets == 64);
    REQUIRE(cfg.ofdm.symbols_per_packet == 7);
    REQUIRE(cfg.ofdm.subcarrier_spacing == Approx(480e3));
    REQUIRE(cfg.ofdm.tx_power == Approx(0.34531));
    REQUIRE(cfg.ofdm.noise_power == Approx(4.9177e-12));

    REQUIRE(cfg.clock.timing_std == Approx(5e-9));
    REQUIRE(cfg.clock.cfo_std == Approx(240.0));

    REQUIRE(cfg.sweep.axis == "snr_db");
    REQUIRE(cfg.sweep.values == std::vector<double>{8.0, 12.0, 16.0});
    REQUIRE(cfg.sweep.trials == 100);
    REQUIRE(cfg.sweep.base_seed == 2024u);
    REQUIRE(cfg.sweep.cases == std::vector<std::string>{"kf", "plain"});

    REQUIRE(cfg.search.elevation_lo_deg == Approx(91.0));
    REQUIRE(cfg.search.elevation_hi_deg == Approx(179.0));
    const SearchConfig aoa = cfg.search.aoa_search();
    REQUIRE(aoa.lo[1] == Approx(deg2rad(91.0)));
    REQUIRE(aoa.hi[0] == Approx(deg2rad(90.0)));
    REQUIRE(cfg.search.range_search(cfg.ofdm.subcarrier_spacing).grid[0] == 512);
}

TEST_CASE("config rejects unknown keys, sections and cases", "[config]") {
    std::istringstream bad_key("[scene]\ncarrier_hz = 28e9\nwhat = 1\n");
    REQUIRE_THROWS_AS(load_experiment_config(bad_key), std::invalid_argument);
    std::istringstream bad_sec("[scene]\ncarrier_hz = 28e9\n[nope]\nx = 1\n");
    REQUIRE_THROWS_AS(load_experiment_config(bad_sec), std::invalid_argument);
    std::istringstream bad_case("[scene]\ncarrier_hz = 28e9\n[sweep]\ncases = magic\n");
    REQUIRE_THROWS_AS(load_experiment_config(bad_case), std::invalid_argument);
    std::istringstream no_scene("[ofdm]\nsubcarriers = 16\n");
    REQUIRE_THROWS_AS(load_experiment_config(no_scene), std::invalid_argument);
    std::istringstream no_carrier("[scene]\nbs_position = 0 0 0\n");
    REQUIRE_THROWS_AS(load_experiment_config(no_carrier), std::invalid_argument);
    std::istringstream bad_vec("[scene]\ncarrier_hz = 28e9\nbs_position = 1 2\n");
    REQUIRE_THROWS_AS(load_experiment_config(bad_vec), std::invalid_argument);
}

TEST_CASE("scatterer entries accept the short position-only form", "[config]") {
    std::istringstream in(
        "[scene]\n"
        "carrier_hz = 28e9\n"
        "scatterer = 1 2 3\n"
        "scatterer = 4 5 6 7.2 0 0 2.5\n");
    const ExperimentConfig cfg = load_experiment_config(in);
    REQUIRE(cfg.scene.scatterers.size() == 2);
    REQUIRE(cfg.scene.scatterers[0].reflection_var == Approx(1.0));  // default
    REQUIRE(cfg.scene.scatterers[1].velocity.x() == Approx(7.2 / 3.6).epsilon(1e-12));
    REQUIRE(cfg.scene.scatterers[1].reflection_var == Approx(2.5));
}

TEST_CASE("CSI tensors round trip bit-exactly", "[io]") {
    std::mt19937_64 rng(77);
    CsiTensor t(3, 4, 5);
    for (Cplx& v : t.data) v = draw_cn(rng, 1.0);

    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    save_csi(buf, t);

    std::string header;
    std::stringstream probe(buf.str());
    std::getline(probe, header);
    REQUIRE(header == "jcas-csi 1 antennas=3 subcarriers=4 packets=5");

    buf.seekg(0);
    const CsiTensor back = load_csi(buf);
    REQUIRE(back.antennas == 3);
    REQUIRE(back.subcarriers == 4);
    REQUIRE(back.packets == 5);
    REQUIRE(back.data.size() == t.data.size());
    for (size_t i = 0; i < t.data.size(); ++i) REQUIRE(back.data[i] == t.data[i]);
}

TEST_CASE("CSI loader rejects corrupted streams", "[io]") {
    CsiTensor t(2, 2, 2);
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    save_csi(buf, t);
    const std::string payload = buf.str();

    std::stringstream bad_magic("jcas-xxx 1 antennas=2 subcarriers=2 packets=2\n");
    REQUIRE_THROWS_AS(load_csi(bad_magic), std::runtime_error);

    std::stringstream truncated(payload.substr(0, payload.size() - 8));
    REQUIRE_THROWS_AS(load_csi(truncated), std::runtime_error);

    std::stringstream trailing(payload + "x");
    REQUIRE_THROWS_AS(load_csi(trailing), std::runtime_error);
}

TEST_CASE("CSV writer emits the stable schema", "[io]") {
    std::vector<CsvRow> rows;
    rows.push_back({"snr_db", 8.0, "ue", "range_rmse_m", 0.5, 100, "kf"});
    rows.push_back({"snr_db", 16.0, "all", "miss_count", 3.0, 100, "plain"});
    std::ostringstream out;
    write_csv(out, rows);
    REQUIRE(out.str() ==
            "sweep_name,sweep_value,target_kind,metric,value,trials,case\n"
            "snr_db,8,ue,range_rmse_m,0.5,100,kf\n"
            "snr_db,16,all,miss_count,3,100,plain\n");

    std::ostringstream empty;
    write_csv(empty, {});
    REQUIRE(empty.str() == "sweep_name,sweep_value,target_kind,metric,value,trials,case\n");
}
