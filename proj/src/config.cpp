#include "isbp/config.hpp"

#include "isbp/errors.hpp"

#include <cstdlib>
#include <fstream>
#include <string>

namespace isbp {

NLOHMANN_JSON_SERIALIZE_ENUM(NlosFill, {{NlosFill::ForwardFill, "forward_fill"}, {NlosFill::Zero, "zero"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Range, lo, hi)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BsPlacement, x, y, boresight, antennas)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ScenarioConfig, scenario_length, window_length, isac_rate,
                                                onboard_rate, lane_width, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(KinematicRanges, road_y, start_x, initial_speed, onset, brake_peak,
                                                brake_ramp, brake_hold, brake_min_final_speed, accel_peak, accel_ramp,
                                                accel_hold, lane_change_duration, overtake_lane_change_duration,
                                                overtake_delta_v, overtake_pass_hold, overtake_gap,
                                                overtake_speed_deficit, swerve_displacement, swerve_leg_duration,
                                                following_speed, following_accel_jitter, following_gap, uv_offset_x,
                                                uv_speed_offset, uv_jitter_amplitude, uv_jitter_omega)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(WaveformConfig, carrier_hz, subcarrier_spacing_hz, num_subcarriers,
                                                num_symbols, symbol_duration_s, speed_of_light)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GridSpec, delay_padding, doppler_padding, angle_bins, guard_bins,
                                                refine_passes)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(KalmanConfig, process_noise, pos_var_floor, vel_var_floor,
                                                initial_std, pos_geometry_factor, vel_geometry_factor)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DatasetOptions, snr_db, weather_loss_db, nlos_drop_rate, nlos_fill,
                                                radar_pos_std, radar_vel_std, weather_noise_scale, val_fraction,
                                                test_fraction, following_share, min_coverage)

namespace {

void reject_unknown(const nlohmann::json& input, const nlohmann::json& known, const std::string& path) {
    if (input.is_object() && known.is_object()) {
        for (const auto& [key, value] : input.items()) {
            const auto it = known.find(key);
            if (it == known.end()) {
                throw ConfigError("unknown configuration key: " + path + key);
            }
            reject_unknown(value, *it, path + key + ".");
        }
    } else if (input.is_array() && known.is_array() && !known.empty() && known.front().is_object()) {
        for (const auto& item : input) {
            reject_unknown(item, known.front(), path);
        }
    }
}

} // namespace

void DatasetOptions::validate() const {
    if (!(snr_db.lo <= snr_db.hi) || !std::isfinite(snr_db.lo) || !std::isfinite(snr_db.hi)) {
        throw ConfigError("invalid SNR range");
    }
    if (!(nlos_drop_rate >= 0.0 && nlos_drop_rate < 1.0)) {
        throw ConfigError("NLoS drop rate must lie in [0, 1)");
    }
    if (!(radar_pos_std >= 0.0 && radar_vel_std >= 0.0 && weather_noise_scale >= 0.0)) {
        throw ConfigError("radar noise parameters must be non-negative");
    }
    if (!(val_fraction >= 0.0 && val_fraction < 1.0) || !(test_fraction >= 0.0) ||
        !(following_share >= 0.0 && following_share <= 1.0)) {
        throw ConfigError("invalid split fractions");
    }
    if (!(min_coverage > 0.0 && min_coverage <= 1.0)) {
        throw ConfigError("coverage fraction must lie in (0, 1]");
    }
}

std::vector<BsConfig> PipelineConfig::make_bss() const {
    std::vector<BsConfig> out;
    out.reserve(base_stations.size());
    for (std::size_t i = 0; i < base_stations.size(); ++i) {
        const auto& b = base_stations[i];
        out.push_back(BsConfig::make(static_cast<int>(i) + 1, b.x, b.y, waveform, b.boresight, b.antennas));
    }
    return out;
}

void PipelineConfig::validate() const {
    scenario.validate();
    ranges.validate();
    waveform.validate();
    grid.validate();
    kalman.validate();
    dataset.validate();
    if (base_stations.size() < 2) {
        throw ConfigError("at least two base stations are required");
    }
    for (const auto& bs : make_bss()) {
        bs.validate();
    }
}

PipelineConfig PipelineConfig::desk() {
    PipelineConfig cfg;
    cfg.scenario.isac_rate = 100;
    return cfg;
}

nlohmann::json config_to_json(const PipelineConfig& cfg) {
    return {
        {"scenario", cfg.scenario},   {"ranges", cfg.ranges}, {"waveform", cfg.waveform},
        {"base_stations", cfg.base_stations}, {"grid", cfg.grid},     {"kalman", cfg.kalman},
        {"dataset", cfg.dataset},
    };
}

PipelineConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("configuration must be a JSON object");
    }
    PipelineConfig cfg;
    try {
        cfg.scenario = j.value("scenario", cfg.scenario);
        cfg.ranges = j.value("ranges", cfg.ranges);
        cfg.waveform = j.value("waveform", cfg.waveform);
        cfg.base_stations = j.value("base_stations", cfg.base_stations);
        cfg.grid = j.value("grid", cfg.grid);
        cfg.kalman = j.value("kalman", cfg.kalman);
        cfg.dataset = j.value("dataset", cfg.dataset);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    reject_unknown(j, config_to_json(cfg), "");
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open configuration file " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

PipelineConfig resolve_config(const std::optional<std::filesystem::path>& path) {
    if (path) return load_config(*path);
    if (const char* env = std::getenv("ISBP_CONFIG"); env && *env) return load_config(env);
    PipelineConfig cfg;
    cfg.validate();
    return cfg;
}

} // namespace isbp
