#pragma once

// Resolved pipeline configuration and its JSON form.

#include "isbp/echo.hpp"
#include "isbp/estimation.hpp"
#include "isbp/fusion.hpp"
#include "isbp/kinematics.hpp"

#include <json.hpp>

#include <filesystem>
#include <numbers>
#include <optional>
#include <vector>

namespace isbp {

struct BsPlacement {
    double x = 0.0;
    double y = 0.0;
    double boresight = 0.0;
    int antennas = 8;
};

enum class NlosFill { ForwardFill, Zero };

struct DatasetOptions {
    Range snr_db{0.0, 10.0};
    double weather_loss_db = 20.0;
    double nlos_drop_rate = 0.75;
    NlosFill nlos_fill = NlosFill::ForwardFill;
    double radar_pos_std = 0.2;      ///< m, clear weather
    double radar_vel_std = 0.1;      ///< m/s, clear weather
    double weather_noise_scale = 10.0; ///< amplitude factor for a 20 dB power loss
    double val_fraction = 0.2;
    double test_fraction = 0.2;      ///< test set size relative to n_samples
    double following_share = 1.0 / 7.0; ///< fraction of the test set drawn from Following
    double min_coverage = 0.5;

    void validate() const;
};

struct PipelineConfig {
    ScenarioConfig scenario;
    KinematicRanges ranges;
    WaveformConfig waveform;
    std::vector<BsPlacement> base_stations{{0.0, 0.0, 0.0, 8}, {500.0, 0.0, std::numbers::pi, 8}};
    GridSpec grid;
    KalmanConfig kalman;
    DatasetOptions dataset;

    std::vector<BsConfig> make_bss() const;

    /// Validates every section; throws ConfigError.
    void validate() const;

    /// Reduced ISAC rate (R_h = R_l = 100 Hz) for quick runs.
    static PipelineConfig desk();
};

nlohmann::json config_to_json(const PipelineConfig& cfg);

/// Missing keys keep their defaults; unknown keys are rejected with ConfigError.
PipelineConfig config_from_json(const nlohmann::json& j);

PipelineConfig load_config(const std::filesystem::path& path);

/// `path` if given, else $ISBP_CONFIG if set, else defaults.
PipelineConfig resolve_config(const std::optional<std::filesystem::path>& path);

} // namespace isbp
