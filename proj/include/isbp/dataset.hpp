#pragma once

// End-to-end sample synthesis for the five evaluation cases, the dataset
// manifest and the parallel builder.

#include "isbp/config.hpp"
#include "isbp/fusion.hpp"
#include "isbp/kinematics.hpp"
#include "isbp/phys_info.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace isbp {

enum class TvSource { GroundTruth, IsacPipeline, OnboardRadar };
enum class Impairment { None, WeatherLoss, NlosDrop };

struct CaseSpec {
    int id = 1;
    TvSource source = TvSource::GroundTruth;
    Impairment impairment = Impairment::None;

    /// Case 1 = truth, 2 = ISAC + weather, 3 = radar, 4 = radar + NLoS, 5 = radar + weather.
    /// Throws ConfigError outside 1..5.
    static CaseSpec from_id(int id);
};

std::string_view source_name(TvSource s);
std::string_view impairment_name(Impairment i);

/// Per-snapshot ISAC sensing of a TV window followed by CA Kalman filtering.
/// `raw` (optional) receives the unfiltered per-snapshot fixes.
PhysInfoMatrix isac_track(const PhysInfoMatrix& tv_truth, const PipelineConfig& cfg, double snr_db,
                          std::uint64_t seed, std::vector<std::optional<Fix>>* raw = nullptr);

struct RadarMeasurement {
    PhysInfoMatrix filtered;
    std::vector<Fix> raw; ///< noisy global-frame fixes before filtering
};

/// Onboard-radar baseline: relative state against the zero-order-held UV,
/// Gaussian noise (scaled under weather loss), back to global, then filtered.
RadarMeasurement measure_onboard_radar(const PhysInfoMatrix& tv_truth, const PhysInfoMatrix& uv,
                                       const CaseSpec& c, const PipelineConfig& cfg, std::uint64_t seed);

/// Columns kept by an i.i.d. drop at `rate`; column 0 is always kept.
std::vector<bool> nlos_keep_mask(Eigen::Index columns, double rate, std::uint64_t seed);

/// Replaces dropped columns by the last kept column (or zeros).
PhysInfoMatrix apply_nlos_drop(const PhysInfoMatrix& p, double rate, std::uint64_t seed,
                               NlosFill fill = NlosFill::ForwardFill);

struct Sample {
    std::uint64_t id = 0;
    std::uint64_t seed = 0;
    int case_id = 1;
    BehaviorClass behavior = BehaviorClass::Following;
    double snr_db = 0.0;
    double window_start = 0.0;
    PhysInfoMatrix tv;       ///< P_tv as delivered for this case
    PhysInfoMatrix tv_truth; ///< ground truth over the same window
    PhysInfoMatrix uv;       ///< P_uv

    int label() const { return label_of(behavior); }
};

/// Synthesizes one sample. Pure function of its arguments.
Sample make_sample(const PipelineConfig& cfg, const CaseSpec& c, std::uint64_t id, BehaviorClass behavior,
                   std::uint64_t seed, std::optional<double> snr_override = std::nullopt);

enum class Split { Train, Val, Test };
std::string_view split_name(Split s);
Split parse_split(std::string_view s);

struct ManifestRecord {
    std::uint64_t id = 0;
    int label = 0;
    Split split = Split::Train;
    std::string path;
    std::uint64_t seed = 0;
    double snr_db = 0.0;
    double window_start = 0.0;
};

struct DatasetManifest {
    int format_version = 1;
    std::string fingerprint;
    int case_id = 1;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    int tv_columns = 0;
    int uv_columns = 0;
    nlohmann::json config;
    std::vector<ManifestRecord> records;
    std::map<std::string, std::uint64_t> split_counts;
    std::map<std::string, std::uint64_t> class_histogram;

    nlohmann::json to_json() const;
    static DatasetManifest from_json(const nlohmann::json& j);
};

/// SHA-256 (hex) of the canonical JSON of {config, case, n, seed}.
std::string config_fingerprint(const PipelineConfig& cfg, int case_id, std::uint64_t n_samples,
                               std::uint64_t seed);

/// Sample ids, labels, splits and seeds without synthesizing anything.
/// Ids 0..n-1 are the class-balanced known-class train/val pool; the test
/// set (known classes plus the Following pool) follows with fresh ids.
std::vector<ManifestRecord> plan_dataset(const PipelineConfig& cfg, std::uint64_t n_samples, std::uint64_t seed);

struct BuildOptions {
    unsigned workers = 0; ///< 0 selects the hardware concurrency
};

/// Writes samples/<id>.isbp and manifest.json under `out_dir`.
DatasetManifest build_dataset(const PipelineConfig& cfg, const CaseSpec& c, std::uint64_t n_samples,
                              std::uint64_t seed, const std::filesystem::path& out_dir, const BuildOptions& opt = {});

DatasetManifest load_manifest(const std::filesystem::path& path);

} // namespace isbp
