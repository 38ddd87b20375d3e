#include "isbp/dataset.hpp"

#include "isbp/echo.hpp"
#include "isbp/errors.hpp"
#include "isbp/estimation.hpp"
#include "isbp/rng.hpp"
#include "isbp/sample_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace isbp {
namespace {

// Child-seed slots of one sample.
enum SeedSlot : std::uint64_t { kTrajectory = 1, kWindow = 2, kSnr = 3, kSensing = 4, kNlos = 5 };

double draw_snr(const PipelineConfig& cfg, std::uint64_t sample_seed) {
    Rng rng(derive_seed(sample_seed, {kSnr}));
    return rng.uniform(cfg.dataset.snr_db.lo, cfg.dataset.snr_db.hi);
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    constexpr char kDigits[] = "0123456789abcdef";
    for (unsigned int i = 0; i < len; ++i) {
        hex.push_back(kDigits[digest[i] >> 4]);
        hex.push_back(kDigits[digest[i] & 0xF]);
    }
    return hex;
}

std::string sample_path(std::uint64_t id) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "samples/%06llu.isbp", static_cast<unsigned long long>(id));
    return buf;
}

} // namespace

CaseSpec CaseSpec::from_id(int id) {
    switch (id) {
    case 1: return {1, TvSource::GroundTruth, Impairment::None};
    case 2: return {2, TvSource::IsacPipeline, Impairment::WeatherLoss};
    case 3: return {3, TvSource::OnboardRadar, Impairment::None};
    case 4: return {4, TvSource::OnboardRadar, Impairment::NlosDrop};
    case 5: return {5, TvSource::OnboardRadar, Impairment::WeatherLoss};
    default: throw ConfigError("case id must be 1..5, got " + std::to_string(id));
    }
}

std::string_view source_name(TvSource s) {
    switch (s) {
    case TvSource::GroundTruth: return "ground_truth";
    case TvSource::IsacPipeline: return "isac_pipeline";
    case TvSource::OnboardRadar: return "onboard_radar";
    }
    return "?";
}

std::string_view impairment_name(Impairment i) {
    switch (i) {
    case Impairment::None: return "none";
    case Impairment::WeatherLoss: return "weather_loss";
    case Impairment::NlosDrop: return "nlos_drop";
    }
    return "?";
}

PhysInfoMatrix isac_track(const PhysInfoMatrix& tv_truth, const PipelineConfig& cfg, double snr_db,
                          std::uint64_t seed, std::vector<std::optional<Fix>>* raw) {
    const auto bss = cfg.make_bss();
    const auto count = static_cast<std::size_t>(tv_truth.columns());
    std::vector<std::optional<Fix>> fixes(count);
    std::vector<ParamEstimate> estimates(bss.size());
    for (std::size_t k = 0; k < count; ++k) {
        const StateSample truth = tv_truth.column(static_cast<Eigen::Index>(k));
        try {
            for (std::size_t b = 0; b < bss.size(); ++b) {
                const auto params = echo_params_from_truth(truth, bss[b], cfg.waveform);
                const auto cube = synth_echo(params, bss[b], cfg.waveform, snr_db, derive_seed(seed, {k, b}));
                estimates[b] = estimate_atd(cube, bss[b], cfg.waveform, cfg.grid);
            }
            fixes[k] = fuse_snapshot(estimates, bss, cfg.waveform, cfg.kalman);
        } catch (const GeometryError&) {
        } catch (const EstimationError&) {
        }
    }
    auto track = run_ca_kalman(fixes, tv_truth.rate_hz, cfg.kalman);
    if (raw) *raw = std::move(fixes);
    return track;
}

RadarMeasurement measure_onboard_radar(const PhysInfoMatrix& tv_truth, const PhysInfoMatrix& uv, const CaseSpec& c,
                                       const PipelineConfig& cfg, std::uint64_t seed) {
    if (uv.columns() == 0 || !(uv.rate_hz > 0.0)) {
        throw ConfigError("onboard radar needs a non-empty UV track");
    }
    const double scale = c.impairment == Impairment::WeatherLoss ? cfg.dataset.weather_noise_scale : 1.0;
    const double sp = cfg.dataset.radar_pos_std * scale;
    const double sv = cfg.dataset.radar_vel_std * scale;

    Rng rng(seed);
    RadarMeasurement out;
    out.raw.reserve(static_cast<std::size_t>(tv_truth.columns()));
    for (Eigen::Index k = 0; k < tv_truth.columns(); ++k) {
        // Latest UV state at or before this snapshot.
        const auto j = std::min<Eigen::Index>(uv.columns() - 1,
                                              static_cast<Eigen::Index>(std::floor(k * uv.rate_hz / tv_truth.rate_hz + 1e-9)));
        const auto t = tv_truth.values.col(k);
        const auto u = uv.values.col(j);
        const double rx = t(0) - u(0) + sp * rng.normal();
        const double ry = t(1) - u(1) + sp * rng.normal();
        const double rvx = t(2) - u(2) + sv * rng.normal();
        const double rvy = t(3) - u(3) + sv * rng.normal();
        out.raw.push_back({rx + u(0), ry + u(1), rvx + u(2), rvy + u(3), sp * sp, sv * sv});
    }
    const std::vector<std::optional<Fix>> fixes(out.raw.begin(), out.raw.end());
    out.filtered = run_ca_kalman(fixes, tv_truth.rate_hz, cfg.kalman);
    return out;
}

std::vector<bool> nlos_keep_mask(Eigen::Index columns, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw ConfigError("drop rate must lie in [0, 1)");
    }
    std::vector<bool> keep(static_cast<std::size_t>(columns), true);
    Rng rng(seed);
    for (std::size_t i = 1; i < keep.size(); ++i) {
        keep[i] = !rng.bernoulli(rate);
    }
    return keep;
}

PhysInfoMatrix apply_nlos_drop(const PhysInfoMatrix& p, double rate, std::uint64_t seed, NlosFill fill) {
    const auto keep = nlos_keep_mask(p.columns(), rate, seed);
    PhysInfoMatrix out = p;
    for (Eigen::Index c = 1; c < p.columns(); ++c) {
        if (keep[static_cast<std::size_t>(c)]) continue;
        if (fill == NlosFill::ForwardFill) {
            out.values.col(c) = out.values.col(c - 1);
        } else {
            out.values.col(c).setZero();
        }
    }
    return out;
}

Sample make_sample(const PipelineConfig& cfg, const CaseSpec& c, std::uint64_t id, BehaviorClass behavior,
                   std::uint64_t seed, std::optional<double> snr_override) {
    const auto traj = gen_trajectory(behavior, cfg.scenario, cfg.ranges, derive_seed(seed, {kTrajectory}));
    auto window = sample_window(traj, cfg.scenario, OnsetPolicy::coverage(cfg.dataset.min_coverage),
                                derive_seed(seed, {kWindow}));

    Sample s;
    s.id = id;
    s.seed = seed;
    s.case_id = c.id;
    s.behavior = behavior;
    s.snr_db = snr_override.value_or(draw_snr(cfg, seed));
    s.window_start = window.start_time;
    s.uv = std::move(window.uv);
    s.tv_truth = std::move(window.tv_truth);

    const std::uint64_t sensing_seed = derive_seed(seed, {kSensing});
    switch (c.source) {
    case TvSource::GroundTruth:
        s.tv = s.tv_truth;
        break;
    case TvSource::IsacPipeline: {
        const double snr = c.impairment == Impairment::WeatherLoss
                               ? apply_weather_loss(s.snr_db, cfg.dataset.weather_loss_db)
                               : s.snr_db;
        s.tv = isac_track(s.tv_truth, cfg, snr, sensing_seed);
        break;
    }
    case TvSource::OnboardRadar:
        s.tv = measure_onboard_radar(s.tv_truth, s.uv, c, cfg, sensing_seed).filtered;
        break;
    }
    if (c.impairment == Impairment::NlosDrop) {
        s.tv = apply_nlos_drop(s.tv, cfg.dataset.nlos_drop_rate, derive_seed(seed, {kNlos}), cfg.dataset.nlos_fill);
    }
    return s;
}

std::string_view split_name(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    }
    return "?";
}

Split parse_split(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw ConfigError("unknown split: " + std::string(s));
}

nlohmann::json DatasetManifest::to_json() const {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records) {
        recs.push_back({{"id", r.id},
                        {"label", r.label},
                        {"class", class_name(class_from_label(r.label))},
                        {"split", split_name(r.split)},
                        {"path", r.path},
                        {"seed", r.seed},
                        {"snr_db", r.snr_db},
                        {"window_start", r.window_start}});
    }
    return {{"format_version", format_version},
            {"fingerprint", fingerprint},
            {"case", case_id},
            {"n_samples", n_samples},
            {"seed", seed},
            {"tv_columns", tv_columns},
            {"uv_columns", uv_columns},
            {"config", config},
            {"records", recs},
            {"split_counts", split_counts},
            {"class_histogram", class_histogram}};
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
    DatasetManifest m;
    try {
        m.format_version = j.at("format_version").get<int>();
        m.fingerprint = j.at("fingerprint").get<std::string>();
        m.case_id = j.at("case").get<int>();
        m.n_samples = j.at("n_samples").get<std::uint64_t>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.tv_columns = j.at("tv_columns").get<int>();
        m.uv_columns = j.at("uv_columns").get<int>();
        m.config = j.at("config");
        for (const auto& r : j.at("records")) {
            m.records.push_back({r.at("id").get<std::uint64_t>(), r.at("label").get<int>(),
                                 parse_split(r.at("split").get<std::string>()), r.at("path").get<std::string>(),
                                 r.at("seed").get<std::uint64_t>(), r.at("snr_db").get<double>(),
                                 r.at("window_start").get<double>()});
        }
        m.split_counts = j.at("split_counts").get<std::map<std::string, std::uint64_t>>();
        m.class_histogram = j.at("class_histogram").get<std::map<std::string, std::uint64_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed manifest: ") + e.what());
    }
    if (m.format_version != 1) {
        throw ConfigError("unsupported manifest version " + std::to_string(m.format_version));
    }
    return m;
}

std::string config_fingerprint(const PipelineConfig& cfg, int case_id, std::uint64_t n_samples, std::uint64_t seed) {
    const nlohmann::json canonical = {
        {"config", config_to_json(cfg)}, {"case", case_id}, {"n", n_samples}, {"seed", seed}};
    return sha256_hex(canonical.dump());
}

std::vector<ManifestRecord> plan_dataset(const PipelineConfig& cfg, std::uint64_t n_samples, std::uint64_t seed) {
    std::vector<BehaviorClass> known;
    for (auto c : kAllClasses) {
        if (!open_set_only(c)) known.push_back(c);
    }
    const std::uint64_t g = known.size();

    std::vector<ManifestRecord> out;
    const auto add = [&](std::uint64_t id, BehaviorClass c, Split split) {
        ManifestRecord r;
        r.id = id;
        r.label = label_of(c);
        r.split = split;
        r.path = sample_path(id);
        r.seed = derive_seed(seed, {id});
        r.snr_db = draw_snr(cfg, r.seed);
        out.push_back(std::move(r));
    };

    for (std::uint64_t i = 0; i < n_samples; ++i) {
        const std::uint64_t cls = i % g;
        const std::uint64_t rank = i / g;
        const std::uint64_t class_count = n_samples / g + (cls < n_samples % g ? 1 : 0);
        const auto n_train = static_cast<std::uint64_t>(std::llround((1.0 - cfg.dataset.val_fraction) * class_count));
        add(i, known[cls], rank < n_train ? Split::Train : Split::Val);
    }

    const auto n_test = static_cast<std::uint64_t>(std::llround(cfg.dataset.test_fraction * n_samples));
    const auto n_following = static_cast<std::uint64_t>(std::llround(cfg.dataset.following_share * n_test));
    const std::uint64_t n_known_test = n_test - n_following;
    for (std::uint64_t j = 0; j < n_test; ++j) {
        add(n_samples + j, j < n_known_test ? known[j % g] : BehaviorClass::Following, Split::Test);
    }
    return out;
}

DatasetManifest build_dataset(const PipelineConfig& cfg, const CaseSpec& c, std::uint64_t n_samples,
                              std::uint64_t seed, const std::filesystem::path& out_dir, const BuildOptions& opt) {
    cfg.validate();
    const CaseSpec spec = CaseSpec::from_id(c.id);
    if (spec.source != c.source || spec.impairment != c.impairment) {
        throw ConfigError("case specification does not match case id " + std::to_string(c.id));
    }
    std::filesystem::create_directories(out_dir / "samples");

    DatasetManifest m;
    m.fingerprint = config_fingerprint(cfg, c.id, n_samples, seed);
    m.case_id = c.id;
    m.n_samples = n_samples;
    m.seed = seed;
    m.tv_columns = cfg.scenario.tv_window_samples();
    m.uv_columns = cfg.scenario.uv_window_samples();
    m.config = config_to_json(cfg);
    m.records = plan_dataset(cfg, n_samples, seed);

    unsigned workers = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, m.records.size())));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto work = [&] {
        for (std::size_t i = next++; i < m.records.size() && !failed; i = next++) {
            auto& rec = m.records[i];
            try {
                const auto s = make_sample(cfg, spec, rec.id, class_from_label(rec.label), rec.seed);
                write_sample(out_dir / rec.path, SampleRecord::from(s.label(), s.tv, s.uv));
                rec.window_start = s.window_start;
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    pool.clear();
    if (error) std::rethrow_exception(error);

    for (const auto& r : m.records) {
        ++m.split_counts[std::string(split_name(r.split))];
        ++m.class_histogram[std::string(class_name(class_from_label(r.label)))];
    }

    std::ofstream out(out_dir / "manifest.json", std::ios::trunc);
    out << m.to_json().dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("cannot write manifest under " + out_dir.string());
    }
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open manifest " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("cannot parse manifest " + path.string() + ": " + e.what());
    }
    return DatasetManifest::from_json(j);
}

} // namespace isbp
