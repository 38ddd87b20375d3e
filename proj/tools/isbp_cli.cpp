// Command-line front end: dataset generation, manifest inspection, metric
// evaluation of prediction files and SNR sweeps of the sensing pipeline.

#include "isbp/config.hpp"
#include "isbp/dataset.hpp"
#include "isbp/errors.hpp"
#include "isbp/metrics.hpp"
#include "isbp/rng.hpp"
#include "isbp/sample_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void emit(const json& j) { std::cout << j.dump() << '\n'; }

isbp::PipelineConfig make_config(const std::optional<fs::path>& path, bool scale) {
    auto cfg = isbp::resolve_config(path);
    if (scale) {
        cfg.scenario.isac_rate = isbp::PipelineConfig::desk().scenario.isac_rate;
        cfg.validate();
    }
    return cfg;
}

int run_gen(int case_id, std::optional<std::uint64_t> n, std::uint64_t seed, const fs::path& out, bool scale,
            const std::optional<fs::path>& config, unsigned workers) {
    const auto cfg = make_config(config, scale);
    const std::uint64_t count = n.value_or(scale ? 600 : 6000);
    const auto m = isbp::build_dataset(cfg, isbp::CaseSpec::from_id(case_id), count, seed, out, {workers});
    emit({{"event", "dataset"},
          {"case", m.case_id},
          {"n_samples", m.n_samples},
          {"seed", m.seed},
          {"fingerprint", m.fingerprint},
          {"tv_columns", m.tv_columns},
          {"uv_columns", m.uv_columns},
          {"split_counts", m.split_counts},
          {"class_histogram", m.class_histogram},
          {"manifest", (out / "manifest.json").string()}});
    return 0;
}

int run_inspect(const fs::path& manifest_path, bool verify) {
    const auto m = isbp::load_manifest(manifest_path);
    emit({{"event", "manifest"},
          {"case", m.case_id},
          {"n_samples", m.n_samples},
          {"records", m.records.size()},
          {"seed", m.seed},
          {"fingerprint", m.fingerprint},
          {"tv_columns", m.tv_columns},
          {"uv_columns", m.uv_columns},
          {"split_counts", m.split_counts},
          {"class_histogram", m.class_histogram}});
    if (!verify) return 0;
    std::size_t bad = 0;
    const auto root = manifest_path.parent_path();
    for (const auto& r : m.records) {
        try {
            const auto s = isbp::read_sample(root / r.path);
            if (s.label != r.label || s.tv.cols() != m.tv_columns || s.uv.cols() != m.uv_columns) {
                throw std::runtime_error("header disagrees with manifest");
            }
        } catch (const std::exception& e) {
            ++bad;
            emit({{"event", "invalid_sample"}, {"id", r.id}, {"path", r.path}, {"error", e.what()}});
        }
    }
    emit({{"event", "verify"}, {"checked", m.records.size()}, {"invalid", bad}});
    return bad == 0 ? 0 : 1;
}

int run_eval(const fs::path& pred_path, const fs::path& manifest_path, const std::string& split,
             const std::string& format) {
    const auto m = isbp::load_manifest(manifest_path);
    std::map<std::uint64_t, const isbp::ManifestRecord*> record_of;
    for (const auto& r : m.records) record_of[r.id] = &r;
    const auto preds = isbp::read_predictions(pred_path);
    std::vector<int> truth, predicted;
    std::vector<double> scores;
    std::vector<bool> known;
    bool have_scores = true;
    for (const auto& p : preds) {
        const auto it = record_of.find(p.sample_id);
        if (it == record_of.end()) {
            throw isbp::InputError("prediction for a sample id not in the manifest", p.sample_id);
        }
        const auto& rec = *it->second;
        if (split != "all" && isbp::split_name(rec.split) != split) continue;
        truth.push_back(rec.label);
        predicted.push_back(p.predicted_label);
        have_scores = have_scores && !p.confidence.empty();
        scores.push_back(p.max_confidence());
        known.push_back(!isbp::open_set_only(isbp::class_from_label(rec.label)));
    }
    const auto cm = isbp::confusion(predicted, truth, isbp::kNumClasses);
    auto report = isbp::prf1(cm);
    const bool both = std::find(known.begin(), known.end(), true) != known.end() &&
                      std::find(known.begin(), known.end(), false) != known.end();
    if (have_scores && both) report.roc = isbp::roc_auc(scores, known);

    if (format == "table") {
        std::cout << isbp::format_report(report);
    } else {
        auto j = isbp::report_to_json(report, cm);
        j["event"] = "metrics";
        j["split"] = split;
        j["n"] = truth.size();
        emit(j);
    }
    return 0;
}

double rmse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return std::sqrt((a - b).colwise().squaredNorm().mean());
}

int run_sweep(const std::vector<double>& snrs, int trials, int snapshots, std::uint64_t seed, bool scale,
              const std::optional<fs::path>& config, const std::string& cls) {
    auto cfg = make_config(config, scale);
    const auto behavior = isbp::parse_class(cls);
    if (!behavior) throw isbp::ConfigError("unknown class " + cls);
    for (double snr : snrs) {
        std::vector<double> pos, vel;
        for (int t = 0; t < trials; ++t) {
            const std::uint64_t trial_seed = isbp::derive_seed(seed, {static_cast<std::uint64_t>(t)});
            const auto traj = isbp::gen_trajectory(*behavior, cfg.scenario, cfg.ranges, trial_seed);
            const int count = std::min<int>(snapshots, static_cast<int>(traj.tv_truth.size()));
            const auto truth = isbp::PhysInfoMatrix::from_states(std::span(traj.tv_truth).first(count),
                                                                 cfg.scenario.isac_rate);
            const auto track = isbp::isac_track(truth, cfg, snr, isbp::derive_seed(trial_seed, {1}));
            pos.push_back(rmse(track.values.topRows(2), truth.values.topRows(2)));
            vel.push_back(rmse(track.values.middleRows(2, 2), truth.values.middleRows(2, 2)));
        }
        const auto median = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            const auto n = v.size();
            return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        };
        emit({{"event", "snr_point"},
              {"snr_db", snr},
              {"trials", trials},
              {"snapshots", snapshots},
              {"median_pos_rmse", median(pos)},
              {"median_vel_rmse", median(vel)}});
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ISAC behavioral-intention dataset toolkit"};
    app.require_subcommand(1);

    std::optional<fs::path> config;
    app.add_option("--config", config, "pipeline configuration JSON (default: $ISBP_CONFIG)");

    auto* gen = app.add_subcommand("gen", "synthesize a labelled dataset");
    int case_id = 1;
    std::optional<std::uint64_t> n;
    std::uint64_t seed = 0;
    fs::path out;
    bool scale = false;
    unsigned workers = 0;
    gen->add_option("--case", case_id, "evaluation case 1..5")->required()->check(CLI::Range(1, 5));
    gen->add_option("--n", n, "train/val sample count (default 6000, or 600 with --scale)");
    gen->add_option("--seed", seed, "global seed")->required();
    gen->add_option("--out", out, "output directory")->required();
    gen->add_flag("--scale", scale, "desk-scale profile (R_h = 100 Hz)");
    gen->add_option("--workers", workers, "worker threads (0 = all cores)");

    auto* inspect = app.add_subcommand("inspect", "summarize a manifest");
    fs::path manifest;
    bool verify = false;
    inspect->add_option("manifest", manifest, "manifest.json")->required()->check(CLI::ExistingFile);
    inspect->add_flag("--verify", verify, "decode every sample and check it against the manifest");

    auto* eval = app.add_subcommand("eval-metrics", "score a prediction file against a manifest");
    fs::path pred;
    std::string split = "test";
    std::string format = "json";
    eval->add_option("--pred", pred, "line-JSON predictions")->required()->check(CLI::ExistingFile);
    eval->add_option("--manifest", manifest, "manifest.json")->required()->check(CLI::ExistingFile);
    eval->add_option("--split", split, "train, val, test or all")->check(CLI::IsMember({"train", "val", "test", "all"}));
    eval->add_option("--format", format, "json or table")->check(CLI::IsMember({"json", "table"}));

    auto* sweep = app.add_subcommand("sweep-snr", "position/velocity error of the sensing pipeline versus SNR");
    std::vector<double> snrs{-10.0, 0.0, 10.0, 20.0};
    int trials = 20;
    int snapshots = 100;
    std::string cls = "following";
    sweep->add_option("--snr-list", snrs, "SNR values in dB")->delimiter(',');
    sweep->add_option("--trials", trials)->check(CLI::PositiveNumber);
    sweep->add_option("--snapshots", snapshots)->check(CLI::PositiveNumber);
    sweep->add_option("--seed", seed);
    sweep->add_option("--class", cls, "behavior class name");
    sweep->add_flag("--scale", scale, "desk-scale profile (R_h = 100 Hz)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) return run_gen(case_id, n, seed, out, scale, config, workers);
        if (*inspect) return run_inspect(manifest, verify);
        if (*eval) return run_eval(pred, manifest, split, format);
        if (*sweep) return run_sweep(snrs, trials, snapshots, seed, scale, config, cls);
    } catch (const std::exception& e) {
        emit({{"event", "error"}, {"message", e.what()}});
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
