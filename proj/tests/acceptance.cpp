// Acceptance criteria P1..P8. Each criterion prints one line
//   P<k> PASS|FAIL <detail>
// and the process exits non-zero if any requested criterion fails.
// Usage: acceptance [P1 ... P8]   (no arguments runs all)

#include "isbp/dataset.hpp"
#include "isbp/echo.hpp"
#include "isbp/estimation.hpp"
#include "isbp/fusion.hpp"
#include "isbp/metrics.hpp"
#include "isbp/sample_io.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace isbp;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [violated]");
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double uniform(std::mt19937_64& g, double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(g); }

/// Signed distance on the unit circle of normalized frequency.
double wrapped(double a, double b) {
    double d = std::fmod(a - b, 1.0);
    if (d > 0.5) d -= 1.0;
    if (d < -0.5) d += 1.0;
    return d;
}

// Independent 1D peak search: coarse scan at `coarse` points over one period,
// then a scan at `fine` spacing over +-1 coarse cell.
double dense_peak(const std::function<double(double)>& mag, double lo, int coarse, double fine) {
    double best = lo, best_v = -1.0;
    for (int i = 0; i < coarse; ++i) {
        const double f = lo + static_cast<double>(i) / coarse;
        if (const double v = mag(f); v > best_v) best_v = v, best = f;
    }
    const double centre = best;
    const auto steps = static_cast<long>(std::ceil(1.0 / coarse / fine));
    for (long i = -steps; i <= steps; ++i) {
        const double f = centre + static_cast<double>(i) * fine;
        if (const double v = mag(f); v > best_v) best_v = v, best = f;
    }
    return best;
}

double line_correlation(const std::vector<cdouble>& z, double f, double sign) {
    cdouble acc{};
    for (std::size_t k = 0; k < z.size(); ++k) acc += z[k] * std::polar(1.0, sign * kTwoPi * f * static_cast<double>(k));
    return std::abs(acc);
}

Verdict p1() {
    const WaveformConfig wf;
    const GridSpec grid;
    const BsConfig bs = BsConfig::make(1, 0.0, 0.0, wf, 0.0, 8);
    const int angle_bins = grid.angle_bins;
    const int delay_bins = wf.num_subcarriers * grid.delay_padding;
    const int doppler_bins = wf.num_symbols * grid.doppler_padding;
    const double cell_u = 1.0 / (1000.0 * angle_bins);
    const double cell_t = 1.0 / (1000.0 * delay_bins);
    const double cell_f = 1.0 / (1000.0 * doppler_bins);

    std::mt19937_64 g(20251);
    double worst_u = 0, worst_t = 0, worst_f = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int trial = 0; trial < 50; ++trial) {
        EchoParams p;
        p.gain = std::polar(uniform(g, 0.5, 2.0), uniform(g, -3.1, 3.1));
        p.angle = uniform(g, -1.2, 1.2);
        p.range = uniform(g, 20.0, 450.0);
        p.delay = 2.0 * p.range / wf.speed_of_light;
        p.radial_velocity = uniform(g, -40.0, 40.0);
        p.doppler = wf.doppler_of(p.radial_velocity);
        const auto cube = synth_echo(p, bs, wf, std::numeric_limits<double>::infinity(), 0);
        const auto est = estimate_atd(cube, bs, wf, grid);

        // A noiseless single-target cube is rank one, so each axis peaks where
        // its own 1D line (other indices fixed at 0) does.
        std::vector<cdouble> za(8), zt(static_cast<std::size_t>(wf.num_subcarriers)),
            zf(static_cast<std::size_t>(wf.num_symbols));
        for (int i = 0; i < cube.antennas(); ++i) za[i] = cube(i, 0, 0);
        for (int i = 0; i < cube.subcarriers(); ++i) zt[i] = cube(0, i, 0);
        for (int i = 0; i < cube.symbols(); ++i) zf[i] = cube(0, 0, i);
        const double u = dense_peak([&](double f) { return line_correlation(za, f, -1.0); }, -0.5, angle_bins, cell_u);
        const double t = dense_peak([&](double f) { return line_correlation(zt, f, +1.0); }, 0.0, delay_bins, cell_t);
        const double f = dense_peak([&](double f) { return line_correlation(zf, f, -1.0); }, -0.5, doppler_bins, cell_f);

        worst_u = std::max(worst_u, std::abs(wrapped(est.spatial_freq, u)) / cell_u);
        worst_t = std::max(worst_t, std::abs(wrapped(est.delay_freq, t)) / cell_t);
        worst_f = std::max(worst_f, std::abs(wrapped(est.doppler_freq, f)) / cell_f);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Verdict v;
    v.require(worst_u <= 1.0 && worst_t <= 1.0 && worst_f <= 1.0,
              fmt("50 targets, worst deviation in fine cells: angle %.3f delay %.3f doppler %.3f", worst_u, worst_t,
                  worst_f));
    v.require(secs <= 120.0, fmt("%.1f s", secs));
    return v;
}

ParamEstimate exact_estimate(double tx, double ty, const BsConfig& bs, const WaveformConfig& wf) {
    ParamEstimate e;
    e.angle = std::atan2(ty - bs.y, tx - bs.x);
    e.delay = 2.0 * std::hypot(tx - bs.x, ty - bs.y) / wf.speed_of_light;
    e.noise_var = 1e-2;
    e.peak_power = 1.0;
    return e;
}

Verdict p2() {
    const WaveformConfig wf;
    std::mt19937_64 g(7);
    double worst_err = 0.0, worst_res = 0.0;
    int solved = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int trial = 0; trial < 100; ++trial) {
        const int count = 2 + trial % 2;
        std::vector<BsConfig> bss;
        for (int i = 0; i < count; ++i) {
            bss.push_back(BsConfig::make(i + 1, uniform(g, -500, 500), uniform(g, -500, 500), wf, 0.0, 8));
        }
        double tx, ty;
        do {
            tx = uniform(g, -300, 300);
            ty = uniform(g, -300, 300);
        } while (std::ranges::any_of(bss, [&](const BsConfig& b) { return std::hypot(tx - b.x, ty - b.y) < 10.0; }));
        std::vector<ParamEstimate> est;
        for (const auto& b : bss) est.push_back(exact_estimate(tx, ty, b, wf));
        const auto fix = solve_position_wls(est, bss, wf);
        worst_err = std::max(worst_err, std::hypot(fix.x - tx, fix.y - ty));
        worst_res = std::max(worst_res, fix.residual);
        ++solved;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Verdict v;
    v.require(worst_err <= 1e-6, fmt("%d geometries, max position error %.2e m", solved, worst_err));
    v.require(worst_res <= 1e-9, fmt("max residual %.2e", worst_res));
    v.require(secs <= 10.0, fmt("%.2f s", secs));
    return v;
}

Verdict p3() {
    const WaveformConfig wf;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();

    {
        const double vx = 12.5, vy = -4.0;
        const std::vector<double> angles{0.0, std::numbers::pi / 2};
        const std::vector<double> dopplers{wf.doppler_of(vx), wf.doppler_of(vy)};
        const std::vector<double> w{1.0, 1.0};
        const auto s = solve_velocity(dopplers, angles, wf, w);
        v.require(std::abs(s.vx() - vx) <= 1e-9 && std::abs(s.vy() - vy) <= 1e-9,
                  fmt("axis-aligned error %.1e", std::max(std::abs(s.vx() - vx), std::abs(s.vy() - vy))));
    }

    std::mt19937_64 g(99);
    double worst_exact = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double tx = uniform(g, 50, 450), ty = uniform(g, -100, 100);
        const double vx = uniform(g, -35, 35), vy = uniform(g, -5, 5);
        const std::vector<std::pair<double, double>> sites{{0, 0}, {500, 0}, {250, 300}};
        std::vector<double> angles, dopplers;
        for (auto [bx, by] : sites) {
            const double th = std::atan2(ty - by, tx - bx);
            angles.push_back(th);
            dopplers.push_back(wf.doppler_of(vx * std::cos(th) + vy * std::sin(th)));
        }
        const std::vector<double> w{1.0, 2.0, 0.5};
        const auto s = solve_velocity(dopplers, angles, wf, w);
        worst_exact = std::max({worst_exact, std::abs(s.vx() - vx), std::abs(s.vy() - vy)});
    }
    v.require(worst_exact <= 1e-9, fmt("3-BS forward model max error %.1e", worst_exact));

    // Noisy cases against a brute-force minimization of the weighted Doppler misfit.
    double worst_gap = 0.0;
    const double fine = 1e-6;
    double worst_excess = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int count = 2 + trial % 3;
        std::vector<double> angles, dopplers, w;
        const double vx = uniform(g, -30, 30), vy = uniform(g, -30, 30);
        for (int i = 0; i < count; ++i) {
            const double th = uniform(g, -std::numbers::pi, std::numbers::pi) ;
            const double sd = uniform(g, 1.0, 20.0);
            angles.push_back(count == 2 && i == 1 ? angles[0] + uniform(g, 0.5, 2.5) : th);
            const double vr = vx * std::cos(angles.back()) + vy * std::sin(angles.back());
            dopplers.push_back(wf.doppler_of(vr) + std::normal_distribution<>(0.0, sd)(g));
            w.push_back(1.0 / (sd * sd));
        }
        const auto cost = [&](double ux, double uy) {
            double c = 0.0;
            for (int i = 0; i < count; ++i) {
                const double r = dopplers[i] - wf.doppler_of(ux * std::cos(angles[i]) + uy * std::sin(angles[i]));
                c += w[i] * r * r;
            }
            return c;
        };
        // Zooming grid search; each level re-centres until the optimum is interior.
        double bx = 0, by = 0, best = std::numeric_limits<double>::infinity();
        for (double step : {0.25, 0.01, 1e-4, fine}) {
            const int half = step == 0.25 ? 320 : 40;
            for (bool moved = true; moved;) {
                const double cx = bx, cy = by;
                int ix = 0, iy = 0;
                for (int i = -half; i <= half; ++i) {
                    for (int j = -half; j <= half; ++j) {
                        if (const double c = cost(cx + i * step, cy + j * step); c < best) best = c, ix = i, iy = j;
                    }
                }
                bx = cx + ix * step;
                by = cy + iy * step;
                moved = std::abs(ix) == half || std::abs(iy) == half;
            }
        }
        const auto s = solve_velocity(dopplers, angles, wf, w);
        worst_gap = std::max({worst_gap, std::abs(s.vx() - bx), std::abs(s.vy() - by)});
        worst_excess = std::max(worst_excess, cost(s.vx(), s.vy()) - best);
    }
    v.require(worst_gap <= 1e-4 && worst_excess <= 1e-9,
              fmt("50 noisy cases, max gap to grid optimum %.2e m/s (grid %.0e), cost excess %.1e", worst_gap, fine,
                  worst_excess));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(secs <= 30.0, fmt("%.1f s", secs));
    return v;
}

std::vector<std::optional<Fix>> exact_fixes(const std::function<StateSample(double)>& truth, int n, double rate) {
    std::vector<std::optional<Fix>> fixes;
    for (int k = 0; k < n; ++k) {
        const auto s = truth(k / rate);
        fixes.push_back(Fix{s.x, s.y, s.vx, s.vy, 0.25, 0.25});
    }
    return fixes;
}

double position_rmse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return std::sqrt((a.topRows(2) - b.topRows(2)).colwise().squaredNorm().mean());
}

Verdict p4() {
    const auto cfg = PipelineConfig::desk();
    const double rate = cfg.scenario.isac_rate;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();

    const auto cv = [](double t) { return StateSample{t, 10 + 20 * t, -3 + 0.5 * t, 20, 0.5, 0, 0}; };
    const auto cv_track = run_ca_kalman(exact_fixes(cv, 400, rate), rate, cfg.kalman);
    const double cv_acc = cv_track.values.bottomRows(2).rightCols(200).cwiseAbs().maxCoeff();
    v.require(cv_acc <= 1e-3, fmt("CV residual acceleration %.1e m/s^2", cv_acc));

    const auto ca = [](double t) {
        return StateSample{t, 5 + 15 * t + 0.5 * 2.0 * t * t, 1 - 2 * t + 0.5 * -1.5 * t * t, 15 + 2.0 * t,
                           -2 - 1.5 * t, 2.0, -1.5};
    };
    const int steps = 400;
    const auto ca_track = run_ca_kalman(exact_fixes(ca, steps, rate), rate, cfg.kalman);
    double ca_err = 0.0;
    for (int k = 200; k < steps; ++k) {
        const auto s = ca(k / rate);
        Eigen::Matrix<double, 6, 1> ref;
        ref << s.x, s.y, s.vx, s.vy, s.ax, s.ay;
        ca_err = std::max(ca_err, (ca_track.values.col(k) - ref).cwiseAbs().maxCoeff());
    }
    v.require(ca_err <= 1e-3, fmt("CA max state error after 200 steps %.1e", ca_err));

    double raw_sq = 0.0, filt_sq = 0.0;
    int count = 0;
    const int snaps = 50;
    for (int trial = 0; trial < 50; ++trial) {
        const auto cls = static_cast<BehaviorClass>(1 + trial % 7);
        const auto traj = gen_trajectory(cls, cfg.scenario, cfg.ranges, 1000 + trial);
        const auto truth = PhysInfoMatrix::from_states(std::span(traj.tv_truth).first(snaps), rate);
        std::vector<std::optional<Fix>> raw;
        const auto track = isac_track(truth, cfg, 10.0, 5000 + trial, &raw);
        for (int k = 0; k < snaps; ++k) {
            if (!raw[k]) continue;
            const auto c = truth.values.col(k);
            raw_sq += std::pow(raw[k]->x - c(0), 2) + std::pow(raw[k]->y - c(1), 2);
            filt_sq += (track.values.col(k).head(2) - c.head(2)).squaredNorm();
            ++count;
        }
    }
    const double raw_rmse = std::sqrt(raw_sq / count), filt_rmse = std::sqrt(filt_sq / count);
    v.require(raw_rmse >= 2.0 * filt_rmse, fmt("10 dB, 50 trials x %d snapshots: raw %.4f m, filtered %.4f m (%.2fx)",
                                                snaps, raw_rmse, filt_rmse, raw_rmse / filt_rmse));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(secs <= 60.0, fmt("R_h %.0f Hz, %.1f s", rate, secs));
    return v;
}

Verdict p5() {
    const auto cfg = PipelineConfig::desk();
    const double rate = cfg.scenario.isac_rate;
    const std::vector<double> snrs{-10.0, 0.0, 10.0, 20.0};
    const int trials = 20, snaps = 100;
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<PhysInfoMatrix> truths;
    for (int trial = 0; trial < trials; ++trial) {
        const auto cls = static_cast<BehaviorClass>(1 + trial % 7);
        const auto traj = gen_trajectory(cls, cfg.scenario, cfg.ranges, 2000 + trial);
        truths.push_back(PhysInfoMatrix::from_states(std::span(traj.tv_truth).first(snaps), rate));
    }
    std::vector<double> medians;
    for (double snr : snrs) {
        std::vector<double> rmse;
        for (int trial = 0; trial < trials; ++trial) {
            const auto track = isac_track(truths[trial], cfg, snr, 9000 + trial);
            rmse.push_back(position_rmse(track.values, truths[trial].values));
        }
        std::ranges::nth_element(rmse, rmse.begin() + trials / 2);
        const double hi = rmse[trials / 2];
        const double lo = *std::max_element(rmse.begin(), rmse.begin() + trials / 2);
        medians.push_back(0.5 * (lo + hi));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool monotone = true;
    for (std::size_t i = 1; i < medians.size(); ++i) monotone = monotone && medians[i] <= medians[i - 1];
    Verdict v;
    v.require(monotone, fmt("median position RMSE at -10/0/10/20 dB: %.4f %.4f %.4f %.4f m", medians[0], medians[1],
                            medians[2], medians[3]));
    v.require(secs <= 600.0, fmt("R_h %.0f Hz, %.1f s", rate, secs));
    return v;
}

Verdict p6() {
    const WaveformConfig wf;
    const BsConfig bs = BsConfig::make(1, 0.0, 0.0, wf, 0.0, 8);
    EchoParams p;
    p.gain = std::polar(0.7, 0.4);
    p.angle = 0.3;
    p.delay = 2.0 * 180.0 / wf.speed_of_light;
    p.doppler = wf.doppler_of(12.0);
    const auto clean = synth_echo(p, bs, wf, std::numeric_limits<double>::infinity(), 0);

    Verdict v;
    double worst_db = 0.0;
    std::size_t draws = 0;
    for (double snr : {-10.0, 0.0, 10.0, 20.0}) {
        double power = 0.0;
        std::size_t n = 0;
        for (std::uint64_t seed = 1; n < 100000; ++seed) {
            const auto noisy = synth_echo(p, bs, wf, snr, seed);
            for (std::size_t i = 0; i < noisy.data().size(); ++i) power += std::norm(noisy.data()[i] - clean.data()[i]);
            n += noisy.data().size();
        }
        draws = n;
        const double measured = 10.0 * std::log10(std::norm(p.gain) / (power / static_cast<double>(n)));
        worst_db = std::max(worst_db, std::abs(measured - snr));
    }
    v.require(worst_db <= 0.2, fmt("realized SNR worst offset %.4f dB over %zu draws per level", worst_db, draws));

    double worst_rel = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto noise = synth_echo(p, bs, wf, 0.0, 100 + seed);
        for (std::size_t i = 0; i < noise.data().size(); ++i) noise.data()[i] -= clean.data()[i];
        double actual = 0.0;
        for (const auto& z : noise.data()) actual += std::norm(z);
        actual /= static_cast<double>(noise.data().size());
        const auto est = estimate_atd(noise, bs, wf);
        worst_rel = std::max(worst_rel, std::abs(est.noise_var / actual - 1.0));
    }
    v.require(worst_rel <= 0.05, fmt("pure-noise variance estimate worst relative error %.2f%%", 100 * worst_rel));
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool trees_identical(const fs::path& a, const fs::path& b, std::size_t& files) {
    files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), a);
        if (!fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel)) return false;
        ++files;
    }
    std::size_t other = 0;
    for (const auto& e : fs::recursive_directory_iterator(b)) other += e.is_regular_file() ? 1 : 0;
    return other == files;
}

Verdict p7() {
    Verdict v;
    const auto root = fs::temp_directory_path() / "isbp_acceptance_p7";
    fs::remove_all(root);

    struct Build {
        const char* name;
        PipelineConfig cfg;
        int case_id;
        std::uint64_t n;
    };
    auto isac = PipelineConfig::desk();
    isac.scenario.window_length = 0.5;
    isac.scenario.scenario_length = 5.0;
    const std::vector<Build> builds{{"case4", PipelineConfig{}, 4, 48}, {"case2", isac, 2, 6}};
    for (const auto& b : builds) {
        const auto serial = root / b.name / "w1";
        const auto parallel = root / b.name / "w8";
        build_dataset(b.cfg, CaseSpec::from_id(b.case_id), b.n, 42, serial, {1});
        build_dataset(b.cfg, CaseSpec::from_id(b.case_id), b.n, 42, parallel, {8});
        std::size_t files = 0;
        const bool same = trees_identical(serial, parallel, files);
        v.require(same, fmt("%s: %zu files byte-identical, 1 vs 8 workers", b.name, files));
    }

    {
        std::mt19937_64 g(3);
        bool exact = true;
        for (int trial = 0; trial < 20; ++trial) {
            SampleRecord s;
            s.label = 1 + trial % 7;
            s.tv.resize(6, 880);
            s.uv.resize(6, 220);
            for (auto* m : {&s.tv, &s.uv}) {
                for (Eigen::Index i = 0; i < m->size(); ++i) {
                    std::uint32_t bits;
                    do {
                        bits = static_cast<std::uint32_t>(g());
                    } while (!std::isfinite(std::bit_cast<float>(bits)));
                    m->data()[i] = std::bit_cast<float>(bits);
                }
            }
            const auto bytes = encode_sample(s);
            const auto back = decode_sample(bytes);
            exact = exact && encode_sample(back) == bytes && back.label == s.label &&
                    std::memcmp(back.tv.data(), s.tv.data(), sizeof(float) * s.tv.size()) == 0 &&
                    std::memcmp(back.uv.data(), s.uv.data(), sizeof(float) * s.uv.size()) == 0;
        }
        v.require(exact, "20 random-bit samples roundtrip bit-exact");
    }

    {
        const PipelineConfig base;
        const auto f = config_fingerprint(base, 4, 48, 42);
        std::vector<std::pair<const char*, std::string>> variants;
        variants.emplace_back("seed", config_fingerprint(base, 4, 48, 43));
        variants.emplace_back("case", config_fingerprint(base, 3, 48, 42));
        variants.emplace_back("n", config_fingerprint(base, 4, 49, 42));
        auto c = base;
        c.waveform.carrier_hz += 1.0;
        variants.emplace_back("carrier", config_fingerprint(c, 4, 48, 42));
        c = base;
        c.dataset.nlos_drop_rate = 0.7500001;
        variants.emplace_back("nlos rate", config_fingerprint(c, 4, 48, 42));
        c = base;
        c.kalman.initial_std[5] = 3.1;
        variants.emplace_back("kalman", config_fingerprint(c, 4, 48, 42));
        c = base;
        c.base_stations[0].antennas = 16;
        variants.emplace_back("antennas", config_fingerprint(c, 4, 48, 42));
        bool sensitive = config_fingerprint(base, 4, 48, 42) == f;
        for (const auto& [name, fp] : variants) sensitive = sensitive && fp != f;
        const auto m = load_manifest(root / "case4" / "w1" / "manifest.json");
        sensitive = sensitive && m.fingerprint == f;
        v.require(sensitive, fmt("fingerprint stable and sensitive to %zu perturbations", variants.size()));
    }
    fs::remove_all(root);
    return v;
}

Verdict p8() {
    Verdict v;
    std::mt19937_64 g(8);

    bool prf_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const int classes = 2 + static_cast<int>(g() % 7);
        // Expand a random label stream and recount everything from the raw pairs.
        const auto count = static_cast<std::size_t>(g() % 200);
        std::vector<int> truth, pred;
        for (std::size_t i = 0; i < count; ++i) {
            truth.push_back(1 + static_cast<int>(g() % classes));
            pred.push_back(g() % 3 == 0 ? truth.back() : 1 + static_cast<int>(g() % classes));
        }
        const auto report = prf1(confusion(pred, truth, classes));
        double f1_sum = 0.0, hits = 0.0;
        for (int c = 1; c <= classes; ++c) {
            double tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < count; ++i) {
                tp += truth[i] == c && pred[i] == c;
                fp += truth[i] != c && pred[i] == c;
                fn += truth[i] == c && pred[i] != c;
            }
            const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
            const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
            const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
            f1_sum += f;
            hits += tp;
            const auto& m = report.per_class[c - 1];
            prf_ok = prf_ok && m.label == c && std::abs(m.precision - p) < 1e-12 && std::abs(m.recall - r) < 1e-12 &&
                     std::abs(m.f1 - f) < 1e-12 && m.support == tp + fn && m.precision_undefined == (tp + fp == 0) &&
                     m.recall_undefined == (tp + fn == 0);
        }
        prf_ok = prf_ok && std::abs(report.macro_f1 - f1_sum / classes) < 1e-12;
        if (count > 0) prf_ok = prf_ok && std::abs(report.average_accuracy - hits / count) < 1e-12;
    }
    v.require(prf_ok, "prf1 matches brute-force recount on 1000 random matrices");

    // Exhaustive enumeration: every distinct score as a threshold, plus one above all.
    const auto enumerate_auc = [](const std::vector<double>& s, const std::vector<bool>& known) {
        std::vector<double> thresholds(s);
        thresholds.push_back(std::numeric_limits<double>::infinity());
        std::ranges::sort(thresholds, std::greater<>());
        thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
        const double pos = static_cast<double>(std::ranges::count(known, true));
        const double neg = static_cast<double>(known.size()) - pos;
        double auc = 0.0, prev_f = 0.0, prev_t = 0.0;
        for (double th : thresholds) {
            double tp = 0, fp = 0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (s[i] >= th) (known[i] ? tp : fp) += 1;
            }
            const double fpr = fp / neg, tpr = tp / pos;
            auc += 0.5 * (fpr - prev_f) * (tpr + prev_t);
            prev_f = fpr;
            prev_t = tpr;
        }
        return auc;
    };
    double worst_auc = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = 2 + static_cast<std::size_t>(g() % 60);
        std::vector<double> s(n);
        std::vector<bool> known(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(g() % 25) / 24.0; // coarse values force ties
            known[i] = i == 0 || (i != 1 && g() % 2 == 0);
        }
        worst_auc = std::max(worst_auc, std::abs(roc_auc(s, known).auc - enumerate_auc(s, known)));
    }
    v.require(worst_auc < 1e-12, fmt("AUC matches threshold enumeration on 100 sets (max gap %.1e)", worst_auc));

    const std::vector<double> hand{0.9, 0.8, 0.85, 0.1};
    const std::vector<bool> hand_known{true, true, false, false};
    const double got = roc_auc(hand, hand_known).auc;
    v.require(std::abs(got - 0.875) < 1e-12,
              fmt("hand example scores (0.9, 0.8 known; 0.85, 0.1 unknown): AUC %.4f, expected 0.875; enumeration gives "
                  "%.4f",
                  got, enumerate_auc(hand, hand_known)));
    return v;
}

} // namespace

int main(int argc, char** argv) {
    const std::map<std::string, std::function<Verdict()>> criteria{{"P1", p1}, {"P2", p2}, {"P3", p3}, {"P4", p4},
                                                                   {"P5", p5}, {"P6", p6}, {"P7", p7}, {"P8", p8}};
    std::vector<std::string> selected(argv + 1, argv + argc);
    if (selected.empty()) {
        for (const auto& [name, fn] : criteria) selected.push_back(name);
    }
    int failures = 0;
    for (const auto& name : selected) {
        const auto it = criteria.find(name);
        if (it == criteria.end()) {
            std::fprintf(stderr, "unknown criterion %s\n", name.c_str());
            return 2;
        }
        Verdict v;
        try {
            v = it->second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s %s %s\n", name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
