#include "isbp/kinematics.hpp"

#include "isbp/errors.hpp"
#include "isbp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace isbp {
namespace {

constexpr double kTimeEps = 1e-9;

// Cubic smoothstep and its first two antiderivatives (zero at u = 0).
double smoothstep(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * (3.0 - 2.0 * u);
}

double smoothstep_int1(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 0.5 + (u - 1.0);
    return u * u * u * (1.0 - 0.5 * u);
}

double smoothstep_int2(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) {
        const double r = u - 1.0;
        return 0.15 + 0.5 * r + 0.5 * r * r;
    }
    const double u4 = u * u * u * u;
    return u4 * (0.25 - 0.1 * u);
}

// Septic smootherstep 35u^4 - 84u^5 + 70u^6 - 20u^7: C3 at both ends.
struct Septic {
    double s, ds, d2s;
};

Septic septic(double u) {
    if (u <= 0.0) return {0.0, 0.0, 0.0};
    if (u >= 1.0) return {1.0, 0.0, 0.0};
    const double u2 = u * u;
    const double u3 = u2 * u;
    const double s = u3 * u * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)));
    const double ds = u3 * (140.0 + u * (-420.0 + u * (420.0 - 140.0 * u)));
    const double d2s = u2 * (420.0 + u * (-1680.0 + u * (2100.0 - 840.0 * u)));
    return {s, ds, d2s};
}

double draw(Rng& rng, const Range& r) { return rng.uniform(r.lo, r.hi); }

void check_range(const Range& r, const char* name) {
    if (!(std::isfinite(r.lo) && std::isfinite(r.hi)) || r.lo > r.hi) {
        throw ConfigError(std::string("invalid range for ") + name);
    }
}

bool is_integer(double v) { return std::abs(v - std::round(v)) < 1e-9; }

} // namespace

BehaviorClass class_from_label(int label) {
    if (label < 1 || label > kNumClasses) {
        throw ConfigError("behavior label out of range: " + std::to_string(label));
    }
    return static_cast<BehaviorClass>(label);
}

std::string_view class_name(BehaviorClass c) {
    switch (c) {
    case BehaviorClass::HardBrake: return "hard_brake";
    case BehaviorClass::LeftLaneChange: return "left_lane_change";
    case BehaviorClass::RightLaneChange: return "right_lane_change";
    case BehaviorClass::Overtake: return "overtake";
    case BehaviorClass::HardAccel: return "hard_accel";
    case BehaviorClass::EvasiveSwerve: return "evasive_swerve";
    case BehaviorClass::Following: return "following";
    }
    return "unknown";
}

std::optional<BehaviorClass> parse_class(std::string_view name) {
    for (auto c : kAllClasses) {
        if (class_name(c) == name) return c;
    }
    return std::nullopt;
}

int ScenarioConfig::tv_window_samples() const { return static_cast<int>(std::lround(isac_rate * window_length)); }
int ScenarioConfig::uv_window_samples() const { return static_cast<int>(std::lround(onboard_rate * window_length)); }
int ScenarioConfig::tv_total_samples() const { return static_cast<int>(std::lround(isac_rate * scenario_length)); }
int ScenarioConfig::uv_total_samples() const { return static_cast<int>(std::lround(onboard_rate * scenario_length)); }

void ScenarioConfig::validate() const {
    if (isac_rate <= 0 || onboard_rate <= 0) {
        throw ConfigError("refresh rates must be positive");
    }
    if (isac_rate < onboard_rate) {
        throw ConfigError("ISAC rate must not be below the onboard rate");
    }
    if (!(scenario_length > 0.0) || !(window_length > 0.0)) {
        throw ConfigError("scenario and window lengths must be positive");
    }
    if (window_length > scenario_length + kTimeEps) {
        throw ConfigError("observation window exceeds scenario length");
    }
    if (!is_integer(isac_rate * window_length) || !is_integer(onboard_rate * window_length) ||
        !is_integer(isac_rate * scenario_length) || !is_integer(onboard_rate * scenario_length)) {
        throw ConfigError("rate x duration must give an integer sample count");
    }
    if (!(lane_width > 0.0)) {
        throw ConfigError("lane width must be positive");
    }
}

void KinematicRanges::validate() const {
    check_range(start_x, "start_x");
    check_range(initial_speed, "initial_speed");
    check_range(onset, "onset");
    check_range(brake_peak, "brake_peak");
    check_range(brake_ramp, "brake_ramp");
    check_range(brake_hold, "brake_hold");
    check_range(accel_peak, "accel_peak");
    check_range(accel_ramp, "accel_ramp");
    check_range(accel_hold, "accel_hold");
    check_range(lane_change_duration, "lane_change_duration");
    check_range(overtake_lane_change_duration, "overtake_lane_change_duration");
    check_range(overtake_delta_v, "overtake_delta_v");
    check_range(overtake_pass_hold, "overtake_pass_hold");
    check_range(overtake_gap, "overtake_gap");
    check_range(overtake_speed_deficit, "overtake_speed_deficit");
    check_range(swerve_displacement, "swerve_displacement");
    check_range(swerve_leg_duration, "swerve_leg_duration");
    check_range(following_speed, "following_speed");
    check_range(following_gap, "following_gap");
    check_range(uv_offset_x, "uv_offset_x");
    check_range(uv_speed_offset, "uv_speed_offset");
    check_range(uv_jitter_amplitude, "uv_jitter_amplitude");
    check_range(uv_jitter_omega, "uv_jitter_omega");
    if (brake_peak.hi >= 0.0) throw ConfigError("brake_peak must be negative");
    if (accel_peak.lo <= 0.0) throw ConfigError("accel_peak must be positive");
    if (brake_ramp.lo <= 0.0 || accel_ramp.lo <= 0.0) throw ConfigError("ramp widths must be positive");
    if (lane_change_duration.lo <= 0.0 || overtake_lane_change_duration.lo <= 0.0 || swerve_leg_duration.lo <= 0.0) {
        throw ConfigError("lateral durations must be positive");
    }
    if (uv_jitter_omega.lo <= 0.0) throw ConfigError("uv_jitter_omega must be positive");
    if (following_accel_jitter < 0.0 || following_accel_jitter > 0.3) {
        throw ConfigError("following_accel_jitter must lie in [0, 0.3]");
    }
}

void AxisMotion::add_pulse(double t0, double ramp, double hold, double peak) {
    add(AccelRamp{t0, ramp, peak});
    add(AccelRamp{t0 + ramp + hold, ramp, -peak});
}

AxisMotion::Kinematics AxisMotion::at(double t) const {
    Kinematics k{p0_ + v0_ * t, v0_, 0.0};
    for (const auto& r : ramps_) {
        const double u = (t - r.t0) / r.width;
        k.a += r.gain * smoothstep(u);
        k.v += r.gain * r.width * smoothstep_int1(u);
        k.p += r.gain * r.width * r.width * smoothstep_int2(u);
    }
    for (const auto& s : steps_) {
        const auto q = septic((t - s.t0) / s.width);
        k.p += s.displacement * q.s;
        k.v += s.displacement * q.ds / s.width;
        k.a += s.displacement * q.d2s / (s.width * s.width);
    }
    for (const auto& s : sines_) {
        const double arg = s.omega * t + s.phase;
        const double ratio = s.amplitude / s.omega;
        k.a += s.amplitude * std::sin(arg);
        k.v += ratio * (std::cos(s.phase) - std::cos(arg));
        k.p += ratio * std::cos(s.phase) * t - ratio / s.omega * (std::sin(arg) - std::sin(s.phase));
    }
    return k;
}

StateSample VehicleMotion::at(double t) const {
    const auto kx = x.at(t);
    const auto ky = y.at(t);
    return {t, kx.p, ky.p, kx.v, ky.v, kx.a, ky.a};
}

VehicleMotion tv_motion(BehaviorClass c, const KinematicParams& p) {
    VehicleMotion m{AxisMotion(p.start_x, p.initial_speed), AxisMotion(p.start_y, 0.0)};
    switch (c) {
    case BehaviorClass::HardBrake:
    case BehaviorClass::HardAccel:
        m.x.add_pulse(p.onset, p.ramp_time, p.hold_time, p.peak_accel);
        break;
    case BehaviorClass::LeftLaneChange:
    case BehaviorClass::RightLaneChange:
        m.y.add(AxisMotion::SigmoidStep{p.onset, p.lateral_time, p.lateral_displacement});
        break;
    case BehaviorClass::Overtake:
        m.x.add_pulse(p.onset, p.ramp_time, 2.0 * p.ramp_time, p.peak_accel);
        m.y.add(AxisMotion::SigmoidStep{p.onset, p.lateral_time, p.lateral_displacement});
        m.y.add(AxisMotion::SigmoidStep{p.onset + p.lateral_time + p.hold_time, p.lateral_time,
                                        -p.lateral_displacement});
        break;
    case BehaviorClass::EvasiveSwerve:
        m.y.add(AxisMotion::SigmoidStep{p.onset, p.lateral_time, p.lateral_displacement});
        m.y.add(AxisMotion::SigmoidStep{p.onset + p.lateral_time, p.lateral_time, -p.lateral_displacement});
        break;
    case BehaviorClass::Following:
        if (p.tv_jitter_amplitude > 0.0) {
            m.x.add(AxisMotion::Sinusoid{p.tv_jitter_amplitude, p.tv_jitter_omega, p.tv_jitter_phase});
        }
        break;
    }
    return m;
}

VehicleMotion uv_motion(const KinematicParams& p) {
    VehicleMotion m{AxisMotion(p.uv_start_x, p.uv_speed), AxisMotion(p.uv_start_y, 0.0)};
    if (p.uv_jitter_amplitude > 0.0) {
        m.x.add(AxisMotion::Sinusoid{p.uv_jitter_amplitude, p.uv_jitter_omega, p.uv_jitter_phase});
    }
    return m;
}

KinematicParams sample_params(BehaviorClass c, const ScenarioConfig& cfg, const KinematicRanges& ranges,
                              std::uint64_t seed) {
    cfg.validate();
    ranges.validate();
    Rng rng(seed);
    KinematicParams p;

    // Draw order is fixed so that every field consumes the same stream
    // position regardless of class.
    p.start_x = draw(rng, ranges.start_x);
    p.start_y = ranges.road_y;
    p.initial_speed = draw(rng, ranges.initial_speed);
    const double onset_u = rng.uniform();
    const double uv_offset = draw(rng, ranges.uv_offset_x);
    const double uv_dv = draw(rng, ranges.uv_speed_offset);
    p.uv_jitter_amplitude = draw(rng, ranges.uv_jitter_amplitude);
    p.uv_jitter_omega = draw(rng, ranges.uv_jitter_omega);
    p.uv_jitter_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    p.uv_start_x = p.start_x + uv_offset;
    p.uv_start_y = ranges.road_y - cfg.lane_width;
    p.uv_speed = p.initial_speed + uv_dv;

    switch (c) {
    case BehaviorClass::HardBrake: {
        p.peak_accel = draw(rng, ranges.brake_peak);
        p.ramp_time = draw(rng, ranges.brake_ramp);
        p.hold_time = draw(rng, ranges.brake_hold);
        // Speed loss of the pulse is |peak| * (ramp + hold); keep the vehicle moving forward.
        const double max_hold = (p.initial_speed - ranges.brake_min_final_speed) / -p.peak_accel - p.ramp_time;
        if (max_hold < 0.0) {
            throw ConfigError("brake ranges cannot keep the final speed above the minimum");
        }
        p.hold_time = std::min(p.hold_time, max_hold);
        p.duration = 2.0 * p.ramp_time + p.hold_time;
        break;
    }
    case BehaviorClass::HardAccel:
        p.peak_accel = draw(rng, ranges.accel_peak);
        p.ramp_time = draw(rng, ranges.accel_ramp);
        p.hold_time = draw(rng, ranges.accel_hold);
        p.duration = 2.0 * p.ramp_time + p.hold_time;
        break;
    case BehaviorClass::LeftLaneChange:
    case BehaviorClass::RightLaneChange:
        p.lateral_time = draw(rng, ranges.lane_change_duration);
        p.lateral_displacement = c == BehaviorClass::LeftLaneChange ? cfg.lane_width : -cfg.lane_width;
        p.duration = p.lateral_time;
        break;
    case BehaviorClass::Overtake: {
        p.lateral_time = draw(rng, ranges.overtake_lane_change_duration);
        p.delta_v = draw(rng, ranges.overtake_delta_v);
        p.hold_time = draw(rng, ranges.overtake_pass_hold);
        const double gap = draw(rng, ranges.overtake_gap);
        const double deficit = draw(rng, ranges.overtake_speed_deficit);
        // Speed gain is delivered during the outbound lane change: ramps of
        // a quarter of its duration around a plateau of half its duration.
        p.ramp_time = 0.25 * p.lateral_time;
        p.peak_accel = p.delta_v / (0.75 * p.lateral_time);
        p.lateral_displacement = cfg.lane_width;
        p.duration = 2.0 * p.lateral_time + p.hold_time;
        p.uv_start_x = p.start_x + gap;
        p.uv_start_y = ranges.road_y;
        p.uv_speed = p.initial_speed - deficit;
        break;
    }
    case BehaviorClass::EvasiveSwerve: {
        p.lateral_time = draw(rng, ranges.swerve_leg_duration);
        const double d = draw(rng, ranges.swerve_displacement);
        p.lateral_displacement = rng.bernoulli(0.5) ? d : -d;
        p.duration = 2.0 * p.lateral_time;
        break;
    }
    case BehaviorClass::Following: {
        p.initial_speed = draw(rng, ranges.following_speed);
        p.tv_jitter_amplitude = rng.uniform(0.0, ranges.following_accel_jitter);
        p.tv_jitter_omega = draw(rng, ranges.uv_jitter_omega);
        p.tv_jitter_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double gap = draw(rng, ranges.following_gap);
        p.uv_start_x = p.start_x + gap;
        p.uv_start_y = ranges.road_y;
        p.uv_speed = p.initial_speed;
        p.onset = 0.0;
        p.duration = cfg.scenario_length;
        return p;
    }
    }

    const double lo = std::max(0.0, ranges.onset.lo);
    const double hi = std::min(ranges.onset.hi, cfg.scenario_length - p.duration);
    if (hi < lo) {
        throw ConfigError(std::string("maneuver does not fit in the scenario for class ") +
                          std::string(class_name(c)));
    }
    p.onset = lo + (hi - lo) * onset_u;
    return p;
}

std::vector<StateSample> sample_motion(const VehicleMotion& motion, int rate, int count) {
    std::vector<StateSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        out.push_back(motion.at(static_cast<double>(k) / rate));
    }
    return out;
}

TrajectoryPair gen_trajectory(BehaviorClass c, const ScenarioConfig& cfg, const KinematicRanges& ranges,
                              std::uint64_t seed) {
    TrajectoryPair traj;
    traj.behavior = c;
    traj.params = sample_params(c, cfg, ranges, seed);
    traj.tv_truth = sample_motion(tv_motion(c, traj.params), cfg.isac_rate, cfg.tv_total_samples());
    traj.uv_states = sample_motion(uv_motion(traj.params), cfg.onboard_rate, cfg.uv_total_samples());
    return traj;
}

TrajectoryPair gen_trajectory(BehaviorClass c, const ScenarioConfig& cfg, std::uint64_t seed) {
    return gen_trajectory(c, cfg, KinematicRanges{}, seed);
}

ObservationWindow sample_window(const TrajectoryPair& traj, const ScenarioConfig& cfg, const OnsetPolicy& policy,
                                std::uint64_t seed) {
    cfg.validate();
    const int g = std::gcd(cfg.isac_rate, cfg.onboard_rate);
    const double k_total = cfg.scenario_length;
    const double k_win = cfg.window_length;

    long quantum_index = 0;
    if (policy.kind == OnsetPolicy::Kind::Fixed) {
        if (policy.fixed_start < -kTimeEps || policy.fixed_start + k_win > k_total + kTimeEps) {
            throw ConfigError("observation window exceeds scenario");
        }
        quantum_index = std::lround(policy.fixed_start * g);
    } else {
        if (!(policy.min_coverage >= 0.0 && policy.min_coverage <= 1.0)) {
            throw ConfigError("coverage fraction must lie in [0, 1]");
        }
        const double on = traj.params.onset;
        const double dur = traj.params.duration;
        // Long maneuvers cannot be half inside a short window; cap the requirement at the window length.
        const double required = std::min(policy.min_coverage * dur, k_win);
        const double lo = std::max(0.0, on + required - k_win);
        const double hi = std::min(k_total - k_win, on + dur - required);
        long j_lo = static_cast<long>(std::ceil(lo * g - kTimeEps));
        long j_hi = static_cast<long>(std::floor(hi * g + kTimeEps));
        if (j_hi < j_lo) {
            j_lo = j_hi = std::lround(0.5 * (lo + hi) * g);
        }
        Rng rng(seed);
        quantum_index = j_lo + static_cast<long>(rng.below(static_cast<std::uint64_t>(j_hi - j_lo + 1)));
    }

    const long tv_start = quantum_index * (cfg.isac_rate / g);
    const long uv_start = quantum_index * (cfg.onboard_rate / g);
    const int s = cfg.tv_window_samples();
    const int c = cfg.uv_window_samples();
    if (tv_start < 0 || uv_start < 0 || tv_start + s > static_cast<long>(traj.tv_truth.size()) ||
        uv_start + c > static_cast<long>(traj.uv_states.size())) {
        throw ConfigError("observation window exceeds scenario");
    }

    ObservationWindow w;
    w.start_time = static_cast<double>(quantum_index) / g;
    w.tv_truth = PhysInfoMatrix::from_states(std::span(traj.tv_truth).subspan(static_cast<std::size_t>(tv_start), s),
                                             cfg.isac_rate);
    w.uv = PhysInfoMatrix::from_states(std::span(traj.uv_states).subspan(static_cast<std::size_t>(uv_start), c),
                                       cfg.onboard_rate);
    return w;
}

} // namespace isbp
