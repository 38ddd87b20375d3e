#pragma once

// Ground-truth target/ego vehicle trajectories for the behavior classes.
//
// Every maneuver is a sum of closed-form motion primitives (smoothstep
// acceleration ramps, septic lateral sigmoids and sinusoidal jitter), so
// position, velocity and acceleration are evaluated analytically at any
// instant. Sampling at two rates is therefore exactly rate-consistent.

#include "isbp/phys_info.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace isbp {

enum class BehaviorClass : int {
    HardBrake = 1,
    LeftLaneChange = 2,
    RightLaneChange = 3,
    Overtake = 4,
    HardAccel = 5,
    EvasiveSwerve = 6,
    Following = 7,
};

inline constexpr int kNumClasses = 7;
inline constexpr int kNumKnownClasses = 6;

inline constexpr std::array<BehaviorClass, kNumClasses> kAllClasses = {
    BehaviorClass::HardBrake,  BehaviorClass::LeftLaneChange, BehaviorClass::RightLaneChange,
    BehaviorClass::Overtake,   BehaviorClass::HardAccel,      BehaviorClass::EvasiveSwerve,
    BehaviorClass::Following,
};

constexpr int label_of(BehaviorClass c) { return static_cast<int>(c); }

/// Throws ConfigError for labels outside 1..7.
BehaviorClass class_from_label(int label);

std::string_view class_name(BehaviorClass c);
std::optional<BehaviorClass> parse_class(std::string_view name);

/// Following is held out of training and only used for open-set evaluation.
constexpr bool open_set_only(BehaviorClass c) { return c == BehaviorClass::Following; }

struct ScenarioConfig {
    double scenario_length = 5.0; ///< K_total, s
    double window_length = 2.2;   ///< K, s
    int isac_rate = 400;          ///< R_h, Hz
    int onboard_rate = 100;       ///< R_l, Hz
    double lane_width = 3.5;      ///< m
    std::uint64_t seed = 0;

    /// S = R_h * K
    int tv_window_samples() const;
    /// C = R_l * K
    int uv_window_samples() const;
    int tv_total_samples() const;
    int uv_total_samples() const;

    /// Throws ConfigError when rates are non-positive, R_h < R_l, a derived
    /// sample count is not an integer, or the window exceeds the scenario.
    void validate() const;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Sampling ranges for the randomized kinematic parameters. All SI units.
struct KinematicRanges {
    double road_y = 20.0; ///< centre line of the target vehicle's starting lane
    Range start_x{120.0, 200.0};
    Range initial_speed{12.0, 20.0};
    Range onset{0.2, 5.0}; ///< the upper end is further limited by the scenario length

    Range brake_peak{-8.0, -4.0};
    Range brake_ramp{0.3, 0.5};
    Range brake_hold{0.4, 1.0};
    double brake_min_final_speed = 2.0;

    Range accel_peak{3.0, 6.0};
    Range accel_ramp{0.3, 0.5};
    Range accel_hold{0.8, 1.6};

    Range lane_change_duration{2.0, 4.0};

    Range overtake_lane_change_duration{1.5, 2.0};
    Range overtake_delta_v{3.0, 8.0};
    Range overtake_pass_hold{0.0, 0.5};
    Range overtake_gap{5.0, 15.0};
    Range overtake_speed_deficit{0.0, 2.0};

    Range swerve_displacement{1.0, 2.0};
    Range swerve_leg_duration{1.3, 2.0};

    Range following_speed{8.0, 20.0};
    double following_accel_jitter = 0.0; ///< amplitude bound, m/s^2 (<= 0.3)
    Range following_gap{15.0, 30.0};

    Range uv_offset_x{-20.0, 20.0};
    Range uv_speed_offset{-2.0, 2.0};
    Range uv_jitter_amplitude{0.0, 0.3};
    Range uv_jitter_omega{0.5, 2.0};

    void validate() const;
};

/// One realized draw of a maneuver. `onset` and `duration` delimit the
/// label-relevant part of the scenario.
struct KinematicParams {
    double initial_speed = 0.0;
    double peak_accel = 0.0;           ///< longitudinal peak, m/s^2 (signed)
    double lateral_displacement = 0.0; ///< signed, +y is left
    double onset = 0.0;
    double duration = 0.0;

    double ramp_time = 0.0;        ///< longitudinal smoothstep ramp width
    double hold_time = 0.0;        ///< longitudinal plateau / overtake pass hold
    double lateral_time = 0.0;     ///< lane-change or swerve leg duration
    double delta_v = 0.0;          ///< overtake speed gain
    double tv_jitter_amplitude = 0.0;
    double tv_jitter_omega = 1.0;
    double tv_jitter_phase = 0.0;

    double start_x = 0.0;
    double start_y = 0.0;

    double uv_start_x = 0.0;
    double uv_start_y = 0.0;
    double uv_speed = 0.0;
    double uv_jitter_amplitude = 0.0;
    double uv_jitter_omega = 1.0;
    double uv_jitter_phase = 0.0;
};

/// Closed-form motion along one axis: p(t) = p0 + v0 t + contributions of
/// acceleration ramps, lateral sigmoid steps and sinusoidal accelerations.
class AxisMotion {
public:
    struct AccelRamp {
        double t0;
        double width;
        double gain; ///< a += gain * smoothstep((t - t0) / width)
    };
    struct SigmoidStep {
        double t0;
        double width;
        double displacement; ///< p += displacement * septic((t - t0) / width)
    };
    struct Sinusoid {
        double amplitude; ///< a += amplitude * sin(omega t + phase)
        double omega;
        double phase;
    };
    struct Kinematics {
        double p, v, a;
    };

    AxisMotion(double p0, double v0) : p0_(p0), v0_(v0) {}

    void add(AccelRamp r) { ramps_.push_back(r); }
    void add(SigmoidStep s) { steps_.push_back(s); }
    void add(Sinusoid s) { sines_.push_back(s); }

    /// Trapezoidal acceleration pulse of height `peak` with smooth ramps.
    void add_pulse(double t0, double ramp, double hold, double peak);

    Kinematics at(double t) const;

private:
    double p0_;
    double v0_;
    std::vector<AccelRamp> ramps_;
    std::vector<SigmoidStep> steps_;
    std::vector<Sinusoid> sines_;
};

/// Planar motion of one vehicle: x is longitudinal, y lateral.
struct VehicleMotion {
    AxisMotion x;
    AxisMotion y;

    StateSample at(double t) const;
};

VehicleMotion tv_motion(BehaviorClass c, const KinematicParams& p);
VehicleMotion uv_motion(const KinematicParams& p);

/// Draws randomized parameters for `c`. Pure function of its arguments.
KinematicParams sample_params(BehaviorClass c, const ScenarioConfig& cfg, const KinematicRanges& ranges,
                              std::uint64_t seed);

/// Samples `motion` at t = k / rate for k in [0, count).
std::vector<StateSample> sample_motion(const VehicleMotion& motion, int rate, int count);

struct TrajectoryPair {
    std::vector<StateSample> tv_truth;  ///< at R_h over the whole scenario
    std::vector<StateSample> uv_states; ///< at R_l over the whole scenario
    BehaviorClass behavior = BehaviorClass::Following;
    KinematicParams params;
};

TrajectoryPair gen_trajectory(BehaviorClass c, const ScenarioConfig& cfg, const KinematicRanges& ranges,
                              std::uint64_t seed);
TrajectoryPair gen_trajectory(BehaviorClass c, const ScenarioConfig& cfg, std::uint64_t seed);

/// Where the observation window is placed inside the scenario.
struct OnsetPolicy {
    enum class Kind { Fixed, Coverage };

    Kind kind = Kind::Coverage;
    double fixed_start = 0.0;   ///< window start for Kind::Fixed, s
    double min_coverage = 0.5;  ///< fraction of the maneuver inside the window for Kind::Coverage

    static OnsetPolicy fixed(double start) { return {Kind::Fixed, start, 0.5}; }
    static OnsetPolicy coverage(double fraction = 0.5) { return {Kind::Coverage, 0.0, fraction}; }
};

struct ObservationWindow {
    double start_time = 0.0;
    PhysInfoMatrix tv_truth; ///< 6 x S at R_h
    PhysInfoMatrix uv;       ///< 6 x C at R_l
};

/// Window start times are quantized to 1 / gcd(R_h, R_l) so both matrices
/// begin at the same wall-clock instant.
ObservationWindow sample_window(const TrajectoryPair& traj, const ScenarioConfig& cfg, const OnsetPolicy& policy,
                                std::uint64_t seed);

} // namespace isbp
