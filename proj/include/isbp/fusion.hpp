#pragma once

// Multi-BS fusion: hybrid TDoA/AoA weighted least squares for position,
// Doppler-geometry least squares for velocity, and a constant-acceleration
// Kalman filter producing the 6 x S physical information matrix.

#include "isbp/echo.hpp"
#include "isbp/estimation.hpp"
#include "isbp/phys_info.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace isbp {

/// Linearized hybrid system  A [x, y, r_1]^T = b  with the weight vector W = R^-1.
///
/// Rows 0..I-2 are TDoA rows  -(2 x_i1, 2 y_i1, 2 r_i1) | r_i1^2 - k_i + k_1  for BS i = 2..I,
/// rows I-1..2I-2 are AoA rows  -(-sin th_i, cos th_i, 0) | sin th_i x_i - cos th_i y_i.
/// Both blocks carry the leading minus sign; with it the true state
/// satisfies every row exactly.
struct TdoaAoaSystem {
    Eigen::MatrixXd design;
    Eigen::VectorXd rhs;
    Eigen::VectorXd weights;

    static TdoaAoaSystem build(std::span<const ParamEstimate> estimates, std::span<const BsConfig> bss,
                               const WaveformConfig& wf);
};

struct PositionFix {
    double x = 0.0;
    double y = 0.0;
    double r1 = 0.0;       ///< range to the reference BS, reconciled with (x, y)
    double residual = 0.0; ///< weighted linear residual norm relative to the weighted rhs norm
};

struct VelocityFix {
    double speed = 0.0;   ///< v_ma >= 0
    double heading = 0.0; ///< theta_ma, rad

    double vx() const;
    double vy() const;
};

/// Throws GeometryError for fewer than two BSs or a rank-deficient system.
/// `refine` applies one residual-reducing Gauss-Newton step on the nonlinear
/// range/bearing equations before reconciling r_1.
PositionFix solve_position_wls(std::span<const ParamEstimate> estimates, std::span<const BsConfig> bss,
                               const WaveformConfig& wf, bool refine = true);

inline constexpr double kMinAngleDiversity = 0.05;

/// Weighted LS on v_r,i = vx cos th_i + vy sin th_i with v_r,i from the Doppler
/// shifts. Throws GeometryError when max |sin(th_i - th_j)| < min_diversity.
VelocityFix solve_velocity(std::span<const double> dopplers, std::span<const double> angles,
                           const WaveformConfig& wf, std::span<const double> weights,
                           double min_diversity = kMinAngleDiversity);

struct KalmanConfig {
    double process_noise = 5.0; ///< white-jerk intensity q, m^2/s^5
    double pos_var_floor = 0.25;
    double vel_var_floor = 0.25;
    std::array<double, 6> initial_std{10.0, 10.0, 5.0, 5.0, 3.0, 3.0};
    /// Measurement variance = factor * (sigma^2 / |b|^2) / cube size, before flooring.
    double pos_geometry_factor = 2.3e2;
    double vel_geometry_factor = 4.2e3;

    void validate() const;
};

/// One raw (position, velocity) measurement with its variances.
struct Fix {
    double x = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double pos_var = 0.0;
    double vel_var = 0.0;
};

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Constant-acceleration filter over [x, y, vx, vy, ax, ay] measuring (x, y, vx, vy).
class CaKalman {
public:
    CaKalman(const KalmanConfig& cfg, double dt);

    void initialize(const Fix& first);
    void predict();
    void update(const Fix& fix);

    bool initialized() const { return initialized_; }
    const Vector6& state() const { return x_; }
    const Matrix6& covariance() const { return p_; }

private:
    KalmanConfig cfg_;
    Matrix6 f_;
    Matrix6 q_;
    Vector6 x_ = Vector6::Zero();
    Matrix6 p_ = Matrix6::Identity();
    bool initialized_ = false;
};

/// Filters one fix per snapshot (std::nullopt = missing, predict only).
/// Snapshots before the first fix take the initial state. Throws InputError
/// on non-finite input or when no fix is present.
PhysInfoMatrix run_ca_kalman(std::span<const std::optional<Fix>> fixes, double rate_hz, const KalmanConfig& cfg);

/// Full per-snapshot fusion of per-BS estimates into a Kalman measurement.
/// Returns std::nullopt when the geometry is degenerate for this snapshot.
std::optional<Fix> fuse_snapshot(std::span<const ParamEstimate> estimates, std::span<const BsConfig> bss,
                                 const WaveformConfig& wf, const KalmanConfig& cfg);

} // namespace isbp
