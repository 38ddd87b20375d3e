#include "isbp/fusion.hpp"

#include "isbp/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace isbp {

TdoaAoaSystem TdoaAoaSystem::build(std::span<const ParamEstimate> estimates, std::span<const BsConfig> bss,
                                   const WaveformConfig& wf) {
    const auto count = static_cast<Eigen::Index>(estimates.size());
    if (count < 2) {
        throw GeometryError("hybrid positioning needs at least two base stations");
    }
    if (bss.size() != estimates.size()) {
        throw ConfigError("estimate and base-station counts differ");
    }
    TdoaAoaSystem sys;
    sys.design.resize(2 * count - 1, 3);
    sys.rhs.resize(2 * count - 1);
    sys.weights.resize(2 * count - 1);

    const auto k = [&](Eigen::Index i) { return bss[i].x * bss[i].x + bss[i].y * bss[i].y; };
    const double half_c = 0.5 * wf.speed_of_light;
    for (Eigen::Index i = 1; i < count; ++i) {
        const double xi1 = bss[i].x - bss[0].x;
        const double yi1 = bss[i].y - bss[0].y;
        const double ri1 = half_c * (estimates[i].delay - estimates[0].delay);
        const Eigen::Index row = i - 1;
        sys.design.row(row) << -2.0 * xi1, -2.0 * yi1, -2.0 * ri1;
        sys.rhs(row) = ri1 * ri1 - k(i) + k(0);
        sys.weights(row) = 1.0 / estimates[i].noise_var;
    }
    for (Eigen::Index i = 0; i < count; ++i) {
        const double s = std::sin(estimates[i].angle);
        const double c = std::cos(estimates[i].angle);
        const Eigen::Index row = count - 1 + i;
        sys.design.row(row) << s, -c, 0.0;
        sys.rhs(row) = s * bss[i].x - c * bss[i].y;
        sys.weights(row) = 1.0 / estimates[i].noise_var;
    }
    if (!sys.weights.allFinite() || (sys.weights.array() <= 0.0).any()) {
        throw ConfigError("noise variances must be positive and finite");
    }
    return sys;
}

namespace {

// Weighted nonlinear cost over ranges and bearings, bearings converted to
// cross-range metres so both residual types share one variance.
struct NonlinearModel {
    std::span<const ParamEstimate> est;
    std::span<const BsConfig> bss;
    double half_c;

    double cost(const Eigen::Vector2d& p) const {
        double j = 0.0;
        for (std::size_t i = 0; i < est.size(); ++i) {
            const double dx = p.x() - bss[i].x;
            const double dy = p.y() - bss[i].y;
            const double d = std::hypot(dx, dy);
            const double er = half_c * est[i].delay - d;
            const double ea = d * std::remainder(est[i].angle - std::atan2(dy, dx), 2.0 * std::numbers::pi);
            j += (er * er + ea * ea) / est[i].noise_var;
        }
        return j;
    }

    Eigen::Vector2d gauss_newton_step(const Eigen::Vector2d& p) const {
        Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
        Eigen::Vector2d grad = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < est.size(); ++i) {
            const double dx = p.x() - bss[i].x;
            const double dy = p.y() - bss[i].y;
            const double d = std::hypot(dx, dy);
            if (!(d > 1e-9)) continue;
            const double w = 1.0 / est[i].noise_var;
            const Eigen::Vector2d jr(dx / d, dy / d);
            const Eigen::Vector2d ja(-dy / d, dx / d); // d * gradient of atan2
            const double er = half_c * est[i].delay - d;
            const double ea = d * std::remainder(est[i].angle - std::atan2(dy, dx), 2.0 * std::numbers::pi);
            normal += w * (jr * jr.transpose() + ja * ja.transpose());
            grad += w * (jr * er + ja * ea);
        }
        const Eigen::LDLT<Eigen::Matrix2d> ldlt(normal);
        if (ldlt.info() != Eigen::Success || !(normal.determinant() > 0.0)) {
            return Eigen::Vector2d::Zero();
        }
        return ldlt.solve(grad);
    }
};

} // namespace

PositionFix solve_position_wls(std::span<const ParamEstimate> estimates, std::span<const BsConfig> bss,
                               const WaveformConfig& wf, bool refine) {
    const auto sys = TdoaAoaSystem::build(estimates, bss, wf);
    const Eigen::VectorXd sqrt_w = sys.weights.cwiseSqrt();
    const Eigen::MatrixXd a = sqrt_w.asDiagonal() * sys.design;
    const Eigen::VectorXd b = sqrt_w.asDiagonal() * sys.rhs;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-12);
    if (qr.rank() < 3) {
        throw GeometryError("hybrid TDoA/AoA system is rank deficient");
    }
    const Eigen::Vector3d sol = qr.solve(b);
    if (!sol.allFinite()) {
        throw GeometryError("hybrid TDoA/AoA solution is not finite");
    }

    PositionFix fix;
    const double b_norm = b.norm();
    fix.residual = (a * sol - b).norm() / (b_norm > 0.0 ? b_norm : 1.0);

    Eigen::Vector2d p(sol(0), sol(1));
    if (refine) {
        const NonlinearModel model{estimates, bss, 0.5 * wf.speed_of_light};
        const Eigen::Vector2d candidate = p + model.gauss_newton_step(p);
        if (candidate.allFinite() && model.cost(candidate) <= model.cost(p)) {
            p = candidate;
        }
    }
    fix.x = p.x();
    fix.y = p.y();
    fix.r1 = std::hypot(p.x() - bss[0].x, p.y() - bss[0].y);
    return fix;
}

double VelocityFix::vx() const { return speed * std::cos(heading); }
double VelocityFix::vy() const { return speed * std::sin(heading); }

VelocityFix solve_velocity(std::span<const double> dopplers, std::span<const double> angles,
                           const WaveformConfig& wf, std::span<const double> weights, double min_diversity) {
    const std::size_t count = dopplers.size();
    if (count < 2 || angles.size() != count || weights.size() != count) {
        throw GeometryError("velocity solve needs matching Doppler, angle and weight lists for >= 2 BSs");
    }
    double diversity = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = i + 1; j < count; ++j) {
            diversity = std::max(diversity, std::abs(std::sin(angles[i] - angles[j])));
        }
    }
    if (diversity < min_diversity) {
        throw GeometryError("velocity unobservable: insufficient angle diversity");
    }

    Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < count; ++i) {
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
            throw ConfigError("velocity weights must be positive and finite");
        }
        const Eigen::Vector2d h(std::cos(angles[i]), std::sin(angles[i]));
        const double vr = wf.radial_velocity_of(dopplers[i]);
        normal += weights[i] * h * h.transpose();
        rhs += weights[i] * vr * h;
    }
    const Eigen::Vector2d v = normal.ldlt().solve(rhs);
    VelocityFix fix;
    fix.speed = v.norm();
    fix.heading = fix.speed > 0.0 ? std::atan2(v.y(), v.x()) : 0.0;
    return fix;
}

void KalmanConfig::validate() const {
    if (!(process_noise > 0.0) || !(pos_var_floor > 0.0) || !(vel_var_floor > 0.0)) {
        throw ConfigError("Kalman noise parameters must be positive");
    }
    for (double s : initial_std) {
        if (!(s > 0.0)) throw ConfigError("initial standard deviations must be positive");
    }
    if (pos_geometry_factor < 0.0 || vel_geometry_factor < 0.0) {
        throw ConfigError("geometry factors must be non-negative");
    }
}

CaKalman::CaKalman(const KalmanConfig& cfg, double dt) : cfg_(cfg) {
    cfg_.validate();
    if (!(dt > 0.0)) throw ConfigError("Kalman step must be positive");
    f_.setIdentity();
    q_.setZero();
    const double q = cfg_.process_noise;
    const double dt2 = dt * dt;
    const double dt3 = dt2 * dt;
    for (int axis = 0; axis < 2; ++axis) {
        const int ip = axis;
        const int iv = 2 + axis;
        const int ia = 4 + axis;
        f_(ip, iv) = dt;
        f_(ip, ia) = 0.5 * dt2;
        f_(iv, ia) = dt;
        q_(ip, ip) = q * dt3 * dt2 / 20.0;
        q_(ip, iv) = q_(iv, ip) = q * dt2 * dt2 / 8.0;
        q_(ip, ia) = q_(ia, ip) = q * dt3 / 6.0;
        q_(iv, iv) = q * dt3 / 3.0;
        q_(iv, ia) = q_(ia, iv) = q * dt2 / 2.0;
        q_(ia, ia) = q * dt;
    }
}

void CaKalman::initialize(const Fix& first) {
    x_ << first.x, first.y, first.vx, first.vy, 0.0, 0.0;
    p_.setZero();
    for (int i = 0; i < 6; ++i) {
        p_(i, i) = cfg_.initial_std[i] * cfg_.initial_std[i];
    }
    initialized_ = true;
}

void CaKalman::predict() {
    x_ = f_ * x_;
    p_ = f_ * p_ * f_.transpose() + q_;
    p_ = (0.5 * (p_ + p_.transpose())).eval();
}

void CaKalman::update(const Fix& fix) {
    Eigen::Matrix<double, 4, 6> h = Eigen::Matrix<double, 4, 6>::Zero();
    h(0, 0) = h(1, 1) = h(2, 2) = h(3, 3) = 1.0;
    const double rp = std::max(cfg_.pos_var_floor, fix.pos_var);
    const double rv = std::max(cfg_.vel_var_floor, fix.vel_var);
    const Eigen::Vector4d r(rp, rp, rv, rv);
    const Eigen::Vector4d z(fix.x, fix.y, fix.vx, fix.vy);

    const Eigen::Matrix4d s = h * p_ * h.transpose() + Eigen::Matrix4d(r.asDiagonal());
    const Eigen::Matrix<double, 6, 4> k = p_ * h.transpose() * s.llt().solve(Eigen::Matrix4d::Identity());
    x_ += k * (z - h * x_);
    // Joseph form keeps the covariance symmetric positive definite.
    const Matrix6 ikh = Matrix6::Identity() - k * h;
    p_ = ikh * p_ * ikh.transpose() + k * r.asDiagonal() * k.transpose();
    p_ = (0.5 * (p_ + p_.transpose())).eval();
}

PhysInfoMatrix run_ca_kalman(std::span<const std::optional<Fix>> fixes, double rate_hz, const KalmanConfig& cfg) {
    std::optional<std::size_t> first;
    for (std::size_t i = 0; i < fixes.size(); ++i) {
        if (!fixes[i]) continue;
        const auto& f = *fixes[i];
        if (!std::isfinite(f.x) || !std::isfinite(f.y) || !std::isfinite(f.vx) || !std::isfinite(f.vy) ||
            !std::isfinite(f.pos_var) || !std::isfinite(f.vel_var)) {
            throw InputError("non-finite measurement", i);
        }
        if (!first) first = i;
    }
    if (!first) {
        throw InputError("Kalman filter needs at least one fix", 0);
    }

    CaKalman kf(cfg, 1.0 / rate_hz);
    PhysInfoMatrix out(rate_hz, static_cast<Eigen::Index>(fixes.size()));
    kf.initialize(*fixes[*first]);
    for (std::size_t i = 0; i < *first; ++i) {
        out.values.col(static_cast<Eigen::Index>(i)) = kf.state();
    }
    out.values.col(static_cast<Eigen::Index>(*first)) = kf.state();
    for (std::size_t i = *first + 1; i < fixes.size(); ++i) {
        kf.predict();
        if (fixes[i]) kf.update(*fixes[i]);
        out.values.col(static_cast<Eigen::Index>(i)) = kf.state();
    }
    return out;
}

std::optional<Fix> fuse_snapshot(std::span<const ParamEstimate> estimates, std::span<const BsConfig> bss,
                                 const WaveformConfig& wf, const KalmanConfig& cfg) {
    try {
        const auto pos = solve_position_wls(estimates, bss, wf);
        std::vector<double> dopplers, angles, weights;
        double inverse_snr = 0.0;
        double samples = 0.0;
        for (std::size_t i = 0; i < estimates.size(); ++i) {
            dopplers.push_back(estimates[i].doppler);
            angles.push_back(estimates[i].angle);
            weights.push_back(1.0 / estimates[i].noise_var);
            inverse_snr += estimates[i].inverse_snr();
            samples += static_cast<double>(bss[i].num_antennas) * wf.num_subcarriers * wf.num_symbols;
        }
        const auto vel = solve_velocity(dopplers, angles, wf, weights);
        // Mean per-BS inverse SNR after coherent integration over the cube.
        const double integrated = inverse_snr / samples;
        Fix fix{pos.x, pos.y, vel.vx(), vel.vy(), cfg.pos_geometry_factor * integrated,
                cfg.vel_geometry_factor * integrated};
        if (!std::isfinite(fix.x) || !std::isfinite(fix.y) || !std::isfinite(fix.vx) || !std::isfinite(fix.vy)) {
            return std::nullopt;
        }
        return fix;
    } catch (const GeometryError&) {
        return std::nullopt;
    }
}

} // namespace isbp
