#pragma once

#include <Eigen/Core>

#include <span>

namespace isbp {

/// Ground-truth or estimated kinematic state at one instant. SI units.
struct StateSample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double ax = 0.0;
    double ay = 0.0;
};

/// 6 x N time series of [x, y, vx, vy, ax, ay] columns sampled at `rate_hz`.
struct PhysInfoMatrix {
    using Storage = Eigen::Matrix<double, 6, Eigen::Dynamic>;

    enum Row : Eigen::Index { X = 0, Y, VX, VY, AX, AY };

    double rate_hz = 0.0;
    Storage values;

    PhysInfoMatrix() = default;
    PhysInfoMatrix(double rate, Eigen::Index columns) : rate_hz(rate), values(Storage::Zero(6, columns)) {}

    Eigen::Index columns() const { return values.cols(); }

    void set_column(Eigen::Index c, const StateSample& s) {
        values.col(c) << s.x, s.y, s.vx, s.vy, s.ax, s.ay;
    }

    StateSample column(Eigen::Index c, double t0 = 0.0) const {
        const auto v = values.col(c);
        return {t0 + static_cast<double>(c) / rate_hz, v(X), v(Y), v(VX), v(VY), v(AX), v(AY)};
    }

    static PhysInfoMatrix from_states(std::span<const StateSample> states, double rate) {
        PhysInfoMatrix m(rate, static_cast<Eigen::Index>(states.size()));
        for (std::size_t i = 0; i < states.size(); ++i) {
            m.set_column(static_cast<Eigen::Index>(i), states[i]);
        }
        return m;
    }

    bool operator==(const PhysInfoMatrix& o) const {
        return rate_hz == o.rate_hz && values.cols() == o.values.cols() && values == o.values;
    }
};

} // namespace isbp
