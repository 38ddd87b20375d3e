#pragma once

// Post-matched-filter OFDM echo model for one base station and one sensing
// snapshot:
//
//   y[p, n, m] = b * exp(j 2 pi f_d m T) * exp(-j 2 pi n df tau) * a_R(theta)[p] + z
//
// with a_R(theta)[p] = exp(j 2 pi (d_r / lambda) p sin(theta - boresight)).

#include "isbp/phys_info.hpp"

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <vector>

namespace isbp {

using cdouble = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;

struct WaveformConfig {
    double carrier_hz = 3.5e9;
    double subcarrier_spacing_hz = 30e3;
    int num_subcarriers = 128;
    int num_symbols = 42;
    /// CP-inclusive OFDM symbol duration; normal cyclic prefix (288 / 4096).
    double symbol_duration_s = (1.0 / 30e3) * (1.0 + 288.0 / 4096.0);
    double speed_of_light = kSpeedOfLight;

    double wavelength() const { return speed_of_light / carrier_hz; }
    /// Unambiguous delay span 1 / df.
    double max_delay() const { return 1.0 / subcarrier_spacing_hz; }
    /// Unambiguous Doppler span is [-1/(2T), 1/(2T)).
    double max_doppler() const { return 0.5 / symbol_duration_s; }

    /// Doppler shift of a radial velocity; receding targets (v_r > 0) give f_d < 0.
    double doppler_of(double radial_velocity) const { return -2.0 * radial_velocity * carrier_hz / speed_of_light; }
    double radial_velocity_of(double doppler) const { return -doppler * speed_of_light / (2.0 * carrier_hz); }

    void validate() const;
};

struct BsConfig {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    int num_antennas = 8;
    double spacing_m = 0.0;    ///< d_r
    double wavelength_m = 0.0; ///< lambda
    /// Direction the array broadside faces, rad. The array only resolves
    /// sin(theta - boresight), so targets must lie in the front half-plane.
    double boresight = 0.0;

    /// Half-wavelength spacing for `wf`.
    static BsConfig make(int id, double x, double y, const WaveformConfig& wf, double boresight = 0.0,
                         int antennas = 8);

    double spacing_ratio() const { return spacing_m / wavelength_m; }

    void validate() const;
};

struct EchoParams {
    cdouble gain{1.0, 0.0};
    double angle = 0.0;   ///< global bearing from BS to target, rad
    double delay = 0.0;   ///< round trip, s
    double doppler = 0.0; ///< Hz
    double range = 0.0;   ///< one-way, m
    double radial_velocity = 0.0;
};

class EchoTensor {
public:
    EchoTensor() = default;
    EchoTensor(int antennas, int subcarriers, int symbols)
        : antennas_(antennas), subcarriers_(subcarriers), symbols_(symbols),
          data_(static_cast<std::size_t>(antennas) * subcarriers * symbols) {}

    int antennas() const { return antennas_; }
    int subcarriers() const { return subcarriers_; }
    int symbols() const { return symbols_; }
    std::size_t size() const { return data_.size(); }

    std::size_t index(int p, int n, int m) const {
        return (static_cast<std::size_t>(p) * subcarriers_ + n) * symbols_ + m;
    }
    cdouble& operator()(int p, int n, int m) { return data_[index(p, n, m)]; }
    const cdouble& operator()(int p, int n, int m) const { return data_[index(p, n, m)]; }

    std::vector<cdouble>& data() { return data_; }
    const std::vector<cdouble>& data() const { return data_; }

    int bs_id = 0;
    int snapshot = 0;
    double snr_db = 0.0;
    double noise_var = 0.0;

private:
    int antennas_ = 0;
    int subcarriers_ = 0;
    int symbols_ = 0;
    std::vector<cdouble> data_;
};

Eigen::VectorXcd steering_vector(double theta, const BsConfig& bs);

/// Throws GeometryError when the target coincides with the BS.
EchoParams echo_params_from_truth(const StateSample& tv, const BsConfig& bs, const WaveformConfig& wf);

/// Noise variance per complex sample that realizes `snr_db` for gain `b`.
double noise_variance_for(cdouble gain, double snr_db);

/// Synthesizes one echo cube. snr_db = +infinity gives a noiseless cube.
EchoTensor synth_echo(const EchoParams& params, const BsConfig& bs, const WaveformConfig& wf, double snr_db,
                      std::uint64_t seed);

constexpr double apply_weather_loss(double snr_db, double loss_db = 20.0) { return snr_db - loss_db; }

} // namespace isbp
