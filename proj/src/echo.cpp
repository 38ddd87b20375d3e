#include "isbp/echo.hpp"

#include "isbp/errors.hpp"
#include "isbp/rng.hpp"

#include <cmath>
#include <numbers>

namespace isbp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void WaveformConfig::validate() const {
    if (!(carrier_hz > 0.0 && subcarrier_spacing_hz > 0.0 && symbol_duration_s > 0.0 && speed_of_light > 0.0)) {
        throw ConfigError("waveform parameters must be positive");
    }
    if (num_subcarriers < 1 || num_symbols < 1) {
        throw ConfigError("waveform needs at least one subcarrier and one symbol");
    }
    if (symbol_duration_s * subcarrier_spacing_hz < 1.0 - 1e-12) {
        throw ConfigError("symbol duration must be at least 1 / subcarrier spacing");
    }
}

BsConfig BsConfig::make(int id, double x, double y, const WaveformConfig& wf, double boresight, int antennas) {
    BsConfig bs;
    bs.id = id;
    bs.x = x;
    bs.y = y;
    bs.num_antennas = antennas;
    bs.wavelength_m = wf.wavelength();
    bs.spacing_m = 0.5 * bs.wavelength_m;
    bs.boresight = boresight;
    return bs;
}

void BsConfig::validate() const {
    if (num_antennas < 2) {
        throw ConfigError("a base station needs at least two antennas");
    }
    if (!(spacing_m > 0.0 && wavelength_m > 0.0)) {
        throw ConfigError("antenna spacing and wavelength must be positive");
    }
}

Eigen::VectorXcd steering_vector(double theta, const BsConfig& bs) {
    Eigen::VectorXcd a(bs.num_antennas);
    const double step = kTwoPi * bs.spacing_ratio() * std::sin(theta - bs.boresight);
    for (int p = 0; p < bs.num_antennas; ++p) {
        a(p) = std::polar(1.0, step * p);
    }
    return a;
}

EchoParams echo_params_from_truth(const StateSample& tv, const BsConfig& bs, const WaveformConfig& wf) {
    const double dx = tv.x - bs.x;
    const double dy = tv.y - bs.y;
    const double range = std::hypot(dx, dy);
    if (!(range > 1e-9)) {
        throw GeometryError("target coincides with base station " + std::to_string(bs.id));
    }
    EchoParams p;
    p.angle = std::atan2(dy, dx);
    p.range = range;
    p.delay = 2.0 * range / wf.speed_of_light;
    p.radial_velocity = tv.vx * std::cos(p.angle) + tv.vy * std::sin(p.angle);
    p.doppler = wf.doppler_of(p.radial_velocity);
    return p;
}

double noise_variance_for(cdouble gain, double snr_db) { return std::norm(gain) / std::pow(10.0, snr_db / 10.0); }

EchoTensor synth_echo(const EchoParams& params, const BsConfig& bs, const WaveformConfig& wf, double snr_db,
                      std::uint64_t seed) {
    EchoTensor cube(bs.num_antennas, wf.num_subcarriers, wf.num_symbols);
    cube.bs_id = bs.id;
    cube.snr_db = snr_db;

    const Eigen::VectorXcd a = steering_vector(params.angle, bs);
    std::vector<cdouble> delay_phasor(static_cast<std::size_t>(wf.num_subcarriers));
    for (int n = 0; n < wf.num_subcarriers; ++n) {
        delay_phasor[n] = std::polar(1.0, -kTwoPi * n * wf.subcarrier_spacing_hz * params.delay);
    }
    std::vector<cdouble> doppler_phasor(static_cast<std::size_t>(wf.num_symbols));
    for (int m = 0; m < wf.num_symbols; ++m) {
        doppler_phasor[m] = std::polar(1.0, kTwoPi * params.doppler * m * wf.symbol_duration_s);
    }

    for (int p = 0; p < cube.antennas(); ++p) {
        const cdouble bp = params.gain * a(p);
        for (int n = 0; n < cube.subcarriers(); ++n) {
            const cdouble bpn = bp * delay_phasor[n];
            cdouble* row = &cube(p, n, 0);
            for (int m = 0; m < cube.symbols(); ++m) {
                row[m] = bpn * doppler_phasor[m];
            }
        }
    }

    if (std::isfinite(snr_db)) {
        cube.noise_var = noise_variance_for(params.gain, snr_db);
        const double sigma = std::sqrt(0.5 * cube.noise_var);
        Rng rng(seed);
        for (auto& v : cube.data()) {
            const double re = rng.normal();
            const double im = rng.normal();
            v += cdouble(sigma * re, sigma * im);
        }
    }
    return cube;
}

} // namespace isbp
