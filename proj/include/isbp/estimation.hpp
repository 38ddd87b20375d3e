#pragma once

// Grid-based angle / delay / Doppler estimation for a single dominant target.
//
// Coordinates are handled internally as normalized frequencies (cycles per
// element) on each axis of the echo cube:
//   angle   u      = (d_r / lambda) sin(theta - boresight)   in [-1/2, 1/2)
//   delay   nu_tau = df * tau                                 in [0, 1)
//   Doppler nu_f   = f_d * T                                  in [-1/2, 1/2)
// and the matched correlation
//   C(u, nu_tau, nu_f) = sum y[p,n,m] e^{-j2pi u p} e^{+j2pi nu_tau n} e^{-j2pi nu_f m}
// is the continuous interpolant of the zero-padded 3D DFT.

#include "isbp/echo.hpp"

namespace isbp {

struct GridSpec {
    int delay_padding = 8;
    int doppler_padding = 8;
    int angle_bins = 256; ///< points of the sine-spaced angle grid
    int guard_bins = 3;   ///< noise-estimation guard half-width, padded bins
    /// Three-point refinements after the padded-grid interpolation, each at a
    /// tenth of the previous spacing (floored at 1/100 bin).
    int refine_passes = 3;

    void validate() const;
};

struct ParamEstimate {
    double angle = 0.0;       ///< global bearing, rad
    double local_angle = 0.0; ///< relative to boresight, |.| <= pi/2
    double delay = 0.0;       ///< s, in [0, 1/df)
    double doppler = 0.0;     ///< Hz, |.| <= 1/(2T)
    double noise_var = 0.0;   ///< per complex sample
    double peak_power = 0.0;  ///< |b_hat|^2

    // Normalized frequencies of the peak and the fitted complex gain.
    double spatial_freq = 0.0;
    double delay_freq = 0.0;
    double doppler_freq = 0.0;
    cdouble amplitude{0.0, 0.0};

    double range(const WaveformConfig& wf) const { return 0.5 * delay * wf.speed_of_light; }
    double radial_velocity(const WaveformConfig& wf) const { return wf.radial_velocity_of(doppler); }
    /// Per-element noise-to-signal ratio sigma^2 / |b|^2.
    double inverse_snr() const { return noise_var / peak_power; }
};

/// Throws EstimationError for an all-zero cube and ConfigError on shape mismatch.
/// The returned estimate includes estimate_noise_var().
ParamEstimate estimate_atd(const EchoTensor& cube, const BsConfig& bs, const WaveformConfig& wf,
                           const GridSpec& grid = {});

/// Mean native-DFT cell power of the cube with the fitted target removed,
/// excluding a +-guard_bins (padded) box around the peak, per sample.
/// Throws EstimationError when the guard box leaves no cells.
double estimate_noise_var(const EchoTensor& cube, const ParamEstimate& peak, const GridSpec& grid = {});

/// |C| at arbitrary normalized coordinates, by direct summation.
double correlation_magnitude(const EchoTensor& cube, double u, double nu_tau, double nu_f);

} // namespace isbp
