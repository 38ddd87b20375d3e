#include "isbp/estimation.hpp"

#include "isbp/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace isbp {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum Axis : int { kAngle = 0, kDelay = 1, kDoppler = 2 };

// Exponent sign of the correlation kernel on each axis.
constexpr std::array<double, 3> kSign = {-1.0, +1.0, -1.0};

using Coords = std::array<double, 3>;

double wrap_half(double x) { return x - std::floor(x + 0.5); }
double wrap_unit(double x) { return x - std::floor(x); }

class FftwBuffer {
public:
    explicit FftwBuffer(std::size_t n) : n_(n), ptr_(fftw_alloc_complex(n)) {
        if (ptr_ == nullptr) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(ptr_); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    fftw_complex* raw() { return ptr_; }
    cdouble* data() { return reinterpret_cast<cdouble*>(ptr_); }
    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    fftw_complex* ptr_;
};

// FFTW planning is not thread-safe; plans are created once per shape under a
// lock and then executed concurrently through the new-array interface.
fftw_plan forward_plan(int a, int b, int c) {
    static std::mutex mutex;
    static std::map<std::tuple<int, int, int>, fftw_plan> plans;
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(a, b, c);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    FftwBuffer in(static_cast<std::size_t>(a) * b * c);
    FftwBuffer out(in.size());
    fftw_plan plan = fftw_plan_dft_3d(a, b, c, in.raw(), out.raw(), FFTW_FORWARD, FFTW_ESTIMATE);
    plans.emplace(key, plan);
    return plan;
}

void forward_fft(const EchoTensor& cube, const cdouble* src, FftwBuffer& out) {
    FftwBuffer in(cube.size());
    std::copy(src, src + cube.size(), in.data());
    fftw_execute_dft(forward_plan(cube.antennas(), cube.subcarriers(), cube.symbols()), in.raw(), out.raw());
}

std::vector<cdouble> kernel(int len, double freq, double sign) {
    std::vector<cdouble> k(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) {
        k[i] = std::polar(1.0, sign * kTwoPi * freq * i);
    }
    return k;
}

int axis_length(const EchoTensor& cube, int axis) {
    switch (axis) {
    case kAngle: return cube.antennas();
    case kDelay: return cube.subcarriers();
    default: return cube.symbols();
    }
}

// Collapses the cube onto one axis, weighting the other two by their
// correlation kernels. The Doppler contraction used by the angle and delay
// axes is cached, since those axes are refined with the Doppler coordinate
// held fixed.
class Reducer {
public:
    explicit Reducer(const EchoTensor& cube) : cube_(cube) {}

    std::vector<cdouble> operator()(int axis, const Coords& at) {
        const int np = cube_.antennas();
        const int nn = cube_.subcarriers();
        const int nm = cube_.symbols();
        if (axis == kDoppler) {
            const auto wa = kernel(np, at[kAngle], kSign[kAngle]);
            const auto wn = kernel(nn, at[kDelay], kSign[kDelay]);
            std::vector<cdouble> z(static_cast<std::size_t>(nm), cdouble{});
            for (int p = 0; p < np; ++p) {
                for (int n = 0; n < nn; ++n) {
                    const cdouble w = wa[p] * wn[n];
                    const cdouble* row = &cube_(p, n, 0);
                    for (int m = 0; m < nm; ++m) z[m] += w * row[m];
                }
            }
            return z;
        }
        if (!(at[kDoppler] == q_at_)) {
            const auto wm = kernel(nm, at[kDoppler], kSign[kDoppler]);
            q_.assign(static_cast<std::size_t>(np) * nn, cdouble{});
            for (int p = 0; p < np; ++p) {
                for (int n = 0; n < nn; ++n) {
                    const cdouble* row = &cube_(p, n, 0);
                    cdouble acc{};
                    for (int m = 0; m < nm; ++m) acc += row[m] * wm[m];
                    q_[static_cast<std::size_t>(p) * nn + n] = acc;
                }
            }
            q_at_ = at[kDoppler];
        }
        std::vector<cdouble> z(static_cast<std::size_t>(axis == kAngle ? np : nn), cdouble{});
        if (axis == kAngle) {
            const auto wn = kernel(nn, at[kDelay], kSign[kDelay]);
            for (int p = 0; p < np; ++p) {
                for (int n = 0; n < nn; ++n) z[p] += wn[n] * q_[static_cast<std::size_t>(p) * nn + n];
            }
        } else {
            const auto wa = kernel(np, at[kAngle], kSign[kAngle]);
            for (int p = 0; p < np; ++p) {
                for (int n = 0; n < nn; ++n) z[n] += wa[p] * q_[static_cast<std::size_t>(p) * nn + n];
            }
        }
        return z;
    }

private:
    const EchoTensor& cube_;
    std::vector<cdouble> q_;
    double q_at_ = std::numeric_limits<double>::quiet_NaN();
};

// sum_k z_k exp(sign j 2pi k x) by Horner's rule.
cdouble evaluate(const std::vector<cdouble>& z, double x, double sign) {
    const cdouble w = std::polar(1.0, sign * kTwoPi * x);
    cdouble r{};
    for (auto it = z.rbegin(); it != z.rend(); ++it) {
        r = r * w + *it;
    }
    return r;
}

double log_magnitude(const std::vector<cdouble>& z, double x, double sign) {
    const double a = std::abs(evaluate(z, x, sign));
    return a > 0.0 ? std::log(a) : -std::numeric_limits<double>::infinity();
}

// Vertex offset (in units of the spacing) of the parabola through three samples.
double parabolic_offset(double left, double centre, double right) {
    const double denom = left - 2.0 * centre + right;
    if (!(denom < 0.0) || !std::isfinite(denom)) return 0.0;
    return 0.5 * (left - right) / denom;
}

void three_point_refine(Reducer& reduce, Coords& c, int axis, double spacing, double max_offset) {
    const auto z = reduce(axis, c);
    const double s = kSign[axis];
    const double l = log_magnitude(z, c[axis] - spacing, s);
    const double m = log_magnitude(z, c[axis], s);
    const double r = log_magnitude(z, c[axis] + spacing, s);
    const double delta = std::clamp(parabolic_offset(l, m, r), -max_offset, max_offset);
    c[axis] += delta * spacing;
}

std::array<int, 3> padded_sizes(const EchoTensor& cube, const GridSpec& grid) {
    return {grid.angle_bins, cube.subcarriers() * grid.delay_padding, cube.symbols() * grid.doppler_padding};
}

} // namespace

void GridSpec::validate() const {
    if (delay_padding < 1 || doppler_padding < 1 || angle_bins < 2 || guard_bins < 0 || refine_passes < 0) {
        throw ConfigError("invalid grid specification");
    }
}

double correlation_magnitude(const EchoTensor& cube, double u, double nu_tau, double nu_f) {
    Reducer reduce(cube);
    return std::abs(evaluate(reduce(kDoppler, {u, nu_tau, nu_f}), nu_f, kSign[kDoppler]));
}

ParamEstimate estimate_atd(const EchoTensor& cube, const BsConfig& bs, const WaveformConfig& wf,
                           const GridSpec& grid) {
    grid.validate();
    if (cube.antennas() != bs.num_antennas || cube.subcarriers() != wf.num_subcarriers ||
        cube.symbols() != wf.num_symbols) {
        throw ConfigError("echo cube shape does not match the configuration");
    }
    if (grid.angle_bins < cube.antennas()) {
        throw ConfigError("angle grid must be at least as fine as the array DFT");
    }

    FftwBuffer spectrum(cube.size());
    forward_fft(cube, cube.data().data(), spectrum);
    std::size_t best = 0;
    double best_power = 0.0;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const double pw = std::norm(spectrum.data()[i]);
        if (pw > best_power) {
            best_power = pw;
            best = i;
        }
    }
    if (!(best_power > 0.0)) {
        throw EstimationError("echo cube has no peak (all zero)");
    }

    const int nm = cube.symbols();
    const int nn = cube.subcarriers();
    const int np = cube.antennas();
    const int km = static_cast<int>(best % nm);
    const int kn = static_cast<int>((best / nm) % nn);
    const int kp = static_cast<int>(best / (static_cast<std::size_t>(nm) * nn));
    // The forward FFT uses e^{-j...} on every axis; the delay kernel has the opposite sign.
    Coords c{static_cast<double>(kp) / np, static_cast<double>((nn - kn) % nn) / nn, static_cast<double>(km) / nm};

    // Arg-max on the zero-padded grid: coordinate ascent within one native bin.
    const auto sizes = padded_sizes(cube, grid);
    Reducer reduce(cube);
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (int axis = 0; axis < 3; ++axis) {
            const auto z = reduce(axis, c);
            const int g = sizes[axis];
            const int span = (g + axis_length(cube, axis) - 1) / axis_length(cube, axis);
            const long centre = std::lround(c[axis] * g);
            long arg = centre;
            double top = -1.0;
            for (long i = centre - span; i <= centre + span; ++i) {
                const double mag = std::abs(evaluate(z, static_cast<double>(i) / g, kSign[axis]));
                if (mag > top) {
                    top = mag;
                    arg = i;
                }
            }
            c[axis] = static_cast<double>(arg) / g;
        }
    }

    for (int axis = 0; axis < 3; ++axis) {
        three_point_refine(reduce, c, axis, 1.0 / sizes[axis], 0.5);
    }
    double step = 0.1;
    for (int pass = 0; pass < grid.refine_passes; ++pass) {
        for (int axis = 0; axis < 3; ++axis) {
            three_point_refine(reduce, c, axis, step / sizes[axis], 2.0);
        }
        step = std::max(step * 0.1, 0.01);
    }

    ParamEstimate est;
    est.spatial_freq = wrap_half(c[kAngle]);
    est.delay_freq = wrap_unit(c[kDelay]);
    est.doppler_freq = wrap_half(c[kDoppler]);
    const Coords fin{est.spatial_freq, est.delay_freq, est.doppler_freq};
    est.amplitude = evaluate(reduce(kDoppler, fin), est.doppler_freq, kSign[kDoppler]) /
                    static_cast<double>(cube.size());
    est.peak_power = std::norm(est.amplitude);

    est.delay = est.delay_freq / wf.subcarrier_spacing_hz;
    est.doppler = est.doppler_freq / wf.symbol_duration_s;
    const double sine = std::clamp(est.spatial_freq / bs.spacing_ratio(), -1.0, 1.0);
    est.local_angle = std::asin(sine);
    est.angle = std::remainder(bs.boresight + est.local_angle, kTwoPi);
    est.noise_var = estimate_noise_var(cube, est, grid);
    return est;
}

double estimate_noise_var(const EchoTensor& cube, const ParamEstimate& peak, const GridSpec& grid) {
    grid.validate();
    const auto sizes = padded_sizes(cube, grid);
    const int np = cube.antennas();
    const int nn = cube.subcarriers();
    const int nm = cube.symbols();
    if (2 * grid.guard_bins + 1 >= sizes[kAngle] && 2 * grid.guard_bins + 1 >= sizes[kDelay] &&
        2 * grid.guard_bins + 1 >= sizes[kDoppler]) {
        throw EstimationError("noise guard region covers the whole grid");
    }

    // Remove the fitted rank-one target so its sidelobes do not bias the floor.
    const auto ka = kernel(np, peak.spatial_freq, -kSign[kAngle]);
    const auto kd = kernel(nn, peak.delay_freq, -kSign[kDelay]);
    const auto kf = kernel(nm, peak.doppler_freq, -kSign[kDoppler]);
    std::vector<cdouble> residual(cube.data());
    for (int p = 0; p < np; ++p) {
        for (int n = 0; n < nn; ++n) {
            const cdouble w = peak.amplitude * ka[p] * kd[n];
            cdouble* row = &residual[cube.index(p, n, 0)];
            for (int m = 0; m < nm; ++m) row[m] -= w * kf[m];
        }
    }

    FftwBuffer spectrum(cube.size());
    forward_fft(cube, residual.data(), spectrum);

    auto outside = [&](int k, int len, double centre, int padded, bool mirrored) {
        const double coord = static_cast<double>(mirrored ? (len - k) % len : k) / len;
        return std::abs(wrap_half(coord - centre)) * padded > grid.guard_bins;
    };
    std::vector<char> out_d(static_cast<std::size_t>(nn));
    std::vector<char> out_f(static_cast<std::size_t>(nm));
    for (int n = 0; n < nn; ++n) out_d[n] = outside(n, nn, peak.delay_freq, sizes[kDelay], true);
    for (int m = 0; m < nm; ++m) out_f[m] = outside(m, nm, peak.doppler_freq, sizes[kDoppler], false);
    double sum = 0.0;
    std::size_t count = 0;
    for (int p = 0; p < np; ++p) {
        const bool out_a = outside(p, np, peak.spatial_freq, sizes[kAngle], false);
        for (int n = 0; n < nn; ++n) {
            const cdouble* row = spectrum.data() + cube.index(p, n, 0);
            for (int m = 0; m < nm; ++m) {
                if (out_a || out_d[n] || out_f[m]) {
                    sum += std::norm(row[m]);
                    ++count;
                }
            }
        }
    }
    if (count == 0) {
        throw EstimationError("noise guard region covers the whole grid");
    }
    const double var = sum / static_cast<double>(count) / static_cast<double>(cube.size());
    return var > 0.0 ? var : std::numeric_limits<double>::min();
}

} // namespace isbp
