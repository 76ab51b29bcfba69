#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "phaselda/series.hpp"
#include "phaselda/util.hpp"

namespace phaselda {

// Second-order Butterworth low-pass biquad. cutoff is a fraction of the
// Nyquist frequency (0.5 cycles/day for daily data), matching the usual
// normalized-cutoff convention.
struct Biquad {
    // y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
    double b0, b1, b2, a1, a2;

    static Biquad butterworth_lowpass(double cutoff) {
        if (!(cutoff > 0.0 && cutoff < 1.0))
            throw ConfigError("lowpass cutoff must lie in (0,1), got " + format_double(cutoff));
        const double ita = 1.0 / std::tan(M_PI * cutoff / 2.0);  // prewarped
        const double q = std::sqrt(2.0);
        const double b0 = 1.0 / (1.0 + q * ita + ita * ita);
        return Biquad{b0, 2.0 * b0, b0,
                      -2.0 * (ita * ita - 1.0) * b0,
                      (1.0 - q * ita + ita * ita) * b0};
    }

    // Steady-state filter state for a unit step (direct form II transposed),
    // so a constant input produces a constant output from the first sample.
    std::array<double, 2> step_state() const {
        // Solve (I - A) zi = B with A = [[-a1, 1], [-a2, 0]] the DF2T state
        // transition and B = [b1 - b0 a1, b2 - b0 a2].
        const double B0 = b1 - b0 * a1;
        const double B1 = b2 - b0 * a2;
        const double s0 = (B0 + B1) / (1.0 + a1 + a2);
        const double s1 = B1 - a2 * s0;
        return {s0, s1};
    }

    // One pass with explicit initial state (DF2T).
    void filter(const double* x, double* y, std::size_t n, std::array<double, 2> z) const {
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = x[i];
            const double yi = b0 * xi + z[0];
            z[0] = b1 * xi - a1 * yi + z[1];
            z[1] = b2 * xi - a2 * yi;
            y[i] = yi;
        }
    }
};

namespace detail {

// Odd (point-reflected) extension about the end samples, padlen each side.
inline std::vector<double> odd_extend(const std::vector<double>& x, int padlen) {
    const int n = static_cast<int>(x.size());
    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (int j = padlen; j >= 1; --j) ext.push_back(2.0 * x.front() - x[j]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (int j = 1; j <= padlen; ++j) ext.push_back(2.0 * x.back() - x[n - 1 - j]);
    return ext;
}

}  // namespace detail

inline constexpr int kFilterOrder = 2;
inline constexpr int kFiltfiltPad = 3 * kFilterOrder;
inline constexpr int kMinFilterLen = kFiltfiltPad + 1;

// Zero-phase Butterworth smoothing: forward and backward passes over an
// odd-extended series, each pass started from the scaled step steady state.
// Output length equals input length. Series shorter than kMinFilterLen are
// returned unchanged with a warning.
inline DailySeries lowpass(const DailySeries& series, double cutoff = 0.2,
                           Warnings* warnings = nullptr) {
    const Biquad bq = Biquad::butterworth_lowpass(cutoff);
    const int n = series.size();
    if (n < kMinFilterLen) {
        warn(warnings, "lowpass: series of length " + std::to_string(n) +
                           " is too short to filter (need >= " +
                           std::to_string(kMinFilterLen) + "); passing through");
        return series;
    }

    std::vector<double> ext = detail::odd_extend(series.values, kFiltfiltPad);
    std::vector<double> tmp(ext.size());

    auto scaled = [&](double x0) {
        auto z = bq.step_state();
        z[0] *= x0;
        z[1] *= x0;
        return z;
    };

    bq.filter(ext.data(), tmp.data(), ext.size(), scaled(ext.front()));
    std::reverse(tmp.begin(), tmp.end());
    bq.filter(tmp.data(), ext.data(), ext.size(), scaled(tmp.front()));
    std::reverse(ext.begin(), ext.end());

    DailySeries out{series.start, {}};
    out.values.assign(ext.begin() + kFiltfiltPad, ext.begin() + kFiltfiltPad + n);
    return out;
}

// First and second discrete derivatives of a daily series. With gap-free
// daily spacing the day delta is always 1, so these are plain differences.
// velocity[i] is dated to source day i+1 (the target date of the difference),
// acceleration[i] to source day i+2.
struct Kinetics {
    DailySeries smoothed;
    DailySeries velocity;
    DailySeries acceleration;

    bool defined_at(Date d) const {
        return velocity.covers(d) && acceleration.covers(d);
    }
};

inline Kinetics kinetics(const DailySeries& series) {
    const int n = series.size();
    if (n < 3)
        throw ConfigError("kinetics needs at least 3 days, got " + std::to_string(n));

    Kinetics kin;
    kin.smoothed = series;
    kin.velocity.start = series.start + 1;
    kin.velocity.values.resize(n - 1);
    for (int i = 0; i + 1 < n; ++i)
        kin.velocity.values[i] = series.values[i + 1] - series.values[i];

    kin.acceleration.start = series.start + 2;
    kin.acceleration.values.resize(n - 2);
    for (int i = 0; i + 1 < n - 1; ++i)
        kin.acceleration.values[i] = kin.velocity.values[i + 1] - kin.velocity.values[i];
    return kin;
}

}  // namespace phaselda
