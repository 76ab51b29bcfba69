#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "phaselda/rng.hpp"
#include "phaselda/signal.hpp"

using namespace phaselda;

namespace {

// Independent magnitude-response oracle: evaluate the designed transfer
// function on the unit circle from its coefficients, without touching the
// filtering code path.
double analytic_magnitude(double cutoff, double omega) {
    const Biquad bq = Biquad::butterworth_lowpass(cutoff);
    const std::complex<double> z = std::exp(std::complex<double>(0.0, -omega));
    const std::complex<double> num = bq.b0 + bq.b1 * z + bq.b2 * z * z;
    const std::complex<double> den = 1.0 + bq.a1 * z + bq.a2 * z * z;
    return std::abs(num / den);
}

DailySeries make_series(std::vector<double> values) {
    return DailySeries{Date::parse("2020-01-01"), std::move(values)};
}

}  // namespace

TEST_CASE("lowpass: DC gain is exactly 1") {
    DailySeries constant = make_series(std::vector<double>(8, 5.0));
    DailySeries out = lowpass(constant, 0.2);
    REQUIRE(out.size() == 8);
    for (double v : out.values) CHECK_THAT(v, Catch::Matchers::WithinAbs(5.0, 1e-9));

    // analytic cross-check: |H(0)| = 1
    CHECK_THAT(analytic_magnitude(0.2, 0.0), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("lowpass: Nyquist-frequency signal is attenuated to the analytic level") {
    // Oracle: a second-order Butterworth biquad has a double zero at z = -1,
    // so the single-pass Nyquist magnitude is 0 and the zero-phase response
    // is its square. Criterion allows 5% of the input amplitude on top.
    const double oracle = analytic_magnitude(0.2, M_PI);
    CHECK(oracle < 1e-12);

    const int n = 200;
    std::vector<double> alternating(n);
    for (int i = 0; i < n; ++i) alternating[i] = (i % 2 == 0) ? 0.0 : 1.0;
    DailySeries out = lowpass(make_series(alternating), 0.2);
    REQUIRE(out.size() == n);

    const double amplitude = 0.5;  // the Nyquist component of a 0/1 square
    // Nyquist content of the output via projection onto (-1)^i
    double proj = 0.0;
    for (int i = 0; i < n; ++i) proj += (out.values[i] - 0.5) * (i % 2 == 0 ? -1.0 : 1.0);
    CHECK(std::abs(proj) * 2.0 / n < (oracle * oracle + 0.05) * amplitude);

    // away from the boundary transients the output is flat at the mean
    for (int i = 12; i < n - 12; ++i)
        CHECK(std::abs(out.values[i] - 0.5) < 0.05 * amplitude);
}

TEST_CASE("lowpass: impulse response is symmetric (zero phase)") {
    const int n = 101, mid = 50;
    std::vector<double> impulse(n, 0.0);
    impulse[mid] = 1.0;
    DailySeries out = lowpass(make_series(impulse), 0.2);
    for (int k = 1; k <= mid; ++k)
        CHECK_THAT(out.values[mid - k], Catch::Matchers::WithinAbs(out.values[mid + k], 1e-9));
}

TEST_CASE("lowpass: length preserved, short series pass through, bad cutoff rejected") {
    for (int n : {7, 20, 101}) {
        DailySeries s = make_series(std::vector<double>(n, 1.0));
        CHECK(lowpass(s, 0.2).size() == n);
    }

    Warnings warnings;
    DailySeries tiny = make_series({1, 2, 3, 4, 5, 6});
    DailySeries out = lowpass(tiny, 0.2, &warnings);
    CHECK(out.values == tiny.values);
    CHECK(warnings.size() == 1);

    CHECK_THROWS_AS(lowpass(tiny, 0.0), ConfigError);
    CHECK_THROWS_AS(lowpass(tiny, 1.0), ConfigError);
    CHECK_THROWS_AS(lowpass(tiny, -3.0), ConfigError);
}

TEST_CASE("lowpass is linear") {
    Rng rng(99);
    std::vector<double> x(40), y(40);
    for (int i = 0; i < 40; ++i) {
        x[i] = rng.uniform01() * 100.0;
        y[i] = rng.uniform01() * 100.0;
    }
    const double a = 2.5, b = -1.25;
    std::vector<double> combo(40);
    for (int i = 0; i < 40; ++i) combo[i] = a * x[i] + b * y[i];

    DailySeries fx = lowpass(make_series(x), 0.2);
    DailySeries fy = lowpass(make_series(y), 0.2);
    DailySeries fc = lowpass(make_series(combo), 0.2);
    for (int i = 0; i < 40; ++i)
        CHECK_THAT(fc.values[i],
                   Catch::Matchers::WithinAbs(a * fx.values[i] + b * fy.values[i], 1e-9));
}

TEST_CASE("lowpass shift invariance away from boundaries") {
    // a compact bump shifted by k days shifts the response by k days
    const int n = 80, shift = 7;
    std::vector<double> x(n, 0.0), y(n, 0.0);
    for (int i = 0; i < 5; ++i) {
        x[30 + i] = 10.0 * (i + 1);
        y[30 + shift + i] = 10.0 * (i + 1);
    }
    DailySeries fx = lowpass(make_series(x), 0.2);
    DailySeries fy = lowpass(make_series(y), 0.2);
    for (int i = kFiltfiltPad; i + shift < n - kFiltfiltPad; ++i)
        CHECK_THAT(fy.values[i + shift], Catch::Matchers::WithinAbs(fx.values[i], 1e-6));
}

TEST_CASE("kinetics: constant, step, and ramp") {
    Kinetics flat = kinetics(make_series({10, 10, 10}));
    CHECK(flat.velocity.values == std::vector<double>{0, 0});
    CHECK(flat.acceleration.values == std::vector<double>{0});

    Kinetics step = kinetics(make_series({100, 374, 374}));
    CHECK(step.velocity.values == std::vector<double>{274, 0});
    CHECK(step.acceleration.values == std::vector<double>{-274});

    // planted ramp: slope everywhere, zero curvature
    const double slope = 13.5;
    std::vector<double> ramp(30);
    for (int i = 0; i < 30; ++i) ramp[i] = 7.0 + slope * i;
    Kinetics kin = kinetics(make_series(ramp));
    for (double v : kin.velocity.values) CHECK_THAT(v, Catch::Matchers::WithinAbs(slope, 1e-9));
    for (double a : kin.acceleration.values) CHECK_THAT(a, Catch::Matchers::WithinAbs(0.0, 1e-9));

    CHECK_THROWS_AS(kinetics(make_series({1, 2})), ConfigError);
}

TEST_CASE("kinetics date alignment") {
    Kinetics kin = kinetics(make_series({1, 2, 4, 8}));
    CHECK(kin.velocity.start == Date::parse("2020-01-02"));
    CHECK(kin.acceleration.start == Date::parse("2020-01-03"));
    CHECK(kin.velocity.at(Date::parse("2020-01-02")) == 1.0);
    CHECK(kin.acceleration.at(Date::parse("2020-01-03")) == 1.0);
    CHECK(kin.defined_at(Date::parse("2020-01-03")));
    CHECK_FALSE(kin.defined_at(Date::parse("2020-01-02")));  // no acceleration yet
}

TEST_CASE("kinetics linearity and telescoping") {
    Rng rng(5);
    std::vector<double> x(25), y(25);
    for (int i = 0; i < 25; ++i) {
        x[i] = rng.uniform01() * 1000.0;
        y[i] = rng.uniform01() * 1000.0;
    }
    const double a = 3.0, b = 0.5;
    std::vector<double> combo(25);
    for (int i = 0; i < 25; ++i) combo[i] = a * x[i] + b * y[i];

    Kinetics kx = kinetics(make_series(x));
    Kinetics ky = kinetics(make_series(y));
    Kinetics kc = kinetics(make_series(combo));
    for (std::size_t i = 0; i < kc.velocity.values.size(); ++i)
        CHECK_THAT(kc.velocity.values[i],
                   Catch::Matchers::WithinAbs(a * kx.velocity.values[i] + b * ky.velocity.values[i],
                                              1e-9));
    for (std::size_t i = 0; i < kc.acceleration.values.size(); ++i)
        CHECK_THAT(kc.acceleration.values[i],
                   Catch::Matchers::WithinAbs(
                       a * kx.acceleration.values[i] + b * ky.acceleration.values[i], 1e-9));

    double vel_sum = 0.0;
    for (double v : kx.velocity.values) vel_sum += v;
    CHECK_THAT(vel_sum, Catch::Matchers::WithinAbs(x.back() - x.front(), 1e-9));
}
