#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace phaselda {

// Seeded generator with hand-rolled draws. mt19937_64 output is pinned by the
// standard; the std distributions are not, so we avoid them to keep results
// byte-identical across compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return (eng_() >> 11) * (1.0 / 9007199254740992.0); }

    // Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do { v = eng_(); } while (v >= limit);
        return v % n;
    }

    double gaussian(double mean = 0.0, double sd = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sd * spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        s = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * s;
        have_spare_ = true;
        return mean + sd * u * s;
    }

    // Draws an index proportionally to non-negative weights (sum must be > 0).
    int discrete(const std::vector<double>& weights) {
        return discrete(weights.data(), weights.size());
    }

    int discrete(const double* weights, std::size_t n) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += weights[i];
        double u = uniform01() * total;
        double cum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cum += weights[i];
            if (u < cum) return static_cast<int>(i);
        }
        return static_cast<int>(n - 1);  // guards against rounding at the top end
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace phaselda
