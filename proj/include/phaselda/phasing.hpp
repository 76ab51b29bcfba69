#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "phaselda/signal.hpp"
#include "phaselda/util.hpp"

namespace phaselda {

// Kinetic thresholds learned from the anchor date (the externally supplied
// ground-truth date, e.g. a country's first confirmed case). The learning
// rule is a single step: round the anchor velocity down and add 1, round the
// anchor acceleration down. Negative accelerations floor toward -infinity.
struct Thresholds {
    std::int64_t velocity_threshold;
    std::int64_t acceleration_threshold;
    Date anchor;
};

inline Thresholds learn_thresholds(const Kinetics& kin, Date anchor) {
    if (!kin.defined_at(anchor))
        throw ConfigError("anchor date " + anchor.str() +
                          " has no defined velocity/acceleration (kinetics cover " +
                          kin.acceleration.start.str() + " to " +
                          kin.velocity.last_date().str() + ")");
    const double v = kin.velocity.at(anchor);
    const double a = kin.acceleration.at(anchor);
    return Thresholds{static_cast<std::int64_t>(std::floor(v)) + 1,
                      static_cast<std::int64_t>(std::floor(a)), anchor};
}

inline bool boundary_condition(const Kinetics& kin, const Thresholds& thr, Date d) {
    const double v = kin.velocity.at(d);
    const double a = kin.acceleration.at(d);
    return 0.0 < v && v < static_cast<double>(thr.velocity_threshold) &&
           a > static_cast<double>(thr.acceleration_threshold);
}

// The anchor date plus every later date whose kinetics satisfy
// 0 < velocity < velocity_threshold AND acceleration > acceleration_threshold.
// Runs of consecutive qualifying dates collapse to their first date.
inline std::vector<Date> detect_boundaries(const Kinetics& kin, const Thresholds& thr,
                                           Date anchor) {
    if (!kin.defined_at(anchor))
        throw ConfigError("anchor date " + anchor.str() + " outside kinetics range");

    std::vector<Date> boundaries{anchor};
    const Date last = kin.velocity.last_date();
    // a qualifying run that begins at the anchor collapses into the anchor
    // boundary; one that begins later opens a new boundary
    bool in_run = boundary_condition(kin, thr, anchor);
    for (Date d = anchor + 1; d <= last; ++d) {
        if (!kin.defined_at(d)) { in_run = false; continue; }
        if (boundary_condition(kin, thr, d)) {
            if (!in_run) boundaries.push_back(d);
            in_run = true;
        } else {
            in_run = false;
        }
    }
    return boundaries;
}

// Contiguous, non-overlapping, inclusive date interval.
struct Phase {
    int index;
    Date start;
    Date end;

    int days() const { return end - start + 1; }
};

struct PhaseSet {
    std::vector<Phase> phases;
    Thresholds thresholds;
    DateRange window;
};

// Partition the window at the boundary dates. Phase 0 covers the pre-anchor
// span when the anchor lies after the window start; otherwise numbering
// begins with the anchor phase.
inline PhaseSet build_phases(const std::vector<Date>& boundaries, DateRange window,
                             const Thresholds& thr) {
    if (boundaries.empty()) throw ConfigError("no boundaries (expected at least the anchor)");
    if (boundaries.front() != thr.anchor)
        throw ConfigError("first boundary must be the anchor date");
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        if (!window.contains(boundaries[i]))
            throw ConfigError("boundary " + boundaries[i].str() + " outside study window");
        if (i > 0 && !(boundaries[i - 1] < boundaries[i]))
            throw ConfigError("boundaries must be strictly increasing");
    }

    PhaseSet set{{}, thr, window};
    int index = 0;
    if (thr.anchor > window.start)
        set.phases.push_back({index++, window.start, thr.anchor - 1});
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        const Date end = i + 1 < boundaries.size() ? boundaries[i + 1] - 1 : window.end;
        set.phases.push_back({index++, boundaries[i], end});
    }
    return set;
}

}  // namespace phaselda
