#pragma once

#include <vector>

#include "phaselda/date.hpp"
#include "phaselda/util.hpp"

namespace phaselda {

// Gap-free per-day real values: values[i] belongs to start + i days.
struct DailySeries {
    Date start;
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
    Date date_at(int i) const { return start + i; }
    Date last_date() const { return start + (size() - 1); }

    bool covers(Date d) const { return d >= start && d <= last_date(); }

    double at(Date d) const {
        if (!covers(d)) throw std::out_of_range("date outside series: " + d.str());
        return values[d - start];
    }
};

}  // namespace phaselda
