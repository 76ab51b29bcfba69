#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "phaselda/date.hpp"
#include "phaselda/series.hpp"
#include "phaselda/util.hpp"

namespace phaselda {
namespace svg {

// Deterministic line-chart writer. No timestamps or other run-varying
// metadata go into the file; the config hash is embedded as an XML comment.
class LineChart {
public:
    LineChart(std::string title, int width = 960, int height = 420)
        : title_(std::move(title)), width_(width), height_(height) {}

    void add_series(const std::string& name, const DailySeries& series) {
        series_.push_back({name, series});
    }

    void add_vline(Date d, const std::string& label = "") { vlines_.push_back({d, label}); }

    void write(const std::string& path, const std::string& config_hash) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw ConfigError("cannot write chart: " + path);
        os << render(config_hash);
    }

    std::string render(const std::string& config_hash) const {
        Date x_min, x_max;
        double y_min = 0.0, y_max = 1.0;
        bool first = true;
        for (const auto& s : series_) {
            if (s.data.values.empty()) continue;
            if (first) {
                x_min = s.data.start;
                x_max = s.data.last_date();
                y_min = y_max = s.data.values[0];
                first = false;
            } else {
                x_min = std::min(x_min, s.data.start);
                x_max = std::max(x_max, s.data.last_date());
            }
            for (double v : s.data.values) {
                y_min = std::min(y_min, v);
                y_max = std::max(y_max, v);
            }
        }
        if (first) { x_min = Date(0); x_max = Date(1); }
        if (y_max == y_min) y_max = y_min + 1.0;
        y_min = std::min(y_min, 0.0);

        const double pl = 70, pr = 160, pt = 40, pb = 50;
        const double pw = width_ - pl - pr, ph = height_ - pt - pb;
        const int days = std::max(1, x_max - x_min);
        auto x_of = [&](Date d) { return pl + pw * (d - x_min) / static_cast<double>(days); };
        auto y_of = [&](double v) { return pt + ph * (1.0 - (v - y_min) / (y_max - y_min)); };

        std::string out;
        out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out += "<!-- config_hash=" + config_hash + " -->\n";
        out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width_) +
               "\" height=\"" + std::to_string(height_) + "\" viewBox=\"0 0 " +
               std::to_string(width_) + " " + std::to_string(height_) + "\">\n";
        out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out += "<text x=\"" + fmt(width_ / 2.0) +
               "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
               escape(title_) + "</text>\n";

        // axes
        out += line(pl, pt, pl, pt + ph, "#444", 1.0, false);
        out += line(pl, pt + ph, pl + pw, pt + ph, "#444", 1.0, false);
        for (int i = 0; i <= 4; ++i) {  // y ticks
            const double v = y_min + (y_max - y_min) * i / 4.0;
            const double y = y_of(v);
            out += line(pl - 4, y, pl, y, "#444", 1.0, false);
            out += "<text x=\"" + fmt(pl - 8) + "\" y=\"" + fmt(y + 4) +
                   "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
                   fmt_tick(v) + "</text>\n";
        }
        const int tick_step = std::max(1, days / 6);
        for (int i = 0; i <= days; i += tick_step) {  // x ticks
            const Date d = x_min + i;
            const double x = x_of(d);
            out += line(x, pt + ph, x, pt + ph + 4, "#444", 1.0, false);
            out += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(pt + ph + 18) +
                   "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
                   d.str() + "</text>\n";
        }

        for (const auto& [date, label] : vlines_) {
            const double x = x_of(date);
            out += line(x, pt, x, pt + ph, "#888", 1.0, true);
            if (!label.empty())
                out += "<text x=\"" + fmt(x + 3) + "\" y=\"" + fmt(pt + 12) +
                       "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#555\">" +
                       escape(label) + "</text>\n";
        }

        for (std::size_t s = 0; s < series_.size(); ++s) {
            const auto& data = series_[s].data;
            if (data.values.empty()) continue;
            std::string pts;
            for (int i = 0; i < data.size(); ++i) {
                if (i) pts += ' ';
                pts += fmt(x_of(data.date_at(i))) + "," + fmt(y_of(data.values[i]));
            }
            out += "<polyline fill=\"none\" stroke=\"" + color(s) +
                   "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
            const double ly = pt + 14.0 * (s + 1);
            out += line(pl + pw + 10, ly - 4, pl + pw + 28, ly - 4, color(s), 2.0, false);
            out += "<text x=\"" + fmt(pl + pw + 33) + "\" y=\"" + fmt(ly) +
                   "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(series_[s].name) +
                   "</text>\n";
        }
        out += "</svg>\n";
        return out;
    }

private:
    struct Series {
        std::string name;
        DailySeries data;
    };

    std::string title_;
    int width_, height_;
    std::vector<Series> series_;
    std::vector<std::pair<Date, std::string>> vlines_;

    static std::string fmt(double v) {
        // two decimals is plenty for pixel coordinates and keeps files stable
        const double r = std::round(v * 100.0) / 100.0;
        std::string s = format_double(r == 0.0 ? 0.0 : r);  // avoid "-0"
        return s;
    }

    static std::string fmt_tick(double v) {
        const double r = std::round(v * 100.0) / 100.0;
        return format_double(r == 0.0 ? 0.0 : r);
    }

    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '&') out += "&amp;";
            else if (c == '<') out += "&lt;";
            else if (c == '>') out += "&gt;";
            else out += c;
        }
        return out;
    }

    static std::string line(double x1, double y1, double x2, double y2, const std::string& color,
                            double width, bool dashed) {
        std::string out = "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) +
                          "\" y2=\"" + fmt(y2) + "\" stroke=\"" + color + "\" stroke-width=\"" +
                          fmt(width) + "\"";
        if (dashed) out += " stroke-dasharray=\"5,4\"";
        out += "/>\n";
        return out;
    }

    static std::string color(std::size_t i) {
        static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                        "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
        return palette[i % 10];
    }
};

}  // namespace svg
}  // namespace phaselda
