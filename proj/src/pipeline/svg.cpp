// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#include "pipeline/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace hyperadapt::pipeline {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#17becf"};
constexpr const char* kHighlight = "#d62728";

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Maps a data range onto [lo_px, hi_px], padding degenerate ranges.
struct Axis {
    double lo;
    double hi;
    double lo_px;
    double hi_px;

    Axis(double data_lo, double data_hi, double px0, double px1) : lo(data_lo), hi(data_hi), lo_px(px0), hi_px(px1)
    {
        if (!(hi > lo)) {
            const double pad = std::max(1.0, std::abs(lo) * 0.1);
            lo -= pad;
            hi += pad;
        }
    }

    [[nodiscard]] double operator()(double v) const { return lo_px + (v - lo) / (hi - lo) * (hi_px - lo_px); }
};

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 560.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 360.0;

void frame(SvgCanvas& svg, std::string_view title, std::string_view x_label, std::string_view y_label)
{
    svg.rect(0, 0, kWidth, kHeight, "#ffffff");
    svg.text(kWidth / 2, 22, title, 15, "middle");
    svg.line(kLeft, kBottom, kRight, kBottom, "#000000");
    svg.line(kLeft, kTop, kLeft, kBottom, "#000000");
    svg.text((kLeft + kRight) / 2, kBottom + 38, x_label, 12, "middle");
    svg.text(14, (kTop + kBottom) / 2, y_label, 12, "start");
}

void y_ticks(SvgCanvas& svg, const Axis& y, bool log_y)
{
    for (int i = 0; i <= 4; ++i) {
        const double v = y.lo + (y.hi - y.lo) * i / 4.0;
        const double py = y(v);
        svg.line(kLeft - 4, py, kLeft, py, "#000000");
        svg.text(kLeft - 6, py + 4, tick(log_y ? std::pow(10.0, v) : v), 10, "end");
    }
}

void legend(SvgCanvas& svg, const std::vector<std::pair<std::string, std::string>>& entries)
{
    double y = kTop + 10;
    for (const auto& [label, colour] : entries) {
        svg.rect(kRight + 20, y - 9, 12, 12, colour);
        svg.text(kRight + 38, y + 1, label, 12);
        y += 20;
    }
}

} // namespace

std::string xml_escape(std::string_view s)
{
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

SvgCanvas::SvgCanvas(double width, double height, std::string_view config_hash)
    : width_(width), height_(height), hash_(config_hash)
{}

void SvgCanvas::line(double x1, double y1, double x2, double y2, std::string_view stroke, double width)
{
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2)
             + "\" stroke=\"" + xml_escape(stroke) + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& points, std::string_view stroke, double width)
{
    body_ += "<polyline fill=\"none\" stroke=\"" + xml_escape(stroke) + "\" stroke-width=\"" + num(width)
             + "\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
        body_ += (i == 0 ? "" : " ") + num(points[i].first) + "," + num(points[i].second);
    }
    body_ += "\"/>\n";
}

void SvgCanvas::circle(double cx, double cy, double r, std::string_view fill)
{
    body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" + xml_escape(fill)
             + "\"/>\n";
}

void SvgCanvas::rect(double x, double y, double w, double h, std::string_view fill)
{
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h)
             + "\" fill=\"" + xml_escape(fill) + "\"/>\n";
}

void SvgCanvas::text(double x, double y, std::string_view content, double size, std::string_view anchor)
{
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" + num(size)
             + "\" text-anchor=\"" + xml_escape(anchor) + "\">" + xml_escape(content) + "</text>\n";
}

std::string SvgCanvas::str() const
{
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- config_hash=" + xml_escape(hash_)
           + " -->\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" + num(height_)
           + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n<metadata>config_hash="
           + xml_escape(hash_) + "</metadata>\n" + body_ + "</svg>\n";
}

std::string line_plot(std::string_view title, std::string_view x_label, std::string_view y_label,
                      const std::vector<Series>& series, bool log_y, std::string_view config_hash)
{
    SvgCanvas svg(kWidth, kHeight, config_hash);
    frame(svg, title, x_label, log_y ? std::string(y_label) + " (log)" : std::string(y_label));
    double x_lo = std::numeric_limits<double>::infinity();
    double x_hi = -x_lo;
    double y_lo = x_lo;
    double y_hi = -x_lo;
    const auto ty = [&](double v) { return log_y ? std::log10(std::max(v, 1e-12)) : v; };
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(y)) {
                continue;
            }
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, ty(y));
            y_hi = std::max(y_hi, ty(y));
        }
    }
    if (!std::isfinite(x_lo)) {
        x_lo = x_hi = y_lo = y_hi = 0.0;
    }
    const Axis xa(x_lo, x_hi, kLeft, kRight);
    const Axis ya(y_lo, y_hi, kBottom, kTop);
    y_ticks(svg, ya, log_y);
    svg.text(kLeft, kBottom + 16, tick(xa.lo), 10, "middle");
    svg.text(kRight, kBottom + 16, tick(xa.hi), 10, "middle");
    std::vector<std::pair<std::string, std::string>> entries;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::string colour = series[i].colour.empty() ? kPalette[i % std::size(kPalette)] : series[i].colour;
        std::vector<std::pair<double, double>> px;
        for (const auto& [x, y] : series[i].points) {
            if (std::isfinite(y)) {
                px.emplace_back(xa(x), ya(ty(y)));
            }
        }
        svg.polyline(px, colour);
        entries.emplace_back(series[i].label, colour);
    }
    legend(svg, entries);
    return svg.str();
}

std::string error_bar_plot(std::string_view title, std::string_view y_label, const std::vector<ErrorBar>& bars,
                           std::string_view config_hash)
{
    SvgCanvas svg(kWidth, kHeight, config_hash);
    frame(svg, title, "robot", y_label);
    std::vector<std::string> groups;
    std::vector<std::string> names;
    double y_hi = 0.0;
    for (const auto& b : bars) {
        if (std::find(groups.begin(), groups.end(), b.group) == groups.end()) {
            groups.push_back(b.group);
        }
        if (std::find(names.begin(), names.end(), b.series) == names.end()) {
            names.push_back(b.series);
        }
        y_hi = std::max(y_hi, b.mean + b.half_width);
    }
    const Axis ya(0.0, y_hi * 1.05, kBottom, kTop);
    y_ticks(svg, ya, false);
    const double slot = (kRight - kLeft) / static_cast<double>(std::max<std::size_t>(groups.size(), 1));
    for (std::size_t g = 0; g < groups.size(); ++g) {
        svg.text(kLeft + slot * (static_cast<double>(g) + 0.5), kBottom + 16, groups[g], 10, "middle");
    }
    for (const auto& b : bars) {
        const auto g = static_cast<double>(std::find(groups.begin(), groups.end(), b.group) - groups.begin());
        const auto s = static_cast<std::size_t>(std::find(names.begin(), names.end(), b.series) - names.begin());
        const double x = kLeft + slot * g + slot * (static_cast<double>(s) + 1.0) / (static_cast<double>(names.size()) + 1.0);
        const char* colour = kPalette[s % std::size(kPalette)];
        if (b.half_width > 0.0) {
            svg.line(x, ya(std::max(0.0, b.mean - b.half_width)), x, ya(b.mean + b.half_width), colour, 1.5);
            svg.line(x - 3, ya(b.mean + b.half_width), x + 3, ya(b.mean + b.half_width), colour, 1.5);
            svg.line(x - 3, ya(std::max(0.0, b.mean - b.half_width)), x + 3, ya(std::max(0.0, b.mean - b.half_width)),
                     colour, 1.5);
        }
        svg.circle(x, ya(b.mean), 3.5, colour);
    }
    std::vector<std::pair<std::string, std::string>> entries;
    for (std::size_t s = 0; s < names.size(); ++s) {
        entries.emplace_back(names[s], kPalette[s % std::size(kPalette)]);
    }
    legend(svg, entries);
    return svg.str();
}

std::string scatter_plot(std::string_view title, const std::vector<ScatterPoint>& points, std::string_view config_hash)
{
    SvgCanvas svg(kWidth, kHeight, config_hash);
    frame(svg, title, "z_x", "z_y");
    double x_lo = std::numeric_limits<double>::infinity();
    double x_hi = -x_lo;
    double y_lo = x_lo;
    double y_hi = -x_lo;
    std::vector<std::string> labels;
    for (const auto& p : points) {
        x_lo = std::min(x_lo, p.x);
        x_hi = std::max(x_hi, p.x);
        y_lo = std::min(y_lo, p.y);
        y_hi = std::max(y_hi, p.y);
        if (!p.highlight && std::find(labels.begin(), labels.end(), p.label) == labels.end()) {
            labels.push_back(p.label);
        }
    }
    if (points.empty()) {
        x_lo = x_hi = y_lo = y_hi = 0.0;
    }
    const Axis xa(x_lo, x_hi, kLeft + 10, kRight - 10);
    const Axis ya(y_lo, y_hi, kBottom - 10, kTop + 10);
    y_ticks(svg, ya, false);
    svg.text(kLeft + 10, kBottom + 16, tick(xa.lo), 10, "middle");
    svg.text(kRight - 10, kBottom + 16, tick(xa.hi), 10, "middle");
    bool any_highlight = false;
    for (const auto& p : points) {
        if (p.highlight) {
            any_highlight = true;
            svg.circle(xa(p.x), ya(p.y), 4.5, kHighlight);
        } else {
            const auto i = static_cast<std::size_t>(std::find(labels.begin(), labels.end(), p.label) - labels.begin());
            svg.circle(xa(p.x), ya(p.y), 3.0, kPalette[i % std::size(kPalette)]);
        }
    }
    std::vector<std::pair<std::string, std::string>> entries;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        entries.emplace_back(labels[i], kPalette[i % std::size(kPalette)]);
    }
    if (any_highlight) {
        entries.emplace_back("held out", kHighlight);
    }
    legend(svg, entries);
    return svg.str();
}

} // namespace hyperadapt::pipeline
