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

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hyperadapt::pipeline {

// Minimal SVG document builder. Coordinates are in pixels, y down.
class SvgCanvas {
public:
    SvgCanvas(double width, double height, std::string_view config_hash);

    void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0);
    void polyline(const std::vector<std::pair<double, double>>& points, std::string_view stroke, double width = 1.5);
    void circle(double cx, double cy, double r, std::string_view fill);
    void rect(double x, double y, double w, double h, std::string_view fill);
    // anchor: "start", "middle" or "end".
    void text(double x, double y, std::string_view content, double size = 12.0, std::string_view anchor = "start");

    [[nodiscard]] std::string str() const;

private:
    double width_;
    double height_;
    std::string hash_;
    std::string body_;
};

std::string xml_escape(std::string_view s);

struct Series {
    std::string label;
    std::string colour;
    std::vector<std::pair<double, double>> points;
};

// Axes-frame plot of one or more line series; y on a log10 axis if `log_y`.
std::string line_plot(std::string_view title, std::string_view x_label, std::string_view y_label,
                      const std::vector<Series>& series, bool log_y, std::string_view config_hash);

struct ErrorBar {
    std::string group;  // robot
    std::string series; // method
    double mean = 0.0;
    double half_width = 0.0; // 0 when absent
};

// Mean +- half-width per group, one colour per series.
std::string error_bar_plot(std::string_view title, std::string_view y_label, const std::vector<ErrorBar>& bars,
                           std::string_view config_hash);

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    std::string label;
    bool highlight = false;
};

// 2D scatter coloured by label; highlighted points are drawn in red.
std::string scatter_plot(std::string_view title, const std::vector<ScatterPoint>& points,
                         std::string_view config_hash);

} // namespace hyperadapt::pipeline
