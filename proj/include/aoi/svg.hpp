#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace aoi {

/// Minimal self-contained SVG chart: line/step series or a categorical heat grid.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label);

    void add_series(std::string name, std::vector<std::pair<double, double>> points, bool step = false);

    /// cells[row][col] indexes `categories`; -1 leaves the cell blank.
    /// Row r is drawn at ys[r] and column c at xs[c].
    void set_heat(std::vector<double> xs, std::vector<double> ys, std::vector<std::vector<int>> cells,
                  std::vector<std::string> categories);

    void write(std::ostream& out) const;

private:
    struct Series {
        std::string name;
        std::vector<std::pair<double, double>> points;
        bool step;
    };

    std::string title_;
    std::string x_label_;
    std::string y_label_;
    std::vector<Series> series_;
    std::vector<double> heat_x_;
    std::vector<double> heat_y_;
    std::vector<std::vector<int>> heat_cells_;
    std::vector<std::string> categories_;
};

} // namespace aoi
