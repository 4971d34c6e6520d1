#include "aoi/svg.hpp"

#include "aoi/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace aoi {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v)
    {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }

    void finish()
    {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        } else if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

// Roughly five ticks at 1, 2 or 5 times a power of ten.
std::vector<double> nice_ticks(const Range& r)
{
    const double raw = (r.hi - r.lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) {
            break;
        }
    }
    std::vector<double> out;
    for (double t = std::ceil(r.lo / step - 1e-9) * step; t <= r.hi + step * 1e-9; t += step) {
        out.push_back(t);
    }
    return out;
}

} // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label))
{
}

void SvgPlot::add_series(std::string name, std::vector<std::pair<double, double>> points, bool step)
{
    series_.push_back({std::move(name), std::move(points), step});
}

void SvgPlot::set_heat(std::vector<double> xs, std::vector<double> ys, std::vector<std::vector<int>> cells,
                       std::vector<std::string> categories)
{
    if (cells.size() != ys.size()) {
        throw ParameterError("heat grid row count does not match y values");
    }
    for (const auto& row : cells) {
        if (row.size() != xs.size()) {
            throw ParameterError("heat grid column count does not match x values");
        }
    }
    heat_x_ = std::move(xs);
    heat_y_ = std::move(ys);
    heat_cells_ = std::move(cells);
    categories_ = std::move(categories);
}

void SvgPlot::write(std::ostream& out) const
{
    Range xr;
    Range yr;
    for (const auto& s : series_) {
        for (const auto& [x, y] : s.points) {
            xr.add(x);
            yr.add(y);
        }
    }
    // Heat cells extend half a grid step around each coordinate.
    auto half_step = [](const std::vector<double>& v, std::size_t i) {
        if (v.size() < 2) {
            return 0.5;
        }
        const std::size_t j = i + 1 < v.size() ? i + 1 : i - 1;
        return std::abs(v[j] - v[i]) / 2.0;
    };
    for (std::size_t i = 0; i < heat_x_.size(); ++i) {
        xr.add(heat_x_[i] - half_step(heat_x_, i));
        xr.add(heat_x_[i] + half_step(heat_x_, i));
    }
    for (std::size_t i = 0; i < heat_y_.size(); ++i) {
        yr.add(heat_y_[i] - half_step(heat_y_, i));
        yr.add(heat_y_[i] + half_step(heat_y_, i));
    }
    xr.finish();
    yr.finish();

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << escape(title_) << "</text>\n";

    for (std::size_t r = 0; r < heat_cells_.size(); ++r) {
        const double hy = half_step(heat_y_, r);
        for (std::size_t c = 0; c < heat_cells_[r].size(); ++c) {
            const int v = heat_cells_[r][c];
            if (v < 0) {
                continue;
            }
            const double hx = half_step(heat_x_, c);
            const double x0 = px(heat_x_[c] - hx);
            const double y0 = py(heat_y_[r] + hy);
            out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\""
                << num(px(heat_x_[c] + hx) - x0) << "\" height=\"" << num(py(heat_y_[r] - hy) - y0)
                << "\" fill=\"" << kPalette[static_cast<std::size_t>(v) % kPalette.size()] << "\"/>\n";
        }
    }

    out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
        << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : nice_ticks(xr)) {
        out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px(t))
            << "\" y2=\"" << num(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\">"
            << tick_label(t) << "</text>\n";
    }
    for (double t : nice_ticks(yr)) {
        out << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(kLeft)
            << "\" y2=\"" << num(py(t)) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
            << tick_label(t) << "</text>\n";
    }
    out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">"
        << escape(x_label_) << "</text>\n";
    out << "<text x=\"18\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << num(kTop + ph / 2) << ")\">" << escape(y_label_) << "</text>\n";

    double legend_y = kTop + 10;
    const double legend_x = kLeft + pw + 12;
    for (std::size_t i = 0; i < series_.size(); ++i) {
        const auto& s = series_[i];
        const char* color = kPalette[i % kPalette.size()];
        std::string path;
        bool pen_down = false;
        double last_y = 0.0;
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(y)) {
                pen_down = false;
                continue;
            }
            if (!pen_down) {
                path += "M" + num(px(x)) + "," + num(py(y));
                pen_down = true;
            } else {
                if (s.step) {
                    path += " L" + num(px(x)) + "," + num(py(last_y));
                }
                path += " L" + num(px(x)) + "," + num(py(y));
            }
            last_y = y;
        }
        out << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\"/>\n";
        out << "<line x1=\"" << num(legend_x) << "\" y1=\"" << num(legend_y) << "\" x2=\"" << num(legend_x + 18)
            << "\" y2=\"" << num(legend_y) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << num(legend_x + 24) << "\" y=\"" << num(legend_y + 4) << "\">" << escape(s.name)
            << "</text>\n";
        legend_y += 18;
    }
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        out << "<rect x=\"" << num(legend_x) << "\" y=\"" << num(legend_y - 6) << "\" width=\"12\" height=\"12\" fill=\""
            << kPalette[i % kPalette.size()] << "\"/>\n";
        out << "<text x=\"" << num(legend_x + 18) << "\" y=\"" << num(legend_y + 4) << "\">" << escape(categories_[i])
            << "</text>\n";
        legend_y += 18;
    }
    out << "</svg>\n";
}

} // namespace aoi
