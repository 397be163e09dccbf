#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace amdim::cli {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 24.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 56.0;

std::string short_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string coord(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string escape_xml(const std::string& s) {
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

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void CsvTable::row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw std::logic_error("CSV row width does not match header");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    const auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_cell(cells[i]);
        }
        out += '\n';
    };
    emit(header_);
    for (const auto& r : rows_) emit(r);
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw std::runtime_error("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label, std::pair<double, double> x_range,
                 std::pair<double, double> y_range)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)),
      xr_(x_range),
      yr_(y_range) {
    if (!(xr_.second > xr_.first)) xr_.second = xr_.first + 1.0;
    if (!(yr_.second > yr_.first)) yr_.second = yr_.first + 1.0;
}

double SvgPlot::px(double x) const {
    return kLeft + (x - xr_.first) / (xr_.second - xr_.first) * (kWidth - kLeft - kRight);
}

double SvgPlot::py(double y) const {
    return kHeight - kBottom - (y - yr_.first) / (yr_.second - yr_.first) * (kHeight - kTop - kBottom);
}

void SvgPlot::cell(double x0, double x1, double y0, double y1, const std::string& fill) {
    const double l = px(x0), r = px(x1), t = py(y1), b = py(y0);
    body_.push_back("<rect x=\"" + coord(l) + "\" y=\"" + coord(t) + "\" width=\"" + coord(r - l) +
                    "\" height=\"" + coord(b - t) + "\" fill=\"" + fill + "\"/>");
}

void SvgPlot::polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
    std::string p;
    for (const auto& [x, y] : pts) {
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        p += coord(px(x)) + "," + coord(py(y)) + " ";
    }
    body_.push_back("<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1.5\" points=\"" + p + "\"/>");
}

void SvgPlot::markers(const std::vector<std::pair<double, double>>& pts, const std::string& fill) {
    for (const auto& [x, y] : pts) {
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        body_.push_back("<circle cx=\"" + coord(px(x)) + "\" cy=\"" + coord(py(y)) + "\" r=\"2\" fill=\"" + fill +
                        "\"/>");
    }
}

void SvgPlot::error_bars(const std::vector<std::pair<double, double>>& pts, const std::vector<double>& half_width,
                         const std::string& stroke) {
    for (std::size_t i = 0; i < pts.size() && i < half_width.size(); ++i) {
        const auto [x, y] = pts[i];
        if (!std::isfinite(y) || !std::isfinite(half_width[i])) continue;
        body_.push_back("<line x1=\"" + coord(px(x)) + "\" x2=\"" + coord(px(x)) + "\" y1=\"" +
                        coord(py(y - half_width[i])) + "\" y2=\"" + coord(py(y + half_width[i])) + "\" stroke=\"" +
                        stroke + "\"/>");
    }
}

void SvgPlot::hline(double y, const std::string& stroke, const std::string& label) {
    body_.push_back("<line x1=\"" + coord(px(xr_.first)) + "\" x2=\"" + coord(px(xr_.second)) + "\" y1=\"" +
                    coord(py(y)) + "\" y2=\"" + coord(py(y)) + "\" stroke=\"" + stroke +
                    "\" stroke-dasharray=\"6 4\"/>");
    body_.push_back("<text x=\"" + coord(px(xr_.second) - 4) + "\" y=\"" + coord(py(y) - 4) +
                    "\" text-anchor=\"end\" font-size=\"11\" fill=\"" + stroke + "\">" + escape_xml(label) +
                    "</text>");
}

void SvgPlot::note(const std::string& text) { notes_.push_back(text); }

std::string SvgPlot::str() const {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title_)
      << "</text>\n";
    for (const auto& b : body_) s << b << '\n';

    const double x0 = px(xr_.first), x1 = px(xr_.second), y0 = py(yr_.first), y1 = py(yr_.second);
    s << "<rect x=\"" << coord(x0) << "\" y=\"" << coord(y1) << "\" width=\"" << coord(x1 - x0) << "\" height=\""
      << coord(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = xr_.first + (xr_.second - xr_.first) * i / 5.0;
        const double fy = yr_.first + (yr_.second - yr_.first) * i / 5.0;
        s << "<line x1=\"" << coord(px(fx)) << "\" x2=\"" << coord(px(fx)) << "\" y1=\"" << coord(y0) << "\" y2=\""
          << coord(y0 + 5) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << coord(px(fx)) << "\" y=\"" << coord(y0 + 18)
          << "\" text-anchor=\"middle\" font-size=\"11\">" << short_num(fx) << "</text>\n";
        s << "<line x1=\"" << coord(x0 - 5) << "\" x2=\"" << coord(x0) << "\" y1=\"" << coord(py(fy)) << "\" y2=\""
          << coord(py(fy)) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << coord(x0 - 8) << "\" y=\"" << coord(py(fy) + 4)
          << "\" text-anchor=\"end\" font-size=\"11\">" << short_num(fy) << "</text>\n";
    }
    s << "<text x=\"" << coord((x0 + x1) / 2) << "\" y=\"" << coord(kHeight - 14)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape_xml(x_label_) << "</text>\n";
    s << "<text transform=\"translate(18," << coord((y0 + y1) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">" << escape_xml(y_label_) << "</text>\n";
    double ny = kTop + 14;
    for (const auto& n : notes_) {
        s << "<text x=\"" << coord(x0 + 8) << "\" y=\"" << coord(ny) << "\" font-size=\"11\">" << escape_xml(n)
          << "</text>\n";
        ny += 14;
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace amdim::cli
