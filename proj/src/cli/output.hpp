#pragma once

// CSV, JSON and SVG writers shared by the subcommands. Nothing here depends on
// wall-clock time or thread scheduling, so reruns are byte-identical.

#include <json.hpp>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace amdim::cli {

using Json = nlohmann::ordered_json;

/// Round-trip exact decimal (17 significant digits); "nan"/"inf" as printf gives them.
std::string fmt17(double x);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    /// Cells are already formatted; use fmt17 for floats.
    void row(std::vector<std::string> cells);
    std::size_t rows() const noexcept { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& doc);

/// Minimal self-contained SVG chart with linear axes.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label,
            std::pair<double, double> x_range, std::pair<double, double> y_range);

    void cell(double x0, double x1, double y0, double y1, const std::string& fill);
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke);
    void markers(const std::vector<std::pair<double, double>>& pts, const std::string& fill);
    void error_bars(const std::vector<std::pair<double, double>>& pts, const std::vector<double>& half_width,
                    const std::string& stroke);
    void hline(double y, const std::string& stroke, const std::string& label);
    void note(const std::string& text);

    std::string str() const;

private:
    double px(double x) const;
    double py(double y) const;

    std::string title_;
    std::string x_label_;
    std::string y_label_;
    std::pair<double, double> xr_;
    std::pair<double, double> yr_;
    std::vector<std::string> body_;
    std::vector<std::string> notes_;
};

}  // namespace amdim::cli
