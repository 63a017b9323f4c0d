#pragma once

#include "binfilt/partition.hpp"

#include <string>
#include <vector>

namespace binfilt {

std::string fmt_double(double v);  // shortest round-trip representation

std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

void save_filtration(const std::string& path, const Filtration& f);
Filtration load_filtration(const std::string& path);

std::uint64_t json_hash(const nlohmann::json& j);

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/// Minimal self-contained SVG line chart (no display dependencies).
std::string svg_line_chart(const std::string& title, const std::vector<PlotSeries>& series,
                           bool logx = false, bool logy = false);

}  // namespace binfilt
