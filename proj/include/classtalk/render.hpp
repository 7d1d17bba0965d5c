#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "classtalk/analyzers.hpp"

namespace classtalk {

enum class RenderMode { print, report, plot_data };

RenderMode parse_render_mode(std::string_view s);

// print: column-aligned UTF-8 table. report: prose paragraph(s).
// plot_data: the JSON document from plot_data(), pretty-printed.
std::string render(const AnalysisReport& report, RenderMode mode);

// {"kind", "title", "x_label", "y_label", "series": [{"name", "x", "y"}]}
nlohmann::json plot_data(const AnalysisReport& report);

// Throws ParseError describing the first schema violation.
void validate_plot_data(const nlohmann::json& doc);

// Static SVG chart of the report's series (lines for temporal reports, bars
// otherwise).
std::string render_svg(const AnalysisReport& report);

// Compact cell formatting used by tables and prose.
std::string format_cell(const Cell& cell);

}  // namespace classtalk
