#include "classtalk/render.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "classtalk/errors.hpp"
#include "classtalk/text.hpp"

namespace classtalk {

using nlohmann::json;

RenderMode parse_render_mode(std::string_view s) {
  if (s == "print") return RenderMode::print;
  if (s == "report") return RenderMode::report;
  if (s == "plot_data" || s == "plot") return RenderMode::plot_data;
  throw ConfigError("unknown output mode '" + std::string(s) +
                    "' (expected print, report or plot_data)");
}

std::string format_cell(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  const double x = std::get<double>(cell);
  if (std::floor(x) == x && std::fabs(x) < 1e15) return fmt::format("{}", static_cast<long long>(x));
  return fmt::format("{:.4f}", x);
}

namespace {

std::size_t display_width(std::string_view s) {
  std::size_t n = 0;
  for (const auto& cp : text::decode(s)) {
    if (cp.value != U'\n') ++n;
  }
  return n;
}

std::string single_line(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

std::string table(const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = display_width(header[c]);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], display_width(r[c]));
    }
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) line += "  ";
      line += cells[c];
      if (c + 1 < cells.size()) line.append(width[c] - display_width(cells[c]), ' ');
    }
    out += line + "\n";
  };
  emit(header);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  emit(rule);
  for (const auto& r : rows) emit(r);
  return out;
}

std::string render_print(const AnalysisReport& report) {
  std::string out = report.title + "\n";
  if (report.kind == ReportKind::qualitative) {
    if (report.examples.empty()) return out + "(no examples)\n";
    for (std::size_t i = 0; i < report.examples.size(); ++i) {
      const auto& ex = report.examples[i];
      out += fmt::format("\n[{}] {} row {}\n", i + 1, ex.source_id, ex.row_index);
      for (const auto& c : ex.before) {
        out += fmt::format("    {:>4}  {}: {}\n", c.row_index, c.speaker, single_line(c.text));
      }
      out += fmt::format("  > {:>4}  {}: {}\n", ex.row_index, ex.speaker, single_line(ex.text));
      for (const auto& c : ex.after) {
        out += fmt::format("    {:>4}  {}: {}\n", c.row_index, c.speaker, single_line(c.text));
      }
    }
    return out;
  }
  std::vector<std::vector<std::string>> rows;
  rows.reserve(report.rows.size());
  for (const auto& r : report.rows) {
    std::vector<std::string> cells;
    for (const auto& c : r) cells.push_back(single_line(format_cell(c)));
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) return out + "(no data)\n";
  return out + table(report.columns, rows);
}

std::string join_pairs(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += (i + 1 == parts.size()) ? (parts.size() > 2 ? ", and " : " and ") : ", ";
    out += parts[i];
  }
  return out;
}

std::string value_text(double v, std::string_view representation) {
  if (representation == "percentage") return fmt::format("{:.2f}%", v);
  return format_cell(v);
}

std::string render_prose(const AnalysisReport& report) {
  switch (report.kind) {
    case ReportKind::qualitative: {
      std::string out = fmt::format("Found {} example(s) of {}.", report.examples.size(),
                                    report.feature);
      for (const auto& ex : report.examples) {
        out += fmt::format(" In {} (line {}), {} said: \"{}\".", ex.source_id, ex.row_index,
                           ex.speaker, single_line(ex.text));
      }
      return out + "\n";
    }
    case ReportKind::quantitative: {
      if (report.rows.empty()) return "No non-null values of " + report.feature + " were found.\n";
      const bool labels = report.columns.size() == 3;
      std::vector<std::string> parts;
      for (const auto& r : report.rows) {
        const double v = std::get<double>(r.back());
        const auto& group = std::get<std::string>(r[0]);
        parts.push_back(labels ? fmt::format("{} has label {} at {}", group,
                                             std::get<std::string>(r[1]),
                                             value_text(v, report.representation))
                               : fmt::format("{} accounts for {}", group,
                                             value_text(v, report.representation)));
      }
      return fmt::format("For {} ({}), {}.\n", report.feature, report.representation,
                         join_pairs(parts));
    }
    case ReportKind::lexical: {
      std::string out;
      if (report.representation == "log-odds") {
        std::vector<std::string> parts;
        for (const auto& r : report.rows) {
          parts.push_back(fmt::format("\"{}\" (z = {:.3f})", std::get<std::string>(r[0]),
                                      std::get<double>(r.back())));
        }
        if (parts.empty()) return "No n-grams were scored.\n";
        const auto a = report.groups.size() > 0 ? report.groups[0] : "group A";
        const auto b = report.groups.size() > 1 ? report.groups[1] : "group B";
        return fmt::format("The n-grams most characteristic of {} relative to {} are {}.\n", a,
                           b, join_pairs(parts));
      }
      for (const auto& s : report.series) {
        std::vector<std::string> parts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          parts.push_back(fmt::format("\"{}\" ({})", format_cell(s.x[i]), format_cell(s.y[i])));
        }
        out += parts.empty()
                   ? fmt::format("Group {} has no n-grams.\n", s.name)
                   : fmt::format("The most frequent n-grams for {} are {}.\n", s.name,
                                 join_pairs(parts));
      }
      return out.empty() ? "No n-grams were counted.\n" : out;
    }
    case ReportKind::temporal: {
      if (report.series.empty()) return "No values of " + report.feature + " to profile.\n";
      std::string out;
      for (const auto& s : report.series) {
        const auto peak = std::max_element(s.y.begin(), s.y.end());
        const auto peak_bin = static_cast<std::size_t>(peak - s.y.begin());
        out += fmt::format(
            "{} for {} starts at {} in bin 0, peaks at {} in bin {}, and ends at {} in bin {}.\n",
            report.feature, s.name, value_text(s.y.front(), report.representation),
            value_text(*peak, report.representation), peak_bin,
            value_text(s.y.back(), report.representation), s.y.size() - 1);
      }
      return out;
    }
  }
  return {};
}

json cell_json(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return std::get<double>(c);
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

constexpr std::string_view kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                         "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

}  // namespace

json plot_data(const AnalysisReport& report) {
  json series = json::array();
  for (const auto& s : report.series) {
    json x = json::array();
    for (const auto& c : s.x) x.push_back(cell_json(c));
    series.push_back({{"name", s.name}, {"x", std::move(x)}, {"y", s.y}});
  }
  return json{{"kind", std::string(to_string(report.kind))},
              {"title", report.title},
              {"x_label", report.x_label},
              {"y_label", report.y_label},
              {"series", std::move(series)}};
}

void validate_plot_data(const json& doc) {
  if (!doc.is_object()) throw ParseError("plot data must be a JSON object");
  for (const char* key : {"kind", "title", "x_label", "y_label"}) {
    if (!doc.contains(key) || !doc[key].is_string()) {
      throw ParseError(std::string("plot data field '") + key + "' must be a string");
    }
  }
  const auto kind = doc["kind"].get<std::string>();
  if (kind != "qualitative" && kind != "quantitative" && kind != "lexical" &&
      kind != "temporal") {
    throw ParseError("plot data kind '" + kind + "' is not recognized");
  }
  if (!doc.contains("series") || !doc["series"].is_array()) {
    throw ParseError("plot data field 'series' must be an array");
  }
  for (const auto& s : doc["series"]) {
    if (!s.is_object() || !s.contains("name") || !s["name"].is_string() || !s.contains("x") ||
        !s["x"].is_array() || !s.contains("y") || !s["y"].is_array()) {
      throw ParseError("each series needs string 'name' and array 'x' and 'y'");
    }
    if (s["x"].size() != s["y"].size()) {
      throw ParseError("series '" + s["name"].get<std::string>() + "' has x/y length mismatch");
    }
    for (const auto& y : s["y"]) {
      if (!y.is_number()) throw ParseError("series y values must be numbers");
    }
    for (const auto& x : s["x"]) {
      if (!x.is_number() && !x.is_string()) {
        throw ParseError("series x values must be numbers or strings");
      }
    }
  }
}

std::string render_svg(const AnalysisReport& report) {
  constexpr double width = 720, height = 420;
  constexpr double left = 60, right = 180, top = 40, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double lo = 0, hi = 0;
  std::vector<std::string> categories;
  for (const auto& s : report.series) {
    for (double y : s.y) {
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    for (const auto& x : s.x) {
      auto label = format_cell(x);
      if (std::find(categories.begin(), categories.end(), label) == categories.end()) {
        categories.push_back(label);
      }
    }
  }
  if (hi == lo) hi = lo + 1;
  auto ypos = [&](double y) { return top + plot_h * (1.0 - (y - lo) / (hi - lo)); };

  std::ostringstream out;
  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      width, height);
  out << fmt::format("<text x=\"{}\" y=\"20\" font-size=\"14\">{}</text>\n", left,
                     xml_escape(report.title));
  out << fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{3:.2f}\" x2=\"{4}\" y2=\"{3:.2f}\" stroke=\"black\"/>\n",
      left, top, top + plot_h, ypos(0), left + plot_w);
  out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                     left + plot_w / 2, height - 15, xml_escape(report.x_label));
  out << fmt::format(
      "<text x=\"15\" y=\"{0}\" transform=\"rotate(-90 15 {0})\" text-anchor=\"middle\">{1}"
      "</text>\n",
      top + plot_h / 2, xml_escape(report.y_label));
  out << fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", left - 4,
                     ypos(hi) + 4, format_cell(hi));
  out << fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", left - 4,
                     ypos(lo) + 4, format_cell(lo));

  const double n_cat = std::max<double>(1.0, static_cast<double>(categories.size()));
  const double slot = plot_w / n_cat;
  for (std::size_t c = 0; c < categories.size(); ++c) {
    out << fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                       left + slot * (static_cast<double>(c) + 0.5), top + plot_h + 15,
                       xml_escape(categories[c]));
  }
  const bool lines = report.kind == ReportKind::temporal;
  const double n_series = std::max<double>(1.0, static_cast<double>(report.series.size()));
  for (std::size_t si = 0; si < report.series.size(); ++si) {
    const auto& s = report.series[si];
    const auto color = kPalette[si % std::size(kPalette)];
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const auto label = format_cell(s.x[i]);
      const auto c = static_cast<double>(
          std::find(categories.begin(), categories.end(), label) - categories.begin());
      if (lines) {
        points += fmt::format("{:.2f},{:.2f} ", left + slot * (c + 0.5), ypos(s.y[i]));
      } else {
        const double bar_w = slot * 0.8 / n_series;
        const double x0 = left + slot * c + slot * 0.1 + bar_w * static_cast<double>(si);
        const double y0 = std::min(ypos(s.y[i]), ypos(0));
        const double h = std::fabs(ypos(s.y[i]) - ypos(0));
        out << fmt::format(
            "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
            x0, y0, bar_w, h, color);
      }
    }
    if (lines) {
      out << fmt::format(
          "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n", points,
          color);
    }
    out << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
                       left + plot_w + 15, top + 16.0 * static_cast<double>(si), color);
    out << fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", left + plot_w + 30,
                       top + 16.0 * static_cast<double>(si) + 9, xml_escape(s.name));
  }
  out << "</svg>\n";
  return out.str();
}

std::string render(const AnalysisReport& report, RenderMode mode) {
  switch (mode) {
    case RenderMode::print:
      return render_print(report);
    case RenderMode::report:
      return render_prose(report);
    case RenderMode::plot_data:
      return plot_data(report).dump(2) + "\n";
  }
  return {};
}

}  // namespace classtalk
