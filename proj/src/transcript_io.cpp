#include "classtalk/transcript_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "classtalk/csv.hpp"
#include "classtalk/errors.hpp"
#include "classtalk/feature_catalog.hpp"

namespace classtalk {

namespace {

using ordered_json = nlohmann::ordered_json;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Value>> rows;
};

std::size_t column_index(const Table& table, const std::string& name) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == name) return i;
  }
  throw SchemaError("missing column '" + name + "'", name);
}

std::string cell_text(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
  return {};
}

std::optional<double> cell_time(const Value& v, std::size_t row, const std::string& column) {
  if (is_null(v)) return std::nullopt;
  if (const auto* d = std::get_if<double>(&v)) return *d;
  const auto& s = std::get<std::string>(v);
  if (auto x = parse_number(s); x && std::isfinite(*x)) return x;
  throw RowError("row " + std::to_string(row) + ": cannot parse time value '" + s +
                     "' in column '" + column + "'",
                 row);
}

Transcript build(const Table& table, const ColumnMapping& mapping, std::string source_id) {
  mapping.validate();
  const std::size_t speaker_col = column_index(table, mapping.speaker_column);
  const std::size_t text_col = column_index(table, mapping.text_column);
  std::optional<std::size_t> start_col, end_col;
  if (mapping.start_time_column) start_col = column_index(table, *mapping.start_time_column);
  if (mapping.end_time_column) end_col = column_index(table, *mapping.end_time_column);

  std::vector<Utterance> utterances;
  utterances.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Utterance u;
    u.row_index = r;
    u.speaker = cell_text(row[speaker_col]);
    u.text = cell_text(row[text_col]);
    if (start_col) u.start_time = cell_time(row[*start_col], r, *mapping.start_time_column);
    if (end_col) u.end_time = cell_time(row[*end_col], r, *mapping.end_time_column);
    utterances.push_back(std::move(u));
  }

  std::vector<Column> columns;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const auto& name = table.header[c];
    if (mapping.is_mapped(name)) continue;
    Column column{name, ValueDomain::passthrough(), {}};
    column.values.reserve(table.rows.size());
    const auto domain = catalog::column_domain(name);
    if (domain) column.domain = *domain;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const Value& v = table.rows[r][c];
      if (!domain) {
        column.values.push_back(v);
        continue;
      }
      std::optional<double> x;
      try {
        x = as_number(v, name, r);
      } catch (const SchemaError& e) {
        throw RowError(e.what(), r);
      }
      column.values.push_back(x ? Value{*x} : Value{});
    }
    columns.push_back(std::move(column));
  }
  return Transcript(std::move(source_id), mapping, std::move(utterances), std::move(columns),
                    table.header);
}

Value json_cell(const ordered_json& v) {
  if (v.is_null()) return Value{};
  if (v.is_number()) return Value{v.get<double>()};
  if (v.is_string()) return Value{v.get<std::string>()};
  if (v.is_boolean()) return Value{std::string(v.get<bool>() ? "true" : "false")};
  return Value{v.dump()};
}

ordered_json json_number(double x) {
  if (std::isnan(x) || std::isinf(x)) return nullptr;
  if (std::floor(x) == x && std::fabs(x) < 9007199254740992.0) {
    return static_cast<std::int64_t>(x);
  }
  return x;
}

std::vector<std::string> csv_row(const Transcript& t, std::size_t r,
                                 const std::vector<std::string>& columns) {
  const auto& m = t.mapping();
  const auto& u = t[r];
  std::vector<std::string> fields;
  fields.reserve(columns.size());
  for (const auto& name : columns) {
    if (name == m.speaker_column) {
      fields.push_back(u.speaker);
    } else if (name == m.text_column) {
      fields.push_back(u.text);
    } else if (m.start_time_column && name == *m.start_time_column) {
      fields.push_back(u.start_time ? format_number(*u.start_time) : "");
    } else if (m.end_time_column && name == *m.end_time_column) {
      fields.push_back(u.end_time ? format_number(*u.end_time) : "");
    } else if (const auto* c = t.find_column(name)) {
      const Value& v = c->values[r];
      if (const auto* d = std::get_if<double>(&v)) {
        fields.push_back(std::isnan(*d) ? "" : format_number(*d));
      } else {
        fields.push_back(cell_text(v));
      }
    } else {
      fields.emplace_back();
    }
  }
  return fields;
}

ordered_json json_record(const Transcript& t, std::size_t r,
                         const std::vector<std::string>& columns) {
  const auto& m = t.mapping();
  const auto& u = t[r];
  ordered_json obj = ordered_json::object();
  auto time = [](const std::optional<double>& x) -> ordered_json {
    return x ? json_number(*x) : ordered_json(nullptr);
  };
  for (const auto& name : columns) {
    if (name == m.speaker_column) {
      obj[name] = u.speaker;
    } else if (name == m.text_column) {
      obj[name] = u.text;
    } else if (m.start_time_column && name == *m.start_time_column) {
      obj[name] = time(u.start_time);
    } else if (m.end_time_column && name == *m.end_time_column) {
      obj[name] = time(u.end_time);
    } else if (const auto* c = t.find_column(name)) {
      const Value& v = c->values[r];
      if (const auto* d = std::get_if<double>(&v)) {
        obj[name] = json_number(*d);
      } else if (const auto* s = std::get_if<std::string>(&v)) {
        obj[name] = *s;
      } else {
        obj[name] = nullptr;
      }
    } else {
      obj[name] = nullptr;
    }
  }
  return obj;
}

}  // namespace

std::string_view to_string(FileFormat f) { return f == FileFormat::csv ? "csv" : "json"; }

FileFormat parse_format(std::string_view name) {
  if (name == "csv") return FileFormat::csv;
  if (name == "json") return FileFormat::json;
  throw ConfigError("unknown format '" + std::string(name) + "' (expected csv or json)");
}

std::optional<FileFormat> format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (ext == ".csv") return FileFormat::csv;
  if (ext == ".json") return FileFormat::json;
  return std::nullopt;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'", path.string());
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing", path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'", path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'", path.string());
  }
}

Transcript parse_csv_transcript(std::string_view data, const ColumnMapping& mapping,
                                std::string source_id) {
  auto records = csv::parse(data);
  if (records.empty()) throw ParseError("CSV has no header row", 1);
  Table table;
  table.header = std::move(records.front().fields);
  for (std::size_t i = 1; i < records.size(); ++i) {
    auto& rec = records[i];
    if (rec.fields.size() != table.header.size()) {
      throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(rec.fields.size()),
                       rec.line);
    }
    std::vector<Value> row;
    row.reserve(rec.fields.size());
    for (auto& f : rec.fields) {
      row.push_back(f.empty() ? Value{} : Value{std::move(f)});
    }
    table.rows.push_back(std::move(row));
  }
  return build(table, mapping, std::move(source_id));
}

Transcript parse_json_transcript(std::string_view data, const ColumnMapping& mapping,
                                 std::string source_id) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(data);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("JSON transcript must be a top-level array");
  Table table;
  if (doc.empty()) {
    // An empty array carries no column names; assume the mapped ones.
    table.header = {mapping.speaker_column, mapping.text_column};
    if (mapping.start_time_column) table.header.push_back(*mapping.start_time_column);
    if (mapping.end_time_column) table.header.push_back(*mapping.end_time_column);
  }
  for (const auto& rec : doc) {
    if (!rec.is_object()) throw ParseError("JSON transcript records must be objects");
    for (const auto& [key, _] : rec.items()) {
      if (std::find(table.header.begin(), table.header.end(), key) == table.header.end()) {
        table.header.push_back(key);
      }
    }
  }
  for (const auto& rec : doc) {
    std::vector<Value> row;
    row.reserve(table.header.size());
    for (const auto& key : table.header) {
      auto it = rec.find(key);
      row.push_back(it == rec.end() ? Value{} : json_cell(*it));
    }
    table.rows.push_back(std::move(row));
  }
  return build(table, mapping, std::move(source_id));
}

Transcript load_transcript(const std::filesystem::path& path, FileFormat format,
                           const ColumnMapping& mapping) {
  const std::string data = read_file(path);
  auto source_id = path.stem().string();
  return format == FileFormat::csv ? parse_csv_transcript(data, mapping, std::move(source_id))
                                   : parse_json_transcript(data, mapping, std::move(source_id));
}

Transcript load_transcript(const std::filesystem::path& path, const ColumnMapping& mapping) {
  auto format = format_from_path(path);
  if (!format) {
    throw ConfigError("cannot infer format of '" + path.string() + "' (expected .csv or .json)");
  }
  return load_transcript(path, *format, mapping);
}

std::string serialize_transcript(const Transcript& t, FileFormat format) {
  const auto columns = t.output_columns();
  if (format == FileFormat::csv) {
    std::ostringstream out;
    csv::write_row(out, columns);
    for (std::size_t r = 0; r < t.size(); ++r) csv::write_row(out, csv_row(t, r, columns));
    return out.str();
  }
  ordered_json doc = ordered_json::array();
  for (std::size_t r = 0; r < t.size(); ++r) doc.push_back(json_record(t, r, columns));
  return doc.dump(2) + "\n";
}

void save_transcript(const Transcript& t, const std::filesystem::path& path, FileFormat format) {
  write_file_atomic(path, serialize_transcript(t, format));
}

}  // namespace classtalk
