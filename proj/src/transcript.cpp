#include "classtalk/transcript.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <system_error>

#include "classtalk/errors.hpp"

namespace classtalk {

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double x = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return x;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::optional<double> as_number(const Value& v, std::string_view column, std::size_t row) {
  if (std::holds_alternative<std::monostate>(v)) return std::nullopt;
  if (const auto* d = std::get_if<double>(&v)) {
    if (std::isnan(*d)) return std::nullopt;
    return *d;
  }
  const auto& s = std::get<std::string>(v);
  if (s.empty() || s == "nan" || s == "NaN" || s == "NAN") return std::nullopt;
  if (auto x = parse_number(s)) return x;
  throw SchemaError("column '" + std::string(column) + "' row " + std::to_string(row) +
                        ": value '" + s + "' is not numeric",
                    std::string(column));
}

bool ValueDomain::contains_label(double x) const {
  if (kind != DomainKind::labels) return false;
  if (std::floor(x) != x) return false;
  return x >= 0 && x < label_count;
}

bool ColumnMapping::is_mapped(std::string_view name) const {
  return name == speaker_column || name == text_column ||
         (start_time_column && name == *start_time_column) ||
         (end_time_column && name == *end_time_column);
}

void ColumnMapping::validate() const {
  if (speaker_column.empty() || text_column.empty()) {
    throw ConfigError("speaker and text column names must be non-empty");
  }
  if (speaker_column == text_column) {
    throw ConfigError("speaker column and text column must differ (both '" + text_column + "')");
  }
  if (start_time_column.has_value() != end_time_column.has_value()) {
    throw ConfigError("start and end time columns must be configured together");
  }
  if (start_time_column && *start_time_column == *end_time_column) {
    throw ConfigError("start and end time columns must differ");
  }
}

Transcript::Transcript(std::string source_id, ColumnMapping mapping,
                       std::vector<Utterance> utterances, std::vector<Column> columns,
                       std::vector<std::string> source_columns)
    : source_id_(std::move(source_id)),
      mapping_(std::move(mapping)),
      utterances_(std::move(utterances)),
      columns_(std::move(columns)),
      source_columns_(std::move(source_columns)) {
  for (std::size_t i = 0; i < utterances_.size(); ++i) {
    const auto& u = utterances_[i];
    if (u.row_index != i) {
      throw PreconditionError("row_index " + std::to_string(u.row_index) + " at position " +
                              std::to_string(i) + " breaks contiguous ordering");
    }
    if (u.start_time && u.end_time && *u.end_time < *u.start_time) {
      throw RowError("row " + std::to_string(i) + ": end_time precedes start_time", i);
    }
  }
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (columns_[c].values.size() != utterances_.size()) {
      throw PreconditionError("column '" + columns_[c].name + "' has " +
                              std::to_string(columns_[c].values.size()) + " cells for " +
                              std::to_string(utterances_.size()) + " rows");
    }
    if (mapping_.is_mapped(columns_[c].name)) {
      throw PreconditionError("annotation column '" + columns_[c].name +
                              "' collides with a mapped column");
    }
    for (std::size_t d = 0; d < c; ++d) {
      if (columns_[d].name == columns_[c].name) {
        throw PreconditionError("duplicate column '" + columns_[c].name + "'");
      }
    }
  }
}

const Column* Transcript::find_column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const Column& Transcript::column(std::string_view name) const {
  if (const auto* c = find_column(name)) return *c;
  throw SchemaError("transcript '" + source_id_ + "' has no column '" + std::string(name) + "'",
                    std::string(name));
}

const Value& Transcript::annotation(std::size_t row, std::string_view name) const {
  return column(name).values.at(row);
}

std::vector<std::string> Transcript::output_columns() const {
  std::vector<std::string> out = source_columns_;
  auto add = [&out](const std::string& name) {
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  };
  add(mapping_.speaker_column);
  add(mapping_.text_column);
  if (mapping_.start_time_column) add(*mapping_.start_time_column);
  if (mapping_.end_time_column) add(*mapping_.end_time_column);
  for (const auto& c : columns_) add(c.name);
  return out;
}

Transcript Transcript::with_column(Column column) const {
  auto columns = columns_;
  auto it = std::find_if(columns.begin(), columns.end(),
                         [&](const Column& c) { return c.name == column.name; });
  if (it != columns.end()) {
    *it = std::move(column);
  } else {
    columns.push_back(std::move(column));
  }
  return Transcript(source_id_, mapping_, utterances_, std::move(columns), source_columns_);
}

Transcript Transcript::with_rows_reset(std::vector<Utterance> utterances) const {
  auto columns = columns_;
  for (auto& c : columns) c.values.assign(utterances.size(), Value{});
  return Transcript(source_id_, mapping_, std::move(utterances), std::move(columns),
                    source_columns_);
}

Transcript Transcript::with_utterances(std::vector<Utterance> utterances) const {
  return Transcript(source_id_, mapping_, std::move(utterances), columns_, source_columns_);
}

Transcript Transcript::with_source_id(std::string source_id) const {
  return Transcript(std::move(source_id), mapping_, utterances_, columns_, source_columns_);
}

namespace {

bool same_value(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    return (std::isnan(*x) && std::isnan(y)) || *x == y;
  }
  return a == b;
}

}  // namespace

bool same_content(const Transcript& a, const Transcript& b) {
  if (a.utterances() != b.utterances()) return false;
  if (a.columns().size() != b.columns().size()) return false;
  for (const auto& ca : a.columns()) {
    const auto* cb = b.find_column(ca.name);
    if (!cb) return false;
    for (std::size_t i = 0; i < ca.values.size(); ++i) {
      if (!same_value(ca.values[i], cb->values[i])) return false;
    }
  }
  return true;
}

}  // namespace classtalk
