#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace classtalk {

// Annotation cell: null, a number (labels are integral numbers), or
// pass-through text carried verbatim from the source file.
using Value = std::variant<std::monostate, double, std::string>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

// Numeric view of a cell. Text cells are parsed ("nan"/"NaN" and empty text
// read as null); throws SchemaError naming the column when text is not
// numeric.
std::optional<double> as_number(const Value& v, std::string_view column, std::size_t row);

// Shortest decimal text that round-trips to the same double.
std::string format_number(double x);

// Parses a complete decimal number; nullopt when `s` is not one.
std::optional<double> parse_number(std::string_view s);

enum class DomainKind { numeric, labels, passthrough };

struct ValueDomain {
  DomainKind kind = DomainKind::passthrough;
  int label_count = 0;

  static ValueDomain numeric() { return {DomainKind::numeric, 0}; }
  static ValueDomain labels(int n) { return {DomainKind::labels, n}; }
  static ValueDomain passthrough() { return {DomainKind::passthrough, 0}; }

  bool contains_label(double x) const;
  bool operator==(const ValueDomain&) const = default;
};

struct ColumnMapping {
  std::string speaker_column = "speaker";
  std::string text_column = "text";
  std::optional<std::string> start_time_column;
  std::optional<std::string> end_time_column;

  bool has_times() const { return start_time_column && end_time_column; }
  bool is_mapped(std::string_view name) const;
  // Throws ConfigError when the mapping is self-inconsistent.
  void validate() const;
};

struct Utterance {
  std::size_t row_index = 0;
  std::string speaker;
  std::string text;
  std::optional<double> start_time;
  std::optional<double> end_time;

  bool operator==(const Utterance&) const = default;
};

struct Column {
  std::string name;
  ValueDomain domain;
  std::vector<Value> values;
};

// Ordered, immutable collection of utterances plus annotation columns that are
// total over rows. Mutating operations return a new Transcript.
class Transcript {
 public:
  Transcript() = default;
  // Throws PreconditionError when row indices are not 0..n-1 in order, a
  // time span is inverted, or a column is not total over rows.
  Transcript(std::string source_id, ColumnMapping mapping, std::vector<Utterance> utterances,
             std::vector<Column> columns = {}, std::vector<std::string> source_columns = {});

  const std::string& source_id() const { return source_id_; }
  const ColumnMapping& mapping() const { return mapping_; }
  const std::vector<Utterance>& utterances() const { return utterances_; }
  const Utterance& operator[](std::size_t i) const { return utterances_[i]; }
  std::size_t size() const { return utterances_.size(); }
  bool empty() const { return utterances_.empty(); }

  const std::vector<Column>& columns() const { return columns_; }
  const Column* find_column(std::string_view name) const;
  // Throws SchemaError when absent.
  const Column& column(std::string_view name) const;
  bool has_column(std::string_view name) const { return find_column(name) != nullptr; }
  const Value& annotation(std::size_t row, std::string_view name) const;

  // Header order of the file this transcript came from (mapped columns
  // included). Empty for transcripts built in code.
  const std::vector<std::string>& source_columns() const { return source_columns_; }

  // Full output column order: source header first, then columns added since.
  std::vector<std::string> output_columns() const;

  // Adds or replaces a column by name.
  Transcript with_column(Column column) const;
  // New rows; existing columns are kept but every cell reset to null.
  Transcript with_rows_reset(std::vector<Utterance> utterances) const;
  Transcript with_utterances(std::vector<Utterance> utterances) const;
  Transcript with_source_id(std::string source_id) const;

 private:
  std::string source_id_;
  ColumnMapping mapping_;
  std::vector<Utterance> utterances_;
  std::vector<Column> columns_;
  std::vector<std::string> source_columns_;
};

bool same_content(const Transcript& a, const Transcript& b);

}  // namespace classtalk
