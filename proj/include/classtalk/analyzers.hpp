#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "classtalk/transcript.hpp"

namespace classtalk {

enum class ReportKind { qualitative, quantitative, lexical, temporal };
std::string_view to_string(ReportKind k);

using Cell = std::variant<std::string, double>;

struct Series {
  std::string name;
  std::vector<Cell> x;
  std::vector<double> y;
};

struct ContextLine {
  std::size_t row_index = 0;
  std::string speaker;
  std::string text;
};

struct Example {
  std::string source_id;
  std::size_t row_index = 0;
  std::string speaker;
  std::string text;
  Value value;
  std::vector<ContextLine> before;
  std::vector<ContextLine> after;
};

// Result of any analyzer. `columns`/`rows` hold the tabular form, `series`
// the plot form, and `examples` the qualitative excerpts.
struct AnalysisReport {
  ReportKind kind = ReportKind::quantitative;
  std::string title;
  std::string feature;
  std::string representation;
  std::string x_label;
  std::string y_label;
  std::vector<std::string> groups;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<Series> series;
  std::vector<Example> examples;
};

// --- qualitative ---

struct ContextWindow {
  std::size_t before = 0;
  std::size_t after = 0;
};

// Utterances whose `feature` equals `target`, in transcript then row order,
// with surrounding lines from the same transcript. Numeric cells compare
// numerically; text cells compare as text. Throws SchemaError when a
// transcript lacks the feature.
AnalysisReport qualitative_examples(std::span<const Transcript> corpus, std::string_view feature,
                                    const Value& target, std::size_t max_examples,
                                    ContextWindow context = {});

// --- quantitative ---

enum class GroupBy { speaker, none };
enum class Representation { raw, percentage, mean };
// How cell values aggregate: sums (numeric) or per-label counts (labels).
// `detect` uses the column's domain.
enum class ValueKind { detect, numeric, labels };

std::string_view to_string(Representation r);
Representation parse_representation(std::string_view s);
GroupBy parse_group_by(std::string_view s);

inline constexpr std::string_view kAllGroup = "all";

// raw: per-group sum (numeric) or per-group, per-label counts (labels).
// percentage: raw / grand total * 100. mean: raw / non-null count in group.
// Nulls are excluded everywhere; groups with no non-null value are omitted.
// Throws UndefinedDenominatorError for percentage with a zero grand total.
AnalysisReport quantitative_summary(std::span<const Transcript> corpus, std::string_view feature,
                                    GroupBy group_by, Representation representation,
                                    ValueKind kind = ValueKind::detect);

// --- lexical ---

using NgramCounts = std::map<std::string, std::size_t>;

struct SpeakerGroup {
  std::string name;
  std::set<std::string> speakers;
};

// Space-joined n-grams of `tokens`.
NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n);

// Lowercased word n-grams per group, never spanning two utterances. Throws
// PreconditionError for n == 0 and ConfigError for an empty group list or a
// group without speakers.
std::map<std::string, NgramCounts> ngram_counts(std::span<const Transcript> corpus, std::size_t n,
                                                const std::vector<SpeakerGroup>& groups);

struct LogOddsPrior {
  // Background counts; defaults to the two groups combined.
  std::optional<NgramCounts> background;
  // alpha_0; defaults to the background token total.
  std::optional<double> prior_mass;
};

struct LogOddsEntry {
  std::string ngram;
  double count_a = 0;
  double count_b = 0;
  double prior = 0;  // alpha_w
  double delta = 0;
  double variance = 0;
  double z = 0;
};

struct LogOddsResult {
  double total_a = 0;
  double total_b = 0;
  double prior_mass = 0;
  std::vector<LogOddsEntry> entries;  // z descending, ties by n-gram
};

// Weighted log-odds with an informative Dirichlet prior: for every n-gram in
// either group, alpha_w = alpha_0 * background_w / background_total,
//   delta = ln((yA+a)/(nA+a0-yA-a)) - ln((yB+a)/(nB+a0-yB-a)),
//   variance = 1/(yA+a) + 1/(yB+a), z = delta / sqrt(variance).
// Keeps the top_k entries (all when nullopt). Throws PreconditionError when
// an n-gram has no background count or the prior degenerates.
LogOddsResult log_odds(const NgramCounts& group_a, const NgramCounts& group_b,
                       const LogOddsPrior& prior = {},
                       std::optional<std::size_t> top_k = std::nullopt);

AnalysisReport ngram_frequency_report(const std::map<std::string, NgramCounts>& counts,
                                      std::size_t n, std::optional<std::size_t> top_k);

AnalysisReport log_odds_report(const LogOddsResult& result, const std::string& group_a,
                               const std::string& group_b, std::size_t n);

// --- temporal ---

struct BinSpec {
  std::size_t num_bins = 1;
};

// Bin b covers rows [floor(b*L/B), floor((b+1)*L/B)). Throws
// PreconditionError for num_bins == 0.
std::vector<std::pair<std::size_t, std::size_t>> bin_edges(std::size_t rows, BinSpec bins);

// Per-bin aggregation with quantitative semantics (raw or percentage, the
// latter normalized within each bin; an empty bin reports zeros). Over a
// corpus, each transcript is binned separately and bins are summed.
AnalysisReport temporal_profile(std::span<const Transcript> corpus, std::string_view feature,
                                BinSpec bins, GroupBy group_by, Representation representation,
                                ValueKind kind = ValueKind::detect);
AnalysisReport temporal_profile(const Transcript& transcript, std::string_view feature,
                                BinSpec bins, GroupBy group_by, Representation representation,
                                ValueKind kind = ValueKind::detect);

}  // namespace classtalk
