#include "classtalk/analyzers.hpp"

#include <algorithm>
#include <cmath>

#include "classtalk/errors.hpp"
#include "classtalk/feature_catalog.hpp"
#include "classtalk/text.hpp"

namespace classtalk {

std::string_view to_string(ReportKind k) {
  switch (k) {
    case ReportKind::qualitative:
      return "qualitative";
    case ReportKind::quantitative:
      return "quantitative";
    case ReportKind::lexical:
      return "lexical";
    case ReportKind::temporal:
      return "temporal";
  }
  return "unknown";
}

std::string_view to_string(Representation r) {
  switch (r) {
    case Representation::raw:
      return "raw";
    case Representation::percentage:
      return "percentage";
    case Representation::mean:
      return "mean";
  }
  return "raw";
}

Representation parse_representation(std::string_view s) {
  if (s == "raw") return Representation::raw;
  if (s == "percentage") return Representation::percentage;
  if (s == "mean") return Representation::mean;
  throw ConfigError("unknown representation '" + std::string(s) +
                    "' (expected raw, percentage or mean)");
}

GroupBy parse_group_by(std::string_view s) {
  if (s == "speaker") return GroupBy::speaker;
  if (s == "none") return GroupBy::none;
  throw ConfigError("unknown grouping '" + std::string(s) + "' (expected speaker or none)");
}

// --- qualitative ---

namespace {

bool matches_target(const Value& cell, const Value& target, std::string_view column,
                    std::size_t row) {
  if (is_null(target)) return is_null(cell);
  if (const auto* want = std::get_if<double>(&target)) {
    if (const auto* s = std::get_if<std::string>(&cell); s && !parse_number(*s)) {
      return false;
    }
    const auto x = as_number(cell, column, row);
    return x && *x == *want;
  }
  const auto& want = std::get<std::string>(target);
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d) == want;
  if (const auto* s = std::get_if<std::string>(&cell)) return *s == want;
  return false;
}

ContextLine context_line(const Utterance& u) { return {u.row_index, u.speaker, u.text}; }

}  // namespace

AnalysisReport qualitative_examples(std::span<const Transcript> corpus, std::string_view feature,
                                    const Value& target, std::size_t max_examples,
                                    ContextWindow context) {
  AnalysisReport report;
  report.kind = ReportKind::qualitative;
  report.feature = std::string(feature);
  report.title = "Examples of " + std::string(feature);
  report.columns = {"source_id", "row_index", "speaker", "text"};
  for (const auto& t : corpus) t.column(feature);

  for (const auto& t : corpus) {
    if (report.examples.size() >= max_examples) break;
    const auto& column = t.column(feature);
    for (std::size_t i = 0; i < t.size() && report.examples.size() < max_examples; ++i) {
      if (!matches_target(column.values[i], target, feature, i)) continue;
      Example ex;
      ex.source_id = t.source_id();
      ex.row_index = i;
      ex.speaker = t[i].speaker;
      ex.text = t[i].text;
      ex.value = column.values[i];
      for (std::size_t j = i - std::min(i, context.before); j < i; ++j) {
        ex.before.push_back(context_line(t[j]));
      }
      for (std::size_t j = i + 1; j < t.size() && j <= i + context.after; ++j) {
        ex.after.push_back(context_line(t[j]));
      }
      report.rows.push_back(
          {ex.source_id, static_cast<double>(ex.row_index), ex.speaker, ex.text});
      report.examples.push_back(std::move(ex));
    }
  }
  return report;
}

// --- quantitative / temporal shared aggregation ---

namespace {

// group -> label (0 for numeric features) -> aggregate
using Aggregates = std::map<std::string, std::map<long long, double>>;

struct Tally {
  Aggregates values;
  std::map<std::string, std::size_t> non_null;
};

bool resolve_labels(const Transcript& t, std::string_view feature, ValueKind kind) {
  if (kind != ValueKind::detect) return kind == ValueKind::labels;
  return t.column(feature).domain.kind == DomainKind::labels;
}

void tally_rows(const Transcript& t, std::string_view feature, bool labels, GroupBy group_by,
                std::size_t begin, std::size_t end, Tally& tally) {
  const auto& column = t.column(feature);
  for (std::size_t i = begin; i < end; ++i) {
    const auto x = as_number(column.values[i], feature, i);
    if (!x) continue;
    const std::string group =
        group_by == GroupBy::speaker ? t[i].speaker : std::string(kAllGroup);
    if (labels) {
      if (std::floor(*x) != *x) {
        throw SchemaError("column '" + std::string(feature) + "' row " + std::to_string(i) +
                              ": label value " + format_number(*x) + " is not an integer",
                          std::string(feature));
      }
      tally.values[group][static_cast<long long>(*x)] += 1.0;
    } else {
      tally.values[group][0] += *x;
    }
    ++tally.non_null[group];
  }
}

double grand_total(const Aggregates& values) {
  double total = 0;
  for (const auto& [_, by_label] : values) {
    for (const auto& [__, v] : by_label) total += v;
  }
  return total;
}

std::string label_text(long long label) { return std::to_string(label); }

std::string series_name(std::string_view feature, const std::string& group, bool labels,
                        long long label, GroupBy group_by) {
  if (!labels) return group;
  std::string name = std::to_string(label);
  const auto& names = catalog::label_names(feature);
  if (auto it = names.find(static_cast<int>(label)); it != names.end()) {
    name += ": " + it->second;
  }
  return group_by == GroupBy::none ? name : group + " / " + name;
}

std::string_view value_axis(Representation r) {
  switch (r) {
    case Representation::raw:
      return "value";
    case Representation::percentage:
      return "percentage";
    case Representation::mean:
      return "mean";
  }
  return "value";
}

}  // namespace

AnalysisReport quantitative_summary(std::span<const Transcript> corpus, std::string_view feature,
                                    GroupBy group_by, Representation representation,
                                    ValueKind kind) {
  Tally tally;
  bool labels = kind == ValueKind::labels;
  for (const auto& t : corpus) {
    labels = resolve_labels(t, feature, kind);
    tally_rows(t, feature, labels, group_by, 0, t.size(), tally);
  }

  const double total = grand_total(tally.values);
  if (representation == Representation::percentage && total == 0) {
    throw UndefinedDenominatorError("percentage of '" + std::string(feature) +
                                    "' is undefined: grand total is zero");
  }

  AnalysisReport report;
  report.kind = ReportKind::quantitative;
  report.feature = std::string(feature);
  report.representation = std::string(to_string(representation));
  report.title = std::string(feature) + " (" + report.representation + ")";
  report.x_label = group_by == GroupBy::speaker ? "speaker" : "";
  report.y_label = std::string(value_axis(representation));
  report.columns = labels ? std::vector<std::string>{"group", "label", report.representation}
                          : std::vector<std::string>{"group", report.representation};

  std::map<long long, Series> series;
  for (const auto& [group, by_label] : tally.values) {
    report.groups.push_back(group);
    for (const auto& [label, raw] : by_label) {
      double value = raw;
      if (representation == Representation::percentage) value = raw / total * 100.0;
      if (representation == Representation::mean) {
        value = raw / static_cast<double>(tally.non_null.at(group));
      }
      if (labels) {
        report.rows.push_back({group, label_text(label), value});
      } else {
        report.rows.push_back({group, value});
      }
      auto& s = series[label];
      if (s.name.empty()) {
        s.name = labels ? series_name(feature, "", true, label, GroupBy::none)
                        : std::string(feature);
      }
      s.x.emplace_back(group);
      s.y.push_back(value);
    }
  }
  for (auto& [_, s] : series) report.series.push_back(std::move(s));
  return report;
}

// --- lexical ---

NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (n == 0) throw PreconditionError("n-gram size must be at least 1");
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string gram = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      gram += ' ';
      gram += tokens[i + k];
    }
    ++counts[gram];
  }
  return counts;
}

std::map<std::string, NgramCounts> ngram_counts(std::span<const Transcript> corpus, std::size_t n,
                                                const std::vector<SpeakerGroup>& groups) {
  if (n == 0) throw PreconditionError("n-gram size must be at least 1");
  if (groups.empty()) throw ConfigError("n-gram counting needs at least one speaker group");
  for (const auto& g : groups) {
    if (g.speakers.empty()) throw ConfigError("speaker group '" + g.name + "' has no speakers");
  }
  std::map<std::string, NgramCounts> out;
  for (const auto& g : groups) out[g.name];
  for (const auto& t : corpus) {
    for (const auto& u : t.utterances()) {
      NgramCounts local;
      bool computed = false;
      for (const auto& g : groups) {
        if (!g.speakers.contains(u.speaker)) continue;
        if (!computed) {
          local = count_ngrams(text::tokenize_lower(u.text), n);
          computed = true;
        }
        auto& dest = out[g.name];
        for (const auto& [gram, c] : local) dest[gram] += c;
      }
    }
  }
  return out;
}

namespace {

double total_of(const NgramCounts& counts) {
  double total = 0;
  for (const auto& [_, c] : counts) total += static_cast<double>(c);
  return total;
}

std::size_t count_in(const NgramCounts& counts, const std::string& gram) {
  auto it = counts.find(gram);
  return it == counts.end() ? 0 : it->second;
}

}  // namespace

LogOddsResult log_odds(const NgramCounts& group_a, const NgramCounts& group_b,
                       const LogOddsPrior& prior, std::optional<std::size_t> top_k) {
  NgramCounts combined = group_a;
  for (const auto& [gram, c] : group_b) combined[gram] += c;
  const NgramCounts& background = prior.background ? *prior.background : combined;

  LogOddsResult result;
  result.total_a = total_of(group_a);
  result.total_b = total_of(group_b);
  const double background_total = total_of(background);
  result.prior_mass = prior.prior_mass ? *prior.prior_mass : background_total;
  if (!(result.prior_mass > 0) || !std::isfinite(result.prior_mass)) {
    throw PreconditionError("log-odds prior mass must be positive and finite");
  }

  for (const auto& [gram, _] : combined) {
    const std::size_t bg = count_in(background, gram);
    if (bg == 0) {
      throw PreconditionError("n-gram '" + gram + "' is missing from the background counts");
    }
    LogOddsEntry e;
    e.ngram = gram;
    e.count_a = static_cast<double>(count_in(group_a, gram));
    e.count_b = static_cast<double>(count_in(group_b, gram));
    e.prior = result.prior_mass * (static_cast<double>(bg) / background_total);
    const double rest_a = result.total_a + result.prior_mass - e.count_a - e.prior;
    const double rest_b = result.total_b + result.prior_mass - e.count_b - e.prior;
    if (!(rest_a > 0) || !(rest_b > 0)) {
      throw PreconditionError("log-odds for '" + gram +
                              "' is undefined: the prior leaves no mass for other n-grams");
    }
    e.delta = std::log((e.count_a + e.prior) / rest_a) - std::log((e.count_b + e.prior) / rest_b);
    e.variance = 1.0 / (e.count_a + e.prior) + 1.0 / (e.count_b + e.prior);
    e.z = e.delta / std::sqrt(e.variance);
    result.entries.push_back(std::move(e));
  }
  std::sort(result.entries.begin(), result.entries.end(),
            [](const LogOddsEntry& x, const LogOddsEntry& y) {
              if (x.z != y.z) return x.z > y.z;
              return x.ngram < y.ngram;
            });
  if (top_k && result.entries.size() > *top_k) result.entries.resize(*top_k);
  return result;
}

AnalysisReport ngram_frequency_report(const std::map<std::string, NgramCounts>& counts,
                                      std::size_t n, std::optional<std::size_t> top_k) {
  AnalysisReport report;
  report.kind = ReportKind::lexical;
  report.representation = "frequency";
  report.title = std::to_string(n) + "-gram frequency";
  report.x_label = "n-gram";
  report.y_label = "count";
  report.columns = {"group", "ngram", "count"};
  for (const auto& [group, table] : counts) {
    report.groups.push_back(group);
    std::vector<std::pair<std::string, std::size_t>> ranked(table.begin(), table.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (top_k && ranked.size() > *top_k) ranked.resize(*top_k);
    Series s{group, {}, {}};
    for (const auto& [gram, c] : ranked) {
      report.rows.push_back({group, gram, static_cast<double>(c)});
      s.x.emplace_back(gram);
      s.y.push_back(static_cast<double>(c));
    }
    report.series.push_back(std::move(s));
  }
  return report;
}

AnalysisReport log_odds_report(const LogOddsResult& result, const std::string& group_a,
                               const std::string& group_b, std::size_t n) {
  AnalysisReport report;
  report.kind = ReportKind::lexical;
  report.representation = "log-odds";
  report.title = std::to_string(n) + "-gram weighted log-odds, " + group_a + " vs " + group_b;
  report.groups = {group_a, group_b};
  report.x_label = "n-gram";
  report.y_label = "z-score";
  report.columns = {"ngram", "count_" + group_a, "count_" + group_b, "delta", "variance", "z"};
  Series s{group_a + " over " + group_b, {}, {}};
  for (const auto& e : result.entries) {
    report.rows.push_back({e.ngram, e.count_a, e.count_b, e.delta, e.variance, e.z});
    s.x.emplace_back(e.ngram);
    s.y.push_back(e.z);
  }
  report.series.push_back(std::move(s));
  return report;
}

// --- temporal ---

std::vector<std::pair<std::size_t, std::size_t>> bin_edges(std::size_t rows, BinSpec bins) {
  if (bins.num_bins == 0) throw PreconditionError("num_bins must be at least 1");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(bins.num_bins);
  for (std::size_t b = 0; b < bins.num_bins; ++b) {
    edges.emplace_back(b * rows / bins.num_bins, (b + 1) * rows / bins.num_bins);
  }
  return edges;
}

AnalysisReport temporal_profile(std::span<const Transcript> corpus, std::string_view feature,
                                BinSpec bins, GroupBy group_by, Representation representation,
                                ValueKind kind) {
  if (representation == Representation::mean) {
    throw ConfigError("temporal profiles support raw or percentage representations");
  }
  if (bins.num_bins == 0) throw PreconditionError("num_bins must be at least 1");

  std::vector<Tally> per_bin(bins.num_bins);
  bool labels = kind == ValueKind::labels;
  for (const auto& t : corpus) {
    labels = resolve_labels(t, feature, kind);
    const auto edges = bin_edges(t.size(), bins);
    for (std::size_t b = 0; b < edges.size(); ++b) {
      tally_rows(t, feature, labels, group_by, edges[b].first, edges[b].second, per_bin[b]);
    }
  }

  // Every (group, label) seen anywhere gets a point in every bin.
  std::map<std::string, std::set<long long>> keys;
  for (const auto& tally : per_bin) {
    for (const auto& [group, by_label] : tally.values) {
      for (const auto& [label, _] : by_label) keys[group].insert(label);
    }
  }

  AnalysisReport report;
  report.kind = ReportKind::temporal;
  report.feature = std::string(feature);
  report.representation = std::string(to_string(representation));
  report.title = std::string(feature) + " over time (" + std::to_string(bins.num_bins) +
                 " bins, " + report.representation + ")";
  report.x_label = "bin";
  report.y_label = std::string(value_axis(representation));
  report.columns = labels
                       ? std::vector<std::string>{"bin", "group", "label", report.representation}
                       : std::vector<std::string>{"bin", "group", report.representation};
  for (const auto& [group, _] : keys) report.groups.push_back(group);

  std::map<std::pair<std::string, long long>, Series> series;
  for (const auto& [group, label_set] : keys) {
    for (long long label : label_set) {
      series[{group, label}].name = series_name(feature, group, labels, label, group_by);
    }
  }
  for (std::size_t b = 0; b < per_bin.size(); ++b) {
    const double total = grand_total(per_bin[b].values);
    for (const auto& [group, label_set] : keys) {
      for (long long label : label_set) {
        double raw = 0;
        if (auto g = per_bin[b].values.find(group); g != per_bin[b].values.end()) {
          if (auto l = g->second.find(label); l != g->second.end()) raw = l->second;
        }
        double value = raw;
        if (representation == Representation::percentage) {
          value = total == 0 ? 0.0 : raw / total * 100.0;
        }
        if (labels) {
          report.rows.push_back(
              {static_cast<double>(b), group, label_text(label), value});
        } else {
          report.rows.push_back({static_cast<double>(b), group, value});
        }
        auto& s = series[{group, label}];
        s.x.emplace_back(static_cast<double>(b));
        s.y.push_back(value);
      }
    }
  }
  for (auto& [_, s] : series) report.series.push_back(std::move(s));
  return report;
}

AnalysisReport temporal_profile(const Transcript& transcript, std::string_view feature,
                                BinSpec bins, GroupBy group_by, Representation representation,
                                ValueKind kind) {
  return temporal_profile(std::span<const Transcript>(&transcript, 1), feature, bins, group_by,
                          representation, kind);
}

}  // namespace classtalk
