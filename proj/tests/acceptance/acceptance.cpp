// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails or exceeds its time limit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "classtalk/analyzers.hpp"
#include "classtalk/annotator.hpp"
#include "classtalk/errors.hpp"
#include "classtalk/feature_catalog.hpp"
#include "classtalk/inference_client.hpp"
#include "classtalk/llm_analyzer.hpp"
#include "classtalk/preprocessor.hpp"
#include "classtalk/render.hpp"
#include "classtalk/transcript_io.hpp"
#include "cli.hpp"
#include "mock_servers.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace classtalk;
namespace fs = std::filesystem;

namespace {

// Empty string on success, otherwise the first failure found.
using Check = std::function<std::string()>;

struct Criterion {
  std::string name;
  double limit_seconds;
  Check run;
};

#define EXPECT(cond, ...)                        \
  do {                                           \
    if (!(cond)) return fmt::format(__VA_ARGS__); \
  } while (0)

Transcript make(const std::vector<std::pair<std::string, std::string>>& rows,
                std::string source = "t") {
  std::vector<Utterance> us;
  for (std::size_t i = 0; i < rows.size(); ++i) us.push_back({i, rows[i].first, rows[i].second, {}, {}});
  return Transcript(std::move(source), {}, std::move(us));
}

std::string join_texts(const Transcript& t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ' ';
    out += t[i].text;
  }
  return out;
}

// --- de-identification ---

std::string check_deid() {
  const Roster example(std::vector<RosterEntry>{{{"John Paul", "John"}, "[STUDENT_0]"}});
  const auto got = deidentify_text("John said hi to Johnson.", example, false);
  EXPECT(got == "[STUDENT_0] said hi to Johnson.", "example gave '{}'", got);

  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> coin(0, 9);
  const std::vector<std::string> glue = {" ", ", ", ". ", "'s ", " '", "' ", "-", " (", "", "x"};
  std::uniform_int_distribution<std::size_t> pick_glue(0, glue.size() - 1);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<RosterEntry> entries;
    std::vector<std::string> variants;
    const int n_entries = 1 + coin(rng) % 4;
    for (int e = 0; e < n_entries; ++e) {
      RosterEntry entry;
      const int n_variants = 1 + coin(rng) % 3;
      for (int v = 0; v < n_variants; ++v) {
        std::string name = testing::random_word(rng, 1, 4, "abc");
        if (coin(rng) < 2) name += " " + testing::random_word(rng, 1, 3, "abc");
        if (coin(rng) < 1) name += "'" + testing::random_word(rng, 1, 1, "s");
        entry.name_variants.push_back(name);
        variants.push_back(name);
      }
      entry.replacement = "[#" + std::to_string(e) + "]";
      entries.push_back(entry);
    }
    const Roster roster(entries);
    std::string text;
    const int n_words = coin(rng) * 2;
    for (int w = 0; w < n_words; ++w) {
      std::string word = coin(rng) < 5 ? variants[coin(rng) % variants.size()]
                                       : testing::random_word(rng, 1, 5, "abcd");
      if (coin(rng) < 2) word[0] = static_cast<char>(std::toupper(word[0]));
      text += word + glue[pick_glue(rng)];
    }
    const bool cs = coin(rng) < 3;

    std::vector<Replacement> report;
    const auto out = deidentify_text(text, roster, cs, &report);
    EXPECT(out == testing::oracle_deidentify(text, roster, cs),
           "trial {}: '{}' differs from the oracle", trial, text);
    const auto survivors = testing::oracle_all_matches(out, roster, cs);
    EXPECT(survivors.empty(), "trial {}: variant '{}' survives in '{}'", trial,
           survivors.empty() ? "" : survivors[0].variant, out);
    for (const auto& r : report) {
      EXPECT(testing::oracle_boundary(text, r.span_start) &&
                 testing::oracle_boundary(text, r.span_end),
             "trial {}: replacement inside a word at [{}, {}) of '{}'", trial, r.span_start,
             r.span_end, text);
    }
  }
  return {};
}

// --- merge ---

std::string check_merge() {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 500; ++trial) {
    testing::RandomTranscriptOptions opts;
    opts.speakers = {"T", "S1", "S2"};
    if (trial % 3 == 0) opts.speakers = {"T", "S"};
    opts.with_times = trial % 2 == 0;
    const auto t = testing::random_transcript(rng, opts);
    const auto once = merge_consecutive(t);
    const auto twice = merge_consecutive(once);
    EXPECT(serialize_transcript(once, FileFormat::json) ==
               serialize_transcript(twice, FileFormat::json),
           "trial {}: merge is not idempotent", trial);
    for (std::size_t i = 1; i < once.size(); ++i) {
      EXPECT(once[i].speaker != once[i - 1].speaker, "trial {}: rows {} and {} share a speaker",
             trial, i - 1, i);
    }
    EXPECT(join_texts(once) == join_texts(t), "trial {}: text not conserved", trial);
  }
  return {};
}

// --- gating ---

std::string check_gate() {
  const RoleMap roles = {{"T", Role::teacher}, {"S", Role::student}};
  const std::vector<std::pair<std::string, GatingRule>> rules = {
      {"student_reasoning", builtin_feature_spec("student_reasoning").gate.resolve(roles)},
      {"uptake", builtin_feature_spec("uptake").gate.resolve(roles)}};
  const std::vector<std::size_t> word_counts = {0, 4, 5, 7, 8, 9};
  std::vector<std::string> texts;
  for (auto n : word_counts) {
    std::string s;
    for (std::size_t w = 0; w < n; ++w) s += w ? " w" : "w";
    texts.push_back(s);
  }
  const std::vector<std::string> speakers = {"T", "S"};
  const std::size_t choices = speakers.size() * texts.size();

  // Enumerate (rows, code) pairs in interleaved slices, one per thread.
  const std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> failures(threads);
  std::vector<std::size_t> counts(threads, 0);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t rows = 0; rows <= 6; ++rows) {
          std::size_t combos = 1;
          for (std::size_t r = 0; r < rows; ++r) combos *= choices;
          std::vector<std::pair<std::string, std::string>> cells(rows);
          for (std::size_t code = w; code < combos; code += threads) {
            std::size_t c = code;
            for (std::size_t r = 0; r < rows; ++r) {
              cells[r] = {speakers[c % 2], texts[(c / 2) % texts.size()]};
              c /= choices;
            }
            const auto t = make(cells);
            for (const auto& [name, rule] : rules) {
              if (compute_gate(t, rule) != testing::oracle_gate(cells, rule)) {
                failures[w] = fmt::format("{} gate differs on transcript code {} with {} rows",
                                          name, code, rows);
                return;
              }
              ++counts[w];
            }
          }
        }
      });
    }
  }
  for (const auto& f : failures) EXPECT(f.empty(), "{}", f);
  const std::size_t checked = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  EXPECT(checked == 2 * 3257437, "checked {} cases", checked);
  return {};
}

// --- log-odds ---

NgramCounts random_counts(std::mt19937_64& rng, std::size_t max_tokens,
                          const std::vector<std::string>& vocab) {
  std::uniform_int_distribution<std::size_t> len(1, max_tokens);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  NgramCounts c;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) ++c[vocab[pick(rng)]];
  // A single word type leaves the prior no mass outside it, which log_odds
  // rejects as undefined.
  if (c.size() == 1) ++c[c.begin()->first == vocab[0] ? vocab[1] : vocab[0]];
  return c;
}

std::string check_log_odds() {
  std::mt19937_64 rng(808);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g", "h"};
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_counts(rng, 50, vocab);
    for (const auto& e : log_odds(a, a).entries) {
      EXPECT(e.z == 0.0, "identical groups give z = {} for '{}'", e.z, e.ngram);
    }
  }
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_counts(rng, 50, vocab);
    const auto b = random_counts(rng, 50, vocab);
    const auto ab = log_odds(a, b);
    const auto ba = log_odds(b, a);
    std::map<std::string, double> zb;
    for (const auto& e : ba.entries) zb[e.ngram] = e.z;
    for (const auto& e : ab.entries) {
      EXPECT(std::abs(e.z + zb.at(e.ngram)) <= 1e-12, "swap: '{}' z {} vs {}", e.ngram, e.z,
             zb.at(e.ngram));
    }
  }
  std::uniform_real_distribution<double> mass(0.5, 200.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_counts(rng, 50, vocab);
    const auto b = random_counts(rng, 50, vocab);
    LogOddsPrior prior;
    NgramCounts background;
    for (const auto& w : vocab) background[w] = 1 + rng() % 20;
    if (trial % 2) {
      prior.background = background;
      prior.prior_mass = mass(rng);
    } else {
      background = a;
      for (const auto& [w, n] : b) background[w] += n;
    }
    double alpha0 = 0;
    for (const auto& [w, n] : background) alpha0 += static_cast<double>(n);
    if (prior.prior_mass) alpha0 = *prior.prior_mass;
    const auto got = log_odds(a, b, prior);
    const auto want = testing::oracle_log_odds(a, b, background, alpha0);
    EXPECT(got.entries.size() == want.size(), "trial {}: {} entries, oracle {}", trial,
           got.entries.size(), want.size());
    for (const auto& e : got.entries) {
      const auto& o = want.at(e.ngram);
      EXPECT(std::abs(e.delta - o.delta) <= 1e-9 && std::abs(e.variance - o.variance) <= 1e-9 &&
                 std::abs(e.z - o.z) <= 1e-9,
             "trial {}: '{}' z {} vs oracle {}", trial, e.ngram, e.z, o.z);
    }
  }
  return {};
}

// --- quantitative and temporal ---

double series_sum(const AnalysisReport& r) {
  double s = 0;
  for (const auto& series : r.series) {
    for (double y : series.y) s += y;
  }
  return s;
}

Transcript with_numeric(const Transcript& t, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> v(0, 12);
  std::vector<Value> values;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const int x = v(rng);
    values.push_back(x == 12 ? Value{} : Value{static_cast<double>(x)});
  }
  return t.with_column({"score", ValueDomain::numeric(), std::move(values)});
}

std::string check_aggregation() {
  std::mt19937_64 rng(909);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Transcript> corpus;
    for (int k = 0; k < 3; ++k) {
      auto t = with_numeric(testing::random_transcript(rng, {}), rng);
      corpus.push_back(annotate_talk_time(t));
    }
    for (const auto* feature : {"score", "talktime_words"}) {
      for (auto g : {GroupBy::speaker, GroupBy::none}) {
        try {
          const auto r = quantitative_summary(corpus, feature, g, Representation::percentage);
          EXPECT(std::abs(series_sum(r) - 100.0) <= 1e-9, "trial {}: {} percentages sum to {}",
                 trial, feature, series_sum(r));
        } catch (const UndefinedDenominatorError&) {
        }
      }
    }
  }

  for (std::size_t L = 0; L <= 30; ++L) {
    for (std::size_t B = 1; B <= 10; ++B) {
      const auto edges = bin_edges(L, {B});
      EXPECT(edges.size() == B, "L={} B={}: {} bins", L, B, edges.size());
      std::size_t cursor = 0;
      for (const auto& [lo, hi] : edges) {
        EXPECT(lo == cursor && lo <= hi, "L={} B={}: bin [{}, {}) breaks the partition", L, B,
               lo, hi);
        cursor = hi;
      }
      EXPECT(cursor == L, "L={} B={}: bins end at {}", L, B, cursor);
      if (L == 0) continue;

      testing::RandomTranscriptOptions opts;
      opts.max_rows = L;
      Transcript base = testing::random_transcript(rng, opts);
      while (base.size() != L) base = testing::random_transcript(rng, opts);
      const auto t = with_numeric(base, rng);
      for (auto g : {GroupBy::speaker, GroupBy::none}) {
        const auto whole = quantitative_summary(std::span(&t, 1), "score", g, Representation::raw);
        const auto binned = temporal_profile(t, "score", {B}, g, Representation::raw);
        EXPECT(series_sum(binned) == series_sum(whole), "L={} B={}: bins sum {} vs whole {}", L,
               B, series_sum(binned), series_sum(whole));
        const auto pct = temporal_profile(t, "score", {B}, g, Representation::percentage);
        for (std::size_t b = 0; b < B; ++b) {
          double s = 0;
          for (const auto& series : pct.series) s += series.y.at(b);
          EXPECT(s == 0.0 || std::abs(s - 100.0) <= 1e-9, "L={} B={} bin {}: percentages sum {}",
                 L, B, b, s);
        }
      }
    }
  }
  return {};
}

// --- classifier client ---

std::string labels_csv(const std::vector<Transcript>& annotated,
                       const std::vector<std::string>& features) {
  std::string out = "source_id,row_index,feature,label,score\n";
  for (const auto& t : annotated) {
    for (const auto& f : features) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        const auto label = as_number(t.annotation(i, f), f, i);
        if (!label) continue;
        const auto score = as_number(t.annotation(i, f + "_score"), f, i);
        out += fmt::format("{},{},{},{},{}\n", t.source_id(), i, f, format_number(*label),
                           format_number(*score));
      }
    }
  }
  return out;
}

std::string check_classifier() {
  const RoleMap roles = {{"T", Role::teacher}, {"S1", Role::student}, {"S2", Role::student}};
  const std::vector<std::string> features = catalog::classifier_feature_names();
  std::mt19937_64 rng(1010);
  std::vector<Transcript> corpus;
  for (int k = 0; k < 4; ++k) {
    testing::RandomTranscriptOptions opts;
    opts.max_rows = 60;
    opts.max_words = 12;
    opts.source_id = "doc" + std::to_string(k);
    corpus.push_back(testing::random_transcript(rng, opts));
  }

  std::vector<Transcript> reference;
  for (std::size_t max_batch : {1, 2, 7, 32}) {
    testing::MockClassifierServer server(features);
    ClientLimits limits;
    limits.max_batch = max_batch;
    limits.backoff_base = std::chrono::milliseconds(1);
    RemoteClassifier remote(Endpoint::parse(server.url()), limits);
    std::vector<Transcript> annotated;
    std::size_t expected_calls = 0;
    for (const auto& t : corpus) {
      Transcript out = t;
      for (const auto& f : features) {
        const auto spec = builtin_feature_spec(f);
        const auto mask = compute_gate(t, spec.gate.resolve(roles));
        const auto eligible = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
        expected_calls += (eligible + max_batch - 1) / max_batch;
        out = annotate_with_classifier(out, spec, roles, remote);
        for (std::size_t i = 0; i < t.size(); ++i) {
          const auto& v = out.annotation(i, f);
          EXPECT(is_null(v) != mask[i], "max_batch {}: {} row {} of {} null={} eligible={}",
                 max_batch, f, i, t.source_id(), is_null(v), static_cast<bool>(mask[i]));
          if (!mask[i]) continue;
          std::optional<std::string> context;
          if (spec.gate.predecessor) context = t[i - 1].text;
          const auto want = testing::hash_labeler(f, {t[i].text, context});
          EXPECT(std::get<double>(v) == want.first &&
                     std::get<double>(out.annotation(i, f + "_score")) == want.second,
                 "max_batch {}: {} row {} label differs from the service", max_batch, f, i);
        }
      }
      annotated.push_back(out);
    }
    const auto calls = server.requests();
    EXPECT(calls.size() == expected_calls, "max_batch {}: {} calls, expected {}", max_batch,
           calls.size(), expected_calls);
    for (const auto& c : calls) {
      EXPECT(c.items.size() <= max_batch && !c.items.empty(), "max_batch {}: call of {} items",
             max_batch, c.items.size());
    }
    if (reference.empty()) {
      reference = annotated;
      continue;
    }
    for (std::size_t k = 0; k < corpus.size(); ++k) {
      EXPECT(serialize_transcript(annotated[k], FileFormat::csv) ==
                 serialize_transcript(reference[k], FileFormat::csv),
             "max_batch {}: {} differs from max_batch 1", max_batch, corpus[k].source_id());
    }
  }

  testing::TempDir dir;
  const auto path = dir.write("labels.csv", labels_csv(reference, features));
  auto pre = PrecomputedClassifier::from_file(path);
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    Transcript out = corpus[k];
    for (const auto& f : features) {
      out = annotate_with_classifier(out, builtin_feature_spec(f), roles, pre);
    }
    for (auto format : {FileFormat::csv, FileFormat::json}) {
      EXPECT(serialize_transcript(out, format) == serialize_transcript(reference[k], format),
             "precomputed {} differs from the service for {}", to_string(format),
             corpus[k].source_id());
    }
  }
  return {};
}

// --- truncation ---

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string check_truncation() {
  std::mt19937_64 rng(1111);
  const FormatOptions options;
  const std::string marker(kTruncationMarker);
  for (int trial = 0; trial < 200; ++trial) {
    testing::RandomTranscriptOptions opts;
    opts.max_rows = 40;
    const auto t = testing::random_transcript(rng, opts);
    std::vector<std::string> formatted;
    std::size_t full = 0;
    for (const auto& u : t.utterances()) {
      formatted.push_back(format_line(u, options));
      full += formatted.back().size() + 1;
    }
    std::uniform_int_distribution<std::size_t> pick(marker.size() + 1, full + marker.size() + 20);
    std::vector<std::size_t> budgets;
    for (int k = 0; k < 6; ++k) budgets.push_back(pick(rng));
    std::sort(budgets.begin(), budgets.end());

    std::size_t last_kept = 0;
    for (auto max_chars : budgets) {
      const auto r = truncate_to_budget(t, options, Budget{max_chars, marker});
      EXPECT(r.text.size() <= max_chars, "trial {}: {} chars over budget {}", trial,
             r.text.size(), max_chars);
      EXPECT(r.text.empty() || r.text.back() == '\n', "trial {}: output ends mid-line", trial);
      auto lines = split_lines(r.text);
      if (r.truncated) {
        EXPECT(!lines.empty() && lines.back() == marker, "trial {}: marker missing", trial);
        lines.pop_back();
      }
      EXPECT(lines.size() <= formatted.size() &&
                 std::equal(lines.begin(), lines.end(), formatted.begin()),
             "trial {}: output is not a prefix of whole lines", trial);
      EXPECT(r.truncated == (lines.size() < formatted.size()),
             "trial {}: truncation flag disagrees with kept lines", trial);
      EXPECT(lines.size() >= last_kept, "trial {}: budget {} keeps fewer lines", trial,
             max_chars);
      last_kept = lines.size();
    }
  }
  return {};
}

// --- CLI determinism ---

int run_cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "classtalk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      files[fs::relative(e.path(), root).string()] = testing::slurp(e.path());
    }
  }
  return files;
}

std::string check_cli() {
  testing::TempDir dir;
  std::mt19937_64 rng(1212);
  std::string labels = "source_id,row_index,feature,label,score\n";
  fs::create_directories(dir / "in");
  for (int k = 0; k < 3; ++k) {
    testing::RandomTranscriptOptions opts;
    opts.with_times = true;
    opts.max_rows = 40;
    opts.vocabulary = {"Maya", "Jordan", "plus", "seven", "angle", "because", "why", "the"};
    opts.source_id = "lesson" + std::to_string(k);
    const auto t = testing::random_transcript(rng, opts);
    save_transcript(t, dir / "in" / (opts.source_id + ".csv"), FileFormat::csv);
    for (std::size_t i = 0; i < 40; ++i) {
      labels += fmt::format("{},{},student_reasoning,{},0.{}\n", opts.source_id, i, (i * 7) % 2,
                            i % 10);
    }
  }
  dir.write("labels.csv", labels);
  dir.write("roster.json", R"([{"names":["Maya"],"replacement":"[S1]"},
                               {"names":["Jordan"],"replacement":"[S2]"}])");
  dir.write("roles.json", R"({"T":"teacher","S1":"student","S2":"student"})");
  dir.write("lexicon.txt", "plus\nseven\nangle\n");

  const auto p = [&](std::string_view rel) { return (dir / rel).string(); };
  const auto pipeline = [&](const std::string& jobs) -> std::string {
    const std::vector<std::string> common = {"--jobs", jobs, "--start-column", "start",
                                             "--end-column", "end", "--role-map",
                                             p("roles.json")};
    auto with = [&](std::vector<std::string> args) {
      args.insert(args.begin(), common.begin(), common.end());
      return args;
    };
    std::string err;
    if (run_cli(with({"preprocess", p("in"), "--steps", "deidentify,merge,normalize",
                      "--roster", p("roster.json"), "--output-dir", p("run/pre")}),
                &err) != 0) {
      return "preprocess failed: " + err;
    }
    if (run_cli(with({"annotate", p("run/pre"), "--features",
                      "talktime,math_density,student_reasoning", "--lexicon", p("lexicon.txt"),
                      "--precomputed", p("labels.csv"), "--output-dir", p("run/ann")}),
                &err) != 0) {
      return "annotate failed: " + err;
    }
    const std::vector<std::vector<std::string>> analyses = {
        {"--mode", "plot_data", "--out", p("run/quant.json"), "--svg", p("run/quant.svg"),
         "quantitative", p("run/ann"), "--feature", "student_reasoning", "--repr",
         "percentage"},
        {"--mode", "report", "--out", p("run/lex.txt"), "lexical", p("run/ann"), "--log-odds",
         "--group", "role:student", "--group", "role:teacher", "--top-k", "5"},
        {"--mode", "print", "--out", p("run/temporal.txt"), "temporal", p("run/ann"),
         "--feature", "talktime_words", "--bins", "10", "--repr", "percentage"},
        {"--mode", "print", "--out", p("run/qual.txt"), "qualitative", p("run/ann"),
         "--feature", "student_reasoning", "--value", "1", "--before", "1"}};
    for (const auto& a : analyses) {
      auto args = with(a);
      args.insert(args.begin() + static_cast<long>(common.size()), "analyze");
      if (run_cli(args, &err) != 0) return "analyze " + a[4] + " failed: " + err;
    }
    return {};
  };

  auto failure = pipeline("1");
  EXPECT(failure.empty(), "first run: {}", failure);
  const auto first = snapshot(dir / "run");
  fs::remove_all(dir / "run");
  failure = pipeline("3");
  EXPECT(failure.empty(), "second run: {}", failure);
  const auto second = snapshot(dir / "run");
  EXPECT(first.size() == 14, "first run wrote {} files", first.size());
  for (const auto& [name, bytes] : first) {
    EXPECT(second.count(name) && second.at(name) == bytes, "{} differs between runs", name);
  }
  EXPECT(first.size() == second.size(), "runs wrote different file sets");

  for (const auto* stage : {"pre", "ann"}) {
    const auto manifest =
        nlohmann::json::parse(first.at(std::string(stage) + "/" + std::string(cli::kManifestName)));
    EXPECT(manifest.at("summary").at("total") == 3 && manifest.at("summary").at("failed") == 0,
           "{} manifest summary {}", stage, manifest.at("summary").dump());
    EXPECT(manifest.at("files").size() == 3, "{} manifest lists {} files", stage,
           manifest.at("files").size());
    for (const auto& f : manifest.at("files")) {
      EXPECT(f.at("status") == "ok", "{} manifest entry not ok", stage);
      const auto out = std::string(stage) + "/" + f.at("output").template get<std::string>();
      EXPECT(first.count(out), "{} manifest names missing output {}", stage, out);
    }
  }
  validate_plot_data(nlohmann::json::parse(first.at("quant.json")));
  return {};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"de-identification example and 1000-case fuzz", 10, check_deid},
      {"merge idempotence and text conservation (500 transcripts)", 5, check_merge},
      {"gating equals brute-force predicate (exhaustive, <= 6 rows)", 30, check_gate},
      {"log-odds zero, antisymmetry 1e-12, 50-digit oracle 1e-9", 20, check_log_odds},
      {"percentages sum to 100 +- 1e-9; bins partition, sums conserved", 10, check_aggregation},
      {"classifier chunking, null placement, precomputed parity", 10, check_classifier},
      {"truncation budget, whole lines, monotone (200 cases)", 5, check_truncation},
      {"CLI determinism over a 3-file corpus", 10, check_cli},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string failure;
    try {
      failure = c.run();
    } catch (const std::exception& e) {
      failure = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (failure.empty() && secs >= c.limit_seconds) {
      failure = fmt::format("took {:.2f} s, limit {:.0f} s", secs, c.limit_seconds);
    }
    const bool ok = failure.empty();
    failed += ok ? 0 : 1;
    fmt::print("{} {} [{:.2f} s / {:.0f} s]{}\n", ok ? "PASS" : "FAIL", c.name, secs,
               c.limit_seconds, ok ? "" : ": " + failure);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
