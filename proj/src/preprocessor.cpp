#include "classtalk/preprocessor.hpp"

#include <map>
#include <sstream>

#include <nlohmann/json.hpp>
#include <unicode/uchar.h>

#include "classtalk/csv.hpp"
#include "classtalk/errors.hpp"
#include "classtalk/text.hpp"
#include "classtalk/transcript_io.hpp"

namespace classtalk {

Roster::Roster(std::vector<RosterEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.name_variants.empty()) {
      throw ConfigError("roster entry " + std::to_string(i) + " has no name variants");
    }
    for (const auto& v : e.name_variants) {
      if (text::normalize_spaces(v).empty()) {
        throw ConfigError("roster entry " + std::to_string(i) + " has an empty name variant");
      }
    }
  }
}

Roster Roster::from_json(std::string_view json) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("roster is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("roster must be a JSON array");
  std::vector<RosterEntry> entries;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    if (!item.is_object() || !item.contains("names") || !item["names"].is_array() ||
        !item.contains("replacement") || !item["replacement"].is_string()) {
      throw ParseError("roster entry " + std::to_string(i) +
                       " must be {\"names\": [...], \"replacement\": \"...\"}");
    }
    RosterEntry entry;
    for (const auto& n : item["names"]) {
      if (!n.is_string()) {
        throw ParseError("roster entry " + std::to_string(i) + " has a non-string name");
      }
      entry.name_variants.push_back(n.get<std::string>());
    }
    entry.replacement = item["replacement"].get<std::string>();
    entries.push_back(std::move(entry));
  }
  return Roster(std::move(entries));
}

Roster Roster::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

std::vector<std::string> Roster::warnings() const {
  std::vector<std::string> out;
  std::map<std::string, std::size_t> first_owner;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto [it, inserted] = first_owner.emplace(entries_[i].replacement, i);
    if (!inserted) {
      out.push_back("roster entries " + std::to_string(it->second) + " and " +
                    std::to_string(i) + " share replacement '" + entries_[i].replacement + "'");
    }
  }
  return out;
}

std::string deidentify_text(std::string_view input, const Roster& roster, bool case_sensitive,
                            std::vector<Replacement>* report, std::size_t report_row,
                            DeidField field) {
  std::vector<std::string> patterns;
  std::vector<std::size_t> owner;
  for (std::size_t e = 0; e < roster.entries().size(); ++e) {
    for (const auto& v : roster.entries()[e].name_variants) {
      patterns.push_back(v);
      owner.push_back(e);
    }
  }
  const text::PhraseMatcher matcher(patterns, case_sensitive);
  const auto matches = matcher.find_all(input);
  if (matches.empty()) return std::string(input);

  std::string out;
  out.reserve(input.size());
  std::size_t pos = 0;
  for (const auto& m : matches) {
    const auto& entry = roster.entries()[owner[m.pattern_index]];
    out.append(input.substr(pos, m.byte_begin - pos));
    out.append(entry.replacement);
    pos = m.byte_end;
    if (report) {
      report->push_back({report_row, field, m.byte_begin, m.byte_end,
                         patterns[m.pattern_index], entry.replacement});
    }
  }
  out.append(input.substr(pos));
  return out;
}

std::pair<Transcript, DeidReport> deidentify(const Transcript& transcript, const Roster& roster,
                                             const DeidOptions& options) {
  DeidReport report;
  if (roster.empty()) return {transcript, report};
  auto utterances = transcript.utterances();
  for (auto& u : utterances) {
    if (options.deidentify_speaker_column) {
      u.speaker = deidentify_text(u.speaker, roster, options.case_sensitive,
                                  &report.replacements, u.row_index, DeidField::speaker);
    }
    u.text = deidentify_text(u.text, roster, options.case_sensitive, &report.replacements,
                             u.row_index, DeidField::text);
  }
  return {transcript.with_utterances(std::move(utterances)), std::move(report)};
}

std::string deid_report_csv(const std::vector<std::pair<std::string, DeidReport>>& reports) {
  std::ostringstream out;
  csv::write_row(out, {"source_id", "row_index", "field", "span_start", "span_end",
                       "matched_variant", "replacement"});
  for (const auto& [source_id, report] : reports) {
    for (const auto& r : report.replacements) {
      csv::write_row(out, {source_id, std::to_string(r.row_index),
                           r.field == DeidField::text ? "text" : "speaker",
                           std::to_string(r.span_start), std::to_string(r.span_end),
                           r.matched_variant, r.replacement});
    }
  }
  return out.str();
}

Transcript merge_consecutive(const Transcript& transcript, std::string_view separator) {
  const auto& in = transcript.utterances();
  std::vector<Utterance> out;
  std::vector<std::size_t> run_first;
  std::vector<std::size_t> run_length;
  for (const auto& u : in) {
    if (!out.empty() && out.back().speaker == u.speaker) {
      auto& run = out.back();
      run.text.append(separator);
      run.text.append(u.text);
      run.end_time = u.end_time;
      ++run_length.back();
      continue;
    }
    Utterance merged = u;
    merged.row_index = out.size();
    out.push_back(std::move(merged));
    run_first.push_back(u.row_index);
    run_length.push_back(1);
  }
  if (out.size() == in.size()) return transcript;

  // Rows that absorbed others lose their annotations; singletons keep them.
  Transcript merged = transcript.with_rows_reset(std::move(out));
  for (const auto& source : transcript.columns()) {
    Column column{source.name, source.domain, std::vector<Value>(run_first.size())};
    for (std::size_t r = 0; r < run_first.size(); ++r) {
      if (run_length[r] == 1) column.values[r] = source.values[run_first[r]];
    }
    merged = merged.with_column(std::move(column));
  }
  return merged;
}

namespace {

std::string strip(std::string_view s) {
  const auto cps = text::decode(s);
  std::size_t b = 0, e = cps.size();
  while (b < e && text::is_whitespace(cps[b].value)) ++b;
  while (e > b && text::is_whitespace(cps[e - 1].value)) --e;
  if (b == e) return {};
  const std::size_t end_byte = cps[e - 1].byte_offset + cps[e - 1].byte_length;
  return std::string(s.substr(cps[b].byte_offset, end_byte - cps[b].byte_offset));
}

std::string collapse_internal(std::string_view s) {
  const auto cps = text::decode(s);
  std::size_t b = 0, e = cps.size();
  while (b < e && text::is_whitespace(cps[b].value)) ++b;
  while (e > b && text::is_whitespace(cps[e - 1].value)) --e;
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const auto& cp = cps[i];
    if (i >= b && i < e && text::is_whitespace(cp.value)) {
      if (i == b || !text::is_whitespace(cps[i - 1].value)) out.push_back(' ');
      continue;
    }
    out.append(s.substr(cp.byte_offset, cp.byte_length));
  }
  return out;
}

bool is_sentence_end(char32_t c) { return c == U'.' || c == U'?' || c == U'!'; }

std::string capitalize_sentences(std::string_view s) {
  const auto cps = text::decode(s);
  std::string out;
  out.reserve(s.size());
  bool at_start = true;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i].value;
    if (at_start && !text::is_whitespace(c)) {
      at_start = false;
      if (u_islower(static_cast<UChar32>(c))) {
        text::append_utf8(out, static_cast<char32_t>(u_toupper(static_cast<UChar32>(c))));
        continue;
      }
    }
    out.append(s.substr(cps[i].byte_offset, cps[i].byte_length));
    if (is_sentence_end(c) && i + 1 < cps.size() && text::is_whitespace(cps[i + 1].value)) {
      at_start = true;
    }
  }
  return out;
}

}  // namespace

std::string normalize_text(std::string_view input, const NormalizeOptions& options) {
  std::string s(input);
  if (options.strip_whitespace) s = strip(s);
  if (options.collapse_internal_spaces) s = collapse_internal(s);
  if (options.capitalize_sentence_start) s = capitalize_sentences(s);
  return s;
}

Transcript normalize_text(const Transcript& transcript, const NormalizeOptions& options) {
  auto utterances = transcript.utterances();
  for (auto& u : utterances) u.text = normalize_text(u.text, options);
  return transcript.with_utterances(std::move(utterances));
}

}  // namespace classtalk
