#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "classtalk/transcript.hpp"

namespace classtalk {

struct RosterEntry {
  std::vector<std::string> name_variants;
  std::string replacement;
};

class Roster {
 public:
  Roster() = default;
  // Throws ConfigError for an entry without variants or with an empty
  // variant.
  explicit Roster(std::vector<RosterEntry> entries);

  // JSON array of {"names": [...], "replacement": "..."}.
  static Roster from_json(std::string_view json);
  static Roster load(const std::filesystem::path& path);

  const std::vector<RosterEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  // Human-readable notes, e.g. two entries sharing one replacement.
  std::vector<std::string> warnings() const;

 private:
  std::vector<RosterEntry> entries_;
};

enum class DeidField { text, speaker };

struct Replacement {
  std::size_t row_index = 0;
  DeidField field = DeidField::text;
  std::size_t span_start = 0;  // byte offsets into the original string
  std::size_t span_end = 0;
  std::string matched_variant;
  std::string replacement;
};

struct DeidReport {
  std::vector<Replacement> replacements;
  std::size_t total_count() const { return replacements.size(); }
};

struct DeidOptions {
  bool case_sensitive = false;
  bool deidentify_speaker_column = false;
};

// Replaces whole-word roster name occurrences with the owning entry's
// replacement (longest variant first, left to right, no overlaps).
std::pair<Transcript, DeidReport> deidentify(const Transcript& transcript, const Roster& roster,
                                             const DeidOptions& options = {});

// Same replacement rule on one string; `report_row` tags report entries.
std::string deidentify_text(std::string_view text, const Roster& roster, bool case_sensitive,
                            std::vector<Replacement>* report = nullptr,
                            std::size_t report_row = 0,
                            DeidField field = DeidField::text);

// CSV with header source_id,row_index,field,span_start,span_end,matched_variant,replacement.
std::string deid_report_csv(const std::vector<std::pair<std::string, DeidReport>>& reports);

inline constexpr std::string_view kDefaultSeparator = " ";

// Collapses runs of consecutive same-speaker utterances. Annotation columns
// are kept but reset to null, since their unit changed.
Transcript merge_consecutive(const Transcript& transcript,
                             std::string_view separator = kDefaultSeparator);

struct NormalizeOptions {
  bool strip_whitespace = false;
  bool collapse_internal_spaces = false;
  bool capitalize_sentence_start = false;
};

std::string normalize_text(std::string_view text, const NormalizeOptions& options);
Transcript normalize_text(const Transcript& transcript, const NormalizeOptions& options);

}  // namespace classtalk
