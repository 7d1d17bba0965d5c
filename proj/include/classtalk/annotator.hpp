#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "classtalk/inference_client.hpp"
#include "classtalk/transcript.hpp"

namespace classtalk {

enum class Role { teacher, student, other };

std::string_view to_string(Role r);
// Throws ConfigError for anything but teacher/student/other.
Role parse_role(std::string_view name);

// Speaker label -> role. Speakers absent from the map count as "other".
using RoleMap = std::map<std::string, Role, std::less<>>;

// JSON object {speaker label: "teacher"|"student"|"other"}.
RoleMap parse_role_map(std::string_view json);
RoleMap load_role_map(const std::filesystem::path& path);

// Speakers that `roles` assigns to `role`.
std::set<std::string> speakers_with_role(const RoleMap& roles, Role role);

struct PredecessorRequirement {
  std::set<std::string> speaker_allowlist;
  std::size_t min_words = 0;
};

// Eligibility predicate over (utterance, predecessor, speaker set).
struct GatingRule {
  std::optional<std::set<std::string>> speaker_allowlist;
  std::optional<std::size_t> min_words;
  std::optional<PredecessorRequirement> predecessor;
};

// Role-level form of GatingRule used by the builtin specs; resolved against a
// RoleMap at run time.
struct RoleGate {
  struct Predecessor {
    Role role;
    std::size_t min_words = 0;
  };
  std::optional<Role> speaker_role;
  std::optional<std::size_t> min_words;
  std::optional<Predecessor> predecessor;

  GatingRule resolve(const RoleMap& roles) const;
};

enum class FeatureBackend { native, classifier };

struct FeatureSpec {
  std::string name;
  ValueDomain value_domain;
  std::map<int, std::string> label_names;
  RoleGate gate;
  FeatureBackend backend = FeatureBackend::native;
};

// The seven builtin features, in canonical order.
std::vector<FeatureSpec> builtin_feature_specs();

// Throws ConfigError listing valid names when `name` is unknown.
FeatureSpec builtin_feature_spec(std::string_view name);

class Lexicon {
 public:
  Lexicon() = default;
  // Terms are lowercased and whitespace-normalized; blanks are dropped.
  Lexicon(const std::vector<std::string>& terms, std::string source_path = {});

  // One term per line; '#' lines ignored, surrounding whitespace trimmed.
  static Lexicon parse(std::string_view contents, std::string source_path = {});
  static Lexicon load(const std::filesystem::path& path);

  const std::set<std::string>& terms() const { return terms_; }
  const std::string& source_path() const { return source_path_; }
  bool empty() const { return terms_.empty(); }

 private:
  std::set<std::string> terms_;
  std::string source_path_;
};

// Adds talktime_words, plus talktime_seconds when the mapping has both time
// columns (null on rows missing either time).
Transcript annotate_talk_time(const Transcript& transcript);

// Count of whole-word, case-insensitive lexicon term occurrences per
// utterance; longest term wins at each position. Throws ConfigError on an
// empty lexicon.
std::size_t math_term_count(std::string_view text, const Lexicon& lexicon);
Transcript annotate_math_density(const Transcript& transcript, const Lexicon& lexicon);

std::vector<bool> compute_gate(const Transcript& transcript, const GatingRule& rule);

// Labels eligible utterances through `backend` and writes the `name` and
// `name_score` columns; ineligible rows get null. The backend sees eligible
// rows only, in row order; features with a predecessor gate send the
// predecessor text as context. Throws ConfigError when the backend does not
// serve the feature; transport/protocol errors propagate and leave no
// partial columns.
Transcript annotate_with_classifier(const Transcript& transcript, const FeatureSpec& feature,
                                    const RoleMap& roles, ClassifierBackend& backend);

}  // namespace classtalk
