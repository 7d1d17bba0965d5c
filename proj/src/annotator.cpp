#include "classtalk/annotator.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "classtalk/errors.hpp"
#include "classtalk/feature_catalog.hpp"
#include "classtalk/text.hpp"
#include "classtalk/transcript_io.hpp"

namespace classtalk {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::teacher:
      return "teacher";
    case Role::student:
      return "student";
    case Role::other:
      return "other";
  }
  return "other";
}

Role parse_role(std::string_view name) {
  if (name == "teacher") return Role::teacher;
  if (name == "student") return Role::student;
  if (name == "other") return Role::other;
  throw ConfigError("unknown role '" + std::string(name) + "' (expected teacher, student or other)");
}

RoleMap parse_role_map(std::string_view json) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("role map is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("role map must be a JSON object");
  RoleMap roles;
  for (const auto& [speaker, role] : doc.items()) {
    if (!role.is_string()) throw ParseError("role of speaker '" + speaker + "' must be a string");
    roles.emplace(speaker, parse_role(role.get<std::string>()));
  }
  return roles;
}

RoleMap load_role_map(const std::filesystem::path& path) {
  return parse_role_map(read_file(path));
}

std::set<std::string> speakers_with_role(const RoleMap& roles, Role role) {
  std::set<std::string> out;
  for (const auto& [speaker, r] : roles) {
    if (r == role) out.insert(speaker);
  }
  return out;
}

GatingRule RoleGate::resolve(const RoleMap& roles) const {
  GatingRule rule;
  if (speaker_role) rule.speaker_allowlist = speakers_with_role(roles, *speaker_role);
  rule.min_words = min_words;
  if (predecessor) {
    rule.predecessor =
        PredecessorRequirement{speakers_with_role(roles, predecessor->role), predecessor->min_words};
  }
  return rule;
}

std::vector<FeatureSpec> builtin_feature_specs() {
  using namespace catalog;
  auto classifier = [](std::string_view name, RoleGate gate) {
    FeatureSpec spec;
    spec.name = std::string(name);
    spec.value_domain = ValueDomain::labels(*label_count(name));
    spec.label_names = label_names(name);
    spec.gate = gate;
    spec.backend = FeatureBackend::classifier;
    return spec;
  };
  std::vector<FeatureSpec> specs;
  specs.push_back({std::string(kTalkTime), ValueDomain::numeric(), {}, {}, FeatureBackend::native});
  specs.push_back(
      {std::string(kMathDensity), ValueDomain::numeric(), {}, {}, FeatureBackend::native});
  specs.push_back(classifier(kStudentReasoning, {Role::student, 8, std::nullopt}));
  specs.push_back(classifier(kFocusingQuestion, {Role::teacher, std::nullopt, std::nullopt}));
  specs.push_back(classifier(kTeacherTalkMoves, {Role::teacher, std::nullopt, std::nullopt}));
  specs.push_back(classifier(kStudentTalkMoves, {Role::student, std::nullopt, std::nullopt}));
  specs.push_back(
      classifier(kUptake, {Role::teacher, std::nullopt, RoleGate::Predecessor{Role::student, 5}}));
  return specs;
}

FeatureSpec builtin_feature_spec(std::string_view name) {
  for (auto& spec : builtin_feature_specs()) {
    if (spec.name == name) return spec;
  }
  std::string valid;
  for (const auto& n : catalog::feature_names()) {
    if (!valid.empty()) valid += ", ";
    valid += n;
  }
  throw ConfigError("unknown feature '" + std::string(name) + "'; valid features: " + valid);
}

Lexicon::Lexicon(const std::vector<std::string>& terms, std::string source_path)
    : source_path_(std::move(source_path)) {
  for (const auto& t : terms) {
    auto norm = text::normalize_spaces(text::to_lower(t));
    if (!norm.empty()) terms_.insert(std::move(norm));
  }
}

Lexicon Lexicon::parse(std::string_view contents, std::string source_path) {
  std::vector<std::string> terms;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    auto nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    auto line = text::normalize_spaces(contents.substr(pos, nl - pos));
    if (!line.empty() && line.front() != '#') terms.push_back(std::move(line));
    pos = nl + 1;
  }
  return Lexicon(terms, std::move(source_path));
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

Transcript annotate_talk_time(const Transcript& transcript) {
  Column words{std::string(catalog::kTalkTimeWordsColumn), ValueDomain::numeric(), {}};
  words.values.reserve(transcript.size());
  for (const auto& u : transcript.utterances()) {
    words.values.emplace_back(static_cast<double>(text::word_count(u.text)));
  }
  auto out = transcript.with_column(std::move(words));
  if (!transcript.mapping().has_times()) return out;

  Column seconds{std::string(catalog::kTalkTimeSecondsColumn), ValueDomain::numeric(), {}};
  seconds.values.reserve(transcript.size());
  for (const auto& u : transcript.utterances()) {
    if (u.start_time && u.end_time) {
      seconds.values.emplace_back(*u.end_time - *u.start_time);
    } else {
      seconds.values.emplace_back();
    }
  }
  return out.with_column(std::move(seconds));
}

std::size_t math_term_count(std::string_view utterance, const Lexicon& lexicon) {
  if (lexicon.empty()) throw ConfigError("math lexicon is empty");
  const std::vector<std::string> terms(lexicon.terms().begin(), lexicon.terms().end());
  return text::PhraseMatcher(terms, false).find_all(utterance).size();
}

Transcript annotate_math_density(const Transcript& transcript, const Lexicon& lexicon) {
  if (lexicon.empty()) throw ConfigError("math lexicon is empty");
  const std::vector<std::string> terms(lexicon.terms().begin(), lexicon.terms().end());
  const text::PhraseMatcher matcher(terms, false);
  Column column{std::string(catalog::kMathDensity), ValueDomain::numeric(), {}};
  column.values.reserve(transcript.size());
  for (const auto& u : transcript.utterances()) {
    column.values.emplace_back(static_cast<double>(matcher.find_all(u.text).size()));
  }
  return transcript.with_column(std::move(column));
}

std::vector<bool> compute_gate(const Transcript& transcript, const GatingRule& rule) {
  const auto& rows = transcript.utterances();
  std::vector<std::size_t> words(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) words[i] = text::word_count(rows[i].text);

  std::vector<bool> mask(rows.size(), false);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rule.speaker_allowlist && !rule.speaker_allowlist->contains(rows[i].speaker)) continue;
    if (rule.min_words && words[i] < *rule.min_words) continue;
    if (rule.predecessor) {
      if (i == 0) continue;
      if (!rule.predecessor->speaker_allowlist.contains(rows[i - 1].speaker)) continue;
      if (words[i - 1] < rule.predecessor->min_words) continue;
    }
    mask[i] = true;
  }
  return mask;
}

Transcript annotate_with_classifier(const Transcript& transcript, const FeatureSpec& feature,
                                    const RoleMap& roles, ClassifierBackend& backend) {
  if (feature.backend != FeatureBackend::classifier) {
    throw ConfigError("feature '" + feature.name + "' is not classifier-backed");
  }
  const auto inventory = backend.inventory();
  if (std::find(inventory.begin(), inventory.end(), feature.name) == inventory.end()) {
    throw ConfigError("classifier backend does not serve feature '" + feature.name + "'");
  }

  const auto rule = feature.gate.resolve(roles);
  const auto mask = compute_gate(transcript, rule);
  ClassifierRequest request{feature.name, {}};
  std::vector<RowKey> keys;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    ClassifierItem item{transcript[i].text, std::nullopt};
    if (rule.predecessor) item.context = transcript[i - 1].text;
    request.items.push_back(std::move(item));
    keys.push_back({transcript.source_id(), i});
    rows.push_back(i);
  }

  Column labels{feature.name, feature.value_domain, std::vector<Value>(transcript.size())};
  Column scores{feature.name + std::string(catalog::kScoreSuffix), ValueDomain::numeric(),
                std::vector<Value>(transcript.size())};
  if (!request.items.empty()) {
    const auto response = backend.classify(request, keys);
    validate_response(request, response, feature.value_domain.label_count);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      labels.values[rows[k]] = static_cast<double>(response.labels[k]);
      scores.values[rows[k]] = response.scores[k];
    }
  }
  return transcript.with_column(std::move(labels)).with_column(std::move(scores));
}

}  // namespace classtalk
