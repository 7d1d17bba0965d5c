#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "classtalk/transcript.hpp"

namespace classtalk::catalog {

inline constexpr std::string_view kTalkTime = "talktime";
inline constexpr std::string_view kMathDensity = "math_density";
inline constexpr std::string_view kStudentReasoning = "student_reasoning";
inline constexpr std::string_view kFocusingQuestion = "focusing_question";
inline constexpr std::string_view kTeacherTalkMoves = "teacher_talk_moves";
inline constexpr std::string_view kStudentTalkMoves = "student_talk_moves";
inline constexpr std::string_view kUptake = "uptake";

inline constexpr std::string_view kTalkTimeWordsColumn = "talktime_words";
inline constexpr std::string_view kTalkTimeSecondsColumn = "talktime_seconds";
inline constexpr std::string_view kScoreSuffix = "_score";

// All builtin feature names, in canonical order.
const std::vector<std::string>& feature_names();

// The five classifier-backed features.
const std::vector<std::string>& classifier_feature_names();

bool is_classifier_feature(std::string_view feature);

// Label count of a classifier feature; nullopt for unknown/native names.
std::optional<int> label_count(std::string_view feature);

// Human-readable label names of a classifier feature (empty when unknown).
const std::map<int, std::string>& label_names(std::string_view feature);

// Domain of an annotation column written by a builtin feature, if the name is
// one of those columns.
std::optional<ValueDomain> column_domain(std::string_view column);

// Builtin feature that produces `column`, if any.
std::optional<std::string> feature_for_column(std::string_view column);

}  // namespace classtalk::catalog
