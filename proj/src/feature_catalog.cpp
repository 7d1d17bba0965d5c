#include "classtalk/feature_catalog.hpp"

#include <algorithm>

namespace classtalk::catalog {

namespace {

const std::map<int, std::string> kBinaryLabels = {{0, "No"}, {1, "Yes"}};

const std::map<int, std::string> kTeacherMoveLabels = {
    {0, "No Talk Move Detected"},
    {1, "Keeping Everyone Together"},
    {2, "Getting Students to Relate to Another Student's Idea"},
    {3, "Restating"},
    {4, "Revoicing"},
    {5, "Pressing for Accuracy"},
    {6, "Pressing for Reasoning"},
};

const std::map<int, std::string> kStudentMoveLabels = {
    {0, "No Talk Move Detected"},
    {1, "Relating to Another Student"},
    {2, "Asking for More Information"},
    {3, "Making a Claim"},
    {4, "Providing Evidence or Reasoning"},
};

const std::map<int, std::string> kNoLabels;

}  // namespace

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = {
      std::string(kTalkTime),         std::string(kMathDensity),
      std::string(kStudentReasoning), std::string(kFocusingQuestion),
      std::string(kTeacherTalkMoves), std::string(kStudentTalkMoves),
      std::string(kUptake)};
  return names;
}

const std::vector<std::string>& classifier_feature_names() {
  static const std::vector<std::string> names = {
      std::string(kStudentReasoning), std::string(kFocusingQuestion),
      std::string(kTeacherTalkMoves), std::string(kStudentTalkMoves),
      std::string(kUptake)};
  return names;
}

bool is_classifier_feature(std::string_view feature) {
  const auto& names = classifier_feature_names();
  return std::find(names.begin(), names.end(), feature) != names.end();
}

std::optional<int> label_count(std::string_view feature) {
  if (feature == kTeacherTalkMoves) return 7;
  if (feature == kStudentTalkMoves) return 5;
  if (is_classifier_feature(feature)) return 2;
  return std::nullopt;
}

const std::map<int, std::string>& label_names(std::string_view feature) {
  if (feature == kTeacherTalkMoves) return kTeacherMoveLabels;
  if (feature == kStudentTalkMoves) return kStudentMoveLabels;
  if (is_classifier_feature(feature)) return kBinaryLabels;
  return kNoLabels;
}

std::optional<ValueDomain> column_domain(std::string_view column) {
  if (column == kTalkTimeWordsColumn || column == kTalkTimeSecondsColumn ||
      column == kMathDensity) {
    return ValueDomain::numeric();
  }
  if (auto n = label_count(column)) return ValueDomain::labels(*n);
  if (column.size() > kScoreSuffix.size() && column.ends_with(kScoreSuffix) &&
      is_classifier_feature(column.substr(0, column.size() - kScoreSuffix.size()))) {
    return ValueDomain::numeric();
  }
  return std::nullopt;
}

std::optional<std::string> feature_for_column(std::string_view column) {
  if (column == kTalkTimeWordsColumn || column == kTalkTimeSecondsColumn) {
    return std::string(kTalkTime);
  }
  if (column == kMathDensity || is_classifier_feature(column)) return std::string(column);
  if (column.ends_with(kScoreSuffix)) {
    auto base = column.substr(0, column.size() - kScoreSuffix.size());
    if (is_classifier_feature(base)) return std::string(base);
  }
  return std::nullopt;
}

}  // namespace classtalk::catalog
