#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "classtalk/annotator.hpp"
#include "classtalk/inference_client.hpp"
#include "classtalk/llm_analyzer.hpp"
#include "classtalk/preprocessor.hpp"
#include "classtalk/transcript.hpp"
#include "classtalk/transcript_io.hpp"

namespace classtalk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

// Run artifacts written next to outputs; directory inputs skip them.
inline constexpr std::string_view kManifestName = "manifest.json";
inline constexpr std::string_view kDeidReportName = "deid_report.csv";

struct LlmSettings {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  PromptParams params;
};

struct RunConfig {
  ColumnMapping column_mapping;
  std::optional<std::filesystem::path> roster_path;
  std::optional<std::filesystem::path> lexicon_path;
  std::optional<std::filesystem::path> role_map_path;
  std::optional<std::string> classifier_endpoint;
  std::optional<std::filesystem::path> precomputed_path;
  ClientLimits limits;
  LlmSettings llm;
  FormatOptions format_options;
  DeidOptions deid;
  NormalizeOptions normalize{true, true, false};
  std::string separator = " ";
  std::optional<std::filesystem::path> output_dir;
  std::optional<FileFormat> format;
  std::size_t jobs = 1;
};

// INI-style document with [columns], [paths], [classifier], [preprocess],
// [llm] and [run] sections. Relative paths resolve against the file's
// directory. Throws ConfigError on unknown keys or bad values.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& contents, const std::filesystem::path& base_dir);

// Transcript files named by `inputs`: files as given, directories expanded
// (non-recursively) to their .csv/.json entries in name order, minus run
// artifacts.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& inputs);

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace classtalk::cli
