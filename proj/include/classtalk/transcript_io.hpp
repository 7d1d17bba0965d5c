#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "classtalk/transcript.hpp"

namespace classtalk {

enum class FileFormat { csv, json };

std::string_view to_string(FileFormat f);
// Throws ConfigError for anything other than "csv"/"json".
FileFormat parse_format(std::string_view name);
// From the file extension; nullopt when it is neither .csv nor .json.
std::optional<FileFormat> format_from_path(const std::filesystem::path& path);

// One utterance per row/record, in source order. Unmapped columns become
// pass-through annotation columns, except the names of builtin annotation
// columns, which load as numbers. The source id is the file stem.
//
// Throws IoError (unreadable file), SchemaError (mapped column missing),
// RowError (unparsable time) or ParseError (malformed file).
Transcript load_transcript(const std::filesystem::path& path, FileFormat format,
                           const ColumnMapping& mapping);
Transcript load_transcript(const std::filesystem::path& path, const ColumnMapping& mapping);

Transcript parse_csv_transcript(std::string_view data, const ColumnMapping& mapping,
                                std::string source_id);
Transcript parse_json_transcript(std::string_view data, const ColumnMapping& mapping,
                                 std::string source_id);

std::string serialize_transcript(const Transcript& t, FileFormat format);

// Writes to a sibling temp file and renames it into place. Throws IoError.
void save_transcript(const Transcript& t, const std::filesystem::path& path, FileFormat format);

void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace classtalk
