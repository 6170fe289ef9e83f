#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lagcast {

// Plain comma-separated table: no quoting, '\n' line endings, header row first.
// Fields must not contain commas, quotes or newlines.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Throws Error(ParseError) on ragged rows; `source` names the input in messages.
CsvTable parse_csv(std::string_view text, std::string_view source = "<memory>");
CsvTable read_csv(const std::filesystem::path& path);

std::string to_csv(const CsvTable& table);

std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes: whole content in one stream.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace lagcast
