#include "lagcast/csv.hpp"

#include <fstream>
#include <sstream>

#include "lagcast/error.hpp"
#include "lagcast/text.hpp"

namespace lagcast {

CsvTable parse_csv(std::string_view text, std::string_view source) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      fail(ErrorKind::ParseError, std::string(source) + " line " + std::to_string(line_no) + ": expected " +
                                      std::to_string(table.header.size()) + " fields, got " +
                                      std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) fail(ErrorKind::ParseError, std::string(source) + ": empty file, header expected");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path), path.string()); }

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto append_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  };
  append_row(table.header);
  for (const auto& row : table.rows) append_row(row);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace lagcast
