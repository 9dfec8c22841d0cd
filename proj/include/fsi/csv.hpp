#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fsi {

/// Parsed comma-separated file: a header line followed by rows of equal width.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position of `name`; throws InputError when absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

/// Reads a CSV file without quoting support. Blank lines are skipped and
/// fields are trimmed. Throws InputError on unreadable files or ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

/// Parses a finite or non-finite double; throws InputError naming `context`.
double parse_double(const std::string& field, const std::string& context);

/// Shortest representation that round-trips; "nan", "inf", "-inf" otherwise.
std::string format_double(double value);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
  std::size_t width_;
  std::filesystem::path path_;
};

}  // namespace fsi
