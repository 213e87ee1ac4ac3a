#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace mcid::harness {

// Shortest decimal that parses back to the same double; locale independent.
// Non-finite values print as nan, inf, -inf.
std::string format_double(double x);

// Rows are assembled in memory and written once by write_run().
class CsvTable {
 public:
  CsvTable(std::string name, std::initializer_list<std::string_view> header);

  CsvTable& cell(double x);
  CsvTable& cell(long long x);
  CsvTable& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvTable& cell(std::string_view text);
  CsvTable& empty_cell();
  void end_row();

  const std::string& name() const { return name_; }
  const std::string& contents() const { return text_; }
  std::size_t rows() const { return rows_; }

 private:
  void separator();

  std::string name_;
  std::string text_;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
  std::size_t rows_ = 0;
};

struct OutputFile {
  std::string name;
  std::string contents;
};

std::string sha256_hex(std::string_view bytes);

struct ManifestEntry {
  std::string name;
  std::string sha256;
  std::size_t bytes = 0;
};

// Writes every file into `dir`, then manifest.json last. Returns the entries.
std::vector<ManifestEntry> write_run(const std::filesystem::path& dir,
                                     const std::vector<OutputFile>& files,
                                     std::string_view experiment, std::string_view resolved_json,
                                     double wall_seconds);

}  // namespace mcid::harness
