#include "mcid/harness/output.hpp"

#include "mcid/version.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <system_error>

namespace mcid::harness {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::string name, std::initializer_list<std::string_view> header)
    : name_(std::move(name)) {
  for (std::string_view h : header) cell(h);
  columns_ = in_row_;
  end_row();
  rows_ = 0;
}

void CsvTable::separator() {
  if (in_row_ > 0) text_ += ',';
  ++in_row_;
}

CsvTable& CsvTable::cell(double x) {
  separator();
  text_ += format_double(x);
  return *this;
}

CsvTable& CsvTable::cell(long long x) {
  separator();
  text_ += std::to_string(x);
  return *this;
}

CsvTable& CsvTable::cell(std::string_view text) {
  separator();
  text_ += text;
  return *this;
}

CsvTable& CsvTable::empty_cell() {
  separator();
  return *this;
}

void CsvTable::end_row() {
  if (columns_ != 0 && in_row_ != columns_) {
    throw std::logic_error(name_ + ": row has " + std::to_string(in_row_) + " cells, header has "
                           + std::to_string(columns_));
  }
  text_ += '\n';
  in_row_ = 0;
  ++rows_;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: EVP_Digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

std::vector<ManifestEntry> write_run(const std::filesystem::path& dir,
                                     const std::vector<OutputFile>& files,
                                     std::string_view experiment, std::string_view resolved_json,
                                     double wall_seconds) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  // A stale manifest would make a half-written directory look complete.
  std::filesystem::remove(dir / "manifest.json", ec);

  std::vector<ManifestEntry> entries;
  nlohmann::json listed = nlohmann::json::array();
  for (const OutputFile& f : files) {
    write_file(dir / f.name, f.contents);
    ManifestEntry e{f.name, sha256_hex(f.contents), f.contents.size()};
    listed.push_back({{"name", e.name}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    entries.push_back(std::move(e));
  }

  nlohmann::json manifest;
  manifest["tool"] = "mcid";
  manifest["version"] = std::string(kVersion);
  manifest["experiment"] = experiment;
  manifest["config"] = nlohmann::json::parse(resolved_json);
  manifest["files"] = std::move(listed);
  manifest["wall_time_seconds"] = wall_seconds;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return entries;
}

}  // namespace mcid::harness
