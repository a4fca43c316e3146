#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace l96::cli {

using Json = nlohmann::ordered_json;

// Shortest round-trip form with 17 significant digits.
std::string format_real(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(const std::string& v);
  CsvWriter& empty();
  void end_row();

  const std::string& str() const { return buf_; }

 private:
  void sep();

  std::string buf_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

std::string sha256_hex(const std::string& data);

// Collects output files of one run and writes manifest.json next to them.
class Manifest {
 public:
  Manifest(std::string command, std::filesystem::path dir);

  Json& parameters() { return params_; }
  Json& results() { return results_; }

  void write_file(const std::string& name, const std::string& content);
  void finish(double wall_clock_seconds);

 private:
  std::string command_;
  std::filesystem::path dir_;
  Json params_ = Json::object();
  Json results_ = Json::object();
  Json outputs_ = Json::array();
};

}  // namespace l96::cli
