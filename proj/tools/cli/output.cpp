#include "output.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "version.hpp"

namespace l96::cli {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += header[i];
  }
  buf_ += '\n';
}

void CsvWriter::sep() {
  if (filled_++) buf_ += ',';
}

CsvWriter& CsvWriter::cell(double v) {
  sep();
  buf_ += format_real(v);
  return *this;
}

CsvWriter& CsvWriter::cell(long long v) {
  sep();
  buf_ += std::to_string(v);
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& v) {
  sep();
  if (v.find_first_of(",\"\n") == std::string::npos) {
    buf_ += v;
    return *this;
  }
  buf_ += '"';
  for (char c : v) {
    if (c == '"') buf_ += '"';
    buf_ += c;
  }
  buf_ += '"';
  return *this;
}

CsvWriter& CsvWriter::empty() {
  sep();
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) {
    throw std::logic_error("csv row has " + std::to_string(filled_) + " cells, header has " +
                           std::to_string(columns_));
  }
  buf_ += '\n';
  filled_ = 0;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

Manifest::Manifest(std::string command, std::filesystem::path dir)
    : command_(std::move(command)), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void Manifest::write_file(const std::string& name, const std::string& content) {
  const auto path = dir_ / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw std::runtime_error("failed writing " + path.string());
  outputs_.push_back({{"file", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
}

void Manifest::finish(double wall_clock_seconds) {
  Json m;
  m["command"] = command_;
  m["version"] = kVersion;
  m["parameters"] = params_;
  if (!results_.empty()) m["results"] = results_;
  m["wall_clock_seconds"] = wall_clock_seconds;
  m["outputs"] = outputs_;
  std::ofstream f(dir_ / "manifest.json", std::ios::binary);
  f << m.dump(2) << '\n';
  if (!f) throw std::runtime_error("failed writing manifest");
}

}  // namespace l96::cli
