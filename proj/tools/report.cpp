#include "report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "ppcalc/errors.hpp"

#ifndef PPCALC_VERSION
#define PPCALC_VERSION "0.0.0"
#endif

namespace ppcalc::app {

std::string module_version() { return PPCALC_VERSION; }

json mc_value(double value, double std_error, std::size_t draws, double truncation_bound) {
  return {{"value", value}, {"std_error", std_error}, {"draws", draws}, {"truncation_bound", truncation_bound}};
}

json make_report(const std::string& command, std::uint64_t seed, const json& inputs) {
  json r;
  r["schema"] = 1;
  r["module"] = "ppcalc";
  r["module_version"] = module_version();
  r["command"] = command;
  r["seed"] = seed;
  r["inputs"] = inputs;
  r["results"] = json::object();
  r["files"] = json::array();
  return r;
}

void set_run_info(json& report, int threads, double elapsed_seconds) {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  report["run_info"] = {{"timestamp", buf}, {"threads", threads}, {"elapsed_seconds", elapsed_seconds}};
}

std::string deterministic_dump(const json& report) {
  json copy = report;
  copy.erase("run_info");
  return copy.dump(2);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cli", "write", "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("cli", "write", "write failed for " + path.string());
}

void write_report(const std::filesystem::path& path, const json& report) { write_text(path, report.dump(2) + "\n"); }

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + quote(header[i]);
  text_ += "\r\n";
}

CsvWriter& CsvWriter::row(std::vector<std::string> fields) {
  if (fields.size() != width_) throw ConfigError("cli", "csv", "row width does not match the header");
  for (std::size_t i = 0; i < fields.size(); ++i) text_ += (i ? "," : "") + quote(fields[i]);
  text_ += "\r\n";
  ++rows_;
  return *this;
}

std::string CsvWriter::str() const { return text_; }

void CsvWriter::save(const std::filesystem::path& path) const { write_text(path, text_); }

std::string CsvWriter::quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string CsvWriter::num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

}  // namespace ppcalc::app
