#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace ppcalc::app {

using nlohmann::json;

std::string module_version();

// Monte Carlo figure with its error bar and truncation bound.
json mc_value(double value, double std_error, std::size_t draws, double truncation_bound = 0.0);

// Report skeleton. Everything outside "run_info" is a pure function of the
// inputs and the seed.
json make_report(const std::string& command, std::uint64_t seed, const json& inputs);
void set_run_info(json& report, int threads, double elapsed_seconds);
// The report with run_info removed, serialized.
std::string deterministic_dump(const json& report);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_report(const std::filesystem::path& path, const json& report);

// RFC 4180 table: fields containing separators, quotes or line breaks are
// quoted, quotes doubled, CRLF line endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& row(std::vector<std::string> fields);
  std::string str() const;
  std::size_t rows() const { return rows_; }
  void save(const std::filesystem::path& path) const;

  static std::string quote(const std::string& field);
  // Shortest round-trip decimal form, locale independent.
  static std::string num(double x);
  static std::string num(long long x) { return std::to_string(x); }

 private:
  std::size_t width_;
  std::size_t rows_ = 0;
  std::string text_;
};

}  // namespace ppcalc::app
