#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppcalc/base_measure.hpp"
#include "ppcalc/levy.hpp"
#include "ppcalc/ntr.hpp"
#include "ppcalc/transforms.hpp"

namespace ppcalc::app {

using nlohmann::json;

json load_config(const std::filesystem::path& path);

// Typed accessors over a merged config; missing keys take the fallback,
// wrong types raise ConfigError naming the key.
double get_double(const json& cfg, const std::string& key, double fallback);
double require_double(const json& cfg, const std::string& key);
int get_int(const json& cfg, const std::string& key, int fallback);
std::string get_string(const json& cfg, const std::string& key, const std::string& fallback);
bool get_bool(const json& cfg, const std::string& key, bool fallback);
std::vector<double> get_doubles(const json& cfg, const std::string& key);

// "uniform a b", "exponential rate", "piecewise e0 d0 e1 d1 ... eK" or the
// JSON object form {"type": ..., ...}. Normalized to a JSON object.
json parse_base_spec(const json& spec);
// A measure with the given total mass (the shape's own mass when mass <= 0).
BaseMeasure make_base(const json& spec, double mass);

// Levy intensity from model.family (gamma, gg, stable) and its parameters.
LevyIntensity make_intensity(const json& model, const BaseMeasure& base);

// "indicator lo hi", "identity", "constant c", "power p".
Functional parse_functional(const std::string& spec);

// Comma or whitespace separated numbers.
std::vector<double> parse_number_list(const std::string& text);

// CSV with header `time`.
std::vector<double> read_events_csv(const std::filesystem::path& path);
// CSV with header `time,event[,mark]`, event in {0,1}.
SurvivalDataset read_survival_csv(const std::filesystem::path& path);

}  // namespace ppcalc::app
