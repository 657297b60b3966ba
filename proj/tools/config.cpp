#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ppcalc/errors.hpp"

namespace ppcalc::app {

namespace {

[[noreturn]] void bad(const std::string& op, const std::string& msg) { throw ConfigError("cli", op, msg); }

const json* find(const json& cfg, const std::string& key) {
  if (!cfg.is_object()) return nullptr;
  auto it = cfg.find(key);
  if (it == cfg.end() || it->is_null()) return nullptr;
  return &*it;
}

double to_number(const std::string& tok, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    bad("parse", what + ": '" + tok + "' is not a number");
  }
}

std::vector<std::string> tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t' || c == ':' || c == ';') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// One RFC 4180 record per call; false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      ++line;
      fields.push_back(field);
      return true;
    } else {
      field += c;
    }
  }
  if (quoted) throw InputError("cli", "read_csv", "unterminated quote near line " + std::to_string(line));
  if (!any) return false;
  fields.push_back(field);
  return true;
}

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               const std::vector<std::vector<std::string>>& headers,
                                               std::vector<std::string>& header_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cli", "read_csv", "cannot open " + path.string());
  std::vector<std::string> rec;
  std::size_t line = 1;
  if (!read_record(in, rec, line)) throw InputError("cli", "read_csv", path.string() + " is empty");
  for (auto& f : rec) f = trim(f);
  if (!rec.empty() && rec[0].rfind("\xEF\xBB\xBF", 0) == 0) rec[0] = rec[0].substr(3);
  bool ok = false;
  for (const auto& h : headers) ok = ok || rec == h;
  if (!ok) throw InputError("cli", "read_csv", path.string() + ": unexpected header");
  header_out = rec;
  std::vector<std::vector<std::string>> rows;
  while (read_record(in, rec, line)) {
    if (rec.size() == 1 && trim(rec[0]).empty()) continue;
    if (rec.size() != header_out.size())
      throw InputError("cli", "read_csv", path.string() + ": wrong field count near line " + std::to_string(line));
    for (auto& f : rec) f = trim(f);
    rows.push_back(rec);
  }
  if (rows.empty()) throw InputError("cli", "read_csv", path.string() + " has no data rows");
  return rows;
}

}  // namespace

json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cli", "load_config", "cannot open " + path.string());
  try {
    json cfg = json::parse(in);
    if (!cfg.is_object()) bad("load_config", "config must be a JSON object");
    return cfg;
  } catch (const json::parse_error& e) {
    bad("load_config", path.string() + ": " + e.what());
  }
}

double get_double(const json& cfg, const std::string& key, double fallback) {
  const json* v = find(cfg, key);
  if (!v) return fallback;
  if (v->is_number()) return v->get<double>();
  if (v->is_string()) return to_number(v->get<std::string>(), key);
  bad("config", key + " must be a number");
}

double require_double(const json& cfg, const std::string& key) {
  if (!find(cfg, key)) bad("config", "missing required parameter " + key);
  return get_double(cfg, key, 0.0);
}

int get_int(const json& cfg, const std::string& key, int fallback) {
  const json* v = find(cfg, key);
  if (!v) return fallback;
  double d = get_double(cfg, key, 0.0);
  if (d != std::floor(d) || std::fabs(d) > 1e9) bad("config", key + " must be an integer");
  return static_cast<int>(d);
}

std::string get_string(const json& cfg, const std::string& key, const std::string& fallback) {
  const json* v = find(cfg, key);
  if (!v) return fallback;
  if (!v->is_string()) bad("config", key + " must be a string");
  return v->get<std::string>();
}

bool get_bool(const json& cfg, const std::string& key, bool fallback) {
  const json* v = find(cfg, key);
  if (!v) return fallback;
  if (!v->is_boolean()) bad("config", key + " must be true or false");
  return v->get<bool>();
}

std::vector<double> get_doubles(const json& cfg, const std::string& key) {
  const json* v = find(cfg, key);
  if (!v) return {};
  if (v->is_string()) return parse_number_list(v->get<std::string>());
  if (v->is_number()) return {v->get<double>()};
  if (!v->is_array()) bad("config", key + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& x : *v) {
    if (!x.is_number()) bad("config", key + " must be a list of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& t : tokens(text)) out.push_back(to_number(t, "list"));
  return out;
}

json parse_base_spec(const json& spec) {
  if (spec.is_object()) {
    std::string type = get_string(spec, "type", "");
    if (type.empty()) bad("base", "base measure needs a type");
    return spec;
  }
  if (!spec.is_string()) bad("base", "base measure must be a string or an object");
  auto t = tokens(spec.get<std::string>());
  if (t.empty()) bad("base", "empty base measure");
  json out;
  out["type"] = t[0];
  if (t[0] == "uniform") {
    if (t.size() != 3) bad("base", "uniform needs: uniform a b");
    out["a"] = to_number(t[1], "uniform a");
    out["b"] = to_number(t[2], "uniform b");
  } else if (t[0] == "exponential") {
    if (t.size() != 2) bad("base", "exponential needs: exponential rate");
    out["rate"] = to_number(t[1], "exponential rate");
  } else if (t[0] == "piecewise") {
    if (t.size() < 4 || t.size() % 2 != 0) bad("base", "piecewise needs: piecewise e0 d0 e1 d1 ... eK");
    std::vector<double> edges, dens;
    for (std::size_t i = 1; i < t.size(); ++i)
      ((i % 2) ? edges : dens).push_back(to_number(t[i], "piecewise"));
    out["edges"] = edges;
    out["density"] = dens;
  } else {
    bad("base", "unknown base measure '" + t[0] + "' (uniform, exponential, piecewise)");
  }
  return out;
}

BaseMeasure make_base(const json& raw, double mass) {
  json spec = parse_base_spec(raw);
  std::string type = get_string(spec, "type", "");
  BaseMeasure m = BaseMeasure::uniform(0.0, 1.0, 1.0);
  if (type == "uniform") {
    double a = require_double(spec, "a"), b = require_double(spec, "b");
    m = BaseMeasure::uniform(a, b, mass > 0 ? mass : b - a);
    return m;
  }
  if (type == "exponential") {
    m = BaseMeasure::exponential(require_double(spec, "rate"), mass > 0 ? mass : 1.0);
    return m;
  }
  if (type == "piecewise") {
    auto edges = get_doubles(spec, "edges");
    auto dens = get_doubles(spec, "density");
    m = BaseMeasure::piecewise(edges, dens);
    if (mass > 0) m = m.scaled(mass / m.total_mass());
    return m;
  }
  bad("base", "unknown base measure '" + type + "' (uniform, exponential, piecewise)");
}

LevyIntensity make_intensity(const json& model, const BaseMeasure& base) {
  std::string fam = get_string(model, "family", "gamma");
  if (fam == "gamma") return LevyIntensity::gamma_process(base, get_double(model, "b", 1.0));
  if (fam == "gg") return LevyIntensity::generalized_gamma(require_double(model, "alpha"), get_double(model, "b", 1.0), base);
  if (fam == "ig") return LevyIntensity::generalized_gamma(0.5, get_double(model, "b", 1.0), base);
  if (fam == "stable") return LevyIntensity::stable(require_double(model, "alpha"), base);
  bad("model", "unknown intensity family '" + fam + "' (gamma, gg, ig, stable)");
}

Functional parse_functional(const std::string& spec) {
  auto t = tokens(spec);
  if (t.empty()) bad("functional", "empty functional");
  if (t[0] == "indicator" && t.size() == 3)
    return Functional::indicator(to_number(t[1], "indicator"), to_number(t[2], "indicator"));
  if (t[0] == "identity" && t.size() == 1) return Functional::identity();
  if (t[0] == "constant" && t.size() == 2) return Functional::constant(to_number(t[1], "constant"));
  if (t[0] == "power" && t.size() == 2) {
    double p = to_number(t[1], "power");
    return {[p](double y) { return std::pow(y, p); }, {}, "power " + t[1]};
  }
  bad("functional", "unknown functional '" + spec + "' (indicator lo hi, identity, constant c, power p)");
}

std::vector<double> read_events_csv(const std::filesystem::path& path) {
  std::vector<std::string> header;
  auto rows = read_csv(path, {{"time"}}, header);
  std::vector<double> out;
  for (const auto& r : rows) {
    double t = to_number(r[0], "time");
    if (!std::isfinite(t)) throw InputError("cli", "read_events", "non-finite event time");
    out.push_back(t);
  }
  return out;
}

SurvivalDataset read_survival_csv(const std::filesystem::path& path) {
  std::vector<std::string> header;
  auto rows = read_csv(path, {{"time", "event"}, {"time", "event", "mark"}}, header);
  std::vector<SurvivalRecord> recs;
  for (const auto& r : rows) {
    SurvivalRecord rec;
    rec.time = to_number(r[0], "time");
    if (!(rec.time > 0.0) || !std::isfinite(rec.time))
      throw InputError("cli", "read_survival", "times must be positive and finite");
    if (r[1] != "0" && r[1] != "1") throw InputError("cli", "read_survival", "event must be 0 or 1");
    rec.event = r[1] == "1";
    if (r.size() == 3 && !r[2].empty()) rec.mark = to_number(r[2], "mark");
    recs.push_back(rec);
  }
  return SurvivalDataset(std::move(recs));
}

}  // namespace ppcalc::app
