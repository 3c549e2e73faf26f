#include "risthz/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace risthz {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct LineContext {
  std::string origin;
  int line = 0;
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
  }
};

double parse_double(const LineContext& lc, const std::string& key,
                    const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    lc.fail("key '" + key + "': expected a number, got '" + value + "'");
  }
}

int parse_int(const LineContext& lc, const std::string& key,
              const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    lc.fail("key '" + key + "': expected an integer, got '" + value + "'");
  }
}

bool parse_bool(const LineContext& lc, const std::string& key,
                const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  lc.fail("key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<double> parse_list(const LineContext& lc, const std::string& key,
                               const std::string& value) {
  std::string cleaned = value;
  for (auto& c : cleaned)
    if (c == ',') c = ' ';
  std::istringstream in(cleaned);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  std::string rest;
  if (!(in >> rest).eof() || out.empty())
    lc.fail("key '" + key + "': expected a list of numbers, got '" + value + "'");
  return out;
}

Position3D parse_position(const LineContext& lc, const std::string& key,
                          const std::string& value) {
  const auto v = parse_list(lc, key, value);
  if (v.size() != 3)
    lc.fail("key '" + key + "': expected three coordinates, got '" + value + "'");
  return Position3D{v[0], v[1], v[2]};
}

std::vector<std::string> parse_names(const LineContext& lc, const std::string& key,
                                     const std::string& value) {
  std::string cleaned = value;
  for (auto& c : cleaned)
    if (c == ',') c = ' ';
  std::istringstream in(cleaned);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  if (out.empty()) lc.fail("key '" + key + "': expected a list of names");
  return out;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& origin) {
  ScenarioConfig cfg;
  std::set<std::string> seen;
  std::set<std::string> required = {"frequency_ghz", "noise_dbm", "users",
                                    "bs_center"};
  std::map<int, Position3D> user_pos;

  std::istringstream stream(text);
  std::string raw;
  LineContext lc{origin, 0};
  while (std::getline(stream, raw)) {
    ++lc.line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      lc.fail("expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) lc.fail("missing key before '='");
    if (value.empty()) lc.fail("key '" + key + "': missing value");
    if (!seen.insert(key).second) lc.fail("duplicate key '" + key + "'");

    if (key.rfind("user_", 0) == 0 && key != "user_rows" && key != "user_cols") {
      const std::string idx = key.substr(5);
      const int i = parse_int(lc, key, idx);
      if (i < 0) lc.fail("key '" + key + "': user index must be >= 0");
      user_pos[i] = parse_position(lc, key, value);
      continue;
    }

    if (key == "frequency_ghz") cfg.frequency = parse_double(lc, key, value) * 1e9;
    else if (key == "bandwidth_hz") cfg.bandwidth = parse_double(lc, key, value);
    else if (key == "noise_dbm") cfg.noise_dbm = parse_double(lc, key, value);
    else if (key == "users") cfg.users = parse_int(lc, key, value);
    else if (key == "ris_center") cfg.ris_center = parse_position(lc, key, value);
    else if (key == "bs_center") cfg.bs_center = parse_position(lc, key, value);
    else if (key == "bs_rows") cfg.bs_rows = parse_int(lc, key, value);
    else if (key == "bs_cols") cfg.bs_cols = parse_int(lc, key, value);
    else if (key == "bs_grid") cfg.bs_grid = parse_int(lc, key, value);
    else if (key == "ris_rows") cfg.ris_rows = parse_int(lc, key, value);
    else if (key == "ris_cols") cfg.ris_cols = parse_int(lc, key, value);
    else if (key == "ris_grid") cfg.ris_grid = parse_int(lc, key, value);
    else if (key == "user_rows") cfg.user_rows = parse_int(lc, key, value);
    else if (key == "user_cols") cfg.user_cols = parse_int(lc, key, value);
    else if (key == "element_spacing_factor")
      cfg.element_spacing_factor = parse_double(lc, key, value);
    else if (key == "subris_spacing_m")
      cfg.subris_spacing = parse_double(lc, key, value);
    else if (key == "bs_subarray_spacing_m")
      cfg.bs_subarray_spacing = parse_double(lc, key, value);
    else if (key == "spacing_q") cfg.spacing_q = parse_int(lc, key, value);
    else if (key == "absorption_mu") cfg.mu = parse_double(lc, key, value);
    else if (key == "absorption_table") cfg.absorption_table_path = value;
    else if (key == "nlos_ris_paths") cfg.nlos_ris.count = parse_int(lc, key, value);
    else if (key == "nlos_ris_atten_db_min")
      cfg.nlos_ris.attenuation_db_min = parse_double(lc, key, value);
    else if (key == "nlos_ris_atten_db_max")
      cfg.nlos_ris.attenuation_db_max = parse_double(lc, key, value);
    else if (key == "nlos_direct_paths")
      cfg.nlos_direct.count = parse_int(lc, key, value);
    else if (key == "nlos_direct_atten_db_min")
      cfg.nlos_direct.attenuation_db_min = parse_double(lc, key, value);
    else if (key == "nlos_direct_atten_db_max")
      cfg.nlos_direct.attenuation_db_max = parse_double(lc, key, value);
    else if (key == "nlos_angular_spread_deg")
      cfg.nlos_angular_spread = parse_double(lc, key, value) * kDegToRad;
    else if (key == "error_radius_m")
      cfg.error_radius = parse_double(lc, key, value);
    else if (key == "ranging_error_std_m")
      cfg.ranging_error = parse_double(lc, key, value);
    else if (key == "ranging_error_model") {
      if (value == "gaussian") cfg.ranging_model = RangingErrorModel::Gaussian;
      else if (value == "uniform") cfg.ranging_model = RangingErrorModel::Uniform;
      else lc.fail("key '" + key + "': expected gaussian or uniform");
    } else if (key == "uwb_anchor_half_span_m")
      cfg.anchor_half_span = parse_double(lc, key, value);
    else if (key == "power_sweep_dbm")
      cfg.power_sweep_dbm = parse_list(lc, key, value);
    else if (key == "trials") cfg.trials = parse_int(lc, key, value);
    else if (key == "seed") {
      try {
        std::size_t used = 0;
        cfg.seed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        lc.fail("key 'seed': expected a non-negative integer, got '" + value + "'");
      }
    }
    else if (key == "enable_direct_link")
      cfg.enable_direct_link = parse_bool(lc, key, value);
    else if (key == "sampled_noise")
      cfg.sampled_noise = parse_bool(lc, key, value);
    else if (key == "precoder") {
      if (value == "mmse") cfg.precoder = PrecoderKind::Mmse;
      else if (value == "zf") cfg.precoder = PrecoderKind::Zf;
      else lc.fail("key '" + key + "': expected mmse or zf");
    } else if (key == "field_regime") {
      if (value == "auto") cfg.field_regime = RegimeMode::Auto;
      else if (value == "near") cfg.field_regime = RegimeMode::Near;
      else if (value == "far") cfg.field_regime = RegimeMode::Far;
      else lc.fail("key '" + key + "': expected auto, near, or far");
    } else if (key == "codebook_resolution_deg")
      cfg.codebook_resolution = parse_double(lc, key, value) * kDegToRad;
    else if (key == "pba_max_iters") cfg.pba_max_iters = parse_int(lc, key, value);
    else if (key == "variants") cfg.variants = parse_names(lc, key, value);
    else lc.fail("unknown key '" + key + "'");
  }

  std::string missing;
  for (const auto& k : required)
    if (!seen.count(k)) missing += (missing.empty() ? "'" : ", '") + k + "'";
  if (!missing.empty())
    throw ConfigError(origin + ": missing required keys: " + missing);

  if (cfg.users < 1) throw ConfigError(origin + ": users must be >= 1");
  cfg.user_positions.clear();
  for (int i = 0; i < cfg.users; ++i) {
    const auto it = user_pos.find(i);
    if (it == user_pos.end())
      throw ConfigError(origin + ": missing required key 'user_" +
                        std::to_string(i) + "'");
    cfg.user_positions.push_back(it->second);
  }
  if (static_cast<int>(user_pos.size()) != cfg.users)
    throw ConfigError(origin + ": more user_<i> keys than users=" +
                      std::to_string(cfg.users));

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  const auto pos = [](const Position3D& p) {
    return fmt(p.x) + " " + fmt(p.y) + " " + fmt(p.z);
  };
  out << "frequency_ghz = " << fmt(cfg.frequency / 1e9) << "\n";
  out << "bandwidth_hz = " << fmt(cfg.bandwidth) << "\n";
  out << "noise_dbm = " << fmt(cfg.noise_dbm) << "\n";
  out << "users = " << cfg.users << "\n";
  out << "ris_center = " << pos(cfg.ris_center) << "\n";
  out << "bs_center = " << pos(cfg.bs_center) << "\n";
  for (std::size_t i = 0; i < cfg.user_positions.size(); ++i)
    out << "user_" << i << " = " << pos(cfg.user_positions[i]) << "\n";
  out << "bs_rows = " << cfg.bs_rows << "\n";
  out << "bs_cols = " << cfg.bs_cols << "\n";
  out << "bs_grid = " << cfg.bs_grid << "\n";
  out << "ris_rows = " << cfg.ris_rows << "\n";
  out << "ris_cols = " << cfg.ris_cols << "\n";
  out << "ris_grid = " << cfg.ris_grid << "\n";
  out << "user_rows = " << cfg.user_rows << "\n";
  out << "user_cols = " << cfg.user_cols << "\n";
  out << "element_spacing_factor = " << fmt(cfg.element_spacing_factor) << "\n";
  out << "subris_spacing_m = " << fmt(cfg.subris_spacing) << "\n";
  out << "bs_subarray_spacing_m = " << fmt(cfg.bs_subarray_spacing) << "\n";
  out << "spacing_q = " << cfg.spacing_q << "\n";
  out << "absorption_mu = " << fmt(cfg.mu) << "\n";
  if (!cfg.absorption_table_path.empty())
    out << "absorption_table = " << cfg.absorption_table_path << "\n";
  out << "nlos_ris_paths = " << cfg.nlos_ris.count << "\n";
  out << "nlos_ris_atten_db_min = " << fmt(cfg.nlos_ris.attenuation_db_min) << "\n";
  out << "nlos_ris_atten_db_max = " << fmt(cfg.nlos_ris.attenuation_db_max) << "\n";
  out << "nlos_direct_paths = " << cfg.nlos_direct.count << "\n";
  out << "nlos_direct_atten_db_min = " << fmt(cfg.nlos_direct.attenuation_db_min)
      << "\n";
  out << "nlos_direct_atten_db_max = " << fmt(cfg.nlos_direct.attenuation_db_max)
      << "\n";
  out << "nlos_angular_spread_deg = " << fmt(cfg.nlos_angular_spread / kDegToRad)
      << "\n";
  out << "error_radius_m = " << fmt(cfg.error_radius) << "\n";
  out << "ranging_error_std_m = " << fmt(cfg.ranging_error) << "\n";
  out << "ranging_error_model = "
      << (cfg.ranging_model == RangingErrorModel::Gaussian ? "gaussian" : "uniform")
      << "\n";
  out << "uwb_anchor_half_span_m = " << fmt(cfg.anchor_half_span) << "\n";
  out << "power_sweep_dbm =";
  for (double p : cfg.power_sweep_dbm) out << " " << fmt(p);
  out << "\n";
  out << "trials = " << cfg.trials << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "enable_direct_link = " << (cfg.enable_direct_link ? "true" : "false")
      << "\n";
  out << "sampled_noise = " << (cfg.sampled_noise ? "true" : "false") << "\n";
  out << "precoder = " << (cfg.precoder == PrecoderKind::Mmse ? "mmse" : "zf")
      << "\n";
  out << "field_regime = "
      << (cfg.field_regime == RegimeMode::Auto
              ? "auto"
              : cfg.field_regime == RegimeMode::Near ? "near" : "far")
      << "\n";
  out << "codebook_resolution_deg = " << fmt(cfg.codebook_resolution / kDegToRad)
      << "\n";
  out << "pba_max_iters = " << cfg.pba_max_iters << "\n";
  out << "variants =";
  for (const auto& v : cfg.variants) out << " " << v;
  out << "\n";
  return out.str();
}

}  // namespace risthz
