#include "risthz/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "risthz/beamforming.hpp"
#include "risthz/config.hpp"

namespace risthz {

namespace {

constexpr const char* kToolVersion = "1.0.0";

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file '" + path + "'");
  out << bytes;
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

}  // namespace

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_csv_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& err) {
  ScenarioConfig cfg;
  try {
    cfg = load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.trials) {
      if (*opts.trials < 1) throw ConfigError("--trials must be >= 1");
      cfg.trials = *opts.trials;
    }
    cfg.validate();
    // A missing or malformed absorption table is a configuration problem;
    // probe it here rather than letting it surface mid-run.
    if (!cfg.absorption_table_path.empty())
      load_absorption_table(cfg.absorption_table_path);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    std::filesystem::create_directories(opts.out_dir);
    const std::string canonical = serialize_config(cfg);

    nlohmann::ordered_json manifest;
    manifest["tool"] = "risthz";
    manifest["version"] = kToolVersion;
    manifest["config_path"] = opts.config_path;
    manifest["config_hash"] = content_hash(canonical);
    manifest["seed"] = cfg.seed;
    manifest["trials"] = cfg.trials;
    manifest["variants"] = cfg.variants;
    manifest["outputs"] = nlohmann::ordered_json::array();

    for (const auto& name : cfg.variants) {
      const Variant variant = *variant_from_name(name);
      const ScenarioConfig vcfg = apply_variant(cfg, variant);
      const SweepResult sweep = run_sweep(vcfg);

      std::ostringstream csv;
      csv << "power_dbm,mean_sum_rate_bpshz,ci95\n";
      for (const auto& pt : sweep.points)
        csv << format_csv_value(pt.power_dbm) << ","
            << format_csv_value(pt.mean_sum_rate) << ","
            << format_csv_value(pt.ci95) << "\n";
      const std::string file = name + ".csv";
      const std::string path =
          (std::filesystem::path(opts.out_dir) / file).string();
      write_file(path, csv.str());

      nlohmann::ordered_json entry;
      entry["variant"] = name;
      entry["file"] = file;
      entry["rows"] = sweep.points.size();
      entry["degraded_trials"] = sweep.degraded_trials;
      entry["hash"] = content_hash(csv.str());
      manifest["outputs"].push_back(entry);
    }

    write_file((std::filesystem::path(opts.out_dir) / "config.cfg").string(),
               canonical);
    write_file((std::filesystem::path(opts.out_dir) / "manifest.json").string(),
               manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumericalError;
  }
  return kExitOk;
}

int cmd_geometry(const std::string& config_path, std::ostream& out,
                 std::ostream& err) {
  ScenarioConfig cfg;
  ScenarioContext ctx;
  try {
    cfg = load_config(config_path);
    ctx = build_context(cfg);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  try {
    const double lambda = ctx.model.wavelength();
    const auto f = format_csv_value;
    out << "frequency_ghz: " << f(cfg.frequency / 1e9) << "\n";
    out << "wavelength_m: " << f(lambda) << "\n";
    out << "absorption_mu: " << f(ctx.model.mu) << "\n";
    out << "bs_ris_distance_m: " << f(ctx.d1) << "\n";
    out << "field_boundary_m: " << f(ctx.boundary) << "\n";
    out << "bs: " << ctx.bs.subgrid_rows << "x" << ctx.bs.subgrid_cols
        << " subarrays of " << ctx.bs.rows << "x" << ctx.bs.cols
        << ", subarray_spacing_m=" << f(ctx.bs.subgrid_spacing) << "\n";
    out << "ris: " << ctx.ris.subgrid_rows << "x" << ctx.ris.subgrid_cols
        << " sub-RIS of " << ctx.ris.rows << "x" << ctx.ris.cols
        << ", subris_spacing_m=" << f(ctx.ris.subgrid_spacing) << "\n";
    const int g_ris = ctx.ris.subgrid_rows;
    out << "optimal_subris_spacing_m: "
        << f(optimal_subris_spacing(ctx.d1, lambda, g_ris, cfg.spacing_q)) << "\n";
    out << "optimal_bs_subarray_spacing_m: "
        << f(optimal_bs_subarray_spacing(ctx.d1, lambda, ctx.bs.subgrid_rows,
                                         cfg.spacing_q))
        << "\n";
    for (int k = 0; k < cfg.users; ++k) {
      const double d2 = distance(cfg.user_positions[k], cfg.ris_center);
      const int si = k / ctx.ris.subgrid_cols;
      const int sj = k % ctx.ris.subgrid_cols;
      const auto link = angles_subris_to_user(
          ctx.ris, cfg.user_positions[k], subgrid_center(ctx.ris, si, sj));
      out << "user_" << k << ": d2_m=" << f(d2) << " regime="
          << (ctx.regimes[k] == FieldRegime::NearField ? "near" : "far")
          << " aod_az=" << f(link.arrival.azimuth)
          << " aod_el=" << f(link.arrival.elevation) << "\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumericalError;
  }
  return kExitOk;
}

int cmd_complexity(const std::vector<int>& sizes, std::ostream& out,
                   std::ostream& err) {
  for (int n : sizes) {
    if (n < 1) {
      err << "config error: codebook size must be >= 1, got " << n << "\n";
      return kExitConfigError;
    }
  }
  out << "n,exhaustive,tree_dictionary,phase_shifter_deactivation\n";
  for (int n : sizes) {
    out << n << ","
        << format_csv_value(search_complexity(SearchScheme::Exhaustive, n)) << ","
        << format_csv_value(search_complexity(SearchScheme::TreeDictionary, n))
        << ","
        << format_csv_value(
               search_complexity(SearchScheme::PhaseShifterDeactivation, n))
        << "\n";
  }
  return kExitOk;
}

}  // namespace risthz
