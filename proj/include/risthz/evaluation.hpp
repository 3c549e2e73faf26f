// Monte-Carlo evaluation: scenario configuration, the per-trial pipeline
// (synthesize channels -> UWB localize -> analog/passive beams -> digital
// precoding -> per-user rates), and power sweeps with confidence bounds.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "risthz/beamforming.hpp"
#include "risthz/channel.hpp"
#include "risthz/geometry.hpp"
#include "risthz/localization.hpp"

namespace risthz {

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

// Deterministic per-trial seed stream: splitmix-style mix of the master
// seed with (stream, index), so trials are independent and reproducible
// regardless of evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

enum class RegimeMode { Auto, Near, Far };

// Full scenario description. Distances in meters, powers in dBm,
// frequencies in Hz, angles in radians. Loaded from key=value config
// files (see config.hpp) or built directly in code.
struct ScenarioConfig {
  double frequency = 0.0;          // carrier, Hz (required)
  double bandwidth = 1e9;          // Hz
  double noise_dbm = 0.0;          // noise power over the band (required)
  int users = 0;                   // K (required)

  Position3D ris_center{0.0, 0.0, 0.0};
  Position3D bs_center;            // required
  std::vector<Position3D> user_positions;  // K entries (required)

  int bs_rows = 4, bs_cols = 4;        // elements per BS subarray
  int bs_grid = 0;                     // subarray grid side; 0 -> sqrt(K)
  int ris_rows = 4, ris_cols = 4;      // elements per sub-RIS
  int ris_grid = 0;                    // sub-RIS grid side; 0 -> sqrt(K)
  int user_rows = 4, user_cols = 4;    // user panel

  double element_spacing_factor = 0.5;  // x lambda
  double subris_spacing = 0.0;          // m; <= 0 -> optimal for (d1, N)
  double bs_subarray_spacing = 0.0;     // m; <= 0 -> optimal for (d1, M)
  int spacing_q = 1;

  double mu = 0.0;                      // absorption, 1/m
  std::string absorption_table_path;    // optional; overrides mu at f

  NlosProfile nlos_ris{2, 10.0, 20.0, 0.0};     // per RIS-side link
  NlosProfile nlos_direct{3, 10.0, 20.0, 0.0};  // BS-user link
  double nlos_angular_spread = 0.6981317007977318;  // rad (40 deg); both links

  double error_radius = 0.1;            // r_e, m
  double ranging_error = 0.01;          // sensor noise scale, m
  RangingErrorModel ranging_model = RangingErrorModel::Gaussian;
  double anchor_half_span = 0.5;        // sensor square half side, m

  std::vector<double> power_sweep_dbm = {-10, -5, 0, 5, 10, 15, 20, 25, 30};
  int trials = 1000;
  std::uint64_t seed = 1;

  bool enable_ris = true;
  bool enable_direct_link = true;
  bool random_phase_baseline = false;
  bool use_pba = true;
  bool sampled_noise = false;           // draw the noise term instead of sigma^2
  PrecoderKind precoder = PrecoderKind::Mmse;
  RegimeMode field_regime = RegimeMode::Auto;

  double codebook_resolution = 0.5 * 3.14159265358979323846 / 180.0;  // rad
  int pba_max_iters = 20;

  std::vector<std::string> variants = {"none", "random", "estimated", "pba"};

  void validate() const;  // throws std::invalid_argument with the bad key
};

// The four standard operating modes of the simulator.
enum class Variant { NoRis, RandomPhase, Estimated, EstimatedPba };

std::string variant_name(Variant v);
std::optional<Variant> variant_from_name(const std::string& name);
// Copy of `cfg` with the flag set of the given variant applied.
ScenarioConfig apply_variant(const ScenarioConfig& cfg, Variant v);

// Static per-scenario state shared by all trials: panel geometries,
// derived spacings, link distances and regimes, anchor placement.
struct ScenarioContext {
  ArrayGeometry bs;
  ArrayGeometry ris;
  std::vector<ArrayGeometry> user_panels;
  PathLossModel model;
  double d1 = 0.0;                    // |bs_center - ris_center|
  double boundary = 0.0;              // near/far boundary of the RIS
  std::vector<FieldRegime> regimes;   // per user
  UwbAnchorSet anchors;
};

ScenarioContext build_context(const ScenarioConfig& cfg);

struct SignalTerms {
  double signal = 0.0;        // W
  double interference = 0.0;  // W
};

// Post-combining signal and interference powers of user k under total
// transmit power P (watts):  signal = (P/K) |v^H (H O G + Q) W f_k|^2,
// interference the same with the other users' precoder columns. Q may be
// null (no direct link).
SignalTerms received_signal_terms(const Eigen::VectorXcd& v, const ChannelMatrix& H_k,
                                  const Eigen::VectorXcd& ris_phases,
                                  const ChannelMatrix& G, const ChannelMatrix* Q_k,
                                  const AnalogBeamformer& W, const DigitalPrecoder& F,
                                  int k, double total_power, int users);

// r = log2(1 + S / (I + N)), all inputs in watts.
double user_rate(double signal, double interference, double noise);

struct TrialResult {
  std::vector<double> sinr;       // linear, per user
  std::vector<double> rate;       // bits/s/Hz, per user
  double sum_rate = 0.0;
  double interference_power = 0.0;      // W, summed over users
  std::int64_t beam_search_evals = 0;
  bool degraded = false;  // a localization failed; trial kept, flagged
};

// One full pipeline pass at the given transmit power.
TrialResult run_trial(const ScenarioConfig& cfg, double power_dbm, std::uint64_t seed);

struct SweepPoint {
  double power_dbm = 0.0;
  double mean_sum_rate = 0.0;  // bits/s/Hz
  double ci95 = 0.0;           // 1.96 * sd / sqrt(trials)
};

struct SweepResult {
  std::vector<SweepPoint> points;
  int degraded_trials = 0;
};

// Monte-Carlo sweep over cfg.power_sweep_dbm with cfg.trials trials per
// point. Each trial's channels/beams are realized once from a seed
// derived from (cfg.seed, trial index) and measured at every power, so
// points of one curve are paired; the reduction order is fixed, so
// results are reproducible.
SweepResult run_sweep(const ScenarioConfig& cfg);

}  // namespace risthz
