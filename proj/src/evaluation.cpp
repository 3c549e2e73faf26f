#include "risthz/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace risthz {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) {
  require(watts > 0.0, "watts_to_dbm: power must be positive");
  return 10.0 * std::log10(watts) + 30.0;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) {
  // splitmix64 finalizer over the mixed words; cheap, full-period, and
  // stable across platforms.
  std::uint64_t x = master + 0x9e3779b97f4a7c15ULL * (stream + 1) +
                    0xbf58476d1ce4e5b9ULL * (index + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::NoRis: return "none";
    case Variant::RandomPhase: return "random";
    case Variant::Estimated: return "estimated";
    case Variant::EstimatedPba: return "pba";
  }
  return "?";
}

std::optional<Variant> variant_from_name(const std::string& name) {
  if (name == "none") return Variant::NoRis;
  if (name == "random") return Variant::RandomPhase;
  if (name == "estimated") return Variant::Estimated;
  if (name == "pba") return Variant::EstimatedPba;
  return std::nullopt;
}

ScenarioConfig apply_variant(const ScenarioConfig& cfg, Variant v) {
  ScenarioConfig out = cfg;
  out.enable_ris = v != Variant::NoRis;
  out.random_phase_baseline = v == Variant::RandomPhase;
  out.use_pba = v == Variant::EstimatedPba;
  return out;
}

void ScenarioConfig::validate() const {
  require(frequency > 0.0, "config: frequency must be positive");
  require(bandwidth > 0.0, "config: bandwidth must be positive");
  require(users >= 1, "config: users must be >= 1");
  require(static_cast<int>(user_positions.size()) == users,
          "config: need one position per user");
  require(bs_rows >= 1 && bs_cols >= 1 && ris_rows >= 1 && ris_cols >= 1 &&
              user_rows >= 1 && user_cols >= 1,
          "config: element counts must be >= 1");
  const int g_bs = bs_grid > 0 ? bs_grid
                               : static_cast<int>(std::lround(std::sqrt(users)));
  const int g_ris = ris_grid > 0 ? ris_grid
                                 : static_cast<int>(std::lround(std::sqrt(users)));
  require(g_bs * g_bs == users,
          "config: bs_grid^2 must equal users (one subarray per user)");
  require(g_ris * g_ris == users,
          "config: ris_grid^2 must equal users (one sub-RIS per user)");
  require(element_spacing_factor > 0.0, "config: element_spacing_factor must be > 0");
  require(spacing_q >= 1, "config: spacing_q must be >= 1");
  require(mu >= 0.0, "config: absorption must be >= 0");
  nlos_ris.validate();
  nlos_direct.validate();
  require(error_radius >= 0.0, "config: error_radius_m must be >= 0");
  require(ranging_error >= 0.0, "config: ranging_error_std_m must be >= 0");
  require(anchor_half_span > 0.0, "config: uwb_anchor_half_span_m must be > 0");
  require(enable_ris || enable_direct_link,
          "config: at least one of the RIS path and the direct link must be enabled");
  require(!power_sweep_dbm.empty(), "config: power_sweep_dbm must not be empty");
  require(trials >= 1, "config: trials must be >= 1");
  require(codebook_resolution > 0.0, "config: codebook_resolution must be > 0");
  require(pba_max_iters >= 1, "config: pba_max_iters must be >= 1");
  require(!variants.empty(), "config: variants must not be empty");
  for (const auto& v : variants)
    require(variant_from_name(v).has_value(), "config: unknown variant '" + v + "'");
  const double d1 = distance(bs_center, ris_center);
  require(d1 > 0.0, "config: bs_center must differ from ris_center");
  for (const auto& u : user_positions) {
    require(distance(u, ris_center) > 0.0, "config: user coincides with the RIS");
    require(distance(u, bs_center) > 0.0, "config: user coincides with the BS");
  }
}

ScenarioContext build_context(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioContext ctx;
  ctx.model.frequency = cfg.frequency;
  ctx.model.mu = cfg.absorption_table_path.empty()
                     ? cfg.mu
                     : load_absorption_table(cfg.absorption_table_path)
                           .interpolate(cfg.frequency);
  const double lambda = ctx.model.wavelength();
  ctx.d1 = distance(cfg.bs_center, cfg.ris_center);

  const int g_bs = cfg.bs_grid > 0 ? cfg.bs_grid
                                   : static_cast<int>(std::lround(std::sqrt(cfg.users)));
  const int g_ris = cfg.ris_grid > 0
                        ? cfg.ris_grid
                        : static_cast<int>(std::lround(std::sqrt(cfg.users)));

  ctx.bs.rows = cfg.bs_rows;
  ctx.bs.cols = cfg.bs_cols;
  ctx.bs.element_spacing = cfg.element_spacing_factor * lambda;
  ctx.bs.subgrid_rows = ctx.bs.subgrid_cols = g_bs;
  ctx.bs.subgrid_spacing =
      cfg.bs_subarray_spacing > 0.0
          ? cfg.bs_subarray_spacing
          : optimal_bs_subarray_spacing(ctx.d1, lambda, g_bs, cfg.spacing_q);
  ctx.bs.center = cfg.bs_center;
  ctx.bs.validate();

  ctx.ris.rows = cfg.ris_rows;
  ctx.ris.cols = cfg.ris_cols;
  ctx.ris.element_spacing = cfg.element_spacing_factor * lambda;
  ctx.ris.subgrid_rows = ctx.ris.subgrid_cols = g_ris;
  ctx.ris.subgrid_spacing =
      cfg.subris_spacing > 0.0
          ? cfg.subris_spacing
          : optimal_subris_spacing(ctx.d1, lambda, g_ris, cfg.spacing_q);
  ctx.ris.center = cfg.ris_center;
  ctx.ris.validate();

  ctx.boundary = field_boundary(g_ris, cfg.ris_rows, cfg.ris_cols, lambda);
  for (const auto& pos : cfg.user_positions) {
    ArrayGeometry panel;
    panel.rows = cfg.user_rows;
    panel.cols = cfg.user_cols;
    panel.element_spacing = cfg.element_spacing_factor * lambda;
    panel.center = pos;
    panel.validate();
    ctx.user_panels.push_back(panel);

    const double d2 = distance(pos, cfg.ris_center);
    FieldRegime regime;
    switch (cfg.field_regime) {
      case RegimeMode::Near: regime = FieldRegime::NearField; break;
      case RegimeMode::Far: regime = FieldRegime::FarField; break;
      default:
        regime = (ctx.d1 < ctx.boundary && d2 < ctx.boundary)
                     ? FieldRegime::NearField
                     : FieldRegime::FarField;
    }
    ctx.regimes.push_back(regime);
  }

  ctx.anchors = anchors_from_ris(ctx.ris, cfg.anchor_half_span, cfg.ranging_error,
                                 cfg.ranging_model);
  return ctx;
}

namespace {

// 1 x L_B projection of a row over all BS elements onto the analog beams.
Eigen::RowVectorXcd project_on_chains(const Eigen::RowVectorXcd& row,
                                      const AnalogBeamformer& W) {
  const int chains = W.chain_count();
  Eigen::RowVectorXcd out(chains);
  Eigen::Index c = 0;
  for (int j = 0; j < chains; ++j) {
    const Eigen::Index n = W.subarray_beams[j].size();
    out(j) = row.segment(c, n) * W.subarray_beams[j];
    c += n;
  }
  return out;
}

Eigen::RowVectorXcd effective_row(const Eigen::VectorXcd& v, const ChannelMatrix& H_k,
                                  const Eigen::VectorXcd& ris_phases,
                                  const ChannelMatrix& G, const ChannelMatrix* Q_k) {
  Eigen::RowVectorXcd row;
  if (H_k.m.size() > 0 && G.m.size() > 0) {
    Eigen::RowVectorXcd through_ris = v.adjoint() * H_k.m;
    through_ris = through_ris.cwiseProduct(ris_phases.transpose());
    row = through_ris * G.m;
  }
  if (Q_k != nullptr && Q_k->m.size() > 0) {
    Eigen::RowVectorXcd direct = v.adjoint() * Q_k->m;
    row = row.size() == 0 ? direct : (row + direct).eval();
  }
  return row;
}

struct UserBeamState {
  Eigen::VectorXcd v;       // receive beam
  Eigen::VectorXcd q;       // serving sub-RIS phases (RIS modes)
  Eigen::VectorXcd a_sa;    // arrival steering at the serving sub-RIS
  UserChannelParams est;    // location-derived link parameters
};

Eigen::MatrixXcd los_outer(const ArrayGeometry& user_panel,
                           const ArrayGeometry& subris_panel, double lambda,
                           const UserChannelParams& est) {
  const double norm =
      std::sqrt(static_cast<double>(user_panel.elements_per_subgrid()) *
                subris_panel.elements_per_subgrid());
  const auto a_r = steering_vector(user_panel, est.aoa_at_user, lambda);
  const auto a_sd = steering_vector(subris_panel, est.aod_at_ris, lambda);
  return norm * est.beta2_mag * (a_r.entries * a_sd.entries.adjoint());
}

// Everything that depends on the channel realization but not on the
// transmit power: synthesized links, the UWB fix, analog beams, RIS
// phases, effective CSI rows, and the optional sampled noise draw.
// Splitting here lets a power sweep reuse one realization per trial.
struct TrialState {
  ChannelMatrix G;
  std::vector<ChannelMatrix> H;
  std::vector<ChannelMatrix> Q;
  AnalogBeamformer W;
  std::vector<UserBeamState> users;
  Eigen::MatrixXcd That;
  Eigen::VectorXcd O_flat;
  std::vector<double> noise;
  bool degraded = false;
  long evaluations = 0;
};

TrialState prepare_trial(const ScenarioContext& ctx, const ScenarioConfig& cfg,
                         std::uint64_t seed) {
  const int K = cfg.users;
  const double sigma2 = dbm_to_watts(cfg.noise_dbm);
  const double lambda = ctx.model.wavelength();
  Rng rng(seed);

  NlosProfile nlos_ris = cfg.nlos_ris;
  NlosProfile nlos_direct = cfg.nlos_direct;
  nlos_ris.angular_spread = cfg.nlos_angular_spread;
  nlos_direct.angular_spread = cfg.nlos_angular_spread;

  TrialState st;
  st.H.resize(K);
  st.Q.resize(K);

  // --- channel realizations -------------------------------------------
  if (cfg.enable_ris) {
    st.G = synthesize_G(ctx.bs, ctx.ris, ctx.model, nlos_ris, rng);
    for (int k = 0; k < K; ++k)
      st.H[k] = synthesize_H(ctx.user_panels[k], ctx.ris, ctx.model, nlos_ris,
                             reradiation_gain(ctx.model, ctx.d1, ctx.regimes[k]),
                             rng);
  }
  if (cfg.enable_direct_link) {
    for (int k = 0; k < K; ++k)
      st.Q[k] = synthesize_direct_Q(ctx.bs, ctx.user_panels[k], ctx.model,
                                    nlos_direct, rng);
  }

  const int ris_elems = ctx.ris.elements_per_subgrid();
  const ArrayGeometry subris_panel = [&] {
    ArrayGeometry g = ctx.ris;
    g.subgrid_rows = g.subgrid_cols = 1;
    g.subgrid_spacing = 0.0;
    return g;
  }();
  const ArrayGeometry subarray_panel = [&] {
    ArrayGeometry g = ctx.bs;
    g.subgrid_rows = g.subgrid_cols = 1;
    g.subgrid_spacing = 0.0;
    return g;
  }();

  // --- beam design -----------------------------------------------------
  st.W.subarray_beams.resize(K);
  st.W.powers.assign(K, 1.0);
  st.users.resize(K);
  st.That = Eigen::MatrixXcd::Zero(K, K);

  if (!cfg.enable_ris) {
    // Without the RIS the only CSI source is still the location chain,
    // and the direct link is NLOS-only, so the baseline points each
    // subarray at its user's estimated position through the blocked LOS
    // direction and sends one stream per chain (no digital mixing: there
    // is no location-anchored LOS model to compute effective rows from).
    for (int k = 0; k < K; ++k) {
      const int bi = k / ctx.bs.subgrid_cols;
      const int bj = k % ctx.bs.subgrid_cols;
      const Position3D subarray_pos = subgrid_center(ctx.bs, bi, bj);

      const auto meas = range_measurements(ctx.anchors, cfg.user_positions[k], rng);
      const Eigen::Vector3d local_user =
          to_local_frame(ctx.ris, ctx.ris.center, cfg.user_positions[k]);
      const HalfSpace side = local_user.z() >= 0.0 ? HalfSpace::PositiveNormal
                                                   : HalfSpace::NegativeNormal;
      const auto fix = multilaterate(ctx.anchors, meas, side);
      if (fix.status != MultilaterationStatus::Converged) st.degraded = true;

      // Same angle convention as the direct-link synthesis: transmit side
      // pointed along the BS-frame arrival pair, receive side its negation.
      const LinkAngles direct =
          angles_between(ctx.bs, fix.estimate.position, subarray_pos);
      st.W.subarray_beams[k] =
          design_transmit_beam(direct.arrival, subarray_panel, lambda).weights;
      st.users[k].v =
          design_receive_beam(direct.departure, ctx.user_panels[k], lambda);
    }
    st.That = Eigen::MatrixXcd::Identity(K, K);
  } else {
    for (int k = 0; k < K; ++k) {
      const int si = k / ctx.ris.subgrid_cols;
      const int sj = k % ctx.ris.subgrid_cols;
      const int bi = k / ctx.bs.subgrid_cols;
      const int bj = k % ctx.bs.subgrid_cols;
      const Position3D subris_pos = subgrid_center(ctx.ris, si, sj);
      const Position3D subarray_pos = subgrid_center(ctx.bs, bi, bj);

      // BS-side geometry is known exactly.
      const LinkAngles bs_link =
          angles_bs_to_subris(ctx.ris, subarray_pos, subris_pos);
      st.users[k].a_sa =
          steering_vector(subris_panel, bs_link.arrival, lambda).entries;
      st.W.subarray_beams[k] =
          design_transmit_beam(bs_link.departure, subarray_panel, lambda).weights;

      // User side comes from the UWB fix.
      const auto meas = range_measurements(ctx.anchors, cfg.user_positions[k], rng);
      const Eigen::Vector3d local_user =
          to_local_frame(ctx.ris, ctx.ris.center, cfg.user_positions[k]);
      const HalfSpace side = local_user.z() >= 0.0 ? HalfSpace::PositiveNormal
                                                   : HalfSpace::NegativeNormal;
      const auto fix = multilaterate(ctx.anchors, meas, side);
      if (fix.status != MultilaterationStatus::Converged) st.degraded = true;

      const LinkGainFn gain = reradiation_gain(ctx.model, ctx.d1, ctx.regimes[k]);
      st.users[k].est =
          estimate_user_channel_params(fix.estimate, ctx.ris, subris_pos, gain);
      st.users[k].v = design_receive_beam(st.users[k].est.aoa_at_user,
                                          ctx.user_panels[k], lambda);

      const Eigen::MatrixXcd Hbar =
          los_outer(ctx.user_panels[k], subris_panel, lambda, st.users[k].est);
      st.users[k].q = closed_form_ris_phase(Hbar, st.users[k].v, st.users[k].a_sa).q;

      if (cfg.random_phase_baseline) {
        std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
        for (int i = 0; i < ris_elems; ++i)
          st.users[k].q(i) = std::polar(1.0, ph(rng));
      } else if (cfg.use_pba) {
        const double cone =
            std::asin(std::min(1.0, cfg.error_radius / st.users[k].est.d2));
        const double half_span = cone + cfg.codebook_resolution;
        const Codebook cb_v = generate_codebook(ctx.user_panels[k], lambda,
                                                st.users[k].est.aoa_at_user,
                                                half_span, cfg.codebook_resolution);
        const Codebook cb_w =
            generate_codebook(subris_panel, lambda, st.users[k].est.aod_at_ris,
                              half_span, cfg.codebook_resolution);
        const Eigen::MatrixXcd H_true_block = st.H[k].m.block(
            0, k * ris_elems, ctx.user_panels[k].elements_per_subgrid(), ris_elems);
        const PbaResult pr =
            pba(st.users[k].v, st.users[k].q, st.users[k].est.aoa_at_user,
                st.users[k].est.aod_at_ris, H_true_block, st.users[k].a_sa, cb_v,
                cb_w, cfg.error_radius, st.users[k].est.d2, cfg.pba_max_iters);
        st.users[k].v = pr.v;
        st.users[k].q = pr.q;
        st.evaluations += pr.evaluations;
        // Beam training refines the channel estimate: rebuild the LOS
        // model from the selected pointing pairs.
        st.users[k].est.aoa_at_user = pr.v_angles;
        st.users[k].est.aod_at_ris = pr.w_angles;
      }
    }

    // Effective CSI rows through the serving sub-RIS (estimated LOS user
    // link, known G and W).
    for (int k = 0; k < K; ++k) {
      const Eigen::MatrixXcd Hbar =
          los_outer(ctx.user_panels[k], subris_panel, lambda, st.users[k].est);
      Eigen::RowVectorXcd row = st.users[k].v.adjoint() * Hbar;
      row = row.cwiseProduct(st.users[k].q.transpose());
      row = row * st.G.m.middleRows(k * ris_elems, ris_elems);
      st.That.row(k) = project_on_chains(row, st.W);
    }

    RisPhaseConfig O;
    O.blocks.resize(K);
    for (int k = 0; k < K; ++k) O.blocks[k] = st.users[k].q;
    st.O_flat = O.flatten();
  }

  // --- per-user noise ---------------------------------------------------
  st.noise.assign(K, sigma2);
  if (cfg.sampled_noise) {
    std::normal_distribution<double> g(0.0, std::sqrt(sigma2 / 2.0));
    for (int k = 0; k < K; ++k) {
      Eigen::VectorXcd n(st.users[k].v.size());
      for (Eigen::Index i = 0; i < n.size(); ++i) n(i) = cxd(g(rng), g(rng));
      st.noise[k] = std::norm(st.users[k].v.dot(n));
    }
  }
  return st;
}

TrialResult measure_trial(const ScenarioConfig& cfg, const TrialState& st,
                          double power_dbm) {
  const int K = cfg.users;
  const double P = dbm_to_watts(power_dbm);
  const double sigma2 = dbm_to_watts(cfg.noise_dbm);

  const DigitalPrecoder F = cfg.precoder == PrecoderKind::Mmse
                                ? mmse_precoder(st.That, st.W, sigma2, P, K)
                                : zf_precoder(st.That, st.W);

  TrialResult result;
  result.sinr.assign(K, 0.0);
  result.rate.assign(K, 0.0);
  result.degraded = st.degraded;
  result.beam_search_evals = st.evaluations;
  for (int k = 0; k < K; ++k) {
    const ChannelMatrix* Qp =
        cfg.enable_direct_link && st.Q[k].m.size() > 0 ? &st.Q[k] : nullptr;
    const SignalTerms terms = received_signal_terms(
        st.users[k].v, cfg.enable_ris ? st.H[k] : ChannelMatrix{}, st.O_flat, st.G,
        Qp, st.W, F, k, P, K);
    result.sinr[k] = terms.signal / (terms.interference + st.noise[k]);
    result.rate[k] = user_rate(terms.signal, terms.interference, st.noise[k]);
    result.sum_rate += result.rate[k];
    result.interference_power += terms.interference;
  }
  return result;
}

}  // namespace

SignalTerms received_signal_terms(const Eigen::VectorXcd& v, const ChannelMatrix& H_k,
                                  const Eigen::VectorXcd& ris_phases,
                                  const ChannelMatrix& G, const ChannelMatrix* Q_k,
                                  const AnalogBeamformer& W, const DigitalPrecoder& F,
                                  int k, double total_power, int users) {
  require(users >= 1 && k >= 0 && k < users, "received_signal_terms: bad user index");
  require(total_power > 0.0, "received_signal_terms: power must be positive");
  require(F.F.cols() == users, "received_signal_terms: precoder has wrong user count");
  const Eigen::RowVectorXcd row = effective_row(v, H_k, ris_phases, G, Q_k);
  require(row.size() > 0, "received_signal_terms: no channel given");
  const Eigen::RowVectorXcd chains = project_on_chains(row, W);
  const Eigen::RowVectorXcd through = chains * F.F;
  SignalTerms out;
  const double scale = total_power / users;
  out.signal = scale * std::norm(through(k));
  for (int i = 0; i < users; ++i)
    if (i != k) out.interference += scale * std::norm(through(i));
  return out;
}

double user_rate(double signal, double interference, double noise) {
  require(signal >= 0.0 && interference >= 0.0 && noise > 0.0,
          "user_rate: bad inputs");
  return std::log2(1.0 + signal / (interference + noise));
}

TrialResult run_trial(const ScenarioConfig& cfg, double power_dbm, std::uint64_t seed) {
  const ScenarioContext ctx = build_context(cfg);
  return measure_trial(cfg, prepare_trial(ctx, cfg, seed), power_dbm);
}

SweepResult run_sweep(const ScenarioConfig& cfg) {
  const ScenarioContext ctx = build_context(cfg);
  const std::size_t npts = cfg.power_sweep_dbm.size();
  std::vector<double> sum(npts, 0.0), sumsq(npts, 0.0);
  SweepResult out;
  for (int t = 0; t < cfg.trials; ++t) {
    const TrialState st = prepare_trial(ctx, cfg, derive_seed(cfg.seed, 0, t));
    if (st.degraded) ++out.degraded_trials;
    for (std::size_t pi = 0; pi < npts; ++pi) {
      const TrialResult r = measure_trial(cfg, st, cfg.power_sweep_dbm[pi]);
      sum[pi] += r.sum_rate;
      sumsq[pi] += r.sum_rate * r.sum_rate;
    }
  }
  const double n = cfg.trials;
  for (std::size_t pi = 0; pi < npts; ++pi) {
    const double mean = sum[pi] / n;
    const double var =
        n > 1 ? std::max(0.0, (sumsq[pi] - n * mean * mean) / (n - 1)) : 0.0;
    SweepPoint pt;
    pt.power_dbm = cfg.power_sweep_dbm[pi];
    pt.mean_sum_rate = mean;
    pt.ci95 = n > 1 ? 1.96 * std::sqrt(var / n) : 0.0;
    out.points.push_back(pt);
  }
  return out;
}

}  // namespace risthz
