#include "risthz/beamforming.hpp"

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

Eigen::MatrixXcd AnalogBeamformer::matrix() const {
  const int chains = chain_count();
  Eigen::Index rows = 0;
  for (const auto& w : subarray_beams) rows += w.size();
  Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(rows, chains);
  Eigen::Index r = 0;
  for (int k = 0; k < chains; ++k) {
    W.block(r, k, subarray_beams[k].size(), 1) = subarray_beams[k];
    r += subarray_beams[k].size();
  }
  return W;
}

void AnalogBeamformer::validate() const {
  require(!subarray_beams.empty(), "AnalogBeamformer: no subarray beams");
  require(powers.size() == subarray_beams.size(),
          "AnalogBeamformer: powers and beams must pair up");
  const Eigen::Index n = subarray_beams.front().size();
  const double mag = 1.0 / std::sqrt(static_cast<double>(n));
  for (const auto& w : subarray_beams) {
    require(w.size() == n, "AnalogBeamformer: subarray sizes differ");
    for (Eigen::Index i = 0; i < n; ++i)
      require(std::abs(std::abs(w(i)) - mag) < 1e-9,
              "AnalogBeamformer: entries must have magnitude 1/sqrt(m n)");
  }
  for (double p : powers) require(p >= 0.0, "AnalogBeamformer: negative power");
}

Eigen::VectorXcd RisPhaseConfig::flatten() const {
  Eigen::Index n = 0;
  for (const auto& q : blocks) n += q.size();
  Eigen::VectorXcd out(n);
  Eigen::Index r = 0;
  for (const auto& q : blocks) {
    out.segment(r, q.size()) = q;
    r += q.size();
  }
  return out;
}

void RisPhaseConfig::validate() const {
  require(!blocks.empty(), "RisPhaseConfig: no blocks");
  for (const auto& q : blocks)
    for (Eigen::Index i = 0; i < q.size(); ++i)
      require(std::abs(std::abs(q(i)) - 1.0) < 1e-9,
              "RisPhaseConfig: entries must be unit-modulus");
}

Codebook generate_codebook(const ArrayGeometry& g, double wavelength,
                           const AnglePair& center, double half_span,
                           double resolution) {
  require(resolution > 0.0, "generate_codebook: resolution must be positive");
  require(half_span >= 0.0, "generate_codebook: half span must be >= 0");
  const int n = static_cast<int>(std::ceil(half_span / resolution));
  Codebook cb;
  cb.resolution = resolution;
  cb.beams.reserve((2 * n + 1) * (2 * n + 1));
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j) {
      const AnglePair p{center.azimuth + i * resolution,
                        center.elevation + j * resolution};
      cb.pointing.push_back(p);
      cb.beams.push_back(steering_vector(g, p, wavelength).entries);
    }
  return cb;
}

TransmitBeam design_transmit_beam(const AnglePair& aod, const ArrayGeometry& bs_subarray,
                                  double wavelength, double p_k) {
  require(p_k >= 0.0, "design_transmit_beam: power must be >= 0");
  TransmitBeam out;
  out.weights = steering_vector(bs_subarray, aod, wavelength).entries;
  out.power = p_k;
  return out;
}

Eigen::VectorXcd design_receive_beam(const AnglePair& aoa, const ArrayGeometry& user,
                                     double wavelength) {
  return steering_vector(user, aoa, wavelength).entries;
}

cxd diag_quadratic_form(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y,
                        const Eigen::VectorXcd& z) {
  require(x.size() == y.size() && y.size() == z.size(),
          "diag_quadratic_form: size mismatch");
  return x.transpose() * y.conjugate().cwiseProduct(z);
}

RisPhaseResult closed_form_ris_phase(const Eigen::MatrixXcd& H_block,
                                     const Eigen::VectorXcd& v,
                                     const Eigen::VectorXcd& a_sa) {
  require(H_block.rows() == v.size(), "closed_form_ris_phase: H rows != |v|");
  require(H_block.cols() == a_sa.size(), "closed_form_ris_phase: H cols != |a_sa|");
  const Eigen::VectorXcd target =
      (H_block.transpose() * v.conjugate()).cwiseProduct(a_sa);
  RisPhaseResult out;
  out.q.resize(target.size());
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    const double mag = std::abs(target(i));
    if (mag == 0.0) {
      out.q(i) = 1.0;  // phase 0; direction carries no energy
      out.degenerate = true;
    } else {
      out.q(i) = std::conj(target(i)) / mag;
    }
  }
  return out;
}

namespace {

// Measured power |q^T ((H^T conj(v)) ⊙ a_sa)|^2 for the current beams.
double pba_objective(const Eigen::VectorXcd& q, const Eigen::VectorXcd& hv_asa) {
  const cxd s = q.transpose() * hv_asa;
  return std::norm(s);
}

Eigen::VectorXcd ris_codeword_to_phases(const Eigen::VectorXcd& w,
                                        const Eigen::VectorXcd& a_sa) {
  // Departure steering w and compensation of the arrival phases; entries
  // of w and a_sa never vanish (1/sqrt(m n) magnitude), so this is the
  // closed-form phase profile for the candidate departure direction.
  Eigen::VectorXcd q(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const cxd t = w(i) * std::conj(a_sa(i));
    q(i) = t / std::abs(t);
  }
  return q;
}

}  // namespace

PbaResult pba(const Eigen::VectorXcd& v_init, const Eigen::VectorXcd& q_init,
              const AnglePair& v_center, const AnglePair& w_center,
              const Eigen::MatrixXcd& H_true_block, const Eigen::VectorXcd& a_sa,
              const Codebook& receive_codebook, const Codebook& ris_codebook,
              double error_radius, double d2, int max_iters, double rel_tolerance) {
  require(d2 > 0.0, "pba: d2 must be positive");
  require(error_radius >= 0.0, "pba: error radius must be >= 0");
  require(max_iters >= 1, "pba: max_iters must be >= 1");

  const double cone = std::asin(std::min(1.0, error_radius / d2));
  const double cone_tol = cone + 1e-12;
  std::vector<int> v_set, w_set;
  for (std::size_t i = 0; i < receive_codebook.pointing.size(); ++i)
    if (angular_separation(receive_codebook.pointing[i], v_center) <= cone_tol)
      v_set.push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < ris_codebook.pointing.size(); ++i)
    if (angular_separation(ris_codebook.pointing[i], w_center) <= cone_tol)
      w_set.push_back(static_cast<int>(i));

  PbaResult out;
  out.v = v_init;
  out.q = q_init;
  out.v_angles = v_center;
  out.w_angles = w_center;
  if (v_set.empty() || w_set.empty()) {
    out.used_fallback = true;
    return out;
  }

  auto hv_asa = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
    return (H_true_block.transpose() * v.conjugate()).cwiseProduct(a_sa);
  };

  double best = pba_objective(out.q, hv_asa(out.v));
  for (int iter = 0; iter < max_iters; ++iter) {
    const double prev = best;

    // Receive-beam sweep with the RIS phases held fixed.
    int v_pick = -1;
    for (int idx : v_set) {
      const double obj = pba_objective(out.q, hv_asa(receive_codebook.beams[idx]));
      ++out.evaluations;
      if (obj > best) {
        best = obj;
        v_pick = idx;
      }
    }
    if (v_pick >= 0) {
      out.v = receive_codebook.beams[v_pick];
      out.v_angles = receive_codebook.pointing[v_pick];
    }

    // RIS-codeword sweep with the receive beam held fixed.
    const Eigen::VectorXcd u = hv_asa(out.v);
    int w_pick = -1;
    for (int idx : w_set) {
      const double obj =
          pba_objective(ris_codeword_to_phases(ris_codebook.beams[idx], a_sa), u);
      ++out.evaluations;
      if (obj > best) {
        best = obj;
        w_pick = idx;
      }
    }
    if (w_pick >= 0) {
      out.q = ris_codeword_to_phases(ris_codebook.beams[w_pick], a_sa);
      out.w_angles = ris_codebook.pointing[w_pick];
    }

    out.iterations = iter + 1;
    out.objective_trace.push_back(best);
    if (best - prev <= rel_tolerance * std::max(prev, 1e-300)) break;
  }
  return out;
}

double search_complexity(SearchScheme scheme, int n, std::int64_t subcodebook_v,
                         std::int64_t subcodebook_w) {
  require(n >= 1, "search_complexity: n must be >= 1");
  const double nd = n;
  switch (scheme) {
    case SearchScheme::Exhaustive:
      return nd * nd + nd * nd * nd * nd;
    case SearchScheme::TreeDictionary:
      return 18.0 * nd + 12.0 * std::log(nd) / std::log(3.0) - 3.0;
    case SearchScheme::PhaseShifterDeactivation:
      return 6.0 * nd + 4.0 * std::log(nd) / std::log(3.0) - 1.0;
    case SearchScheme::SensorPba:
      return static_cast<double>(subcodebook_v) * static_cast<double>(subcodebook_w);
  }
  throw std::invalid_argument("search_complexity: unknown scheme");
}

namespace {

void normalize_columns(Eigen::MatrixXcd& F, const Eigen::MatrixXcd& W) {
  for (Eigen::Index k = 0; k < F.cols(); ++k) {
    const double norm = (W * F.col(k)).norm();
    if (norm <= 0.0 || !std::isfinite(norm))
      throw std::runtime_error("precoder: zero or non-finite column norm");
    F.col(k) /= norm;
  }
}

}  // namespace

DigitalPrecoder mmse_precoder(const Eigen::MatrixXcd& T, const AnalogBeamformer& W,
                              double noise_power, double total_power, int users) {
  require(noise_power >= 0.0 && total_power > 0.0,
          "mmse_precoder: bad power arguments");
  require(users == T.rows(), "mmse_precoder: user count must match rows of T");
  const Eigen::MatrixXcd Wm = W.matrix();
  require(Wm.rows() == 0 || T.cols() == Wm.cols(),
          "mmse_precoder: T columns must match RF chains");
  const Eigen::MatrixXcd reg =
      (users * noise_power / total_power) * (Wm.adjoint() * Wm);
  const Eigen::MatrixXcd normal = T.adjoint() * T + reg;
  const Eigen::FullPivLU<Eigen::MatrixXcd> lu(normal);
  if (!lu.isInvertible())
    throw std::runtime_error("mmse_precoder: singular normal matrix");
  DigitalPrecoder out;
  out.kind = PrecoderKind::Mmse;
  out.F = lu.solve(T.adjoint());
  normalize_columns(out.F, Wm);
  return out;
}

DigitalPrecoder zf_precoder(const Eigen::MatrixXcd& T, const AnalogBeamformer& W) {
  const Eigen::MatrixXcd gram = T * T.adjoint();
  const Eigen::FullPivLU<Eigen::MatrixXcd> lu(gram);
  if (!lu.isInvertible())
    throw std::runtime_error("zf_precoder: T T^H is rank deficient");
  DigitalPrecoder out;
  out.kind = PrecoderKind::Zf;
  out.F = T.adjoint() * lu.inverse();
  normalize_columns(out.F, W.matrix());
  return out;
}

}  // namespace risthz
