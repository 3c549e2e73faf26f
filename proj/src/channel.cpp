#include "risthz/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace risthz {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Uniform phase on [0, 2pi); one draw per scattered path / LOS realization.
cxd random_phase(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  return std::polar(1.0, u(rng));
}

}  // namespace

SteeringVector steering_vector(const ArrayGeometry& g, const AnglePair& angles,
                               double wavelength) {
  require(wavelength > 0.0, "steering_vector: wavelength must be positive");
  g.validate();
  const int m = g.rows, n = g.cols;
  const double scale = 1.0 / std::sqrt(static_cast<double>(m) * n);
  const double k = 2.0 * kPi * g.element_spacing / wavelength;
  const double ux = std::cos(angles.azimuth) * std::sin(angles.elevation);
  const double uy = std::sin(angles.azimuth) * std::sin(angles.elevation);
  SteeringVector out;
  out.geometry = g;
  out.angles = angles;
  out.entries.resize(m * n);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < n; ++b)
      out.entries(a * n + b) = scale * std::polar(1.0, k * (a * ux + b * uy));
  return out;
}

double AbsorptionTable::interpolate(double frequency_hz) const {
  const double f_ghz = frequency_hz / 1e9;
  if (frequency_ghz.empty()) return 0.0;
  if (f_ghz <= frequency_ghz.front()) return mu.front();
  if (f_ghz >= frequency_ghz.back()) return mu.back();
  const auto it = std::upper_bound(frequency_ghz.begin(), frequency_ghz.end(), f_ghz);
  const std::size_t hi = static_cast<std::size_t>(it - frequency_ghz.begin());
  const std::size_t lo = hi - 1;
  const double t =
      (f_ghz - frequency_ghz[lo]) / (frequency_ghz[hi] - frequency_ghz[lo]);
  return mu[lo] + t * (mu[hi] - mu[lo]);
}

AbsorptionTable load_absorption_table(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "absorption table: cannot open " + path);
  AbsorptionTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double f, m;
    if (!(ls >> f)) continue;  // blank / comment-only line
    require(static_cast<bool>(ls >> m), "absorption table: line " +
                                            std::to_string(lineno) +
                                            " needs two columns (GHz, 1/m)");
    std::string extra;
    require(!(ls >> extra), "absorption table: line " + std::to_string(lineno) +
                                " has trailing fields");
    require(f > 0.0 && m >= 0.0, "absorption table: line " + std::to_string(lineno) +
                                     " values out of range");
    require(table.frequency_ghz.empty() || f > table.frequency_ghz.back(),
            "absorption table: frequencies must be strictly ascending at line " +
                std::to_string(lineno));
    table.frequency_ghz.push_back(f);
    table.mu.push_back(m);
  }
  require(!table.frequency_ghz.empty(), "absorption table: no data rows in " + path);
  return table;
}

double los_gain_mag2(const PathLossModel& m, double dist) {
  require(m.frequency > 0.0, "los_gain: frequency must be positive");
  require(dist > 0.0, "los_gain: distance must be positive");
  require(m.mu >= 0.0, "los_gain: absorption must be nonnegative");
  const double friis = kSpeedOfLight / (4.0 * kPi * dist * m.frequency);
  return friis * friis * std::exp(-m.mu * dist);
}

cxd los_gain(const PathLossModel& m, double dist, Rng& rng) {
  return std::sqrt(los_gain_mag2(m, dist)) * random_phase(rng);
}

double cascade_pathloss_nearfield(const PathLossModel& m, double d1, double d2) {
  require(m.frequency > 0.0 && d1 > 0.0 && d2 > 0.0,
          "cascade_pathloss_nearfield: inputs must be positive");
  const double c_over = kSpeedOfLight / (4.0 * kPi * m.frequency);
  const double dsum = d1 + d2;
  return c_over * c_over / (dsum * dsum) * std::exp(-m.mu * dsum);
}

double cascade_pathloss_farfield(const PathLossModel& m, double d1, double d2) {
  require(m.frequency > 0.0 && d1 > 0.0 && d2 > 0.0,
          "cascade_pathloss_farfield: inputs must be positive");
  const double c_over = kSpeedOfLight / (4.0 * kPi * m.frequency);
  return c_over * c_over / (d1 * d1 * d2 * d2) * std::exp(-m.mu * (d1 + d2));
}

double ris_reradiation_gain_mag2(const PathLossModel& m, double d1, double d2,
                                 FieldRegime regime) {
  require(d1 > 0.0 && d2 > 0.0, "ris_reradiation_gain: distances must be positive");
  if (regime == FieldRegime::FarField) {
    return std::exp(-m.mu * d2) / (d2 * d2);
  }
  const double dsum = d1 + d2;
  return d1 * d1 * std::exp(-m.mu * d2) / (dsum * dsum);
}

void NlosProfile::validate() const {
  require(count >= 0, "NlosProfile: count must be >= 0");
  require(attenuation_db_min <= attenuation_db_max,
          "NlosProfile: attenuation range inverted");
  require(attenuation_db_min >= 0.0, "NlosProfile: attenuation must be >= 0 dB");
  require(angular_spread >= 0.0, "NlosProfile: angular spread must be >= 0");
}

LinkGainFn friis_gain(const PathLossModel& m) {
  return [m](double dist) { return std::sqrt(los_gain_mag2(m, dist)); };
}

LinkGainFn reradiation_gain(const PathLossModel& m, double d1, FieldRegime regime) {
  return [m, d1, regime](double dist) {
    return std::sqrt(ris_reradiation_gain_mag2(m, d1, dist, regime));
  };
}

namespace {

// One LOS-plus-scatter block between a subpanel pair:
//   sqrt(m1 n1 m2 n2) [ beta a1(arr) a2(dep)^H + sum_p beta_p a1(.) a2(.)^H ]
// where `arr`/`dep` are the link angles, beta has magnitude
// gain(link.dist) and a uniform phase, and each scattered path offsets
// both angle pairs by uniform draws within +-spread/2 and attenuates by a
// uniform draw in the profile's dB range.
Eigen::MatrixXcd synthesize_block(const ArrayGeometry& rx_panel,
                                  const ArrayGeometry& tx_panel, const LinkAngles& link,
                                  double wavelength, const LinkGainFn& gain,
                                  const NlosProfile& nlos, Rng& rng) {
  const double norm = std::sqrt(static_cast<double>(rx_panel.elements_per_subgrid()) *
                                tx_panel.elements_per_subgrid());
  const double los_mag = gain(link.dist);
  const cxd beta = los_mag * random_phase(rng);
  const auto rx = steering_vector(rx_panel, link.arrival, wavelength);
  const auto tx = steering_vector(tx_panel, link.departure, wavelength);
  Eigen::MatrixXcd block = norm * beta * (rx.entries * tx.entries.adjoint());

  std::uniform_real_distribution<double> atten(nlos.attenuation_db_min,
                                               nlos.attenuation_db_max);
  std::uniform_real_distribution<double> offset(-0.5 * nlos.angular_spread,
                                                0.5 * nlos.angular_spread);
  for (int p = 0; p < nlos.count; ++p) {
    const double a_db = atten(rng);
    const cxd beta_p = los_mag * std::pow(10.0, -a_db / 20.0) * random_phase(rng);
    const AnglePair arr{link.arrival.azimuth + offset(rng),
                        link.arrival.elevation + offset(rng)};
    const AnglePair dep{link.departure.azimuth + offset(rng),
                        link.departure.elevation + offset(rng)};
    const auto rx_p = steering_vector(rx_panel, arr, wavelength);
    const auto tx_p = steering_vector(tx_panel, dep, wavelength);
    block += norm * beta_p * (rx_p.entries * tx_p.entries.adjoint());
  }
  return block;
}

ArrayGeometry subpanel_of(const ArrayGeometry& g) {
  ArrayGeometry sub = g;
  sub.subgrid_rows = sub.subgrid_cols = 1;
  sub.subgrid_spacing = 0.0;
  return sub;
}

}  // namespace

ChannelMatrix synthesize_G(const ArrayGeometry& bs, const ArrayGeometry& ris,
                           const PathLossModel& model, const NlosProfile& nlos,
                           Rng& rng) {
  bs.validate();
  ris.validate();
  nlos.validate();
  const double lambda = model.wavelength();
  const auto gain = friis_gain(model);
  const int ris_elems = ris.elements_per_subgrid();
  const int bs_elems = bs.elements_per_subgrid();
  const ArrayGeometry subris = subpanel_of(ris);
  const ArrayGeometry subarray = subpanel_of(bs);

  ChannelMatrix G;
  G.row_label = DimLabel::RisElements;
  G.col_label = DimLabel::BsElements;
  G.m = Eigen::MatrixXcd::Zero(ris.subgrid_count() * ris_elems,
                               bs.subgrid_count() * bs_elems);
  for (int si = 0; si < ris.subgrid_rows; ++si)
    for (int sj = 0; sj < ris.subgrid_cols; ++sj) {
      const int i = si * ris.subgrid_cols + sj;
      const Position3D subris_pos = subgrid_center(ris, si, sj);
      for (int bi = 0; bi < bs.subgrid_rows; ++bi)
        for (int bj = 0; bj < bs.subgrid_cols; ++bj) {
          const int j = bi * bs.subgrid_cols + bj;
          const Position3D subarray_pos = subgrid_center(bs, bi, bj);
          const LinkAngles link = angles_bs_to_subris(ris, subarray_pos, subris_pos);
          G.m.block(i * ris_elems, j * bs_elems, ris_elems, bs_elems) =
              synthesize_block(subris, subarray, link, lambda, gain, nlos, rng);
        }
    }
  return G;
}

ChannelMatrix synthesize_H(const ArrayGeometry& user, const ArrayGeometry& ris,
                           const PathLossModel& model, const NlosProfile& nlos,
                           const LinkGainFn& gain, Rng& rng) {
  user.validate();
  ris.validate();
  nlos.validate();
  const double lambda = model.wavelength();
  const int ris_elems = ris.elements_per_subgrid();
  const ArrayGeometry subris = subpanel_of(ris);
  const ArrayGeometry user_panel = subpanel_of(user);

  ChannelMatrix H;
  H.row_label = DimLabel::UserElements;
  H.col_label = DimLabel::RisElements;
  H.m = Eigen::MatrixXcd::Zero(user.elements_per_subgrid(),
                               ris.subgrid_count() * ris_elems);
  for (int si = 0; si < ris.subgrid_rows; ++si)
    for (int sj = 0; sj < ris.subgrid_cols; ++sj) {
      const int i = si * ris.subgrid_cols + sj;
      const Position3D subris_pos = subgrid_center(ris, si, sj);
      // Departure at the sub-RIS, arrival (negated) at the user panel.
      const LinkAngles ris_side = angles_subris_to_user(ris, user.center, subris_pos);
      LinkAngles link;
      link.dist = ris_side.dist;
      link.arrival = ris_side.departure;   // at the user
      link.departure = ris_side.arrival;   // at the sub-RIS
      H.m.block(0, i * ris_elems, user.elements_per_subgrid(), ris_elems) =
          synthesize_block(user_panel, subris, link, lambda, gain, nlos, rng);
    }
  return H;
}

ChannelMatrix synthesize_direct_Q(const ArrayGeometry& bs, const ArrayGeometry& user,
                                  const PathLossModel& model, const NlosProfile& nlos,
                                  Rng& rng) {
  bs.validate();
  user.validate();
  nlos.validate();
  const double lambda = model.wavelength();
  const int bs_elems = bs.elements_per_subgrid();
  const int rx_elems = user.elements_per_subgrid();
  const ArrayGeometry subarray = subpanel_of(bs);
  const ArrayGeometry user_panel = subpanel_of(user);

  ChannelMatrix Q;
  Q.row_label = DimLabel::UserElements;
  Q.col_label = DimLabel::BsElements;
  Q.m = Eigen::MatrixXcd::Zero(rx_elems, bs.subgrid_count() * bs_elems);
  if (nlos.count == 0) return Q;  // blocked link, no scatterers

  const LinkAngles base = angles_between(bs, user.center, bs.center);
  const double los_mag = std::sqrt(los_gain_mag2(model, base.dist));
  const double norm =
      std::sqrt(static_cast<double>(rx_elems) * bs_elems);
  std::uniform_real_distribution<double> atten(nlos.attenuation_db_min,
                                               nlos.attenuation_db_max);
  std::uniform_real_distribution<double> offset(-0.5 * nlos.angular_spread,
                                                0.5 * nlos.angular_spread);
  for (int p = 0; p < nlos.count; ++p) {
    const double a_db = atten(rng);
    const cxd beta_p = los_mag * std::pow(10.0, -a_db / 20.0) * random_phase(rng);
    const AnglePair dep{base.arrival.azimuth + offset(rng),
                        base.arrival.elevation + offset(rng)};
    const AnglePair arr{base.departure.azimuth + offset(rng),
                        base.departure.elevation + offset(rng)};
    const auto rx_p = steering_vector(user_panel, arr, lambda);
    const auto tx_p = steering_vector(subarray, dep, lambda);
    // One plane wave across the whole BS: per-subarray steering plus the
    // phase of the path direction at each subarray center, so the full
    // matrix stays rank-1 per path.
    const Eigen::Vector3d dir = bs.orientation * direction_from_angles(dep);
    Eigen::VectorXcd tx_full(bs.subgrid_count() * bs_elems);
    for (int bi = 0; bi < bs.subgrid_rows; ++bi)
      for (int bj = 0; bj < bs.subgrid_cols; ++bj) {
        const int j = bi * bs.subgrid_cols + bj;
        const Eigen::Vector3d off =
            subgrid_center(bs, bi, bj).vec() - bs.center.vec();
        const cxd phase = std::polar(1.0, 2.0 * kPi / lambda * dir.dot(off));
        tx_full.segment(j * bs_elems, bs_elems) = phase * tx_p.entries;
      }
    Q.m += norm * beta_p * (rx_p.entries * tx_full.adjoint());
  }
  return Q;
}

ChannelMatrix cascade(const ChannelMatrix& H, const Eigen::VectorXcd& ris_phases,
                      const ChannelMatrix& G) {
  require(H.col_label == DimLabel::RisElements && G.row_label == DimLabel::RisElements,
          "cascade: H columns and G rows must both be RIS elements");
  require(H.m.cols() == ris_phases.size() && G.m.rows() == ris_phases.size(),
          "cascade: dimension mismatch with the reflection vector");
  for (Eigen::Index i = 0; i < ris_phases.size(); ++i) {
    require(std::abs(std::abs(ris_phases(i)) - 1.0) < 1e-9,
            "cascade: reflection coefficients must be unit-modulus");
  }
  ChannelMatrix T;
  T.row_label = H.row_label;
  T.col_label = G.col_label;
  T.m = H.m * ris_phases.asDiagonal() * G.m;
  return T;
}

}  // namespace risthz
