// THz channel synthesis: planar-array steering vectors, line-of-sight and
// cascaded path-loss models (with molecular absorption), scattered-path
// profiles, and assembly of the BS-RIS, RIS-user and BS-user matrices.
#pragma once

#include <complex>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "risthz/geometry.hpp"

namespace risthz {

using Rng = std::mt19937_64;
using cxd = std::complex<double>;

// Phase response of one subpanel toward (azimuth psi, elevation sigma):
// entry (a, b) of an m x n panel with element spacing r is
//   (1/sqrt(m n)) * exp(j (2 pi r / lambda) (a cos(psi) sin(sigma)
//                                          + b sin(psi) sin(sigma))),
// flattened row-major over (a, b). Unit norm by construction.
struct SteeringVector {
  Eigen::VectorXcd entries;
  ArrayGeometry geometry;
  AnglePair angles;
};

SteeringVector steering_vector(const ArrayGeometry& g, const AnglePair& angles,
                               double wavelength);

// Molecular absorption table: two whitespace-separated columns per line,
// frequency in GHz (ascending) and absorption coefficient in 1/m.
// '#' starts a comment. Lookup is linear interpolation, clamped at the
// table ends. Throws std::invalid_argument on malformed input.
struct AbsorptionTable {
  std::vector<double> frequency_ghz;
  std::vector<double> mu;

  double interpolate(double frequency_hz) const;
};

AbsorptionTable load_absorption_table(const std::string& path);

// Carrier and absorption state shared by the path-loss operations.
struct PathLossModel {
  double frequency = 0.0;  // Hz
  double mu = 0.0;         // molecular absorption coefficient, 1/m

  double wavelength() const { return kSpeedOfLight / frequency; }
};

// Squared LOS gain of a single link:
//   |beta|^2 = (c / (4 pi d f))^2 * e^{-mu d}.
double los_gain_mag2(const PathLossModel& m, double dist);

// LOS complex gain: magnitude sqrt(los_gain_mag2), phase uniform per draw.
cxd los_gain(const PathLossModel& m, double dist, Rng& rng);

// Cascaded two-hop path loss when both ends sit inside the near-field
// boundary of the RIS:  c^2 e^{-mu (d1+d2)} / ((4 pi f)^2 (d1+d2)^2).
double cascade_pathloss_nearfield(const PathLossModel& m, double d1, double d2);

// Far-field cascade:  c^2 e^{-mu (d1+d2)} / ((4 pi f)^2 d1^2 d2^2).
double cascade_pathloss_farfield(const PathLossModel& m, double d1, double d2);

// Squared amplitude of the RIS-user hop chosen so that the product with
// the Eq.-style Friis BS-RIS hop reproduces the cascade above:
//   far:  e^{-mu d2} / d2^2       near:  d1^2 e^{-mu d2} / (d1 + d2)^2.
// (A reradiating surface contributes the aperture factor once, not twice.)
double ris_reradiation_gain_mag2(const PathLossModel& m, double d1, double d2,
                                 FieldRegime regime);

// Scattered (non-LOS) path profile. Each path is attenuated relative to
// the link's LOS gain by a uniform draw in [min, max] dB and offset from
// the LOS angles by uniform draws within +-spread/2 on each angle.
struct NlosProfile {
  int count = 0;
  double attenuation_db_min = 10.0;
  double attenuation_db_max = 20.0;
  double angular_spread = 0.0;  // rad, full width

  void validate() const;  // throws std::invalid_argument
};

enum class DimLabel { BsElements, RisElements, UserElements };

// Dense complex channel block with labeled dimensions.
struct ChannelMatrix {
  Eigen::MatrixXcd m;
  DimLabel row_label = DimLabel::UserElements;
  DimLabel col_label = DimLabel::BsElements;
};

// Amplitude law for the panel-side hop of a link, as a function of
// distance. Defaults to the Friis LOS magnitude of the model.
using LinkGainFn = std::function<double(double dist)>;

LinkGainFn friis_gain(const PathLossModel& m);
LinkGainFn reradiation_gain(const PathLossModel& m, double d1, FieldRegime regime);

// BS -> RIS channel, (L_s m_s n_s) x (L_B m_t n_t). Block (i, j) couples
// BS subarray j to sub-RIS i:
//   sqrt(m_t n_t m_s n_s) [ beta_L a_sa(arrival) a_t(departure)^H
//                           + sum_paths beta_p a_sa(.) a_t(.)^H ]
// with per-pair link angles/distances and uniform per-draw phases.
ChannelMatrix synthesize_G(const ArrayGeometry& bs, const ArrayGeometry& ris,
                           const PathLossModel& model, const NlosProfile& nlos,
                           Rng& rng);

// RIS -> user channel for one user, (m_r n_r) x (L_s m_s n_s); mirror of
// synthesize_G with (a_r, a_sd) steering pairs and the supplied amplitude
// law for the RIS-user hop.
ChannelMatrix synthesize_H(const ArrayGeometry& user, const ArrayGeometry& ris,
                           const PathLossModel& model, const NlosProfile& nlos,
                           const LinkGainFn& gain, Rng& rng);

// Scatter-only BS -> user direct channel, (m_r n_r) x (L_B m_t n_t).
// Each path is a rank-1 plane wave across the whole BS (per-subarray
// steering plus inter-subarray phase), so rank <= nlos.count. count = 0
// yields an all-zeros matrix (blocked link, no scatterers).
ChannelMatrix synthesize_direct_Q(const ArrayGeometry& bs, const ArrayGeometry& user,
                                  const PathLossModel& model, const NlosProfile& nlos,
                                  Rng& rng);

// H * diag(ris_phases) * G. Checks conformability, labels, and that the
// reflection coefficients are unit-modulus (throws std::invalid_argument).
ChannelMatrix cascade(const ChannelMatrix& H, const Eigen::VectorXcd& ris_phases,
                      const ChannelMatrix& G);

}  // namespace risthz
