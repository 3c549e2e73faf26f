// UWB positioning: simulated ranging from four panel-corner sensors,
// Gauss-Newton multilateration with mirror-ambiguity resolution, and
// conversion of a position fix into user-link channel parameters.
#pragma once

#include <array>
#include <random>

#include "risthz/channel.hpp"
#include "risthz/geometry.hpp"

namespace risthz {

enum class RangingErrorModel { Gaussian, Uniform };

// Four ranging sensors at the corners of the RIS panel, plus the ranging
// error law: Gaussian with std `error_scale`, or uniform on
// [-error_scale, +error_scale].
struct UwbAnchorSet {
  std::array<Position3D, 4> anchors;
  double error_scale = 0.0;  // m
  RangingErrorModel error_model = RangingErrorModel::Gaussian;

  void validate() const;  // throws std::invalid_argument if degenerate
};

// Anchors at the corners of a square of the given half side length in the
// RIS plane, centered on the RIS center. The RIS aperture itself is
// typically centimeters at THz; the sensor square is a property of the
// mounting panel, hence the explicit span.
UwbAnchorSet anchors_from_ris(const ArrayGeometry& ris, double half_span,
                              double error_scale,
                              RangingErrorModel model = RangingErrorModel::Gaussian);

// Noisy ranges  d_i = |user - anchor_i| + eps_i.
std::array<double, 4> range_measurements(const UwbAnchorSet& set,
                                         const Position3D& user, Rng& rng);

struct PositionEstimate {
  Position3D position;
  double error_radius = 0.0;  // conservative bound on |estimate - truth|, m
};

enum class HalfSpace { PositiveNormal, NegativeNormal };

enum class MultilaterationStatus { Converged, Degenerate, Diverged };

struct MultilaterationResult {
  PositionEstimate estimate;
  MultilaterationStatus status = MultilaterationStatus::Converged;
  int iterations = 0;
  double residual_rms = 0.0;  // m
};

// Least-squares position from four ranges: linearized closed-form
// initializer (in-plane part from pairwise differences, out-of-plane part
// from the sphere equation with the sign of `side`), refined by
// Gauss-Newton on the range residuals. The error radius is a 3-sigma
// dilution-of-precision bound from the anchor geometry and the ranging
// error scale. Near-plane solutions are flagged Degenerate (the mirror
// ambiguity cannot be resolved there); non-convergence yields Diverged
// with the last iterate.
MultilaterationResult multilaterate(const UwbAnchorSet& set,
                                    const std::array<double, 4>& ranges,
                                    HalfSpace side = HalfSpace::PositiveNormal);

// Channel parameters of the sub-RIS -> user hop implied by a position
// fix: RIS-side departure angles, user-side arrival angles, range, and
// the LOS amplitude under the supplied gain law.
struct UserChannelParams {
  AnglePair aod_at_ris;
  AnglePair aoa_at_user;
  double d2 = 0.0;        // m
  double beta2_mag = 0.0;
};

UserChannelParams estimate_user_channel_params(const PositionEstimate& est,
                                               const ArrayGeometry& ris,
                                               const Position3D& subris_center,
                                               const LinkGainFn& gain);

}  // namespace risthz
