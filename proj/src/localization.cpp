#include "risthz/localization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace risthz {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

constexpr int kMaxGaussNewtonIters = 50;
constexpr double kStepTolerance = 1e-13;     // relative step size
constexpr double kPlaneTolerance = 1e-6;     // m; on-plane => degenerate

struct AnchorFrame {
  Eigen::Vector3d origin;  // anchor centroid
  Eigen::Vector3d e1, e2;  // in-plane basis
  Eigen::Vector3d normal;
};

AnchorFrame anchor_frame(const std::array<Position3D, 4>& anchors) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& a : anchors) c += a.vec();
  c /= 4.0;
  Eigen::Matrix<double, 4, 3> centered;
  for (int i = 0; i < 4; ++i) centered.row(i) = (anchors[i].vec() - c).transpose();
  const Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> svd(
      centered, Eigen::ComputeFullV | Eigen::ComputeThinU);
  AnchorFrame f;
  f.origin = c;
  f.e1 = svd.matrixV().col(0);
  f.e2 = svd.matrixV().col(1);
  f.normal = svd.matrixV().col(2);
  // Collinear anchors leave no usable second in-plane direction.
  require(svd.singularValues()(1) > 1e-9 * svd.singularValues()(0),
          "UwbAnchorSet: anchors are collinear");
  return f;
}

}  // namespace

void UwbAnchorSet::validate() const {
  require(error_scale >= 0.0, "UwbAnchorSet: error scale must be >= 0");
  (void)anchor_frame(anchors);
}

UwbAnchorSet anchors_from_ris(const ArrayGeometry& ris, double half_span,
                              double error_scale, RangingErrorModel model) {
  require(half_span > 0.0, "anchors_from_ris: half span must be positive");
  UwbAnchorSet set;
  set.error_scale = error_scale;
  set.error_model = model;
  int n = 0;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) {
      set.anchors[n++] = Position3D::from_vec(
          ris.center.vec() +
          ris.orientation * Eigen::Vector3d(sx * half_span, sy * half_span, 0.0));
    }
  set.validate();
  return set;
}

std::array<double, 4> range_measurements(const UwbAnchorSet& set, const Position3D& user,
                                         Rng& rng) {
  set.validate();
  std::array<double, 4> out{};
  std::normal_distribution<double> gauss(0.0, set.error_scale);
  std::uniform_real_distribution<double> uni(-set.error_scale, set.error_scale);
  for (int i = 0; i < 4; ++i) {
    const double eps = set.error_scale == 0.0 ? 0.0
                       : set.error_model == RangingErrorModel::Gaussian ? gauss(rng)
                                                                        : uni(rng);
    out[i] = distance(user, set.anchors[i]) + eps;
  }
  return out;
}

MultilaterationResult multilaterate(const UwbAnchorSet& set,
                                    const std::array<double, 4>& ranges,
                                    HalfSpace side) {
  set.validate();
  for (double r : ranges) require(r > 0.0, "multilaterate: ranges must be positive");
  const AnchorFrame frame = anchor_frame(set.anchors);

  // Closed-form initializer. Subtracting the mean of the sphere equations
  // |p - a_i|^2 = r_i^2 eliminates |p|^2 and leaves a linear system for
  // the in-plane coordinates; the plane-normal coordinate then follows
  // from one sphere equation, sign chosen by the declared half-space.
  Eigen::Matrix<double, 4, 2> A;
  Eigen::Vector4d b;
  double mean_r2 = 0.0, mean_a2 = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d d = set.anchors[i].vec() - frame.origin;
    mean_r2 += ranges[i] * ranges[i] / 4.0;
    mean_a2 += d.squaredNorm() / 4.0;
  }
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d d = set.anchors[i].vec() - frame.origin;
    A(i, 0) = -2.0 * d.dot(frame.e1);
    A(i, 1) = -2.0 * d.dot(frame.e2);
    b(i) = ranges[i] * ranges[i] - mean_r2 - d.squaredNorm() + mean_a2;
  }
  const Eigen::Vector2d inplane =
      A.colPivHouseholderQr().solve(b);

  double h2 = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d d = set.anchors[i].vec() - frame.origin;
    const double dx = inplane(0) - d.dot(frame.e1);
    const double dy = inplane(1) - d.dot(frame.e2);
    h2 += (ranges[i] * ranges[i] - dx * dx - dy * dy) / 4.0;
  }
  const double sign = side == HalfSpace::PositiveNormal ? 1.0 : -1.0;
  const double h = sign * std::sqrt(std::max(h2, 0.0));
  Eigen::Vector3d p =
      frame.origin + inplane(0) * frame.e1 + inplane(1) * frame.e2 + h * frame.normal;

  // Gauss-Newton on the range residuals f_i = |p - a_i| - r_i.
  MultilaterationResult result;
  bool converged = false;
  Eigen::Matrix<double, 4, 3> J;
  Eigen::Vector4d f;
  for (int iter = 0; iter < kMaxGaussNewtonIters; ++iter) {
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector3d d = p - set.anchors[i].vec();
      const double dist = d.norm();
      if (dist < 1e-12) {  // sitting on an anchor; nudge off along the normal
        J.row(i) = frame.normal.transpose();
        f(i) = -ranges[i];
        continue;
      }
      J.row(i) = (d / dist).transpose();
      f(i) = dist - ranges[i];
    }
    const Eigen::Matrix3d JtJ = J.transpose() * J;
    const Eigen::Vector3d step = JtJ.ldlt().solve(-J.transpose() * f);
    p += step;
    result.iterations = iter + 1;
    if (!step.allFinite()) break;
    if (step.norm() <= kStepTolerance * (1.0 + p.norm())) {
      converged = true;
      break;
    }
  }

  for (int i = 0; i < 4; ++i)
    f(i) = (p - set.anchors[i].vec()).norm() - ranges[i];
  result.residual_rms = std::sqrt(f.squaredNorm() / 4.0);
  result.estimate.position = Position3D::from_vec(p);

  const double normal_offset = frame.normal.dot(p - frame.origin);
  if (std::abs(normal_offset) < kPlaneTolerance) {
    // On the anchor plane the mirror solutions coincide and the fix
    // cannot be attributed to either half-space.
    result.status = MultilaterationStatus::Degenerate;
  } else if (!converged) {
    result.status = MultilaterationStatus::Diverged;
  } else if (sign * normal_offset < 0.0) {
    result.status = MultilaterationStatus::Degenerate;
  } else {
    result.status = MultilaterationStatus::Converged;
  }

  // Conservative error radius: 3-sigma position dilution at the solution,
  // with the noise scale taken as the larger of the declared sensor scale
  // and the residual-based estimate (m = 4 ranges, 3 unknowns -> 1 dof).
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d d = p - set.anchors[i].vec();
    const double dist = std::max(d.norm(), 1e-12);
    J.row(i) = (d / dist).transpose();
  }
  const Eigen::Matrix3d JtJ = J.transpose() * J;
  const Eigen::Matrix3d cov = JtJ.inverse();
  const double pdop = cov.allFinite() ? std::sqrt(std::max(cov.trace(), 0.0)) : 0.0;
  const double sigma = std::max(set.error_scale, result.residual_rms * 2.0);
  result.estimate.error_radius = 3.0 * sigma * pdop;
  return result;
}

UserChannelParams estimate_user_channel_params(const PositionEstimate& est,
                                               const ArrayGeometry& ris,
                                               const Position3D& subris_center,
                                               const LinkGainFn& gain) {
  const LinkAngles link = angles_subris_to_user(ris, est.position, subris_center);
  UserChannelParams out;
  out.aod_at_ris = link.arrival;
  out.aoa_at_user = link.departure;
  out.d2 = link.dist;
  out.beta2_mag = gain(link.dist);
  return out;
}

}  // namespace risthz
