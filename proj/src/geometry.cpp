#include "risthz/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace risthz {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

double distance(const Position3D& a, const Position3D& b) {
  return (a.vec() - b.vec()).norm();
}

Eigen::Vector3d direction_from_angles(const AnglePair& a) {
  const double ce = std::cos(a.elevation);
  return {ce * std::cos(a.azimuth), ce * std::sin(a.azimuth), std::sin(a.elevation)};
}

double angular_separation(const AnglePair& a, const AnglePair& b) {
  const double dot = direction_from_angles(a).dot(direction_from_angles(b));
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

void ArrayGeometry::validate() const {
  require(rows >= 1 && cols >= 1, "ArrayGeometry: element counts must be >= 1");
  require(subgrid_rows >= 1 && subgrid_cols >= 1,
          "ArrayGeometry: subgrid counts must be >= 1");
  require(element_spacing > 0.0 || (rows == 1 && cols == 1),
          "ArrayGeometry: element_spacing must be positive");
  if (subgrid_rows > 1 || subgrid_cols > 1) {
    require(subgrid_spacing >= element_spacing,
            "ArrayGeometry: subgrid_spacing must be >= element_spacing");
  }
  require((orientation * orientation.transpose() - Eigen::Matrix3d::Identity()).norm() <
              1e-9,
          "ArrayGeometry: orientation must be orthonormal");
}

Position3D subgrid_center(const ArrayGeometry& g, int i, int j) {
  require(i >= 0 && i < g.subgrid_rows && j >= 0 && j < g.subgrid_cols,
          "subgrid_center: index outside the subgrid");
  const Eigen::Vector3d local((i - 0.5 * (g.subgrid_rows - 1)) * g.subgrid_spacing,
                              (j - 0.5 * (g.subgrid_cols - 1)) * g.subgrid_spacing, 0.0);
  return Position3D::from_vec(g.center.vec() + g.orientation * local);
}

std::array<Position3D, 4> panel_corners(const ArrayGeometry& g) {
  const double hx = 0.5 * ((g.subgrid_rows - 1) * g.subgrid_spacing +
                           (g.rows - 1) * g.element_spacing);
  const double hy = 0.5 * ((g.subgrid_cols - 1) * g.subgrid_spacing +
                           (g.cols - 1) * g.element_spacing);
  std::array<Position3D, 4> out;
  int n = 0;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) {
      out[n++] = Position3D::from_vec(g.center.vec() +
                                      g.orientation * Eigen::Vector3d(sx * hx, sy * hy, 0.0));
    }
  return out;
}

Eigen::Vector3d to_local_frame(const ArrayGeometry& g, const Position3D& origin,
                               const Position3D& p) {
  return g.orientation.transpose() * (p.vec() - origin.vec());
}

double optimal_subris_spacing(double d1, double wavelength, int n_grid, int q) {
  require(d1 > 0.0, "optimal_subris_spacing: d1 must be positive");
  require(wavelength > 0.0, "optimal_subris_spacing: wavelength must be positive");
  require(n_grid >= 1, "optimal_subris_spacing: grid size must be >= 1");
  require(q >= 1, "optimal_subris_spacing: q must be >= 1");
  return std::sqrt(q * d1 * wavelength / n_grid);
}

double optimal_bs_subarray_spacing(double d1, double wavelength, int m_grid, int q) {
  require(d1 > 0.0, "optimal_bs_subarray_spacing: d1 must be positive");
  require(wavelength > 0.0, "optimal_bs_subarray_spacing: wavelength must be positive");
  require(m_grid >= 1, "optimal_bs_subarray_spacing: grid size must be >= 1");
  require(q >= 1, "optimal_bs_subarray_spacing: q must be >= 1");
  return std::sqrt(q * d1 * wavelength / m_grid);
}

double field_boundary(int n_grid, int m_s, int n_s, double wavelength) {
  require(n_grid >= 1 && m_s >= 1 && n_s >= 1, "field_boundary: counts must be >= 1");
  require(wavelength > 0.0, "field_boundary: wavelength must be positive");
  return static_cast<double>(n_grid) * n_grid * m_s * n_s * wavelength / 2.0;
}

FieldRegime classify_field(double dist, double boundary) {
  return dist < boundary ? FieldRegime::NearField : FieldRegime::FarField;
}

namespace {

LinkAngles local_link_angles(const ArrayGeometry& frame_owner, const Position3D& target,
                             const Position3D& origin) {
  const Eigen::Vector3d d = to_local_frame(frame_owner, origin, target);
  const double dist = d.norm();
  require(dist > 0.0, "link angles: coincident points");
  LinkAngles out;
  out.dist = dist;
  out.arrival.azimuth = std::atan2(d.y(), d.x());
  out.arrival.elevation = std::asin(std::clamp(d.z() / dist, -1.0, 1.0));
  out.departure = out.arrival.negated();
  return out;
}

}  // namespace

LinkAngles angles_bs_to_subris(const ArrayGeometry& ris, const Position3D& bs_pos,
                               const Position3D& subris_center) {
  return local_link_angles(ris, bs_pos, subris_center);
}

LinkAngles angles_subris_to_user(const ArrayGeometry& ris, const Position3D& user_pos,
                                 const Position3D& subris_center) {
  return local_link_angles(ris, user_pos, subris_center);
}

LinkAngles angles_between(const ArrayGeometry& panel, const Position3D& target,
                          const Position3D& origin) {
  return local_link_angles(panel, target, origin);
}

std::complex<double> channel_column_inner_product(const ArrayGeometry& bs,
                                                  const ArrayGeometry& ris,
                                                  std::pair<int, int> a,
                                                  std::pair<int, int> b, double d1,
                                                  double frequency, double alpha,
                                                  double mu) {
  require(a.first >= 0 && a.first < bs.subgrid_rows && a.second >= 0 &&
              a.second < bs.subgrid_cols,
          "channel_column_inner_product: first index outside the BS subgrid");
  require(b.first >= 0 && b.first < bs.subgrid_rows && b.second >= 0 &&
              b.second < bs.subgrid_cols,
          "channel_column_inner_product: second index outside the BS subgrid");
  require(d1 > 0.0 && frequency > 0.0 && alpha > 0.0,
          "channel_column_inner_product: d1, frequency, alpha must be positive");
  require(ris.subgrid_rows == ris.subgrid_cols,
          "channel_column_inner_product: sub-RIS grid must be square");

  const int n = ris.subgrid_rows;
  const double prefactor =
      std::pow(kSpeedOfLight / (4.0 * kPi * frequency * d1), 2) * std::exp(-mu * d1);
  // Per-step phase along each grid axis; a geometric series in u (resp. v).
  const double step = 2.0 * kPi * frequency * alpha * alpha / (kSpeedOfLight * d1);
  const auto axis_sum = [&](int delta) {
    std::complex<double> s = 0.0;
    for (int u = 0; u < n; ++u) s += std::polar(1.0, step * u * delta);
    return s;
  };
  return prefactor * axis_sum(b.first - a.first) * axis_sum(b.second - a.second);
}

double normalized_column_inner_product(const ArrayGeometry& bs, const ArrayGeometry& ris,
                                       std::pair<int, int> a, std::pair<int, int> b,
                                       double d1, double frequency, double alpha) {
  const double n2 = static_cast<double>(ris.subgrid_rows) * ris.subgrid_rows;
  const double prefactor =
      std::pow(kSpeedOfLight / (4.0 * kPi * frequency * d1), 2);
  const auto ip = channel_column_inner_product(bs, ris, a, b, d1, frequency, alpha, 0.0);
  return std::abs(ip) / (n2 * prefactor);
}

}  // namespace risthz
