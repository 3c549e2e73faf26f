// Array geometry for the RIS-aided THz link simulator: panel layouts
// (uniform planar arrays grouped into subarray / sub-RIS grids), angle
// bookkeeping between panels, optimal grid spacings and the near/far field
// boundary, plus the inter-column inner product used to verify that the
// optimal spacings decorrelate the per-subarray channel columns.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <utility>

#include <Eigen/Dense>

namespace risthz {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// A point in the global frame, meters.
struct Position3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  static Position3D from_vec(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

double distance(const Position3D& a, const Position3D& b);

// Azimuth in (-pi, pi] via atan2, elevation in [-pi/2, pi/2] via asin(z/d).
// Departure angles are the negated arrival angles of the same link.
struct AnglePair {
  double azimuth = 0.0;
  double elevation = 0.0;

  AnglePair negated() const { return {-azimuth, -elevation}; }
};

// Unit direction vector for an AnglePair in its local frame.
Eigen::Vector3d direction_from_angles(const AnglePair& a);

// Angle (radians) between the directions of two AnglePairs; used for
// codebook error-cone membership tests.
double angular_separation(const AnglePair& a, const AnglePair& b);

enum class FieldRegime { NearField, FarField };

// A planar array of `rows x cols` elements, replicated on a
// `subgrid_rows x subgrid_cols` grid of subpanels (BS subarrays or
// sub-RIS blocks). Elements and subpanel centers live in the local x-y
// plane; `orientation` maps local coordinates into the global frame
// (rigid rotation, identity by default). Both grids are centered on
// `center`.
struct ArrayGeometry {
  int rows = 1;                  // elements per subpanel, first axis
  int cols = 1;                  // elements per subpanel, second axis
  double element_spacing = 0.0;  // m, within a subpanel
  int subgrid_rows = 1;
  int subgrid_cols = 1;
  double subgrid_spacing = 0.0;  // m, between subpanel centers
  Position3D center;
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();

  int elements_per_subgrid() const { return rows * cols; }
  int subgrid_count() const { return subgrid_rows * subgrid_cols; }
  int total_elements() const { return elements_per_subgrid() * subgrid_count(); }

  // Throws std::invalid_argument on non-positive counts/spacings or a
  // non-orthonormal orientation.
  void validate() const;
};

// Center of subpanel (i, j), 0-based row-major on the subgrid.
Position3D subgrid_center(const ArrayGeometry& g, int i, int j);

// The four corners of the panel's bounding rectangle in its plane
// (used to place UWB sensors on a RIS).
std::array<Position3D, 4> panel_corners(const ArrayGeometry& g);

// Express a global point in the panel's local frame (origin at a given
// local origin point, axes per `orientation`).
Eigen::Vector3d to_local_frame(const ArrayGeometry& g, const Position3D& origin,
                               const Position3D& p);

// Optimal sub-RIS center spacing  alpha = sqrt(q * d1 * lambda / n_grid)
// for an n_grid x n_grid sub-RIS grid at link distance d1. Throws
// std::invalid_argument on non-positive inputs.
double optimal_subris_spacing(double d1, double wavelength, int n_grid, int q = 1);

// Optimal BS subarray spacing  chi = sqrt(q * d1 * lambda / m_grid).
double optimal_bs_subarray_spacing(double d1, double wavelength, int m_grid, int q = 1);

// Near/far boundary for an n_grid x n_grid RIS of (m_s x n_s)-element
// sub-RIS blocks:  D = n_grid^2 * m_s * n_s * lambda / 2.
double field_boundary(int n_grid, int m_s, int n_s, double wavelength);

FieldRegime classify_field(double dist, double boundary);

// Arrival/departure angles and range of one link endpoint pair.
struct LinkAngles {
  AnglePair arrival;    // at the first-named panel, in its local frame
  AnglePair departure;  // at the other end (negated arrival)
  double dist = 0.0;    // m
};

// Angles of the BS as seen from a sub-RIS center: arrival = angles of
// (bs - subris) in the sub-RIS local frame, departure = the BS-side AOD.
// Throws std::invalid_argument for coincident points.
LinkAngles angles_bs_to_subris(const ArrayGeometry& ris, const Position3D& bs_pos,
                               const Position3D& subris_center);

// Angles of a user as seen from a sub-RIS center: arrival here is the
// RIS-side departure pair (azimuth/elevation of user - subris in the
// sub-RIS frame); departure is the user-side AOA.
LinkAngles angles_subris_to_user(const ArrayGeometry& ris, const Position3D& user_pos,
                                 const Position3D& subris_center);

// Plain link angles between two points in the local frame of `panel`
// (used for the BS-user direct link).
LinkAngles angles_between(const ArrayGeometry& panel, const Position3D& target,
                          const Position3D& origin);

// Inner product between the channel columns of BS subarrays a = (x, y)
// and b = (x_hat, y_hat) through an n x n sub-RIS grid with center
// spacing `alpha`, ignoring the (unit-magnitude) steering factors:
//
//   prefactor * sum_{u=0}^{n-1} e^{j 2 pi f alpha^2 u (x_hat - x)/(c d1)}
//             * sum_{v=0}^{n-1} e^{j 2 pi f alpha^2 v (y_hat - y)/(c d1)},
//   prefactor = (c / (4 pi f d1))^2 * e^{-mu d1}.
//
// At alpha = optimal_subris_spacing(d1, c/f, n, q) the sums cancel
// whenever the index difference is not a multiple of n / gcd(n, q).
// Indices must lie inside the BS subarray grid.
std::complex<double> channel_column_inner_product(const ArrayGeometry& bs,
                                                  const ArrayGeometry& ris,
                                                  std::pair<int, int> a,
                                                  std::pair<int, int> b, double d1,
                                                  double frequency, double alpha,
                                                  double mu = 0.0);

// |channel_column_inner_product| / (n^2 * prefactor): 1 for identical
// columns, ~0 for decorrelated ones.
double normalized_column_inner_product(const ArrayGeometry& bs, const ArrayGeometry& ris,
                                       std::pair<int, int> a, std::pair<int, int> b,
                                       double d1, double frequency, double alpha);

}  // namespace risthz
