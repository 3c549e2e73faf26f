#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "risthz/geometry.hpp"

using namespace risthz;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kF350 = 350e9;
constexpr double kLambda350 = kSpeedOfLight / kF350;  // 8.5654988e-4 m

ArrayGeometry make_panel(int rows, int cols, double spacing, int grid_rows = 1,
                         int grid_cols = 1, double grid_spacing = 0.0) {
  ArrayGeometry g;
  g.rows = rows;
  g.cols = cols;
  g.element_spacing = spacing;
  g.subgrid_rows = grid_rows;
  g.subgrid_cols = grid_cols;
  g.subgrid_spacing = grid_spacing;
  return g;
}

Eigen::Matrix3d rot_z(double angle) {
  return Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

}  // namespace

TEST_CASE("distance matches the Euclidean norm") {
  Position3D a{1.0, 2.0, 3.0};
  Position3D b{4.0, 6.0, 3.0};
  CHECK(distance(a, b) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(distance(a, a) == 0.0);
  CHECK(distance({0, 0, 0}, {-0.6, -0.7, 0.4}) ==
        doctest::Approx(1.004987562112089).epsilon(1e-15));
}

TEST_CASE("Position3D round-trips through Eigen vectors") {
  Position3D p{-0.5, 0.25, 7.0};
  Position3D q = Position3D::from_vec(p.vec());
  CHECK(q.x == p.x);
  CHECK(q.y == p.y);
  CHECK(q.z == p.z);
}

TEST_CASE("link angles follow the atan2/asin convention") {
  ArrayGeometry panel = make_panel(2, 2, 0.01);

  SUBCASE("target on the +x axis has zero azimuth and elevation") {
    LinkAngles link = angles_between(panel, {3.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
    CHECK(link.arrival.azimuth == doctest::Approx(0.0));
    CHECK(link.arrival.elevation == doctest::Approx(0.0));
    CHECK(link.dist == doctest::Approx(3.0));
  }

  SUBCASE("diagonal target (1, 1, sqrt 2) gives pi/4 azimuth and elevation") {
    LinkAngles link = angles_between(panel, {1.0, 1.0, std::sqrt(2.0)}, {0.0, 0.0, 0.0});
    CHECK(link.arrival.azimuth == doctest::Approx(kPi / 4).epsilon(1e-14));
    CHECK(link.arrival.elevation == doctest::Approx(kPi / 4).epsilon(1e-14));
    CHECK(link.dist == doctest::Approx(2.0).epsilon(1e-14));
  }

  SUBCASE("frozen oracle for the point (-0.6, -0.7, 0.4)") {
    LinkAngles link = angles_between(panel, {-0.6, -0.7, 0.4}, {0.0, 0.0, 0.0});
    CHECK(link.dist == doctest::Approx(1.004987562112089).epsilon(1e-14));
    CHECK(link.arrival.azimuth == doctest::Approx(-2.279422598922567).epsilon(1e-14));
    CHECK(link.arrival.elevation == doctest::Approx(0.4093519193789973).epsilon(1e-14));
  }

  SUBCASE("departure is the negated arrival pair") {
    LinkAngles link = angles_between(panel, {-0.6, -0.7, 0.4}, {0.0, 0.0, 0.0});
    CHECK(link.departure.azimuth == doctest::Approx(-link.arrival.azimuth));
    CHECK(link.departure.elevation == doctest::Approx(-link.arrival.elevation));
  }

  SUBCASE("coincident endpoints are rejected") {
    CHECK_THROWS_AS(angles_between(panel, {1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("link angles are expressed in the panel's local frame") {
  // Rotating the panel by +90 degrees about z shifts the apparent azimuth
  // of a fixed target by -90 degrees and leaves elevation alone.
  ArrayGeometry panel = make_panel(2, 2, 0.01);
  LinkAngles plain = angles_between(panel, {1.0, 1.0, 0.5}, {0.0, 0.0, 0.0});
  panel.orientation = rot_z(kPi / 2);
  LinkAngles rotated = angles_between(panel, {1.0, 1.0, 0.5}, {0.0, 0.0, 0.0});
  CHECK(rotated.arrival.azimuth ==
        doctest::Approx(plain.arrival.azimuth - kPi / 2).epsilon(1e-13));
  CHECK(rotated.arrival.elevation ==
        doctest::Approx(plain.arrival.elevation).epsilon(1e-13));
  CHECK(rotated.dist == doctest::Approx(plain.dist));
}

TEST_CASE("BS and user link helpers agree with angles_between") {
  ArrayGeometry ris = make_panel(4, 4, kLambda350 / 2, 2, 2, 0.05);
  Position3D subris{0.025, -0.025, 0.0};
  Position3D bs{-4.0, -4.0, -2.0};
  Position3D user{2.0, 2.0, 1.0};

  LinkAngles g_link = angles_bs_to_subris(ris, bs, subris);
  LinkAngles ref = angles_between(ris, bs, subris);
  CHECK(g_link.arrival.azimuth == ref.arrival.azimuth);
  CHECK(g_link.arrival.elevation == ref.arrival.elevation);
  CHECK(g_link.dist == ref.dist);

  LinkAngles h_link = angles_subris_to_user(ris, user, subris);
  LinkAngles ref2 = angles_between(ris, user, subris);
  CHECK(h_link.arrival.azimuth == ref2.arrival.azimuth);
  CHECK(h_link.dist == ref2.dist);
}

TEST_CASE("direction_from_angles inverts the angle extraction") {
  ArrayGeometry panel = make_panel(1, 1, 0.0);
  Position3D targets[] = {{1.0, 0.0, 0.0}, {-0.6, -0.7, 0.4}, {0.3, -2.0, -1.1}};
  for (const Position3D& t : targets) {
    CAPTURE(t.x);
    LinkAngles link = angles_between(panel, t, {0.0, 0.0, 0.0});
    Eigen::Vector3d dir = direction_from_angles(link.arrival);
    CHECK(dir.norm() == doctest::Approx(1.0).epsilon(1e-14));
    Eigen::Vector3d expected = t.vec().normalized();
    CHECK((dir - expected).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("angular_separation is a metric-like cone test") {
  AnglePair a{0.3, 0.2};
  CHECK(angular_separation(a, a) == doctest::Approx(0.0));
  AnglePair x_axis{0.0, 0.0};
  AnglePair y_axis{kPi / 2, 0.0};
  CHECK(angular_separation(x_axis, y_axis) == doctest::Approx(kPi / 2).epsilon(1e-14));
  // At the zenith the azimuth is immaterial.
  AnglePair zen1{0.4, kPi / 2};
  AnglePair zen2{-2.0, kPi / 2};
  CHECK(angular_separation(zen1, zen2) == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("ArrayGeometry counts and validation") {
  ArrayGeometry g = make_panel(4, 2, 0.001, 3, 5, 0.01);
  CHECK(g.elements_per_subgrid() == 8);
  CHECK(g.subgrid_count() == 15);
  CHECK(g.total_elements() == 120);
  CHECK_NOTHROW(g.validate());

  SUBCASE("non-positive element counts are rejected") {
    g.rows = 0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  }
  SUBCASE("zero spacing with multiple elements is rejected") {
    g.element_spacing = 0.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  }
  SUBCASE("subgrid spacing below the element footprint is rejected") {
    g.subgrid_spacing = g.element_spacing / 2;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  }
  SUBCASE("non-orthonormal orientation is rejected") {
    g.orientation(0, 0) = 2.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  }
  SUBCASE("a single isolated element needs no spacing") {
    ArrayGeometry one = make_panel(1, 1, 0.0);
    CHECK_NOTHROW(one.validate());
  }
}

TEST_CASE("subgrid centers form a centered lattice") {
  ArrayGeometry g = make_panel(2, 2, 0.001, 2, 2, 0.08);
  g.center = {1.0, 2.0, 3.0};

  Position3D c00 = subgrid_center(g, 0, 0);
  CHECK(c00.x == doctest::Approx(1.0 - 0.04));
  CHECK(c00.y == doctest::Approx(2.0 - 0.04));
  CHECK(c00.z == doctest::Approx(3.0));

  Position3D c11 = subgrid_center(g, 1, 1);
  CHECK(c11.x == doctest::Approx(1.0 + 0.04));
  CHECK(c11.y == doctest::Approx(2.0 + 0.04));

  SUBCASE("a 1x1 grid sits at the panel center") {
    ArrayGeometry single = make_panel(4, 4, 0.001);
    single.center = {5.0, -1.0, 0.5};
    Position3D c = subgrid_center(single, 0, 0);
    CHECK(c.x == doctest::Approx(5.0));
    CHECK(c.y == doctest::Approx(-1.0));
    CHECK(c.z == doctest::Approx(0.5));
  }

  SUBCASE("indices outside the grid are rejected") {
    CHECK_THROWS_AS(subgrid_center(g, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(subgrid_center(g, 0, -1), std::invalid_argument);
  }

  SUBCASE("orientation rotates the local offsets") {
    ArrayGeometry rot = make_panel(2, 2, 0.001, 2, 2, 0.08);
    rot.orientation = rot_z(kPi / 2);
    // local (-0.04, -0.04, 0) maps to global (0.04, -0.04, 0).
    Position3D c = subgrid_center(rot, 0, 0);
    CHECK(c.x == doctest::Approx(0.04));
    CHECK(c.y == doctest::Approx(-0.04));
  }
}

TEST_CASE("panel_corners bounds the element footprint") {
  // 4x4 elements at 0.5 m spacing, single subgrid: half extent 0.75 m.
  ArrayGeometry g = make_panel(4, 4, 0.5);
  auto corners = panel_corners(g);
  CHECK(corners[0].x == doctest::Approx(-0.75));
  CHECK(corners[0].y == doctest::Approx(-0.75));
  CHECK(corners[1].x == doctest::Approx(-0.75));
  CHECK(corners[1].y == doctest::Approx(0.75));
  CHECK(corners[2].x == doctest::Approx(0.75));
  CHECK(corners[2].y == doctest::Approx(-0.75));
  CHECK(corners[3].x == doctest::Approx(0.75));
  CHECK(corners[3].y == doctest::Approx(0.75));
  for (const auto& c : corners) CHECK(c.z == doctest::Approx(0.0));

  SUBCASE("subgrid replication widens the footprint") {
    ArrayGeometry wide = make_panel(2, 2, 0.1, 3, 3, 0.5);
    // half extent = ((3 - 1) * 0.5 + (2 - 1) * 0.1) / 2 = 0.55.
    auto wc = panel_corners(wide);
    CHECK(wc[3].x == doctest::Approx(0.55));
    CHECK(wc[3].y == doctest::Approx(0.55));
  }
}

TEST_CASE("to_local_frame undoes center offset and rotation") {
  ArrayGeometry g = make_panel(2, 2, 0.01);
  g.center = {1.0, 1.0, 1.0};
  g.orientation = rot_z(kPi / 2);
  // Global (1, 2, 1) is offset (0, 1, 0); in a frame rotated +90 degrees
  // about z, that offset reads (1, 0, 0).
  Eigen::Vector3d local = to_local_frame(g, g.center, {1.0, 2.0, 1.0});
  CHECK(local.x() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(local.y() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(local.z() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("optimal spacings follow the square-root law") {
  SUBCASE("frozen oracle at d1 = 6 m, 350 GHz, n = 2, q = 1") {
    double alpha = optimal_subris_spacing(6.0, kLambda350, 2, 1);
    CHECK(alpha == doctest::Approx(0.05069171174856892).epsilon(1e-14));
    CHECK(optimal_bs_subarray_spacing(6.0, kLambda350, 2, 1) ==
          doctest::Approx(alpha).epsilon(1e-14));
  }
  SUBCASE("unit inputs give unit spacing") {
    CHECK(optimal_subris_spacing(1.0, 1.0, 1, 1) == doctest::Approx(1.0));
  }
  SUBCASE("q = 4 doubles the q = 1 spacing") {
    double a1 = optimal_subris_spacing(3.0, kLambda350, 4, 1);
    double a4 = optimal_subris_spacing(3.0, kLambda350, 4, 4);
    CHECK(a4 == doctest::Approx(2.0 * a1).epsilon(1e-14));
  }
  SUBCASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(optimal_subris_spacing(0.0, kLambda350, 2), std::invalid_argument);
    CHECK_THROWS_AS(optimal_subris_spacing(6.0, -1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(optimal_subris_spacing(6.0, kLambda350, 0), std::invalid_argument);
  }
}

TEST_CASE("field boundary matches frozen oracles at 350 GHz") {
  // 2x2 grid of m_s x n_s sub-RIS blocks.
  CHECK(field_boundary(2, 4, 4, kLambda350) ==
        doctest::Approx(0.02740959616).epsilon(1e-10));
  CHECK(field_boundary(2, 8, 8, kLambda350) ==
        doctest::Approx(0.10963838464).epsilon(1e-10));
  CHECK(field_boundary(2, 16, 16, kLambda350) ==
        doctest::Approx(0.43855353856).epsilon(1e-10));
  CHECK(field_boundary(2, 32, 32, kLambda350) ==
        doctest::Approx(1.75421415424).epsilon(1e-10));

  SUBCASE("scales with the square of the grid order") {
    double d2 = field_boundary(2, 4, 4, kLambda350);
    double d4 = field_boundary(4, 4, 4, kLambda350);
    CHECK(d4 == doctest::Approx(4.0 * d2).epsilon(1e-14));
  }

  SUBCASE("classification is near below and far at or above the boundary") {
    double boundary = field_boundary(2, 4, 4, kLambda350);
    CHECK(classify_field(boundary * 0.99, boundary) == FieldRegime::NearField);
    CHECK(classify_field(boundary, boundary) == FieldRegime::FarField);
    CHECK(classify_field(boundary * 10, boundary) == FieldRegime::FarField);
  }
}

TEST_CASE("optimal spacing decorrelates channel columns") {
  const double d1 = 6.0;

  SUBCASE("n = 2, q = 1: distinct columns vanish at the optimal spacing") {
    ArrayGeometry bs = make_panel(4, 4, kLambda350 / 2, 2, 2, 0.05);
    ArrayGeometry ris = make_panel(4, 4, kLambda350 / 2, 2, 2, 0.05);
    double alpha = optimal_subris_spacing(d1, kLambda350, 2, 1);
    for (int dx = 0; dx <= 1; ++dx) {
      for (int dy = 0; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        CAPTURE(dx);
        CAPTURE(dy);
        double rho = normalized_column_inner_product(bs, ris, {0, 0}, {dx, dy}, d1,
                                                     kF350, alpha);
        CHECK(rho < 1e-10);
      }
    }
    // Identical columns keep unit normalized correlation.
    CHECK(normalized_column_inner_product(bs, ris, {1, 0}, {1, 0}, d1, kF350, alpha) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("half the optimal spacing leaves residual correlation (frozen)") {
    ArrayGeometry bs = make_panel(4, 4, kLambda350 / 2, 2, 2, 0.05);
    ArrayGeometry ris = make_panel(4, 4, kLambda350 / 2, 2, 2, 0.05);
    double alpha = optimal_subris_spacing(d1, kLambda350, 2, 1);
    double rho = normalized_column_inner_product(bs, ris, {0, 0}, {1, 0}, d1, kF350,
                                                 alpha / 2);
    // cos(pi/8) from the two-term geometric sum.
    CHECK(rho == doctest::Approx(0.9238795325112867).epsilon(1e-12));
  }

  SUBCASE("n = 4, q = 2: only index gaps divisible by n/gcd(n,q) survive") {
    ArrayGeometry bs = make_panel(2, 2, kLambda350 / 2, 4, 4, 0.05);
    ArrayGeometry ris = make_panel(4, 4, kLambda350 / 2, 4, 4, 0.05);
    double alpha = optimal_subris_spacing(d1, kLambda350, 4, 2);
    for (int dx = 0; dx <= 3; ++dx) {
      for (int dy = 0; dy <= 3; ++dy) {
        if (dx == 0 && dy == 0) continue;
        CAPTURE(dx);
        CAPTURE(dy);
        double rho = normalized_column_inner_product(bs, ris, {0, 0}, {dx, dy}, d1,
                                                     kF350, alpha);
        bool survives = (dx % 2 == 0) && (dy % 2 == 0);
        if (survives) {
          CHECK(rho == doctest::Approx(1.0).epsilon(1e-10));
        } else {
          CHECK(rho < 1e-10);
        }
      }
    }
  }

  SUBCASE("the unnormalized product carries the Friis-style prefactor") {
    ArrayGeometry bs = make_panel(4, 4, kLambda350 / 2, 2, 2, 0.05);
    ArrayGeometry ris = make_panel(4, 4, kLambda350 / 2, 2, 2, 0.05);
    double alpha = optimal_subris_spacing(d1, kLambda350, 2, 1);
    double mu = 0.05;
    std::complex<double> ip =
        channel_column_inner_product(bs, ris, {0, 0}, {0, 0}, d1, kF350, alpha, mu);
    double prefactor = std::pow(kSpeedOfLight / (4 * kPi * kF350 * d1), 2.0) *
                       std::exp(-mu * d1);
    // Equal indices: both axis sums equal n = 2, so ip = 4 * prefactor.
    CHECK(std::abs(ip - std::complex<double>(4.0 * prefactor, 0.0)) <
          1e-12 * std::abs(ip));
  }

  SUBCASE("indices outside the BS subarray grid are rejected") {
    ArrayGeometry bs = make_panel(4, 4, kLambda350 / 2, 2, 2, 0.05);
    ArrayGeometry ris = make_panel(4, 4, kLambda350 / 2, 2, 2, 0.05);
    CHECK_THROWS_AS(channel_column_inner_product(bs, ris, {0, 0}, {2, 0}, d1, kF350,
                                                 0.05),
                    std::invalid_argument);
  }
}
