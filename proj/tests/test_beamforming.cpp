#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "risthz/beamforming.hpp"

using namespace risthz;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kF350 = 350e9;
const double kLambda350 = kSpeedOfLight / kF350;

ArrayGeometry make_panel(int rows, int cols, double spacing = -1.0) {
  ArrayGeometry g;
  g.rows = rows;
  g.cols = cols;
  g.element_spacing = spacing < 0 ? kLambda350 / 2 : spacing;
  return g;
}

Eigen::VectorXcd random_unit_modulus(int n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  Eigen::VectorXcd q(n);
  for (int i = 0; i < n; ++i) q(i) = std::polar(1.0, u(rng));
  return q;
}

Eigen::MatrixXcd random_complex(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = cxd(n01(rng), n01(rng));
  return m;
}

// Objective |q^T ((H^T conj(v)) ⊙ a_sa)|^2 written out longhand, used as
// an independent check of the closed-form and PBA paths.
double ris_objective(const Eigen::VectorXcd& q, const Eigen::MatrixXcd& H,
                     const Eigen::VectorXcd& v, const Eigen::VectorXcd& a_sa) {
  Eigen::VectorXcd target = (H.transpose() * v.conjugate()).cwiseProduct(a_sa);
  cxd acc = 0.0;
  for (int i = 0; i < q.size(); ++i) acc += q(i) * target(i);
  return std::norm(acc);
}

AnalogBeamformer make_beamformer(int chains, int elems, Rng& rng) {
  AnalogBeamformer W;
  for (int c = 0; c < chains; ++c) {
    W.subarray_beams.push_back(random_unit_modulus(elems, rng) / std::sqrt(double(elems)));
    W.powers.push_back(1.0);
  }
  return W;
}

}  // namespace

TEST_CASE("AnalogBeamformer assembles a block-diagonal matrix") {
  Rng rng(1);
  AnalogBeamformer W = make_beamformer(3, 4, rng);
  CHECK(W.chain_count() == 3);
  CHECK_NOTHROW(W.validate());

  Eigen::MatrixXcd M = W.matrix();
  CHECK(M.rows() == 12);
  CHECK(M.cols() == 3);
  for (int c = 0; c < 3; ++c) {
    // On-diagonal block carries the beam...
    CHECK((M.col(c).segment(4 * c, 4) - W.subarray_beams[c]).norm() == 0.0);
    // ...and the column has unit norm, zero elsewhere.
    CHECK(M.col(c).norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
  // W^H W = I for unit per-subarray beams.
  CHECK((M.adjoint() * M - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-13);

  SUBCASE("wrong entry magnitudes fail validation") {
    W.subarray_beams[1] *= 2.0;
    CHECK_THROWS_AS(W.validate(), std::invalid_argument);
  }
  SUBCASE("power/beam count mismatch fails validation") {
    W.powers.pop_back();
    CHECK_THROWS_AS(W.validate(), std::invalid_argument);
  }
}

TEST_CASE("RisPhaseConfig flattens block phases in order") {
  Rng rng(2);
  RisPhaseConfig cfg;
  cfg.blocks.push_back(random_unit_modulus(4, rng));
  cfg.blocks.push_back(random_unit_modulus(4, rng));
  CHECK_NOTHROW(cfg.validate());

  Eigen::VectorXcd flat = cfg.flatten();
  CHECK(flat.size() == 8);
  CHECK((flat.segment(0, 4) - cfg.blocks[0]).norm() == 0.0);
  CHECK((flat.segment(4, 4) - cfg.blocks[1]).norm() == 0.0);

  cfg.blocks[0](2) *= 0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("codebooks form a centered lattice of steering beams") {
  ArrayGeometry g = make_panel(4, 4);
  AnglePair center{0.3, -0.2};
  double half_span = 0.05;
  double resolution = 0.02;
  Codebook cb = generate_codebook(g, kLambda350, center, half_span, resolution);

  // ceil(0.05 / 0.02) = 3 cells per side: 7 x 7 lattice.
  CHECK(cb.beams.size() == 49);
  CHECK(cb.pointing.size() == 49);
  CHECK(cb.resolution == resolution);

  bool found_center = false;
  for (std::size_t i = 0; i < cb.pointing.size(); ++i) {
    CHECK(cb.beams[i].norm() == doctest::Approx(1.0).epsilon(1e-13));
    if (std::abs(cb.pointing[i].azimuth - center.azimuth) < 1e-15 &&
        std::abs(cb.pointing[i].elevation - center.elevation) < 1e-15) {
      found_center = true;
      // The center codeword is the plain steering vector.
      SteeringVector s = steering_vector(g, center, kLambda350);
      CHECK((cb.beams[i] - s.entries).norm() < 1e-14);
    }
  }
  CHECK(found_center);

  SUBCASE("pointing angles stay on the lattice") {
    for (const AnglePair& p : cb.pointing) {
      double da = (p.azimuth - center.azimuth) / resolution;
      double de = (p.elevation - center.elevation) / resolution;
      CHECK(std::abs(da - std::round(da)) < 1e-12);
      CHECK(std::abs(de - std::round(de)) < 1e-12);
      CHECK(std::abs(da) <= 3.0 + 1e-12);
      CHECK(std::abs(de) <= 3.0 + 1e-12);
    }
  }

  SUBCASE("invalid spans and resolutions are rejected") {
    CHECK_THROWS_AS(generate_codebook(g, kLambda350, center, -0.1, 0.02),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate_codebook(g, kLambda350, center, 0.05, 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("transmit and receive beams are steering vectors") {
  ArrayGeometry sub = make_panel(4, 4);
  AnglePair aod{-0.8, 0.25};
  TransmitBeam tx = design_transmit_beam(aod, sub, kLambda350, 0.4);
  SteeringVector s = steering_vector(sub, aod, kLambda350);
  CHECK((tx.weights - s.entries).norm() < 1e-14);
  CHECK(tx.power == 0.4);

  ArrayGeometry user = make_panel(2, 2);
  AnglePair aoa{1.1, -0.4};
  Eigen::VectorXcd rx = design_receive_beam(aoa, user, kLambda350);
  SteeringVector su = steering_vector(user, aoa, kLambda350);
  CHECK((rx - su.entries).norm() < 1e-14);
}

TEST_CASE("diag_quadratic_form equals the direct diagonal expansion") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 2 + static_cast<int>(rng() % 16);
    Eigen::VectorXcd x = random_complex(n, 1, rng);
    Eigen::VectorXcd y = random_complex(n, 1, rng);
    Eigen::VectorXcd z = random_complex(n, 1, rng);
    cxd via_identity = diag_quadratic_form(x, y, z);
    cxd direct = y.adjoint() * Eigen::MatrixXcd(x.asDiagonal()) * z;
    CAPTURE(trial);
    CHECK(std::abs(via_identity - direct) < 1e-12 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("closed-form RIS phases attain the entrywise-magnitude optimum") {
  Rng rng(7);

  SUBCASE("an all-real-positive target needs no phase correction") {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Identity(4, 4);
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(4);
    Eigen::VectorXcd a_sa = Eigen::VectorXcd::Ones(4);
    RisPhaseResult r = closed_form_ris_phase(H, v, a_sa);
    CHECK_FALSE(r.degenerate);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(r.q(i) - cxd(1.0, 0.0)) < 1e-14);
  }

  SUBCASE("objective equals the squared sum of target magnitudes") {
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXcd H = random_complex(2, 4, rng);
      Eigen::VectorXcd v = random_complex(2, 1, rng);
      Eigen::VectorXcd a_sa = random_unit_modulus(4, rng) / 2.0;
      RisPhaseResult r = closed_form_ris_phase(H, v, a_sa);

      Eigen::VectorXcd target = (H.transpose() * v.conjugate()).cwiseProduct(a_sa);
      double expected = std::pow(target.cwiseAbs().sum(), 2.0);
      CAPTURE(trial);
      CHECK(ris_objective(r.q, H, v, a_sa) ==
            doctest::Approx(expected).epsilon(1e-12));
      for (int i = 0; i < 4; ++i) CHECK(std::abs(std::abs(r.q(i)) - 1.0) < 1e-14);
    }
  }

  SUBCASE("beats random and exhaustive 64-level candidates") {
    std::uniform_real_distribution<double> u(0.0, 2 * kPi);
    for (int trial = 0; trial < 5; ++trial) {
      // 2x2 sub-RIS: 4 phases.
      Eigen::MatrixXcd H = random_complex(4, 4, rng);
      Eigen::VectorXcd v = random_complex(4, 1, rng);
      Eigen::VectorXcd a_sa = random_unit_modulus(4, rng) / 2.0;
      RisPhaseResult r = closed_form_ris_phase(H, v, a_sa);
      double closed = ris_objective(r.q, H, v, a_sa);

      double best_random = 0.0;
      for (int c = 0; c < 20000; ++c) {
        best_random =
            std::max(best_random, ris_objective(random_unit_modulus(4, rng), H, v, a_sa));
      }

      // 64-level exhaustive grid via running partial sums.
      Eigen::VectorXcd target = (H.transpose() * v.conjugate()).cwiseProduct(a_sa);
      double best_grid = 0.0;
      std::vector<cxd> level(64);
      for (int l = 0; l < 64; ++l) level[l] = std::polar(1.0, 2 * kPi * l / 64);
      for (int l0 = 0; l0 < 64; ++l0) {
        cxd s0 = level[l0] * target(0);
        for (int l1 = 0; l1 < 64; ++l1) {
          cxd s1 = s0 + level[l1] * target(1);
          for (int l2 = 0; l2 < 64; ++l2) {
            cxd s2 = s1 + level[l2] * target(2);
            for (int l3 = 0; l3 < 64; ++l3) {
              best_grid = std::max(best_grid, std::norm(s2 + level[l3] * target(3)));
            }
          }
        }
      }

      CAPTURE(trial);
      CHECK(closed >= best_random * (1.0 - 1e-9));
      CHECK(closed >= best_grid * (1.0 - 1e-9));
    }
  }

  SUBCASE("zero-magnitude target entries set the degenerate flag") {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Identity(4, 4);
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(4);
    Eigen::VectorXcd a_sa = Eigen::VectorXcd::Ones(4);
    a_sa(1) = 0.0;
    RisPhaseResult r = closed_form_ris_phase(H, v, a_sa);
    CHECK(r.degenerate);
    CHECK(std::abs(std::abs(r.q(1)) - 1.0) < 1e-14);  // still unit modulus
  }
}

TEST_CASE("PBA refines beams inside the error cone") {
  ArrayGeometry user = make_panel(2, 2);
  ArrayGeometry subris = make_panel(4, 4);
  const double d2 = 3.0;

  // True link: user-side arrival and RIS-side departure slightly off the
  // location estimates (the estimates are the codebook centers).
  AnglePair true_aoa{0.42, -0.13};
  AnglePair true_aod{-2.28, 0.40};
  AnglePair est_aoa{0.40, -0.10};
  AnglePair est_aod{-2.30, 0.42};

  SteeringVector a_r = steering_vector(user, true_aoa, kLambda350);
  SteeringVector a_sd = steering_vector(subris, true_aod, kLambda350);
  Eigen::MatrixXcd H_true =
      std::sqrt(4.0 * 16.0) * 1e-4 * (a_r.entries * a_sd.entries.adjoint());
  SteeringVector a_sa =
      steering_vector(subris, AnglePair{-2.0, -0.5}, kLambda350);

  const double error_radius = 0.1;
  double cone = std::asin(std::min(1.0, error_radius / d2));
  double resolution = 0.01;
  Codebook rx_cb = generate_codebook(user, kLambda350, est_aoa, cone + resolution,
                                     resolution);
  Codebook ris_cb = generate_codebook(subris, kLambda350, est_aod, cone + resolution,
                                      resolution);

  Eigen::VectorXcd v0 = design_receive_beam(est_aoa, user, kLambda350);
  RisPhaseResult init = closed_form_ris_phase(H_true, v0, a_sa.entries);

  PbaResult res = pba(v0, init.q, est_aoa, est_aod, H_true, a_sa.entries, rx_cb,
                      ris_cb, error_radius, d2);

  SUBCASE("the trace is nondecreasing and ends at the reported optimum") {
    REQUIRE(res.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < res.objective_trace.size(); ++i) {
      CHECK(res.objective_trace[i] >= res.objective_trace[i - 1] * (1.0 - 1e-12));
    }
    CHECK(res.evaluations > 0);
    CHECK_FALSE(res.used_fallback);
  }

  SUBCASE("refinement beats the initial location-only configuration") {
    double initial = ris_objective(init.q, H_true, v0, a_sa.entries);
    double refined = ris_objective(res.q, H_true, res.v, a_sa.entries);
    CHECK(refined >= initial * (1.0 - 1e-12));
    // The true angles are inside the cone, so the lattice gets closer to
    // them than the initial estimate-pointed beams.
    CHECK(refined > initial);
  }

  SUBCASE("selected pointing angles stay inside the search cone") {
    double tol = resolution * std::sqrt(2.0) + 1e-9;
    CHECK(angular_separation(res.v_angles, est_aoa) <= cone + tol);
    CHECK(angular_separation(res.w_angles, est_aod) <= cone + tol);
  }

  SUBCASE("q stays unit-modulus") {
    for (int i = 0; i < res.q.size(); ++i) {
      CHECK(std::abs(std::abs(res.q(i)) - 1.0) < 1e-12);
    }
  }

  SUBCASE("zero error radius keeps the center beams") {
    PbaResult frozen = pba(v0, init.q, est_aoa, est_aod, H_true, a_sa.entries, rx_cb,
                           ris_cb, 0.0, d2);
    CHECK((frozen.v - v0).norm() < 1e-14);
    CHECK(frozen.v_angles.azimuth == doctest::Approx(est_aoa.azimuth));
    CHECK(frozen.w_angles.azimuth == doctest::Approx(est_aod.azimuth));
  }
}

TEST_CASE("search complexity matches the frozen scheme counts") {
  struct Row {
    int n;
    double exhaustive, tree, deactivation;
  };
  const Row rows[] = {
      {1, 2.0, 15.0, 5.0},
      {3, 90.0, 63.0, 21.0},
      {9, 6642.0, 183.0, 61.0},
      {27, 532170.0, 519.0, 173.0},
      {81, 43053282.0, 1503.0, 501.0},
  };
  for (const Row& r : rows) {
    CAPTURE(r.n);
    CHECK(search_complexity(SearchScheme::Exhaustive, r.n) == r.exhaustive);
    CHECK(search_complexity(SearchScheme::TreeDictionary, r.n) == r.tree);
    CHECK(search_complexity(SearchScheme::PhaseShifterDeactivation, r.n) ==
          r.deactivation);
  }

  SUBCASE("sensor-assisted cost is the restricted codebook product") {
    CHECK(search_complexity(SearchScheme::SensorPba, 27, 9, 25) == 225.0);
    CHECK(search_complexity(SearchScheme::SensorPba, 81, 1, 1) == 1.0);
  }

  SUBCASE("counts grow with codebook size") {
    for (int n : {3, 9, 27}) {
      CHECK(search_complexity(SearchScheme::Exhaustive, 3 * n) >
            search_complexity(SearchScheme::Exhaustive, n));
      CHECK(search_complexity(SearchScheme::TreeDictionary, 3 * n) >
            search_complexity(SearchScheme::TreeDictionary, n));
    }
  }

  SUBCASE("invalid sizes are rejected") {
    CHECK_THROWS_AS(search_complexity(SearchScheme::Exhaustive, 0), std::invalid_argument);
  }
}

TEST_CASE("digital precoders normalize through the analog stage") {
  Rng rng(11);
  const int K = 4;
  AnalogBeamformer W = make_beamformer(K, 4, rng);
  Eigen::MatrixXcd T = random_complex(K, K, rng);
  const double noise = 1e-9;
  const double power = 1.0;

  SUBCASE("MMSE columns satisfy ||W f_k|| = 1") {
    DigitalPrecoder F = mmse_precoder(T, W, noise, power, K);
    CHECK(F.kind == PrecoderKind::Mmse);
    Eigen::MatrixXcd WM = W.matrix();
    for (int k = 0; k < K; ++k) {
      CHECK((WM * F.F.col(k)).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("ZF zeroes the off-diagonal effective channel") {
    DigitalPrecoder F = zf_precoder(T, W);
    CHECK(F.kind == PrecoderKind::Zf);
    Eigen::MatrixXcd eff = T * F.F;
    for (int i = 0; i < K; ++i) {
      for (int j = 0; j < K; ++j) {
        if (i == j) {
          CHECK(std::abs(eff(i, j)) > 0.0);
        } else {
          CHECK(std::abs(eff(i, j)) < 1e-12 * std::abs(eff(i, i)));
        }
      }
    }
    Eigen::MatrixXcd WM = W.matrix();
    for (int k = 0; k < K; ++k) {
      CHECK((WM * F.F.col(k)).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("MMSE approaches ZF as the noise vanishes") {
    DigitalPrecoder Fz = zf_precoder(T, W);
    DigitalPrecoder Fm = mmse_precoder(T, W, 1e-18, power, K);
    Eigen::MatrixXcd effm = T * Fm.F;
    for (int i = 0; i < K; ++i) {
      for (int j = 0; j < K; ++j) {
        if (i != j) CHECK(std::abs(effm(i, j)) < 1e-6 * std::abs(effm(i, i)));
      }
    }
    // And the columns converge to the ZF ones.
    CHECK((Fm.F - Fz.F).norm() < 1e-6 * Fz.F.norm());
  }

  SUBCASE("rank-deficient channels throw") {
    Eigen::MatrixXcd singular = Eigen::MatrixXcd::Zero(K, K);
    CHECK_THROWS_AS(zf_precoder(singular, W), std::runtime_error);
    CHECK_THROWS_AS(mmse_precoder(singular, W, 0.0, power, K), std::runtime_error);
  }
}
