// Location-driven hybrid beamforming: per-subarray analog phase vectors,
// closed-form passive (RIS) phase configuration, codebook generation, the
// sensor-assisted beam refinement loop (PBA), search-complexity counts for
// the competing schemes, and the MMSE/ZF digital precoders.
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "risthz/channel.hpp"
#include "risthz/geometry.hpp"

namespace risthz {

// Block-diagonal analog precoder: one unit-modulus phase vector (entries
// of magnitude 1/sqrt(m_t n_t), unit norm) per BS subarray, with the
// per-subarray power carried separately from the phases.
struct AnalogBeamformer {
  std::vector<Eigen::VectorXcd> subarray_beams;
  std::vector<double> powers;

  int chain_count() const { return static_cast<int>(subarray_beams.size()); }
  // Dense (L_B m_t n_t) x L_B block-diagonal matrix W.
  Eigen::MatrixXcd matrix() const;
  void validate() const;  // throws std::invalid_argument
};

// Per-sub-RIS unit-modulus reflection vectors q_k.
struct RisPhaseConfig {
  std::vector<Eigen::VectorXcd> blocks;

  // Diagonal of the full reflection matrix (blocks concatenated).
  Eigen::VectorXcd flatten() const;
  void validate() const;
};

// Steering beams on a uniform (azimuth x elevation) lattice: center plus
// multiples of `resolution` out to ceil(half_span / resolution) cells on
// each side of each axis, so the lattice always contains the center and
// covers the span with at least one cell of margin.
struct Codebook {
  std::vector<Eigen::VectorXcd> beams;
  std::vector<AnglePair> pointing;
  double resolution = 0.0;  // rad
};

Codebook generate_codebook(const ArrayGeometry& g, double wavelength,
                           const AnglePair& center, double half_span,
                           double resolution);

// Transmit beam of one BS subarray steered to the given departure pair:
// the subarray steering vector's phases with power p_k alongside.
struct TransmitBeam {
  Eigen::VectorXcd weights;
  double power = 1.0;
};

TransmitBeam design_transmit_beam(const AnglePair& aod, const ArrayGeometry& bs_subarray,
                                  double wavelength, double p_k = 1.0);

// Receive beam of a user panel steered to the given arrival pair.
Eigen::VectorXcd design_receive_beam(const AnglePair& aoa, const ArrayGeometry& user,
                                     double wavelength);

// Quadratic-form identity used throughout the passive-beam design:
// for X = diag(x),  y^H X z = x^T (conj(y) ⊙ z).
cxd diag_quadratic_form(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y,
                        const Eigen::VectorXcd& z);

struct RisPhaseResult {
  Eigen::VectorXcd q;
  bool degenerate = false;  // some entry of the target had zero magnitude
};

// Closed-form sub-RIS phases maximizing |q^T ((H^T conj(v)) ⊙ a_sa)|:
//   q = conj((H^T conj(v)) ⊙ a_sa) normalized entrywise to unit modulus.
// Zero-magnitude entries get phase 0 and set the degenerate flag. The
// attained objective is (sum of entry magnitudes)^2, the global optimum
// over unit-modulus vectors.
RisPhaseResult closed_form_ris_phase(const Eigen::MatrixXcd& H_block,
                                     const Eigen::VectorXcd& v,
                                     const Eigen::VectorXcd& a_sa);

// Beam-training refinement. Starting from the location-derived receive
// beam and RIS phases, alternate:
//   - fix q, pick the in-cone receive codeword maximizing the measured
//     power |q^T ((H^T conj(v)) ⊙ a_sa)|^2;
//   - fix v, pick the in-cone RIS codeword (departure steering w, mapped
//     to phases q = phase(w ⊙ conj(a_sa))) maximizing the same objective.
// Only codewords whose pointing angles lie within the error cone of
// half-angle asin(min(1, r_e / d2)) around the location-derived angles
// are searched. Stops when the relative improvement drops below
// `rel_tolerance` or after `max_iters` iterations. If a restricted
// sub-codebook is empty the corresponding initial beam is kept and
// `used_fallback` is set.
struct PbaResult {
  Eigen::VectorXcd v;
  Eigen::VectorXcd q;
  AnglePair v_angles;        // pointing pair of the selected receive beam
  AnglePair w_angles;        // pointing pair of the selected RIS beam
  int iterations = 0;
  std::vector<double> objective_trace;  // nondecreasing
  bool used_fallback = false;
  std::int64_t evaluations = 0;  // objective evaluations performed
};

PbaResult pba(const Eigen::VectorXcd& v_init, const Eigen::VectorXcd& q_init,
              const AnglePair& v_center, const AnglePair& w_center,
              const Eigen::MatrixXcd& H_true_block, const Eigen::VectorXcd& a_sa,
              const Codebook& receive_codebook, const Codebook& ris_codebook,
              double error_radius, double d2, int max_iters = 20,
              double rel_tolerance = 1e-6);

enum class SearchScheme { Exhaustive, TreeDictionary, PhaseShifterDeactivation, SensorPba };

// Beam-search cost of the competing schemes for codebook size N:
//   exhaustive            N^2 + N^4
//   tree dictionary       18 N + 12 log3(N) - 3
//   shifter deactivation   6 N + 4 log3(N) - 1
// The sensor-assisted scheme searches only the restricted sub-codebooks;
// its count is their product, independent of N.
double search_complexity(SearchScheme scheme, int n, std::int64_t subcodebook_v = 0,
                         std::int64_t subcodebook_w = 0);

enum class PrecoderKind { Mmse, Zf };

struct DigitalPrecoder {
  Eigen::MatrixXcd F;  // L_B x K, columns scaled so ||W f_k|| = 1
  PrecoderKind kind = PrecoderKind::Mmse;
};

// Regularized inverse on the effective channel rows T (K x L_B):
//   F = (T^H T + (K sigma^2 / P) W^H W)^{-1} T^H,
// then per-column renormalization ||W f_k|| = 1. Throws
// std::runtime_error if the regularized normal matrix is singular.
DigitalPrecoder mmse_precoder(const Eigen::MatrixXcd& T, const AnalogBeamformer& W,
                              double noise_power, double total_power, int users);

// Right inverse  F = T^H (T T^H)^{-1} diag(1/||W f_k||). Throws
// std::runtime_error if T T^H is rank deficient.
DigitalPrecoder zf_precoder(const Eigen::MatrixXcd& T, const AnalogBeamformer& W);

}  // namespace risthz
