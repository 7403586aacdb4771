#ifndef QPMFORGE_MODES_HPP
#define QPMFORGE_MODES_HPP

#include <Eigen/Dense>
#include <vector>

#include "qpmforge/spectra.hpp"

namespace qpmforge {

// Frequency-bin basis: Gaussian modes of width sigma centered at
// center0 + n * spacing/2 for integer labels n.
struct BinBasis {
  std::vector<int> labels;   // ascending
  double center0 = 0.0;      // rad/s, axis center frequency
  double half_spacing = 0.0; // rad/s, delta_omega / 2
  double sigma = 0.0;        // rad/s

  double center(int label) const { return center0 + label * half_spacing; }
  double value(int label, double omega) const;  // G_n(omega), unit L2 norm
  // Closed-form overlap integral of two bins.
  double overlap(int label_a, int label_b) const;
};

BinBasis make_bin_basis(double center0, const BinGeometry& geom, int max_label);

// Symmetric complex matrix of pairwise squeeze amplitudes over bin labels.
// `scale` is the user-supplied global squeezing strength multiplying the
// unit-normalized entries.
struct SqueezeMatrix {
  std::vector<int> labels;
  Eigen::MatrixXcd values;  // symmetric, indexed like labels
  double scale = 1.0;
  double asymmetry_residual = 0.0;  // Frobenius asymmetry removed by symmetrization
  double unaccounted = 0.0;         // 1 - sum |gamma|^2 left outside the basis
  bool basis_spans_jsa = true;      // false when unaccounted > 1e-2

  int label_index(int label) const;
  complexd entry(int n, int m) const;
  void validate() const;
};

// Overlap-integral extraction of the squeeze matrix from a unit-normalized
// JSA. Rows and columns of the result run over `basis.labels`; the raw
// (signal, idler) overlap matrix is symmetrized and the dropped asymmetry is
// reported. Throws std::invalid_argument when a bin center sits closer than
// 6 sigma to the grid edge.
SqueezeMatrix extract_squeeze_matrix(const JsaGrid& jsa, const BinBasis& basis_s,
                                     const BinBasis& basis_i, double scale = 1.0);

// Closed-form squeeze matrix of a peaked pump and peaked PMF: the pump peak
// index p feeds the anti-diagonal family n + m = -2p and the PMF peak index q
// feeds the difference family n - m = 2q, so entries exist only where n + m
// and n - m are both even. pmf_coefficients run over the frequency-space peak
// index q = -N..N (peak at the axis-difference center + q * delta_omega).
// Entries are renormalized to unit Frobenius norm, matching extraction from a
// unit JSA.
SqueezeMatrix analytic_squeeze_matrix(const std::vector<double>& pump_coefficients,
                                      const std::vector<double>& pmf_coefficients,
                                      double scale = 1.0);

struct ModeCount {
  int distinct_pairs = 0;
  int single_mode_terms = 0;
  int two_mode_terms = 0;
};

// Counts unordered label pairs {n, m} with |gamma_nm| above
// threshold_rel * max|gamma|.
ModeCount count_modes(const SqueezeMatrix& gamma, double threshold_rel = 1e-3);

// Connected components of the graph whose edges are entries above
// threshold_rel * max|gamma|. Components and their members sorted ascending.
std::vector<std::vector<int>> block_decompose(const SqueezeMatrix& gamma,
                                              double threshold_rel = 1e-3);

// Descending singular values of the discretized JSA kernel, scaled by the
// grid cell area so that sum lambda^2 equals the grid L2 norm (1 for unit
// grids). Requires a unit-flag grid.
std::vector<double> singular_spectrum(const JsaGrid& jsa);

double schmidt_number(const std::vector<double>& singular_values);

}  // namespace qpmforge

#endif
