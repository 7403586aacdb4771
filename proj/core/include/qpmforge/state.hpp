#ifndef QPMFORGE_STATE_HPP
#define QPMFORGE_STATE_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qpmforge/modes.hpp"

namespace qpmforge {

// Autonne-Takagi factorization gamma = U diag(r) U^T with unitary U and
// r >= 0 sorted descending. Computed from the eigendecomposition of the real
// embedding [[X, Y], [Y, -X]] of gamma = X + iY; column signs are fixed to
// make the first significant component's real part positive.
struct TakagiResult {
  Eigen::MatrixXcd unitary;
  Eigen::VectorXd magnitudes;
};

TakagiResult takagi_factorize(const Eigen::MatrixXcd& symmetric, double tol = 1e-12);

enum class Polarization : char { None = 'N', Horizontal = 'H', Vertical = 'V' };

struct ModeLabel {
  int bin = 0;
  Polarization pol = Polarization::None;
  int path = 1;

  friend bool operator==(const ModeLabel&, const ModeLabel&) = default;
  std::string to_string() const;
};

// Zero-mean Gaussian state: quadrature covariance in (x1, p1, ..., xM, pM)
// ordering with vacuum variance 1/2 per quadrature, plus the mode registry.
//
// Squeeze sign convention: the state generated from a squeeze matrix gamma is
// exp(1/2 sum gamma_nm A_n^dag A_m^dag - h.c.)|vac>, so a positive real
// diagonal entry r squeezes the p quadrature of its mode to e^{-2r}/2 and a
// positive real off-diagonal entry r squeezes (x_n - x_m)/sqrt(2) and
// (p_n + p_m)/sqrt(2) to e^{-2r}/2.
struct CovarianceState {
  std::vector<ModeLabel> modes;
  Eigen::MatrixXd covariance;  // 2M x 2M

  std::size_t mode_count() const { return modes.size(); }
  long find_mode(const ModeLabel& label) const;  // -1 when absent
  void validate() const;
};

CovarianceState vacuum_state(std::vector<ModeLabel> modes);

// Standard symplectic form in the interleaved quadrature ordering.
Eigen::MatrixXd omega_matrix(std::size_t mode_count);

// Quadrature representation of a mode-space unitary a -> W a.
Eigen::MatrixXd symplectic_from_mode_unitary(const Eigen::MatrixXcd& unitary);

bool is_symplectic(const Eigen::MatrixXd& s, double tol = 1e-12);

// Smallest eigenvalue of V + (i/2) Omega; non-negative (within tolerance) for
// physical states.
double min_uncertainty_eigenvalue(const CovarianceState& state);

// det(2V); equals 1 for pure states.
double purity_determinant(const CovarianceState& state);

// Symplectic eigenvalues of the covariance matrix, descending.
std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& covariance);

enum class SqueezePairing { SinglePolarization, CrossPolarized };

// Covariance of the multi-mode squeezed state generated by a symmetric
// squeeze matrix (scale * entries). Cross-polarized pairing doubles the
// registry with H/V tags and correlates A_{n,H} with A_{m,V}.
CovarianceState covariance_from_squeeze(const SqueezeMatrix& gamma, SqueezePairing pairing);

struct LinearOpticalElement {
  enum class Kind { PolarizingBeamSplitter, HalfWavePlate, BeamSplitter };
  Kind kind = Kind::BeamSplitter;
  double angle_deg = 0.0;  // HWP plate angle; BS angle 0 means balanced
  int path_a = 1;          // PBS/BS: the two coupled paths; HWP: acts on path_a
  int path_b = 2;
};

// Quadrature-space symplectic of the element for this state's registry.
// Registry labels name ports; elements move state between ports, so the
// registry itself never changes. The PBS is the V-polarization port swap.
Eigen::MatrixXd element_symplectic(const CovarianceState& state,
                                   const LinearOpticalElement& element);

// V <- S V S^T with the element's symplectic. Throws std::invalid_argument
// when referenced paths are absent from the registry.
CovarianceState apply_element(const CovarianceState& state, const LinearOpticalElement& element);

// PBS -> HWP(45 deg) on the second path -> balanced BS. Consumes a
// cross-polarized squeezed state and returns two decoupled copies tagged
// path 1 and path 2, generated by the +gamma and -gamma halves of the input
// correlations. Vacuum V-polarization modes are traced out of the result.
CovarianceState eliminate_polarization(const CovarianceState& state);

// d^T V d for a quadrature direction d; rejects the zero vector.
double quadrature_variance(const CovarianceState& state, const Eigen::VectorXd& direction);

// Keeps only the listed modes (partial trace over the rest).
CovarianceState reduce_state(const CovarianceState& state, const std::vector<ModeLabel>& keep);

struct ThssPoint {
  double b11 = 0.0, b12 = 0.0, b22 = 0.0;
  double var_x1 = 0.0;      // Var(x_1)
  double var_xminus = 0.0;  // Var((x_1 - x_2)/sqrt 2)
  double var_pplus = 0.0;   // Var((p_1 + p_2)/sqrt 2)
  double ptse = 0.0;        // smallest symplectic eigenvalue of the partial transpose
};

struct ScanRange {
  double start = 0.0;
  double stop = 0.0;
  int count = 1;

  double value(int k) const;
};

// Sweeps the two-mode squeeze parameters (b12 = b21) and tabulates variances
// and the partial-transpose entanglement proxy.
std::vector<ThssPoint> thss_scan(const ScanRange& b11, const ScanRange& b12,
                                 const ScanRange& b22);

}  // namespace qpmforge

#endif
