#ifndef QPMFORGE_SPECTRA_HPP
#define QPMFORGE_SPECTRA_HPP

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "qpmforge/dispersion.hpp"
#include "qpmforge/numeric.hpp"
#include "qpmforge/poling.hpp"

namespace qpmforge {

// Pump envelope: a superposition of Gaussian peaks of width sigma placed at
// omega_p - n*delta_omega with amplitudes a_n, unit L2 norm overall.
struct PumpSpec {
  std::vector<double> coefficients;  // a_{-N} .. a_{+N}, size 2N+1
  double omega_p = 0.0;      // rad/s
  double delta_omega = 0.0;  // rad/s
  double sigma = 0.0;        // rad/s

  int max_index() const { return static_cast<int>(coefficients.size() - 1) / 2; }
  double coefficient(int n) const;
  void validate() const;          // checks sum a_n^2 == 1 within 1e-9
  bool well_separated(double min_ratio = 12.0) const;  // delta_omega >= min_ratio * sigma
};

// Rescales the coefficients to unit square sum.
PumpSpec normalized(PumpSpec spec);

complexd pump_envelope(const PumpSpec& spec, double omega_pump);

struct AxisGrid {
  double start = 0.0;  // rad/s
  double step = 0.0;   // rad/s
  long count = 0;

  double value(long i) const { return start + static_cast<double>(i) * step; }
  double end() const { return value(count - 1); }
};

enum class NormFlag { Raw, Unit };

// Joint spectral amplitude on a rectangular frequency grid.
// values(i, j) = f(omega_s = signal.value(i), omega_i = idler.value(j)).
struct JsaGrid {
  AxisGrid signal;
  AxisGrid idler;
  Eigen::MatrixXcd values;
  NormFlag norm = NormFlag::Raw;
  double raw_l2 = 0.0;              // L2 norm before unit scaling
  double transmitted_fraction = 1.0;  // set by apply_filter
};

enum class QuadratureRule { Cell, Trapezoid, Simpson };

// sqrt of the discretized double integral of |f|^2.
double jsa_l2_norm(const JsaGrid& jsa, QuadratureRule rule = QuadratureRule::Cell);

// Phase-matching function pulled back to the frequency plane.
struct PmfFrequencySampler {
  std::function<complexd(double omega_s, double omega_i)> eval;
  bool difference_only = false;  // depends on omega_s - omega_i alone
  // Realized +/-1 crystals carry a sidelobe floor along the whole difference
  // axis, so their JSAs have no compact support and skip the grid support check.
  bool compact_support = true;
  double omega_s_center = 0.0;
  double omega_i_center = 0.0;
};

// Generic sampler from mismatch-space samples (cubic interpolation between
// them). Linear dispersion pulls the samples back affinely; full dispersion
// evaluates the mismatch exactly, which bends the PMF across the plane.
PmfFrequencySampler pmf_frequency_space(std::span<const complexd> phi, double dk_start,
                                        double dk_step, const DispersionModel& model);

// Exact samplers, bypassing interpolation. `norm` is the factor produced by
// normalize_pmf on the evaluation grid.
PmfFrequencySampler pmf_frequency_space(const DomainConfiguration& domains, double norm,
                                        const DispersionModel& model);
PmfFrequencySampler pmf_frequency_space(const TargetPmfSpec& target, double norm,
                                        const DispersionModel& model);

struct GridSpec {
  long n = 1024;          // samples per axis
  double half_span = 0.0;  // rad/s around each axis center
};

// Pointwise pump x PMF product on the grid, renormalized to unit L2 with the
// raw norm kept as metadata. Throws when the grid truncates the support
// (boundary magnitude above 1e-6 of the peak).
JsaGrid assemble_jsa(const PumpSpec& pump, const PmfFrequencySampler& pmf,
                     const GridSpec& grid, unsigned threads = 1);

// Notch filter with transmission 1 - exp(-(omega-center)^2 / (4 sigma_f^2))
// applied per axis; sigma_f == 0 means no filtering.
struct FilterSpec {
  double center_s = 0.0;  // rad/s
  double center_i = 0.0;  // rad/s
  double sigma_f = 0.0;   // rad/s

  double transmission(double omega, double center) const;
};

JsaGrid apply_filter(const JsaGrid& jsa, const FilterSpec& filter);

struct JsaPeak {
  long i = 0;  // signal axis index
  long j = 0;  // idler axis index
  double omega_s = 0.0;
  double omega_i = 0.0;
  double magnitude = 0.0;
};

// Strict local maxima of |f| above rel_threshold of the global maximum.
std::vector<JsaPeak> find_peaks(const JsaGrid& jsa, double rel_threshold = 0.1);

}  // namespace qpmforge

#endif
