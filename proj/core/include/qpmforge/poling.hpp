#ifndef QPMFORGE_POLING_HPP
#define QPMFORGE_POLING_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include "qpmforge/numeric.hpp"

namespace qpmforge {

// Target phase-matching function in mismatch space: a superposition of
// Gaussian peaks of width sigma_k placed at dk0 + m*delta_k for
// m = -N..N, scaled by non-negative coefficients.
struct TargetPmfSpec {
  std::vector<double> coefficients;  // c_{-N} .. c_{+N}, size 2N+1
  double dk0 = 0.0;      // rad/m
  double delta_k = 0.0;  // rad/m
  double sigma_k = 0.0;  // rad/m
  double length = 0.0;   // m, crystal length

  int max_index() const { return static_cast<int>(coefficients.size() - 1) / 2; }
  double coefficient(int m) const;
  bool symmetric(double rel_tol = 1e-12) const;
  void validate() const;

  // Target value at a mismatch sample (sum of all Gaussian peaks).
  double value(double dk) const;
};

struct FeasibilityReport {
  bool feasible = false;
  double slack = 0.0;            // bound - coefficient_sum
  double bound = 0.0;            // sqrt(2/pi) / (L sigma_k)
  double coefficient_sum = 0.0;  // c_0 + 2 sum_m max(c_m, c_-m)
  bool symmetric = true;         // c_m == c_{-m}; asymmetric targets are only approximable
};

// Amplitude-slope bound: the tracked amplitude cannot grow faster than a
// periodically poled crystal allows, which caps the coefficient sum.
FeasibilityReport feasibility_check(const TargetPmfSpec& spec);

struct InfeasibleTargetError : std::runtime_error {
  explicit InfeasibleTargetError(const FeasibilityReport& r);
  FeasibilityReport report;
};

// Physical crystal design: an ordered sequence of +1/-1 domain orientations
// of uniform width starting at z_start = -effective_length()/2.
struct DomainConfiguration {
  std::vector<int> signs;  // each exactly +1 or -1
  double width = 0.0;      // m
  double z_start = 0.0;    // m

  double effective_length() const { return static_cast<double>(signs.size()) * width; }
  void validate() const;
};

// Running amplitude of the design at dk0, sampled at the domain boundaries,
// next to the target amplitude it tracks.
struct AmplitudeTrace {
  std::vector<double> z;            // size N+1, domain boundaries
  std::vector<complexd> realized;   // accumulated crystal amplitude
  std::vector<complexd> target;     // band-limited target amplitude
  double final_error = 0.0;         // |target.back() - realized.back()|
};

struct SynthesisResult {
  DomainConfiguration domains;
  AmplitudeTrace trace;
  double requested_length = 0.0;  // spec length; effective length may drop a remainder
};

// Target amplitude A_t(z): the running integral of the band-limited target
// nonlinearity against the carrier at dk0, evaluated by adaptive quadrature.
// Real for symmetric coefficient sets. Throws std::domain_error for |z| > L/2.
complexd target_amplitude(const TargetPmfSpec& spec, double z);

// Greedy left-to-right domain selection: each domain's sign is chosen to move
// the running amplitude closest to the target amplitude at the next boundary.
// Ties keep the previous sign. Deterministic for fixed inputs.
// The domain count is floor(L/width); a shorter remainder is dropped.
// Throws InfeasibleTargetError when the feasibility bound is violated.
SynthesisResult synthesize_domains(const TargetPmfSpec& spec, double width);

// Realized PMF of a domain configuration as a closed-form coherent sum of
// per-domain contributions, evaluated at each mismatch sample.
std::vector<complexd> pmf_coherent_sum(const DomainConfiguration& domains,
                                       std::span<const double> dk_samples,
                                       unsigned threads = 1);
complexd pmf_coherent_sum_at(const DomainConfiguration& domains, double dk);

struct BiasPeak {
  int m = 0;
  double dk = 0.0;
  double target_height = 0.0;
  double realized_height = 0.0;
  double ratio = 0.0;  // realized / target
};

struct BiasPair {
  int m = 0;
  double measured_asymmetry = 0.0;   // realized(+m) / realized(-m)
  double predicted_asymmetry = 0.0;  // per-domain sinc weighting ratio
};

struct BiasReport {
  std::vector<BiasPeak> peaks;       // one per m = -N..N
  std::vector<BiasPair> asymmetry;   // one per m = 1..N
};

// Peak heights of the realized PMF at the target peak positions and the
// left/right asymmetry induced by the per-domain sinc weighting (peaks at
// smaller |dk| come out enhanced).
BiasReport bias_diagnostic(const DomainConfiguration& domains, const TargetPmfSpec& spec);

struct NormalizedPmf {
  std::vector<complexd> phi;  // scaled so the difference-frequency L2 norm is 1
  double norm = 0.0;          // the removed norm factor
};

// L2-normalizes mismatch-space samples in the difference-frequency variable
// (d nu = 2 / (ks' - ki') d dk). The grid must cover the support: boundary
// magnitudes above 1e-6 of the maximum are rejected.
NormalizedPmf normalize_pmf(std::span<const complexd> samples, double dk_step,
                            double slowness_diff);

// Band-limited L2 scale over the given grid with no support check. Realized
// +/-1 crystals carry a sidelobe floor that never decays below the support
// threshold; their overall scale is fixed here and the JSA renormalizes on
// its own grid anyway.
double pmf_band_norm(std::span<const complexd> samples, double dk_step, double slowness_diff);

// Default evaluation grid: dk0 +/- (N delta_k + 10 sigma_k), 32 samples per sigma_k.
std::vector<double> make_default_dk_grid(const TargetPmfSpec& spec);

}  // namespace qpmforge

#endif
