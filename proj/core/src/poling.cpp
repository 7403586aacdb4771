#include "qpmforge/poling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qpmforge {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

// Band-limited target nonlinearity divided by the carrier: the integrand of
// the target amplitude. Gaussian envelope times the peak-comb phase factors;
// the dk0 carrier cancels against the amplitude's phase reference.
complexd target_amplitude_integrand(const TargetPmfSpec& spec, double z) {
  const double envelope =
      2.0 * spec.sigma_k / std::sqrt(kTwoPi) * std::exp(-2.0 * z * z * spec.sigma_k * spec.sigma_k);
  complexd comb = 0.0;
  const int N = spec.max_index();
  for (int m = -N; m <= N; ++m) {
    const double c = spec.coefficient(m);
    if (c == 0.0) continue;
    comb += c * std::polar(1.0, -m * spec.delta_k * z);
  }
  return envelope * comb;
}

// Contribution of one +1 domain [z0, z0+w] to the length-normalized PMF at dk.
complexd domain_phase_integral(double dk, double z0, double w) {
  if (dk == 0.0) return complexd{w, 0.0};
  return std::polar(w * sinc(0.5 * dk * w), dk * (z0 + 0.5 * w));
}

}  // namespace

double TargetPmfSpec::coefficient(int m) const {
  const int N = max_index();
  if (m < -N || m > N) return 0.0;
  return coefficients[static_cast<std::size_t>(m + N)];
}

bool TargetPmfSpec::symmetric(double rel_tol) const {
  const int N = max_index();
  double scale = 0.0;
  for (double c : coefficients) scale = std::max(scale, std::abs(c));
  for (int m = 1; m <= N; ++m)
    if (std::abs(coefficient(m) - coefficient(-m)) > rel_tol * scale) return false;
  return true;
}

void TargetPmfSpec::validate() const {
  if (coefficients.empty() || coefficients.size() % 2 == 0)
    throw std::invalid_argument("coefficient list must have odd size 2N+1");
  for (double c : coefficients)
    if (!(c >= 0.0)) throw std::invalid_argument("coefficients must be non-negative");
  if (!(sigma_k > 0.0)) throw std::invalid_argument("sigma_k must be positive");
  if (!(length > 0.0)) throw std::invalid_argument("length must be positive");
  if (max_index() > 0 && !(delta_k > 0.0))
    throw std::invalid_argument("delta_k must be positive for multi-peak targets");
}

double TargetPmfSpec::value(double dk) const {
  const int N = max_index();
  double sum = 0.0;
  for (int m = -N; m <= N; ++m) {
    const double c = coefficient(m);
    if (c == 0.0) continue;
    const double arg = dk - dk0 - m * delta_k;
    sum += c * std::exp(-arg * arg / (8.0 * sigma_k * sigma_k));
  }
  return sum;
}

FeasibilityReport feasibility_check(const TargetPmfSpec& spec) {
  spec.validate();
  FeasibilityReport report;
  report.bound = std::sqrt(2.0 / kPi) / (spec.length * spec.sigma_k);
  report.coefficient_sum = spec.coefficient(0);
  const int N = spec.max_index();
  for (int m = 1; m <= N; ++m)
    report.coefficient_sum += 2.0 * std::max(spec.coefficient(m), spec.coefficient(-m));
  report.slack = report.bound - report.coefficient_sum;
  report.feasible = report.slack >= 0.0;
  report.symmetric = spec.symmetric();
  return report;
}

InfeasibleTargetError::InfeasibleTargetError(const FeasibilityReport& r)
    : std::runtime_error("target is infeasible: coefficient sum " +
                         fmt_double(r.coefficient_sum) + " exceeds bound " +
                         fmt_double(r.bound) + " (slack " + fmt_double(r.slack) + ")"),
      report(r) {}

void DomainConfiguration::validate() const {
  if (signs.empty()) throw std::invalid_argument("domain configuration is empty");
  if (!(width > 0.0)) throw std::invalid_argument("domain width must be positive");
  for (int s : signs)
    if (s != 1 && s != -1) throw std::invalid_argument("domain signs must be +1 or -1");
}

complexd target_amplitude(const TargetPmfSpec& spec, double z) {
  spec.validate();
  const double half = 0.5 * spec.length;
  if (std::abs(z) > half * (1.0 + 1e-12))
    throw std::domain_error("z outside the crystal: |z| > L/2");
  return integrate_adaptive([&](double u) { return target_amplitude_integrand(spec, u); },
                            -half, std::min(z, half));
}

SynthesisResult synthesize_domains(const TargetPmfSpec& spec, double width) {
  const FeasibilityReport report = feasibility_check(spec);
  if (!report.feasible) throw InfeasibleTargetError(report);
  if (!(width > 0.0)) throw std::invalid_argument("domain width must be positive");

  const auto count = static_cast<std::size_t>(std::floor(spec.length / width + 1e-9));
  if (count < 10) throw std::invalid_argument("crystal shorter than 10 domains (L/w >= 10)");
  const double effective_length = static_cast<double>(count) * width;
  const double z_start = -0.5 * effective_length;

  SynthesisResult result;
  result.requested_length = spec.length;
  result.domains.width = width;
  result.domains.z_start = z_start;
  result.domains.signs.reserve(count);

  AmplitudeTrace& trace = result.trace;
  trace.z.resize(count + 1);
  trace.realized.resize(count + 1);
  trace.target.resize(count + 1);
  for (std::size_t j = 0; j <= count; ++j)
    trace.z[j] = z_start + static_cast<double>(j) * width;
  trace.realized[0] = 0.0;
  trace.target[0] = 0.0;

  // Segment-wise target integration keeps the cost linear in the domain count.
  for (std::size_t j = 0; j < count; ++j) {
    const complexd seg = integrate_adaptive(
        [&](double u) { return target_amplitude_integrand(spec, u); }, trace.z[j],
        trace.z[j + 1], 1e-16, 1e-13);
    trace.target[j + 1] = trace.target[j] + seg;
  }

  // Track the left half greedily, then mirror. A real target needs an even
  // nonlinearity profile g(z) = g(-z); a full-length left-to-right pass
  // leaves a small palindromic defect that shows up as a spurious imaginary
  // part of the realized PMF.
  const std::size_t tracked = (count + 1) / 2;
  result.domains.signs.assign(count, 1);
  complexd amplitude = 0.0;
  int previous_sign = 1;
  for (std::size_t j = 0; j < tracked; ++j) {
    const complexd step =
        domain_phase_integral(spec.dk0, trace.z[j], width) / effective_length;
    const complexd target_next = trace.target[j + 1];
    const double d_plus = std::abs(target_next - (amplitude + step));
    const double d_minus = std::abs(target_next - (amplitude - step));
    int sign;
    if (d_plus < d_minus) sign = 1;
    else if (d_minus < d_plus) sign = -1;
    else sign = previous_sign;
    amplitude += static_cast<double>(sign) * step;
    result.domains.signs[j] = sign;
    result.domains.signs[count - 1 - j] = sign;
    previous_sign = sign;
  }
  for (std::size_t j = 0; j < count; ++j) {
    const complexd step =
        domain_phase_integral(spec.dk0, trace.z[j], width) / effective_length;
    trace.realized[j + 1] =
        trace.realized[j] + static_cast<double>(result.domains.signs[j]) * step;
  }
  trace.final_error = std::abs(trace.target.back() - trace.realized.back());
  return result;
}

complexd pmf_coherent_sum_at(const DomainConfiguration& domains, double dk) {
  const double w = domains.width;
  const double L = domains.effective_length();
  const std::size_t n = domains.signs.size();
  // Per-domain phases are computed directly (not by running multiplication)
  // so the sum is exact to rounding and independent of evaluation order.
  std::vector<complexd> terms(n);
  for (std::size_t j = 0; j < n; ++j)
    terms[j] = static_cast<double>(domains.signs[j]) *
               std::polar(1.0, dk * (domains.z_start + (static_cast<double>(j) + 0.5) * w));
  const complexd sum = pairwise_sum<complexd>(terms);
  return (w / L) * sinc(0.5 * dk * w) * sum;
}

std::vector<complexd> pmf_coherent_sum(const DomainConfiguration& domains,
                                       std::span<const double> dk_samples, unsigned threads) {
  domains.validate();
  std::vector<complexd> values(dk_samples.size());
  parallel_for(dk_samples.size(), threads,
               [&](std::size_t i) { values[i] = pmf_coherent_sum_at(domains, dk_samples[i]); });
  return values;
}

BiasReport bias_diagnostic(const DomainConfiguration& domains, const TargetPmfSpec& spec) {
  domains.validate();
  spec.validate();
  // Single-peak designs have no side peaks; their asymmetry list is empty.
  const int N = spec.max_index();

  BiasReport report;
  std::vector<double> realized(static_cast<std::size_t>(2 * N + 1));
  for (int m = -N; m <= N; ++m) {
    const double dk = spec.dk0 + m * spec.delta_k;
    const double h = std::abs(pmf_coherent_sum_at(domains, dk));
    realized[static_cast<std::size_t>(m + N)] = h;
    BiasPeak peak;
    peak.m = m;
    peak.dk = dk;
    peak.target_height = spec.value(dk);
    peak.realized_height = h;
    peak.ratio = peak.target_height > 0.0 ? h / peak.target_height : 0.0;
    report.peaks.push_back(peak);
  }
  for (int m = 1; m <= N; ++m) {
    BiasPair pair;
    pair.m = m;
    const double plus = realized[static_cast<std::size_t>(m + N)];
    const double minus = realized[static_cast<std::size_t>(-m + N)];
    pair.measured_asymmetry = minus > 0.0 ? plus / minus : 0.0;
    const double wp = sinc(0.5 * (spec.dk0 + m * spec.delta_k) * domains.width);
    const double wm = sinc(0.5 * (spec.dk0 - m * spec.delta_k) * domains.width);
    pair.predicted_asymmetry = wm != 0.0 ? std::abs(wp / wm) : 0.0;
    report.asymmetry.push_back(pair);
  }
  return report;
}

double pmf_band_norm(std::span<const complexd> samples, double dk_step, double slowness_diff) {
  if (samples.size() < 2) throw std::invalid_argument("need at least two PMF samples");
  if (!(dk_step > 0.0)) throw std::invalid_argument("dk_step must be positive");
  if (slowness_diff == 0.0)
    throw std::domain_error("degenerate group velocities; frequency mapping singular");
  const double nu_step = dk_step * std::abs(2.0 / slowness_diff);
  std::vector<double> mag2(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) mag2[i] = std::norm(samples[i]);
  return std::sqrt(trapezoid_uniform(mag2, nu_step));
}

NormalizedPmf normalize_pmf(std::span<const complexd> samples, double dk_step,
                            double slowness_diff) {
  if (samples.size() < 2) throw std::invalid_argument("need at least two PMF samples");
  double peak = 0.0;
  for (const complexd& v : samples) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) throw std::invalid_argument("all PMF samples are zero");
  const double lo = std::abs(samples.front()), hi = std::abs(samples.back());
  if (lo > 1e-6 * peak || hi > 1e-6 * peak)
    throw std::invalid_argument(
        "PMF support is truncated by the grid: boundary magnitudes " + fmt_double(lo / peak) +
        " and " + fmt_double(hi / peak) + " of peak exceed 1e-6");

  NormalizedPmf out;
  out.norm = pmf_band_norm(samples, dk_step, slowness_diff);
  out.phi.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out.phi[i] = samples[i] / out.norm;
  return out;
}

std::vector<double> make_default_dk_grid(const TargetPmfSpec& spec) {
  spec.validate();
  const double half_span = spec.max_index() * spec.delta_k + 10.0 * spec.sigma_k;
  const double step = spec.sigma_k / 32.0;
  const auto half_count = static_cast<long>(std::ceil(half_span / step));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(2 * half_count + 1));
  for (long i = -half_count; i <= half_count; ++i)
    grid.push_back(spec.dk0 + static_cast<double>(i) * step);
  return grid;
}

}  // namespace qpmforge
