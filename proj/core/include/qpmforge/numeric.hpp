#ifndef QPMFORGE_NUMERIC_HPP
#define QPMFORGE_NUMERIC_HPP

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qpmforge {

using complexd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// Ordinary frequency in THz <-> angular frequency in rad/s.
inline double thz_to_radps(double f_thz) { return kTwoPi * f_thz * 1e12; }
inline double radps_to_thz(double w_radps) { return w_radps / (kTwoPi * 1e12); }
inline double wavelength_m_to_radps(double lambda_m) { return kTwoPi * kSpeedOfLight / lambda_m; }
inline double radps_to_wavelength_m(double w_radps) { return kTwoPi * kSpeedOfLight / w_radps; }

// Summation with a fixed pairwise reduction tree. The result depends only on
// the element order, never on chunking or thread count.
template <typename T>
T pairwise_sum(std::span<const T> items) {
  if (items.empty()) return T{};
  if (items.size() <= 8) {
    T acc = items[0];
    for (std::size_t i = 1; i < items.size(); ++i) acc += items[i];
    return acc;
  }
  const std::size_t half = items.size() / 2;
  return pairwise_sum(items.subspan(0, half)) + pairwise_sum(items.subspan(half));
}

template <typename T>
T pairwise_sum(const std::vector<T>& items) {
  return pairwise_sum(std::span<const T>(items));
}

// Map [0, n) over `threads` workers. Each index is processed exactly once and
// entirely inside one worker, so per-index results are thread-count invariant.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

// Adaptive Simpson quadrature for smooth complex integrands.
complexd integrate_adaptive(const std::function<complexd(double)>& f, double a, double b,
                            double abs_tol = 1e-13, double rel_tol = 1e-12, int max_depth = 48);

// Trapezoidal rule on uniformly spaced samples.
double trapezoid_uniform(std::span<const double> values, double step);
// Composite Simpson on uniformly spaced samples (count may be even or odd).
double simpson_uniform(std::span<const double> values, double step);

// Shortest-round-trip decimal formatting used by all data file writers.
std::string fmt_double(double v);

}  // namespace qpmforge

#endif
