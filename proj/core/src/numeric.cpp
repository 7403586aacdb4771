#include "qpmforge/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

namespace qpmforge {

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned workers = std::clamp(threads == 0 ? hw : threads, 1u, hw * 4);
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

namespace {

struct SimpsonPanel {
  complexd fa, fm, fb, whole;
};

complexd simpson_estimate(const std::function<complexd(double)>& f, double a, double b,
                          complexd fa, complexd fb, complexd* fm_out) {
  const double m = 0.5 * (a + b);
  const complexd fm = f(m);
  *fm_out = fm;
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

complexd adaptive_step(const std::function<complexd(double)>& f, double a, double b,
                       complexd fa, complexd fm, complexd fb, complexd whole,
                       double abs_tol, double rel_tol, double scale, int depth) {
  const double m = 0.5 * (a + b);
  complexd flm, frm;
  const complexd left = simpson_estimate(f, a, m, fa, fm, &flm);
  const complexd right = simpson_estimate(f, m, b, fm, fb, &frm);
  const complexd refined = left + right;
  const double err = std::abs(refined - whole);
  if (depth <= 0 || err < 15.0 * std::max(abs_tol, rel_tol * scale)) {
    return refined + (refined - whole) / 15.0;
  }
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * abs_tol, rel_tol, scale, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * abs_tol, rel_tol, scale, depth - 1);
}

}  // namespace

complexd integrate_adaptive(const std::function<complexd(double)>& f, double a, double b,
                            double abs_tol, double rel_tol, int max_depth) {
  if (a == b) return {0.0, 0.0};
  const complexd fa = f(a);
  const complexd fb = f(b);
  complexd fm;
  const complexd whole = simpson_estimate(f, a, b, fa, fb, &fm);
  // Coarse magnitude scale for the relative tolerance.
  const double scale = std::max({std::abs(whole), std::abs(fa) * std::abs(b - a),
                                 std::abs(fb) * std::abs(b - a), 1e-300});
  return adaptive_step(f, a, b, fa, fm, fb, whole, abs_tol, rel_tol, scale, max_depth);
}

double trapezoid_uniform(std::span<const double> values, double step) {
  if (values.size() < 2) return 0.0;
  std::vector<double> terms(values.size());
  terms[0] = 0.5 * values[0];
  for (std::size_t i = 1; i + 1 < values.size(); ++i) terms[i] = values[i];
  terms[values.size() - 1] = 0.5 * values[values.size() - 1];
  return step * pairwise_sum<double>(terms);
}

double simpson_uniform(std::span<const double> values, double step) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * step * (values[0] + values[1]);
  std::vector<double> terms;
  terms.reserve(n);
  // Even sample count: composite Simpson on the leading panels plus one
  // trapezoid correction for the final interval.
  const std::size_t last = (n % 2 == 1) ? n - 1 : n - 2;
  terms.push_back(values[0]);
  for (std::size_t i = 1; i < last; ++i) terms.push_back(values[i] * ((i % 2 == 1) ? 4.0 : 2.0));
  terms.push_back(values[last]);
  double result = step / 3.0 * pairwise_sum<double>(terms);
  if (n % 2 == 0) result += 0.5 * step * (values[n - 2] + values[n - 1]);
  return result;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace qpmforge
