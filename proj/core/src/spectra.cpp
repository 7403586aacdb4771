#include "qpmforge/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpmforge {

double PumpSpec::coefficient(int n) const {
  const int N = max_index();
  if (n < -N || n > N) return 0.0;
  return coefficients[static_cast<std::size_t>(n + N)];
}

void PumpSpec::validate() const {
  if (coefficients.empty() || coefficients.size() % 2 == 0)
    throw std::invalid_argument("pump coefficient list must have odd size 2N+1");
  if (!(sigma > 0.0)) throw std::invalid_argument("pump sigma must be positive");
  if (!(omega_p > 0.0)) throw std::invalid_argument("pump center frequency must be positive");
  if (max_index() > 0 && !(delta_omega > 0.0))
    throw std::invalid_argument("delta_omega must be positive for multi-peak pumps");
  double sq = 0.0;
  for (double a : coefficients) sq += a * a;
  if (std::abs(sq - 1.0) > 1e-9)
    throw std::invalid_argument("pump coefficients must satisfy sum a_n^2 = 1 (got " +
                                fmt_double(sq) + ")");
}

bool PumpSpec::well_separated(double min_ratio) const {
  return max_index() == 0 || delta_omega >= min_ratio * sigma;
}

PumpSpec normalized(PumpSpec spec) {
  double sq = 0.0;
  for (double a : spec.coefficients) sq += a * a;
  if (!(sq > 0.0)) throw std::invalid_argument("pump coefficients are all zero");
  const double inv = 1.0 / std::sqrt(sq);
  for (double& a : spec.coefficients) a *= inv;
  return spec;
}

complexd pump_envelope(const PumpSpec& spec, double omega_pump) {
  const double prefactor = std::pow(4.0 * kPi * spec.sigma * spec.sigma, -0.25);
  const int N = spec.max_index();
  double sum = 0.0;
  for (int n = -N; n <= N; ++n) {
    const double a = spec.coefficient(n);
    if (a == 0.0) continue;
    const double arg = omega_pump - spec.omega_p + n * spec.delta_omega;
    sum += a * std::exp(-arg * arg / (8.0 * spec.sigma * spec.sigma));
  }
  return complexd{prefactor * sum, 0.0};
}

double jsa_l2_norm(const JsaGrid& jsa, QuadratureRule rule) {
  const long rows = jsa.values.rows();
  const long cols = jsa.values.cols();
  const double cell = jsa.signal.step * jsa.idler.step;
  auto weight = [&](long idx, long n) {
    if (rule == QuadratureRule::Cell) return 1.0;
    if (rule == QuadratureRule::Trapezoid) return (idx == 0 || idx == n - 1) ? 0.5 : 1.0;
    // Simpson weights; the caller keeps sample counts odd for exactness.
    if (idx == 0 || idx == n - 1) return 1.0 / 3.0;
    return (idx % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
  };
  std::vector<double> row_terms(static_cast<std::size_t>(rows));
  for (long i = 0; i < rows; ++i) {
    std::vector<double> terms(static_cast<std::size_t>(cols));
    for (long j = 0; j < cols; ++j)
      terms[static_cast<std::size_t>(j)] = weight(j, cols) * std::norm(jsa.values(i, j));
    row_terms[static_cast<std::size_t>(i)] = weight(i, rows) * pairwise_sum<double>(terms);
  }
  return std::sqrt(pairwise_sum<double>(row_terms) * cell);
}

namespace {

// Catmull-Rom interpolation of uniformly spaced complex samples; zero outside.
complexd interp_samples(const std::vector<complexd>& phi, double dk_start, double dk_step,
                        double dk) {
  const double x = (dk - dk_start) / dk_step;
  const auto n = static_cast<long>(phi.size());
  if (x < 0.0 || x > static_cast<double>(n - 1)) return {0.0, 0.0};
  const long i1 = std::clamp(static_cast<long>(std::floor(x)), 0L, n - 2);
  const double t = x - static_cast<double>(i1);
  const long i0 = std::max(i1 - 1, 0L);
  const long i2 = i1 + 1;
  const long i3 = std::min(i2 + 1, n - 1);
  const complexd p0 = phi[static_cast<std::size_t>(i0)];
  const complexd p1 = phi[static_cast<std::size_t>(i1)];
  const complexd p2 = phi[static_cast<std::size_t>(i2)];
  const complexd p3 = phi[static_cast<std::size_t>(i3)];
  const complexd m1 = 0.5 * (p2 - p0);
  const complexd m2 = 0.5 * (p3 - p1);
  const double t2 = t * t, t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * p1 + (t3 - 2.0 * t2 + t) * m1 +
         (-2.0 * t3 + 3.0 * t2) * p2 + (t3 - t2) * m2;
}

struct MismatchMap {
  bool affine = false;
  double dk0 = 0.0;
  double half_slowness_diff = 0.0;  // (ks' - ki') / 2
  double omega_s_center = 0.0;
  double omega_i_center = 0.0;
};

MismatchMap make_mismatch_map(const DispersionModel& model) {
  validate_model(model);
  MismatchMap map;
  if (const auto* lin = std::get_if<LinearExpansion>(&model)) {
    map.affine = lin->symmetric_gvm;
    map.omega_s_center = lin->omega_s;
    map.omega_i_center = lin->omega_i;
    map.dk0 = lin->dk0;
    map.half_slowness_diff = 0.5 * (lin->ks_prime - lin->ki_prime);
  } else {
    const auto& sm = std::get<SellmeierModel>(model);
    map.affine = false;
    map.omega_s_center = sm.omega_s;
    map.omega_i_center = sm.omega_i;
  }
  return map;
}

}  // namespace

PmfFrequencySampler pmf_frequency_space(std::span<const complexd> phi, double dk_start,
                                        double dk_step, const DispersionModel& model) {
  const MismatchMap map = make_mismatch_map(model);
  std::vector<complexd> samples(phi.begin(), phi.end());
  PmfFrequencySampler sampler;
  sampler.difference_only = map.affine;
  sampler.omega_s_center = map.omega_s_center;
  sampler.omega_i_center = map.omega_i_center;
  if (map.affine) {
    sampler.eval = [samples, dk_start, dk_step, map](double omega_s, double omega_i) {
      const double nu = (omega_s - omega_i) - (map.omega_s_center - map.omega_i_center);
      const double dk = map.dk0 - map.half_slowness_diff * nu;
      return interp_samples(samples, dk_start, dk_step, dk);
    };
  } else {
    sampler.eval = [samples, dk_start, dk_step, model](double omega_s, double omega_i) {
      return interp_samples(samples, dk_start, dk_step, phase_mismatch(model, omega_s, omega_i));
    };
  }
  return sampler;
}

PmfFrequencySampler pmf_frequency_space(const DomainConfiguration& domains, double norm,
                                        const DispersionModel& model) {
  domains.validate();
  if (!(norm > 0.0)) throw std::invalid_argument("PMF norm must be positive");
  const MismatchMap map = make_mismatch_map(model);
  PmfFrequencySampler sampler;
  sampler.difference_only = map.affine;
  sampler.compact_support = false;
  sampler.omega_s_center = map.omega_s_center;
  sampler.omega_i_center = map.omega_i_center;
  if (map.affine) {
    sampler.eval = [domains, norm, map](double omega_s, double omega_i) {
      const double nu = (omega_s - omega_i) - (map.omega_s_center - map.omega_i_center);
      return pmf_coherent_sum_at(domains, map.dk0 - map.half_slowness_diff * nu) / norm;
    };
  } else {
    sampler.eval = [domains, norm, model](double omega_s, double omega_i) {
      return pmf_coherent_sum_at(domains, phase_mismatch(model, omega_s, omega_i)) / norm;
    };
  }
  return sampler;
}

PmfFrequencySampler pmf_frequency_space(const TargetPmfSpec& target, double norm,
                                        const DispersionModel& model) {
  target.validate();
  if (!(norm > 0.0)) throw std::invalid_argument("PMF norm must be positive");
  const MismatchMap map = make_mismatch_map(model);
  PmfFrequencySampler sampler;
  sampler.difference_only = map.affine;
  sampler.omega_s_center = map.omega_s_center;
  sampler.omega_i_center = map.omega_i_center;
  if (map.affine) {
    sampler.eval = [target, norm, map](double omega_s, double omega_i) {
      const double nu = (omega_s - omega_i) - (map.omega_s_center - map.omega_i_center);
      return complexd{target.value(map.dk0 - map.half_slowness_diff * nu) / norm, 0.0};
    };
  } else {
    sampler.eval = [target, norm, model](double omega_s, double omega_i) {
      return complexd{target.value(phase_mismatch(model, omega_s, omega_i)) / norm, 0.0};
    };
  }
  return sampler;
}

JsaGrid assemble_jsa(const PumpSpec& pump, const PmfFrequencySampler& pmf,
                     const GridSpec& grid, unsigned threads) {
  pump.validate();
  if (grid.n < 8) throw std::invalid_argument("grid too small");
  if (!(grid.half_span > 0.0)) throw std::invalid_argument("grid half_span must be positive");

  JsaGrid jsa;
  const double step = 2.0 * grid.half_span / static_cast<double>(grid.n - 1);
  jsa.signal = {pmf.omega_s_center - grid.half_span, step, grid.n};
  jsa.idler = {pmf.omega_i_center - grid.half_span, step, grid.n};
  jsa.values.resize(grid.n, grid.n);

  // The pump depends on omega_s + omega_i only; with equal steps on both axes
  // there are 2n-1 distinct values along the anti-diagonals.
  std::vector<complexd> pump_diag(static_cast<std::size_t>(2 * grid.n - 1));
  const double sum_base = jsa.signal.start + jsa.idler.start;
  for (long k = 0; k < 2 * grid.n - 1; ++k)
    pump_diag[static_cast<std::size_t>(k)] =
        pump_envelope(pump, sum_base + static_cast<double>(k) * step);

  if (pmf.difference_only) {
    std::vector<complexd> pmf_diag(static_cast<std::size_t>(2 * grid.n - 1));
    for (long k = 0; k < 2 * grid.n - 1; ++k) {
      const long d = k - (grid.n - 1);  // i - j
      pmf_diag[static_cast<std::size_t>(k)] =
          pmf.eval(jsa.signal.value(std::max(d, 0L)), jsa.idler.value(std::max(-d, 0L)));
    }
    parallel_for(static_cast<std::size_t>(grid.n), threads, [&](std::size_t row) {
      const auto i = static_cast<long>(row);
      for (long j = 0; j < grid.n; ++j)
        jsa.values(i, j) = pump_diag[static_cast<std::size_t>(i + j)] *
                           pmf_diag[static_cast<std::size_t>(i - j + grid.n - 1)];
    });
  } else {
    parallel_for(static_cast<std::size_t>(grid.n), threads, [&](std::size_t row) {
      const auto i = static_cast<long>(row);
      const double omega_s = jsa.signal.value(i);
      for (long j = 0; j < grid.n; ++j)
        jsa.values(i, j) =
            pump_diag[static_cast<std::size_t>(i + j)] * pmf.eval(omega_s, jsa.idler.value(j));
    });
  }

  // Support check mirrors the PMF normalization precondition. Skipped for
  // samplers without compact support (realized crystals): their sidelobe
  // stripe is genuine and any finite grid truncates it.
  double peak = 0.0;
  for (long i = 0; i < grid.n; ++i)
    for (long j = 0; j < grid.n; ++j) peak = std::max(peak, std::abs(jsa.values(i, j)));
  if (peak == 0.0) throw std::invalid_argument("assembled JSA is identically zero");
  if (pmf.compact_support) {
    double boundary = 0.0;
    for (long i = 0; i < grid.n; ++i) {
      boundary = std::max({boundary, std::abs(jsa.values(i, 0)),
                           std::abs(jsa.values(i, grid.n - 1)), std::abs(jsa.values(0, i)),
                           std::abs(jsa.values(grid.n - 1, i))});
    }
    if (boundary > 1e-6 * peak)
      throw std::invalid_argument("JSA support truncated by the grid: boundary magnitude " +
                                  fmt_double(boundary / peak) + " of peak exceeds 1e-6");
  }

  jsa.raw_l2 = jsa_l2_norm(jsa, QuadratureRule::Cell);
  jsa.values /= jsa.raw_l2;
  jsa.norm = NormFlag::Unit;
  return jsa;
}

double FilterSpec::transmission(double omega, double center) const {
  if (sigma_f == 0.0) return 1.0;
  const double arg = omega - center;
  return 1.0 - std::exp(-arg * arg / (4.0 * sigma_f * sigma_f));
}

JsaGrid apply_filter(const JsaGrid& jsa, const FilterSpec& filter) {
  JsaGrid out = jsa;
  const long rows = jsa.values.rows();
  const long cols = jsa.values.cols();
  std::vector<double> ts(static_cast<std::size_t>(rows)), ti(static_cast<std::size_t>(cols));
  for (long i = 0; i < rows; ++i)
    ts[static_cast<std::size_t>(i)] = filter.transmission(jsa.signal.value(i), filter.center_s);
  for (long j = 0; j < cols; ++j)
    ti[static_cast<std::size_t>(j)] = filter.transmission(jsa.idler.value(j), filter.center_i);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j)
      out.values(i, j) *= ts[static_cast<std::size_t>(i)] * ti[static_cast<std::size_t>(j)];

  const double pre = jsa_l2_norm(jsa, QuadratureRule::Cell);
  const double post = jsa_l2_norm(out, QuadratureRule::Cell);
  out.transmitted_fraction = (post * post) / (pre * pre);
  if (post == 0.0) throw std::invalid_argument("filter removed the entire JSA");
  if (jsa.norm == NormFlag::Unit) {
    out.values /= post;
    out.raw_l2 = jsa.raw_l2 * post;
  } else {
    out.raw_l2 = post;
  }
  return out;
}

std::vector<JsaPeak> find_peaks(const JsaGrid& jsa, double rel_threshold) {
  const long rows = jsa.values.rows();
  const long cols = jsa.values.cols();
  Eigen::MatrixXd mag(rows, cols);
  double peak = 0.0;
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) {
      mag(i, j) = std::abs(jsa.values(i, j));
      peak = std::max(peak, mag(i, j));
    }
  std::vector<JsaPeak> peaks;
  const double floor = rel_threshold * peak;
  for (long i = 1; i + 1 < rows; ++i) {
    for (long j = 1; j + 1 < cols; ++j) {
      const double v = mag(i, j);
      if (v < floor) continue;
      // local maximum; exact plateau ties (symmetric peaks straddling two
      // samples) count once, at the lexicographically first sample
      bool is_max = true;
      for (long di = -1; di <= 1 && is_max; ++di)
        for (long dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const double other = mag(i + di, j + dj);
          const bool earlier = di < 0 || (di == 0 && dj < 0);
          if (other > v || (earlier && other == v)) { is_max = false; break; }
        }
      if (is_max)
        peaks.push_back({i, j, jsa.signal.value(i), jsa.idler.value(j), v});
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const JsaPeak& a, const JsaPeak& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  });
  return peaks;
}

}  // namespace qpmforge
