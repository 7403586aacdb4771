#include "qpmforge/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qpmforge {

double BinBasis::value(int label, double omega) const {
  const double arg = omega - center(label);
  return std::pow(2.0 * kPi * sigma * sigma, -0.25) *
         std::exp(-arg * arg / (4.0 * sigma * sigma));
}

double BinBasis::overlap(int label_a, int label_b) const {
  const double d = center(label_a) - center(label_b);
  return std::exp(-d * d / (8.0 * sigma * sigma));
}

BinBasis make_bin_basis(double center0, const BinGeometry& geom, int max_label) {
  if (max_label < 0) throw std::invalid_argument("max_label must be non-negative");
  BinBasis basis;
  basis.center0 = center0;
  basis.half_spacing = 0.5 * geom.delta_omega;
  basis.sigma = geom.sigma;
  for (int n = -max_label; n <= max_label; ++n) basis.labels.push_back(n);
  return basis;
}

int SqueezeMatrix::label_index(int label) const {
  const auto it = std::lower_bound(labels.begin(), labels.end(), label);
  if (it == labels.end() || *it != label)
    throw std::invalid_argument("label not present in squeeze matrix");
  return static_cast<int>(it - labels.begin());
}

complexd SqueezeMatrix::entry(int n, int m) const {
  return values(label_index(n), label_index(m));
}

void SqueezeMatrix::validate() const {
  const auto size = static_cast<long>(labels.size());
  if (values.rows() != size || values.cols() != size)
    throw std::invalid_argument("squeeze matrix shape does not match labels");
  if (!std::is_sorted(labels.begin(), labels.end()))
    throw std::invalid_argument("labels must be sorted ascending");
  if (!values.allFinite()) throw std::invalid_argument("squeeze matrix has non-finite entries");
  const double scale_f = values.norm();
  if ((values - values.transpose()).norm() > 1e-9 * std::max(scale_f, 1e-300))
    throw std::invalid_argument("squeeze matrix must be symmetric");
}

SqueezeMatrix extract_squeeze_matrix(const JsaGrid& jsa, const BinBasis& basis_s,
                                     const BinBasis& basis_i, double scale) {
  if (jsa.norm != NormFlag::Unit)
    throw std::invalid_argument("extraction requires a unit-normalized JSA");
  const auto check_margin = [](const BinBasis& basis, const AxisGrid& axis) {
    for (int label : basis.labels) {
      const double c = basis.center(label);
      if (c - 6.0 * basis.sigma < axis.start || c + 6.0 * basis.sigma > axis.end())
        throw std::invalid_argument("bin center within 6 sigma of the grid edge");
    }
  };
  check_margin(basis_s, jsa.signal);
  check_margin(basis_i, jsa.idler);

  const long rows = jsa.values.rows();
  const long cols = jsa.values.cols();
  const auto ns = static_cast<long>(basis_s.labels.size());
  const auto ni = static_cast<long>(basis_i.labels.size());

  // Sampled bin functions with trapezoid weights folded in, so the separable
  // fast path reproduces the brute-force 2-D trapezoid quadrature exactly.
  Eigen::MatrixXd gs(ns, rows), gi(ni, cols);
  for (long b = 0; b < ns; ++b)
    for (long k = 0; k < rows; ++k)
      gs(b, k) = basis_s.value(basis_s.labels[static_cast<std::size_t>(b)], jsa.signal.value(k)) *
                 ((k == 0 || k == rows - 1) ? 0.5 : 1.0);
  for (long b = 0; b < ni; ++b)
    for (long k = 0; k < cols; ++k)
      gi(b, k) = basis_i.value(basis_i.labels[static_cast<std::size_t>(b)], jsa.idler.value(k)) *
                 ((k == 0 || k == cols - 1) ? 0.5 : 1.0);

  // gamma_nm = sum_ij G_n(omega_i_j) G_m(omega_s_i) f(i, j) ds di
  const Eigen::MatrixXcd partial = gs * jsa.values;              // (ns x cols)
  Eigen::MatrixXcd raw = (gi * partial.transpose()).transpose(); // (ns x ni)
  raw *= jsa.signal.step * jsa.idler.step;

  if (basis_s.labels != basis_i.labels)
    throw std::invalid_argument("signal and idler bases must share labels for a squeeze matrix");

  SqueezeMatrix gamma;
  gamma.labels = basis_s.labels;
  gamma.scale = scale;
  const double raw_norm = raw.norm();
  gamma.asymmetry_residual =
      (raw - raw.transpose()).norm() / std::max(raw_norm, 1e-300);
  gamma.values = 0.5 * (raw + raw.transpose().eval());
  gamma.unaccounted = 1.0 - gamma.values.squaredNorm();
  gamma.basis_spans_jsa = gamma.unaccounted <= 1e-2;
  return gamma;
}

SqueezeMatrix analytic_squeeze_matrix(const std::vector<double>& pump_coefficients,
                                      const std::vector<double>& pmf_coefficients,
                                      double scale) {
  if (pump_coefficients.empty() || pump_coefficients.size() % 2 == 0 ||
      pmf_coefficients.empty() || pmf_coefficients.size() % 2 == 0)
    throw std::invalid_argument("coefficient lists must have odd size 2N+1");
  const int np = static_cast<int>(pump_coefficients.size() - 1) / 2;
  const int nq = static_cast<int>(pmf_coefficients.size() - 1) / 2;
  const int max_label = np + nq;

  SqueezeMatrix gamma;
  gamma.scale = scale;
  for (int n = -max_label; n <= max_label; ++n) gamma.labels.push_back(n);
  const auto size = static_cast<long>(gamma.labels.size());
  gamma.values = Eigen::MatrixXcd::Zero(size, size);

  for (int n = -max_label; n <= max_label; ++n) {
    for (int m = -max_label; m <= max_label; ++m) {
      if ((n + m) % 2 != 0) continue;  // pump and PMF peak indices must be integers
      const int p = -(n + m) / 2;
      const int q = (n - m) / 2;
      if (p < -np || p > np || q < -nq || q > nq) continue;
      const double a = pump_coefficients[static_cast<std::size_t>(p + np)];
      const double b = pmf_coefficients[static_cast<std::size_t>(q + nq)];
      gamma.values(n + max_label, m + max_label) = a * b / std::sqrt(2.0);
    }
  }
  gamma.values = 0.5 * (gamma.values + gamma.values.transpose().eval());
  const double norm = gamma.values.norm();
  if (norm == 0.0) throw std::invalid_argument("analytic squeeze matrix is zero");
  gamma.values /= norm;
  gamma.unaccounted = 0.0;
  return gamma;
}

namespace {

double max_abs(const Eigen::MatrixXcd& m) {
  double peak = 0.0;
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) peak = std::max(peak, std::abs(m(i, j)));
  return peak;
}

}  // namespace

ModeCount count_modes(const SqueezeMatrix& gamma, double threshold_rel) {
  gamma.validate();
  if (!(threshold_rel > 0.0) || !(threshold_rel < 1.0))
    throw std::invalid_argument("threshold must lie in (0, 1)");
  const double floor = threshold_rel * max_abs(gamma.values);
  ModeCount count;
  const auto size = static_cast<long>(gamma.labels.size());
  for (long i = 0; i < size; ++i) {
    for (long j = i; j < size; ++j) {
      if (std::abs(gamma.values(i, j)) <= floor) continue;
      ++count.distinct_pairs;
      if (i == j) ++count.single_mode_terms;
      else ++count.two_mode_terms;
    }
  }
  return count;
}

std::vector<std::vector<int>> block_decompose(const SqueezeMatrix& gamma,
                                              double threshold_rel) {
  gamma.validate();
  const double floor = threshold_rel * max_abs(gamma.values);
  const auto size = static_cast<std::size_t>(gamma.labels.size());
  std::vector<std::size_t> parent(size);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = i + 1; j < size; ++j)
      if (std::abs(gamma.values(static_cast<long>(i), static_cast<long>(j))) > floor)
        parent[find(i)] = find(j);
  std::vector<std::vector<int>> components;
  std::vector<long> root_slot(size, -1);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t r = find(i);
    if (root_slot[r] < 0) {
      root_slot[r] = static_cast<long>(components.size());
      components.emplace_back();
    }
    components[static_cast<std::size_t>(root_slot[r])].push_back(gamma.labels[i]);
  }
  for (auto& c : components) std::sort(c.begin(), c.end());
  std::sort(components.begin(), components.end());
  return components;
}

std::vector<double> singular_spectrum(const JsaGrid& jsa) {
  if (jsa.norm != NormFlag::Unit)
    throw std::invalid_argument("singular spectrum requires a unit-normalized JSA");
  // Eigenvalues of F^dagger F give the squared singular values; cheaper than
  // a full SVD and sufficient for the spectrum.
  const Eigen::MatrixXcd gram = jsa.values.adjoint() * jsa.values;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram, Eigen::EigenvaluesOnly);
  const double cell = jsa.signal.step * jsa.idler.step;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(solver.eigenvalues().size()));
  for (long k = solver.eigenvalues().size() - 1; k >= 0; --k)
    values.push_back(std::sqrt(std::max(solver.eigenvalues()(k), 0.0) * cell));
  return values;
}

double schmidt_number(const std::vector<double>& singular_values) {
  double s2 = 0.0, s4 = 0.0;
  for (double v : singular_values) {
    s2 += v * v;
    s4 += v * v * v * v;
  }
  if (s4 == 0.0) throw std::invalid_argument("all singular values are zero");
  return s2 * s2 / s4;
}

}  // namespace qpmforge
