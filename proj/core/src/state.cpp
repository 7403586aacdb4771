#include "qpmforge/state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpmforge {

namespace {

// Applies the 2n x 2n real symmetric embedding [[X, Y], [Y, -X]] pairing:
// J (a; b) = (-b; a) maps an eigenvector with eigenvalue r to one with -r.
Eigen::VectorXd apply_j(const Eigen::VectorXd& v) {
  const long n = v.size() / 2;
  Eigen::VectorXd out(v.size());
  out.head(n) = -v.tail(n);
  out.tail(n) = v.head(n);
  return out;
}

void fix_column_sign(Eigen::MatrixXcd& u, long col) {
  const long n = u.rows();
  double peak = 0.0;
  for (long i = 0; i < n; ++i) peak = std::max(peak, std::abs(u(i, col)));
  for (long i = 0; i < n; ++i) {
    const complexd v = u(i, col);
    if (std::abs(v) <= 1e-9 * peak) continue;
    const double lead = std::abs(v.real()) > 1e-12 * std::abs(v) ? v.real() : v.imag();
    if (lead < 0.0) u.col(col) = -u.col(col);
    return;
  }
}

}  // namespace

TakagiResult takagi_factorize(const Eigen::MatrixXcd& symmetric, double tol) {
  const long n = symmetric.rows();
  if (symmetric.cols() != n) throw std::invalid_argument("matrix must be square");
  const double scale = symmetric.norm();
  if ((symmetric - symmetric.transpose()).norm() > 1e-9 * std::max(scale, 1e-300))
    throw std::invalid_argument("Takagi factorization needs a symmetric matrix");

  Eigen::MatrixXd embedding(2 * n, 2 * n);
  const Eigen::MatrixXd x = 0.5 * (symmetric.real() + symmetric.real().transpose());
  const Eigen::MatrixXd y = 0.5 * (symmetric.imag() + symmetric.imag().transpose());
  embedding.topLeftCorner(n, n) = x;
  embedding.topRightCorner(n, n) = y;
  embedding.bottomLeftCorner(n, n) = y;
  embedding.bottomRightCorner(n, n) = -x;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(embedding);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("Takagi eigendecomposition failed");
  const Eigen::VectorXd& eigs = solver.eigenvalues();  // ascending
  const double floor = tol * std::max(std::abs(eigs(0)), std::abs(eigs(2 * n - 1)));

  TakagiResult result;
  result.unitary.resize(n, n);
  result.magnitudes.resize(n);
  long out = 0;

  // Strictly positive eigenvalues give Takagi columns directly (descending).
  std::vector<Eigen::VectorXd> zero_vectors;
  for (long k = 2 * n - 1; k >= 0; --k) {
    const double lambda = eigs(k);
    if (lambda > floor) {
      const Eigen::VectorXd v = solver.eigenvectors().col(k);
      result.magnitudes(out) = lambda;
      result.unitary.col(out).real() = v.head(n);
      result.unitary.col(out).imag() = v.tail(n);
      ++out;
    } else if (std::abs(lambda) <= floor) {
      zero_vectors.push_back(solver.eigenvectors().col(k));
    }
  }

  // The zero eigenspace is closed under the J pairing; pick one vector per
  // conjugate pair, projecting out both it and its J image.
  while (out < n) {
    if (zero_vectors.empty())
      throw std::runtime_error("Takagi zero-space bookkeeping failed");
    Eigen::VectorXd v = zero_vectors.front();
    zero_vectors.erase(zero_vectors.begin());
    const double norm = v.norm();
    if (norm < 1e-9) continue;
    v /= norm;
    result.magnitudes(out) = 0.0;
    result.unitary.col(out).real() = v.head(n);
    result.unitary.col(out).imag() = v.tail(n);
    ++out;
    const Eigen::VectorXd jv = apply_j(v);
    for (auto& w : zero_vectors) {
      w -= v.dot(w) * v;
      w -= jv.dot(w) * jv;
    }
  }
  for (long c = 0; c < n; ++c) fix_column_sign(result.unitary, c);
  return result;
}

std::string ModeLabel::to_string() const {
  return "bin" + std::to_string(bin) + ":" + static_cast<char>(pol) + ":path" +
         std::to_string(path);
}

long CovarianceState::find_mode(const ModeLabel& label) const {
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i] == label) return static_cast<long>(i);
  return -1;
}

void CovarianceState::validate() const {
  const auto m = static_cast<long>(modes.size());
  if (covariance.rows() != 2 * m || covariance.cols() != 2 * m)
    throw std::invalid_argument("covariance shape does not match the mode registry");
  if (!covariance.allFinite())
    throw std::invalid_argument("covariance has non-finite entries");
}

CovarianceState vacuum_state(std::vector<ModeLabel> modes) {
  CovarianceState state;
  const auto m = static_cast<long>(modes.size());
  state.modes = std::move(modes);
  state.covariance = 0.5 * Eigen::MatrixXd::Identity(2 * m, 2 * m);
  return state;
}

Eigen::MatrixXd omega_matrix(std::size_t mode_count) {
  const auto m = static_cast<long>(mode_count);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (long k = 0; k < m; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

Eigen::MatrixXd symplectic_from_mode_unitary(const Eigen::MatrixXcd& unitary) {
  const long m = unitary.rows();
  if (unitary.cols() != m) throw std::invalid_argument("mode unitary must be square");
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (long j = 0; j < m; ++j) {
    for (long k = 0; k < m; ++k) {
      const double re = unitary(j, k).real();
      const double im = unitary(j, k).imag();
      s(2 * j, 2 * k) = re;
      s(2 * j, 2 * k + 1) = -im;
      s(2 * j + 1, 2 * k) = im;
      s(2 * j + 1, 2 * k + 1) = re;
    }
  }
  return s;
}

bool is_symplectic(const Eigen::MatrixXd& s, double tol) {
  const auto m = static_cast<std::size_t>(s.rows() / 2);
  const Eigen::MatrixXd omega = omega_matrix(m);
  return (s.transpose() * omega * s - omega).cwiseAbs().maxCoeff() <= tol;
}

double min_uncertainty_eigenvalue(const CovarianceState& state) {
  state.validate();
  const auto m = state.mode_count();
  Eigen::MatrixXcd h = state.covariance.cast<complexd>();
  h += complexd(0.0, 0.5) * omega_matrix(m).cast<complexd>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double purity_determinant(const CovarianceState& state) {
  state.validate();
  return (2.0 * state.covariance).determinant();
}

std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& covariance) {
  const auto m = static_cast<std::size_t>(covariance.rows() / 2);
  const Eigen::MatrixXd k = omega_matrix(m) * covariance;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(k);
  std::vector<double> mags;
  mags.reserve(2 * m);
  for (long i = 0; i < solver.eigenvalues().size(); ++i)
    mags.push_back(std::abs(solver.eigenvalues()(i).imag()));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  std::vector<double> out;
  for (std::size_t i = 0; i < mags.size(); i += 2) out.push_back(mags[i]);
  return out;
}

CovarianceState covariance_from_squeeze(const SqueezeMatrix& gamma, SqueezePairing pairing) {
  gamma.validate();
  const auto bins = static_cast<long>(gamma.labels.size());
  Eigen::MatrixXcd exponent;
  std::vector<ModeLabel> modes;
  if (pairing == SqueezePairing::SinglePolarization) {
    exponent = gamma.scale * gamma.values;
    for (int label : gamma.labels) modes.push_back({label, Polarization::None, 1});
  } else {
    exponent = Eigen::MatrixXcd::Zero(2 * bins, 2 * bins);
    exponent.topRightCorner(bins, bins) = gamma.scale * gamma.values;
    exponent.bottomLeftCorner(bins, bins) = gamma.scale * gamma.values;
    for (int label : gamma.labels) modes.push_back({label, Polarization::Horizontal, 1});
    for (int label : gamma.labels) modes.push_back({label, Polarization::Vertical, 1});
  }

  const TakagiResult takagi = takagi_factorize(exponent);
  const long m = exponent.rows();
  // In the Takagi mode basis each mode is squeezed with parameter r_k:
  // Var(x) = e^{+2r}/2, Var(p) = e^{-2r}/2. Rotate back with the mode unitary.
  Eigen::VectorXd diag(2 * m);
  for (long k = 0; k < m; ++k) {
    diag(2 * k) = std::exp(2.0 * takagi.magnitudes(k));
    diag(2 * k + 1) = std::exp(-2.0 * takagi.magnitudes(k));
  }
  const Eigen::MatrixXd rotation = symplectic_from_mode_unitary(takagi.unitary);
  CovarianceState state;
  state.modes = std::move(modes);
  state.covariance = 0.5 * rotation * diag.asDiagonal() * rotation.transpose();
  return state;
}

namespace {

std::vector<long> modes_on_path(const CovarianceState& state, int path) {
  std::vector<long> idx;
  for (std::size_t i = 0; i < state.modes.size(); ++i)
    if (state.modes[i].path == path) idx.push_back(static_cast<long>(i));
  return idx;
}

}  // namespace

Eigen::MatrixXd element_symplectic(const CovarianceState& state,
                                   const LinearOpticalElement& element) {
  state.validate();
  const auto m = static_cast<long>(state.mode_count());
  Eigen::MatrixXcd unitary = Eigen::MatrixXcd::Identity(m, m);

  using Kind = LinearOpticalElement::Kind;
  if (element.kind == Kind::HalfWavePlate) {
    if (modes_on_path(state, element.path_a).empty())
      throw std::invalid_argument("half-wave plate path not present in registry");
    const double two_theta = 2.0 * element.angle_deg * kPi / 180.0;
    // a_H -> i (cos a_H + sin a_V), a_V -> i (sin a_H - cos a_V)
    for (long idx = 0; idx < m; ++idx) {
      const ModeLabel& label = state.modes[static_cast<std::size_t>(idx)];
      if (label.path != element.path_a) continue;
      if (label.pol != Polarization::Horizontal) continue;
      ModeLabel partner = label;
      partner.pol = Polarization::Vertical;
      const long jdx = state.find_mode(partner);
      if (jdx < 0) throw std::invalid_argument("half-wave plate needs both polarizations");
      const complexd i_unit{0.0, 1.0};
      unitary(idx, idx) = i_unit * std::cos(two_theta);
      unitary(idx, jdx) = i_unit * std::sin(two_theta);
      unitary(jdx, idx) = i_unit * std::sin(two_theta);
      unitary(jdx, jdx) = -i_unit * std::cos(two_theta);
    }
  } else if (element.kind == Kind::BeamSplitter) {
    const auto on_a = modes_on_path(state, element.path_a);
    const auto on_b = modes_on_path(state, element.path_b);
    if (on_a.empty() || on_b.empty())
      throw std::invalid_argument("beam splitter path not present in registry");
    // angle 0 is the balanced splitter: a1 -> (a1 + a2)/sqrt2, a2 -> (-a1 + a2)/sqrt2
    const double mix = kPi / 4.0 + element.angle_deg * kPi / 180.0;
    const double c = std::cos(mix), s = std::sin(mix);
    for (long idx : on_a) {
      ModeLabel partner = state.modes[static_cast<std::size_t>(idx)];
      partner.path = element.path_b;
      const long jdx = state.find_mode(partner);
      if (jdx < 0)
        throw std::invalid_argument("beam splitter ports lack a matching mode: " +
                                    partner.to_string());
      unitary(idx, idx) = c;
      unitary(idx, jdx) = s;
      unitary(jdx, idx) = -s;
      unitary(jdx, jdx) = c;
    }
  } else {  // PolarizingBeamSplitter: H passes, V switches ports
    const auto on_a = modes_on_path(state, element.path_a);
    const auto on_b = modes_on_path(state, element.path_b);
    if (on_a.empty() || on_b.empty())
      throw std::invalid_argument("polarizing beam splitter paths not present in registry");
    for (long idx = 0; idx < m; ++idx) {
      const ModeLabel& label = state.modes[static_cast<std::size_t>(idx)];
      if (label.pol != Polarization::Vertical || label.path != element.path_a) continue;
      ModeLabel partner = label;
      partner.path = element.path_b;
      const long jdx = state.find_mode(partner);
      if (jdx < 0)
        throw std::invalid_argument("polarizing beam splitter ports lack a matching mode: " +
                                    partner.to_string());
      unitary(idx, idx) = 0.0;
      unitary(jdx, jdx) = 0.0;
      unitary(idx, jdx) = 1.0;
      unitary(jdx, idx) = 1.0;
    }
  }

  return symplectic_from_mode_unitary(unitary);
}

CovarianceState apply_element(const CovarianceState& state, const LinearOpticalElement& element) {
  const Eigen::MatrixXd s = element_symplectic(state, element);
  CovarianceState out = state;
  out.covariance = s * state.covariance * s.transpose();
  return out;
}

CovarianceState eliminate_polarization(const CovarianceState& state) {
  state.validate();
  // Expect a cross-polarized single-path state.
  std::vector<ModeLabel> ancilla;
  for (const ModeLabel& label : state.modes) {
    if (label.path != 1 || label.pol == Polarization::None)
      throw std::invalid_argument(
          "polarization elimination expects a cross-polarized state on path 1");
    ancilla.push_back({label.bin, label.pol, 2});
  }

  // Append vacuum modes for the second interferometer arm.
  CovarianceState full;
  full.modes = state.modes;
  full.modes.insert(full.modes.end(), ancilla.begin(), ancilla.end());
  const auto n_in = static_cast<long>(state.mode_count());
  const auto n_all = static_cast<long>(full.modes.size());
  full.covariance = 0.5 * Eigen::MatrixXd::Identity(2 * n_all, 2 * n_all);
  full.covariance.topLeftCorner(2 * n_in, 2 * n_in) = state.covariance;

  full = apply_element(full, {LinearOpticalElement::Kind::PolarizingBeamSplitter, 0.0, 1, 2});
  full = apply_element(full, {LinearOpticalElement::Kind::HalfWavePlate, 45.0, 2, 2});
  full = apply_element(full, {LinearOpticalElement::Kind::BeamSplitter, 0.0, 1, 2});

  // A -45 degree phase reference on every output mode absorbs the quadrature
  // rotation left behind by the half-wave plate, so each arm carries a plain
  // +gamma or -gamma squeezed copy instead of +/- i gamma.
  {
    const auto n = static_cast<long>(full.mode_count());
    const Eigen::MatrixXcd phase =
        std::polar(1.0, -kPi / 4.0) * Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXd s = symplectic_from_mode_unitary(phase);
    full.covariance = s * full.covariance * s.transpose();
  }

  // After the network all V modes are vacuum and uncorrelated: trace them out.
  std::vector<ModeLabel> keep;
  for (const ModeLabel& label : full.modes)
    if (label.pol == Polarization::Horizontal) keep.push_back(label);
  CovarianceState reduced = reduce_state(full, keep);
  for (ModeLabel& label : reduced.modes) label.pol = Polarization::None;
  return reduced;
}

double quadrature_variance(const CovarianceState& state, const Eigen::VectorXd& direction) {
  state.validate();
  if (direction.size() != state.covariance.rows())
    throw std::invalid_argument("direction length must be 2M");
  if (direction.norm() == 0.0) throw std::invalid_argument("direction must be non-zero");
  return direction.dot(state.covariance * direction);
}

CovarianceState reduce_state(const CovarianceState& state, const std::vector<ModeLabel>& keep) {
  state.validate();
  std::vector<long> indices;
  for (const ModeLabel& label : keep) {
    const long idx = state.find_mode(label);
    if (idx < 0) throw std::invalid_argument("mode not present: " + label.to_string());
    indices.push_back(idx);
  }
  CovarianceState out;
  const auto k = static_cast<long>(indices.size());
  out.covariance.resize(2 * k, 2 * k);
  for (long a = 0; a < k; ++a) {
    out.modes.push_back(state.modes[static_cast<std::size_t>(indices[a])]);
    for (long b = 0; b < k; ++b)
      out.covariance.block<2, 2>(2 * a, 2 * b) =
          state.covariance.block<2, 2>(2 * indices[a], 2 * indices[b]);
  }
  return out;
}

double ScanRange::value(int k) const {
  if (count <= 1) return start;
  return start + (stop - start) * static_cast<double>(k) / static_cast<double>(count - 1);
}

std::vector<ThssPoint> thss_scan(const ScanRange& b11, const ScanRange& b12,
                                 const ScanRange& b22) {
  if (b11.count < 1 || b12.count < 1 || b22.count < 1)
    throw std::invalid_argument("scan ranges need at least one sample");
  std::vector<ThssPoint> table;
  Eigen::VectorXd dx1(4), dxm(4), dpp(4);
  dx1 << 1, 0, 0, 0;
  dxm << 1.0 / std::sqrt(2.0), 0, -1.0 / std::sqrt(2.0), 0;
  dpp << 0, 1.0 / std::sqrt(2.0), 0, 1.0 / std::sqrt(2.0);
  for (int i = 0; i < b11.count; ++i) {
    for (int j = 0; j < b12.count; ++j) {
      for (int k = 0; k < b22.count; ++k) {
        ThssPoint point;
        point.b11 = b11.value(i);
        point.b12 = b12.value(j);
        point.b22 = b22.value(k);
        SqueezeMatrix gamma;
        gamma.labels = {1, 2};
        gamma.values.resize(2, 2);
        gamma.values << point.b11, point.b12, point.b12, point.b22;
        gamma.scale = 1.0;
        const CovarianceState state =
            covariance_from_squeeze(gamma, SqueezePairing::SinglePolarization);
        point.var_x1 = quadrature_variance(state, dx1);
        point.var_xminus = quadrature_variance(state, dxm);
        point.var_pplus = quadrature_variance(state, dpp);
        Eigen::MatrixXd pt = state.covariance;
        pt.row(3) *= -1.0;
        pt.col(3) *= -1.0;
        point.ptse = symplectic_eigenvalues(pt).back();
        table.push_back(point);
      }
    }
  }
  return table;
}

}  // namespace qpmforge
