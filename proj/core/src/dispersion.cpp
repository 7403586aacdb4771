#include "qpmforge/dispersion.hpp"

#include <cmath>
#include <stdexcept>

namespace qpmforge {

const char* wave_name(Wave w) {
  switch (w) {
    case Wave::Pump: return "pump";
    case Wave::Signal: return "signal";
    default: return "idler";
  }
}

double SellmeierAxisCoefficients::index_squared(double lambda_um) const {
  const double l2 = lambda_um * lambda_um;
  double n2 = constant - quadratic * l2;
  for (const auto& [p, q] : poles) n2 += p / (l2 - q);
  return n2;
}

double SellmeierAxisCoefficients::index(double lambda_um) const {
  const double n2 = index_squared(lambda_um);
  if (n2 <= 0.0) throw std::domain_error("Sellmeier index squared non-positive");
  return std::sqrt(n2);
}

double SellmeierAxisCoefficients::index_derivative(double lambda_um) const {
  const double l2 = lambda_um * lambda_um;
  double dn2 = -2.0 * quadratic * lambda_um;
  for (const auto& [p, q] : poles) {
    const double d = l2 - q;
    dn2 -= p * 2.0 * lambda_um / (d * d);
  }
  return dn2 / (2.0 * index(lambda_um));
}

const SellmeierAxisCoefficients& SellmeierSet::axis(const std::string& key) const {
  auto it = axes.find(key);
  if (it == axes.end())
    throw std::invalid_argument("Sellmeier set '" + name + "' has no axis '" + key + "'");
  return it->second;
}

SellmeierSet ktp_kato_takaoka_2002() {
  SellmeierSet set;
  set.name = "ktp_kato_takaoka_2002";
  set.provenance = "K. Kato and E. Takaoka, Appl. Opt. 41, 5040-5044 (2002), KTP at 20 C";
  set.temperature_c = 20.0;
  set.lambda_min_um = 0.43;
  set.lambda_max_um = 3.54;
  set.axes["x"] = {3.29100, {{0.04140, 0.03978}, {9.35522, 31.45571}}, 0.0};
  set.axes["y"] = {3.45018, {{0.04341, 0.04597}, {16.98825, 39.43799}}, 0.0};
  set.axes["z"] = {4.59423, {{0.06206, 0.04763}, {110.80672, 86.12171}}, 0.0};
  return set;
}

namespace {

constexpr double kEnergyTol = 1e-12;
constexpr double kGvmFlagTol = 1e-12;
constexpr double kGvmResidualTol = 1e-9;
constexpr int kGvmBisectionMax = 60;

const std::string& axis_of(const SellmeierModel& m, Wave w) {
  switch (w) {
    case Wave::Pump: return m.pump_axis;
    case Wave::Signal: return m.signal_axis;
    default: return m.idler_axis;
  }
}

double lambda_um_checked(const SellmeierModel& m, Wave w, double omega) {
  if (!(omega > 0.0))
    throw std::domain_error(std::string("non-positive frequency for ") + wave_name(w));
  const double lambda_um = radps_to_wavelength_m(omega) * 1e6;
  if (lambda_um < m.set.lambda_min_um || lambda_um > m.set.lambda_max_um) {
    throw std::domain_error(std::string(wave_name(w)) + " wavelength " +
                            fmt_double(lambda_um) + " um outside validity window of '" +
                            m.set.name + "' (axis " + axis_of(m, w) + ")");
  }
  return lambda_um;
}

double gvm_residual_rel(const LinearExpansion& lin) {
  const double mean = 0.5 * (lin.ks_prime + lin.ki_prime);
  return std::abs(lin.kp_prime - mean) / std::abs(lin.kp_prime);
}

// kp'(2 w) - (ks'(w) + ki'(w))/2 at the degenerate frequency w.
double degenerate_gvm_mismatch(const SellmeierModel& m, double omega_half) {
  return group_slowness(m, Wave::Pump, 2.0 * omega_half) -
         0.5 * (group_slowness(m, Wave::Signal, omega_half) +
                group_slowness(m, Wave::Idler, omega_half));
}

}  // namespace

void validate_model(const DispersionModel& model) {
  const auto check_energy = [](double wp, double ws, double wi) {
    if (!(wp > 0.0) || !(ws > 0.0) || !(wi > 0.0))
      throw std::invalid_argument("center frequencies must be positive");
    if (std::abs(wp - (ws + wi)) > kEnergyTol * wp)
      throw std::invalid_argument("center frequencies violate omega_p = omega_s + omega_i");
  };
  if (const auto* lin = std::get_if<LinearExpansion>(&model)) {
    check_energy(lin->omega_p, lin->omega_s, lin->omega_i);
    if (lin->symmetric_gvm && gvm_residual_rel(*lin) > kGvmFlagTol)
      throw std::invalid_argument(
          "symmetric_gvm set but kp' != (ks' + ki')/2 beyond 1e-12 relative");
  } else {
    const auto& sm = std::get<SellmeierModel>(model);
    check_energy(sm.omega_p, sm.omega_s, sm.omega_i);
    sm.set.axis(sm.pump_axis);
    sm.set.axis(sm.signal_axis);
    sm.set.axis(sm.idler_axis);
  }
}

double wavenumber(const SellmeierModel& model, Wave wave, double omega) {
  const double lambda_um = lambda_um_checked(model, wave, omega);
  return omega * model.set.axis(axis_of(model, wave)).index(lambda_um) / kSpeedOfLight;
}

double group_slowness(const SellmeierModel& model, Wave wave, double omega) {
  const double lambda_um = lambda_um_checked(model, wave, omega);
  const auto& ax = model.set.axis(axis_of(model, wave));
  // group index n_g = n - lambda dn/dlambda, in matching length units
  const double ng = ax.index(lambda_um) - lambda_um * ax.index_derivative(lambda_um);
  return ng / kSpeedOfLight;
}

double group_slowness(const DispersionModel& model, Wave wave) {
  if (const auto* lin = std::get_if<LinearExpansion>(&model)) {
    switch (wave) {
      case Wave::Pump: return lin->kp_prime;
      case Wave::Signal: return lin->ks_prime;
      default: return lin->ki_prime;
    }
  }
  const auto& sm = std::get<SellmeierModel>(model);
  switch (wave) {
    case Wave::Pump: return group_slowness(sm, Wave::Pump, sm.omega_p);
    case Wave::Signal: return group_slowness(sm, Wave::Signal, sm.omega_s);
    default: return group_slowness(sm, Wave::Idler, sm.omega_i);
  }
}

double phase_mismatch(const DispersionModel& model, double omega_s, double omega_i) {
  validate_model(model);
  if (!(omega_s > 0.0)) throw std::domain_error("non-positive frequency for signal");
  if (!(omega_i > 0.0)) throw std::domain_error("non-positive frequency for idler");
  if (const auto* lin = std::get_if<LinearExpansion>(&model)) {
    return lin->dk0 + lin->kp_prime * (omega_s + omega_i - lin->omega_p) -
           lin->ks_prime * (omega_s - lin->omega_s) - lin->ki_prime * (omega_i - lin->omega_i);
  }
  const auto& sm = std::get<SellmeierModel>(model);
  return wavenumber(sm, Wave::Pump, omega_s + omega_i) - wavenumber(sm, Wave::Idler, omega_i) -
         wavenumber(sm, Wave::Signal, omega_s);
}

double delta_k0(const DispersionModel& model) {
  if (const auto* lin = std::get_if<LinearExpansion>(&model)) return lin->dk0;
  const auto& sm = std::get<SellmeierModel>(model);
  return phase_mismatch(model, sm.omega_s, sm.omega_i);
}

double coherence_length(const DispersionModel& model) {
  const double dk0 = delta_k0(model);
  if (dk0 == 0.0)
    throw std::domain_error("intrinsically phase-matched; poling not required");
  return kPi / std::abs(dk0);
}

GvmPoint find_symmetric_gvm_point(const DispersionModel& model, double lambda_lo_m,
                                  double lambda_hi_m) {
  validate_model(model);
  if (const auto* lin = std::get_if<LinearExpansion>(&model)) {
    const double res = gvm_residual_rel(*lin);
    if (res > kGvmResidualTol)
      throw std::domain_error("no symmetric-GVM point found: linear model is not matched");
    return {lin->omega_s, lin->omega_i, lin->omega_p, res};
  }
  const auto& sm = std::get<SellmeierModel>(model);
  if (!(lambda_lo_m > 0.0) || !(lambda_hi_m > lambda_lo_m))
    throw std::invalid_argument("invalid wavelength search window");

  auto mismatch_at_lambda = [&](double lambda_m) {
    return degenerate_gvm_mismatch(sm, wavelength_m_to_radps(lambda_m));
  };
  double lo = lambda_lo_m, hi = lambda_hi_m;
  double flo = mismatch_at_lambda(lo);
  double fhi = mismatch_at_lambda(hi);
  if (flo == 0.0) hi = lo;
  else if (fhi == 0.0) lo = hi;
  else if (flo * fhi > 0.0)
    throw std::domain_error("no symmetric-GVM point found in search window");
  for (int it = 0; it < kGvmBisectionMax && hi > lo; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = mismatch_at_lambda(mid);
    if (fm == 0.0) { lo = hi = mid; break; }
    if (fm * flo < 0.0) { hi = mid; fhi = fm; }
    else { lo = mid; flo = fm; }
  }
  const double lambda = 0.5 * (lo + hi);
  const double omega_half = wavelength_m_to_radps(lambda);
  GvmPoint point{omega_half, omega_half, 2.0 * omega_half, 0.0};
  point.residual_rel = std::abs(degenerate_gvm_mismatch(sm, omega_half)) /
                       group_slowness(sm, Wave::Pump, 2.0 * omega_half);
  if (point.residual_rel > kGvmResidualTol)
    throw std::domain_error("symmetric-GVM bisection did not reach residual tolerance");
  return point;
}

LinearExpansion linearize(const DispersionModel& model) {
  validate_model(model);
  if (const auto* lin = std::get_if<LinearExpansion>(&model)) return *lin;
  const auto& sm = std::get<SellmeierModel>(model);
  LinearExpansion lin;
  lin.dk0 = delta_k0(model);
  lin.kp_prime = group_slowness(sm, Wave::Pump, sm.omega_p);
  lin.ks_prime = group_slowness(sm, Wave::Signal, sm.omega_s);
  lin.ki_prime = group_slowness(sm, Wave::Idler, sm.omega_i);
  lin.omega_p = sm.omega_p;
  lin.omega_s = sm.omega_s;
  lin.omega_i = sm.omega_i;
  lin.symmetric_gvm = false;
  return lin;
}

BinGeometry bin_geometry_from(const DispersionModel& model, double sigma_k,
                              double spacing_ratio, int max_peak_index) {
  validate_model(model);
  if (!(sigma_k > 0.0)) throw std::invalid_argument("sigma_k must be positive");
  if (!(spacing_ratio >= 1.0)) throw std::invalid_argument("spacing_ratio must be >= 1");
  const double ks = group_slowness(model, Wave::Signal);
  const double ki = group_slowness(model, Wave::Idler);
  const double diff = ks - ki;
  if (diff == 0.0)
    throw std::domain_error("degenerate group velocities; frequency mapping singular");
  if (diff < 0.0)
    throw std::domain_error(
        "signal group slowness below idler; swap the signal/idler axis assignment");
  BinGeometry geom;
  geom.sigma_k = sigma_k;
  geom.delta_k = spacing_ratio * sigma_k;
  geom.sigma = 2.0 * sigma_k / diff;
  geom.delta_omega = spacing_ratio * geom.sigma;
  geom.max_peak_index = max_peak_index;
  return geom;
}

}  // namespace qpmforge
