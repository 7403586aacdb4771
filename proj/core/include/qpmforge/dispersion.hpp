#ifndef QPMFORGE_DISPERSION_HPP
#define QPMFORGE_DISPERSION_HPP

#include <array>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "qpmforge/numeric.hpp"

namespace qpmforge {

enum class Wave { Pump, Signal, Idler };

const char* wave_name(Wave w);

// First-order expansion of the phase mismatch around the interaction's center
// frequencies: dk0 plus group-slowness terms for each wave.
struct LinearExpansion {
  double dk0 = 0.0;              // rad/m, mismatch at the center frequencies
  double kp_prime = 0.0;         // s/m, pump group slowness d k / d omega
  double ks_prime = 0.0;         // s/m, signal
  double ki_prime = 0.0;         // s/m, idler
  double omega_p = 0.0;          // rad/s, center frequencies; omega_p == omega_s + omega_i
  double omega_s = 0.0;
  double omega_i = 0.0;
  bool symmetric_gvm = false;    // if set, kp_prime must equal (ks_prime + ki_prime)/2
};

// One polarization axis of a Sellmeier model:
//   n^2(lambda) = constant + sum_i p_i / (lambda^2 - q_i) - quadratic * lambda^2
// with lambda in micrometres.
struct SellmeierAxisCoefficients {
  double constant = 1.0;
  std::vector<std::array<double, 2>> poles;  // {p_i, q_i}
  double quadratic = 0.0;

  double index_squared(double lambda_um) const;
  double index(double lambda_um) const;
  // d n / d lambda, lambda in micrometres.
  double index_derivative(double lambda_um) const;
};

struct SellmeierSet {
  std::string name;
  std::string provenance;      // literature source of the coefficients
  double temperature_c = 25.0; // temperature the coefficients were fitted at (metadata only)
  double lambda_min_um = 0.0;  // validity window
  double lambda_max_um = 0.0;
  std::map<std::string, SellmeierAxisCoefficients> axes;  // keyed "x", "y", "z"

  const SellmeierAxisCoefficients& axis(const std::string& key) const;
};

// Bundled KTP coefficients (Kato & Takaoka, Appl. Opt. 41, 5040 (2002)).
SellmeierSet ktp_kato_takaoka_2002();

// Full-dispersion model: a coefficient set plus the polarization axis carried
// by each wave and the interaction's center frequencies.
struct SellmeierModel {
  SellmeierSet set;
  std::string pump_axis = "y";
  std::string signal_axis = "z";
  std::string idler_axis = "y";
  double omega_p = 0.0;  // rad/s
  double omega_s = 0.0;
  double omega_i = 0.0;
};

using DispersionModel = std::variant<LinearExpansion, SellmeierModel>;

// Throws std::invalid_argument when center frequencies violate energy
// conservation or a symmetric-GVM flag is inconsistent with the slownesses.
void validate_model(const DispersionModel& model);

// k(omega) = omega n(omega) / c for the given wave. Sellmeier models only;
// throws std::domain_error outside the validity window, naming the wave.
double wavenumber(const SellmeierModel& model, Wave wave, double omega);

// d k / d omega at the given frequency (s/m), from the analytic index derivative.
double group_slowness(const SellmeierModel& model, Wave wave, double omega);
// Group slowness at the model's own center frequency of that wave.
double group_slowness(const DispersionModel& model, Wave wave);

// Phase mismatch k_p(omega_s + omega_i) - k_i(omega_i) - k_s(omega_s) in rad/m.
// Linear models use the first-order expansion around the center frequencies.
double phase_mismatch(const DispersionModel& model, double omega_s, double omega_i);

double delta_k0(const DispersionModel& model);

// pi / |dk0|. Throws std::domain_error when dk0 == 0 (nothing to pole).
double coherence_length(const DispersionModel& model);

struct GvmPoint {
  double omega_s = 0.0;
  double omega_i = 0.0;
  double omega_p = 0.0;
  double residual_rel = 0.0;  // |kp' - (ks'+ki')/2| / kp' at the returned point
};

// Locates the degenerate frequency where the pump group slowness equals the
// signal/idler mean, by bisection over the degenerate wavelength inside
// [lambda_lo_m, lambda_hi_m]. Linear models with the flag already set pass
// through unchanged. Throws std::domain_error when the window brackets no root.
GvmPoint find_symmetric_gvm_point(const DispersionModel& model, double lambda_lo_m,
                                  double lambda_hi_m);

// Linear expansion of a Sellmeier model at its center frequencies.
LinearExpansion linearize(const DispersionModel& model);

// Widths and spacings of the frequency-bin grid in both the mismatch variable
// (rad/m) and the difference-frequency variable (rad/s). The two pictures are
// related by the group-slowness difference: sigma_k = sigma/2 (ks' - ki').
struct BinGeometry {
  double sigma = 0.0;        // rad/s
  double delta_omega = 0.0;  // rad/s
  int max_peak_index = 0;
  double sigma_k = 0.0;      // rad/m
  double delta_k = 0.0;      // rad/m
};

// Maps a mismatch-space width through the model's group slownesses.
// spacing_ratio = delta_k / sigma_k >= 1.
BinGeometry bin_geometry_from(const DispersionModel& model, double sigma_k,
                              double spacing_ratio, int max_peak_index = 0);

}  // namespace qpmforge

#endif
