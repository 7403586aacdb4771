#ifndef QPMFORGE_CONFIG_HPP
#define QPMFORGE_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qpmforge/dispersion.hpp"
#include "qpmforge/state.hpp"

namespace qpmforge {

// Structured run configuration. Files are either a sectioned key-value text
// file ([section] / key = value, TOML-style scalars and flat number arrays)
// or the equivalent JSON object. Unknown sections or keys are rejected.
struct ProjectConfig {
  struct Dispersion {
    std::string kind = "linear";  // "linear" | "sellmeier"
    // linear expansion fields
    std::optional<double> dk0_radpm;
    std::optional<double> kp_prime_spm;
    std::optional<double> ks_prime_spm;
    std::optional<double> ki_prime_spm;
    bool symmetric_gvm = true;
    // shared center-frequency fields
    std::optional<double> pump_wavelength_nm;
    std::optional<double> omega_p_radps;
    std::optional<double> omega_s_radps;
    std::optional<double> omega_i_radps;
    // sellmeier fields
    std::string sellmeier_set = "ktp_kato_takaoka_2002";
    std::string pump_axis = "y";
    std::string signal_axis = "z";
    std::string idler_axis = "y";
    double gvm_search_min_nm = 1200.0;
    double gvm_search_max_nm = 2000.0;
  } dispersion;

  struct TargetPmf {
    std::vector<double> c;  // c_{-N}..c_{+N}
    std::optional<double> sigma_k_per_m;
    double spacing_ratio = 24.0;
    std::optional<double> dk_per_m;  // overrides spacing_ratio when set
    std::optional<double> L_m;
  } target_pmf;

  struct Design {
    std::optional<double> domain_width_m;  // default: coherence length
    double samples_per_sigma_k = 32.0;
    std::optional<double> dk_span_sigmas;  // default: N * ratio + 10
  } design;

  struct Pump {
    std::vector<double> a;  // a_{-N}..a_{+N}; renormalized to unit square sum
    std::optional<double> sigma_thz;      // default: mapped from sigma_k
    std::optional<double> spacing_ratio;  // default: target_pmf.spacing_ratio
  } pump;

  struct Grid {
    long n = 1024;
    std::optional<double> span_sigmas;  // half-span in sigma units; default auto
  } grid;

  struct Filter {
    bool enabled = false;
    double sigma_f_ratio = 2.0;          // sigma_f = ratio * sigma
    std::optional<double> sigma_f_thz;   // overrides the ratio when set
    std::optional<double> center_s_radps;  // default: signal axis center
    std::optional<double> center_i_radps;
  } filter;

  struct Modes {
    double threshold_rel = 1e-3;
    std::optional<int> max_bin;  // default: pump N + pmf N
  } modes;

  struct State {
    double gamma_scale = 1.0;
    std::string pairing = "single";  // "single" | "cross"
    bool eliminate_polarization = false;
    bool thss_enabled = false;
    ScanRange thss_b11{0.0, 0.0, 1};
    ScanRange thss_b12{0.0, 0.0, 1};
    ScanRange thss_b22{0.0, 0.0, 1};
  } state;

  struct Output {
    std::string dir = "out";
    bool heatmap = true;
    long csv_grid_limit = 256;
  } output;
};

ProjectConfig parse_config_text(const std::string& text, bool is_json);
ProjectConfig load_config_file(const std::filesystem::path& path);

// JSON echo with every default materialized; itself a valid config input.
std::string resolved_config_json(const ProjectConfig& config);

// Builds the dispersion model: resolves the Sellmeier set by name (built-in
// first, then <name>.json under QPMFORGE_SELLMEIER_DIR), fills center
// frequencies from the explicit fields, the pump wavelength, or a
// symmetric-GVM search.
DispersionModel resolve_dispersion(const ProjectConfig::Dispersion& config);

SellmeierSet find_sellmeier_set(const std::string& name);

}  // namespace qpmforge

#endif
