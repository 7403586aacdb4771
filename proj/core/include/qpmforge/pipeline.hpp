#ifndef QPMFORGE_PIPELINE_HPP
#define QPMFORGE_PIPELINE_HPP

#include "qpmforge/config.hpp"
#include "qpmforge/modes.hpp"
#include "qpmforge/poling.hpp"
#include "qpmforge/spectra.hpp"

namespace qpmforge {

// Everything the commands need, derived once from a config.
struct ResolvedSetup {
  ProjectConfig config;
  DispersionModel dispersion;
  BinGeometry geometry;    // needs target_pmf.sigma_k (or pump.sigma_thz)
  TargetPmfSpec target;    // empty coefficients when no target_pmf section
  PumpSpec pump;           // empty coefficients when no pump section
  double domain_width = 0.0;
  int max_bin = 0;         // largest bin label involved
  GridSpec grid;
  FilterSpec filter;
  bool filter_enabled = false;

  bool has_target() const { return !target.coefficients.empty(); }
  bool has_pump() const { return !pump.coefficients.empty(); }
};

ResolvedSetup resolve_setup(const ProjectConfig& config);

struct DesignOutput {
  FeasibilityReport feasibility;
  SynthesisResult synthesis;
  std::vector<double> dk_grid;
  std::vector<complexd> pmf;  // realized, unnormalized
  BiasReport bias;
};

DesignOutput run_design(const ResolvedSetup& setup, unsigned threads = 1);

// JSA from the realized crystal (coherent-sum PMF, normalized on the design grid).
JsaGrid build_jsa_from_domains(const ResolvedSetup& setup, const DomainConfiguration& domains,
                               unsigned threads = 1);
// JSA from the analytic target PMF (no poling granularity).
JsaGrid build_jsa_from_target(const ResolvedSetup& setup, unsigned threads = 1);

// Bin bases on both axes for mode extraction.
BinBasis signal_basis(const ResolvedSetup& setup);
BinBasis idler_basis(const ResolvedSetup& setup);

FilterSpec resolved_filter(const ResolvedSetup& setup);

}  // namespace qpmforge

#endif
