#include "qpmforge/pipeline.hpp"

#include <cmath>
#include <stdexcept>
#include <variant>

namespace qpmforge {

namespace {

double axis_center(const DispersionModel& model, Wave wave) {
  if (const auto* lin = std::get_if<LinearExpansion>(&model)) {
    switch (wave) {
      case Wave::Pump: return lin->omega_p;
      case Wave::Signal: return lin->omega_s;
      default: return lin->omega_i;
    }
  }
  const auto& sm = std::get<SellmeierModel>(model);
  switch (wave) {
    case Wave::Pump: return sm.omega_p;
    case Wave::Signal: return sm.omega_s;
    default: return sm.omega_i;
  }
}

}  // namespace

ResolvedSetup resolve_setup(const ProjectConfig& config) {
  ResolvedSetup setup;
  setup.config = config;
  setup.dispersion = resolve_dispersion(config.dispersion);

  const bool has_target = !config.target_pmf.c.empty();
  const bool has_pump = !config.pump.a.empty();

  // Bin geometry from the mismatch-space width; a pump-only setup may instead
  // specify sigma directly in THz.
  double spacing_ratio = config.target_pmf.spacing_ratio;
  if (has_target && config.target_pmf.dk_per_m) {
    if (!config.target_pmf.sigma_k_per_m)
      throw std::invalid_argument("target_pmf.dk_per_m needs sigma_k_per_m");
    spacing_ratio = *config.target_pmf.dk_per_m / *config.target_pmf.sigma_k_per_m;
  }
  if (config.pump.spacing_ratio) spacing_ratio = *config.pump.spacing_ratio;

  if (config.target_pmf.sigma_k_per_m) {
    setup.geometry = bin_geometry_from(setup.dispersion, *config.target_pmf.sigma_k_per_m,
                                       spacing_ratio);
  } else if (config.pump.sigma_thz) {
    const double sigma = thz_to_radps(*config.pump.sigma_thz);
    const double diff = group_slowness(setup.dispersion, Wave::Signal) -
                        group_slowness(setup.dispersion, Wave::Idler);
    setup.geometry = bin_geometry_from(setup.dispersion, 0.5 * sigma * diff, spacing_ratio);
  } else if (has_target || has_pump) {
    throw std::invalid_argument(
        "need target_pmf.sigma_k_per_m (or pump.sigma_thz) to fix the bin geometry");
  }
  if (config.pump.sigma_thz) setup.geometry.sigma = thz_to_radps(*config.pump.sigma_thz);

  if (has_target) {
    if (!config.target_pmf.sigma_k_per_m)
      throw std::invalid_argument("target_pmf needs sigma_k_per_m");
    if (!config.target_pmf.L_m) throw std::invalid_argument("target_pmf needs L_m");
    setup.target.coefficients = config.target_pmf.c;
    setup.target.dk0 = delta_k0(setup.dispersion);
    setup.target.sigma_k = *config.target_pmf.sigma_k_per_m;
    setup.target.delta_k = config.target_pmf.dk_per_m.value_or(
        setup.target.sigma_k * spacing_ratio);
    setup.target.length = *config.target_pmf.L_m;
    setup.target.validate();
    setup.geometry.max_peak_index = setup.target.max_index();
    setup.domain_width = config.design.domain_width_m.value_or(
        coherence_length(setup.dispersion));
  }

  if (has_pump) {
    setup.pump.coefficients = config.pump.a;
    setup.pump = normalized(setup.pump);
    setup.pump.omega_p = axis_center(setup.dispersion, Wave::Pump);
    setup.pump.sigma = config.pump.sigma_thz ? thz_to_radps(*config.pump.sigma_thz)
                                             : setup.geometry.sigma;
    setup.pump.delta_omega = setup.geometry.delta_omega;
    setup.pump.validate();
    if (!setup.pump.well_separated())
      throw std::invalid_argument("pump peaks closer than 12 sigma; bins would overlap");
  }

  setup.max_bin = config.modes.max_bin.value_or(
      (has_pump ? setup.pump.max_index() : 0) + (has_target ? setup.target.max_index() : 0));

  setup.grid.n = config.grid.n;
  const double span_sigmas = config.grid.span_sigmas.value_or(
      static_cast<double>(setup.max_bin) * spacing_ratio / 2.0 + 10.0);
  setup.grid.half_span = span_sigmas * setup.geometry.sigma;

  setup.filter_enabled = config.filter.enabled;
  setup.filter.center_s = config.filter.center_s_radps.value_or(
      axis_center(setup.dispersion, Wave::Signal));
  setup.filter.center_i = config.filter.center_i_radps.value_or(
      axis_center(setup.dispersion, Wave::Idler));
  setup.filter.sigma_f = config.filter.sigma_f_thz
                             ? thz_to_radps(*config.filter.sigma_f_thz)
                             : config.filter.sigma_f_ratio * setup.geometry.sigma;
  return setup;
}

DesignOutput run_design(const ResolvedSetup& setup, unsigned threads) {
  if (!setup.has_target()) throw std::invalid_argument("config has no target_pmf section");
  DesignOutput out;
  out.feasibility = feasibility_check(setup.target);
  out.synthesis = synthesize_domains(setup.target, setup.domain_width);

  if (setup.config.design.dk_span_sigmas) {
    // widen/narrow the default grid by rebuilding it from the requested span
    const double span = *setup.config.design.dk_span_sigmas * setup.target.sigma_k;
    const double step = setup.target.sigma_k / setup.config.design.samples_per_sigma_k;
    const auto half_count = static_cast<long>(std::ceil(span / step));
    for (long i = -half_count; i <= half_count; ++i)
      out.dk_grid.push_back(setup.target.dk0 + static_cast<double>(i) * step);
  } else {
    const double step = setup.target.sigma_k / setup.config.design.samples_per_sigma_k;
    const double span = setup.target.max_index() * setup.target.delta_k +
                        10.0 * setup.target.sigma_k;
    const auto half_count = static_cast<long>(std::ceil(span / step));
    for (long i = -half_count; i <= half_count; ++i)
      out.dk_grid.push_back(setup.target.dk0 + static_cast<double>(i) * step);
  }
  out.pmf = pmf_coherent_sum(out.synthesis.domains, out.dk_grid, threads);
  out.bias = bias_diagnostic(out.synthesis.domains, setup.target);
  return out;
}

namespace {

JsaGrid assemble_with(const ResolvedSetup& setup, const PmfFrequencySampler& sampler,
                      unsigned threads) {
  if (!setup.has_pump()) throw std::invalid_argument("config has no pump section");
  JsaGrid jsa = assemble_jsa(setup.pump, sampler, setup.grid, threads);
  if (setup.filter_enabled) jsa = apply_filter(jsa, setup.filter);
  return jsa;
}

}  // namespace

namespace {

// Normalization grid: padded to 12 sigma_k so Gaussian targets clear the
// 1e-6 support threshold (the design grid's 10 sigma_k pad leaves ~4e-6).
std::vector<double> make_norm_dk_grid(const TargetPmfSpec& spec) {
  const double half_span = spec.max_index() * spec.delta_k + 12.0 * spec.sigma_k;
  const double step = spec.sigma_k / 32.0;
  const auto half_count = static_cast<long>(std::ceil(half_span / step));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(2 * half_count + 1));
  for (long i = -half_count; i <= half_count; ++i)
    grid.push_back(spec.dk0 + static_cast<double>(i) * step);
  return grid;
}

}  // namespace

JsaGrid build_jsa_from_domains(const ResolvedSetup& setup, const DomainConfiguration& domains,
                               unsigned threads) {
  if (!setup.has_target()) throw std::invalid_argument("config has no target_pmf section");
  const std::vector<double> dk_grid = make_norm_dk_grid(setup.target);
  const std::vector<complexd> raw = pmf_coherent_sum(domains, dk_grid, threads);
  const double diff = group_slowness(setup.dispersion, Wave::Signal) -
                      group_slowness(setup.dispersion, Wave::Idler);
  // Realized PMFs carry the QPM sidelobe floor, so the scale is band-limited.
  const double norm = pmf_band_norm(raw, dk_grid[1] - dk_grid[0], diff);
  const PmfFrequencySampler sampler = pmf_frequency_space(domains, norm, setup.dispersion);
  return assemble_with(setup, sampler, threads);
}

JsaGrid build_jsa_from_target(const ResolvedSetup& setup, unsigned threads) {
  if (!setup.has_target()) throw std::invalid_argument("config has no target_pmf section");
  const std::vector<double> dk_grid = make_norm_dk_grid(setup.target);
  std::vector<complexd> samples(dk_grid.size());
  for (std::size_t i = 0; i < dk_grid.size(); ++i)
    samples[i] = complexd{setup.target.value(dk_grid[i]), 0.0};
  const double diff = group_slowness(setup.dispersion, Wave::Signal) -
                      group_slowness(setup.dispersion, Wave::Idler);
  const NormalizedPmf normalized = normalize_pmf(samples, dk_grid[1] - dk_grid[0], diff);
  const PmfFrequencySampler sampler =
      pmf_frequency_space(setup.target, normalized.norm, setup.dispersion);
  return assemble_with(setup, sampler, threads);
}

BinBasis signal_basis(const ResolvedSetup& setup) {
  return make_bin_basis(axis_center(setup.dispersion, Wave::Signal), setup.geometry,
                        setup.max_bin);
}

BinBasis idler_basis(const ResolvedSetup& setup) {
  return make_bin_basis(axis_center(setup.dispersion, Wave::Idler), setup.geometry,
                        setup.max_bin);
}

FilterSpec resolved_filter(const ResolvedSetup& setup) { return setup.filter; }

}  // namespace qpmforge
