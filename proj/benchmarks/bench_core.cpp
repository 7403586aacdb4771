#include <benchmark/benchmark.h>

#include "qpmforge/modes.hpp"
#include "qpmforge/pipeline.hpp"
#include "qpmforge/poling.hpp"
#include "qpmforge/state.hpp"

using namespace qpmforge;

namespace {

LinearExpansion bench_model() {
  LinearExpansion lin;
  lin.dk0 = 168630.84560331688;
  lin.ks_prime = 6.2132971320706604e-9;
  lin.ki_prime = 5.9e-9;
  lin.kp_prime = 0.5 * (lin.ks_prime + lin.ki_prime);
  lin.omega_p = wavelength_m_to_radps(791e-9);
  lin.omega_s = 0.5 * lin.omega_p;
  lin.omega_i = lin.omega_p - lin.omega_s;
  lin.symmetric_gvm = true;
  return lin;
}

TargetPmfSpec bench_target() {
  TargetPmfSpec spec;
  const double c = 0.063830764864229228;
  spec.coefficients = {c, c, c, c, c};
  spec.dk0 = bench_model().dk0;
  spec.sigma_k = 125.0;
  spec.delta_k = 3000.0;
  spec.length = 0.02;
  return spec;
}

void bm_synthesize_domains(benchmark::State& state) {
  const TargetPmfSpec spec = bench_target();
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize_domains(spec, 1.863e-5));
  }
}
BENCHMARK(bm_synthesize_domains)->Unit(benchmark::kMillisecond);

void bm_pmf_coherent_sum(benchmark::State& state) {
  const SynthesisResult result = synthesize_domains(bench_target(), 1.863e-5);
  const std::vector<double> grid = make_default_dk_grid(bench_target());
  for (auto _ : state) {
    benchmark::DoNotOptimize(pmf_coherent_sum(result.domains, grid, 1));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(grid.size()));
}
BENCHMARK(bm_pmf_coherent_sum)->Unit(benchmark::kMillisecond);

void bm_assemble_jsa(benchmark::State& state) {
  const auto n = static_cast<long>(state.range(0));
  const DispersionModel model = bench_model();
  const BinGeometry geom = bin_geometry_from(model, 125.0, 24.0);
  PumpSpec pump;
  pump.coefficients.assign(5, 1.0 / std::sqrt(5.0));
  pump.omega_p = bench_model().omega_p;
  pump.delta_omega = geom.delta_omega;
  pump.sigma = geom.sigma;
  const TargetPmfSpec target = bench_target();
  const PmfFrequencySampler sampler = pmf_frequency_space(target, 1.0, model);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_jsa(pump, sampler, {n, 58.0 * geom.sigma}));
  }
}
BENCHMARK(bm_assemble_jsa)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

void bm_extract_squeeze_matrix(benchmark::State& state) {
  const DispersionModel model = bench_model();
  const BinGeometry geom = bin_geometry_from(model, 125.0, 24.0);
  PumpSpec pump;
  pump.coefficients.assign(5, 1.0 / std::sqrt(5.0));
  pump.omega_p = bench_model().omega_p;
  pump.delta_omega = geom.delta_omega;
  pump.sigma = geom.sigma;
  const TargetPmfSpec target = bench_target();
  const PmfFrequencySampler sampler = pmf_frequency_space(target, 1.0, model);
  const JsaGrid jsa = assemble_jsa(pump, sampler, {1024, 58.0 * geom.sigma});
  const auto& lin = bench_model();
  const BinBasis bs = make_bin_basis(lin.omega_s, geom, 4);
  const BinBasis bi = make_bin_basis(lin.omega_i, geom, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_squeeze_matrix(jsa, bs, bi));
  }
}
BENCHMARK(bm_extract_squeeze_matrix)->Unit(benchmark::kMillisecond);

void bm_takagi(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  Eigen::MatrixXcd gamma(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      gamma(i, j) = complexd{std::sin(0.3 * i * j + 0.1), std::cos(0.7 * i - j)};
  gamma = 0.1 * (gamma + gamma.transpose().eval());
  for (auto _ : state) {
    benchmark::DoNotOptimize(takagi_factorize(gamma));
  }
}
BENCHMARK(bm_takagi)->Arg(9)->Arg(18)->Unit(benchmark::kMicrosecond);

void bm_eliminate_polarization(benchmark::State& state) {
  SqueezeMatrix gamma;
  for (int n = -4; n <= 4; ++n) gamma.labels.push_back(n);
  gamma.values = Eigen::MatrixXcd::Zero(9, 9);
  for (int i = 0; i < 9; ++i) gamma.values(i, i) = 0.2;
  gamma.values(0, 2) = gamma.values(2, 0) = 0.1;
  const CovarianceState cross = covariance_from_squeeze(gamma, SqueezePairing::CrossPolarized);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eliminate_polarization(cross));
  }
}
BENCHMARK(bm_eliminate_polarization)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
