// qpmforge command-line front end: design custom-poled crystals, evaluate
// phase-matching functions, assemble joint spectral amplitudes, extract
// frequency-bin squeeze matrices, and simulate the resulting Gaussian states.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "qpmforge/io.hpp"
#include "qpmforge/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qpmforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitBadInput = 3;
constexpr int kExitBadMatrix = 4;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;  // 0 = auto
  long grid_size = 0;    // 0 = from config
};

ResolvedSetup load_setup(const GlobalOptions& opts) {
  if (!fs::exists(opts.config_path))
    throw std::runtime_error("config file not found: " + opts.config_path);
  ProjectConfig config = load_config_file(opts.config_path);
  if (!opts.out_dir.empty()) config.output.dir = opts.out_dir;
  if (opts.grid_size > 0) config.grid.n = opts.grid_size;
  return resolve_setup(config);
}

fs::path ensure_out_dir(const ResolvedSetup& setup) {
  const fs::path dir = setup.config.output.dir;
  fs::create_directories(dir);
  return dir;
}

void write_config_echo(const ResolvedSetup& setup, const fs::path& dir) {
  ProjectConfig echoed = setup.config;
  // materialize the values that were defaulted from the dispersion model
  if (setup.has_target() && !echoed.design.domain_width_m)
    echoed.design.domain_width_m = setup.domain_width;
  if (setup.has_pump() && !echoed.pump.sigma_thz)
    echoed.pump.sigma_thz = radps_to_thz(setup.pump.sigma);
  if (!echoed.modes.max_bin) echoed.modes.max_bin = setup.max_bin;
  write_text_file(dir / "resolved_config.json", resolved_config_json(echoed));
}

json provenance(const ResolvedSetup& setup, const std::string& command) {
  json p;
  p["tool"] = "qpmforge";
  p["command"] = command;
  p["config"] = json::parse(resolved_config_json(setup.config));
  return p;
}

int bin_label_of(double omega, double center, double half_spacing) {
  return static_cast<int>(std::lround((omega - center) / half_spacing));
}

int cmd_design(const GlobalOptions& opts) {
  const ResolvedSetup setup = load_setup(opts);
  const fs::path dir = ensure_out_dir(setup);
  write_config_echo(setup, dir);
  DesignOutput out;
  try {
    out = run_design(setup, opts.threads);
  } catch (const InfeasibleTargetError& e) {
    std::cerr << "infeasible target: slack = " << fmt_double(e.report.slack)
              << " (bound " << fmt_double(e.report.bound) << ", coefficient sum "
              << fmt_double(e.report.coefficient_sum) << ")\n";
    return kExitInfeasible;
  }
  if (!out.feasibility.symmetric)
    std::cerr << "warning: asymmetric coefficients; coherence-length domains only "
                 "approximate symmetric magnitudes\n";

  write_domain_file(dir / "domains.txt", out.synthesis.domains, setup.target.dk0);
  write_amplitude_trace_csv(dir / "amplitude_trace.csv", out.synthesis.trace);
  write_pmf_csv(dir / "pmf.csv", out.dk_grid, out.pmf);

  json bias;
  bias["feasibility"] = {{"feasible", out.feasibility.feasible},
                         {"slack", out.feasibility.slack},
                         {"bound", out.feasibility.bound},
                         {"coefficient_sum", out.feasibility.coefficient_sum},
                         {"symmetric", out.feasibility.symmetric}};
  bias["domain_count"] = out.synthesis.domains.signs.size();
  bias["domain_width_m"] = out.synthesis.domains.width;
  bias["effective_length_m"] = out.synthesis.domains.effective_length();
  bias["requested_length_m"] = out.synthesis.requested_length;
  bias["final_tracking_error"] = out.synthesis.trace.final_error;
  bias["peaks"] = json::array();
  for (const BiasPeak& p : out.bias.peaks)
    bias["peaks"].push_back({{"m", p.m},
                             {"dk_radpm", p.dk},
                             {"target", p.target_height},
                             {"realized", p.realized_height},
                             {"ratio", p.ratio}});
  bias["asymmetry"] = json::array();
  for (const BiasPair& p : out.bias.asymmetry)
    bias["asymmetry"].push_back({{"m", p.m},
                                 {"measured", p.measured_asymmetry},
                                 {"predicted", p.predicted_asymmetry}});
  write_text_file(dir / "bias_report.json", bias.dump(2) + "\n");

  std::cout << "designed " << out.synthesis.domains.signs.size() << " domains of width "
            << fmt_double(out.synthesis.domains.width) << " m (tracking error "
            << fmt_double(out.synthesis.trace.final_error) << ", slack "
            << fmt_double(out.feasibility.slack) << ")\n";
  return kExitOk;
}

int cmd_pmf(const GlobalOptions& opts, const std::string& domain_path) {
  const ResolvedSetup setup = load_setup(opts);
  const fs::path dir = ensure_out_dir(setup);
  const fs::path source = domain_path.empty() ? dir / "domains.txt" : fs::path(domain_path);
  if (!fs::exists(source)) {
    std::cerr << "domain file not found: " << source << "\n";
    return kExitBadInput;
  }
  const DomainFile file = read_domain_file(source);
  std::vector<double> dk_grid;
  if (setup.has_target()) {
    dk_grid = make_default_dk_grid(setup.target);
  } else {
    // no target section: sample around the domain file's own mismatch
    const double dk0 = file.dk0;
    const double span = 0.05 * std::abs(dk0);
    for (long i = -2000; i <= 2000; ++i)
      dk_grid.push_back(dk0 + span * static_cast<double>(i) / 2000.0);
  }
  const std::vector<complexd> raw = pmf_coherent_sum(file.domains, dk_grid, opts.threads);
  write_pmf_csv(dir / "pmf.csv", dk_grid, raw);
  const double diff = group_slowness(setup.dispersion, Wave::Signal) -
                      group_slowness(setup.dispersion, Wave::Idler);
  const double norm = pmf_band_norm(raw, dk_grid[1] - dk_grid[0], diff);
  std::vector<complexd> phi(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) phi[i] = raw[i] / norm;
  write_pmf_csv(dir / "pmf_normalized.csv", dk_grid, phi);
  write_config_echo(setup, dir);
  std::cout << "evaluated " << dk_grid.size() << " PMF samples (band norm "
            << fmt_double(norm) << ")\n";
  return kExitOk;
}

int cmd_jsa(const GlobalOptions& opts, const std::string& domain_path, bool analytic_pmf) {
  const ResolvedSetup setup = load_setup(opts);
  const fs::path dir = ensure_out_dir(setup);
  write_config_echo(setup, dir);

  JsaGrid jsa;
  if (analytic_pmf) {
    jsa = build_jsa_from_target(setup, opts.threads);
  } else {
    const fs::path source = domain_path.empty() ? dir / "domains.txt" : fs::path(domain_path);
    if (!fs::exists(source)) {
      std::cerr << "domain file not found: " << source << "\n";
      return kExitBadInput;
    }
    jsa = build_jsa_from_domains(setup, read_domain_file(source).domains, opts.threads);
  }

  write_jsa_container(dir / "jsa.qpmjsa", jsa, provenance(setup, "jsa").dump());
  if (jsa.values.rows() <= setup.config.output.csv_grid_limit &&
      jsa.values.cols() <= setup.config.output.csv_grid_limit)
    write_jsa_csv(dir / "jsa.csv", jsa);
  if (setup.config.output.heatmap) write_jsa_heatmap_svg(dir / "jsa.svg", jsa);

  const std::vector<JsaPeak> peaks = find_peaks(jsa);
  json report;
  report["count"] = peaks.size();
  report["transmitted_fraction"] = jsa.transmitted_fraction;
  report["peaks"] = json::array();
  const double half_spacing = 0.5 * setup.geometry.delta_omega;
  for (const JsaPeak& p : peaks)
    report["peaks"].push_back(
        {{"omega_s_radps", p.omega_s},
         {"omega_i_radps", p.omega_i},
         {"magnitude", p.magnitude},
         {"bin_s", bin_label_of(p.omega_s, jsa.signal.value((jsa.signal.count - 1) / 2),
                                half_spacing)},
         {"bin_i", bin_label_of(p.omega_i, jsa.idler.value((jsa.idler.count - 1) / 2),
                                half_spacing)}});
  write_text_file(dir / "peaks.json", report.dump(2) + "\n");
  std::cout << peaks.size() << " peaks reported\n";
  return kExitOk;
}

int cmd_modes(const GlobalOptions& opts, const std::string& jsa_path) {
  const ResolvedSetup setup = load_setup(opts);
  const fs::path dir = ensure_out_dir(setup);
  const fs::path source = jsa_path.empty() ? dir / "jsa.qpmjsa" : fs::path(jsa_path);
  if (!fs::exists(source)) {
    std::cerr << "JSA container not found: " << source << "\n";
    return kExitBadInput;
  }
  const JsaFile file = read_jsa_container(source);
  if (file.jsa.norm != NormFlag::Unit) {
    std::cerr << "JSA container is not unit-normalized\n";
    return kExitBadInput;
  }

  const SqueezeMatrix gamma = extract_squeeze_matrix(
      file.jsa, signal_basis(setup), idler_basis(setup), setup.config.state.gamma_scale);
  if (!gamma.basis_spans_jsa)
    std::cerr << "warning: basis does not span JSA (residual "
              << fmt_double(gamma.unaccounted) << ")\n";
  write_squeeze_matrix(dir / "gamma.csv", gamma, provenance(setup, "modes").dump());

  const ModeCount count = count_modes(gamma, setup.config.modes.threshold_rel);
  const auto blocks = block_decompose(gamma, setup.config.modes.threshold_rel);
  const std::vector<double> spectrum = singular_spectrum(file.jsa);

  json summary;
  summary["distinct_pairs"] = count.distinct_pairs;
  summary["single_mode_terms"] = count.single_mode_terms;
  summary["two_mode_terms"] = count.two_mode_terms;
  summary["blocks"] = blocks;
  summary["residual"] = gamma.unaccounted;
  summary["basis_spans_jsa"] = gamma.basis_spans_jsa;
  summary["asymmetry_residual"] = gamma.asymmetry_residual;
  summary["schmidt_number"] = schmidt_number(spectrum);
  summary["singular_values"] = std::vector<double>(
      spectrum.begin(), spectrum.begin() + std::min<std::size_t>(spectrum.size(), 32));
  write_text_file(dir / "modes_summary.json", summary.dump(2) + "\n");

  std::cout << count.distinct_pairs << " distinct pairs (" << count.single_mode_terms
            << " single-mode + " << count.two_mode_terms << " two-mode), "
            << blocks.size() << " blocks, Schmidt number "
            << fmt_double(schmidt_number(spectrum)) << "\n";
  return kExitOk;
}

int cmd_state(const GlobalOptions& opts, const std::string& gamma_path) {
  const ResolvedSetup setup = load_setup(opts);
  const fs::path dir = ensure_out_dir(setup);
  const fs::path source = gamma_path.empty() ? dir / "gamma.csv" : fs::path(gamma_path);
  if (!fs::exists(source)) {
    std::cerr << "squeeze matrix not found: " << source << "\n";
    return kExitBadInput;
  }
  SqueezeMatrix gamma;
  try {
    gamma = read_squeeze_matrix_csv(source, setup.config.state.gamma_scale);
  } catch (const std::exception& e) {
    std::cerr << "invalid squeeze matrix: " << e.what() << "\n";
    return kExitBadMatrix;
  }

  const bool cross = setup.config.state.pairing == "cross";
  CovarianceState state;
  try {
    state = covariance_from_squeeze(gamma, cross ? SqueezePairing::CrossPolarized
                                                 : SqueezePairing::SinglePolarization);
    if (setup.config.state.eliminate_polarization) {
      if (!cross) {
        std::cerr << "eliminate_polarization needs state.pairing = \"cross\"\n";
        return kExitBadMatrix;
      }
      state = eliminate_polarization(state);
    }
  } catch (const std::exception& e) {
    std::cerr << "invalid squeeze matrix: " << e.what() << "\n";
    return kExitBadMatrix;
  }

  write_covariance_csv(dir / "covariance.csv", state);
  write_registry_json(dir / "registry.json", state);

  std::ostringstream variances;
  variances << "quantity,value\n";
  const auto m = static_cast<long>(state.mode_count());
  for (long k = 0; k < m; ++k) {
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(2 * m), dp = Eigen::VectorXd::Zero(2 * m);
    dx(2 * k) = 1.0;
    dp(2 * k + 1) = 1.0;
    const std::string tag = state.modes[static_cast<std::size_t>(k)].to_string();
    variances << "var_x_" << tag << ',' << fmt_double(quadrature_variance(state, dx)) << '\n';
    variances << "var_p_" << tag << ',' << fmt_double(quadrature_variance(state, dp)) << '\n';
  }
  write_text_file(dir / "variances.csv", variances.str());

  if (setup.config.state.thss_enabled) {
    const auto table = thss_scan(setup.config.state.thss_b11, setup.config.state.thss_b12,
                                 setup.config.state.thss_b22);
    write_thss_csv(dir / "thss.csv", table);
  }

  std::cout << state.mode_count() << " output modes, purity det(2V) = "
            << fmt_double(purity_determinant(state)) << ", min uncertainty eigenvalue = "
            << fmt_double(min_uncertainty_eigenvalue(state)) << "\n";
  return kExitOk;
}

int cmd_report(const GlobalOptions& opts) {
  const fs::path dir = opts.out_dir.empty() ? fs::path("out") : fs::path(opts.out_dir);
  json report;
  const auto merge = [&](const char* name, const fs::path& path) {
    if (fs::exists(path)) report[name] = json::parse(read_text_file(path));
  };
  merge("design", dir / "bias_report.json");
  merge("jsa", dir / "peaks.json");
  merge("modes", dir / "modes_summary.json");
  if (report.empty()) {
    std::cerr << "no artifacts found under " << dir << "\n";
    return kExitBadInput;
  }
  write_text_file(dir / "report.json", report.dump(2) + "\n");
  if (report.contains("design"))
    std::cout << "design: " << report["design"]["domain_count"] << " domains, slack "
              << report["design"]["feasibility"]["slack"] << "\n";
  if (report.contains("jsa"))
    std::cout << "jsa: " << report["jsa"]["count"] << " peaks\n";
  if (report.contains("modes"))
    std::cout << "modes: " << report["modes"]["distinct_pairs"] << " distinct pairs in "
              << report["modes"]["blocks"].size() << " blocks\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"custom-poled crystal designer and frequency-bin squeezed-state simulator"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "config file (sectioned text or JSON)");
  app.add_option("--out-dir", opts.out_dir, "output directory (overrides [output] dir)");
  app.add_option("--threads", opts.threads, "worker threads (0 = auto)");
  app.add_option("--grid-size", opts.grid_size, "JSA grid samples per axis (overrides [grid] n)");

  std::string domain_path, jsa_path, gamma_path;
  bool analytic_pmf = false;

  CLI::App* design = app.add_subcommand("design", "synthesize a domain configuration");
  CLI::App* pmf = app.add_subcommand("pmf", "evaluate the PMF of a domain file");
  pmf->add_option("--domains", domain_path, "domain file (default <out>/domains.txt)");
  CLI::App* jsa = app.add_subcommand("jsa", "assemble the joint spectral amplitude");
  jsa->add_option("--domains", domain_path, "domain file (default <out>/domains.txt)");
  jsa->add_flag("--analytic-pmf", analytic_pmf, "use the analytic target PMF instead");
  CLI::App* modes = app.add_subcommand("modes", "extract the squeeze matrix from a JSA");
  modes->add_option("--jsa", jsa_path, "JSA container (default <out>/jsa.qpmjsa)");
  CLI::App* state = app.add_subcommand("state", "build covariance matrices from a squeeze matrix");
  state->add_option("--gamma", gamma_path, "squeeze matrix CSV (default <out>/gamma.csv)");
  CLI::App* report = app.add_subcommand("report", "summarize the artifacts in an output directory");

  // global flags may appear after the subcommand name
  for (CLI::App* sub : {design, pmf, jsa, modes, state, report}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(design)) return cmd_design(opts);
    if (app.got_subcommand(pmf)) return cmd_pmf(opts, domain_path);
    if (app.got_subcommand(jsa)) return cmd_jsa(opts, domain_path, analytic_pmf);
    if (app.got_subcommand(modes)) return cmd_modes(opts, jsa_path);
    if (app.got_subcommand(state)) return cmd_state(opts, gamma_path);
    if (app.got_subcommand(report)) return cmd_report(opts);
  } catch (const InfeasibleTargetError& e) {
    std::cerr << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitOk;
}
