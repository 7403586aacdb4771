#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qpmforge/io.hpp"
#include "qpmforge/state.hpp"
#include "test_helpers.hpp"

using namespace qpmforge;
using qpmforge::testing::fresh_tmp_dir;

namespace {

const std::filesystem::path kCli = QPMFORGE_CLI_PATH;
const std::filesystem::path kConfigs = QPMFORGE_CONFIG_DIR;

int run_cli(const std::string& args) {
  const std::string command = kCli.string() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& path) { return read_text_file(path); }

int count_signs(const std::filesystem::path& domain_file) {
  int count = 0;
  std::istringstream in(slurp(domain_file));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    for (char c : line)
      if (c == '+' || c == '-') ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("design command") {
  const auto dir = fresh_tmp_dir("cli_design");

  SUBCASE("fig1 produces the 1073-domain crystal deterministically") {
    REQUIRE(run_cli("design --config " + (kConfigs / "fig1.toml").string() + " --out-dir " +
                    (dir / "a").string()) == 0);
    CHECK(count_signs(dir / "a" / "domains.txt") == 1073);

    REQUIRE(run_cli("design --config " + (kConfigs / "fig1.toml").string() + " --out-dir " +
                    (dir / "b").string()) == 0);
    CHECK(slurp(dir / "a" / "domains.txt") == slurp(dir / "b" / "domains.txt"));
    CHECK(slurp(dir / "a" / "pmf.csv") == slurp(dir / "b" / "pmf.csv"));
    CHECK(slurp(dir / "a" / "amplitude_trace.csv") == slurp(dir / "b" / "amplitude_trace.csv"));
    CHECK(slurp(dir / "a" / "bias_report.json") == slurp(dir / "b" / "bias_report.json"));
  }

  SUBCASE("re-feeding the resolved config echo reproduces the outputs") {
    REQUIRE(run_cli("design --config " + (kConfigs / "fig1.toml").string() + " --out-dir " +
                    (dir / "first").string()) == 0);
    REQUIRE(run_cli("design --config " + (dir / "first" / "resolved_config.json").string() +
                    " --out-dir " + (dir / "second").string()) == 0);
    CHECK(slurp(dir / "first" / "domains.txt") == slurp(dir / "second" / "domains.txt"));
    CHECK(slurp(dir / "first" / "pmf.csv") == slurp(dir / "second" / "pmf.csv"));
  }

  SUBCASE("an infeasible target exits with code 2") {
    // a beyond-the-bound variant of fig1
    std::string text = slurp(kConfigs / "fig1.toml");
    const std::string needle = "c = [";
    const auto pos = text.find(needle);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, needle.size(), "c = [0.2, 0.2, 0.2, 0.2, ");
    write_text_file(dir / "infeasible.toml", text);
    CHECK(run_cli("design --config " + (dir / "infeasible.toml").string() + " --out-dir " +
                  (dir / "inf").string()) == 2);
  }

  SUBCASE("missing config exits with code 3") {
    CHECK(run_cli("design --config " + (dir / "nope.toml").string()) == 3);
  }
}

TEST_CASE("jsa and modes commands") {
  const auto dir = fresh_tmp_dir("cli_jsa");
  REQUIRE(run_cli("design --config " + (kConfigs / "single_peak.toml").string() + " --out-dir " +
                  dir.string()) == 0);

  SUBCASE("single separable peak") {
    REQUIRE(run_cli("jsa --config " + (kConfigs / "single_peak.toml").string() + " --out-dir " +
                    dir.string()) == 0);
    CHECK(std::filesystem::exists(dir / "jsa.qpmjsa"));
    CHECK(std::filesystem::exists(dir / "jsa.csv"));  // 256 <= csv limit
    CHECK(std::filesystem::exists(dir / "jsa.svg"));
    const std::string peaks = slurp(dir / "peaks.json");
    CHECK(peaks.find("\"count\": 1") != std::string::npos);

    REQUIRE(run_cli("modes --config " + (kConfigs / "single_peak.toml").string() + " --out-dir " +
                    dir.string()) == 0);
    const std::string summary = slurp(dir / "modes_summary.json");
    CHECK(summary.find("\"distinct_pairs\": 1") != std::string::npos);
    CHECK(summary.find("\"two_mode_terms\": 0") != std::string::npos);
  }

  SUBCASE("missing domain file exits with code 3") {
    CHECK(run_cli("jsa --config " + (kConfigs / "single_peak.toml").string() + " --out-dir " +
                  dir.string() + " --domains " + (dir / "absent.txt").string()) == 3);
  }

  SUBCASE("grid size override is honored") {
    REQUIRE(run_cli("jsa --config " + (kConfigs / "single_peak.toml").string() + " --out-dir " +
                    dir.string() + " --grid-size 128") == 0);
    const JsaFile file = read_jsa_container(dir / "jsa.qpmjsa");
    CHECK(file.jsa.signal.count == 128);
  }
}

TEST_CASE("state command") {
  const auto dir = fresh_tmp_dir("cli_state");

  SUBCASE("zero squeeze matrix gives the vacuum table") {
    SqueezeMatrix zero;
    zero.labels = {0, 1};
    zero.values = Eigen::MatrixXcd::Zero(2, 2);
    write_squeeze_matrix(dir / "gamma.csv", zero);
    // reuse the fig3 config for dispersion/state sections
    REQUIRE(run_cli("state --config " + (kConfigs / "fig3.toml").string() + " --out-dir " +
                    dir.string() + " --gamma " + (dir / "gamma.csv").string()) == 0);
    std::ifstream in(dir / "variances.csv");
    std::string line;
    std::getline(in, line);  // header
    int rows = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ++rows;
      const double value = std::stod(line.substr(line.find(',') + 1));
      CHECK(value == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK(rows == 4);
  }

  SUBCASE("an asymmetric matrix exits with code 4") {
    write_text_file(dir / "bad.csv", "n,m,re_gamma,im_gamma\n0,1,0.3,0\n1,0,0.1,0\n");
    CHECK(run_cli("state --config " + (kConfigs / "fig3.toml").string() + " --out-dir " +
                  dir.string() + " --gamma " + (dir / "bad.csv").string()) == 4);
  }

  SUBCASE("missing matrix exits with code 3") {
    CHECK(run_cli("state --config " + (kConfigs / "fig3.toml").string() + " --out-dir " +
                  dir.string() + " --gamma " + (dir / "absent.csv").string()) == 3);
  }

  SUBCASE("cross-polarized pipeline emits a two-block covariance") {
    SqueezeMatrix gamma;
    gamma.labels = {-1, 0, 1};
    gamma.values = qpmforge::testing::random_symmetric(3, 7u, 0.25);
    write_squeeze_matrix(dir / "g15.csv", gamma);

    std::string cfg = slurp(kConfigs / "fig3.toml");
    cfg += "\n[state]\npairing = \"cross\"\neliminate_polarization = true\n";
    write_text_file(dir / "cross.toml", cfg);
    REQUIRE(run_cli("state --config " + (dir / "cross.toml").string() + " --out-dir " +
                    dir.string() + " --gamma " + (dir / "g15.csv").string()) == 0);

    // parse the covariance and confirm path-1/path-2 decoupling
    std::vector<std::vector<double>> rows;
    std::ifstream in(dir / "covariance.csv");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string tok;
      while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
      rows.push_back(row);
    }
    REQUIRE(rows.size() == 12);  // 6 modes after elimination
    double cross_max = 0.0;
    for (int a = 0; a < 6; ++a)
      for (int b = 6; b < 12; ++b)
        cross_max = std::max(cross_max, std::abs(rows[static_cast<std::size_t>(a)]
                                                     [static_cast<std::size_t>(b)]));
    CHECK(cross_max < 1e-9);
    const std::string registry = slurp(dir / "registry.json");
    CHECK(registry.find("\"path\": 1") != std::string::npos);
    CHECK(registry.find("\"path\": 2") != std::string::npos);
  }

  SUBCASE("thss scan writes the sweep table") {
    SqueezeMatrix zero;
    zero.labels = {0, 1};
    zero.values = Eigen::MatrixXcd::Zero(2, 2);
    write_squeeze_matrix(dir / "gz.csv", zero);
    std::string cfg = slurp(kConfigs / "fig3.toml");
    cfg += "\n[state]\nthss_enabled = true\nthss_b11 = [0.0, 0.5, 3]\n"
           "thss_b12 = [0.0, 0.5, 3]\nthss_b22 = [0.0, 0.0, 1]\n";
    write_text_file(dir / "thss.toml", cfg);
    REQUIRE(run_cli("state --config " + (dir / "thss.toml").string() + " --out-dir " +
                    dir.string() + " --gamma " + (dir / "gz.csv").string()) == 0);
    std::ifstream in(dir / "thss.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "b11,b12,b22,var_x1,var_xminus,var_pplus,ptse");
    int count = 0;
    while (std::getline(in, header))
      if (!header.empty()) ++count;
    CHECK(count == 9);
  }
}

TEST_CASE("figure pipelines reproduce the reference mode counts") {
  const auto dir = fresh_tmp_dir("cli_figures");

  SUBCASE("fig2: 25 peaks, 15 distinct pairs") {
    REQUIRE(run_cli("design --config " + (kConfigs / "fig1.toml").string() + " --out-dir " +
                    (dir / "f1").string()) == 0);
    REQUIRE(run_cli("jsa --config " + (kConfigs / "fig2.toml").string() + " --out-dir " +
                    (dir / "f2").string() + " --domains " + (dir / "f1" / "domains.txt").string()) ==
            0);
    const std::string peaks = slurp(dir / "f2" / "peaks.json");
    CHECK(peaks.find("\"count\": 25") != std::string::npos);
    REQUIRE(run_cli("modes --config " + (kConfigs / "fig2.toml").string() + " --out-dir " +
                    (dir / "f2").string()) == 0);
    const std::string summary = slurp(dir / "f2" / "modes_summary.json");
    CHECK(summary.find("\"distinct_pairs\": 15") != std::string::npos);
    CHECK(summary.find("\"single_mode_terms\": 5") != std::string::npos);
    CHECK(summary.find("\"two_mode_terms\": 10") != std::string::npos);
  }

  SUBCASE("fig3: filter leaves the 4 corner peaks and the {-1,+1} block") {
    REQUIRE(run_cli("design --config " + (kConfigs / "fig3.toml").string() + " --out-dir " +
                    (dir / "f3").string()) == 0);
    REQUIRE(run_cli("jsa --config " + (kConfigs / "fig3.toml").string() + " --out-dir " +
                    (dir / "f3").string()) == 0);
    const std::string peaks = slurp(dir / "f3" / "peaks.json");
    CHECK(peaks.find("\"count\": 4") != std::string::npos);
    REQUIRE(run_cli("modes --config " + (kConfigs / "fig3.toml").string() + " --out-dir " +
                    (dir / "f3").string()) == 0);
    const std::string summary = slurp(dir / "f3" / "modes_summary.json");
    CHECK(summary.find("\"distinct_pairs\": 3") != std::string::npos);
    CHECK(summary.find("[\n      -1,\n      1\n    ]") != std::string::npos);
  }
}

TEST_CASE("report command stitches the artifacts") {
  const auto dir = fresh_tmp_dir("cli_report");
  REQUIRE(run_cli("design --config " + (kConfigs / "single_peak.toml").string() + " --out-dir " +
                  dir.string()) == 0);
  REQUIRE(run_cli("jsa --config " + (kConfigs / "single_peak.toml").string() + " --out-dir " +
                  dir.string()) == 0);
  CHECK(run_cli("report --out-dir " + dir.string()) == 0);
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(run_cli("report --out-dir " + (dir / "empty").string()) == 3);
}
