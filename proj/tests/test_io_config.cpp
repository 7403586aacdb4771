#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "qpmforge/config.hpp"
#include "qpmforge/io.hpp"
#include "qpmforge/pipeline.hpp"
#include "test_helpers.hpp"

using namespace qpmforge;
using qpmforge::testing::fresh_tmp_dir;

TEST_CASE("domain file round trip") {
  const auto dir = fresh_tmp_dir("io_domains");
  DomainConfiguration domains;
  domains.width = 1.863e-5;
  for (int i = 0; i < 205; ++i) domains.signs.push_back((i * i + i / 3) % 3 == 0 ? 1 : -1);
  domains.z_start = -0.5 * domains.effective_length();

  write_domain_file(dir / "d.txt", domains, 168630.8);
  const DomainFile file = read_domain_file(dir / "d.txt");
  CHECK(file.domains.signs == domains.signs);
  CHECK(file.domains.width == domains.width);
  CHECK(file.dk0 == 168630.8);
  CHECK(file.domains.z_start == doctest::Approx(domains.z_start).epsilon(1e-15));

  // header format and 80-per-line body
  std::ifstream in(dir / "d.txt");
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# L_m=", 0) == 0);
  std::getline(in, line);
  CHECK(line.rfind("# w_m=", 0) == 0);
  std::getline(in, line);
  CHECK(line.rfind("# dk0_radpm=", 0) == 0);
  std::getline(in, line);
  CHECK(line.size() == 80);
  for (char c : line) CHECK((c == '+' || c == '-'));
}

TEST_CASE("JSA container round trip is bit exact") {
  const auto dir = fresh_tmp_dir("io_jsa");
  JsaGrid jsa;
  jsa.signal = {1.0e15, 2.0e10, 17};
  jsa.idler = {1.1e15, 2.0e10, 17};
  jsa.values.resize(17, 17);
  for (long i = 0; i < 17; ++i)
    for (long j = 0; j < 17; ++j)
      jsa.values(i, j) = complexd{std::sin(0.1 * i * j), std::cos(0.3 * i - j)};
  jsa.norm = NormFlag::Unit;
  jsa.raw_l2 = 0.123456789;

  write_jsa_container(dir / "a.qpmjsa", jsa, R"({"note":"test"})");
  const JsaFile file = read_jsa_container(dir / "a.qpmjsa");
  CHECK(file.jsa.signal.start == jsa.signal.start);
  CHECK(file.jsa.signal.step == jsa.signal.step);
  CHECK(file.jsa.signal.count == jsa.signal.count);
  CHECK(file.jsa.norm == NormFlag::Unit);
  CHECK(file.jsa.raw_l2 == jsa.raw_l2);
  CHECK(file.provenance_json.find("note") != std::string::npos);
  CHECK((file.jsa.values - jsa.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("squeeze matrix CSV round trip") {
  const auto dir = fresh_tmp_dir("io_gamma");
  SqueezeMatrix gamma;
  gamma.labels = {-1, 0, 2};
  gamma.values = qpmforge::testing::random_symmetric(3, 42u);
  gamma.scale = 1.5;
  write_squeeze_matrix(dir / "g.csv", gamma);
  CHECK(std::filesystem::exists(dir / "g.csv.meta.json"));

  const SqueezeMatrix loaded = read_squeeze_matrix_csv(dir / "g.csv", 1.5);
  CHECK(loaded.labels == gamma.labels);
  CHECK(loaded.scale == 1.5);
  CHECK((loaded.values - gamma.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("config parsing") {
  SUBCASE("sectioned text with comments and arrays") {
    const std::string text = R"(
# run card
[dispersion]
kind = "linear"          # first-order expansion
dk0_radpm = 168630.8
ks_prime_spm = 6.2e-9
ki_prime_spm = 5.9e-9
pump_wavelength_nm = 791.0

[target_pmf]
c = [0.01, 0.02, 0.01]
sigma_k_per_m = 125.0
L_m = 0.02

[state]
thss_b12 = [0.0, 0.5, 11]
)";
    const ProjectConfig cfg = parse_config_text(text, false);
    CHECK(cfg.dispersion.kind == "linear");
    CHECK(*cfg.dispersion.dk0_radpm == 168630.8);
    CHECK(cfg.target_pmf.c == std::vector<double>{0.01, 0.02, 0.01});
    CHECK(cfg.state.thss_b12.count == 11);
    CHECK(cfg.state.thss_b12.stop == 0.5);
    CHECK(cfg.grid.n == 1024);  // default

    // resolved echo is itself a valid config and a fixed point
    const std::string echo = resolved_config_json(cfg);
    const ProjectConfig again = parse_config_text(echo, true);
    CHECK(resolved_config_json(again) == echo);
  }

  SUBCASE("unknown keys and sections are rejected") {
    CHECK_THROWS_WITH_AS(parse_config_text("[dispersion]\nkindd = \"linear\"\n", false),
                         doctest::Contains("unknown key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("[dissipation]\nkind = \"linear\"\n", false),
                         doctest::Contains("unknown section"), std::invalid_argument);
  }

  SUBCASE("malformed lines carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_config_text("[dispersion]\nkind \"linear\"\n", false),
                         doctest::Contains("line 2"), std::invalid_argument);
  }

  SUBCASE("JSON input is accepted") {
    const std::string json_text = R"({"dispersion": {"kind": "linear",
      "dk0_radpm": 1.0e5, "ks_prime_spm": 6.2e-9, "ki_prime_spm": 5.9e-9,
      "pump_wavelength_nm": 791.0}})";
    const ProjectConfig cfg = parse_config_text(json_text, true);
    CHECK(*cfg.dispersion.dk0_radpm == 1.0e5);
  }
}

TEST_CASE("dispersion resolution") {
  SUBCASE("linear model defaults the pump slowness to the GVM mean") {
    ProjectConfig::Dispersion d;
    d.kind = "linear";
    d.dk0_radpm = 1.2e5;
    d.ks_prime_spm = 6.2e-9;
    d.ki_prime_spm = 5.9e-9;
    d.pump_wavelength_nm = 791.0;
    const DispersionModel model = resolve_dispersion(d);
    const auto& lin = std::get<LinearExpansion>(model);
    CHECK(lin.kp_prime == doctest::Approx(6.05e-9).epsilon(1e-12));
    CHECK(lin.omega_s == doctest::Approx(0.5 * lin.omega_p).epsilon(1e-14));
  }

  SUBCASE("sellmeier model auto-centers on the GVM point") {
    ProjectConfig::Dispersion d;
    d.kind = "sellmeier";
    d.gvm_search_min_nm = 1400.0;
    d.gvm_search_max_nm = 1800.0;
    const DispersionModel model = resolve_dispersion(d);
    const auto& sm = std::get<SellmeierModel>(model);
    CHECK(sm.omega_p == doctest::Approx(2.0 * sm.omega_s).epsilon(1e-12));
    CHECK(delta_k0(model) != 0.0);
  }

  SUBCASE("external sellmeier sets load from QPMFORGE_SELLMEIER_DIR") {
    const auto dir = fresh_tmp_dir("sellmeier_sets");
    write_text_file(dir / "toy_glass.json", R"({
      "name": "toy_glass",
      "provenance": "test fixture",
      "lambda_min_um": 0.3,
      "lambda_max_um": 3.0,
      "axes": {"y": {"constant": 2.25, "poles": [[0.01, 0.02]]},
               "z": {"constant": 2.56, "poles": [[0.01, 0.02]]}}
    })");
    setenv("QPMFORGE_SELLMEIER_DIR", dir.c_str(), 1);
    const SellmeierSet set = find_sellmeier_set("toy_glass");
    CHECK(set.axes.size() == 2);
    CHECK(set.axis("y").index(1.0) ==
          doctest::Approx(std::sqrt(2.25 + 0.01 / (1.0 - 0.02))).epsilon(1e-12));
    unsetenv("QPMFORGE_SELLMEIER_DIR");
    CHECK_THROWS_WITH_AS(find_sellmeier_set("toy_glass"), doctest::Contains("unknown"),
                         std::invalid_argument);
  }
}

TEST_CASE("resolved setup wires geometry, pump, and grid together") {
  const auto config_dir = std::filesystem::path(QPMFORGE_CONFIG_DIR);
  const ProjectConfig cfg = load_config_file(config_dir / "fig2.toml");
  const ResolvedSetup setup = resolve_setup(cfg);
  CHECK(setup.has_target());
  CHECK(setup.has_pump());
  CHECK(setup.max_bin == 4);
  CHECK(radps_to_thz(setup.geometry.sigma) == doctest::Approx(0.127).epsilon(1e-9));
  CHECK(setup.pump.sigma == setup.geometry.sigma);
  CHECK(setup.domain_width == doctest::Approx(1.863e-5).epsilon(1e-9));
  CHECK(setup.grid.n == 1024);
  // auto span covers the outermost bin plus margin
  CHECK(setup.grid.half_span == doctest::Approx((4 * 12 + 10) * setup.geometry.sigma).epsilon(1e-12));
}

TEST_CASE("thss table writer") {
  const auto dir = fresh_tmp_dir("io_thss");
  const auto table = thss_scan({0, 0.4, 3}, {0.2, 0.2, 1}, {0, 0, 1});
  write_thss_csv(dir / "t.csv", table);
  std::ifstream in(dir / "t.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "b11,b12,b22,var_x1,var_xminus,var_pplus,ptse");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
}
