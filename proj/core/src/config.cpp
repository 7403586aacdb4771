#include "qpmforge/config.hpp"

#include <cctype>
#include <cstdlib>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qpmforge/io.hpp"

namespace qpmforge {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    else if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

json parse_scalar(const std::string& token, int line_no) {
  const std::string t = trim(token);
  if (t.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty value");
  if (t == "true") return true;
  if (t == "false") return false;
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"')
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unterminated string");
    return t.substr(1, t.size() - 2);
  }
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0')
    throw std::invalid_argument("config line " + std::to_string(line_no) + ": bad value '" + t + "'");
  return v;
}

json parse_value(const std::string& token, int line_no) {
  const std::string t = trim(token);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']')
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unterminated array");
    json arr = json::array();
    std::string body = t.substr(1, t.size() - 2);
    std::size_t pos = 0;
    while (pos < body.size()) {
      std::size_t comma = body.find(',', pos);
      if (comma == std::string::npos) comma = body.size();
      const std::string item = trim(body.substr(pos, comma - pos));
      if (!item.empty()) arr.push_back(parse_scalar(item, line_no));
      pos = comma + 1;
    }
    return arr;
  }
  return parse_scalar(t, line_no);
}

// Sectioned key-value text -> the same JSON object shape the JSON input uses.
json parse_toml_subset(const std::string& text) {
  json root = json::object();
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    ++line_no;
    std::string line = trim(strip_comment(text.substr(pos, nl - pos)));
    pos = nl + 1;
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty section name");
      if (!root.contains(section)) root[section] = json::object();
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || section.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": keys must live inside a [section]");
    root[section][key] = parse_value(line.substr(eq + 1), line_no);
  }
  return root;
}

struct SectionReader {
  const json& data;
  std::string section;
  std::set<std::string> seen;

  bool has(const std::string& key) {
    seen.insert(key);
    return data.contains(key);
  }
  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = data.at(key).get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config: bad type for " + section + "." + key);
    }
  }
  template <typename T>
  void get(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    T value{};
    get(key, value);
    out = value;
  }
  void get_range(const std::string& key, ScanRange& out) {
    if (!has(key)) return;
    const json& arr = data.at(key);
    if (!arr.is_array() || arr.size() != 3)
      throw std::invalid_argument("config: " + section + "." + key +
                                  " must be [start, stop, count]");
    out.start = arr[0].get<double>();
    out.stop = arr[1].get<double>();
    out.count = arr[2].get<int>();
  }
  void finish() const {
    for (const auto& [key, _] : data.items())
      if (!seen.contains(key))
        throw std::invalid_argument("config: unknown key " + section + "." + key);
  }
};

ProjectConfig from_json(const json& root) {
  static const std::set<std::string> known_sections = {
      "dispersion", "target_pmf", "design", "pump", "grid", "filter", "modes", "state", "output"};
  for (const auto& [key, _] : root.items())
    if (!known_sections.contains(key))
      throw std::invalid_argument("config: unknown section [" + key + "]");

  ProjectConfig cfg;
  if (root.contains("dispersion")) {
    SectionReader r{root["dispersion"], "dispersion", {}};
    r.get("kind", cfg.dispersion.kind);
    r.get("dk0_radpm", cfg.dispersion.dk0_radpm);
    r.get("kp_prime_spm", cfg.dispersion.kp_prime_spm);
    r.get("ks_prime_spm", cfg.dispersion.ks_prime_spm);
    r.get("ki_prime_spm", cfg.dispersion.ki_prime_spm);
    r.get("symmetric_gvm", cfg.dispersion.symmetric_gvm);
    r.get("pump_wavelength_nm", cfg.dispersion.pump_wavelength_nm);
    r.get("omega_p_radps", cfg.dispersion.omega_p_radps);
    r.get("omega_s_radps", cfg.dispersion.omega_s_radps);
    r.get("omega_i_radps", cfg.dispersion.omega_i_radps);
    r.get("sellmeier_set", cfg.dispersion.sellmeier_set);
    r.get("pump_axis", cfg.dispersion.pump_axis);
    r.get("signal_axis", cfg.dispersion.signal_axis);
    r.get("idler_axis", cfg.dispersion.idler_axis);
    r.get("gvm_search_min_nm", cfg.dispersion.gvm_search_min_nm);
    r.get("gvm_search_max_nm", cfg.dispersion.gvm_search_max_nm);
    r.finish();
  }
  if (root.contains("target_pmf")) {
    SectionReader r{root["target_pmf"], "target_pmf", {}};
    r.get("c", cfg.target_pmf.c);
    r.get("sigma_k_per_m", cfg.target_pmf.sigma_k_per_m);
    r.get("spacing_ratio", cfg.target_pmf.spacing_ratio);
    r.get("dk_per_m", cfg.target_pmf.dk_per_m);
    r.get("L_m", cfg.target_pmf.L_m);
    r.finish();
  }
  if (root.contains("design")) {
    SectionReader r{root["design"], "design", {}};
    r.get("domain_width_m", cfg.design.domain_width_m);
    r.get("samples_per_sigma_k", cfg.design.samples_per_sigma_k);
    r.get("dk_span_sigmas", cfg.design.dk_span_sigmas);
    r.finish();
  }
  if (root.contains("pump")) {
    SectionReader r{root["pump"], "pump", {}};
    r.get("a", cfg.pump.a);
    r.get("sigma_thz", cfg.pump.sigma_thz);
    r.get("spacing_ratio", cfg.pump.spacing_ratio);
    r.finish();
  }
  if (root.contains("grid")) {
    SectionReader r{root["grid"], "grid", {}};
    r.get("n", cfg.grid.n);
    r.get("span_sigmas", cfg.grid.span_sigmas);
    r.finish();
  }
  if (root.contains("filter")) {
    SectionReader r{root["filter"], "filter", {}};
    r.get("enabled", cfg.filter.enabled);
    r.get("sigma_f_ratio", cfg.filter.sigma_f_ratio);
    r.get("sigma_f_thz", cfg.filter.sigma_f_thz);
    r.get("center_s_radps", cfg.filter.center_s_radps);
    r.get("center_i_radps", cfg.filter.center_i_radps);
    r.finish();
  }
  if (root.contains("modes")) {
    SectionReader r{root["modes"], "modes", {}};
    r.get("threshold_rel", cfg.modes.threshold_rel);
    r.get("max_bin", cfg.modes.max_bin);
    r.finish();
  }
  if (root.contains("state")) {
    SectionReader r{root["state"], "state", {}};
    r.get("gamma_scale", cfg.state.gamma_scale);
    r.get("pairing", cfg.state.pairing);
    r.get("eliminate_polarization", cfg.state.eliminate_polarization);
    r.get("thss_enabled", cfg.state.thss_enabled);
    r.get_range("thss_b11", cfg.state.thss_b11);
    r.get_range("thss_b12", cfg.state.thss_b12);
    r.get_range("thss_b22", cfg.state.thss_b22);
    r.finish();
  }
  if (root.contains("output")) {
    SectionReader r{root["output"], "output", {}};
    r.get("dir", cfg.output.dir);
    r.get("heatmap", cfg.output.heatmap);
    r.get("csv_grid_limit", cfg.output.csv_grid_limit);
    r.finish();
  }
  if (cfg.dispersion.kind != "linear" && cfg.dispersion.kind != "sellmeier")
    throw std::invalid_argument("config: dispersion.kind must be 'linear' or 'sellmeier'");
  if (cfg.state.pairing != "single" && cfg.state.pairing != "cross")
    throw std::invalid_argument("config: state.pairing must be 'single' or 'cross'");
  return cfg;
}

}  // namespace

ProjectConfig parse_config_text(const std::string& text, bool is_json) {
  json root;
  if (is_json) {
    try {
      root = json::parse(text);
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }
  } else {
    root = parse_toml_subset(text);
  }
  return from_json(root);
}

ProjectConfig load_config_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const std::string ext = path.extension().string();
  bool is_json = ext == ".json";
  if (!is_json) {
    // content sniff: a JSON config may arrive under any extension
    for (char c : text) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      is_json = c == '{';
      break;
    }
  }
  return parse_config_text(text, is_json);
}

std::string resolved_config_json(const ProjectConfig& cfg) {
  json root;
  json& d = root["dispersion"];
  d["kind"] = cfg.dispersion.kind;
  d["symmetric_gvm"] = cfg.dispersion.symmetric_gvm;
  if (cfg.dispersion.dk0_radpm) d["dk0_radpm"] = *cfg.dispersion.dk0_radpm;
  if (cfg.dispersion.kp_prime_spm) d["kp_prime_spm"] = *cfg.dispersion.kp_prime_spm;
  if (cfg.dispersion.ks_prime_spm) d["ks_prime_spm"] = *cfg.dispersion.ks_prime_spm;
  if (cfg.dispersion.ki_prime_spm) d["ki_prime_spm"] = *cfg.dispersion.ki_prime_spm;
  if (cfg.dispersion.pump_wavelength_nm) d["pump_wavelength_nm"] = *cfg.dispersion.pump_wavelength_nm;
  if (cfg.dispersion.omega_p_radps) d["omega_p_radps"] = *cfg.dispersion.omega_p_radps;
  if (cfg.dispersion.omega_s_radps) d["omega_s_radps"] = *cfg.dispersion.omega_s_radps;
  if (cfg.dispersion.omega_i_radps) d["omega_i_radps"] = *cfg.dispersion.omega_i_radps;
  if (cfg.dispersion.kind == "sellmeier") {
    d["sellmeier_set"] = cfg.dispersion.sellmeier_set;
    d["pump_axis"] = cfg.dispersion.pump_axis;
    d["signal_axis"] = cfg.dispersion.signal_axis;
    d["idler_axis"] = cfg.dispersion.idler_axis;
    d["gvm_search_min_nm"] = cfg.dispersion.gvm_search_min_nm;
    d["gvm_search_max_nm"] = cfg.dispersion.gvm_search_max_nm;
  }
  if (!cfg.target_pmf.c.empty()) {
    json& t = root["target_pmf"];
    t["c"] = cfg.target_pmf.c;
    if (cfg.target_pmf.sigma_k_per_m) t["sigma_k_per_m"] = *cfg.target_pmf.sigma_k_per_m;
    t["spacing_ratio"] = cfg.target_pmf.spacing_ratio;
    if (cfg.target_pmf.dk_per_m) t["dk_per_m"] = *cfg.target_pmf.dk_per_m;
    if (cfg.target_pmf.L_m) t["L_m"] = *cfg.target_pmf.L_m;
  }
  json& de = root["design"];
  de["samples_per_sigma_k"] = cfg.design.samples_per_sigma_k;
  if (cfg.design.domain_width_m) de["domain_width_m"] = *cfg.design.domain_width_m;
  if (cfg.design.dk_span_sigmas) de["dk_span_sigmas"] = *cfg.design.dk_span_sigmas;
  if (!cfg.pump.a.empty()) {
    json& p = root["pump"];
    p["a"] = cfg.pump.a;
    if (cfg.pump.sigma_thz) p["sigma_thz"] = *cfg.pump.sigma_thz;
    if (cfg.pump.spacing_ratio) p["spacing_ratio"] = *cfg.pump.spacing_ratio;
  }
  root["grid"]["n"] = cfg.grid.n;
  if (cfg.grid.span_sigmas) root["grid"]["span_sigmas"] = *cfg.grid.span_sigmas;
  json& f = root["filter"];
  f["enabled"] = cfg.filter.enabled;
  f["sigma_f_ratio"] = cfg.filter.sigma_f_ratio;
  if (cfg.filter.sigma_f_thz) f["sigma_f_thz"] = *cfg.filter.sigma_f_thz;
  if (cfg.filter.center_s_radps) f["center_s_radps"] = *cfg.filter.center_s_radps;
  if (cfg.filter.center_i_radps) f["center_i_radps"] = *cfg.filter.center_i_radps;
  json& mo = root["modes"];
  mo["threshold_rel"] = cfg.modes.threshold_rel;
  if (cfg.modes.max_bin) mo["max_bin"] = *cfg.modes.max_bin;
  json& st = root["state"];
  st["gamma_scale"] = cfg.state.gamma_scale;
  st["pairing"] = cfg.state.pairing;
  st["eliminate_polarization"] = cfg.state.eliminate_polarization;
  st["thss_enabled"] = cfg.state.thss_enabled;
  st["thss_b11"] = {cfg.state.thss_b11.start, cfg.state.thss_b11.stop, cfg.state.thss_b11.count};
  st["thss_b12"] = {cfg.state.thss_b12.start, cfg.state.thss_b12.stop, cfg.state.thss_b12.count};
  st["thss_b22"] = {cfg.state.thss_b22.start, cfg.state.thss_b22.stop, cfg.state.thss_b22.count};
  json& o = root["output"];
  o["dir"] = cfg.output.dir;
  o["heatmap"] = cfg.output.heatmap;
  o["csv_grid_limit"] = cfg.output.csv_grid_limit;
  return root.dump(2) + "\n";
}

SellmeierSet find_sellmeier_set(const std::string& name) {
  if (name == "ktp_kato_takaoka_2002") return ktp_kato_takaoka_2002();
  if (const char* dir = std::getenv("QPMFORGE_SELLMEIER_DIR")) {
    const std::filesystem::path candidate = std::filesystem::path(dir) / (name + ".json");
    if (std::filesystem::exists(candidate)) {
      const json spec = json::parse(read_text_file(candidate));
      SellmeierSet set;
      set.name = spec.value("name", name);
      set.provenance = spec.value("provenance", "external set: " + candidate.string());
      set.temperature_c = spec.value("temperature_c", 25.0);
      set.lambda_min_um = spec.at("lambda_min_um").get<double>();
      set.lambda_max_um = spec.at("lambda_max_um").get<double>();
      for (const auto& [axis, coeffs] : spec.at("axes").items()) {
        SellmeierAxisCoefficients ax;
        ax.constant = coeffs.at("constant").get<double>();
        ax.quadratic = coeffs.value("quadratic", 0.0);
        for (const auto& pole : coeffs.value("poles", json::array()))
          ax.poles.push_back({pole[0].get<double>(), pole[1].get<double>()});
        set.axes[axis] = ax;
      }
      return set;
    }
  }
  throw std::invalid_argument("unknown sellmeier_set '" + name +
                              "' (not built in; no QPMFORGE_SELLMEIER_DIR match)");
}

DispersionModel resolve_dispersion(const ProjectConfig::Dispersion& config) {
  const auto centers_from = [&](double omega_p) {
    double ws = config.omega_s_radps.value_or(0.5 * omega_p);
    double wi = config.omega_i_radps.value_or(omega_p - ws);
    return std::pair{ws, wi};
  };

  if (config.kind == "linear") {
    LinearExpansion lin;
    if (!config.dk0_radpm || !config.ks_prime_spm || !config.ki_prime_spm)
      throw std::invalid_argument(
          "linear dispersion requires dk0_radpm, ks_prime_spm and ki_prime_spm");
    lin.dk0 = *config.dk0_radpm;
    lin.ks_prime = *config.ks_prime_spm;
    lin.ki_prime = *config.ki_prime_spm;
    lin.symmetric_gvm = config.symmetric_gvm;
    lin.kp_prime = config.kp_prime_spm.value_or(0.5 * (lin.ks_prime + lin.ki_prime));
    double omega_p = 0.0;
    if (config.omega_p_radps) omega_p = *config.omega_p_radps;
    else if (config.pump_wavelength_nm)
      omega_p = wavelength_m_to_radps(*config.pump_wavelength_nm * 1e-9);
    else if (config.omega_s_radps && config.omega_i_radps)
      omega_p = *config.omega_s_radps + *config.omega_i_radps;
    else
      throw std::invalid_argument(
          "linear dispersion needs omega_p_radps, pump_wavelength_nm, or both signal/idler centers");
    std::tie(lin.omega_s, lin.omega_i) = centers_from(omega_p);
    lin.omega_p = lin.omega_s + lin.omega_i;
    DispersionModel model = lin;
    validate_model(model);
    return model;
  }

  SellmeierModel sm;
  sm.set = find_sellmeier_set(config.sellmeier_set);
  sm.pump_axis = config.pump_axis;
  sm.signal_axis = config.signal_axis;
  sm.idler_axis = config.idler_axis;
  if (config.omega_p_radps || config.pump_wavelength_nm) {
    const double omega_p = config.omega_p_radps
                               ? *config.omega_p_radps
                               : wavelength_m_to_radps(*config.pump_wavelength_nm * 1e-9);
    std::tie(sm.omega_s, sm.omega_i) = centers_from(omega_p);
    sm.omega_p = sm.omega_s + sm.omega_i;
  } else {
    // center on the symmetric group-velocity-matched degenerate point
    sm.omega_p = 2.0;  // placeholder so validate passes inside the search
    sm.omega_s = 1.0;
    sm.omega_i = 1.0;
    const GvmPoint point = find_symmetric_gvm_point(
        DispersionModel{sm}, config.gvm_search_min_nm * 1e-9, config.gvm_search_max_nm * 1e-9);
    sm.omega_s = point.omega_s;
    sm.omega_i = point.omega_i;
    sm.omega_p = point.omega_p;
  }
  DispersionModel model = sm;
  validate_model(model);
  return model;
}

}  // namespace qpmforge
