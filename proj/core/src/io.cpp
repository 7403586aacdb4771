#include "qpmforge/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

static_assert(std::endian::native == std::endian::little,
              "container payloads are written as little-endian doubles");

namespace qpmforge {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return in;
}

double parse_header_value(const std::string& line, const std::string& key) {
  const std::string prefix = "# " + key + "=";
  if (line.rfind(prefix, 0) != 0)
    throw std::runtime_error("domain file: expected header '" + prefix + "...', got '" + line + "'");
  return std::stod(line.substr(prefix.size()));
}

}  // namespace

void write_domain_file(const std::filesystem::path& path, const DomainConfiguration& domains,
                       double dk0) {
  domains.validate();
  std::ofstream out = open_out(path);
  out << "# L_m=" << fmt_double(domains.effective_length()) << "\n";
  out << "# w_m=" << fmt_double(domains.width) << "\n";
  out << "# dk0_radpm=" << fmt_double(dk0) << "\n";
  for (std::size_t i = 0; i < domains.signs.size(); ++i) {
    out << (domains.signs[i] > 0 ? '+' : '-');
    if ((i + 1) % 80 == 0 || i + 1 == domains.signs.size()) out << '\n';
  }
}

DomainFile read_domain_file(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  DomainFile file;
  if (!std::getline(in, line)) throw std::runtime_error("domain file: missing header");
  const double length = parse_header_value(line, "L_m");
  if (!std::getline(in, line)) throw std::runtime_error("domain file: missing header");
  file.domains.width = parse_header_value(line, "w_m");
  if (!std::getline(in, line)) throw std::runtime_error("domain file: missing header");
  file.dk0 = parse_header_value(line, "dk0_radpm");
  while (std::getline(in, line)) {
    for (char c : line) {
      if (c == '+') file.domains.signs.push_back(1);
      else if (c == '-') file.domains.signs.push_back(-1);
      else if (c == '\r' || c == ' ') continue;
      else throw std::runtime_error(std::string("domain file: unexpected character '") + c + "'");
    }
  }
  file.domains.validate();
  file.domains.z_start = -0.5 * file.domains.effective_length();
  if (std::abs(file.domains.effective_length() - length) > file.domains.width * (1.0 + 1e-9))
    throw std::runtime_error("domain file: header length disagrees with the sign count");
  return file;
}

void write_pmf_csv(const std::filesystem::path& path, std::span<const double> dk,
                   std::span<const complexd> phi) {
  if (dk.size() != phi.size()) throw std::invalid_argument("dk/phi size mismatch");
  std::ofstream out = open_out(path);
  out << "dk_radpm,re_phi,im_phi\n";
  for (std::size_t i = 0; i < dk.size(); ++i)
    out << fmt_double(dk[i]) << ',' << fmt_double(phi[i].real()) << ','
        << fmt_double(phi[i].imag()) << '\n';
}

void write_jsa_container(const std::filesystem::path& path, const JsaGrid& jsa,
                         const std::string& provenance_json) {
  json header;
  header["format"] = "qpmjsa/1";
  header["signal"] = {{"start_radps", jsa.signal.start},
                      {"step_radps", jsa.signal.step},
                      {"count", jsa.signal.count}};
  header["idler"] = {{"start_radps", jsa.idler.start},
                     {"step_radps", jsa.idler.step},
                     {"count", jsa.idler.count}};
  header["norm"] = jsa.norm == NormFlag::Unit ? "unit" : "raw";
  header["raw_l2"] = jsa.raw_l2;
  header["transmitted_fraction"] = jsa.transmitted_fraction;
  header["provenance"] = json::parse(provenance_json);
  const std::string text = header.dump();

  std::ofstream out = open_out(path, std::ios::binary);
  out << "QPMJSA1 " << text.size() << "\n" << text;
  std::vector<double> row(static_cast<std::size_t>(2 * jsa.values.cols()));
  for (long i = 0; i < jsa.values.rows(); ++i) {
    for (long j = 0; j < jsa.values.cols(); ++j) {
      row[static_cast<std::size_t>(2 * j)] = jsa.values(i, j).real();
      row[static_cast<std::size_t>(2 * j + 1)] = jsa.values(i, j).imag();
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed writing JSA container: " + path.string());
}

JsaFile read_jsa_container(const std::filesystem::path& path) {
  std::ifstream in = open_in(path, std::ios::binary);
  std::string magic;
  std::size_t header_size = 0;
  in >> magic >> header_size;
  if (magic != "QPMJSA1") throw std::runtime_error("not a JSA container: " + path.string());
  in.ignore(1);  // newline
  std::string text(header_size, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_size));
  const json header = json::parse(text);

  JsaFile file;
  file.jsa.signal = {header["signal"]["start_radps"].get<double>(),
                     header["signal"]["step_radps"].get<double>(),
                     header["signal"]["count"].get<long>()};
  file.jsa.idler = {header["idler"]["start_radps"].get<double>(),
                    header["idler"]["step_radps"].get<double>(),
                    header["idler"]["count"].get<long>()};
  file.jsa.norm = header["norm"] == "unit" ? NormFlag::Unit : NormFlag::Raw;
  file.jsa.raw_l2 = header["raw_l2"].get<double>();
  file.jsa.transmitted_fraction = header.value("transmitted_fraction", 1.0);
  file.provenance_json = header["provenance"].dump();

  file.jsa.values.resize(file.jsa.signal.count, file.jsa.idler.count);
  std::vector<double> row(static_cast<std::size_t>(2 * file.jsa.idler.count));
  for (long i = 0; i < file.jsa.signal.count; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated JSA container: " + path.string());
    for (long j = 0; j < file.jsa.idler.count; ++j)
      file.jsa.values(i, j) = {row[static_cast<std::size_t>(2 * j)],
                               row[static_cast<std::size_t>(2 * j + 1)]};
  }
  return file;
}

void write_jsa_csv(const std::filesystem::path& path, const JsaGrid& jsa) {
  if (jsa.values.rows() > 256 || jsa.values.cols() > 256)
    throw std::invalid_argument("CSV export is limited to grids of at most 256x256");
  std::ofstream out = open_out(path);
  out << "omega_s_radps,omega_i_radps,re_f,im_f\n";
  for (long i = 0; i < jsa.values.rows(); ++i)
    for (long j = 0; j < jsa.values.cols(); ++j)
      out << fmt_double(jsa.signal.value(i)) << ',' << fmt_double(jsa.idler.value(j)) << ','
          << fmt_double(jsa.values(i, j).real()) << ',' << fmt_double(jsa.values(i, j).imag())
          << '\n';
}

void write_jsa_heatmap_svg(const std::filesystem::path& path, const JsaGrid& jsa,
                           long max_cells) {
  const long rows = jsa.values.rows();
  const long cols = jsa.values.cols();
  const long stride = std::max({rows / max_cells, cols / max_cells, 1L});
  const long nr = (rows + stride - 1) / stride;
  const long nc = (cols + stride - 1) / stride;

  Eigen::MatrixXd mag = Eigen::MatrixXd::Zero(nr, nc);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j)
      mag(i / stride, j / stride) = std::max(mag(i / stride, j / stride),
                                             std::abs(jsa.values(i, j)));
  const double peak = mag.maxCoeff();
  if (peak > 0.0) mag /= peak;

  const int cell_px = 4;
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << nc * cell_px << "\" height=\""
      << nr * cell_px << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#000020\"/>\n";
  for (long i = 0; i < nr; ++i) {
    for (long j = 0; j < nc; ++j) {
      const double v = mag(i, j);
      if (v < 1e-3) continue;
      // dark blue -> magenta -> yellow ramp
      const int r = static_cast<int>(255.0 * std::min(1.0, 2.0 * v));
      const int g = static_cast<int>(255.0 * std::max(0.0, 2.0 * v - 1.0));
      const int b = static_cast<int>(160.0 * (1.0 - v) + 32.0);
      // SVG y grows downward; flip so the idler axis points up
      out << "<rect x=\"" << j * cell_px << "\" y=\"" << (nr - 1 - i) * cell_px << "\" width=\""
          << cell_px << "\" height=\"" << cell_px << "\" fill=\"rgb(" << r << ',' << g << ','
          << b << ")\"/>\n";
    }
  }
  out << "</svg>\n";
}

void write_squeeze_matrix(const std::filesystem::path& csv_path, const SqueezeMatrix& gamma,
                          const std::string& provenance_json) {
  gamma.validate();
  std::ofstream out = open_out(csv_path);
  out << "n,m,re_gamma,im_gamma\n";
  const auto size = static_cast<long>(gamma.labels.size());
  for (long i = 0; i < size; ++i)
    for (long j = 0; j < size; ++j)
      out << gamma.labels[static_cast<std::size_t>(i)] << ','
          << gamma.labels[static_cast<std::size_t>(j)] << ','
          << fmt_double(gamma.values(i, j).real()) << ','
          << fmt_double(gamma.values(i, j).imag()) << '\n';

  json meta;
  meta["labels"] = gamma.labels;
  meta["scale"] = gamma.scale;
  meta["asymmetry_residual"] = gamma.asymmetry_residual;
  meta["unaccounted"] = gamma.unaccounted;
  meta["basis_spans_jsa"] = gamma.basis_spans_jsa;
  meta["provenance"] = json::parse(provenance_json);
  write_text_file(csv_path.string() + ".meta.json", meta.dump(2) + "\n");
}

SqueezeMatrix read_squeeze_matrix_csv(const std::filesystem::path& csv_path, double scale) {
  std::ifstream in = open_in(csv_path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("n,m,", 0) != 0)
    throw std::runtime_error("squeeze matrix CSV: bad or missing header");
  std::map<std::pair<int, int>, complexd> entries;
  std::map<int, bool> label_set;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    int nm[2];
    double re, im;
    for (int k = 0; k < 2; ++k) {
      if (!std::getline(ss, tok, ',')) throw std::runtime_error("squeeze matrix CSV: short row");
      nm[k] = std::stoi(tok);
    }
    if (!std::getline(ss, tok, ',')) throw std::runtime_error("squeeze matrix CSV: short row");
    re = std::stod(tok);
    if (!std::getline(ss, tok, ',')) throw std::runtime_error("squeeze matrix CSV: short row");
    im = std::stod(tok);
    entries[{nm[0], nm[1]}] = {re, im};
    label_set[nm[0]] = true;
    label_set[nm[1]] = true;
  }
  SqueezeMatrix gamma;
  for (const auto& [label, _] : label_set) gamma.labels.push_back(label);
  const auto size = static_cast<long>(gamma.labels.size());
  gamma.scale = scale;
  gamma.values = Eigen::MatrixXcd::Zero(size, size);
  for (long i = 0; i < size; ++i)
    for (long j = 0; j < size; ++j) {
      const auto it = entries.find({gamma.labels[static_cast<std::size_t>(i)],
                                    gamma.labels[static_cast<std::size_t>(j)]});
      if (it != entries.end()) gamma.values(i, j) = it->second;
    }
  gamma.validate();
  return gamma;
}

void write_covariance_csv(const std::filesystem::path& path, const CovarianceState& state) {
  state.validate();
  std::ofstream out = open_out(path);
  for (long i = 0; i < state.covariance.rows(); ++i) {
    for (long j = 0; j < state.covariance.cols(); ++j) {
      if (j) out << ',';
      out << fmt_double(state.covariance(i, j));
    }
    out << '\n';
  }
}

void write_registry_json(const std::filesystem::path& path, const CovarianceState& state) {
  json registry = json::array();
  for (std::size_t i = 0; i < state.modes.size(); ++i) {
    const ModeLabel& label = state.modes[i];
    registry.push_back({{"index", i},
                        {"bin", label.bin},
                        {"polarization", std::string(1, static_cast<char>(label.pol))},
                        {"path", label.path}});
  }
  write_text_file(path, registry.dump(2) + "\n");
}

void write_thss_csv(const std::filesystem::path& path, std::span<const ThssPoint> table) {
  std::ofstream out = open_out(path);
  out << "b11,b12,b22,var_x1,var_xminus,var_pplus,ptse\n";
  for (const ThssPoint& p : table)
    out << fmt_double(p.b11) << ',' << fmt_double(p.b12) << ',' << fmt_double(p.b22) << ','
        << fmt_double(p.var_x1) << ',' << fmt_double(p.var_xminus) << ','
        << fmt_double(p.var_pplus) << ',' << fmt_double(p.ptse) << '\n';
}

void write_amplitude_trace_csv(const std::filesystem::path& path, const AmplitudeTrace& trace) {
  std::ofstream out = open_out(path);
  out << "z_m,re_a,im_a,re_target,im_target\n";
  for (std::size_t i = 0; i < trace.z.size(); ++i)
    out << fmt_double(trace.z[i]) << ',' << fmt_double(trace.realized[i].real()) << ','
        << fmt_double(trace.realized[i].imag()) << ',' << fmt_double(trace.target[i].real())
        << ',' << fmt_double(trace.target[i].imag()) << '\n';
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out = open_out(path);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace qpmforge
