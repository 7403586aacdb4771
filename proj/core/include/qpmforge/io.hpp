#ifndef QPMFORGE_IO_HPP
#define QPMFORGE_IO_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qpmforge/poling.hpp"
#include "qpmforge/spectra.hpp"
#include "qpmforge/state.hpp"

namespace qpmforge {

// Domain file: UTF-8 text with header lines
//   # L_m=<float>
//   # w_m=<float>
//   # dk0_radpm=<float>
// followed by one +/- character per domain, 80 per line.
void write_domain_file(const std::filesystem::path& path, const DomainConfiguration& domains,
                       double dk0);

struct DomainFile {
  DomainConfiguration domains;
  double dk0 = 0.0;
};

DomainFile read_domain_file(const std::filesystem::path& path);

// CSV with columns dk_radpm,re_phi,im_phi.
void write_pmf_csv(const std::filesystem::path& path, std::span<const double> dk,
                   std::span<const complexd> phi);

// Binary container: one ASCII line "QPMJSA1 <json-byte-count>\n", a JSON text
// header (axis start/step/count, norm flag, raw norm, provenance), then
// row-major (signal outer) little-endian float64 (re, im) pairs.
void write_jsa_container(const std::filesystem::path& path, const JsaGrid& jsa,
                         const std::string& provenance_json = "{}");

struct JsaFile {
  JsaGrid jsa;
  std::string provenance_json;
};

JsaFile read_jsa_container(const std::filesystem::path& path);

// Plain-text export for small grids: omega_s_radps,omega_i_radps,re_f,im_f.
void write_jsa_csv(const std::filesystem::path& path, const JsaGrid& jsa);

// Downsampled magnitude heatmap, for eyeballing only.
void write_jsa_heatmap_svg(const std::filesystem::path& path, const JsaGrid& jsa,
                           long max_cells = 128);

// CSV with columns n,m,re_gamma,im_gamma plus a JSON sidecar (labels, scale,
// residuals, provenance) at <path>.meta.json.
void write_squeeze_matrix(const std::filesystem::path& csv_path, const SqueezeMatrix& gamma,
                          const std::string& provenance_json = "{}");

SqueezeMatrix read_squeeze_matrix_csv(const std::filesystem::path& csv_path, double scale = 1.0);

// Covariance matrix as a bare CSV plus the registry as JSON.
void write_covariance_csv(const std::filesystem::path& path, const CovarianceState& state);
void write_registry_json(const std::filesystem::path& path, const CovarianceState& state);

// CSV with columns b11,b12,b22,var_x1,var_xminus,var_pplus,ptse.
void write_thss_csv(const std::filesystem::path& path, std::span<const ThssPoint> table);

// CSV with columns z_m,re_a,im_a,re_target,im_target.
void write_amplitude_trace_csv(const std::filesystem::path& path, const AmplitudeTrace& trace);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace qpmforge

#endif
