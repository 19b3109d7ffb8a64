#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "latgl/darboux.hpp"
#include "latgl/gelfand_levitan.hpp"
#include "latgl/lattice.hpp"
#include "latgl/polysolve.hpp"
#include "latgl/spectral.hpp"
#include "latgl/verify.hpp"

namespace latgl::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Shortest-free fixed format: 17 significant digits, '.' decimal point
/// regardless of locale.
std::string format_double(double v);

json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const json& j);

/// {"grid", "a", "b", "c"} with flat n-major arrays: a has n_max rows
/// (n = 1..n_max), b has width - 1 columns (m = m_min+1..m_max), c is full.
/// Flagged entries, if any, go under "flagged".
json potential_to_json(const Potential& pot, const std::vector<FlaggedEntry>& flagged = {});
Potential potential_from_json(const json& j, std::vector<FlaggedEntry>* flagged = nullptr);

/// Modification document. Channel indices s are absolute m values; each
/// delta_c entry {s, s_prime, value} sets both (s,s') and (s',s).
/// "compensated_pairs" [{from, to, weight}] and "darboux_reweighting" {mu}
/// are expanded against the reference spectrum.
SpectralModification modification_from_json(const json& j, const SpectralData& ref);
json modification_to_json(const SpectralModification& mod, const GridSpec& grid);

json report_to_json(const VerificationReport& rep, const std::vector<std::string>& warnings = {});
VerificationReport report_from_json(const json& j);

/// Reads and parses a JSON file. Missing file -> IoError, bad syntax ->
/// ValidationError.
json read_json(const fs::path& path);
std::string read_text(const fs::path& path);

/// Writes through a temporary file in the same directory and renames it
/// into place.
void write_atomic(const fs::path& path, const std::string& content);

/// nu,lambda,gamma_<s>...
std::string spectral_csv(const SpectralData& sd);
/// n,m,s,degree,c0,c1,... (one row per nonzero entry)
std::string polytable_csv(const PolyTable& table);
/// n,m,n_prime,m_prime,value for every nonzero entry with n' <= n.
std::string kernel_csv(const TransformKernel& k);
/// Degree map of channel s as text: one line per n, "·" for the zero polynomial.
std::string degrees_text(const PolyTable& table, int s);

/// Column documentation printed by the help-formats subcommand.
std::string formats_help();

struct Tolerances {
  double residual = 1e-9;
  double orthogonality = 1e-9;
  double eigensolver = 1e-12;
  double structure = 1e-9;
  double route = 1e-9;
  double isospectral = 1e-8;
};

struct RunConfig {
  std::optional<GridSpec> grid;
  PotentialPreset preset = preset::Free{};
  std::optional<fs::path> potential_file;
  std::optional<fs::path> modification_file;
  Tolerances tol;
  fs::path out = "out";
  std::uint64_t seed = 0;
  std::size_t samples = 10;
  std::optional<int> polytable_s;
  bool allow_uncompensated = false;
};

/// Relative paths inside the document are resolved against `base`.
RunConfig config_from_json(const json& j, const fs::path& base = {});
RunConfig load_config(const fs::path& path);

/// Potential named by the config: the file if given, else the preset on the grid.
Potential load_potential(const RunConfig& cfg);

}  // namespace latgl::io
