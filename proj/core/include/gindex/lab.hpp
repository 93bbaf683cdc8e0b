#pragma once

// Config-driven experiment runner: JSON config in, verdicts plus a report
// directory out (report.json, series_*.csv, index_*.csv, meta.json).

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gindex/crossed_symbol.hpp"
#include "gindex/groups.hpp"
#include "gindex/quantize.hpp"

namespace gindex::lab {

const char* version() noexcept;

enum class Outcome { pass, undecided, fail };  // ordered by severity
const char* to_string(Outcome o) noexcept;
// PASS = 0, FAIL = 1, UNDECIDED = 2
int exit_code(Outcome o) noexcept;
Outcome worst(Outcome a, Outcome b) noexcept;

// Verdict thresholds; every field can be overridden under "tolerances".
struct Tolerances {
  double min_gap = 1e3;
  double zero_tol = 1e-8;
  double drift = 1e-3;
  double decomposition = 1e-2;
  double independence = 1e-3;
  double chi_vanishing = 1e-3;  // |ind_g| bound where chi(g) != 0
  double c0 = 1e-2;
  double negative_power = 1e-3;
  double fit_residual = 1e-3;
  double power_slope = 0.05;
  double empty_fixed_trace = 1e-6;
  double isometric_egorov = 1e-9;
  double egorov_slope_min = 0.9;
  double egorov_slope_max = 1.3;
};

struct Knobs {
  std::vector<int> windows{128, 256};             // localized indices
  std::vector<int> index_windows{64, 128, 256};   // SVD index
  std::vector<double> h_grid;                     // empty: 8 points 0.2 .. 0.02
  int order = 4;                                  // parametrix / star order N
  double prune_tol = 1e-14;                       // parametrix parts dropped below this
  double eps = 3.0;                               // zero-section cut in xi
  cplx fill = 1.0;
  int sc_grid = 64;                               // x-grid of semiclassical fields
  int trace_min_cutoff = 64;
  int egorov_cutoff = 512;
  int egorov_grid = 256;
};

// Seeded elliptic sample: a_e = scale (1 on the plus sheet, e^{i winding x}
// on the minus sheet), other elements random trigonometric polynomials with
// sup norm below `amplitude`.
struct RandomSymbols {
  int modes = 2;
  double amplitude = 0.25;
  double scale = 3.0;
  int winding = 1;
};

struct ExperimentConfig {
  GroupDescriptor group;
  Realization realization;
  int grid_size = 64;
  // Principal symbol table: element label -> {"plus": [[k, re, im], ...], "minus": ...}
  // or "unit"; the bare string "unit" is the identity symbol.
  nlohmann::json symbols = nlohmann::json::object();
  std::optional<RandomSymbols> random;
  // Semiclassical symbols: element label -> list of separable terms.
  nlohmann::json semiclassical = nlohmann::json::object();
  std::vector<std::string> kinds;
  std::vector<std::string> elements;  // egorov / trace targets (empty: all non-identity)
  Knobs knobs;
  Tolerances tol;
  std::uint64_t seed = 1;
  std::string output;

  // Canonical form with defaults applied; the output directory is omitted.
  nlohmann::json canonical() const;
};

// Throws ParseError (with line and column) or SchemaError (naming the field).
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// FNV-1a 64 over the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

struct Table {
  std::string file;  // e.g. "series_trace_e.csv"
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // preformatted cells
};

struct ExperimentReport {
  std::string kind;
  Outcome outcome = Outcome::undecided;
  std::string summary;  // governing quantity and tolerance
  nlohmann::json payload = nlohmann::json::object();
  std::vector<Table> tables;
  double seconds = 0.0;
};

struct RunRecord {
  std::string config_hash;
  std::string version;
  std::vector<ExperimentReport> experiments;

  Outcome outcome() const noexcept;
};

// Built objects shared by the experiments of one config.
struct Setup {
  GroupActionPtr action;
  CrossedSymbol sigma;
  std::vector<std::pair<GroupElement, SemiclassicalSymbol>> sc;

  static Setup build(const ExperimentConfig& c);
  // Operator op(sigma_g) Phi_g summed over the table, on one window.
  LabeledOperator assemble(const FrequencyWindow& w) const;
};

ExperimentReport run_experiment(const ExperimentConfig& c, const Setup& s, const std::string& kind);

// Experiments run concurrently when threads > 1; the record is the same.
RunRecord run(const ExperimentConfig& c, int threads = 1);

// Writes report.json, the CSV tables, meta.json and timings.json (kept apart
// so the other files are reproducible byte for byte). Throws IoError.
void emit_reports(const RunRecord& record, const std::filesystem::path& dir);

// Winding family w = -3..3 on the trivial group; the measured sign goes to
// sign_convention.json.
RunRecord calibrate_sign(const std::vector<int>& windows = {64, 128, 256});

}  // namespace gindex::lab
