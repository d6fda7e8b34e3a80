#pragma once

// Run orchestration behind the `captive` executable: JSON run configs,
// subcommands, and deterministic artifact writing.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "captive/corridors.hpp"
#include "captive/error.hpp"
#include "captive/geometry.hpp"
#include "captive/report_json.hpp"
#include "captive/simulator.hpp"

namespace captive::cli {

inline constexpr const char* kToolName = "captive";
inline constexpr const char* kToolVersion = "0.1.0";

struct TransitionsSection {
  std::vector<double> x;
  std::optional<double> jump_prob;  // default 1 - exp(-lambda dt)
  double time = 0.0;
  struct Bin {
    std::size_t from = 0;
    std::size_t to = 0;
    double lo = 0.0;
    double hi = 0.0;
  };
  std::vector<Bin> mc;
  std::uint64_t min_steps = 100000;
};

struct PolarSection {
  std::optional<PolarCoordinate> radial;  // empty: radius from the corridors section
  PolarCoordinate angle;
  double rho = 0.0;
  double phi0 = 0.0;
  std::size_t hist_bins = 20;
};

struct TransformSection {
  std::string map;
  std::string input;
};

/// A parsed run configuration. `doc` is the document the CLI echoes into the
/// manifest (after overrides).
struct RunConfig {
  Json doc;
  std::map<std::string, BoundaryFn> boundaries;
  std::optional<CaptiveModel> model;   // coefficients + model.lower/upper
  std::optional<CorridorModel> corridors;
  std::optional<PolarSection> polar;
  std::optional<TransitionsSection> transitions;
  std::optional<TransformSection> transform;
  JumpSpec jump;
  SimConfig sim;
  std::size_t keep_paths = 10;
  std::filesystem::path out_dir = "out";
  bool write_csv = true;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::string> out;
  std::optional<std::string> input;  // transform
  std::optional<std::string> map;    // transform
  bool summary = false;              // polar: radial histograms
  std::size_t threads = 0;           // 0: hardware concurrency
};

/// Parses a config document; ConfigError on missing or malformed fields and
/// unresolved boundary names.
RunConfig parse_config(Json doc);
RunConfig load_config(const std::filesystem::path& file);

/// Applies seed/paths/out/input/map overrides to the document and re-parses.
RunConfig apply_overrides(const RunConfig& cfg, const Overrides& o);

inline constexpr std::string_view kSubcommands[] = {"simulate", "corridors",  "polar",
                                                    "transitions", "transform", "validate"};

/// Runs a subcommand. Returns 0 on success, 3 when `validate` finds a
/// failure; other failures throw.
int run_command(std::string_view subcommand, const RunConfig& cfg, const Overrides& o);

/// 2 config/usage/domain, 3 validation, 4 numerical/state, 5 io, 1 other.
int exit_code(ErrorKind kind) noexcept;
int exit_code(const std::exception& e) noexcept;

/// {"error": {"kind", "message", "details"?}}
Json error_json(const std::exception& e);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

/// Shortest round-trip form is used in JSON; CSV uses 17 significant digits.
std::string format_double(double v);

/// k,t,x,jump[,corridor_index] rows of a recorded path.
std::string path_csv(const PathSample& p, const std::vector<std::size_t>* corridor = nullptr);

/// Parses a path CSV written by path_csv (header required).
PathSample read_path_csv(const std::filesystem::path& file);

}  // namespace captive::cli
