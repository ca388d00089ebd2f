#ifndef TFA_PIPELINE_HPP
#define TFA_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tfa/geometry.hpp"
#include "tfa/projection.hpp"
#include "tfa/size.hpp"
#include "tfa/tiles.hpp"

namespace tfa {

/** \brief Everything a run reads from the INI file.
 *
 * Sections [grid], [constants], [sweep], [exponents], [selection] and [run];
 * list values are comma separated, M1 also accepts a range "a..b".
 */
struct RunConfig {
  GridConstants gc;
  bool allow_overflow = false;  // overflow families count as a structural failure otherwise

  int N = 1024;
  int band = 48;
  int jq_min = 0, jq_max = 1;
  std::vector<double> beta{0, -1, 2};
  double quad_eps = 1e-4;
  int signal_kmax = 40;  // generated inputs for decompose/select/project/evaluate
  int signal_modes = 24;

  bool has_sweep = false;
  std::vector<int> M1{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int sweep_band = 16;
  int kmax = 12;
  int modes = 12;
  bool record_runtime = false;

  std::vector<double> p{3, 3, 3};
  std::vector<double> contrast_p{10, 10, 1.25};

  int D = 8;
  double tol_zero = 1e-6;
  int max_project_trees = 64;

  std::uint64_t seed = 1;
  int threads = 1;
  bool record_timings = false;

  std::string text;  // source text, hashed into the manifest
};

/// Throws ConfigError with the key path of the first invalid entry.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
void validate_config(const RunConfig& cfg);

enum ExitCode { kExitOk = 0, kExitVerify = 1, kExitConfig = 2, kExitStructural = 3 };

/// Decomposition of the configured window; throws StructuralError on overflow
/// families unless allowed.
Decomposition configured_decomposition(const RunConfig& cfg);

/// Input signals f_i = band_limited_signal(N, signal_kmax, seed + i, signal_modes).
std::vector<Signal> configured_signals(const RunConfig& cfg, int N = 0);

/// Tile-set dump: v, constants, cubes with adjusted intervals, families, tiles.
std::string tileset_json(const Decomposition& d);
Decomposition tileset_from_json(const std::string& text);

struct FamilySelection {
  int family = 0;
  LevelPartition partition;
};

/// Level partition of every sparse family; contexts per worker.
std::vector<FamilySelection> select_families(const Decomposition& d, const std::vector<Signal>& f,
                                             const SelectionConfig& sc, int threads);

/// Maximal trees at candidate tops, split by lacunarity: (tree, i) with i lacunary.
struct ProbeCase {
  Tree T;
  int i = 0;
};
std::vector<ProbeCase> lacunary_probes(const TileSet& ts);
/// Non-lacunary tree for some i: top [0, 1), s near a coarse cube center, random coarse tiles.
std::optional<ProbeCase> nonlacunary_probe(const TileSet& ts, std::mt19937_64& rng);

/// Families with cubes at two or more scales.
std::vector<int> multiscale_families(const Decomposition& d);

struct Verdict {
  std::string suite, name;
  bool pass = true;
  std::string detail;
};

/// Named invariants of one suite (geometry, tiles, signals, selection, projections, forms).
std::vector<Verdict> verify_suite(const std::string& suite, const RunConfig& cfg,
                                  const std::optional<Decomposition>& input);

struct CommandOptions {
  std::string command;
  std::filesystem::path out = "out";
  std::string suite = "all";
  std::optional<std::filesystem::path> input;  // tile dump for verify
};

/// Runs one command, writing its reports and run_manifest.json under opt.out.
/// Returns the exit code; messages go to the given streams.
int run_command(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out,
                std::ostream& err);

}  // namespace tfa

#endif
