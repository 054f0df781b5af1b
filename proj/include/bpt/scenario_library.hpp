#ifndef BPT_SCENARIO_LIBRARY_HPP_
#define BPT_SCENARIO_LIBRARY_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bpt/kinematic_sim.hpp"
#include "bpt/scenario_lang.hpp"

namespace bpt {

struct LibraryEntry {
  std::string id;
  std::filesystem::path path;
  std::string title;
  std::string category;
  std::size_t expected_feature_count = 0;
  std::size_t min_sim_length = 0;
  std::shared_ptr<const ScenarioProgram> program;
};

/// Reads and parses a scenario file. Throws ParseError (position in the
/// file) or ConfigError when unreadable.
ScenarioProgram load_program(const std::filesystem::path& path);

/// Feature that controls the prediction timepoint, if the timepoint is
/// sampled (a Choice/Range param or an inline distribution).
std::optional<std::string> timepoint_feature(const ScenarioProgram& program);

/// Simulates one uniform sample (seeded) for max(min_length, timepoint +
/// horizon) steps. Throws on any failure.
Trace smoke_simulate(const ScenarioProgram& program, std::size_t min_length,
                     std::uint64_t seed = 0);

/// Parses every .tsc file in `directory`, checks it against manifest.json
/// (when present) and smoke-simulates it. Entries are sorted by id. Throws
/// ScenarioError naming the offending file.
std::vector<LibraryEntry> load_library(const std::filesystem::path& directory);

/// Directory of the shipped library (BPT_SCENARIO_DIR env var overrides).
std::filesystem::path default_library_dir();

/// A path to an existing file is returned as is; otherwise `ref` is looked
/// up as a library id in the manifest of `library_dir`.
std::filesystem::path resolve_scenario(const std::string& ref,
                                       const std::filesystem::path& library_dir);

}  // namespace bpt

#endif  // BPT_SCENARIO_LIBRARY_HPP_
