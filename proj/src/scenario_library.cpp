#include "bpt/scenario_library.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bpt/concrete_scenario.hpp"
#include "bpt/error.hpp"
#include "bpt/samplers.hpp"

#ifndef BPT_SCENARIO_DIR
#define BPT_SCENARIO_DIR "scenarios"
#endif

namespace bpt {

namespace fs = std::filesystem;

ScenarioProgram load_program(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(e.message(), e.line(), e.column(), path.string());
  }
}

std::optional<std::string> timepoint_feature(const ScenarioProgram& program) {
  const lang::Expr& e = *program.predict.timepoint;
  if (!e.feature.empty()) return e.feature;
  if (e.kind == lang::Expr::Kind::kIdent) {
    const lang::ParamDecl* p = program.find_param(e.text);
    if (p != nullptr) {
      for (const auto& f : program.features()) {
        if (f.name == p->name) return f.name;
      }
    }
  }
  return std::nullopt;
}

Trace smoke_simulate(const ScenarioProgram& program, std::size_t min_length, std::uint64_t seed) {
  UniformSampler sampler(program.features(), seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    ConcretizeResult cr = concretize(program, sampler.propose(), seed);
    if (!cr.accepted()) continue;
    const std::size_t n =
        std::max(min_length, static_cast<std::size_t>(cr.scenario->timepoint) + kHorizon);
    return simulate(*cr.scenario, n);
  }
  throw ScenarioError("no sample satisfied the requirements in 100 draws");
}

namespace {

struct ManifestEntry {
  std::string id;
  std::string file;
  std::string title;
  std::string category;
  std::size_t expected_feature_count = 0;
  std::size_t min_sim_length = 0;
};

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read " + path.string());
  std::vector<ManifestEntry> out;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& e : j.at("entries")) {
      out.push_back({e.at("id").get<std::string>(), e.at("file").get<std::string>(),
                     e.value("title", ""), e.value("category", ""),
                     e.at("expected_feature_count").get<std::size_t>(),
                     e.value("min_sim_length", std::size_t{0})});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
  return out;
}

void check_entry(const LibraryEntry& entry) {
  const ScenarioProgram& p = *entry.program;
  const auto& features = p.features();
  if (features.size() != entry.expected_feature_count) {
    throw ScenarioError("expected " + std::to_string(entry.expected_feature_count) +
                        " features, found " + std::to_string(features.size()));
  }
  const auto tp = timepoint_feature(p);
  const Feature* tf = nullptr;
  for (const auto& f : features) {
    if (tp && f.name == *tp) tf = &f;
  }
  const std::vector<FeatureValue> expected{20.0, 40.0, 60.0, 80.0};
  if (tf == nullptr || tf->distribution.kind != Distribution::Kind::kChoice ||
      tf->distribution.values != expected) {
    throw ScenarioError("timepoint must be sampled from Choice(20, 40, 60, 80)");
  }
  const auto ranges = std::count_if(features.begin(), features.end(),
                                    [](const Feature& f) { return f.interval_length().has_value(); });
  if (ranges < 2) throw ScenarioError("needs at least 2 Range features");
}

}  // namespace

std::vector<LibraryEntry> load_library(const fs::path& directory) {
  if (!fs::is_directory(directory)) throw ScenarioError("not a directory: " + directory.string());
  std::map<std::string, ManifestEntry> by_file;
  const fs::path manifest = directory / "manifest.json";
  if (fs::exists(manifest)) {
    for (auto& e : read_manifest(manifest)) {
      if (!fs::exists(directory / e.file)) {
        throw ScenarioError(manifest.string() + ": listed file " + e.file + " does not exist");
      }
      by_file[e.file] = std::move(e);
    }
  }
  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(directory)) {
    if (de.is_regular_file() && de.path().extension() == ".tsc") files.push_back(de.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<LibraryEntry> entries;
  for (const auto& file : files) {
    LibraryEntry entry;
    entry.path = file;
    auto it = by_file.find(file.filename().string());
    try {
      entry.program = std::make_shared<const ScenarioProgram>(load_program(file));
      if (it != by_file.end()) {
        entry.id = it->second.id;
        entry.title = it->second.title;
        entry.category = it->second.category;
        entry.expected_feature_count = it->second.expected_feature_count;
        entry.min_sim_length = it->second.min_sim_length;
      } else {
        entry.id = file.stem().string();
        entry.title = entry.program->title;
        entry.expected_feature_count = entry.program->features().size();
      }
      check_entry(entry);
      smoke_simulate(*entry.program, entry.min_sim_length);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ScenarioError(file.string() + ": " + e.what());
    }
    entries.push_back(std::move(entry));
  }
  std::sort(entries.begin(), entries.end(),
            [](const LibraryEntry& a, const LibraryEntry& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].id == entries[i - 1].id) throw ScenarioError("duplicate library id " + entries[i].id);
  }
  return entries;
}

fs::path default_library_dir() {
  if (const char* env = std::getenv("BPT_SCENARIO_DIR"); env != nullptr && *env != '\0') return env;
  return BPT_SCENARIO_DIR;
}

fs::path resolve_scenario(const std::string& ref, const fs::path& library_dir) {
  if (fs::is_regular_file(ref)) return ref;
  const fs::path manifest = library_dir / "manifest.json";
  if (fs::exists(manifest)) {
    for (const auto& e : read_manifest(manifest)) {
      if (e.id == ref) return library_dir / e.file;
    }
  }
  throw ConfigError("scenario '" + ref + "' is neither a file nor a library id");
}

}  // namespace bpt
