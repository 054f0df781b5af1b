#include "bpt/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "bpt/error.hpp"

namespace bpt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_list(std::string s) {
  s = trim(s);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw ConfigError("unterminated list: " + s);
    s = s.substr(1, s.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = unquote(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string s = unquote(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("invalid value for " + key + ": '" + s + "'");
  }
  return value;
}

}  // namespace

void RunConfig::validate() const {
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (samples_per_batch < 1) throw ConfigError("samples_per_batch must be >= 1");
  if (timepoints.empty()) throw ConfigError("timepoints must not be empty");
  for (int t : timepoints) {
    if (t < static_cast<int>(kHistoryLength)) {
      throw ConfigError("timepoints must be >= " + std::to_string(kHistoryLength) + ", got " +
                        std::to_string(t));
    }
  }
  if (!(min_ade_threshold > 0.0) || !(min_fde_threshold > 0.0) || !(mr_distance > 0.0)) {
    throw ConfigError("thresholds must be positive");
  }
  if (k < 1 || horizon < 1) throw ConfigError("k and horizon must be >= 1");
  if (predictor.kind == "external" && predictor.command.empty()) {
    throw ConfigError("predictor = external needs predictor_command");
  }
  if (!(predictor.timeout_s > 0.0)) throw ConfigError("predictor_timeout must be positive");
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "scenarios" || key == "scenario") {
    c.scenarios = split_list(value);
  } else if (key == "sampler") {
    c.sampler = sampler_kind_from_string(unquote(value));
  } else if (key == "samples_per_batch") {
    c.samples_per_batch = parse_number<std::size_t>(key, value);
  } else if (key == "timepoints") {
    c.timepoints.clear();
    for (const auto& t : split_list(value)) c.timepoints.push_back(parse_number<int>(key, t));
  } else if (key == "min_ade_threshold") {
    c.min_ade_threshold = parse_number<double>(key, value);
  } else if (key == "min_fde_threshold") {
    c.min_fde_threshold = parse_number<double>(key, value);
  } else if (key == "mr_distance") {
    c.mr_distance = parse_number<double>(key, value);
  } else if (key == "k") {
    c.k = parse_number<std::size_t>(key, value);
  } else if (key == "horizon") {
    c.horizon = parse_number<std::size_t>(key, value);
  } else if (key == "workers") {
    c.workers = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "predictor") {
    c.predictor.kind = unquote(value);
  } else if (key == "predictor_command") {
    c.predictor.command = unquote(value);
    if (!c.predictor.command.empty()) c.predictor.kind = "external";
  } else if (key == "predictor_timeout") {
    c.predictor.timeout_s = parse_number<double>(key, value);
  } else if (key == "output_dir") {
    c.output_dir = unquote(value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!base_dir.empty()) {
    for (auto& s : c.scenarios) {
      const std::filesystem::path p(s);
      if (p.extension() == ".tsc" && p.is_relative()) s = (base_dir / p).lexically_normal().string();
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"scenarios", c.scenarios},
          {"sampler", to_string(c.sampler)},
          {"samples_per_batch", c.samples_per_batch},
          {"timepoints", c.timepoints},
          {"min_ade_threshold", c.min_ade_threshold},
          {"min_fde_threshold", c.min_fde_threshold},
          {"mr_distance", c.mr_distance},
          {"k", c.k},
          {"horizon", c.horizon},
          {"workers", c.workers},
          {"seed", c.seed},
          {"predictor", c.predictor.kind},
          {"predictor_command", c.predictor.command},
          {"predictor_timeout", c.predictor.timeout_s}};
}

}  // namespace bpt
