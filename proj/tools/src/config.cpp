// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#include "apsm/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string_view>
#include <utility>

#include "apsm/errors.hpp"

namespace apsm::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> items;
  while (true) {
    const auto comma = s.find(',');
    items.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return items;
}

// Thrown by value parsers; the caller attaches source, line and key.
struct BadValue {
  std::string why;
};

template <typename T>
T parse_number(std::string_view s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw BadValue{"'" + std::string(s) + "' is not a valid number"};
  }
  return v;
}

std::size_t parse_count(std::string_view s) { return parse_number<std::size_t>(s); }
double parse_real(std::string_view s) { return parse_number<double>(s); }

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw BadValue{"'" + std::string(s) + "' is not a boolean"};
}

template <typename T>
std::vector<T> parse_int_list(std::string_view s) {
  std::vector<T> out;
  for (auto item : split_list(s)) {
    const auto dots = item.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(parse_number<T>(item));
      continue;
    }
    const T lo = parse_number<T>(trim(item.substr(0, dots)));
    const T hi = parse_number<T>(trim(item.substr(dots + 2)));
    if (hi < lo) throw BadValue{"empty range '" + std::string(item) + "'"};
    for (T v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

std::vector<double> parse_real_list(std::string_view s) {
  std::vector<double> out;
  for (auto item : split_list(s)) out.push_back(parse_real(item));
  return out;
}

template <typename E>
std::vector<E> parse_enum_list(std::string_view s, std::optional<E> (*parse)(std::string_view),
                               const char* kind) {
  std::vector<E> out;
  for (auto item : split_list(s)) {
    const auto v = parse(item);
    if (!v) throw BadValue{"unknown " + std::string(kind) + " '" + std::string(item) + "'"};
    out.push_back(*v);
  }
  return out;
}

template <typename E>
E parse_enum(std::string_view s, std::optional<E> (*parse)(std::string_view), const char* kind) {
  const auto v = parse(s);
  if (!v) throw BadValue{"unknown " + std::string(kind) + " '" + std::string(s) + "'"};
  return *v;
}

using Setter = std::function<void(RunConfig&, std::string_view)>;
using KeyTable = std::map<std::string, std::map<std::string, Setter, std::less<>>, std::less<>>;

const KeyTable& keys() {
  static const KeyTable table = {
      {"kernel",
       {
           {"w_L", [](RunConfig& c, auto v) { c.apsm.params.w_linear = parse_real(v); }},
           {"w_G", [](RunConfig& c, auto v) { c.apsm.params.w_gaussian = parse_real(v); }},
           {"sigma_sq", [](RunConfig& c, auto v) { c.apsm.params.sigma_sq = parse_real(v); }},
       }},
      {"apsm",
       {
           {"window", [](RunConfig& c, auto v) { c.apsm.window = parse_count(v); }},
           {"epsilon", [](RunConfig& c, auto v) { c.apsm.epsilon = parse_real(v); }},
           {"max_atoms", [](RunConfig& c, auto v) { c.apsm.max_atoms = parse_count(v); }},
       }},
      {"channel",
       {
           {"users", [](RunConfig& c, auto v) { c.users = parse_count(v); }},
           {"target_user", [](RunConfig& c, auto v) { c.target_user = parse_count(v); }},
           {"snr_db", [](RunConfig& c, auto v) { c.snr_db = parse_real(v); }},
           {"noise_var",
            [](RunConfig& c, auto v) {
              c.noise_var = parse_real(v);
              c.snr_db.reset();
            }},
           {"power_profile", [](RunConfig& c, auto v) { c.power_profile = parse_real_list(v); }},
       }},
      {"frame",
       {
           {"n_train", [](RunConfig& c, auto v) { c.frame.n_train = parse_count(v); }},
           {"n_data", [](RunConfig& c, auto v) { c.frame.n_data = parse_count(v); }},
           {"subcarriers", [](RunConfig& c, auto v) { c.frame.subcarriers = parse_count(v); }},
           {"agc", [](RunConfig& c, auto v) { c.frame.agc = parse_bool(v); }},
       }},
      {"engine",
       {
           {"stage",
            [](RunConfig& c, auto v) { c.engine.stage = parse_enum(v, &parse_stage, "stage"); }},
           {"tile_atoms", [](RunConfig& c, auto v) { c.engine.tile_atoms = parse_count(v); }},
           {"tile_inputs", [](RunConfig& c, auto v) { c.engine.tile_inputs = parse_count(v); }},
           {"chunk_dim", [](RunConfig& c, auto v) { c.engine.chunk_dim = parse_count(v); }},
           {"workers", [](RunConfig& c, auto v) { c.engine.workers = parse_count(v); }},
           {"deterministic_reduction",
            [](RunConfig& c, auto v) { c.engine.deterministic_reduction = parse_bool(v); }},
           {"precision",
            [](RunConfig& c, auto v) {
              c.engine.precision = parse_enum(v, &parse_precision, "precision");
            }},
       }},
      {"sweep",
       {
           {"schemes",
            [](RunConfig& c, auto v) {
              c.schemes = parse_enum_list(v, &sim::parse_modulation, "modulation");
            }},
           {"antennas",
            [](RunConfig& c, auto v) { c.antennas = parse_int_list<std::size_t>(v); }},
           {"seeds", [](RunConfig& c, auto v) { c.seeds = parse_int_list<std::uint64_t>(v); }},
       }},
      {"output",
       {
           {"csv", [](RunConfig& c, auto v) { c.csv_path = std::filesystem::path(v); }},
           {"json", [](RunConfig& c, auto v) { c.json_path = std::filesystem::path(v); }},
           {"frame_dir", [](RunConfig& c, auto v) { c.frame_dir = std::filesystem::path(v); }},
       }},
      {"bench",
       {
           {"dict_sizes",
            [](RunConfig& c, auto v) { c.bench.dict_sizes = parse_int_list<std::size_t>(v); }},
           {"batch_sizes",
            [](RunConfig& c, auto v) { c.bench.batch_sizes = parse_int_list<std::size_t>(v); }},
           {"stages",
            [](RunConfig& c, auto v) { c.bench.stages = parse_enum_list(v, &parse_stage, "stage"); }},
           {"workers",
            [](RunConfig& c, auto v) { c.bench.workers = parse_int_list<std::size_t>(v); }},
           {"repeats", [](RunConfig& c, auto v) { c.bench.repeats = parse_count(v); }},
           {"seed", [](RunConfig& c, auto v) { c.bench.seed = parse_number<std::uint64_t>(v); }},
           {"antennas", [](RunConfig& c, auto v) { c.bench.antennas = parse_count(v); }},
           {"inject_fault_stage",
            [](RunConfig& c, auto v) { c.bench.fault_stage = parse_enum(v, &parse_stage, "stage"); }},
       }},
  };
  return table;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " +
                         what),
      line_(line) {}

std::vector<double> RunConfig::powers() const {
  if (!power_profile.empty()) return power_profile;
  return std::vector<double>(users, 1.0);
}

double RunConfig::noise_variance() const {
  if (noise_var) return *noise_var;
  const auto p = powers();
  return sim::noise_var_for_snr(*snr_db, p);
}

void RunConfig::validate() const {
  apsm.validate();
  engine.validate();
  if (users < 1) throw ParameterError("channel.users must be at least 1");
  if (target_user >= users) throw ParameterError("channel.target_user must be below users");
  if (!power_profile.empty() && power_profile.size() != users) {
    throw ParameterError("channel.power_profile needs one entry per user");
  }
  for (double p : power_profile) {
    if (!(p > 0.0)) throw ParameterError("channel.power_profile entries must be positive");
  }
  if (noise_var && !(*noise_var >= 0.0)) throw ParameterError("channel.noise_var must be >= 0");
  if (frame.n_data < 1) throw ParameterError("frame.n_data must be at least 1");
  if (frame.subcarriers < 1) throw ParameterError("frame.subcarriers must be at least 1");
  if (schemes.empty() || antennas.empty() || seeds.empty()) {
    throw ParameterError("sweep axes must be nonempty");
  }
  for (std::size_t m : antennas) {
    if (m < 1) throw ParameterError("sweep.antennas entries must be at least 1");
  }
  bench.validate();
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  const auto& table = keys();
  const std::map<std::string, Setter, std::less<>>* section = nullptr;
  std::string section_name;
  std::set<std::string> seen;
  bool saw_snr = false;
  bool saw_noise = false;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, line_no, "unterminated section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      const auto it = table.find(name);
      if (it == table.end()) {
        throw ConfigError(source, line_no, "unknown section [" + std::string(name) + "]");
      }
      section = &it->second;
      section_name = it->first;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source, line_no, "expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!section) {
      throw ConfigError(source, line_no, "key '" + std::string(key) + "' outside of a section");
    }
    const auto setter = section->find(key);
    if (setter == section->end()) {
      throw ConfigError(source, line_no,
                        "unknown key '" + std::string(key) + "' in [" + section_name + "]");
    }
    const std::string qualified = section_name + "." + std::string(key);
    if (!seen.insert(qualified).second) {
      throw ConfigError(source, line_no, "duplicate key '" + qualified + "'");
    }
    if (qualified == "channel.snr_db") saw_snr = true;
    if (qualified == "channel.noise_var") saw_noise = true;
    try {
      setter->second(cfg, value);
    } catch (const BadValue& e) {
      throw ConfigError(source, line_no, "key '" + qualified + "': " + e.why);
    }
  }

  if (saw_snr && saw_noise) {
    throw ConfigError(source, 0, "channel.snr_db and channel.noise_var are mutually exclusive");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source, 0, e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
  return parse_config(in, path.string());
}

}  // namespace apsm::cli
