#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsm/core/cloud_io.hpp"
#include "nsm/core/error.hpp"
#include "nsm/core/hash.hpp"
#include "nsm/core/log.hpp"
#include "nsm/features.hpp"
#include "nsm/forest.hpp"
#include "nsm/ground_filter.hpp"
#include "nsm/matching.hpp"
#include "nsm/registration.hpp"
#include "nsm/segmentation.hpp"

namespace nsm {

enum class Provenance { default_value, file, flag };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::default_value: return "default";
    case Provenance::file: return "file";
    case Provenance::flag: return "flag";
  }
  return "default";
}

struct RegistrationParams {
  double epsilon = 0.4;
  std::size_t tau = 4;
  std::size_t ransac_iterations = 1000;
  double inlier_radius = 0.4;

  ConsistencyParams consistency() const { return {epsilon, tau}; }
  RansacParams ransac(std::uint64_t seed) const { return {ransac_iterations, inlier_radius, seed}; }
  void validate() const {
    consistency().validate();
    ransac(0).validate();
  }
};

/**
 * @brief Every tunable of the pipeline, with where each value came from.
 *
 * Values are addressed as "section.key". Precedence: flag > file > default.
 */
class PipelineConfig {
 public:
  PmfParams pmf;
  SegmentationParams segmentation;
  GestaltParams gestalt;
  RfParams rf;
  MatchParams matching;
  RegistrationParams registration;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string log_level = "warn";

  PipelineConfig() { register_keys(); }
  PipelineConfig(const PipelineConfig& o) : PipelineConfig() { copy_values(o); }
  PipelineConfig& operator=(const PipelineConfig& o) {
    if (this != &o) copy_values(o);
    return *this;
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& k : keys_) out.push_back(k.name);
    return out;
  }

  bool has_key(std::string_view name) const { return find(name) != nullptr; }

  /// Sets one value from its textual form and records the provenance.
  void set(std::string_view name, std::string_view value, Provenance from) {
    Key* k = find(name);
    if (!k) throw ValidationError("unknown config key '" + std::string(name) + "'");
    const std::string text = unquote(trim(value));
    try {
      k->set(text);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ValidationError("config key '" + std::string(name) + "': bad value '" + text + "'");
    }
    const Provenance before = provenance_.count(k->name) ? provenance_.at(k->name) : Provenance::default_value;
    if (from == Provenance::flag && before == Provenance::file) {
      log_info("config: flag overrides file value for " + k->name + " (now " + text + ")");
    }
    provenance_[k->name] = from;
  }

  Provenance provenance(std::string_view name) const {
    const auto it = provenance_.find(std::string(name));
    return it == provenance_.end() ? Provenance::default_value : it->second;
  }

  std::string get(std::string_view name) const {
    const Key* k = find(name);
    if (!k) throw ValidationError("unknown config key '" + std::string(name) + "'");
    return k->get();
  }

  /// TOML-like text: `[section]` headers, `key = value`, `#` comments.
  void merge_text(std::string_view text, const std::string& origin) {
    std::string section;
    std::size_t line_no = 0;
    std::map<std::string, std::size_t> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = strip_comment(raw);
      line = trim(line);
      if (line.empty()) continue;
      const std::string where = origin + ":" + std::to_string(line_no);
      if (line.front() == '[') {
        if (line.back() != ']') throw ValidationError(where + ": malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw ValidationError(where + ": empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string full = section.empty() ? key : section + "." + key;
      if (auto [it, fresh] = seen.emplace(full, line_no); !fresh) {
        throw ValidationError(where + ": duplicate key '" + full + "' (first on line " + std::to_string(it->second) + ")");
      }
      try {
        set(full, line.substr(eq + 1), Provenance::file);
      } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
      }
    }
  }

  void merge_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("config file not found: " + path.string());
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    merge_text(buf.str(), path.string());
  }

  /// Validates every section together; call before any stage runs.
  void validate() const {
    pmf.validate();
    segmentation.validate();
    gestalt.validate();
    rf.validate();
    matching.validate();
    registration.validate();
    if (threads < 1) throw ValidationError("run.threads must be >= 1");
    try {
      parse_log_level(log_level);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
  }

  /// Canonical text of the parameters that shape map contents (pmf, segmentation, gestalt).
  std::string map_signature() const {
    std::string s;
    for (const auto& k : keys_) {
      if (k.name.starts_with("pmf.") || k.name.starts_with("segmentation.") || k.name.starts_with("gestalt.")) {
        s += k.name + "=" + k.get() + ";";
      }
    }
    return s;
  }

  std::string fingerprint() const { return hex64(fnv1a64(map_signature())); }

  /// Section-keyed values (numbers stay numbers).
  nlohmann::json to_json() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& k : keys_) {
      const auto dot = k.name.find('.');
      out[k.name.substr(0, dot)][k.name.substr(dot + 1)] = nlohmann::json::parse(k.json());
    }
    return out;
  }

  /// Resolved config with provenance, one object per key.
  nlohmann::json to_json_with_provenance() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& k : keys_) {
      out[k.name] = {{"value", nlohmann::json::parse(k.json())}, {"source", std::string(to_string(provenance(k.name)))}};
    }
    return out;
  }

  /// Map-shaping subset stored in map headers.
  nlohmann::json map_params_json() const {
    const auto all = to_json();
    return {{"pmf", all["pmf"]}, {"segmentation", all["segmentation"]}, {"gestalt", all["gestalt"]}};
  }

 private:
  struct Key {
    std::string name;
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;   ///< canonical text
    std::function<std::string()> json;  ///< JSON literal
  };

  std::vector<Key> keys_;
  std::map<std::string, Provenance> provenance_;

  void copy_values(const PipelineConfig& o) {
    pmf = o.pmf;
    segmentation = o.segmentation;
    gestalt = o.gestalt;
    rf = o.rf;
    matching = o.matching;
    registration = o.registration;
    seed = o.seed;
    threads = o.threads;
    log_level = o.log_level;
    provenance_ = o.provenance_;
  }

  Key* find(std::string_view name) {
    for (auto& k : keys_)
      if (k.name == name) return &k;
    return nullptr;
  }
  const Key* find(std::string_view name) const {
    for (const auto& k : keys_)
      if (k.name == name) return &k;
    return nullptr;
  }

  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
  }

  static std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
  }

  static std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
  }

  static double to_double(const std::string& s) {
    double v = 0.0;
    if (!detail::parse_double(s, v)) throw ValidationError("expected a number, got '" + s + "'");
    return v;
  }

  template <class U>
  static U to_unsigned(const std::string& s) {
    U v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ValidationError("expected a non-negative integer, got '" + s + "'");
    return v;
  }

  static bool to_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ValidationError("expected true or false, got '" + s + "'");
  }

  void add_double(std::string name, double& ref) {
    keys_.push_back({std::move(name), [&ref](const std::string& v) { ref = to_double(v); },
                     [&ref] { return detail::format_double(ref); }, [&ref] { return nlohmann::json(ref).dump(); }});
  }

  template <class U>
  void add_unsigned(std::string name, U& ref) {
    keys_.push_back({std::move(name), [&ref](const std::string& v) { ref = to_unsigned<U>(v); },
                     [&ref] { return std::to_string(ref); }, [&ref] { return std::to_string(ref); }});
  }

  void add_int(std::string name, int& ref) {
    keys_.push_back({std::move(name),
                     [&ref](const std::string& v) {
                       int x = 0;
                       const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
                       if (ec != std::errc{} || ptr != v.data() + v.size()) throw ValidationError("expected an integer, got '" + v + "'");
                       ref = x;
                     },
                     [&ref] { return std::to_string(ref); }, [&ref] { return std::to_string(ref); }});
  }

  void add_bool(std::string name, bool& ref) {
    keys_.push_back({std::move(name), [&ref](const std::string& v) { ref = to_bool(v); },
                     [&ref] { return std::string(ref ? "true" : "false"); },
                     [&ref] { return std::string(ref ? "true" : "false"); }});
  }

  void add_choice(std::string name, std::function<void(const std::string&)> set, std::function<std::string()> get) {
    auto json = [get] { return nlohmann::json(get()).dump(); };
    keys_.push_back({std::move(name), std::move(set), std::move(get), std::move(json)});
  }

  void register_keys() {
    keys_.clear();
    add_double("pmf.cell_size", pmf.cell_size);
    add_int("pmf.initial_window", pmf.initial_window);
    add_int("pmf.max_window", pmf.max_window);
    add_double("pmf.slope", pmf.slope);
    add_double("pmf.initial_height_thresh", pmf.initial_height_thresh);
    add_double("pmf.max_height_thresh", pmf.max_height_thresh);
    add_choice(
        "pmf.window_growth",
        [this](const std::string& v) {
          if (v == "linear") pmf.window_growth = WindowGrowth::linear;
          else if (v == "exponential") pmf.window_growth = WindowGrowth::exponential;
          else throw ValidationError("pmf.window_growth must be linear or exponential");
        },
        [this] { return std::string(pmf.window_growth == WindowGrowth::linear ? "linear" : "exponential"); });

    add_double("segmentation.max_distance", segmentation.max_distance);
    add_unsigned("segmentation.min_points", segmentation.min_points);
    add_unsigned("segmentation.max_points", segmentation.max_points);

    add_double("gestalt.radius", gestalt.radius);
    add_unsigned("gestalt.radial_divisions", gestalt.radial_divisions);
    add_unsigned("gestalt.azimuthal_divisions", gestalt.azimuthal_divisions);

    add_unsigned("rf.trees", rf.n_trees);
    add_unsigned("rf.depth", rf.max_depth);
    add_unsigned("rf.min_leaf", rf.min_leaf);
    add_unsigned("rf.features_per_split", rf.features_per_split);
    add_double("rf.bootstrap", rf.bootstrap);
    add_choice(
        "rf.balance",
        [this](const std::string& v) {
          if (v == "none") rf.balance = ClassBalance::none;
          else if (v == "downsample") rf.balance = ClassBalance::downsample;
          else if (v == "weight") rf.balance = ClassBalance::weight;
          else throw ValidationError("rf.balance must be none, downsample or weight");
        },
        [this] {
          switch (rf.balance) {
            case ClassBalance::none: return std::string("none");
            case ClassBalance::weight: return std::string("weight");
            default: return std::string("downsample");
          }
        });
    add_double("rf.negative_ratio", rf.negative_ratio);
    add_bool("rf.allow_single_class", rf.allow_single_class);

    add_unsigned("matching.k_neighbours", matching.k_neighbours);
    add_double("matching.rf_threshold", matching.rf_threshold);
    add_bool("matching.standardize", matching.standardize);

    add_double("registration.epsilon", registration.epsilon);
    add_unsigned("registration.tau", registration.tau);
    add_unsigned("registration.ransac_iterations", registration.ransac_iterations);
    add_double("registration.inlier_radius", registration.inlier_radius);

    add_unsigned("run.seed", seed);
    add_unsigned("run.threads", threads);
    add_choice(
        "run.log_level",
        [this](const std::string& v) {
          parse_log_level(v);
          log_level = v;
        },
        [this] { return log_level; });
  }
};

}  // namespace nsm
