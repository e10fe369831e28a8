#include <charconv>
#include <fstream>
#include <sstream>

#include "ricguard/error.hpp"
#include "ricguard/harness.hpp"

namespace ricguard {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      out = static_cast<T>(std::stod(value, &used));
      if (used == value.size()) return out;
    } catch (const std::logic_error&) {
    }
  } else {
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec == std::errc{} && ptr == end) return out;
  }
  throw Error(Errc::config, "invalid value '" + value + "' for " + key);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(Errc::config, "invalid boolean '" + value + "' for " + key);
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number<T>(key, item));
  }
  if (out.empty()) throw Error(Errc::config, "empty list for " + key);
  return out;
}

const char* const kScopes[] = {"inspector.", "detector.", "use_case."};

bool is_scenario_key(const std::string& key) {
  static const char* const kKeys[] = {
      "node_count",         "cells_per_node",         "ues_per_cell",        "total_ues",
      "malicious_node_fraction", "malicious_message_fraction", "amplification_factor",
      "poison_target_fraction", "loops",             "size_calibrated",     "ar_coefficient",
      "variation_coefficient", "baseline_jitter",     "covariance_scaling",  "poison_warmup_ticks",
      "poison_start_probability", "poison_min_ticks", "poison_max_ticks"};
  std::string bare = key;
  for (const char* scope : kScopes)
    if (key.rfind(scope, 0) == 0) bare = key.substr(std::char_traits<char>::length(scope));
  for (const char* k : kKeys)
    if (bare == k) return true;
  return false;
}

}  // namespace

void apply_config_entry(HarnessOptions& o, const std::string& key, const std::string& value) {
  if (is_scenario_key(key)) {
    o.scenario_overrides[key] = value;
  } else if (key == "seed" || key == "rng_seed") {
    o.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "runs") {
    o.runs = parse_number<std::size_t>(key, value);
    if (o.runs == 0) throw Error(Errc::config, "runs must be positive");
  } else if (key == "out") {
    o.out_dir = value;
  } else if (key == "matcher") {
    const auto m = matcher_from_string(value);
    if (!m) throw Error(Errc::config, "matcher must be naive or automaton");
    o.matcher = *m;
  } else if (key == "deterministic_timing") {
    o.timing = parse_bool(key, value) ? TimingMode::cost_model : TimingMode::wall;
  } else if (key == "af" || key == "af_grid") {
    o.af_grid = parse_list<double>(key, value);
  } else if (key == "rulebook") {
    o.rulebook_path = value;
  } else if (key == "policy") {
    o.policy_path = value;
  } else if (key == "model_bundle") {
    o.model_path = value;
  } else if (key == "hidden_size") {
    o.training.hidden_size = parse_number<std::size_t>(key, value);
  } else if (key == "epochs") {
    o.training.epochs = parse_number<std::size_t>(key, value);
  } else if (key == "learning_rate") {
    o.training.learning_rate = parse_number<double>(key, value);
  } else if (key == "batch_size") {
    o.training.batch_size = parse_number<std::size_t>(key, value);
  } else if (key == "training_seed") {
    o.training.rng_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "train_ticks") {
    o.train_ticks = parse_number<std::size_t>(key, value);
  } else if (key == "live_ticks") {
    o.live_ticks = parse_number<std::size_t>(key, value);
  } else if (key == "threshold_quantile") {
    o.threshold_quantile = parse_number<double>(key, value);
  } else if (key == "image_sizes_mb") {
    o.image_sizes_mb = parse_list<double>(key, value);
  } else if (key == "attestation_rounds") {
    o.attestation_rounds = parse_number<std::size_t>(key, value);
  } else if (key == "attestation_period_ms") {
    o.attestation_period_ms = parse_number<std::uint64_t>(key, value);
  } else if (key == "use_case_ues") {
    o.use_case_ues = parse_list<std::uint32_t>(key, value);
  } else if (key == "consumer_cost_ms") {
    o.consumer_cost_ms = parse_number<double>(key, value);
  } else if (key == "use_case_xapp_mb") {
    o.use_case_xapp_mb = parse_number<double>(key, value);
  } else if (key == "attest_during_use_case") {
    o.attest_during_use_case = parse_bool(key, value);
  } else if (key == "inspector_ues_per_cell") {
    o.ues_per_cell = parse_number<std::uint32_t>(key, value);
  } else {
    throw Error(Errc::config, "unknown configuration key '" + key + "'");
  }
}

void apply_config_file(HarnessOptions& opts, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open configuration " + path.string());
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::config, path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    apply_config_entry(opts, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void apply_scenario_overrides(ScenarioConfig& c, const std::map<std::string, std::string>& overrides,
                              const std::string& scope) {
  auto apply = [&c](const std::string& key, const std::string& v) {
    if (key == "node_count") c.node_count = parse_number<std::uint32_t>(key, v);
    else if (key == "cells_per_node") c.cells_per_node = parse_number<std::uint32_t>(key, v);
    else if (key == "ues_per_cell") c.ues_per_cell = parse_number<std::uint32_t>(key, v);
    else if (key == "total_ues") c.total_ues = parse_number<std::uint32_t>(key, v);
    else if (key == "malicious_node_fraction") c.malicious_node_fraction = parse_number<double>(key, v);
    else if (key == "malicious_message_fraction") c.malicious_message_fraction = parse_number<double>(key, v);
    else if (key == "amplification_factor") c.amplification_factor = parse_number<double>(key, v);
    else if (key == "poison_target_fraction") c.poison_target_fraction = parse_number<double>(key, v);
    else if (key == "loops") c.loops = parse_number<std::uint64_t>(key, v);
    else if (key == "size_calibrated") c.size_calibrated = parse_bool(key, v);
    else if (key == "ar_coefficient") c.ar_coefficient = parse_number<double>(key, v);
    else if (key == "variation_coefficient") c.variation_coefficient = parse_number<double>(key, v);
    else if (key == "baseline_jitter") c.baseline_jitter = parse_number<double>(key, v);
    else if (key == "poison_warmup_ticks") c.poison_warmup_ticks = parse_number<std::uint64_t>(key, v);
    else if (key == "poison_start_probability") c.poison_start_probability = parse_number<double>(key, v);
    else if (key == "poison_min_ticks") c.poison_min_ticks = parse_number<std::uint32_t>(key, v);
    else if (key == "poison_max_ticks") c.poison_max_ticks = parse_number<std::uint32_t>(key, v);
    else if (key == "covariance_scaling") {
      if (v == "linear") c.covariance_scaling = CovarianceScaling::linear;
      else if (v == "quadratic") c.covariance_scaling = CovarianceScaling::quadratic;
      else throw Error(Errc::config, "covariance_scaling must be linear or quadratic");
    } else {
      throw Error(Errc::config, "unknown scenario key '" + key + "'");
    }
  };
  // Unscoped keys first so scoped ones win.
  for (const auto& [key, value] : overrides)
    if (key.find('.') == std::string::npos) apply(key, value);
  const auto prefix = scope + ".";
  for (const auto& [key, value] : overrides)
    if (key.rfind(prefix, 0) == 0) apply(key.substr(prefix.size()), value);
  c.validate();
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finaliser over the combined inputs
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream * 1'000'003ULL + index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::shared_ptr<const SignatureSet> load_or_make_rulebook(const HarnessOptions& opts) {
  if (!opts.rulebook_path.empty()) return std::make_shared<const SignatureSet>(load_rulebook(opts.rulebook_path));
  return std::make_shared<const SignatureSet>(synthetic_rulebook(100, derive_seed(opts.seed, 0, 0)));
}

MitigationPolicy load_policy_for(const HarnessOptions& opts, const SignatureSet& rulebook) {
  auto base = MitigationPolicy::from_rulebook(rulebook);
  if (opts.policy_path.empty()) return base;
  return load_policy(opts.policy_path, std::move(base));
}

}  // namespace ricguard
