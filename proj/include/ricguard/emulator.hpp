#ifndef RICGUARD_EMULATOR_HPP_
#define RICGUARD_EMULATOR_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ricguard/e2_model.hpp"
#include "ricguard/kpm_record.hpp"
#include "ricguard/signature.hpp"

namespace ricguard {

using Matrix6 = std::array<std::array<double, kFeatureCount>, kFeatureCount>;

enum class Slice : std::uint8_t { embb, urllc };
std::string_view to_string(Slice s) noexcept;

/// Benign traffic profile of one UE: Gaussian baseline around `mean`.
struct UeProfile {
  std::uint32_t ue_id = 0;
  Slice slice = Slice::embb;
  std::uint32_t node_id = 0;
  std::uint32_t cell_id = 0;
  FeatureVector mean{};  // >= 0
  Matrix6 covariance{};  // symmetric PSD
};

/// Poisoned covariance is af * Sigma (linear) or af^2 * Sigma (quadratic).
enum class CovarianceScaling : std::uint8_t { linear, quadratic };

struct ScenarioConfig {
  std::uint32_t node_count = 4;
  std::uint32_t cells_per_node = 3;
  std::uint32_t ues_per_cell = 10;
  std::uint32_t total_ues = 0;  // when non-zero, UEs are spread randomly over cells instead
  double malicious_node_fraction = 0.0;
  double malicious_message_fraction = 0.0;
  double amplification_factor = 1.0;
  double poison_target_fraction = 0.0;
  std::uint64_t loops = 100;
  std::uint64_t rng_seed = 1;
  bool size_calibrated = false;

  // Traffic model.
  double ar_coefficient = 0.8;
  double variation_coefficient = 0.05;  // per-feature std / mean
  double baseline_jitter = 0.2;         // per-UE baseline spread, +/- fraction
  CovarianceScaling covariance_scaling = CovarianceScaling::linear;

  // Poisoning timeframes for targeted UEs.
  std::uint64_t poison_warmup_ticks = 10;  // no poisoning before this tick
  double poison_start_probability = 0.05;
  std::uint32_t poison_min_ticks = 3;
  std::uint32_t poison_max_ticks = 8;

  std::uint32_t cell_count() const noexcept { return node_count * cells_per_node; }
  std::uint32_t ue_count() const noexcept { return total_ues != 0 ? total_ues : ues_per_cell * cell_count(); }

  /// Throws Errc::config on out-of-range fields, including an injection rate
  /// of 1 with malicious nodes present (setup requests could never pass).
  void validate() const;
};

/// Four nodes, twelve cells, 50% malicious nodes, 50% injection, size-calibrated payloads.
ScenarioConfig inspector_preset(std::uint32_t ues_per_cell = 10);
/// Three nodes of three cells, 50 UEs spread randomly, full-mode payloads.
ScenarioConfig detector_preset();
/// Detector topology with `ue_count` UEs.
ScenarioConfig use_case_preset(std::uint32_t ue_count);

/// Slice baselines in dataset column order. URLLC carries 0.2x the eMBB
/// throughput and 2x its packet rates.
FeatureVector slice_baseline(Slice slice);
/// D R D with D = diag(cv * mean) and a fixed throughput/PRB/packet correlation R.
Matrix6 profile_covariance(const FeatureVector& mean, double variation_coefficient);

/// Lower-triangular L with L L^T = m for symmetric PSD m; zero pivots yield zero columns.
Matrix6 cholesky_psd(const Matrix6& m);

/// Draw from N(mean, L L^T), clipped at zero.
FeatureVector sample_gaussian(const FeatureVector& mean, const Matrix6& chol, std::mt19937_64& rng);

struct TickRecords {
  std::vector<KpmRecord> records;  // UE order
  std::vector<GroundTruthLabel> labels;
};

/// Resamples records of targeted UEs from N(af * mu, af * Sigma) (or af^2 * Sigma),
/// clipped at zero, and marks their labels poisoned. `labels` is parallel to `records`.
void poison_records(std::span<KpmRecord> records, std::span<GroundTruthLabel> labels,
                    const std::function<bool(std::uint32_t)>& is_target,
                    const std::function<const UeProfile&(std::uint32_t)>& profile_of, double af,
                    CovarianceScaling scaling, std::mt19937_64& rng);

struct InjectionTruth {
  std::uint32_t signature_id = 0;
  std::size_t offset = 0;
};

/// Splices one uniformly chosen signature at a uniform offset in [0, len].
InjectionTruth inject_signature(E2Message& msg, const SignatureSet& rulebook, std::mt19937_64& rng);

struct EmittedMessage {
  E2Message message;
  std::uint32_t cell_id = 0;  // 0 for non-Indication messages
  std::optional<InjectionTruth> injected;
};

/// Deterministic RAN stand-in driven by one seeded generator on a 1 s tick.
class Emulator {
 public:
  explicit Emulator(ScenarioConfig config, std::shared_ptr<const SignatureSet> rulebook = nullptr);

  const ScenarioConfig& config() const noexcept { return config_; }
  const std::vector<UeProfile>& ues() const noexcept { return ues_; }
  const UeProfile& profile(std::uint32_t ue_id) const;
  bool node_malicious(std::uint32_t node_id) const;
  bool ue_targeted(std::uint32_t ue_id) const;
  std::uint64_t current_tick() const noexcept { return tick_; }

  /// Records of tick `t`, with poisoning applied. Ticks must be generated in
  /// order (`t == current_tick()`) and `t < loops`; otherwise Errc::contract.
  TickRecords generate_tick(std::uint64_t t);

  /// One tick of E2 traffic: at t = 0 a SetupRequest and SubscriptionResponse
  /// per node, then one Indication per populated cell. Messages of malicious
  /// nodes are injected with probability malicious_message_fraction.
  std::vector<EmittedMessage> step(TickRecords* tick_records = nullptr);

  /// One SubscriptionDeleteResponse per node.
  std::vector<EmittedMessage> teardown();

 private:
  void maybe_inject(EmittedMessage& m);

  ScenarioConfig config_;
  std::shared_ptr<const SignatureSet> rulebook_;
  std::mt19937_64 rng_;
  std::vector<UeProfile> ues_;
  std::vector<Matrix6> chol_;
  std::vector<FeatureVector> deviation_;  // AR(1) state per UE
  std::vector<bool> malicious_nodes_;     // index node_id - 1
  std::vector<bool> targeted_;            // index ue_id - 1
  std::vector<std::uint32_t> poison_remaining_;
  std::uint64_t tick_ = 0;
};

}  // namespace ricguard

#endif  // RICGUARD_EMULATOR_HPP_
