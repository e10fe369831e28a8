#ifndef RICGUARD_HARNESS_HPP_
#define RICGUARD_HARNESS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ricguard/attestation.hpp"
#include "ricguard/emulator.hpp"
#include "ricguard/inspector.hpp"
#include "ricguard/kpm_detector.hpp"
#include "ricguard/mitigation.hpp"
#include "ricguard/telemetry_store.hpp"
#include "ricguard/timing.hpp"

namespace ricguard {

/// Everything the experiment runners read. Built from defaults, then a
/// configuration file, then command-line flags.
struct HarnessOptions {
  std::uint64_t seed = 1;
  std::size_t runs = 10;
  std::filesystem::path out_dir;  // empty: no files written
  MatcherKind matcher = MatcherKind::naive;
  TimingMode timing = TimingMode::wall;

  std::optional<std::uint32_t> ues_per_cell;  // inspector experiment override
  std::vector<double> af_grid{1.2, 1.3, 1.4, 1.5};

  std::string rulebook_path;  // empty: seeded synthetic 100-pattern rulebook
  std::string policy_path;    // empty: built-in defaults
  std::string model_path;     // empty: train a bundle

  // Detector training and evaluation.
  TrainingConfig training{};
  std::size_t train_ticks = 300;
  std::size_t live_ticks = 200;
  double threshold_quantile = kDefaultThresholdQuantile;

  // Attestation experiment.
  std::vector<double> image_sizes_mb{8.5, 16.0};
  std::size_t attestation_rounds = 20;
  std::uint64_t attestation_period_ms = 5000;

  // Use case.
  std::vector<std::uint32_t> use_case_ues{50, 500};
  double consumer_cost_ms = 0.5;
  double use_case_xapp_mb = 8.5;
  bool attest_during_use_case = true;

  /// Scenario field overrides, optionally scoped: "loops" applies to every
  /// preset, "inspector.loops" only to the inspector experiment. Scopes are
  /// inspector, detector and use_case.
  std::map<std::string, std::string> scenario_overrides;
};

/// Flat `key = value` file; '#' comments. Unknown keys are an error.
/// Throws Errc::config or Errc::io.
void apply_config_file(HarnessOptions& opts, const std::filesystem::path& path);
void apply_config_entry(HarnessOptions& opts, const std::string& key, const std::string& value);

/// Applies overrides for `scope` onto a preset. Throws Errc::config.
void apply_scenario_overrides(ScenarioConfig& config, const std::map<std::string, std::string>& overrides,
                              const std::string& scope);

/// Seed of run `index` of an experiment stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

std::shared_ptr<const SignatureSet> load_or_make_rulebook(const HarnessOptions& opts);
/// Rulebook actions, then the policy file when configured.
MitigationPolicy load_policy_for(const HarnessOptions& opts, const SignatureSet& rulebook);

// ---------------------------------------------------------------------------
// Inspector experiment

struct KindLatency {
  E2MessageKind kind;
  LatencySummary summary;
};

struct InspectorRun {
  std::vector<KindLatency> per_kind;  // kinds seen in the run
  std::optional<LatencySummary> of(E2MessageKind kind) const;
};

struct InspectorResult {
  std::vector<InspectorRun> runs;
  std::vector<KindLatency> overall;
  std::size_t injected = 0;
  std::size_t detected = 0;           // injected and hit with the injected id
  std::size_t benign = 0;
  std::size_t false_positives = 0;
  std::size_t malicious_dispatched = 0;  // must stay 0
  std::size_t blocked_at_ingress = 0;

  std::optional<LatencySummary> of(E2MessageKind kind) const;
  double detection_rate_pct() const;
  double false_positive_rate_pct() const;
};

/// runs x loops ticks of the inspector preset through frame decode, ingress
/// inspection and mitigation. Writes inspector.csv and inspector_summary.csv.
InspectorResult run_inspector_experiment(const HarnessOptions& opts);

// ---------------------------------------------------------------------------
// Detector experiment

struct TrainingData {
  std::vector<KpmRecord> train_records;
  std::vector<SequenceWindow> train_windows;
  std::vector<RecordWindow> validation_windows;
  std::vector<std::vector<KpmRecord>> validation_series;  // per UE, contiguous
};

/// Benign detector-preset stream split 80/20 by time into training windows
/// and validation windows.
TrainingData collect_training_data(const HarnessOptions& opts);

struct TrainedDetector {
  std::shared_ptr<const DetectorBundle> bundle;
  TrainingReport report;
  double training_seconds = 0.0;
  double validation_fpr_pct = 0.0;
};

TrainedDetector train_detector(const HarnessOptions& opts);
/// model_path when set, otherwise train_detector().
std::shared_ptr<const DetectorBundle> obtain_bundle(const HarnessOptions& opts, TrainedDetector* trained = nullptr);

struct AfResult {
  double af = 1.0;
  DetectionMetrics metrics;
  double benign_score_mean = 0.0;
  double benign_score_sd = 0.0;
  double poisoned_score_mean = 0.0;
  double max_tick_ms = 0.0;  // largest per-tick detector time
};

struct DetectorResult {
  std::vector<AfResult> per_af;
  std::size_t stored_flagged = 0;  // flagged records found in the store; must be 0
};

/// Live runs per AF with poisoning, scored by the streaming detector with
/// DropData mitigation. Writes detector.csv.
DetectorResult run_detector_experiment(const HarnessOptions& opts, const DetectorBundle& bundle);

// ---------------------------------------------------------------------------
// Attestation experiment

struct AttestationSeries {
  double size_mb = 0.0;
  std::vector<double> round_latency_ms;  // mean over runs, index 0 is round 1
  std::vector<std::vector<double>> per_run;
  std::size_t clean_violations = 0;
  double steady_state_ms() const;        // mean of rounds 2..N
  double steady_state_ms_per_mb() const;
};

struct AttestationResult {
  std::vector<AttestationSeries> series;
  bool injection_detected = false;
  bool injected_xapp_blocked = false;
  std::size_t incident_reports = 0;
};

/// Rounds every attestation_period_ms of simulated time per image size,
/// then one injection trial under the high-impact policy. Writes attestation.csv.
AttestationResult run_attestation_experiment(const HarnessOptions& opts);

// ---------------------------------------------------------------------------
// Use case

struct LoopMetrics {
  std::size_t run = 0;
  std::size_t loop = 0;
  double inspector_ms = 0.0;
  double detector_ms = 0.0;
  double shift_ms = 0.0;
  double loop_wall_ms = 0.0;
  double baseline_loop_wall_ms = 0.0;
  std::size_t decision_records = 0;
};

struct Stat {
  double min = 0.0, max = 0.0, avg = 0.0;
};

struct UseCaseResult {
  std::uint32_t ue_count = 0;
  std::vector<LoopMetrics> loops;
  Stat inspector, detector, shift;
  double mean_component_ms = 0.0;  // mean over loops of inspector + detector
  std::size_t budget_violations = 0;
  double baseline_runtime_ms = 0.0;     // sum of max(1000, loop wall) over loops
  double safeguarded_runtime_ms = 0.0;
  std::size_t emitted_records = 0;
  std::size_t baseline_stored = 0;
  std::size_t safeguarded_stored = 0;
  std::size_t flagged_records = 0;
  std::size_t dropped_by_inspector = 0;
  std::size_t stored_flagged = 0;  // must be 0
  std::size_t attestation_rounds = 0;
  std::size_t attestation_violations = 0;
};

/// Consumer xApp loop over one tick of the store: reads the tick's records,
/// runs the stand-in classifier and reports its processing time.
struct ConsumerDecision {
  std::size_t records = 0;
  std::size_t suspicious_ues = 0;
  double processing_ms = 0.0;
};
ConsumerDecision consumer_xapp_loop(const TelemetryStore& store, std::uint64_t tick, double fixed_cost_ms,
                                    TimingMode timing);

/// Baseline and safeguarded pipelines over the same emitted traffic.
/// Writes use_case_<ues>.csv.
UseCaseResult run_use_case(const HarnessOptions& opts, std::uint32_t ue_count, std::shared_ptr<const DetectorBundle> bundle);

Stat stat_of(const std::vector<double>& values);

}  // namespace ricguard

#endif  // RICGUARD_HARNESS_HPP_
