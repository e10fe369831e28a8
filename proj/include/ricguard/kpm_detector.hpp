#ifndef RICGUARD_KPM_DETECTOR_HPP_
#define RICGUARD_KPM_DETECTOR_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ricguard/anomaly_verdict.hpp"
#include "ricguard/kpm_record.hpp"
#include "ricguard/timing.hpp"

namespace ricguard {

inline constexpr std::size_t kSequenceLength = 10;

/// Per-feature standardisation over the six measurements.
struct FeatureScaler {
  FeatureVector mean{};
  FeatureVector stddev{};  // all > 0

  FeatureVector normalize(const FeatureVector& x) const;
  FeatureVector denormalize(const FeatureVector& z) const;
};

/// Population mean and standard deviation. Throws Errc::fit with the column
/// name when fewer than two records are given or a feature is constant.
FeatureScaler fit_scaler(std::span<const KpmRecord> records);

/// Ten normalised inputs and the normalised record that follows them.
struct SequenceWindow {
  std::array<FeatureVector, kSequenceLength> inputs{};
  FeatureVector target{};
};

/// History of one UE plus the record to score. `history` holds exactly
/// kSequenceLength records at 1 s spacing; `next` follows the last one.
struct RecordWindow {
  std::vector<KpmRecord> history;
  KpmRecord next;
};

SequenceWindow normalize_window(const FeatureScaler& scaler, std::span<const KpmRecord> history,
                                const KpmRecord& next);

struct TrainingConfig {
  std::size_t hidden_size = 32;
  std::size_t epochs = 30;
  double learning_rate = 1e-3;
  std::uint64_t rng_seed = 1;
  std::size_t batch_size = 64;  // 0 means full batch
};

/// Single-layer LSTM next-step forecaster.
///
/// The forecast is the last input plus a linear read-out of the final hidden
/// state, so an untrained model starts from persistence. Parameters are one
/// flat vector laid out as W (4H x 6), U (4H x H), b (4H), V (6 x H), c (6),
/// row-major, gate blocks ordered input, forget, cell, output.
class SequenceModel {
 public:
  static constexpr std::size_t kInputs = kFeatureCount;

  SequenceModel() = default;
  /// Randomly initialised model. Throws Errc::contract for hidden_size 0.
  SequenceModel(std::size_t hidden_size, std::uint64_t seed);

  std::size_t hidden_size() const noexcept { return hidden_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> parameters() noexcept { return params_; }
  /// Throws Errc::contract on size mismatch or non-finite values.
  void set_parameters(std::span<const double> values);

  FeatureVector predict(const SequenceWindow& window) const;

  /// Mean over windows of the per-window mean squared forecast error.
  double loss(std::span<const SequenceWindow> windows) const;

  /// Same loss; writes d(loss)/d(params) into `gradient` (resized).
  double loss_and_gradient(std::span<const SequenceWindow> windows, std::vector<double>& gradient) const;

  /// Multiply-accumulates per forecast; drives the cost-model timing.
  std::size_t macs_per_forecast() const noexcept;

  friend bool operator==(const SequenceModel&, const SequenceModel&) = default;

 private:
  std::size_t hidden_ = 0;
  std::vector<double> params_;
};

struct TrainingReport {
  std::vector<double> epoch_loss;  // mean minibatch loss per epoch
};

/// Mini-batch Adam on next-step MSE. Deterministic for a given rng_seed.
/// Throws Errc::training on a non-finite loss, Errc::contract on no windows.
SequenceModel train_model(std::span<const SequenceWindow> windows, const TrainingConfig& config,
                          TrainingReport* report = nullptr);

/// Mean squared error between the forecast and the normalised `next`.
/// Throws Errc::contract unless the window holds ten records of one UE at
/// 1 s spacing and `next` is the same UE one second later.
double score_window(const SequenceModel& model, const FeatureScaler& scaler, std::span<const KpmRecord> window,
                    const KpmRecord& next);

/// Scores a batch of windows in one pass.
std::vector<double> score_batch(const SequenceModel& model, const FeatureScaler& scaler,
                                std::span<const RecordWindow> windows);

inline constexpr double kDefaultThresholdQuantile = 0.995;
inline constexpr std::size_t kMinCalibrationWindows = 500;

/// Nearest-rank quantile of benign validation scores; quantile 1 is the max.
/// Throws Errc::calibration below kMinCalibrationWindows, Errc::domain for a
/// quantile outside (0, 1].
double calibrate_threshold(const SequenceModel& model, const FeatureScaler& scaler,
                           std::span<const RecordWindow> benign_validation, double quantile = kDefaultThresholdQuantile);
double quantile_threshold(std::vector<double> scores, double quantile);

/// Forecast of the record one tick after a ten-record history, clipped at zero.
KpmRecord forecast_next(const SequenceModel& model, const FeatureScaler& scaler, std::span<const KpmRecord> history);

/// Thresholds for histories whose last d records are forecasts standing in
/// for flagged or missing ones, d = 1..kSequenceLength (index d - 1). Each
/// is the nearest-rank quantile of benign scores at that depth, taken over
/// contiguous per-UE series. Throws Errc::calibration with fewer than
/// kMinCalibrationWindows samples at some depth.
std::vector<double> calibrate_imputed_thresholds(const SequenceModel& model, const FeatureScaler& scaler,
                                                 std::span<const std::vector<KpmRecord>> benign_series,
                                                 double quantile = kDefaultThresholdQuantile);

/// score/threshold in (1,2] small, (2,4] moderate, above 4 significant.
/// Throws Errc::contract when score <= threshold.
Magnitude classify_magnitude(double score, double threshold);

AnomalyVerdict make_verdict(const KpmRecord& record, double score, double threshold);

struct DetectionMetrics {
  std::optional<double> adr_pct;  // absent with no poisoned records
  std::optional<double> fpr_pct;  // absent with no benign records
  double mean_latency_ms = 0.0;
  std::size_t poisoned = 0;
  std::size_t poisoned_flagged = 0;
  std::size_t benign = 0;
  std::size_t benign_flagged = 0;
};

/// `labels[i]` must describe `verdicts[i]` (same UE and timestamp), otherwise
/// Errc::contract.
DetectionMetrics evaluate(std::span<const AnomalyVerdict> verdicts, std::span<const GroundTruthLabel> labels);

/// Trained model, scaler and thresholds. Immutable once built.
struct DetectorBundle {
  SequenceModel model;
  FeatureScaler scaler;
  double threshold = 0.0;                  // history of verified records only
  std::vector<double> imputed_thresholds;  // optional, see calibrate_imputed_thresholds

  /// Threshold for a history ending in `imputed` forecasts. Falls back to
  /// `threshold` when no imputed thresholds are present.
  double threshold_for(std::size_t imputed) const noexcept;

  /// Binary file: "KPMD", u32 version, u32 hidden size, scaler means and
  /// standard deviations, model parameters, threshold, then u32 count and
  /// the imputed thresholds. Big-endian throughout. Version 1 files end
  /// after the threshold.
  void save(const std::string& path) const;
  static DetectorBundle load(const std::string& path);
};

/// Streaming detector: keeps the last ten verified records of each UE and
/// scores every new record against them. Flagged records never enter the
/// history; the forecast stands in for them so windows stay contiguous, and
/// the threshold follows the number of trailing forecasts in the history.
/// The first ten records of a UE only seed its history and are not scored.
class PoisoningDetector {
 public:
  PoisoningDetector(std::shared_ptr<const DetectorBundle> bundle, TimingMode timing = TimingMode::wall);

  struct Result {
    std::vector<AnomalyVerdict> verdicts;  // scored records, input order
    std::vector<KpmRecord> accepted;       // verified records, incl. warm-up ones
    std::vector<KpmRecord> flagged;
    double elapsed_ms = 0.0;               // whole tick, wall or cost model
  };

  /// Processes the records of one telemetry tick.
  Result process_tick(std::span<const KpmRecord> records);

  /// Missing ticks up to this many are bridged with forecasts; longer gaps
  /// restart the UE's warm-up.
  static constexpr std::size_t kMaxBridgedGap = kSequenceLength;

 private:
  std::shared_ptr<const DetectorBundle> bundle_;
  TimingMode timing_;
  struct UeState {
    std::deque<KpmRecord> history;
    std::size_t imputed = 0;  // trailing forecasts in history
  };
  std::unordered_map<std::uint32_t, UeState> state_;
};

}  // namespace ricguard

#endif  // RICGUARD_KPM_DETECTOR_HPP_
