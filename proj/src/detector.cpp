#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "ricguard/bytes.hpp"
#include "ricguard/error.hpp"
#include "ricguard/kpm_detector.hpp"

namespace ricguard {

namespace {

constexpr std::uint64_t kTickMs = 1000;

void check_window(std::span<const KpmRecord> window, const KpmRecord& next) {
  if (window.size() != kSequenceLength)
    throw Error(Errc::contract, "window holds " + std::to_string(window.size()) + " records, expected 10");
  const auto ue = window.front().ue_id;
  for (std::size_t t = 0; t < window.size(); ++t) {
    if (window[t].ue_id != ue) throw Error(Errc::contract, "window mixes UE ids");
    if (t > 0 && window[t].timestamp_ms != window[t - 1].timestamp_ms + kTickMs)
      throw Error(Errc::contract, "window timestamps are not at 1 s spacing");
  }
  if (next.ue_id != ue) throw Error(Errc::contract, "scored record belongs to another UE");
  if (next.timestamp_ms != window.back().timestamp_ms + kTickMs)
    throw Error(Errc::contract, "scored record does not follow the window by 1 s");
}

double mse(const FeatureVector& a, const FeatureVector& b) {
  double e = 0.0;
  for (std::size_t k = 0; k < kFeatureCount; ++k) e += (a[k] - b[k]) * (a[k] - b[k]);
  return e / static_cast<double>(kFeatureCount);
}

}  // namespace

double score_window(const SequenceModel& model, const FeatureScaler& scaler, std::span<const KpmRecord> window,
                    const KpmRecord& next) {
  check_window(window, next);
  const auto w = normalize_window(scaler, window, next);
  return mse(model.predict(w), w.target);
}

std::vector<double> score_batch(const SequenceModel& model, const FeatureScaler& scaler,
                                std::span<const RecordWindow> windows) {
  std::vector<double> scores;
  scores.reserve(windows.size());
  for (const auto& w : windows) scores.push_back(score_window(model, scaler, w.history, w.next));
  return scores;
}

double quantile_threshold(std::vector<double> scores, double quantile) {
  if (!(quantile > 0.0 && quantile <= 1.0)) throw Error(Errc::domain, "quantile must lie in (0, 1]");
  if (scores.empty()) throw Error(Errc::calibration, "no scores to calibrate on");
  std::sort(scores.begin(), scores.end());
  const auto n = static_cast<double>(scores.size());
  auto rank = static_cast<std::size_t>(std::ceil(quantile * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, scores.size());
  return scores[rank - 1];
}

double calibrate_threshold(const SequenceModel& model, const FeatureScaler& scaler,
                           std::span<const RecordWindow> benign_validation, double quantile) {
  if (benign_validation.size() < kMinCalibrationWindows)
    throw Error(Errc::calibration, "calibration needs at least 500 windows, got " +
                                       std::to_string(benign_validation.size()));
  return quantile_threshold(score_batch(model, scaler, benign_validation), quantile);
}

KpmRecord forecast_next(const SequenceModel& model, const FeatureScaler& scaler, std::span<const KpmRecord> history) {
  if (history.size() != kSequenceLength)
    throw Error(Errc::contract, "forecast needs exactly ten history records");
  SequenceWindow w;
  for (std::size_t t = 0; t < kSequenceLength; ++t) w.inputs[t] = scaler.normalize(history[t].features);
  KpmRecord r;
  r.ue_id = history.back().ue_id;
  r.timestamp_ms = history.back().timestamp_ms + kTickMs;
  r.features = scaler.denormalize(model.predict(w));
  for (auto& f : r.features) f = std::max(f, 0.0);
  return r;
}

std::vector<double> calibrate_imputed_thresholds(const SequenceModel& model, const FeatureScaler& scaler,
                                                 std::span<const std::vector<KpmRecord>> benign_series,
                                                 double quantile) {
  std::vector<std::vector<double>> scores(kSequenceLength);
  std::vector<KpmRecord> window(kSequenceLength);
  for (const auto& series : benign_series) {
    // Roll forecasts forward from each real window; at depth d the history
    // holds 10 - d real records followed by d forecasts.
    for (std::size_t p = 0; p + 2 * kSequenceLength < series.size(); ++p) {
      std::deque<KpmRecord> h(series.begin() + static_cast<std::ptrdiff_t>(p),
                              series.begin() + static_cast<std::ptrdiff_t>(p + kSequenceLength));
      for (std::size_t d = 1; d <= kSequenceLength; ++d) {
        std::copy(h.begin(), h.end(), window.begin());
        const auto f = forecast_next(model, scaler, window);
        h.pop_front();
        h.push_back(f);
        std::copy(h.begin(), h.end(), window.begin());
        scores[d - 1].push_back(score_window(model, scaler, window, series[p + kSequenceLength + d]));
      }
    }
  }
  std::vector<double> out;
  for (auto& s : scores) {
    if (s.size() < kMinCalibrationWindows)
      throw Error(Errc::calibration, "imputed-depth calibration needs at least 500 windows per depth, got " +
                                         std::to_string(s.size()));
    out.push_back(quantile_threshold(std::move(s), quantile));
  }
  return out;
}

double DetectorBundle::threshold_for(std::size_t imputed) const noexcept {
  if (imputed == 0 || imputed_thresholds.empty()) return threshold;
  return imputed_thresholds[std::min(imputed, imputed_thresholds.size()) - 1];
}

Magnitude classify_magnitude(double score, double threshold) {
  if (!(threshold > 0.0)) throw Error(Errc::contract, "threshold must be positive");
  if (!(score > threshold)) throw Error(Errc::contract, "magnitude requested for a score at or below threshold");
  const double ratio = score / threshold;
  if (ratio <= 2.0) return Magnitude::small;
  if (ratio <= 4.0) return Magnitude::moderate;
  return Magnitude::significant;
}

AnomalyVerdict make_verdict(const KpmRecord& record, double score, double threshold) {
  AnomalyVerdict v;
  v.ue_id = record.ue_id;
  v.timestamp_ms = record.timestamp_ms;
  v.score = score;
  v.threshold = threshold;
  v.is_anomalous = score > threshold;
  v.magnitude = v.is_anomalous ? classify_magnitude(score, threshold) : Magnitude::none;
  return v;
}

DetectionMetrics evaluate(std::span<const AnomalyVerdict> verdicts, std::span<const GroundTruthLabel> labels) {
  if (verdicts.size() != labels.size()) throw Error(Errc::contract, "every verdict needs exactly one label");
  DetectionMetrics m;
  double latency = 0.0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const auto& v = verdicts[i];
    const auto& l = labels[i];
    if (v.ue_id != l.ue_id || v.timestamp_ms != l.timestamp_ms)
      throw Error(Errc::contract, "label does not match verdict record");
    if (l.poisoned) {
      ++m.poisoned;
      m.poisoned_flagged += v.is_anomalous ? 1 : 0;
    } else {
      ++m.benign;
      m.benign_flagged += v.is_anomalous ? 1 : 0;
    }
    latency += v.scoring_latency_ms;
  }
  if (m.poisoned > 0) m.adr_pct = 100.0 * static_cast<double>(m.poisoned_flagged) / static_cast<double>(m.poisoned);
  if (m.benign > 0) m.fpr_pct = 100.0 * static_cast<double>(m.benign_flagged) / static_cast<double>(m.benign);
  if (!verdicts.empty()) m.mean_latency_ms = latency / static_cast<double>(verdicts.size());
  return m;
}

namespace {

constexpr char kBundleMagic[4] = {'K', 'P', 'M', 'D'};
constexpr std::uint32_t kBundleVersion = 2;

}  // namespace

void DetectorBundle::save(const std::string& path) const {
  Bytes out(kBundleMagic, kBundleMagic + 4);
  put_u32(out, kBundleVersion);
  put_u32(out, static_cast<std::uint32_t>(model.hidden_size()));
  for (double v : scaler.mean) put_f64(out, v);
  for (double v : scaler.stddev) put_f64(out, v);
  for (double v : model.parameters()) put_f64(out, v);
  put_f64(out, threshold);
  put_u32(out, static_cast<std::uint32_t>(imputed_thresholds.size()));
  for (double v : imputed_thresholds) put_f64(out, v);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io, "cannot write model bundle " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(Errc::io, "short write to " + path);
}

DetectorBundle DetectorBundle::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io, "cannot open model bundle " + path);
  const Bytes in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (in.size() < 12 || !std::equal(kBundleMagic, kBundleMagic + 4, in.begin()))
    throw Error(Errc::protocol, "not a model bundle: " + path);
  const auto version = get_u32(in, 4);
  if (version != 1 && version != kBundleVersion) throw Error(Errc::protocol, "unsupported model bundle version");
  const auto hidden = get_u32(in, 8);

  DetectorBundle b;
  b.model = SequenceModel(hidden, 0);
  const std::size_t count = 2 * kFeatureCount + b.model.parameter_count() + 1;
  std::size_t imputed = 0;
  if (version > 1) {
    if (in.size() < 12 + 8 * count + 4) throw Error(Errc::truncation, "model bundle is truncated");
    imputed = get_u32(in, 12 + 8 * count);
  }
  const std::size_t expected = 12 + 8 * count + (version > 1 ? 4 + 8 * imputed : 0);
  if (in.size() != expected) throw Error(Errc::truncation, "model bundle size does not match its header");
  std::size_t at = 12;
  auto next = [&] {
    const double v = get_f64(in, at);
    at += 8;
    return v;
  };
  for (auto& v : b.scaler.mean) v = next();
  for (auto& v : b.scaler.stddev) v = next();
  std::vector<double> params(b.model.parameter_count());
  for (auto& v : params) v = next();
  b.model.set_parameters(params);
  b.threshold = next();
  at += version > 1 ? 4 : 0;
  for (std::size_t i = 0; i < imputed; ++i) b.imputed_thresholds.push_back(next());
  return b;
}

PoisoningDetector::PoisoningDetector(std::shared_ptr<const DetectorBundle> bundle, TimingMode timing)
    : bundle_(std::move(bundle)), timing_(timing) {
  if (!bundle_) throw Error(Errc::contract, "detector needs a model bundle");
}

PoisoningDetector::Result PoisoningDetector::process_tick(std::span<const KpmRecord> records) {
  Result result;
  const auto& model = bundle_->model;
  const auto& scaler = bundle_->scaler;
  const auto tick_start = monotonic_ns();
  std::size_t forecasts = 0;

  std::vector<KpmRecord> window(kSequenceLength);
  auto impute = [&](UeState& s) {
    std::copy(s.history.begin(), s.history.end(), window.begin());
    s.history.push_back(forecast_next(model, scaler, window));
    s.history.pop_front();
    s.imputed = std::min(s.imputed + 1, kSequenceLength);
    ++forecasts;
  };

  for (const auto& rec : records) {
    auto& s = state_[rec.ue_id];
    auto& hist = s.history;

    if (!hist.empty() && rec.timestamp_ms <= hist.back().timestamp_ms) hist.clear();
    if (!hist.empty()) {
      const auto gap = (rec.timestamp_ms - hist.back().timestamp_ms) / kTickMs;
      if ((rec.timestamp_ms - hist.back().timestamp_ms) % kTickMs != 0 || gap - 1 > kMaxBridgedGap ||
          (gap > 1 && hist.size() < kSequenceLength)) {
        hist.clear();
      } else {
        for (std::uint64_t missing = 1; missing < gap; ++missing) impute(s);
      }
    }
    if (hist.empty()) s.imputed = 0;

    if (hist.size() < kSequenceLength) {
      hist.push_back(rec);
      result.accepted.push_back(rec);
      continue;
    }

    const auto record_start = monotonic_ns();
    std::copy(hist.begin(), hist.end(), window.begin());
    const double score = score_window(model, scaler, window, rec);
    ++forecasts;
    auto verdict = make_verdict(rec, score, bundle_->threshold_for(s.imputed));
    verdict.scoring_latency_ms = timing_ == TimingMode::wall
                                     ? static_cast<double>(monotonic_ns() - record_start) / 1e6
                                     : static_cast<double>(model.macs_per_forecast()) * cost::kNsPerMac / 1e6;

    if (verdict.is_anomalous) {
      impute(s);
      result.flagged.push_back(rec);
    } else {
      hist.push_back(rec);
      hist.pop_front();
      s.imputed = 0;
      result.accepted.push_back(rec);
    }
    result.verdicts.push_back(verdict);
  }

  result.elapsed_ms = timing_ == TimingMode::wall
                          ? static_cast<double>(monotonic_ns() - tick_start) / 1e6
                          : static_cast<double>(forecasts * model.macs_per_forecast()) * cost::kNsPerMac / 1e6;
  return result;
}

}  // namespace ricguard
