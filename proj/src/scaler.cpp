#include <cmath>
#include <string>

#include "ricguard/error.hpp"
#include "ricguard/kpm_detector.hpp"

namespace ricguard {

FeatureVector FeatureScaler::normalize(const FeatureVector& x) const {
  FeatureVector z;
  for (std::size_t k = 0; k < kFeatureCount; ++k) z[k] = (x[k] - mean[k]) / stddev[k];
  return z;
}

FeatureVector FeatureScaler::denormalize(const FeatureVector& z) const {
  FeatureVector x;
  for (std::size_t k = 0; k < kFeatureCount; ++k) x[k] = z[k] * stddev[k] + mean[k];
  return x;
}

FeatureScaler fit_scaler(std::span<const KpmRecord> records) {
  if (records.size() < 2) throw Error(Errc::fit, "scaler needs at least two records");
  FeatureScaler s;
  const double n = static_cast<double>(records.size());
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    double sum = 0.0;
    for (const auto& r : records) sum += r.features[k];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : records) ss += (r.features[k] - mean) * (r.features[k] - mean);
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0) || !std::isfinite(sd))
      throw Error(Errc::fit, "feature " + std::string(kKpmColumnNames[k + 2]) + " is constant over the training data");
    s.mean[k] = mean;
    s.stddev[k] = sd;
  }
  return s;
}

SequenceWindow normalize_window(const FeatureScaler& scaler, std::span<const KpmRecord> history,
                                const KpmRecord& next) {
  if (history.size() != kSequenceLength)
    throw Error(Errc::contract, "window holds " + std::to_string(history.size()) + " records, expected 10");
  SequenceWindow w;
  for (std::size_t t = 0; t < kSequenceLength; ++t) w.inputs[t] = scaler.normalize(history[t].features);
  w.target = scaler.normalize(next.features);
  return w;
}

}  // namespace ricguard
