#ifndef RICGUARD_ANOMALY_VERDICT_HPP_
#define RICGUARD_ANOMALY_VERDICT_HPP_

#include <cstdint>

#include "ricguard/actions.hpp"

namespace ricguard {

/// Outcome of scoring one telemetry record.
/// is_anomalous == (score > threshold); magnitude is none iff not anomalous.
struct AnomalyVerdict {
  std::uint32_t ue_id = 0;
  std::uint64_t timestamp_ms = 0;
  double score = 0.0;
  double threshold = 1.0;
  bool is_anomalous = false;
  Magnitude magnitude = Magnitude::none;
  double scoring_latency_ms = 0.0;
};

}  // namespace ricguard

#endif  // RICGUARD_ANOMALY_VERDICT_HPP_
