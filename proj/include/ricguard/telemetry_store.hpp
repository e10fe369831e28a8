#ifndef RICGUARD_TELEMETRY_STORE_HPP_
#define RICGUARD_TELEMETRY_STORE_HPP_

#include <cstdint>
#include <map>
#include <shared_mutex>
#include <span>
#include <utility>
#include <vector>

#include "ricguard/kpm_record.hpp"

namespace ricguard {

/// Append-only table of verified KPM records keyed by (ue_id, timestamp).
/// Readers share a lock; appends take it briefly per batch.
class TelemetryStore {
 public:
  /// Returns the number of records inserted; existing keys are left untouched.
  std::size_t append(std::span<const KpmRecord> records);

  std::vector<KpmRecord> records_at(std::uint64_t timestamp_ms) const;
  bool contains(std::uint32_t ue_id, std::uint64_t timestamp_ms) const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::pair<std::uint64_t, std::uint32_t>, KpmRecord> rows_;  // (timestamp, ue) order
};

}  // namespace ricguard

#endif  // RICGUARD_TELEMETRY_STORE_HPP_
