#include "ricguard/telemetry_store.hpp"

#include <mutex>

namespace ricguard {

std::size_t TelemetryStore::append(std::span<const KpmRecord> records) {
  std::unique_lock lock(mu_);
  std::size_t inserted = 0;
  for (const auto& r : records) inserted += rows_.try_emplace({r.timestamp_ms, r.ue_id}, r).second ? 1 : 0;
  return inserted;
}

std::vector<KpmRecord> TelemetryStore::records_at(std::uint64_t timestamp_ms) const {
  std::shared_lock lock(mu_);
  std::vector<KpmRecord> out;
  for (auto it = rows_.lower_bound({timestamp_ms, 0}); it != rows_.end() && it->first.first == timestamp_ms; ++it)
    out.push_back(it->second);
  return out;
}

bool TelemetryStore::contains(std::uint32_t ue_id, std::uint64_t timestamp_ms) const {
  std::shared_lock lock(mu_);
  return rows_.contains({timestamp_ms, ue_id});
}

std::size_t TelemetryStore::size() const {
  std::shared_lock lock(mu_);
  return rows_.size();
}

}  // namespace ricguard
