#ifndef RICGUARD_KPM_RECORD_HPP_
#define RICGUARD_KPM_RECORD_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace ricguard {

inline constexpr std::size_t kFeatureCount = 6;
using FeatureVector = std::array<double, kFeatureCount>;

/// Indices into KpmRecord::features, in dataset column order.
enum Feature : std::size_t {
  kUeThpUl = 0,
  kPrbUsedUl = 1,
  kUeThpDl = 2,
  kPrbUsedDl = 3,
  kTotNbrUlPerSec = 4,
  kTotNbrDlPerSec = 5,
};

/// Dataset column names: the two identifiers followed by the six measurements.
inline constexpr std::array<std::string_view, 8> kKpmColumnNames = {
    "Timestamp", "UEid",     "UEThpUl",          "PrbUsedUl",
    "UEThpDl",   "PrbUsedDl", "TotNbrUl_per_sec", "TotNbrDl_per_sec",
};

/// One per-UE, per-second telemetry row.
struct KpmRecord {
  std::uint64_t timestamp_ms = 0;  // since scenario start
  std::uint32_t ue_id = 0;
  FeatureVector features{};        // all >= 0

  friend bool operator==(const KpmRecord&, const KpmRecord&) = default;
};

/// Ground truth for one emitted record.
struct GroundTruthLabel {
  std::uint32_t ue_id = 0;
  std::uint64_t timestamp_ms = 0;
  bool poisoned = false;
  double af = 1.0;  // amplification factor used when poisoned

  friend bool operator==(const GroundTruthLabel&, const GroundTruthLabel&) = default;
};

/// Dataset CSV: header of kKpmColumnNames, one record per row, features
/// printed so that they read back bit-exactly.
void write_kpm_csv(std::ostream& out, std::span<const KpmRecord> records);
/// Throws Errc::config on a wrong header or malformed row.
std::vector<KpmRecord> read_kpm_csv(std::istream& in);

}  // namespace ricguard

#endif  // RICGUARD_KPM_RECORD_HPP_
