#ifndef RICGUARD_TIMING_HPP_
#define RICGUARD_TIMING_HPP_

#include <chrono>
#include <cstdint>

namespace ricguard {

/// Wall timings come from the monotonic clock. The cost model replaces them
/// with work-derived units so that CSV output is reproducible byte for byte.
enum class TimingMode : std::uint8_t { wall, cost_model };

inline std::uint64_t monotonic_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

/// Cost-model constants.
namespace cost {
inline constexpr double kNsPerComparison = 1.0;
inline constexpr double kNsPerMac = 0.5;              // recurrent model multiply-accumulate
inline constexpr double kNsPerDecodedByte = 0.25;
inline constexpr double kNsPerHashedByte = 0.335;     // ~0.67 ms/MB over two digests per round
inline constexpr double kNsPerLoadedByte = 0.15;      // cold reference-image read
inline constexpr double kNsPerStoredRecord = 40.0;
}  // namespace cost

}  // namespace ricguard

#endif  // RICGUARD_TIMING_HPP_
