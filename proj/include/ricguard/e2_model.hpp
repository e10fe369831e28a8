#ifndef RICGUARD_E2_MODEL_HPP_
#define RICGUARD_E2_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "ricguard/bytes.hpp"
#include "ricguard/kpm_record.hpp"

namespace ricguard {

/// The four E2 message kinds seen on the wire. Codes follow declaration order.
enum class E2MessageKind : std::uint8_t {
  SetupRequest = 0,
  SubscriptionResponse = 1,
  Indication = 2,
  SubscriptionDeleteResponse = 3,
};

inline constexpr std::size_t kE2MessageKindCount = 4;
inline constexpr E2MessageKind kAllE2MessageKinds[] = {
    E2MessageKind::SetupRequest, E2MessageKind::SubscriptionResponse, E2MessageKind::Indication,
    E2MessageKind::SubscriptionDeleteResponse};

std::string_view to_string(E2MessageKind kind) noexcept;
std::optional<E2MessageKind> kind_from_string(std::string_view name) noexcept;

inline constexpr std::uint8_t kFrameMagic = 0xE2;
inline constexpr std::uint8_t kFrameVersion = 0x01;
inline constexpr std::size_t kFrameHeaderSize = 11;
inline constexpr std::size_t kMaxPayloadSize = std::size_t{1} << 20;

// Sizes of the fixed-size messages and the setup blob.
inline constexpr std::size_t kSetupRequestPayloadSize = 25'000;
inline constexpr std::size_t kSubscriptionResponsePayloadSize = 27;        // 38 B framed
inline constexpr std::size_t kSubscriptionDeleteResponsePayloadSize = 11;  // 22 B framed

struct E2Message {
  E2MessageKind kind = E2MessageKind::Indication;
  std::uint32_t source_node_id = 0;
  Bytes payload;
  std::uint64_t ingress_timestamp_ns = 0;  // stamped once by decode_frame

  friend bool operator==(const E2Message&, const E2Message&) = default;
};

/// Layout: magic, version, kind, node id (u32 BE), payload length (u32 BE),
/// payload. Throws Errc::payload_cap above kMaxPayloadSize.
Bytes encode_frame(const E2Message& msg);

/// Inverse of encode_frame. The caller supplies the receipt time.
/// Throws Errc::truncation, Errc::protocol, Errc::unknown_kind or
/// Errc::payload_cap. Trailing bytes past the declared payload are a
/// protocol error.
E2Message decode_frame(ByteView frame, std::uint64_t ingress_timestamp_ns);

/// Indication payload size for a cell serving `ue_count` UEs:
/// round(100 + 5.3 * (ue_count - 1)). Throws Errc::domain for 0.
std::size_t calibrated_indication_size(std::uint32_t ue_count);

struct KpmReportPayload {
  std::uint32_t node_id = 0;
  std::uint32_t cell_id = 0;
  std::vector<KpmRecord> records;  // non-empty, one shared timestamp
};

struct FullPayload {};
struct SizeCalibratedPayload {
  std::uint32_t ue_count = 1;
  std::uint64_t seed = 0;
};
using PayloadMode = std::variant<FullPayload, SizeCalibratedPayload>;

inline constexpr std::size_t kKpmRecordWireSize = 4 + 8 + 8 * kFeatureCount;  // 60

/// Full mode: u16 record count, then per record ue_id (u32), timestamp ms
/// (u64), six IEEE-754 doubles, all big-endian. Size-calibrated mode: seeded
/// filler bytes of calibrated_indication_size(ue_count) length, no records.
Bytes encode_kpm_payload(const KpmReportPayload& report, const PayloadMode& mode = FullPayload{});

/// Decodes a full-mode payload. Node and cell ids are not on the wire and are
/// taken from the caller.
KpmReportPayload decode_kpm_payload(ByteView payload, std::uint32_t node_id, std::uint32_t cell_id = 0);

}  // namespace ricguard

#endif  // RICGUARD_E2_MODEL_HPP_
