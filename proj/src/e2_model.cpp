#include "ricguard/e2_model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ricguard/error.hpp"

namespace ricguard {

std::string_view to_string(E2MessageKind kind) noexcept {
  switch (kind) {
    case E2MessageKind::SetupRequest: return "SetupRequest";
    case E2MessageKind::SubscriptionResponse: return "SubscriptionResponse";
    case E2MessageKind::Indication: return "Indication";
    case E2MessageKind::SubscriptionDeleteResponse: return "SubscriptionDeleteResponse";
  }
  return "Unknown";
}

std::optional<E2MessageKind> kind_from_string(std::string_view name) noexcept {
  for (auto k : kAllE2MessageKinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

Bytes encode_frame(const E2Message& msg) {
  if (msg.payload.size() > kMaxPayloadSize)
    throw Error(Errc::payload_cap, "payload of " + std::to_string(msg.payload.size()) + " bytes exceeds frame cap");
  Bytes out;
  out.reserve(kFrameHeaderSize + msg.payload.size());
  out.push_back(kFrameMagic);
  out.push_back(kFrameVersion);
  out.push_back(static_cast<std::uint8_t>(msg.kind));
  put_u32(out, msg.source_node_id);
  put_u32(out, static_cast<std::uint32_t>(msg.payload.size()));
  out.insert(out.end(), msg.payload.begin(), msg.payload.end());
  return out;
}

E2Message decode_frame(ByteView frame, std::uint64_t ingress_timestamp_ns) {
  if (frame.size() < kFrameHeaderSize)
    throw Error(Errc::truncation, "frame shorter than header: " + std::to_string(frame.size()) + " bytes");
  if (frame[0] != kFrameMagic) throw Error(Errc::protocol, "bad frame magic");
  if (frame[1] != kFrameVersion) throw Error(Errc::protocol, "unsupported frame version");
  if (frame[2] >= kE2MessageKindCount)
    throw Error(Errc::unknown_kind, "unknown message kind code " + std::to_string(frame[2]));

  const std::uint32_t length = get_u32(frame, 7);
  if (length > kMaxPayloadSize) throw Error(Errc::payload_cap, "declared payload exceeds frame cap");
  const std::size_t available = frame.size() - kFrameHeaderSize;
  if (available < length)
    throw Error(Errc::truncation, "payload declares " + std::to_string(length) + " bytes, frame carries " +
                                      std::to_string(available));
  if (available > length) throw Error(Errc::protocol, "trailing bytes after payload");

  E2Message msg;
  msg.kind = static_cast<E2MessageKind>(frame[2]);
  msg.source_node_id = get_u32(frame, 3);
  msg.payload.assign(frame.begin() + kFrameHeaderSize, frame.end());
  msg.ingress_timestamp_ns = ingress_timestamp_ns;
  return msg;
}

std::size_t calibrated_indication_size(std::uint32_t ue_count) {
  if (ue_count == 0) throw Error(Errc::domain, "ue_count must be at least 1");
  return static_cast<std::size_t>(std::lround(100.0 + 5.3 * static_cast<double>(ue_count - 1)));
}

namespace {

void check_report(const KpmReportPayload& report) {
  if (report.records.empty()) throw Error(Errc::contract, "KPM report carries no records");
  const auto ts = report.records.front().timestamp_ms;
  for (const auto& r : report.records)
    if (r.timestamp_ms != ts) throw Error(Errc::contract, "KPM report mixes reporting timestamps");
}

}  // namespace

Bytes encode_kpm_payload(const KpmReportPayload& report, const PayloadMode& mode) {
  check_report(report);

  if (const auto* calibrated = std::get_if<SizeCalibratedPayload>(&mode)) {
    Bytes out(calibrated_indication_size(calibrated->ue_count));
    std::mt19937_64 rng(calibrated->seed);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng() >> 56);
    return out;
  }

  if (report.records.size() > 0xFFFF)
    throw Error(Errc::capacity, "KPM report holds " + std::to_string(report.records.size()) + " records, max 65535");
  Bytes out;
  out.reserve(2 + report.records.size() * kKpmRecordWireSize);
  put_u16(out, static_cast<std::uint16_t>(report.records.size()));
  for (const auto& r : report.records) {
    put_u32(out, r.ue_id);
    put_u64(out, r.timestamp_ms);
    for (double f : r.features) put_f64(out, f);
  }
  return out;
}

KpmReportPayload decode_kpm_payload(ByteView payload, std::uint32_t node_id, std::uint32_t cell_id) {
  if (payload.size() < 2) throw Error(Errc::truncation, "KPM payload shorter than record count");
  const std::size_t count = get_u16(payload, 0);
  const std::size_t expected = 2 + count * kKpmRecordWireSize;
  if (payload.size() < expected) throw Error(Errc::truncation, "KPM payload shorter than its record count");
  if (payload.size() > expected) throw Error(Errc::protocol, "trailing bytes after KPM records");

  KpmReportPayload report{node_id, cell_id, {}};
  report.records.reserve(count);
  std::size_t at = 2;
  for (std::size_t i = 0; i < count; ++i) {
    KpmRecord r;
    r.ue_id = get_u32(payload, at);
    r.timestamp_ms = get_u64(payload, at + 4);
    at += 12;
    for (auto& f : r.features) {
      f = get_f64(payload, at);
      at += 8;
    }
    report.records.push_back(r);
  }
  check_report(report);
  return report;
}

}  // namespace ricguard
