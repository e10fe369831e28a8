#ifndef RICGUARD_INSPECTOR_HPP_
#define RICGUARD_INSPECTOR_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "ricguard/e2_model.hpp"
#include "ricguard/mitigation.hpp"
#include "ricguard/signature.hpp"
#include "ricguard/timing.hpp"

namespace ricguard {

enum class MatcherKind : std::uint8_t { naive, automaton };
std::string_view to_string(MatcherKind k) noexcept;
std::optional<MatcherKind> matcher_from_string(std::string_view s) noexcept;

enum class Route : std::uint8_t { forwarded, diverted, discarded };

struct InspectionOutcome {
  std::uint64_t message_ref = 0;  // per-inspector sequence number
  E2MessageKind kind = E2MessageKind::Indication;
  std::uint32_t node_id = 0;
  MatchResult match;              // empty when blocked at ingress
  std::uint64_t inspect_latency_ns = 0;
  bool blocked_at_ingress = false;
  bool once_per_connection = false;  // SetupRequest
  Route route = Route::forwarded;

  bool malicious() const noexcept { return match.malicious(); }
};

/// Signature scanner at the E2 terminal, ahead of payload decoding.
///
/// Blocklisted sources are discarded without a scan. Otherwise the payload is
/// scanned; benign messages go to the dispatch sink and malicious ones to the
/// mitigation sink. Latency covers the scan only. One instance serves one
/// connection and handles its messages in order; the rulebook, matcher and
/// blocklist may be shared.
class IngressInspector {
 public:
  using DispatchSink = std::function<void(const E2Message&)>;
  using MitigationSink = std::function<void(const E2Message&, const MatchResult&)>;

  struct Options {
    MatcherKind matcher = MatcherKind::naive;
    TimingMode timing = TimingMode::wall;
  };

  /// `automaton` is required when options.matcher is automaton.
  IngressInspector(std::shared_ptr<const SignatureSet> rulebook, std::shared_ptr<const AhoCorasickMatcher> automaton,
                   const Blocklist& blocklist, Options options);

  void set_dispatch(DispatchSink sink) { dispatch_ = std::move(sink); }
  void set_mitigation(MitigationSink sink) { mitigation_ = std::move(sink); }

  InspectionOutcome inspect(const E2Message& msg);

 private:
  std::shared_ptr<const SignatureSet> rulebook_;
  std::shared_ptr<const AhoCorasickMatcher> automaton_;
  const Blocklist& blocklist_;
  Options options_;
  DispatchSink dispatch_;
  MitigationSink mitigation_;
  std::uint64_t next_ref_ = 0;
};

struct LatencySummary {
  double average_ms = 0.0;
  double maximum_ms = 0.0;
  std::size_t count = 0;
};

/// Mean and max scan latency over the scanned outcomes of one kind.
/// Blocked-at-ingress outcomes are not scans and are skipped.
std::optional<LatencySummary> latency_summary(std::span<const InspectionOutcome> outcomes, E2MessageKind kind);

/// `loop,msg_kind,node_id,verdict,inspect_ns,hits` row (no newline); hits is a count.
std::string inspection_csv_row(std::uint64_t loop, const InspectionOutcome& outcome);
inline constexpr const char* kInspectionCsvHeader = "loop,msg_kind,node_id,verdict,inspect_ns,hits";

}  // namespace ricguard

#endif  // RICGUARD_INSPECTOR_HPP_
