#include "ricguard/inspector.hpp"

#include <algorithm>
#include <cmath>

#include "ricguard/error.hpp"

namespace ricguard {

std::string_view to_string(MatcherKind k) noexcept { return k == MatcherKind::naive ? "naive" : "automaton"; }

std::optional<MatcherKind> matcher_from_string(std::string_view s) noexcept {
  if (s == "naive") return MatcherKind::naive;
  if (s == "automaton") return MatcherKind::automaton;
  return std::nullopt;
}

IngressInspector::IngressInspector(std::shared_ptr<const SignatureSet> rulebook,
                                   std::shared_ptr<const AhoCorasickMatcher> automaton, const Blocklist& blocklist,
                                   Options options)
    : rulebook_(std::move(rulebook)), automaton_(std::move(automaton)), blocklist_(blocklist), options_(options) {
  if (!rulebook_) throw Error(Errc::contract, "inspector needs a rulebook");
  if (options_.matcher == MatcherKind::automaton && !automaton_)
    throw Error(Errc::contract, "automaton matcher selected but not built");
}

InspectionOutcome IngressInspector::inspect(const E2Message& msg) {
  InspectionOutcome out;
  out.message_ref = next_ref_++;
  out.kind = msg.kind;
  out.node_id = msg.source_node_id;
  out.once_per_connection = msg.kind == E2MessageKind::SetupRequest;

  if (blocklist_.node_blocked(msg.source_node_id)) {
    out.blocked_at_ingress = true;
    out.route = Route::discarded;
    return out;
  }

  const auto start = monotonic_ns();
  out.match = options_.matcher == MatcherKind::naive ? scan_naive(msg.payload, *rulebook_)
                                                     : scan_automaton(msg.payload, *automaton_);
  const auto stop = monotonic_ns();
  out.inspect_latency_ns =
      options_.timing == TimingMode::wall
          ? stop - start
          : static_cast<std::uint64_t>(std::llround(static_cast<double>(out.match.comparisons) * cost::kNsPerComparison));
  out.match.scan_latency_ns = out.inspect_latency_ns;

  if (out.match.malicious()) {
    out.route = Route::diverted;
    if (mitigation_) mitigation_(msg, out.match);
  } else {
    out.route = Route::forwarded;
    if (dispatch_) dispatch_(msg);
  }
  return out;
}

std::optional<LatencySummary> latency_summary(std::span<const InspectionOutcome> outcomes, E2MessageKind kind) {
  LatencySummary s;
  double total = 0.0;
  for (const auto& o : outcomes) {
    if (o.kind != kind || o.blocked_at_ingress) continue;
    const double ms = static_cast<double>(o.inspect_latency_ns) / 1e6;
    total += ms;
    s.maximum_ms = std::max(s.maximum_ms, ms);
    ++s.count;
  }
  if (s.count == 0) return std::nullopt;
  s.average_ms = total / static_cast<double>(s.count);
  return s;
}

std::string inspection_csv_row(std::uint64_t loop, const InspectionOutcome& o) {
  const char* verdict = o.blocked_at_ingress ? "blocked" : (o.malicious() ? "malicious" : "benign");
  return std::to_string(loop) + ',' + std::string(to_string(o.kind)) + ',' + std::to_string(o.node_id) + ',' +
         verdict + ',' + std::to_string(o.inspect_latency_ns) + ',' + std::to_string(o.match.hits.size());
}

}  // namespace ricguard
