#include <memory>
#include <random>
#include <vector>

#include "doctest.h"
#include "ricguard/inspector.hpp"
#include "test_support.hpp"

using namespace ricguard;
using testing::error_code_of;

namespace {

struct Rig {
  std::shared_ptr<const SignatureSet> book;
  std::shared_ptr<const AhoCorasickMatcher> automaton;
  Blocklist blocklist;
  std::vector<E2Message> dispatched;
  std::vector<std::pair<E2Message, MatchResult>> diverted;

  explicit Rig(std::shared_ptr<const SignatureSet> b)
      : book(std::move(b)), automaton(std::make_shared<AhoCorasickMatcher>(AhoCorasickMatcher::build(*book))) {}

  IngressInspector make(MatcherKind kind, TimingMode timing = TimingMode::wall) {
    IngressInspector insp(book, automaton, blocklist, {kind, timing});
    insp.set_dispatch([this](const E2Message& m) { dispatched.push_back(m); });
    insp.set_mitigation([this](const E2Message& m, const MatchResult& r) { diverted.emplace_back(m, r); });
    return insp;
  }
};

E2Message message(E2MessageKind kind, std::uint32_t node, Bytes payload) {
  return {kind, node, std::move(payload), 0};
}

InspectionOutcome with_latency(E2MessageKind kind, double ms, bool blocked = false) {
  InspectionOutcome o;
  o.kind = kind;
  o.inspect_latency_ns = static_cast<std::uint64_t>(ms * 1e6);
  o.blocked_at_ingress = blocked;
  return o;
}

}  // namespace

TEST_CASE("benign messages are forwarded, malicious ones diverted") {
  Rig rig(std::make_shared<SignatureSet>(synthetic_rulebook()));
  const auto& target = rig.book->signatures()[4];
  for (auto kind : {MatcherKind::naive, MatcherKind::automaton}) {
    rig.dispatched.clear();
    rig.diverted.clear();
    auto insp = rig.make(kind);

    const auto benign = insp.inspect(message(E2MessageKind::Indication, 3, Bytes(200, 0x20)));
    CHECK(benign.route == Route::forwarded);
    CHECK_FALSE(benign.malicious());
    CHECK(rig.dispatched.size() == 1);

    Bytes payload(50, 0x20);
    payload.insert(payload.begin() + 10, target.pattern.begin(), target.pattern.end());
    const auto bad = insp.inspect(message(E2MessageKind::Indication, 3, payload));
    CHECK(bad.route == Route::diverted);
    REQUIRE(bad.match.hits.size() >= 1);
    CHECK(bad.match.hits[0] == Hit{target.id, 10});
    REQUIRE(rig.diverted.size() == 1);
    CHECK(rig.diverted[0].first.payload == payload);
    CHECK(rig.dispatched.size() == 1);
    CHECK(bad.message_ref == benign.message_ref + 1);
  }
}

TEST_CASE("setup request is flagged once per connection") {
  Rig rig(std::make_shared<SignatureSet>(synthetic_rulebook()));
  auto insp = rig.make(MatcherKind::naive);
  CHECK(insp.inspect(message(E2MessageKind::SetupRequest, 1, Bytes(100, 1))).once_per_connection);
  CHECK_FALSE(insp.inspect(message(E2MessageKind::Indication, 1, Bytes(100, 1))).once_per_connection);
}

TEST_CASE("blocked node is short-circuited without a scan") {
  Rig rig(std::make_shared<SignatureSet>(synthetic_rulebook()));
  auto insp = rig.make(MatcherKind::naive);
  rig.blocklist.block_node(9);
  std::vector<InspectionOutcome> outcomes;
  for (int i = 0; i < 10; ++i) outcomes.push_back(insp.inspect(message(E2MessageKind::Indication, 9, Bytes(500, 7))));
  for (const auto& o : outcomes) {
    CHECK(o.blocked_at_ingress);
    CHECK(o.route == Route::discarded);
    CHECK(o.match.comparisons == 0);
  }
  CHECK(rig.dispatched.empty());
  CHECK(rig.diverted.empty());
  CHECK_FALSE(latency_summary(outcomes, E2MessageKind::Indication).has_value());
  // Other nodes are unaffected.
  CHECK(insp.inspect(message(E2MessageKind::Indication, 8, Bytes(500, 7))).route == Route::forwarded);
}

TEST_CASE("scan work grows with payload size") {
  Rig rig(std::make_shared<SignatureSet>(synthetic_rulebook()));
  std::mt19937_64 rng(4);
  for (auto kind : {MatcherKind::naive, MatcherKind::automaton}) {
    auto insp = rig.make(kind, TimingMode::cost_model);
    std::uint64_t previous = 0;
    for (std::size_t size : {11u, 27u, 100u, 1000u, 25'000u}) {
      const auto o = insp.inspect(message(E2MessageKind::Indication, 1, testing::random_bytes(rng, size, 16)));
      REQUIRE_FALSE(o.malicious());
      CHECK(o.match.comparisons > previous);
      CHECK(o.inspect_latency_ns == o.match.comparisons);
      previous = o.match.comparisons;
    }
  }
}

TEST_CASE("matchers give the same verdicts through the inspector") {
  Rig rig(std::make_shared<SignatureSet>(synthetic_rulebook()));
  auto naive = rig.make(MatcherKind::naive);
  auto automaton = rig.make(MatcherKind::automaton);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    auto payload = testing::random_bytes(rng, rng() % 400);
    if (i % 3 == 0) {
      const auto& s = rig.book->signatures()[rng() % rig.book->size()];
      payload.insert(payload.begin() + static_cast<std::ptrdiff_t>(rng() % (payload.size() + 1)), s.pattern.begin(),
                     s.pattern.end());
    }
    const auto m = message(E2MessageKind::Indication, 2, payload);
    const auto a = naive.inspect(m);
    const auto b = automaton.inspect(m);
    REQUIRE(a.match.same_hits(b.match));
    REQUIRE(a.route == b.route);
  }
}

TEST_CASE("automaton selection without a built automaton is a contract error") {
  auto book = std::make_shared<const SignatureSet>(synthetic_rulebook());
  Blocklist bl;
  CHECK(error_code_of([&] { IngressInspector(book, nullptr, bl, {MatcherKind::automaton, TimingMode::wall}); }) ==
        Errc::contract);
  CHECK(error_code_of([&] { IngressInspector(nullptr, nullptr, bl, {}); }) == Errc::contract);
}

TEST_CASE("latency summary is mean and max per kind") {
  const std::vector<InspectionOutcome> outcomes{
      with_latency(E2MessageKind::Indication, 0.1), with_latency(E2MessageKind::Indication, 0.3),
      with_latency(E2MessageKind::Indication, 5.0, true), with_latency(E2MessageKind::SetupRequest, 2.0)};
  const auto s = latency_summary(outcomes, E2MessageKind::Indication);
  REQUIRE(s);
  CHECK(s->average_ms == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(s->maximum_ms == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(s->count == 2);
  CHECK_FALSE(latency_summary(outcomes, E2MessageKind::SubscriptionDeleteResponse).has_value());
}

TEST_CASE("inspection csv row") {
  InspectionOutcome o;
  o.kind = E2MessageKind::SubscriptionResponse;
  o.node_id = 12;
  o.inspect_latency_ns = 3400;
  o.match.hits = {{1, 0}, {5, 3}};
  CHECK(inspection_csv_row(7, o) == "7,SubscriptionResponse,12,malicious,3400,2");
  o.match.hits.clear();
  CHECK(inspection_csv_row(7, o) == "7,SubscriptionResponse,12,benign,3400,0");
  o.blocked_at_ingress = true;
  CHECK(inspection_csv_row(0, o).find(",blocked,") != std::string::npos);
  CHECK(std::string(kInspectionCsvHeader) == "loop,msg_kind,node_id,verdict,inspect_ns,hits");
}

TEST_CASE("matcher names") {
  CHECK(matcher_from_string("naive") == MatcherKind::naive);
  CHECK(matcher_from_string("automaton") == MatcherKind::automaton);
  CHECK_FALSE(matcher_from_string("regex").has_value());
  CHECK(to_string(MatcherKind::automaton) == "automaton");
}
