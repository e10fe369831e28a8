#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ricguard/mitigation.hpp"
#include "test_support.hpp"

using namespace ricguard;
using testing::error_code_of;
using A = MitigationAction;

namespace {

AnomalyVerdict anomalous(Magnitude m) {
  AnomalyVerdict v;
  v.ue_id = 4;
  v.score = 3.0;
  v.threshold = 1.0;
  v.is_anomalous = true;
  v.magnitude = m;
  return v;
}

MatchResult hits(std::initializer_list<std::uint32_t> ids) {
  MatchResult r;
  for (auto id : ids) r.hits.push_back({id, 0});
  return r;
}

Incident incident(Detector d, std::string subject, std::uint32_t node = 0) {
  return {d, std::move(subject), "evidence", 1000, node};
}

}  // namespace

TEST_CASE("action codes round trip") {
  for (std::size_t i = 0; i < kMitigationActionCount; ++i) {
    const auto a = static_cast<MitigationAction>(i);
    CHECK(action_from_code(action_code(a)) == a);
  }
  CHECK(ActionSet::parse("RBD").codes() == "DBR");
  CHECK(ActionSet::parse(" K V R ").codes() == "RVK");
  CHECK(error_code_of([] { ActionSet::parse("Q"); }).has_value());
}

TEST_CASE("inspector event takes the union of hit action sets") {
  MitigationPolicy p;
  p.signature_actions[1] = {A::DropMessage};
  p.signature_actions[2] = {A::BlockNode};
  p.signature_actions[3] = {A::Report};
  CHECK(resolve_inspector_event(hits({1, 2}), p) == ActionSet{A::DropMessage, A::BlockNode});
  CHECK(resolve_inspector_event(hits({1, 2, 3}), p) == ActionSet{A::DropMessage, A::BlockNode, A::Report});
  CHECK(resolve_inspector_event(hits({}), p).empty());
}

TEST_CASE("union is independent of hit order") {
  const auto book = synthetic_rulebook(30, 2);
  const auto p = MitigationPolicy::from_rulebook(book);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    MatchResult r;
    for (const auto& s : book.signatures())
      if (rng() % 4 == 0) r.hits.push_back({s.id, 0});
    const auto expected = resolve_inspector_event(r, p);
    ActionSet oracle;
    for (const auto& h : r.hits) oracle |= book.find(h.signature_id)->actions;
    CHECK(expected == oracle);
    std::shuffle(r.hits.begin(), r.hits.end(), rng);
    CHECK(resolve_inspector_event(r, p) == expected);
  }
}

TEST_CASE("unmapped signature falls back to drop and report with a warning") {
  MitigationPolicy p;
  p.signature_actions[1] = {A::BlockNode};
  std::vector<std::string> warnings;
  CHECK(resolve_inspector_event(hits({1, 77}), p, &warnings) == ActionSet{A::DropMessage, A::BlockNode, A::Report});
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("77") != std::string::npos);
}

TEST_CASE("default magnitude actions escalate") {
  const auto p = MitigationPolicy::defaults();
  const auto small = resolve_kpm_event(anomalous(Magnitude::small), 1, p);
  const auto moderate = resolve_kpm_event(anomalous(Magnitude::moderate), 1, p);
  const auto significant = resolve_kpm_event(anomalous(Magnitude::significant), 1, p);
  CHECK(small == ActionSet{A::DropData});
  CHECK(moderate == ActionSet{A::DropData, A::Report});
  CHECK(significant == ActionSet{A::DropData, A::BlockNode, A::Report});
  CHECK(moderate.includes(small));
  CHECK(significant.includes(moderate));
}

TEST_CASE("kpm event needs an anomalous verdict") {
  AnomalyVerdict v;
  CHECK(error_code_of([&] { resolve_kpm_event(v, 1, MitigationPolicy::defaults()); }) == Errc::contract);
  v.is_anomalous = true;  // but no magnitude
  CHECK(error_code_of([&] { resolve_kpm_event(v, 1, MitigationPolicy::defaults()); }) == Errc::contract);
}

TEST_CASE("attestation tiers") {
  const auto p = MitigationPolicy::defaults();
  CHECK(resolve_attestation_event("x", "high_impact", p) == ActionSet{A::BlockXapp, A::RevokePrivileges, A::Report});
  CHECK(resolve_attestation_event("x", "standard", p) == ActionSet{A::RevokePrivileges, A::Report});
  CHECK(resolve_attestation_event("x", "read_only", p) == ActionSet{A::Report});
  std::vector<std::string> warnings;
  CHECK(resolve_attestation_event("x", "galactic", p, &warnings) == ActionSet{A::Report});
  CHECK(warnings.size() == 1);
}

TEST_CASE("mitigation unit applies effects and logs reports") {
  Blocklist bl;
  MitigationUnit unit(bl);
  const auto inc = incident(Detector::inspector, "5", 5);
  const auto effects = unit.apply({A::DropMessage, A::BlockNode, A::Report}, inc);
  CHECK(effects == std::vector<Effect>{Effect::Reported, Effect::MessageDropped, Effect::NodeBlocked});
  CHECK(bl.node_blocked(5));
  REQUIRE(unit.log().size() == 1);
  CHECK(unit.log()[0].event_id == 1);
  CHECK(unit.log()[0].actions.codes() == "DBR");

  const auto xapp = incident(Detector::attestation, "xapp-7");
  unit.apply({A::BlockXapp, A::RevokePrivileges, A::Report}, xapp);
  CHECK(bl.xapp_blocked("xapp-7"));
  CHECK(bl.xapp_revoked("xapp-7"));
  CHECK(unit.log().size() == 2);
  CHECK(unit.log()[1].event_id == 2);
}

TEST_CASE("reapplying an incident is idempotent") {
  Blocklist bl;
  MitigationUnit unit(bl);
  const auto inc = incident(Detector::kpm, "3", 2);
  unit.apply({A::DropData, A::BlockNode, A::Report}, inc);
  std::ostringstream before;
  unit.write_log_csv(before);
  const auto nodes = bl.blocked_node_count();
  unit.apply({A::DropData, A::BlockNode, A::Report}, inc);
  std::ostringstream after;
  unit.write_log_csv(after);
  CHECK(before.str() == after.str());
  CHECK(bl.blocked_node_count() == nodes);
}

TEST_CASE("each distinct reported incident adds one log entry") {
  Blocklist bl;
  MitigationUnit unit(bl);
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto inc = incident(Detector::kpm, std::to_string(i));
    const auto size = unit.log().size();
    unit.apply({A::DropData, A::Report}, inc);
    CHECK(unit.log().size() == size + 1);
    unit.apply({A::DropData}, incident(Detector::kpm, "quiet" + std::to_string(i)));
    CHECK(unit.log().size() == size + 1);
  }
  CHECK(unit.apply({}, incident(Detector::kpm, "none")).empty());
}

TEST_CASE("log csv layout") {
  Blocklist bl;
  MitigationUnit unit(bl);
  unit.apply({A::DropData, A::Report}, {Detector::kpm, "17", "moderate", 4000, 2});
  std::ostringstream out;
  unit.write_log_csv(out);
  CHECK(out.str() == "event_id,detector,subject,magnitude_or_sigids,actions,timestamp_ms\n1,kpm,17,moderate,RX,4000\n");
}

TEST_CASE("policy file overrides and round trip") {
  std::istringstream in(
      "# operator policy\n[inspector]\n12 = DB\n[kpm]\nsmall = XR\n[attestation]\nread_only = V\n");
  const auto p = parse_policy(in);
  CHECK(p.signature_actions.at(12) == ActionSet{A::DropMessage, A::BlockNode});
  CHECK(p.magnitude_actions.at(Magnitude::small) == ActionSet{A::DropData, A::Report});
  CHECK(p.magnitude_actions.at(Magnitude::significant) == ActionSet{A::DropData, A::BlockNode, A::Report});
  CHECK(p.xapp_tier_actions.at(XappTier::read_only) == ActionSet{A::RevokePrivileges, A::Report});

  std::stringstream text;
  write_policy(text, p);
  const auto back = parse_policy(text, MitigationPolicy{});
  CHECK(back.signature_actions == p.signature_actions);
  CHECK(back.magnitude_actions == p.magnitude_actions);
  CHECK(back.xapp_tier_actions == p.xapp_tier_actions);
}

TEST_CASE("policy wildcard rewrites known signatures") {
  std::istringstream in("[inspector]\n* = D\n");
  const auto p = parse_policy(in, MitigationPolicy::from_rulebook(synthetic_rulebook(10)));
  REQUIRE(p.signature_actions.size() == 10);
  for (const auto& [id, set] : p.signature_actions) CHECK(set == ActionSet{A::DropMessage});
}

TEST_CASE("policy file errors") {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return parse_policy(in);
  };
  CHECK(error_code_of([&] { parse("1 = D\n"); }) == Errc::config);
  CHECK(error_code_of([&] { parse("[bogus]\n"); }) == Errc::config);
  CHECK(error_code_of([&] { parse("[inspector]\nabc = D\n"); }) == Errc::config);
  CHECK(error_code_of([&] { parse("[inspector]\n1 = Q\n"); }) == Errc::config);
  CHECK(error_code_of([&] { parse("[kpm]\nnone = X\n"); }) == Errc::config);
  CHECK(error_code_of([&] { parse("[attestation]\ncosmic = R\n"); }) == Errc::config);
  CHECK(error_code_of([&] { parse("[kpm]\nsmall X\n"); }) == Errc::config);
  CHECK(error_code_of([] { load_policy("/nonexistent/policy.ini"); }) == Errc::io);
}
