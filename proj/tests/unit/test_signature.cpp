#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "ricguard/signature.hpp"
#include "test_support.hpp"

using namespace ricguard;
using testing::error_code_of;

namespace {

Signature sig(std::uint32_t id, std::string_view pattern, ActionSet actions = {MitigationAction::DropMessage}) {
  const auto b = as_bytes(pattern);
  return {id, Bytes(b.begin(), b.end()), actions, "test"};
}

}  // namespace

TEST_CASE("signature set validation") {
  SignatureSet set;
  set.add(sig(1, "ABCD"));
  CHECK(error_code_of([&] { set.add(sig(1, "WXYZ")); }) == Errc::contract);
  CHECK(error_code_of([&] { set.add(sig(2, "ABC")); }) == Errc::contract);
  CHECK(set.size() == 1);
  CHECK(set.find(1) != nullptr);
  CHECK(set.find(2) == nullptr);
}

TEST_CASE("naive scan finds the planted pattern at its offset") {
  SignatureSet set({sig(42, "EXPLOIT-CVE-0042"), sig(7, "NEVER-THERE")});
  std::string payload(17, '.');
  payload += "EXPLOIT-CVE-0042";
  payload += "......";
  const auto r = scan_naive(as_bytes(payload), set);
  REQUIRE(r.hits.size() == 1);
  CHECK(r.hits[0] == Hit{42, 17});
  CHECK(r.malicious());
}

TEST_CASE("no match and exact match boundaries") {
  SignatureSet set({sig(1, "ABCD"), sig(2, "WXYZ")});
  const auto matcher = AhoCorasickMatcher::build(set);
  for (auto scan : {+[](ByteView p, const SignatureSet& s, const AhoCorasickMatcher&) { return scan_naive(p, s); },
                    +[](ByteView p, const SignatureSet&, const AhoCorasickMatcher& m) { return scan_automaton(p, m); }}) {
    CHECK(scan(as_bytes("nothing to see"), set, matcher).hits.empty());
    CHECK(scan(as_bytes(""), set, matcher).hits.empty());
    const auto exact = scan(as_bytes("WXYZ"), set, matcher);
    REQUIRE(exact.hits.size() == 1);
    CHECK(exact.hits[0] == Hit{2, 0});
  }
}

TEST_CASE("suffix pattern inside a longer one is reported by both matchers") {
  SignatureSet suffix({sig(10, "ABCDE"), sig(11, "BCDE")});
  const auto m = AhoCorasickMatcher::build(suffix);
  const auto a = scan_automaton(as_bytes("ABCDE"), m);
  const auto n = scan_naive(as_bytes("ABCDE"), suffix);
  CHECK(a.same_hits(n));
  REQUIRE(a.hits.size() == 2);
  CHECK(a.hits[0] == Hit{10, 0});
  CHECK(a.hits[1] == Hit{11, 1});
}

TEST_CASE("hits follow rulebook order and report first occurrence only") {
  SignatureSet set({sig(5, "ZZZZ"), sig(3, "AAAA")});
  const auto payload = as_bytes("AAAAAAAA--ZZZZ--ZZZZ");
  const auto n = scan_naive(payload, set);
  REQUIRE(n.hits.size() == 2);
  CHECK(n.hits[0] == Hit{5, 10});
  CHECK(n.hits[1] == Hit{3, 0});
  CHECK(scan_automaton(payload, AhoCorasickMatcher::build(set)).same_hits(n));
}

TEST_CASE("duplicate patterns are kept with a warning") {
  SignatureSet set({sig(1, "SAME"), sig(2, "SAME")});
  const auto m = AhoCorasickMatcher::build(set);
  CHECK(m.warnings().size() == 1);
  const auto r = scan_automaton(as_bytes("xxSAMExx"), m);
  REQUIRE(r.hits.size() == 2);
  CHECK(r.hits[0] == Hit{1, 2});
  CHECK(r.hits[1] == Hit{2, 2});
}

TEST_CASE("empty set cannot build a matcher") {
  CHECK(error_code_of([] { AhoCorasickMatcher::build(SignatureSet{}); }) == Errc::contract);
}

TEST_CASE("both matchers agree with the substring oracle on random overlapping sets") {
  std::mt19937_64 rng(2024);
  std::size_t malicious = 0;
  for (int trial = 0; trial < 10'000; ++trial) {
    const int alphabet = 2 + static_cast<int>(rng() % 3);
    const auto set = oracle::overlapping_set(rng, alphabet);
    const auto m = AhoCorasickMatcher::build(set);
    const auto payload = oracle::payload_over(rng, set, alphabet);
    const auto expected = oracle::substring_hits(payload, set);
    const auto naive = scan_naive(payload, set);
    const auto automaton = scan_automaton(payload, m);
    REQUIRE(naive.hits == expected);
    REQUIRE(automaton.hits == expected);
    malicious += expected.empty() ? 0 : 1;
  }
  // The generator must exercise both outcomes.
  CHECK(malicious > 1000);
  CHECK(malicious < 10'000);
}

TEST_CASE("completeness: prefix + pattern + suffix always hits") {
  std::mt19937_64 rng(8);
  const auto book = synthetic_rulebook(100, 77);
  const auto m = AhoCorasickMatcher::build(book);
  for (int trial = 0; trial < 500; ++trial) {
    const auto& s = book.signatures()[rng() % book.size()];
    auto payload = testing::random_bytes(rng, rng() % 300);
    const auto prefix = rng() % (payload.size() + 1);
    payload.insert(payload.begin() + static_cast<std::ptrdiff_t>(prefix), s.pattern.begin(), s.pattern.end());
    const auto r = scan_automaton(payload, m);
    const bool found = std::any_of(r.hits.begin(), r.hits.end(), [&](const Hit& h) { return h.signature_id == s.id; });
    REQUIRE(found);
    REQUIRE(scan_naive(payload, book).same_hits(r));
  }
}

TEST_CASE("soundness: payload without any pattern byte yields nothing") {
  SignatureSet set({sig(1, "ABCD"), sig(2, "BCDA")});
  Bytes payload(5000, 'Q');
  CHECK(scan_naive(payload, set).hits.empty());
  CHECK(scan_automaton(payload, AhoCorasickMatcher::build(set)).hits.empty());
}

TEST_CASE("naive comparisons grow with the match offset") {
  const auto book = synthetic_rulebook(100, 3);
  const auto& target = book.signatures().back();
  std::mt19937_64 rng(1);
  const auto filler = testing::random_bytes(rng, 4000);
  std::uint64_t previous = 0;
  for (std::size_t offset = 0; offset <= 4000; offset += 500) {
    Bytes p(filler.begin(), filler.begin() + static_cast<std::ptrdiff_t>(offset));
    p.insert(p.end(), target.pattern.begin(), target.pattern.end());
    const auto r = scan_naive(p, book);
    REQUIRE(r.malicious());
    CHECK(r.comparisons > previous);
    previous = r.comparisons;
  }
}

TEST_CASE("synthetic rulebook shape") {
  const auto book = synthetic_rulebook();
  REQUIRE(book.size() == 100);
  for (const auto& s : book.signatures()) {
    CHECK(s.pattern.size() >= 8);
    CHECK(s.pattern.size() <= 32);
    CHECK(s.label.rfind("CVE-", 0) == 0);
    CHECK(ActionSet{MitigationAction::DropMessage, MitigationAction::BlockNode, MitigationAction::Report}.includes(
        s.actions));
  }
  const auto again = synthetic_rulebook();
  for (std::size_t i = 0; i < book.size(); ++i) CHECK(again.signatures()[i].pattern == book.signatures()[i].pattern);
}

TEST_CASE("rulebook text round trip") {
  const auto book = synthetic_rulebook(20, 9);
  std::stringstream text;
  write_rulebook(text, book);
  const auto back = parse_rulebook(text);
  REQUIRE(back.size() == book.size());
  for (std::size_t i = 0; i < book.size(); ++i) {
    CHECK(back.signatures()[i].id == book.signatures()[i].id);
    CHECK(back.signatures()[i].pattern == book.signatures()[i].pattern);
    CHECK(back.signatures()[i].actions == book.signatures()[i].actions);
    CHECK(back.signatures()[i].label == book.signatures()[i].label);
  }
}

TEST_CASE("rulebook parsing errors") {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return parse_rulebook(in);
  };
  CHECK(parse("# comment\n\n1,41424344,DR,CVE-1\n").size() == 1);
  CHECK(error_code_of([&] { parse("1,4142434,D,x\n"); }) == Errc::config);    // odd hex
  CHECK(error_code_of([&] { parse("1,41424344,X,x\n"); }) == Errc::config);   // code outside D/B/R
  CHECK(error_code_of([&] { parse("1,414243,D,x\n"); }) == Errc::config);     // too short
  CHECK(error_code_of([&] { parse("a,41424344,D,x\n"); }) == Errc::config);   // bad id
  CHECK(error_code_of([&] { parse("1,41424344,D\n"); }) == Errc::config);     // missing label
  CHECK(error_code_of([&] { parse("1,41424344,D,x\n1,45464748,D,y\n"); }) == Errc::config);
}
