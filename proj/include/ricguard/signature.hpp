#ifndef RICGUARD_SIGNATURE_HPP_
#define RICGUARD_SIGNATURE_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ricguard/actions.hpp"
#include "ricguard/bytes.hpp"

namespace ricguard {

inline constexpr std::size_t kMinPatternLength = 4;

/// A known-attack byte pattern and the actions its detection triggers.
struct Signature {
  std::uint32_t id = 0;
  Bytes pattern;       // opaque bytes, at least kMinPatternLength long
  ActionSet actions;   // subset of {DropMessage, BlockNode, Report}
  std::string label;
};

/// Rulebook of signatures. Ids are unique; construction validates.
class SignatureSet {
 public:
  SignatureSet() = default;
  explicit SignatureSet(std::vector<Signature> signatures, std::string version = "unversioned");

  /// Throws Errc::contract on duplicate id or short pattern.
  void add(Signature sig);

  const std::vector<Signature>& signatures() const noexcept { return signatures_; }
  const std::string& version() const noexcept { return version_; }
  std::size_t size() const noexcept { return signatures_.size(); }
  bool empty() const noexcept { return signatures_.empty(); }
  const Signature* find(std::uint32_t id) const noexcept;

 private:
  std::vector<Signature> signatures_;
  std::string version_ = "unversioned";
};

struct Hit {
  std::uint32_t signature_id = 0;
  std::size_t first_offset = 0;

  friend bool operator==(const Hit&, const Hit&) = default;
};

/// Hits are listed in rulebook order, at most one per signature.
struct MatchResult {
  std::vector<Hit> hits;
  std::uint64_t scan_latency_ns = 0;  // filled by the caller that times the scan
  std::uint64_t comparisons = 0;      // matcher work: byte compares or automaton steps

  bool malicious() const noexcept { return !hits.empty(); }
  /// Equal when the hit lists are equal; timing and work counters are ignored.
  bool same_hits(const MatchResult& other) const noexcept { return hits == other.hits; }
};

/// Brute-force scan: every signature is tried at every offset until its first
/// occurrence. `comparisons` counts byte compares.
MatchResult scan_naive(ByteView payload, const SignatureSet& set);

/// Aho-Corasick automaton over a signature set. Immutable after build and
/// safe to share between threads.
class AhoCorasickMatcher {
 public:
  /// Throws Errc::contract on an empty set. Identical patterns under different
  /// ids are kept and reported in warnings().
  static AhoCorasickMatcher build(const SignatureSet& set);

  MatchResult scan(ByteView payload) const;

  std::size_t state_count() const noexcept { return output_begin_.size() - 1; }
  std::size_t pattern_count() const noexcept { return pattern_ids_.size(); }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  AhoCorasickMatcher() = default;

  std::vector<std::int32_t> delta_;          // state * 256 + byte -> next state
  std::vector<std::uint32_t> output_begin_;  // CSR offsets into outputs_, one per state + 1
  std::vector<std::uint32_t> outputs_;       // pattern indices ending at a state (incl. via suffix links)
  std::vector<std::uint32_t> pattern_ids_;
  std::vector<std::uint32_t> pattern_lengths_;
  std::vector<std::string> warnings_;
};

MatchResult scan_automaton(ByteView payload, const AhoCorasickMatcher& matcher);

// Rulebook text format, one rule per line: id,hex(pattern),action_codes,label
// with D/B/R action codes. '#' starts a comment line; blank lines are skipped.

SignatureSet parse_rulebook(std::istream& in, std::string version = "unversioned");
SignatureSet load_rulebook(const std::string& path);
void write_rulebook(std::ostream& out, const SignatureSet& set);

/// Seeded synthetic rulebook: `count` CVE-labelled patterns of 8-32 random
/// random bytes. Action sets cycle through D, DR and DBR.
SignatureSet synthetic_rulebook(std::size_t count = 100, std::uint64_t seed = 0x5eed);

}  // namespace ricguard

#endif  // RICGUARD_SIGNATURE_HPP_
