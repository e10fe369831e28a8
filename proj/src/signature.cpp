#include "ricguard/signature.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "ricguard/error.hpp"

namespace ricguard {

SignatureSet::SignatureSet(std::vector<Signature> signatures, std::string version) : version_(std::move(version)) {
  signatures_.reserve(signatures.size());
  for (auto& s : signatures) add(std::move(s));
}

void SignatureSet::add(Signature sig) {
  if (sig.pattern.size() < kMinPatternLength)
    throw Error(Errc::contract, "signature " + std::to_string(sig.id) + " pattern shorter than " +
                                    std::to_string(kMinPatternLength) + " bytes");
  if (find(sig.id) != nullptr) throw Error(Errc::contract, "duplicate signature id " + std::to_string(sig.id));
  signatures_.push_back(std::move(sig));
}

const Signature* SignatureSet::find(std::uint32_t id) const noexcept {
  auto it = std::find_if(signatures_.begin(), signatures_.end(), [id](const Signature& s) { return s.id == id; });
  return it == signatures_.end() ? nullptr : &*it;
}

MatchResult scan_naive(ByteView payload, const SignatureSet& set) {
  MatchResult result;
  const std::size_t n = payload.size();
  for (const auto& sig : set.signatures()) {
    const std::size_t m = sig.pattern.size();
    if (m > n) continue;
    for (std::size_t offset = 0; offset + m <= n; ++offset) {
      std::size_t j = 0;
      while (j < m) {
        ++result.comparisons;
        if (payload[offset + j] != sig.pattern[j]) break;
        ++j;
      }
      if (j == m) {
        result.hits.push_back({sig.id, offset});
        break;
      }
    }
  }
  return result;
}

MatchResult scan_automaton(ByteView payload, const AhoCorasickMatcher& matcher) { return matcher.scan(payload); }

}  // namespace ricguard
