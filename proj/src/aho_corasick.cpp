#include "ricguard/signature.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <string>

#include "ricguard/error.hpp"

namespace ricguard {

// Construction works on a sparse trie, then flattens it into a dense
// 256-way transition table with failure transitions folded in.
AhoCorasickMatcher AhoCorasickMatcher::build(const SignatureSet& set) {
  if (set.empty()) throw Error(Errc::contract, "cannot build a matcher from an empty signature set");

  AhoCorasickMatcher m;
  const auto& sigs = set.signatures();

  std::map<Bytes, std::uint32_t> seen;
  for (std::uint32_t i = 0; i < sigs.size(); ++i) {
    auto [it, inserted] = seen.emplace(sigs[i].pattern, sigs[i].id);
    if (!inserted)
      m.warnings_.push_back("signature " + std::to_string(sigs[i].id) + " duplicates the pattern of signature " +
                            std::to_string(it->second));
    m.pattern_ids_.push_back(sigs[i].id);
    m.pattern_lengths_.push_back(static_cast<std::uint32_t>(sigs[i].pattern.size()));
  }

  // Trie with -1 for missing edges.
  std::vector<std::int32_t> go(256, -1);
  std::vector<std::vector<std::uint32_t>> out(1);
  for (std::uint32_t i = 0; i < sigs.size(); ++i) {
    std::int32_t state = 0;
    for (auto byte : sigs[i].pattern) {
      const auto slot = static_cast<std::size_t>(state) * 256 + byte;
      if (go[slot] < 0) {
        go[slot] = static_cast<std::int32_t>(out.size());
        out.emplace_back();
        go.resize(go.size() + 256, -1);
      }
      state = go[slot];
    }
    out[static_cast<std::size_t>(state)].push_back(i);
  }

  // BFS computes failure links and completes the transition function.
  std::vector<std::int32_t> fail(out.size(), 0);
  std::queue<std::int32_t> frontier;
  for (std::size_t c = 0; c < 256; ++c) {
    auto& edge = go[c];
    if (edge < 0) {
      edge = 0;
    } else {
      fail[static_cast<std::size_t>(edge)] = 0;
      frontier.push(edge);
    }
  }
  while (!frontier.empty()) {
    const auto state = frontier.front();
    frontier.pop();
    const auto& suffix_out = out[static_cast<std::size_t>(fail[static_cast<std::size_t>(state)])];
    auto& own = out[static_cast<std::size_t>(state)];
    own.insert(own.end(), suffix_out.begin(), suffix_out.end());
    for (std::size_t c = 0; c < 256; ++c) {
      auto& edge = go[static_cast<std::size_t>(state) * 256 + c];
      const auto via_fail = go[static_cast<std::size_t>(fail[static_cast<std::size_t>(state)]) * 256 + c];
      if (edge < 0) {
        edge = via_fail;
      } else {
        fail[static_cast<std::size_t>(edge)] = via_fail;
        frontier.push(edge);
      }
    }
  }

  m.delta_ = std::move(go);
  m.output_begin_.reserve(out.size() + 1);
  m.output_begin_.push_back(0);
  for (auto& o : out) {
    std::sort(o.begin(), o.end());
    m.outputs_.insert(m.outputs_.end(), o.begin(), o.end());
    m.output_begin_.push_back(static_cast<std::uint32_t>(m.outputs_.size()));
  }
  return m;
}

MatchResult AhoCorasickMatcher::scan(ByteView payload) const {
  constexpr std::size_t kNotFound = static_cast<std::size_t>(-1);
  std::vector<std::size_t> first(pattern_ids_.size(), kNotFound);
  std::size_t remaining = pattern_ids_.size();

  MatchResult result;
  std::int32_t state = 0;
  for (std::size_t pos = 0; pos < payload.size() && remaining > 0; ++pos) {
    state = delta_[static_cast<std::size_t>(state) * 256 + payload[pos]];
    ++result.comparisons;
    const auto s = static_cast<std::size_t>(state);
    for (auto k = output_begin_[s]; k < output_begin_[s + 1]; ++k) {
      const auto idx = outputs_[k];
      if (first[idx] == kNotFound) {
        first[idx] = pos + 1 - pattern_lengths_[idx];
        --remaining;
      }
    }
  }

  for (std::size_t i = 0; i < first.size(); ++i)
    if (first[i] != kNotFound) result.hits.push_back({pattern_ids_[i], first[i]});
  return result;
}

}  // namespace ricguard
