#include "ricguard/actions.hpp"

#include <bit>
#include <cctype>

#include "ricguard/bytes.hpp"
#include "ricguard/error.hpp"

namespace ricguard {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::protocol: return "protocol";
    case Errc::truncation: return "truncation";
    case Errc::unknown_kind: return "unknown_kind";
    case Errc::payload_cap: return "payload_cap";
    case Errc::domain: return "domain";
    case Errc::capacity: return "capacity";
    case Errc::contract: return "contract";
    case Errc::fit: return "fit";
    case Errc::training: return "training";
    case Errc::calibration: return "calibration";
    case Errc::registry: return "registry";
    case Errc::config: return "config";
    case Errc::io: return "io";
  }
  return "unknown";
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw Error(Errc::config, "hex string has odd length");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = nibble(hex[i]);
    const int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::config, "invalid hex digit");
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

std::string_view to_string(MitigationAction action) noexcept {
  switch (action) {
    case MitigationAction::DropMessage: return "DropMessage";
    case MitigationAction::BlockNode: return "BlockNode";
    case MitigationAction::Report: return "Report";
    case MitigationAction::DropData: return "DropData";
    case MitigationAction::RevokePrivileges: return "RevokePrivileges";
    case MitigationAction::BlockXapp: return "BlockXapp";
  }
  return "Unknown";
}

char action_code(MitigationAction action) noexcept {
  switch (action) {
    case MitigationAction::DropMessage: return 'D';
    case MitigationAction::BlockNode: return 'B';
    case MitigationAction::Report: return 'R';
    case MitigationAction::DropData: return 'X';
    case MitigationAction::RevokePrivileges: return 'V';
    case MitigationAction::BlockXapp: return 'K';
  }
  return '?';
}

std::optional<MitigationAction> action_from_code(char code) noexcept {
  switch (std::toupper(static_cast<unsigned char>(code))) {
    case 'D': return MitigationAction::DropMessage;
    case 'B': return MitigationAction::BlockNode;
    case 'R': return MitigationAction::Report;
    case 'X': return MitigationAction::DropData;
    case 'V': return MitigationAction::RevokePrivileges;
    case 'K': return MitigationAction::BlockXapp;
    default: return std::nullopt;
  }
}

std::size_t ActionSet::size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<MitigationAction> ActionSet::members() const {
  std::vector<MitigationAction> out;
  for (std::size_t i = 0; i < kMitigationActionCount; ++i) {
    const auto a = static_cast<MitigationAction>(i);
    if (contains(a)) out.push_back(a);
  }
  return out;
}

std::string ActionSet::codes() const {
  std::string out;
  for (auto a : members()) out.push_back(action_code(a));
  return out;
}

ActionSet ActionSet::parse(std::string_view codes, std::string_view allowed) {
  ActionSet set;
  for (char c : codes) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const auto action = action_from_code(upper);
    if (!action || allowed.find(upper) == std::string_view::npos)
      throw Error(Errc::config, std::string("unknown action code '") + c + "'");
    set.insert(*action);
  }
  return set;
}

std::string_view to_string(Magnitude m) noexcept {
  switch (m) {
    case Magnitude::none: return "none";
    case Magnitude::small: return "small";
    case Magnitude::moderate: return "moderate";
    case Magnitude::significant: return "significant";
  }
  return "unknown";
}

std::optional<Magnitude> magnitude_from_string(std::string_view s) noexcept {
  for (auto m : {Magnitude::none, Magnitude::small, Magnitude::moderate, Magnitude::significant})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

std::string_view to_string(XappTier t) noexcept {
  switch (t) {
    case XappTier::high_impact: return "high_impact";
    case XappTier::standard: return "standard";
    case XappTier::read_only: return "read_only";
  }
  return "unknown";
}

std::optional<XappTier> tier_from_string(std::string_view s) noexcept {
  for (auto t : {XappTier::high_impact, XappTier::standard, XappTier::read_only})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

}  // namespace ricguard
