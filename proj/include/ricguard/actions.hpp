#ifndef RICGUARD_ACTIONS_HPP_
#define RICGUARD_ACTIONS_HPP_

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ricguard {

/// Every response the mitigation unit can take. The list is closed.
enum class MitigationAction : std::uint8_t {
  DropMessage,
  BlockNode,
  Report,
  DropData,
  RevokePrivileges,
  BlockXapp,
};

inline constexpr std::size_t kMitigationActionCount = 6;

std::string_view to_string(MitigationAction action) noexcept;

/// Single-letter policy code: D X B R V K.
char action_code(MitigationAction action) noexcept;
std::optional<MitigationAction> action_from_code(char code) noexcept;

/// Set of mitigation actions with value semantics (a bitmask underneath).
class ActionSet {
 public:
  constexpr ActionSet() = default;
  constexpr ActionSet(std::initializer_list<MitigationAction> actions) {
    for (auto a : actions) bits_ |= bit(a);
  }

  constexpr bool contains(MitigationAction a) const noexcept { return (bits_ & bit(a)) != 0; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr void insert(MitigationAction a) noexcept { bits_ |= bit(a); }
  constexpr bool includes(ActionSet other) const noexcept { return (bits_ & other.bits_) == other.bits_; }
  std::size_t size() const noexcept;

  /// Members in enumeration order.
  std::vector<MitigationAction> members() const;

  /// Codes in enumeration order, e.g. "DBR" or "RX".
  std::string codes() const;

  /// Parses action codes. Whitespace is ignored; `allowed` restricts the
  /// accepted letters (the rulebook only knows D, B and R).
  static ActionSet parse(std::string_view codes, std::string_view allowed = "DXBRVK");

  constexpr ActionSet& operator|=(ActionSet other) noexcept {
    bits_ |= other.bits_;
    return *this;
  }
  friend constexpr ActionSet operator|(ActionSet a, ActionSet b) noexcept { return a |= b; }
  friend constexpr bool operator==(ActionSet, ActionSet) = default;

  constexpr std::uint8_t raw() const noexcept { return bits_; }

 private:
  static constexpr std::uint8_t bit(MitigationAction a) noexcept {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(a));
  }
  std::uint8_t bits_ = 0;
};

/// Deviation magnitude of an anomalous telemetry record.
enum class Magnitude : std::uint8_t { none, small, moderate, significant };

std::string_view to_string(Magnitude m) noexcept;
std::optional<Magnitude> magnitude_from_string(std::string_view s) noexcept;

/// Privilege tier of an xApp, used to pick the attestation response.
enum class XappTier : std::uint8_t { high_impact, standard, read_only };

std::string_view to_string(XappTier t) noexcept;
std::optional<XappTier> tier_from_string(std::string_view s) noexcept;

}  // namespace ricguard

#endif  // RICGUARD_ACTIONS_HPP_
