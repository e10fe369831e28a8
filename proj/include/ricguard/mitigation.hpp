#ifndef RICGUARD_MITIGATION_HPP_
#define RICGUARD_MITIGATION_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "ricguard/actions.hpp"
#include "ricguard/anomaly_verdict.hpp"
#include "ricguard/signature.hpp"

namespace ricguard {

/// Operator-defined mapping from detection events to action sets.
struct MitigationPolicy {
  std::map<std::uint32_t, ActionSet> signature_actions;
  std::map<Magnitude, ActionSet> magnitude_actions;
  std::map<XappTier, ActionSet> xapp_tier_actions;

  /// Data-level and attestation defaults with no signature mappings:
  ///   small -> X, moderate -> XR, significant -> XBR
  ///   high_impact -> KVR, standard -> VR, read_only -> R
  static MitigationPolicy defaults();

  /// defaults() plus each signature's rulebook action set.
  static MitigationPolicy from_rulebook(const SignatureSet& rulebook);
};

/// Policy file: sections [inspector], [kpm], [attestation] with lines
/// `key = codes`. Inspector keys are signature ids, or `*` to set every
/// signature already in the policy. Kpm keys are magnitudes, attestation
/// keys are tiers. Entries override `base`. Throws Errc::config.
MitigationPolicy parse_policy(std::istream& in, MitigationPolicy base = MitigationPolicy::defaults());
MitigationPolicy load_policy(const std::string& path, MitigationPolicy base = MitigationPolicy::defaults());
void write_policy(std::ostream& out, const MitigationPolicy& policy);

/// Union of the action sets of every hit signature. Unmapped ids fall back to
/// {DropMessage, Report} and append a policy-gap message to `warnings`.
ActionSet resolve_inspector_event(const MatchResult& match, const MitigationPolicy& policy,
                                  std::vector<std::string>* warnings = nullptr);

/// Throws Errc::contract when the verdict is not anomalous.
ActionSet resolve_kpm_event(const AnomalyVerdict& verdict, std::uint32_t source_node, const MitigationPolicy& policy);

/// Tier actions plus Report. An unknown tier yields {Report} and a warning.
ActionSet resolve_attestation_event(std::string_view xapp_id, std::string_view tier, const MitigationPolicy& policy,
                                    std::vector<std::string>* warnings = nullptr);

/// Blocked nodes and xApps. Reads are shared, writes exclusive.
class Blocklist {
 public:
  bool node_blocked(std::uint32_t node) const;
  bool xapp_blocked(std::string_view xapp) const;
  bool xapp_revoked(std::string_view xapp) const;

  /// Return true when the entry was new.
  bool block_node(std::uint32_t node);
  bool block_xapp(std::string_view xapp);
  bool revoke_xapp(std::string_view xapp);

  std::size_t blocked_node_count() const;

  friend bool operator==(const Blocklist& a, const Blocklist& b);

 private:
  mutable std::shared_mutex mu_;
  std::unordered_set<std::uint32_t> nodes_;
  std::set<std::string, std::less<>> xapps_;
  std::set<std::string, std::less<>> revoked_;
};

enum class Detector : std::uint8_t { inspector, kpm, attestation };
std::string_view to_string(Detector d) noexcept;

/// One detection event handed to the mitigation unit.
struct Incident {
  Detector detector = Detector::inspector;
  std::string subject;   // node id, ue id or xapp id, as text
  std::string evidence;  // magnitude or ';'-joined signature ids
  std::uint64_t timestamp_ms = 0;
  std::uint32_t source_node = 0;  // node to block for inspector/kpm events

  friend auto operator<=>(const Incident&, const Incident&) = default;
};

struct IncidentReport {
  std::uint64_t event_id = 0;
  Detector detector = Detector::inspector;
  std::string subject;
  std::string evidence;
  ActionSet actions;
  std::uint64_t timestamp_ms = 0;
};

enum class Effect : std::uint8_t {
  MessageDropped,
  DataDropped,
  NodeBlocked,
  XappBlocked,
  PrivilegesRevoked,
  Reported,
};

/// Applies resolved action sets: blocklist updates, report logging.
/// Drops are returned as effects for the caller to honour. Re-applying an
/// incident that was already applied changes nothing.
class MitigationUnit {
 public:
  explicit MitigationUnit(Blocklist& blocklist) : blocklist_(blocklist) {}

  std::vector<Effect> apply(ActionSet actions, const Incident& incident);

  const std::vector<IncidentReport>& log() const noexcept { return log_; }
  Blocklist& blocklist() noexcept { return blocklist_; }

  /// Header: event_id,detector,subject,magnitude_or_sigids,actions,timestamp_ms
  void write_log_csv(std::ostream& out) const;

 private:
  Blocklist& blocklist_;
  std::vector<IncidentReport> log_;
  std::set<std::pair<Incident, std::uint8_t>> applied_;
  std::uint64_t next_event_id_ = 1;
};

}  // namespace ricguard

#endif  // RICGUARD_MITIGATION_HPP_
