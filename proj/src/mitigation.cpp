#include "ricguard/mitigation.hpp"

#include <ostream>

#include "ricguard/error.hpp"

namespace ricguard {

ActionSet resolve_inspector_event(const MatchResult& match, const MitigationPolicy& policy,
                                  std::vector<std::string>* warnings) {
  ActionSet actions;
  for (const auto& hit : match.hits) {
    if (auto it = policy.signature_actions.find(hit.signature_id); it != policy.signature_actions.end()) {
      actions |= it->second;
    } else {
      actions |= ActionSet{MitigationAction::DropMessage, MitigationAction::Report};
      if (warnings) warnings->push_back("policy gap: signature " + std::to_string(hit.signature_id) + " unmapped");
    }
  }
  return actions;
}

ActionSet resolve_kpm_event(const AnomalyVerdict& verdict, std::uint32_t /*source_node*/,
                            const MitigationPolicy& policy) {
  if (!verdict.is_anomalous || verdict.magnitude == Magnitude::none)
    throw Error(Errc::contract, "kpm mitigation requested for a non-anomalous verdict");
  auto it = policy.magnitude_actions.find(verdict.magnitude);
  return it == policy.magnitude_actions.end() ? ActionSet{} : it->second;
}

ActionSet resolve_attestation_event(std::string_view xapp_id, std::string_view tier, const MitigationPolicy& policy,
                                    std::vector<std::string>* warnings) {
  ActionSet actions{MitigationAction::Report};
  const auto parsed = tier_from_string(tier);
  if (!parsed) {
    if (warnings) warnings->push_back("unknown tier '" + std::string(tier) + "' for xApp " + std::string(xapp_id));
    return actions;
  }
  if (auto it = policy.xapp_tier_actions.find(*parsed); it != policy.xapp_tier_actions.end()) actions |= it->second;
  return actions;
}

bool Blocklist::node_blocked(std::uint32_t node) const {
  std::shared_lock lock(mu_);
  return nodes_.contains(node);
}

bool Blocklist::xapp_blocked(std::string_view xapp) const {
  std::shared_lock lock(mu_);
  return xapps_.find(xapp) != xapps_.end();
}

bool Blocklist::xapp_revoked(std::string_view xapp) const {
  std::shared_lock lock(mu_);
  return revoked_.find(xapp) != revoked_.end();
}

bool Blocklist::block_node(std::uint32_t node) {
  std::unique_lock lock(mu_);
  return nodes_.insert(node).second;
}

bool Blocklist::block_xapp(std::string_view xapp) {
  std::unique_lock lock(mu_);
  return xapps_.emplace(xapp).second;
}

bool Blocklist::revoke_xapp(std::string_view xapp) {
  std::unique_lock lock(mu_);
  return revoked_.emplace(xapp).second;
}

std::size_t Blocklist::blocked_node_count() const {
  std::shared_lock lock(mu_);
  return nodes_.size();
}

bool operator==(const Blocklist& a, const Blocklist& b) {
  if (&a == &b) return true;
  std::shared_lock la(a.mu_, std::defer_lock);
  std::shared_lock lb(b.mu_, std::defer_lock);
  std::lock(la, lb);
  return a.nodes_ == b.nodes_ && a.xapps_ == b.xapps_ && a.revoked_ == b.revoked_;
}

std::string_view to_string(Detector d) noexcept {
  switch (d) {
    case Detector::inspector: return "inspector";
    case Detector::kpm: return "kpm";
    case Detector::attestation: return "attestation";
  }
  return "unknown";
}

std::vector<Effect> MitigationUnit::apply(ActionSet actions, const Incident& incident) {
  std::vector<Effect> effects;
  if (actions.empty()) return effects;

  const bool first_time = applied_.emplace(incident, actions.raw()).second;

  // Report goes first so every block is preceded by its incident record.
  if (actions.contains(MitigationAction::Report)) {
    if (first_time)
      log_.push_back({next_event_id_++, incident.detector, incident.subject, incident.evidence, actions,
                      incident.timestamp_ms});
    effects.push_back(Effect::Reported);
  }
  if (actions.contains(MitigationAction::DropMessage)) effects.push_back(Effect::MessageDropped);
  if (actions.contains(MitigationAction::DropData)) effects.push_back(Effect::DataDropped);
  if (actions.contains(MitigationAction::BlockNode)) {
    blocklist_.block_node(incident.source_node);
    effects.push_back(Effect::NodeBlocked);
  }
  if (actions.contains(MitigationAction::BlockXapp)) {
    blocklist_.block_xapp(incident.subject);
    effects.push_back(Effect::XappBlocked);
  }
  if (actions.contains(MitigationAction::RevokePrivileges)) {
    blocklist_.revoke_xapp(incident.subject);
    effects.push_back(Effect::PrivilegesRevoked);
  }
  return effects;
}

void MitigationUnit::write_log_csv(std::ostream& out) const {
  out << "event_id,detector,subject,magnitude_or_sigids,actions,timestamp_ms\n";
  for (const auto& r : log_)
    out << r.event_id << ',' << to_string(r.detector) << ',' << r.subject << ',' << r.evidence << ','
        << r.actions.codes() << ',' << r.timestamp_ms << '\n';
}

}  // namespace ricguard
