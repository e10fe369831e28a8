#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "ricguard/error.hpp"
#include "ricguard/mitigation.hpp"

namespace ricguard {

MitigationPolicy MitigationPolicy::defaults() {
  using A = MitigationAction;
  MitigationPolicy p;
  p.magnitude_actions[Magnitude::small] = {A::DropData};
  p.magnitude_actions[Magnitude::moderate] = {A::DropData, A::Report};
  p.magnitude_actions[Magnitude::significant] = {A::DropData, A::BlockNode, A::Report};
  p.xapp_tier_actions[XappTier::high_impact] = {A::BlockXapp, A::RevokePrivileges, A::Report};
  p.xapp_tier_actions[XappTier::standard] = {A::RevokePrivileges, A::Report};
  p.xapp_tier_actions[XappTier::read_only] = {A::Report};
  return p;
}

MitigationPolicy MitigationPolicy::from_rulebook(const SignatureSet& rulebook) {
  auto p = defaults();
  for (const auto& s : rulebook.signatures()) p.signature_actions[s.id] = s.actions;
  return p;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

MitigationPolicy parse_policy(std::istream& in, MitigationPolicy base) {
  enum class Section { none, inspector, kpm, attestation } section = Section::none;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const auto where = " (policy line " + std::to_string(line_no) + ")";

    if (line.front() == '[') {
      if (line == "[inspector]") section = Section::inspector;
      else if (line == "[kpm]") section = Section::kpm;
      else if (line == "[attestation]") section = Section::attestation;
      else throw Error(Errc::config, "unknown section " + line + where);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::config, "expected key = codes" + where);
    const auto key = trim(line.substr(0, eq));
    ActionSet actions;
    try {
      actions = ActionSet::parse(trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(Errc::config, e.what() + where);
    }

    switch (section) {
      case Section::none:
        throw Error(Errc::config, "entry outside of a section" + where);
      case Section::inspector:
        if (key == "*") {
          for (auto& [id, set] : base.signature_actions) set = actions;
        } else {
          try {
            std::size_t used = 0;
            const auto id = std::stoul(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
            base.signature_actions[static_cast<std::uint32_t>(id)] = actions;
          } catch (const std::logic_error&) {
            throw Error(Errc::config, "invalid signature id '" + key + "'" + where);
          }
        }
        break;
      case Section::kpm: {
        const auto m = magnitude_from_string(key);
        if (!m || *m == Magnitude::none) throw Error(Errc::config, "unknown magnitude '" + key + "'" + where);
        base.magnitude_actions[*m] = actions;
        break;
      }
      case Section::attestation: {
        const auto t = tier_from_string(key);
        if (!t) throw Error(Errc::config, "unknown xApp tier '" + key + "'" + where);
        // Report is mandatory for attestation violations.
        actions.insert(MitigationAction::Report);
        base.xapp_tier_actions[*t] = actions;
        break;
      }
    }
  }
  return base;
}

MitigationPolicy load_policy(const std::string& path, MitigationPolicy base) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open policy " + path);
  return parse_policy(in, std::move(base));
}

void write_policy(std::ostream& out, const MitigationPolicy& policy) {
  out << "[inspector]\n";
  for (const auto& [id, set] : policy.signature_actions) out << id << " = " << set.codes() << '\n';
  out << "\n[kpm]\n";
  for (const auto& [m, set] : policy.magnitude_actions) out << to_string(m) << " = " << set.codes() << '\n';
  out << "\n[attestation]\n";
  for (const auto& [t, set] : policy.xapp_tier_actions) out << to_string(t) << " = " << set.codes() << '\n';
}

}  // namespace ricguard
