#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "ricguard/error.hpp"
#include "ricguard/signature.hpp"

namespace ricguard {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

SignatureSet parse_rulebook(std::istream& in, std::string version) {
  SignatureSet set({}, std::move(version));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;

    const auto where = " (rulebook line " + std::to_string(line_no) + ")";
    const auto c1 = text.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : text.find(',', c1 + 1);
    const auto c3 = c2 == std::string_view::npos ? c2 : text.find(',', c2 + 1);
    if (c3 == std::string_view::npos) throw Error(Errc::config, "expected id,hex,actions,label" + where);

    Signature sig;
    const auto id_text = trim(text.substr(0, c1));
    try {
      std::size_t used = 0;
      const auto id = std::stoul(std::string(id_text), &used);
      if (used != id_text.size() || id > 0xFFFFFFFFul) throw std::out_of_range("id");
      sig.id = static_cast<std::uint32_t>(id);
    } catch (const std::logic_error&) {
      throw Error(Errc::config, "invalid signature id" + where);
    }
    try {
      sig.pattern = from_hex(trim(text.substr(c1 + 1, c2 - c1 - 1)));
      sig.actions = ActionSet::parse(trim(text.substr(c2 + 1, c3 - c2 - 1)), "DBR");
      sig.label = std::string(trim(text.substr(c3 + 1)));
      set.add(std::move(sig));
    } catch (const Error& e) {
      throw Error(Errc::config, e.what() + where);
    }
  }
  return set;
}

SignatureSet load_rulebook(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open rulebook " + path);
  return parse_rulebook(in, path);
}

void write_rulebook(std::ostream& out, const SignatureSet& set) {
  out << "# rulebook " << set.version() << ": id,hex(pattern),action_codes,label\n";
  for (const auto& s : set.signatures())
    out << s.id << ',' << to_hex(s.pattern) << ',' << s.actions.codes() << ',' << s.label << '\n';
}

SignatureSet synthetic_rulebook(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length(8, 32);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> year(2015, 2025);
  std::uniform_int_distribution<int> number(1000, 49999);

  static const ActionSet kActionChoices[] = {
      {MitigationAction::DropMessage},
      {MitigationAction::DropMessage, MitigationAction::Report},
      {MitigationAction::DropMessage, MitigationAction::BlockNode, MitigationAction::Report},
  };

  SignatureSet set({}, "synthetic-" + std::to_string(seed));
  for (std::size_t i = 0; i < count; ++i) {
    Signature sig;
    sig.id = static_cast<std::uint32_t>(i + 1);
    sig.pattern.resize(length(rng));
    for (auto& b : sig.pattern) b = static_cast<std::uint8_t>(byte(rng));
    sig.actions = kActionChoices[i % 3];
    sig.label = "CVE-" + std::to_string(year(rng)) + "-" + std::to_string(number(rng));
    set.add(std::move(sig));
  }
  return set;
}

}  // namespace ricguard
