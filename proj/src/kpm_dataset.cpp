#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

#include "ricguard/error.hpp"
#include "ricguard/kpm_record.hpp"

namespace ricguard {

namespace {

std::string header_line() {
  std::string h;
  for (auto name : kKpmColumnNames) {
    if (!h.empty()) h += ',';
    h += name;
  }
  return h;
}

template <typename T>
T field(std::string_view text, std::size_t line_no) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw Error(Errc::config, "dataset line " + std::to_string(line_no) + ": bad field '" + std::string(text) + "'");
  return v;
}

}  // namespace

void write_kpm_csv(std::ostream& out, std::span<const KpmRecord> records) {
  out << header_line() << '\n';
  char buf[32];
  for (const auto& r : records) {
    out << r.timestamp_ms << ',' << r.ue_id;
    for (double f : r.features) {
      std::snprintf(buf, sizeof buf, "%.17g", f);
      out << ',' << buf;
    }
    out << '\n';
  }
}

std::vector<KpmRecord> read_kpm_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != header_line()) throw Error(Errc::config, "dataset header does not match");
  std::vector<KpmRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    for (auto comma = rest.find(','); comma != std::string_view::npos; comma = rest.find(',')) {
      cols.push_back(rest.substr(0, comma));
      rest.remove_prefix(comma + 1);
    }
    cols.push_back(rest);
    if (cols.size() != kKpmColumnNames.size())
      throw Error(Errc::config, "dataset line " + std::to_string(line_no) + ": expected 8 columns");
    KpmRecord r;
    r.timestamp_ms = field<std::uint64_t>(cols[0], line_no);
    r.ue_id = field<std::uint32_t>(cols[1], line_no);
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      const std::string text(cols[k + 2]);
      char* end = nullptr;
      r.features[k] = std::strtod(text.c_str(), &end);
      if (text.empty() || end != text.c_str() + text.size() || !(r.features[k] >= 0.0))
        throw Error(Errc::config, "dataset line " + std::to_string(line_no) + ": negative or invalid feature");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace ricguard
