#include "ricguard/csv.hpp"

#include <cmath>
#include <cstdio>

#include "ricguard/error.hpp"

namespace ricguard {

std::string fixed(double value, int digits) {
  if (value == 0.0) value = 0.0;  // no "-0.000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::string_view header) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::trunc);
  if (!out_) throw Error(Errc::io, "cannot write " + path.string());
  out_ << header << '\n';
}

void CsvWriter::row(std::string_view line) {
  if (out_.is_open()) out_ << line << '\n';
}

}  // namespace ricguard
