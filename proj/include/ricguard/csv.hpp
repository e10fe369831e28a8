#ifndef RICGUARD_CSV_HPP_
#define RICGUARD_CSV_HPP_

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

namespace ricguard {

/// Fixed-point text with `digits` decimals; stable across runs.
std::string fixed(double value, int digits = 6);

/// Line-oriented CSV file. A default-constructed writer discards output.
class CsvWriter {
 public:
  CsvWriter() = default;
  /// Creates parent directories. Throws Errc::io when the file cannot be opened.
  CsvWriter(const std::filesystem::path& path, std::string_view header);

  void row(std::string_view line);
  bool active() const noexcept { return out_.is_open(); }

 private:
  std::ofstream out_;
};

}  // namespace ricguard

#endif  // RICGUARD_CSV_HPP_
