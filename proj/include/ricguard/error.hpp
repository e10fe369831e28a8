#ifndef RICGUARD_ERROR_HPP_
#define RICGUARD_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ricguard {

enum class Errc {
  protocol,       // bad frame magic or version
  truncation,     // frame or payload shorter than declared
  unknown_kind,   // message kind code outside the enumeration
  payload_cap,    // payload over the 1 MiB frame cap
  domain,         // argument outside the function's domain
  capacity,       // count does not fit the wire field
  contract,       // caller violated a documented precondition
  fit,            // scaler fitting failed
  training,       // non-finite loss during training
  calibration,    // too few windows to calibrate
  registry,       // unknown xApp or reference image
  config,         // malformed configuration, policy or rulebook
  io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ricguard

#endif  // RICGUARD_ERROR_HPP_
