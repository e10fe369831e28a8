#ifndef RICGUARD_DIGEST_HPP_
#define RICGUARD_DIGEST_HPP_

#include <array>
#include <cstdint>
#include <memory>

#include "ricguard/bytes.hpp"

namespace ricguard {

using Digest = std::array<std::uint8_t, 32>;

/// Incremental SHA-256 (OpenSSL EVP underneath).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;
  Sha256(Sha256&&) noexcept;
  Sha256& operator=(Sha256&&) noexcept;

  Sha256& update(ByteView data);
  /// Finishes the digest and resets for reuse.
  Digest finish();

 private:
  struct Ctx;
  std::unique_ptr<Ctx> ctx_;
};

Digest sha256(ByteView data);

/// Fills `out` from the system CSPRNG. Throws Errc::io on failure.
void secure_random_bytes(std::span<std::uint8_t> out);

}  // namespace ricguard

#endif  // RICGUARD_DIGEST_HPP_
