#ifndef RICGUARD_ATTESTATION_HPP_
#define RICGUARD_ATTESTATION_HPP_

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "ricguard/actions.hpp"
#include "ricguard/bytes.hpp"
#include "ricguard/digest.hpp"
#include "ricguard/timing.hpp"

namespace ricguard {

using Nonce = std::array<std::uint8_t, 32>;

/// Simulated in-memory binary of a running xApp.
struct XappImage {
  std::string xapp_id;
  Bytes live_bytes;
  std::size_t declared_size = 0;
};

struct ReferenceImage {
  std::string xapp_id;
  std::shared_ptr<const Bytes> trusted_bytes;
  std::string source_path;
};

struct AttestationChallenge {
  std::string xapp_id;
  Nonce nonce{};
  std::uint64_t issued_at_ns = 0;
};

struct AttestationResponse {
  std::string xapp_id;
  Nonce nonce{};  // echoed from the challenge the digest was computed for
  Digest digest{};
  std::uint64_t responded_at_ns = 0;
};

/// The xApp-side attester: SHA-256(nonce || live_bytes).
/// Throws Errc::contract when the challenge names another xApp.
AttestationResponse attest(const XappImage& image, const AttestationChallenge& challenge,
                           std::uint64_t responded_at_ns = 0);

/// Digest over nonce followed by image bytes.
Digest seeded_digest(const Nonce& nonce, ByteView image);

struct InjectionRecord {
  std::string xapp_id;
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// Splices `payload` into the live image at `offset`, growing it.
/// Throws Errc::contract when offset is past the end of the image.
InjectionRecord inject_code(XappImage& image, std::size_t offset, ByteView payload);

enum class AttestationVerdict : std::uint8_t {
  valid,
  integrity_violation,  // digest does not match the reference image
  replay_violation,     // challenge not outstanding, or digest of an earlier nonce
  expired,              // answered after the challenge expiry
};

std::string_view to_string(AttestationVerdict v) noexcept;
inline bool is_violation(AttestationVerdict v) noexcept { return v != AttestationVerdict::valid; }

struct RoundResult {
  std::string xapp_id;
  AttestationVerdict verdict = AttestationVerdict::valid;
  double latency_ms = 0.0;
  bool cold_start = false;
};

/// Platform-side attestation engine.
///
/// Reference images are registered by path and read on first use. Each
/// challenge carries a fresh 32-byte nonce; one challenge per xApp is
/// outstanding at a time and is consumed by verification. Rounds for one
/// xApp are serialised, rounds for distinct xApps may run concurrently.
class AttestationEngine {
 public:
  using NonceSource = std::function<Nonce()>;
  using Clock = std::function<std::uint64_t()>;

  struct Options {
    std::uint64_t challenge_expiry_ns = 1'000'000'000;  // 1 simulated second
    std::size_t nonce_history = 64;                     // remembered nonces per xApp
    TimingMode timing = TimingMode::wall;
  };

  /// Defaults: OpenSSL CSPRNG nonces, monotonic clock.
  AttestationEngine();
  AttestationEngine(NonceSource nonces, Clock clock, Options options);

  /// Throws Errc::registry when the id is already registered.
  void register_reference(const std::string& xapp_id, const std::string& path, XappTier tier = XappTier::standard);
  bool registered(std::string_view xapp_id) const;
  std::optional<XappTier> tier(std::string_view xapp_id) const;
  /// Drops the cached reference so the next round reloads it from disk.
  void evict_reference(std::string_view xapp_id);

  /// Throws Errc::registry for unknown xApps.
  AttestationChallenge issue_challenge(const std::string& xapp_id);

  /// Checks the response against SHA-256(nonce || reference). The challenge
  /// must be the outstanding one for its xApp and is consumed either way; a
  /// response echoing any other nonce is a replay.
  /// Throws Errc::registry for unknown xApps.
  AttestationVerdict verify(const AttestationChallenge& challenge, const AttestationResponse& response);

  /// Challenge, attester response and verification, timed end to end. The
  /// first round after registration includes reading the reference from disk.
  RoundResult attestation_round(const XappImage& image);

 private:
  struct Entry {
    std::string path;
    XappTier tier = XappTier::standard;
    std::shared_ptr<const Bytes> reference;
    std::optional<AttestationChallenge> outstanding;
    std::deque<std::pair<Nonce, Digest>> history;  // recent nonces with their expected digests
    std::unique_ptr<std::mutex> round_mutex = std::make_unique<std::mutex>();
  };

  Entry& entry(std::string_view xapp_id);
  std::shared_ptr<const Bytes> reference_of(Entry& e, bool* loaded);

  NonceSource nonces_;
  Clock clock_;
  Options options_;
  mutable std::mutex mu_;
  std::map<std::string, Entry, std::less<>> entries_;
};

/// `round,xapp_id,image_mb,latency_ms,outcome` row (no newline).
std::string attestation_csv_row(std::size_t round, const RoundResult& r, double image_mb);

/// Writes `bytes` to `path`; used to provision reference images.
void write_image_file(const std::string& path, ByteView bytes);

}  // namespace ricguard

#endif  // RICGUARD_ATTESTATION_HPP_
