#include "ricguard/attestation.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ricguard/error.hpp"

namespace ricguard {

std::string_view to_string(AttestationVerdict v) noexcept {
  switch (v) {
    case AttestationVerdict::valid: return "valid";
    case AttestationVerdict::integrity_violation: return "violation";
    case AttestationVerdict::replay_violation: return "replay";
    case AttestationVerdict::expired: return "expired";
  }
  return "unknown";
}

Digest seeded_digest(const Nonce& nonce, ByteView image) { return Sha256{}.update(nonce).update(image).finish(); }

AttestationResponse attest(const XappImage& image, const AttestationChallenge& challenge,
                           std::uint64_t responded_at_ns) {
  if (challenge.xapp_id != image.xapp_id)
    throw Error(Errc::contract, "challenge for " + challenge.xapp_id + " sent to " + image.xapp_id);
  return {image.xapp_id, challenge.nonce, seeded_digest(challenge.nonce, image.live_bytes), responded_at_ns};
}

InjectionRecord inject_code(XappImage& image, std::size_t offset, ByteView payload) {
  if (offset > image.live_bytes.size()) throw Error(Errc::contract, "injection offset past end of image");
  image.live_bytes.insert(image.live_bytes.begin() + static_cast<std::ptrdiff_t>(offset), payload.begin(),
                          payload.end());
  return {image.xapp_id, offset, payload.size()};
}

AttestationEngine::AttestationEngine()
    : AttestationEngine(
          [] {
            Nonce n;
            secure_random_bytes(n);
            return n;
          },
          monotonic_ns, Options{}) {}

AttestationEngine::AttestationEngine(NonceSource nonces, Clock clock, Options options)
    : nonces_(std::move(nonces)), clock_(std::move(clock)), options_(options) {}

void AttestationEngine::register_reference(const std::string& xapp_id, const std::string& path, XappTier tier) {
  std::lock_guard lock(mu_);
  if (entries_.contains(xapp_id)) throw Error(Errc::registry, "xApp " + xapp_id + " already registered");
  Entry e;
  e.path = path;
  e.tier = tier;
  entries_.emplace(xapp_id, std::move(e));
}

bool AttestationEngine::registered(std::string_view xapp_id) const {
  std::lock_guard lock(mu_);
  return entries_.find(xapp_id) != entries_.end();
}

std::optional<XappTier> AttestationEngine::tier(std::string_view xapp_id) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(xapp_id);
  if (it == entries_.end()) return std::nullopt;
  return it->second.tier;
}

AttestationEngine::Entry& AttestationEngine::entry(std::string_view xapp_id) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(xapp_id);
  if (it == entries_.end()) throw Error(Errc::registry, "no reference image registered for " + std::string(xapp_id));
  return it->second;
}

void AttestationEngine::evict_reference(std::string_view xapp_id) {
  auto& e = entry(xapp_id);
  std::lock_guard lock(mu_);
  e.reference.reset();
}

std::shared_ptr<const Bytes> AttestationEngine::reference_of(Entry& e, bool* loaded) {
  {
    std::lock_guard lock(mu_);
    if (e.reference) return e.reference;
  }
  std::ifstream f(e.path, std::ios::binary);
  if (!f) throw Error(Errc::registry, "cannot read reference image " + e.path);
  auto bytes = std::make_shared<const Bytes>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  if (loaded) *loaded = true;
  std::lock_guard lock(mu_);
  e.reference = bytes;
  return bytes;
}

AttestationChallenge AttestationEngine::issue_challenge(const std::string& xapp_id) {
  auto& e = entry(xapp_id);
  std::lock_guard lock(mu_);
  Nonce nonce = nonces_();
  // A nonce is never handed out twice for the same xApp.
  auto reused = [&](const Nonce& n) {
    for (const auto& [old, digest] : e.history)
      if (old == n) return true;
    return e.outstanding && e.outstanding->nonce == n;
  };
  while (reused(nonce)) nonce = nonces_();
  e.outstanding = AttestationChallenge{xapp_id, nonce, clock_()};
  return *e.outstanding;
}

AttestationVerdict AttestationEngine::verify(const AttestationChallenge& challenge,
                                             const AttestationResponse& response) {
  auto& e = entry(challenge.xapp_id);
  const auto now = clock_();

  std::optional<AttestationChallenge> outstanding;
  {
    std::lock_guard lock(mu_);
    if (e.outstanding && e.outstanding->nonce == challenge.nonce && response.xapp_id == challenge.xapp_id) {
      outstanding = e.outstanding;
      e.outstanding.reset();
    }
  }
  if (!outstanding) return AttestationVerdict::replay_violation;

  const auto reference = reference_of(e, nullptr);
  const auto expected = seeded_digest(outstanding->nonce, *reference);

  std::lock_guard lock(mu_);
  bool replayed = response.nonce != outstanding->nonce;
  for (const auto& [old_nonce, old_digest] : e.history)
    if (old_digest == response.digest) replayed = true;
  e.history.emplace_back(outstanding->nonce, expected);
  while (e.history.size() > options_.nonce_history) e.history.pop_front();

  if (replayed) return AttestationVerdict::replay_violation;
  if (now - outstanding->issued_at_ns > options_.challenge_expiry_ns) return AttestationVerdict::expired;
  return response.digest == expected ? AttestationVerdict::valid : AttestationVerdict::integrity_violation;
}

RoundResult AttestationEngine::attestation_round(const XappImage& image) {
  auto& e = entry(image.xapp_id);
  std::lock_guard round(*e.round_mutex);

  RoundResult r;
  r.xapp_id = image.xapp_id;
  const auto start = monotonic_ns();

  bool loaded = false;
  std::size_t reference_size = 0;
  {
    // Cold start: the trusted image is read from storage on first use.
    const auto reference = reference_of(e, &loaded);
    reference_size = reference->size();
  }
  const auto challenge = issue_challenge(image.xapp_id);
  const auto response = attest(image, challenge, clock_());
  r.verdict = verify(challenge, response);
  r.cold_start = loaded;

  if (options_.timing == TimingMode::wall) {
    r.latency_ms = static_cast<double>(monotonic_ns() - start) / 1e6;
  } else {
    const double hashed = static_cast<double>(image.live_bytes.size() + reference_size + 2 * sizeof(Nonce));
    const double read = loaded ? static_cast<double>(reference_size) : 0.0;
    r.latency_ms = (hashed * cost::kNsPerHashedByte + read * cost::kNsPerLoadedByte) / 1e6;
  }
  return r;
}

std::string attestation_csv_row(std::size_t round, const RoundResult& r, double image_mb) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed << round << ',' << r.xapp_id << ',' << image_mb << ',' << r.latency_ms << ','
      << to_string(r.verdict);
  return out.str();
}

void write_image_file(const std::string& path, ByteView bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::io, "cannot write image " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(Errc::io, "short write to " + path);
}

}  // namespace ricguard
