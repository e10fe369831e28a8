#include "ricguard/emulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ricguard/error.hpp"

namespace ricguard {

std::string_view to_string(Slice s) noexcept { return s == Slice::embb ? "eMBB" : "URLLC"; }

void ScenarioConfig::validate() const {
  auto fraction = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (node_count == 0 || cells_per_node == 0) throw Error(Errc::config, "scenario needs nodes and cells");
  if (ue_count() == 0) throw Error(Errc::config, "scenario needs at least one UE");
  if (!fraction(malicious_node_fraction) || !fraction(malicious_message_fraction) || !fraction(poison_target_fraction))
    throw Error(Errc::config, "fractions must lie in [0, 1]");
  if (!(amplification_factor >= 1.0)) throw Error(Errc::config, "amplification_factor must be >= 1");
  if (malicious_node_fraction > 0.0 && malicious_message_fraction >= 1.0)
    throw Error(Errc::config, "malicious_message_fraction must be < 1 when nodes are malicious");
  if (!(ar_coefficient >= 0.0 && ar_coefficient < 1.0)) throw Error(Errc::config, "ar_coefficient must lie in [0, 1)");
  if (variation_coefficient < 0.0 || baseline_jitter < 0.0 || baseline_jitter >= 1.0)
    throw Error(Errc::config, "invalid traffic variation settings");
  if (!fraction(poison_start_probability) || poison_min_ticks == 0 || poison_max_ticks < poison_min_ticks)
    throw Error(Errc::config, "invalid poisoning timeframe settings");
}

ScenarioConfig inspector_preset(std::uint32_t ues_per_cell) {
  ScenarioConfig c;
  c.node_count = 4;
  c.cells_per_node = 3;
  c.ues_per_cell = ues_per_cell;
  c.malicious_node_fraction = 0.5;
  c.malicious_message_fraction = 0.5;
  c.loops = 100;
  c.size_calibrated = true;
  return c;
}

ScenarioConfig detector_preset() {
  ScenarioConfig c;
  c.node_count = 3;
  c.cells_per_node = 3;
  c.total_ues = 50;
  c.poison_target_fraction = 0.2;
  c.amplification_factor = 1.5;
  c.loops = 200;
  return c;
}

ScenarioConfig use_case_preset(std::uint32_t ue_count) {
  auto c = detector_preset();
  c.total_ues = ue_count;
  c.loops = 100;
  return c;
}

FeatureVector slice_baseline(Slice slice) {
  // UEThpUl, PrbUsedUl, UEThpDl, PrbUsedDl, TotNbrUl_per_sec, TotNbrDl_per_sec
  const FeatureVector embb{20'000.0, 30.0, 50'000.0, 60.0, 1'000.0, 2'000.0};
  if (slice == Slice::embb) return embb;
  auto urllc = embb;
  urllc[kUeThpUl] *= 0.2;
  urllc[kUeThpDl] *= 0.2;
  urllc[kTotNbrUlPerSec] *= 2.0;
  urllc[kTotNbrDlPerSec] *= 2.0;
  return urllc;
}

Matrix6 profile_covariance(const FeatureVector& mean, double cv) {
  // Within each direction: throughput~PRB 0.6, throughput~packets 0.5, PRB~packets 0.3.
  Matrix6 corr{};
  for (std::size_t k = 0; k < kFeatureCount; ++k) corr[k][k] = 1.0;
  auto set = [&](std::size_t a, std::size_t b, double r) { corr[a][b] = corr[b][a] = r; };
  set(kUeThpUl, kPrbUsedUl, 0.6);
  set(kUeThpUl, kTotNbrUlPerSec, 0.5);
  set(kPrbUsedUl, kTotNbrUlPerSec, 0.3);
  set(kUeThpDl, kPrbUsedDl, 0.6);
  set(kUeThpDl, kTotNbrDlPerSec, 0.5);
  set(kPrbUsedDl, kTotNbrDlPerSec, 0.3);

  Matrix6 cov{};
  for (std::size_t a = 0; a < kFeatureCount; ++a)
    for (std::size_t b = 0; b < kFeatureCount; ++b) cov[a][b] = corr[a][b] * cv * mean[a] * cv * mean[b];
  return cov;
}

Matrix6 cholesky_psd(const Matrix6& m) {
  Matrix6 l{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double d = m[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
    const double scale = std::max(1.0, std::abs(m[j][j]));
    if (d <= 1e-12 * scale) continue;  // zero pivot: column stays zero
    l[j][j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < kFeatureCount; ++i) {
      double s = m[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      l[i][j] = s / l[j][j];
    }
  }
  return l;
}

namespace {

FeatureVector correlated_normal(const Matrix6& chol, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  FeatureVector e{};
  for (auto& v : e) v = z(rng);
  FeatureVector out{};
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    for (std::size_t k = 0; k <= i; ++k) out[i] += chol[i][k] * e[k];
  return out;
}

}  // namespace

FeatureVector sample_gaussian(const FeatureVector& mean, const Matrix6& chol, std::mt19937_64& rng) {
  const auto noise = correlated_normal(chol, rng);
  FeatureVector x;
  for (std::size_t k = 0; k < kFeatureCount; ++k) x[k] = std::max(0.0, mean[k] + noise[k]);
  return x;
}

void poison_records(std::span<KpmRecord> records, std::span<GroundTruthLabel> labels,
                    const std::function<bool(std::uint32_t)>& is_target,
                    const std::function<const UeProfile&(std::uint32_t)>& profile_of, double af,
                    CovarianceScaling scaling, std::mt19937_64& rng) {
  if (records.size() != labels.size()) throw Error(Errc::contract, "labels must be parallel to records");
  const double cov_factor = scaling == CovarianceScaling::linear ? af : af * af;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    if (!is_target(r.ue_id)) continue;
    const auto& p = profile_of(r.ue_id);
    FeatureVector mean;
    for (std::size_t k = 0; k < kFeatureCount; ++k) mean[k] = af * p.mean[k];
    Matrix6 cov = p.covariance;
    for (auto& row : cov)
      for (auto& v : row) v *= cov_factor;
    r.features = sample_gaussian(mean, cholesky_psd(cov), rng);
    labels[i] = {r.ue_id, r.timestamp_ms, true, af};
  }
}

InjectionTruth inject_signature(E2Message& msg, const SignatureSet& rulebook, std::mt19937_64& rng) {
  if (rulebook.empty()) throw Error(Errc::contract, "cannot inject from an empty rulebook");
  std::uniform_int_distribution<std::size_t> pick(0, rulebook.size() - 1);
  const auto& sig = rulebook.signatures()[pick(rng)];
  std::uniform_int_distribution<std::size_t> where(0, msg.payload.size());
  const auto offset = where(rng);
  msg.payload.insert(msg.payload.begin() + static_cast<std::ptrdiff_t>(offset), sig.pattern.begin(),
                     sig.pattern.end());
  return {sig.id, offset};
}

Emulator::Emulator(ScenarioConfig config, std::shared_ptr<const SignatureSet> rulebook)
    : config_(config), rulebook_(std::move(rulebook)), rng_(config.rng_seed) {
  config_.validate();
  if (config_.malicious_node_fraction > 0.0 && config_.malicious_message_fraction > 0.0 &&
      (!rulebook_ || rulebook_->empty()))
    throw Error(Errc::config, "signature injection needs a rulebook");

  // Malicious nodes: a seeded choice of round(fraction * nodes).
  std::vector<std::uint32_t> nodes(config_.node_count);
  std::iota(nodes.begin(), nodes.end(), 1u);
  std::shuffle(nodes.begin(), nodes.end(), rng_);
  const auto malicious = static_cast<std::size_t>(std::lround(config_.malicious_node_fraction * config_.node_count));
  malicious_nodes_.assign(config_.node_count, false);
  for (std::size_t i = 0; i < malicious; ++i) malicious_nodes_[nodes[i] - 1] = true;

  // UEs: first half eMBB, second half URLLC; cells either filled evenly or at random.
  const auto ue_count = config_.ue_count();
  const auto cells = config_.cell_count();
  std::uniform_int_distribution<std::uint32_t> random_cell(0, cells - 1);
  std::uniform_real_distribution<double> jitter(1.0 - config_.baseline_jitter, 1.0 + config_.baseline_jitter);
  ues_.reserve(ue_count);
  for (std::uint32_t u = 0; u < ue_count; ++u) {
    UeProfile p;
    p.ue_id = u + 1;
    p.slice = u < (ue_count + 1) / 2 ? Slice::embb : Slice::urllc;
    const std::uint32_t cell_index = config_.total_ues != 0 ? random_cell(rng_) : u / config_.ues_per_cell;
    p.node_id = cell_index / config_.cells_per_node + 1;
    p.cell_id = cell_index + 1;
    p.mean = slice_baseline(p.slice);
    for (auto& m : p.mean) m *= jitter(rng_);
    p.covariance = profile_covariance(p.mean, config_.variation_coefficient);
    ues_.push_back(p);
  }

  chol_.reserve(ue_count);
  deviation_.reserve(ue_count);
  for (const auto& p : ues_) {
    chol_.push_back(cholesky_psd(p.covariance));
    deviation_.push_back(correlated_normal(chol_.back(), rng_));  // stationary start
  }

  std::vector<std::uint32_t> order(ue_count);
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), rng_);
  const auto targets = static_cast<std::size_t>(std::lround(config_.poison_target_fraction * ue_count));
  targeted_.assign(ue_count, false);
  for (std::size_t i = 0; i < targets; ++i) targeted_[order[i]] = true;
  poison_remaining_.assign(ue_count, 0);
}

const UeProfile& Emulator::profile(std::uint32_t ue_id) const {
  if (ue_id == 0 || ue_id > ues_.size()) throw Error(Errc::contract, "unknown UE " + std::to_string(ue_id));
  return ues_[ue_id - 1];
}

bool Emulator::node_malicious(std::uint32_t node_id) const {
  return node_id >= 1 && node_id <= malicious_nodes_.size() && malicious_nodes_[node_id - 1];
}

bool Emulator::ue_targeted(std::uint32_t ue_id) const {
  return ue_id >= 1 && ue_id <= targeted_.size() && targeted_[ue_id - 1];
}

TickRecords Emulator::generate_tick(std::uint64_t t) {
  if (t != tick_) throw Error(Errc::contract, "ticks must be generated in order");
  if (t >= config_.loops) throw Error(Errc::contract, "tick beyond scenario length");
  ++tick_;

  const double rho = config_.ar_coefficient;
  const double innovation = std::sqrt(1.0 - rho * rho);
  TickRecords out;
  out.records.reserve(ues_.size());
  out.labels.reserve(ues_.size());
  for (std::size_t u = 0; u < ues_.size(); ++u) {
    const auto noise = correlated_normal(chol_[u], rng_);
    auto& d = deviation_[u];
    KpmRecord r;
    r.ue_id = ues_[u].ue_id;
    r.timestamp_ms = t * 1000;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      d[k] = rho * d[k] + innovation * noise[k];
      r.features[k] = std::max(0.0, ues_[u].mean[k] + d[k]);
    }
    out.records.push_back(r);
    out.labels.push_back({r.ue_id, r.timestamp_ms, false, 1.0});
  }

  // Advance poisoning timeframes, then resample the records under attack.
  std::vector<bool> active(ues_.size(), false);
  if (t >= config_.poison_warmup_ticks) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::uint32_t> length(config_.poison_min_ticks, config_.poison_max_ticks);
    for (std::size_t u = 0; u < ues_.size(); ++u) {
      if (!targeted_[u]) continue;
      if (poison_remaining_[u] == 0 && coin(rng_) < config_.poison_start_probability)
        poison_remaining_[u] = length(rng_);
      if (poison_remaining_[u] > 0) {
        active[u] = true;
        --poison_remaining_[u];
      }
    }
  }
  poison_records(
      out.records, out.labels, [&](std::uint32_t ue) { return active[ue - 1]; },
      [&](std::uint32_t ue) -> const UeProfile& { return ues_[ue - 1]; }, config_.amplification_factor,
      config_.covariance_scaling, rng_);
  return out;
}

void Emulator::maybe_inject(EmittedMessage& m) {
  if (!node_malicious(m.message.source_node_id) || config_.malicious_message_fraction <= 0.0) return;
  std::bernoulli_distribution inject(config_.malicious_message_fraction);
  if (inject(rng_)) m.injected = inject_signature(m.message, *rulebook_, rng_);
}

std::vector<EmittedMessage> Emulator::step(TickRecords* tick_records) {
  const auto t = tick_;
  std::vector<EmittedMessage> out;

  if (t == 0) {
    for (std::uint32_t node = 1; node <= config_.node_count; ++node) {
      EmittedMessage setup;
      setup.message.kind = E2MessageKind::SetupRequest;
      setup.message.source_node_id = node;
      setup.message.payload.resize(kSetupRequestPayloadSize);
      for (auto& b : setup.message.payload) b = static_cast<std::uint8_t>(rng_() >> 56);
      maybe_inject(setup);
      out.push_back(std::move(setup));

      EmittedMessage sub;
      sub.message.kind = E2MessageKind::SubscriptionResponse;
      sub.message.source_node_id = node;
      sub.message.payload.resize(kSubscriptionResponsePayloadSize);
      for (auto& b : sub.message.payload) b = static_cast<std::uint8_t>(rng_() >> 56);
      maybe_inject(sub);
      out.push_back(std::move(sub));
    }
  }

  auto tick = generate_tick(t);
  std::map<std::uint32_t, std::vector<KpmRecord>> by_cell;
  for (const auto& r : tick.records) by_cell[ues_[r.ue_id - 1].cell_id].push_back(r);

  for (auto& [cell, records] : by_cell) {
    EmittedMessage ind;
    ind.cell_id = cell;
    ind.message.kind = E2MessageKind::Indication;
    ind.message.source_node_id = (cell - 1) / config_.cells_per_node + 1;
    KpmReportPayload report{ind.message.source_node_id, cell, std::move(records)};
    if (config_.size_calibrated) {
      ind.message.payload = encode_kpm_payload(
          report, SizeCalibratedPayload{static_cast<std::uint32_t>(report.records.size()), rng_()});
    } else {
      ind.message.payload = encode_kpm_payload(report);
    }
    maybe_inject(ind);
    out.push_back(std::move(ind));
  }

  if (tick_records) *tick_records = std::move(tick);
  return out;
}

std::vector<EmittedMessage> Emulator::teardown() {
  std::vector<EmittedMessage> out;
  for (std::uint32_t node = 1; node <= config_.node_count; ++node) {
    EmittedMessage del;
    del.message.kind = E2MessageKind::SubscriptionDeleteResponse;
    del.message.source_node_id = node;
    del.message.payload.resize(kSubscriptionDeleteResponsePayloadSize);
    for (auto& b : del.message.payload) b = static_cast<std::uint8_t>(rng_() >> 56);
    maybe_inject(del);
    out.push_back(std::move(del));
  }
  return out;
}

}  // namespace ricguard
