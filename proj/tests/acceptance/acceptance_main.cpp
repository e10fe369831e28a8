// Acceptance run: one PASS/FAIL line per criterion, exit 0 only when all pass.
//
// Latency criteria use wall-clock timing on this machine; the determinism
// criterion uses the cost model.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ricguard/attestation.hpp"
#include "ricguard/csv.hpp"
#include "ricguard/error.hpp"
#include "ricguard/harness.hpp"
#include "ricguard/mitigation.hpp"

using namespace ricguard;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

int failures = 0;

void report(int id, const char* name, const std::function<Verdict()>& body) {
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail = std::string("exception: ") + e.what();
  }
  if (!v.pass) ++failures;
  std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
  std::fflush(stdout);
}

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ricguard_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    out[fs::relative(e.path(), dir).string()] = {std::istreambuf_iterator<char>(in), {}};
  }
  return out;
}

// ---------------------------------------------------------------------------

Verdict inspector_exactness(const InspectorResult& naive, const InspectorResult& automaton, double seconds) {
  Verdict v;
  for (const auto* r : {&naive, &automaton}) {
    const char* name = r == &naive ? "naive" : "automaton";
    v.require(r->injected > 0, std::string(name) + ": no injected messages");
    v.require(r->detected == r->injected, std::string(name) + ": detected " + std::to_string(r->detected) + "/" +
                                              std::to_string(r->injected));
    v.require(r->false_positives == 0, std::string(name) + ": " + std::to_string(r->false_positives) +
                                           " false positives");
    v.require(r->malicious_dispatched == 0, std::string(name) + ": malicious message dispatched");
  }
  v.require(seconds < 60.0, "runtime " + fixed(seconds, 1) + " s");
  v.note("detection " + fixed(naive.detection_rate_pct(), 2) + "% (" + std::to_string(naive.detected) + "/" +
         std::to_string(naive.injected) + "), FPR " + fixed(naive.false_positive_rate_pct(), 2) + "% over " +
         std::to_string(naive.benign) + " benign, " + fixed(seconds, 1) + " s");
  return v;
}

Verdict inspector_latency_shape(const InspectorResult& r) {
  Verdict v;
  const auto setup = r.of(E2MessageKind::SetupRequest);
  const auto ind = r.of(E2MessageKind::Indication);
  const auto sub = r.of(E2MessageKind::SubscriptionResponse);
  const auto del = r.of(E2MessageKind::SubscriptionDeleteResponse);
  if (!setup || !ind || !sub || !del) {
    v.require(false, "a message kind is missing");
    return v;
  }
  v.require(ind->average_ms < 1.0, "Indication average " + fixed(ind->average_ms, 4) + " ms");
  std::size_t bad_runs = 0;
  for (const auto& run : r.runs) {
    const auto s = run.of(E2MessageKind::SetupRequest);
    const auto i = run.of(E2MessageKind::Indication);
    if (!s || !i || !(s->average_ms > i->average_ms)) ++bad_runs;
  }
  v.require(bad_runs == 0, std::to_string(bad_runs) + " runs with SetupRequest not above Indication");
  v.require(sub->average_ms < ind->average_ms && del->average_ms < ind->average_ms,
            "subscription responses not fastest");
  v.note("avg ms: setup " + fixed(setup->average_ms, 4) + ", indication " + fixed(ind->average_ms, 4) +
         ", sub response " + fixed(sub->average_ms, 4) + ", delete response " + fixed(del->average_ms, 4));
  return v;
}

Verdict matcher_equivalence() {
  Verdict v;
  const auto start = Clock::now();
  std::mt19937_64 rng(0xac);
  std::size_t cases = 0, mismatches = 0, malicious = 0;
  // Small-alphabet sets with overlapping and nested patterns.
  for (int i = 0; i < 15'000; ++i, ++cases) {
    const int alphabet = 2 + static_cast<int>(rng() % 3);
    const auto set = oracle::overlapping_set(rng, alphabet);
    const auto m = AhoCorasickMatcher::build(set);
    const auto payload = oracle::payload_over(rng, set, alphabet);
    const auto naive = scan_naive(payload, set);
    const auto automaton = scan_automaton(payload, m);
    if (!naive.same_hits(automaton) || naive.hits != oracle::substring_hits(payload, set)) ++mismatches;
    malicious += naive.malicious() ? 1 : 0;
  }
  // Full-size rulebooks on random payloads with planted signatures.
  for (int b = 0; b < 10; ++b) {
    const auto set = synthetic_rulebook(100, 1000 + b);
    const auto m = AhoCorasickMatcher::build(set);
    for (int i = 0; i < 500; ++i, ++cases) {
      Bytes payload(rng() % 2000);
      for (auto& x : payload) x = static_cast<std::uint8_t>(rng());
      for (auto plants = rng() % 3; plants > 0; --plants) {
        const auto& s = set.signatures()[rng() % set.size()];
        payload.insert(payload.begin() + static_cast<std::ptrdiff_t>(rng() % (payload.size() + 1)), s.pattern.begin(),
                       s.pattern.end());
      }
      const auto naive = scan_naive(payload, set);
      if (!naive.same_hits(scan_automaton(payload, m))) ++mismatches;
      malicious += naive.malicious() ? 1 : 0;
    }
  }
  const double secs = seconds_since(start);
  v.require(mismatches == 0, std::to_string(mismatches) + " mismatching cases");
  v.require(secs < 30.0, "runtime " + fixed(secs, 1) + " s");
  v.note(std::to_string(cases) + " cases (" + std::to_string(malicious) + " with hits), " + fixed(secs, 1) + " s");
  return v;
}

Verdict detector_band(const DetectorResult& r, double training_s, double eval_s) {
  Verdict v;
  std::string table;
  for (const auto& a : r.per_af) {
    const double adr = a.metrics.adr_pct.value_or(-1.0);
    const double fpr = a.metrics.fpr_pct.value_or(100.0);
    const double floor = a.af < 1.25 ? 85.0 : 90.0;
    v.require(a.metrics.adr_pct && adr >= floor, "ADR " + fixed(adr, 2) + "% at AF " + fixed(a.af, 1));
    v.require(a.metrics.fpr_pct && fpr <= 2.0, "FPR " + fixed(fpr, 2) + "% at AF " + fixed(a.af, 1));
    v.require(a.metrics.mean_latency_ms <= 1.0, "latency " + fixed(a.metrics.mean_latency_ms, 4) + " ms");
    table += (table.empty() ? "" : ", ") + std::string("AF ") + fixed(a.af, 1) + " ADR " + fixed(adr, 2) + "% FPR " +
             fixed(fpr, 2) + "% " + fixed(a.metrics.mean_latency_ms, 4) + " ms";
  }
  v.require(r.stored_flagged == 0, "flagged records reached the store");
  v.require(training_s <= 300.0, "training " + fixed(training_s, 1) + " s");
  v.require(eval_s <= 60.0, "evaluation " + fixed(eval_s, 1) + " s");
  v.note(table + "; training " + fixed(training_s, 1) + " s, evaluation " + fixed(eval_s, 1) + " s");
  return v;
}

Verdict gradient_check() {
  Verdict v;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 1.0);
  SequenceModel m(4, 77);
  auto p = m.parameters();
  for (auto& x : p) x += 0.3 * z(rng);
  std::vector<SequenceWindow> ws(3);
  for (auto& w : ws) {
    for (auto& x : w.inputs)
      for (auto& e : x) e = z(rng);
    for (auto& e : w.target) e = z(rng);
  }
  std::vector<double> grad;
  m.loss_and_gradient(ws, grad);
  double worst = 0.0;
  const double eps = 1e-6;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + eps;
    const double up = m.loss(ws);
    p[i] = saved - eps;
    const double down = m.loss(ws);
    p[i] = saved;
    const double numeric = (up - down) / (2 * eps);
    const double rel = std::abs(numeric - grad[i]) / std::max({std::abs(numeric), std::abs(grad[i]), 1e-6});
    worst = std::max(worst, rel);
  }
  v.require(worst <= 1e-4, "max relative error " + std::to_string(worst));
  v.note(std::to_string(p.size()) + " parameters, max relative error " + std::to_string(worst));
  return v;
}

Verdict attestation_completeness(const AttestationResult& clean) {
  Verdict v;
  const auto start = Clock::now();
  std::size_t clean_rounds = 0, clean_violations = 0;
  for (const auto& s : clean.series) {
    clean_rounds += s.round_latency_ms.size() * s.per_run.size();
    clean_violations += s.clean_violations;
  }
  v.require(clean.series.size() == 2 && clean_rounds >= 40, "clean rounds " + std::to_string(clean_rounds));
  v.require(clean_violations == 0, std::to_string(clean_violations) + " violations on clean images");

  const auto dir = scratch_dir("injection");
  std::mt19937_64 rng(0x1e);
  AttestationEngine engine;
  constexpr std::size_t kImageBytes = 1u << 20;
  Bytes trusted(kImageBytes);
  for (auto& b : trusted) b = static_cast<std::uint8_t>(rng());
  write_image_file((dir / "victim.img").string(), trusted);
  engine.register_reference("victim", (dir / "victim.img").string(), XappTier::high_impact);

  std::size_t trials = 0, detected = 0, clean_ok = 0;
  for (; trials < 200; ++trials) {
    XappImage image{"victim", trusted, trusted.size()};
    if (engine.attestation_round(image).verdict == AttestationVerdict::valid) ++clean_ok;
    Bytes payload(1 + rng() % 4096);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
    inject_code(image, rng() % (image.live_bytes.size() + 1), payload);
    if (engine.attestation_round(image).verdict == AttestationVerdict::integrity_violation) ++detected;
  }
  fs::remove_all(dir);
  const double secs = seconds_since(start);
  v.require(detected == trials, "detected " + std::to_string(detected) + "/" + std::to_string(trials) + " injections");
  v.require(clean_ok == trials, "interleaved clean rounds valid " + std::to_string(clean_ok) + "/" +
                                    std::to_string(trials));
  v.require(clean.injection_detected, "experiment injection trial missed");
  v.note(std::to_string(detected) + "/" + std::to_string(trials) + " injections detected, " +
         std::to_string(clean_rounds) + " clean rounds with " + std::to_string(clean_violations) + " violations, " +
         fixed(secs, 1) + " s");
  return v;
}

Verdict attestation_linearity(const AttestationResult& r) {
  Verdict v;
  if (r.series.size() != 2) {
    v.require(false, "expected two image sizes");
    return v;
  }
  const double a = r.series[0].steady_state_ms_per_mb();
  const double b = r.series[1].steady_state_ms_per_mb();
  const double ratio = b / a;
  v.require(ratio >= 0.7 && ratio <= 1.3, "per-MB ratio " + fixed(ratio, 3));
  for (const auto& s : r.series)
    v.require(s.round_latency_ms.front() > s.steady_state_ms(),
              "round 1 not above steady state at " + fixed(s.size_mb, 1) + " MB");
  v.note(fixed(r.series[0].size_mb, 1) + " MB: " + fixed(a, 3) + " ms/MB, round 1 " +
         fixed(r.series[0].round_latency_ms.front(), 2) + " ms vs " + fixed(r.series[0].steady_state_ms(), 2) + " ms; " +
         fixed(r.series[1].size_mb, 1) + " MB: " + fixed(b, 3) + " ms/MB, round 1 " +
         fixed(r.series[1].round_latency_ms.front(), 2) + " ms vs " + fixed(r.series[1].steady_state_ms(), 2) +
         " ms; ratio " + fixed(ratio, 3));
  return v;
}

Verdict replay_rejection() {
  Verdict v;
  const auto dir = scratch_dir("replay");
  std::mt19937_64 rng(0x4e);
  Bytes trusted(64 * 1024);
  for (auto& b : trusted) b = static_cast<std::uint8_t>(rng());
  write_image_file((dir / "x.img").string(), trusted);
  AttestationEngine engine;
  engine.register_reference("x", (dir / "x.img").string());
  const XappImage image{"x", trusted, trusted.size()};

  std::vector<std::pair<AttestationChallenge, AttestationResponse>> history;
  std::size_t trials = 0, rejected = 0;
  std::size_t kinds[3] = {0, 0, 0};
  for (; trials < 300; ++trials) {
    const auto c = engine.issue_challenge("x");
    const auto r = attest(image, c);
    if (engine.verify(c, r) != AttestationVerdict::valid) {
      v.require(false, "honest round rejected");
      break;
    }
    history.emplace_back(c, r);
    const auto& [old_c, old_r] = history[rng() % history.size()];
    AttestationVerdict verdict;
    switch (trials % 3) {
      case 0:  // resend a consumed challenge with its genuine response
        verdict = engine.verify(old_c, old_r);
        break;
      case 1: {  // old response against a fresh challenge
        const auto fresh = engine.issue_challenge("x");
        verdict = engine.verify(fresh, old_r);
        break;
      }
      default: {  // nonce that was never issued, correctly hashed
        AttestationChallenge forged = c;
        for (auto& b : forged.nonce) b = static_cast<std::uint8_t>(rng());
        verdict = engine.verify(forged, attest(image, forged));
        break;
      }
    }
    ++kinds[trials % 3];
    if (verdict == AttestationVerdict::replay_violation) ++rejected;
  }
  fs::remove_all(dir);
  v.require(rejected == trials, "rejected " + std::to_string(rejected) + "/" + std::to_string(trials));
  v.note(std::to_string(rejected) + "/" + std::to_string(trials) + " replays rejected (" + std::to_string(kinds[0]) +
         " consumed nonces, " + std::to_string(kinds[1]) + " stale digests, " + std::to_string(kinds[2]) +
         " unissued nonces)");
  return v;
}

Verdict mitigation_semantics() {
  using A = MitigationAction;
  Verdict v;
  std::mt19937_64 rng(0x9);
  std::size_t checks = 0;

  // Union rule against a per-hit oracle, in random hit orders.
  for (int trial = 0; trial < 1000; ++trial) {
    MitigationPolicy p;
    std::vector<std::uint32_t> ids;
    for (std::uint32_t id = 1; id <= 20; ++id) {
      ActionSet s;
      for (auto a : {A::DropMessage, A::BlockNode, A::Report})
        if (rng() % 2) s.insert(a);
      p.signature_actions[id] = s;
      ids.push_back(id);
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    MatchResult m;
    ActionSet expected;
    for (std::size_t i = 0; i < 1 + rng() % 6; ++i) {
      m.hits.push_back({ids[i], 0});
      expected |= p.signature_actions[ids[i]];
    }
    ++checks;
    if (!(resolve_inspector_event(m, p) == expected)) v.require(false, "union rule");
  }

  // Data-level defaults and escalation.
  const auto d = MitigationPolicy::defaults();
  auto kpm = [&](Magnitude mag) {
    AnomalyVerdict av;
    av.is_anomalous = true;
    av.score = 2.0;
    av.magnitude = mag;
    return resolve_kpm_event(av, 1, d);
  };
  checks += 3;
  v.require(kpm(Magnitude::small) == ActionSet{A::DropData}, "small default");
  v.require(kpm(Magnitude::moderate) == ActionSet{A::DropData, A::Report}, "moderate default");
  v.require(kpm(Magnitude::significant) == ActionSet{A::DropData, A::Report, A::BlockNode}, "significant default");

  // Attestation responses always carry Report, whatever the policy says.
  const char* tiers[] = {"high_impact", "standard", "read_only", "unlisted"};
  const std::string overrides[] = {"K", "V", "", "KV"};
  for (const auto& codes : overrides) {
    auto p = MitigationPolicy::defaults();
    if (!codes.empty()) {
      std::istringstream in("[attestation]\nhigh_impact = " + codes + "\nstandard = " + codes + "\n");
      p = parse_policy(in, p);
    }
    for (const char* t : tiers) {
      ++checks;
      v.require(resolve_attestation_event("x", t, p).contains(A::Report),
                std::string("attestation without Report for ") + t);
    }
  }

  // Applying the resolved sets: every Report lands in the log, re-application is idempotent.
  Blocklist bl;
  MitigationUnit unit(bl);
  std::size_t reported = 0;
  for (std::uint32_t i = 0; i < 200; ++i) {
    ActionSet s;
    for (auto a : {A::DropMessage, A::BlockNode, A::Report, A::DropData})
      if (rng() % 2) s.insert(a);
    const Incident inc{Detector::inspector, std::to_string(i), "1", i, i % 7};
    unit.apply(s, inc);
    unit.apply(s, inc);
    reported += s.contains(A::Report) ? 1 : 0;
    ++checks;
    if (s.contains(A::BlockNode) && !bl.node_blocked(i % 7)) v.require(false, "BlockNode not applied");
  }
  ++checks;
  v.require(unit.log().size() == reported, "log holds " + std::to_string(unit.log().size()) + " reports, expected " +
                                               std::to_string(reported));
  v.note(std::to_string(checks) + " property checks");
  return v;
}

Verdict end_to_end(const HarnessOptions& opts, std::shared_ptr<const DetectorBundle> bundle) {
  Verdict v;
  const auto start = Clock::now();
  for (const auto& [ues, bound] : {std::pair<std::uint32_t, double>{50, 10.0}, {500, 100.0}}) {
    const auto r = run_use_case(opts, ues, bundle);
    double max_wall = 0.0;
    for (const auto& l : r.loops) max_wall = std::max(max_wall, l.loop_wall_ms);
    const auto label = std::to_string(ues) + " UEs: ";
    v.require(r.loops.size() == opts.runs * 100, label + std::to_string(r.loops.size()) + " loops");
    v.require(r.budget_violations == 0 && max_wall < 1000.0, label + "loop over 1000 ms");
    v.require(r.shift.avg < bound, label + "average shift " + fixed(r.shift.avg, 2) + " ms");
    const double component = r.mean_component_ms;
    const double deviation = std::abs(r.shift.avg - component) / component;
    v.require(deviation <= 0.2, label + "shift vs inspector+detector off by " + fixed(100 * deviation, 1) + "%");
    v.require(r.stored_flagged == 0, label + "flagged records reached the store");
    v.note(label + "shift avg " + fixed(r.shift.avg, 2) + " ms (min " + fixed(r.shift.min, 2) + ", max " +
           fixed(r.shift.max, 2) + "), inspector+detector " + fixed(component, 2) + " ms, max loop " +
           fixed(max_wall, 1) + " ms");
  }
  const double secs = seconds_since(start);
  v.require(secs <= 600.0, "runtime " + fixed(secs, 1) + " s");
  v.note(fixed(secs, 1) + " s");
  return v;
}

Verdict determinism() {
  Verdict v;
  HarnessOptions o;
  o.timing = TimingMode::cost_model;
  o.seed = 2024;
  o.runs = 2;
  o.scenario_overrides["inspector.loops"] = "30";
  o.train_ticks = 200;
  o.live_ticks = 60;
  o.training.hidden_size = 8;
  o.training.epochs = 3;
  o.image_sizes_mb = {1.0, 2.0};
  o.attestation_rounds = 5;
  o.use_case_ues = {50};
  o.scenario_overrides["use_case.loops"] = "10";
  o.use_case_xapp_mb = 1.0;

  std::map<std::string, std::string> outputs[2];
  for (int i = 0; i < 2; ++i) {
    const auto dir = scratch_dir("determinism_" + std::to_string(i));
    o.out_dir = dir;
    run_inspector_experiment(o);
    const auto trained = train_detector(o);
    run_detector_experiment(o, *trained.bundle);
    run_attestation_experiment(o);
    run_use_case(o, 50, trained.bundle);
    outputs[i] = csv_files(dir);
    fs::remove_all(dir);
  }
  v.require(!outputs[0].empty(), "no CSV files written");
  v.require(outputs[0].size() == outputs[1].size(), "different file sets");
  std::size_t identical = 0;
  for (const auto& [name, body] : outputs[0]) {
    auto it = outputs[1].find(name);
    if (it != outputs[1].end() && it->second == body) ++identical;
    else v.require(false, name + " differs");
  }
  v.note(std::to_string(identical) + "/" + std::to_string(outputs[0].size()) + " CSV files byte-identical");
  return v;
}

}  // namespace

int main() {
  HarnessOptions opts;  // 10 runs, wall timing, default presets

  // Criteria 1 and 2 share the inspector runs.
  InspectorResult naive, automaton;
  double inspector_s = 0.0;
  report(1, "inspector exactness", [&] {
    const auto start = Clock::now();
    naive = run_inspector_experiment(opts);
    inspector_s = seconds_since(start);
    auto aut = opts;
    aut.matcher = MatcherKind::automaton;
    automaton = run_inspector_experiment(aut);
    return inspector_exactness(naive, automaton, inspector_s);
  });
  report(2, "inspector latency shape", [&] { return inspector_latency_shape(naive); });
  report(3, "matcher oracle equivalence", matcher_equivalence);

  // One trained detector serves criteria 4 and 10.
  std::shared_ptr<const DetectorBundle> bundle;
  report(4, "detector performance band", [&] {
    const auto trained = train_detector(opts);
    bundle = trained.bundle;
    const auto start = Clock::now();
    const auto r = run_detector_experiment(opts, *bundle);
    auto v = detector_band(r, trained.training_seconds, seconds_since(start));
    v.note("validation FPR " + fixed(trained.validation_fpr_pct, 2) + "%");
    return v;
  });
  report(5, "detector gradient check", gradient_check);

  AttestationResult attestation;
  report(6, "attestation completeness", [&] {
    attestation = run_attestation_experiment(opts);
    return attestation_completeness(attestation);
  });
  report(7, "attestation linearity", [&] { return attestation_linearity(attestation); });
  report(8, "replay rejection", replay_rejection);
  report(9, "mitigation policy semantics", mitigation_semantics);
  report(10, "end-to-end overhead", [&] {
    if (!bundle) {
      Verdict v;
      v.require(false, "no trained detector");
      return v;
    }
    return end_to_end(opts, bundle);
  });
  report(11, "determinism", determinism);

  std::printf("%s: %d of 11 criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
