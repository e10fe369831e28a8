// ricguard: runs the framework's experiments against the emulated RAN.
//
// Exit status: 0 all checks passed, 1 detection failure, 2 control-loop
// budget or latency bound violated, 3 configuration error.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ricguard/csv.hpp"
#include "ricguard/error.hpp"
#include "ricguard/harness.hpp"

using namespace ricguard;

namespace {

enum Status : int { kOk = 0, kDetection = 1, kBudget = 2, kConfig = 3 };

struct Outcome {
  bool detection_failed = false;
  bool budget_failed = false;

  void fail_detection(const std::string& what) {
    std::cerr << "FAIL (detection): " << what << '\n';
    detection_failed = true;
  }
  void fail_budget(const std::string& what) {
    std::cerr << "FAIL (budget): " << what << '\n';
    budget_failed = true;
  }
  int status() const { return detection_failed ? kDetection : budget_failed ? kBudget : kOk; }
};

void inspect_bench(const HarnessOptions& opts, Outcome& out) {
  const auto r = run_inspector_experiment(opts);
  std::printf("inspector: %zu runs, matcher %s\n", r.runs.size(), std::string(to_string(opts.matcher)).c_str());
  std::printf("  %-28s %12s %12s %8s\n", "message kind", "avg ms", "max ms", "count");
  for (const auto& k : r.overall)
    std::printf("  %-28s %12.6f %12.6f %8zu\n", std::string(to_string(k.kind)).c_str(), k.summary.average_ms,
                k.summary.maximum_ms, k.summary.count);
  std::printf("  injected %zu, detected %zu (%.2f%%), false positives %zu/%zu, blocked at ingress %zu\n", r.injected,
              r.detected, r.detection_rate_pct(), r.false_positives, r.benign, r.blocked_at_ingress);

  if (r.detected != r.injected) out.fail_detection("missed injected messages");
  if (r.false_positives != 0) out.fail_detection("false positives on benign messages");
  if (r.malicious_dispatched != 0) out.fail_detection("malicious message reached dispatch");
  if (auto ind = r.of(E2MessageKind::Indication); ind && ind->average_ms >= 1.0)
    out.fail_budget("Indication average scan latency is not below 1 ms");
}

std::shared_ptr<const DetectorBundle> bundle_for(const HarnessOptions& opts, const std::string& save_path) {
  TrainedDetector trained;
  auto bundle = obtain_bundle(opts, &trained);
  if (trained.bundle)
    std::printf("detector: trained in %.1f s, final loss %.6f, threshold %.6f, validation FPR %.3f%%\n",
                trained.training_seconds, trained.report.epoch_loss.empty() ? 0.0 : trained.report.epoch_loss.back(),
                bundle->threshold, trained.validation_fpr_pct);
  if (!save_path.empty()) bundle->save(save_path);
  return bundle;
}

void detect_bench(const HarnessOptions& opts, const DetectorBundle& bundle, Outcome& out) {
  const auto r = run_detector_experiment(opts, bundle);
  std::printf("detector: %zu runs per AF\n", opts.runs);
  std::printf("  %6s %10s %10s %12s\n", "AF", "ADR %", "FPR %", "latency ms");
  for (const auto& a : r.per_af) {
    const double adr = a.metrics.adr_pct.value_or(0.0);
    const double fpr = a.metrics.fpr_pct.value_or(0.0);
    std::printf("  %6.2f %10.4f %10.4f %12.6f\n", a.af, adr, fpr, a.metrics.mean_latency_ms);
    const double floor = a.af < 1.25 ? 85.0 : 90.0;
    if (adr < floor) out.fail_detection("ADR below " + fixed(floor, 0) + "% at AF " + fixed(a.af, 2));
    if (fpr > 2.0) out.fail_detection("FPR above 2% at AF " + fixed(a.af, 2));
    if (a.metrics.mean_latency_ms > 1.0) out.fail_budget("per-record scoring latency above 1 ms");
  }
  if (r.stored_flagged != 0) out.fail_detection("flagged records reached the telemetry store");
}

void attest_bench(const HarnessOptions& opts, Outcome& out) {
  const auto r = run_attestation_experiment(opts);
  std::printf("attestation: %zu rounds per size, %zu runs\n", opts.attestation_rounds, opts.runs);
  std::printf("  %8s %12s %14s %14s %10s\n", "size MB", "round 1 ms", "steady ms", "steady ms/MB", "violations");
  for (const auto& s : r.series) {
    std::printf("  %8.2f %12.4f %14.4f %14.4f %10zu\n", s.size_mb, s.round_latency_ms.front(), s.steady_state_ms(),
                s.steady_state_ms_per_mb(), s.clean_violations);
    if (s.clean_violations != 0) out.fail_detection("violation on a clean image");
  }
  std::printf("  injection detected: %s, xApp blocked: %s, incident reports: %zu\n",
              r.injection_detected ? "yes" : "no", r.injected_xapp_blocked ? "yes" : "no", r.incident_reports);
  if (!r.injection_detected) out.fail_detection("code injection not detected");
}

void use_case(const HarnessOptions& opts, std::shared_ptr<const DetectorBundle> bundle, Outcome& out) {
  for (auto ues : opts.use_case_ues) {
    const auto r = run_use_case(opts, ues, bundle);
    std::printf("use case, %u UEs: %zu loops\n", ues, r.loops.size());
    std::printf("  %-28s %10s %10s %10s\n", "", "min ms", "max ms", "avg ms");
    auto row = [](const char* name, const Stat& s) {
      std::printf("  %-28s %10.4f %10.4f %10.4f\n", name, s.min, s.max, s.avg);
    };
    row("inspector", r.inspector);
    row("detector", r.detector);
    row("data availability shift", r.shift);
    std::printf("  runtime baseline %.1f ms, safeguarded %.1f ms; records emitted %zu, stored %zu, flagged %zu\n",
                r.baseline_runtime_ms, r.safeguarded_runtime_ms, r.emitted_records, r.safeguarded_stored,
                r.flagged_records);
    std::printf("  attestation rounds in idle time %zu, violations %zu\n", r.attestation_rounds,
                r.attestation_violations);
    if (r.budget_violations != 0) out.fail_budget(std::to_string(r.budget_violations) + " loops over 1000 ms");
    if (r.stored_flagged != 0) out.fail_detection("flagged records reached the telemetry store");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runtime safeguards for near-RT RIC control loops: experiment runner"};
  app.require_subcommand(1);

  HarnessOptions opts;
  std::string config_path, out_dir, matcher, save_model;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::uint32_t> ues_per_cell;
  std::vector<double> af;
  bool deterministic = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--seed", seed, "base RNG seed");
    sub->add_option("--out", out_dir, "directory for CSV outputs");
    sub->add_option("--runs", runs, "repetitions per experiment (default 10)");
    sub->add_option("--ues-per-cell", ues_per_cell, "UEs per cell in the inspector experiment");
    sub->add_option("--af", af, "amplification factors, comma separated")->delimiter(',');
    sub->add_option("--matcher", matcher, "naive or automaton")->check(CLI::IsMember({"naive", "automaton"}));
    sub->add_flag("--deterministic-timing", deterministic, "cost-model timings for byte-identical CSVs");
    sub->add_option("--rulebook", opts.rulebook_path, "rulebook file (id,hex,codes,label)");
    sub->add_option("--policy", opts.policy_path, "mitigation policy file");
    sub->add_option("--model", opts.model_path, "trained detector bundle to load instead of training");
    sub->add_option("--save-model", save_model, "write the trained detector bundle here");
  };

  auto* inspect = app.add_subcommand("inspect-bench", "signature inspection latency and detection");
  auto* detect = app.add_subcommand("detect-bench", "KPM poisoning detection per amplification factor");
  auto* attest = app.add_subcommand("attest-bench", "xApp attestation latency and injection trial");
  auto* usecase = app.add_subcommand("use-case", "end-to-end overhead at 50 and 500 UEs");
  auto* all = app.add_subcommand("run-all", "every experiment in sequence");
  for (auto* sub : {inspect, detect, attest, usecase, all}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  Outcome out;
  try {
    if (!config_path.empty()) apply_config_file(opts, config_path);
    if (seed) opts.seed = *seed;
    if (runs) {
      if (*runs == 0) throw Error(Errc::config, "--runs must be positive");
      opts.runs = *runs;
    }
    if (!out_dir.empty()) opts.out_dir = out_dir;
    if (ues_per_cell) opts.ues_per_cell = *ues_per_cell;
    if (!af.empty()) opts.af_grid = af;
    if (!matcher.empty()) opts.matcher = *matcher_from_string(matcher);
    if (deterministic) opts.timing = TimingMode::cost_model;

    if (inspect->parsed() || all->parsed()) inspect_bench(opts, out);
    std::shared_ptr<const DetectorBundle> bundle;
    if (detect->parsed() || usecase->parsed() || all->parsed()) bundle = bundle_for(opts, save_model);
    if (detect->parsed() || all->parsed()) detect_bench(opts, *bundle, out);
    if (attest->parsed() || all->parsed()) attest_bench(opts, out);
    if (usecase->parsed() || all->parsed()) use_case(opts, bundle, out);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return e.code() == Errc::config || e.code() == Errc::io || e.code() == Errc::registry ? kConfig : kDetection;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return out.status();
}
