#include "ricguard/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unistd.h>

#include "ricguard/csv.hpp"
#include "ricguard/error.hpp"

namespace ricguard {

namespace {

constexpr std::uint64_t kStreamTraining = 1;
constexpr std::uint64_t kStreamDetector = 2;
constexpr std::uint64_t kStreamInspector = 3;
constexpr std::uint64_t kStreamAttestation = 4;
constexpr std::uint64_t kStreamUseCase = 5;

constexpr double kMiB = 1024.0 * 1024.0;

CsvWriter open_csv(const HarnessOptions& opts, const std::string& name, std::string_view header) {
  if (opts.out_dir.empty()) return {};
  return CsvWriter(opts.out_dir / name, header);
}

double ms_since(std::uint64_t start_ns) { return static_cast<double>(monotonic_ns() - start_ns) / 1e6; }

std::string af_label(double af) {
  std::ostringstream s;
  s << af;
  return s.str();
}

std::vector<KindLatency> summarize(std::span<const InspectionOutcome> outcomes) {
  std::vector<KindLatency> out;
  for (auto kind : kAllE2MessageKinds)
    if (auto s = latency_summary(outcomes, kind)) out.push_back({kind, *s});
  return out;
}

std::optional<LatencySummary> find_kind(const std::vector<KindLatency>& table, E2MessageKind kind) {
  for (const auto& k : table)
    if (k.kind == kind) return k.summary;
  return std::nullopt;
}

Bytes random_image(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bytes b(size);
  std::size_t i = 0;
  for (; i + 8 <= size; i += 8) {
    const auto v = rng();
    std::memcpy(b.data() + i, &v, 8);
  }
  for (; i < size; ++i) b[i] = static_cast<std::uint8_t>(rng());
  return b;
}

std::filesystem::path image_dir(const HarnessOptions& opts) {
  if (!opts.out_dir.empty()) return opts.out_dir / "images";
  return std::filesystem::temp_directory_path() / ("ricguard-images-" + std::to_string(::getpid()));
}

std::unique_ptr<AttestationEngine> make_engine(const HarnessOptions& opts, std::uint64_t seed, const std::uint64_t* sim_clock_ns) {
  AttestationEngine::Options o;
  o.timing = opts.timing;
  AttestationEngine::NonceSource nonces;
  if (opts.timing == TimingMode::cost_model) {
    auto rng = std::make_shared<std::mt19937_64>(seed);
    nonces = [rng] {
      Nonce n{};
      for (std::size_t i = 0; i < n.size(); i += 8) {
        const auto v = (*rng)();
        std::memcpy(n.data() + i, &v, 8);
      }
      return n;
    };
  } else {
    nonces = [] {
      Nonce n{};
      secure_random_bytes(n);
      return n;
    };
  }
  return std::make_unique<AttestationEngine>(std::move(nonces), [sim_clock_ns] { return *sim_clock_ns; }, o);
}

// Records per cell for accounting of messages that never reach decoding.
std::map<std::uint32_t, std::size_t> records_per_cell(const Emulator& emu, const TickRecords& tick) {
  std::map<std::uint32_t, std::size_t> out;
  for (const auto& r : tick.records) ++out[emu.profile(r.ue_id).cell_id];
  return out;
}

// Drop-only defaults used when no policy file is configured: blocking a node
// would silence it for the rest of the run and starve the measurements.
MitigationPolicy experiment_policy(const HarnessOptions& opts, const SignatureSet& rulebook) {
  auto policy = load_policy_for(opts, rulebook);
  if (opts.policy_path.empty()) {
    for (auto& [id, actions] : policy.signature_actions) actions = ActionSet{MitigationAction::DropMessage};
    for (auto& [m, actions] : policy.magnitude_actions) actions = ActionSet{MitigationAction::DropData};
  }
  return policy;
}

}  // namespace

std::optional<LatencySummary> InspectorRun::of(E2MessageKind kind) const { return find_kind(per_kind, kind); }
std::optional<LatencySummary> InspectorResult::of(E2MessageKind kind) const { return find_kind(overall, kind); }

double InspectorResult::detection_rate_pct() const {
  return injected == 0 ? 100.0 : 100.0 * static_cast<double>(detected) / static_cast<double>(injected);
}

double InspectorResult::false_positive_rate_pct() const {
  return benign == 0 ? 0.0 : 100.0 * static_cast<double>(false_positives) / static_cast<double>(benign);
}

InspectorResult run_inspector_experiment(const HarnessOptions& opts) {
  auto config = inspector_preset(opts.ues_per_cell.value_or(10));
  apply_scenario_overrides(config, opts.scenario_overrides, "inspector");
  if (opts.ues_per_cell) config.ues_per_cell = *opts.ues_per_cell;
  config.validate();

  const auto rulebook = load_or_make_rulebook(opts);
  const auto automaton = std::make_shared<const AhoCorasickMatcher>(AhoCorasickMatcher::build(*rulebook));
  const auto policy = experiment_policy(opts, *rulebook);

  auto csv = open_csv(opts, "inspector.csv", "run,loop,msg_kind,node_id,verdict,inspect_ns,hits");
  InspectorResult result;
  std::vector<InspectionOutcome> all;

  for (std::size_t run = 0; run < opts.runs; ++run) {
    config.rng_seed = derive_seed(opts.seed, kStreamInspector, run);
    Emulator emu(config, rulebook);
    Blocklist blocklist;
    MitigationUnit mitigation(blocklist);
    IngressInspector inspector(rulebook, automaton, blocklist, {opts.matcher, opts.timing});

    bool dispatched = false;
    inspector.set_dispatch([&](const E2Message&) { dispatched = true; });
    inspector.set_mitigation([&](const E2Message& msg, const MatchResult& match) {
      std::string ids;
      for (const auto& h : match.hits) ids += (ids.empty() ? "" : ";") + std::to_string(h.signature_id);
      Incident incident{Detector::inspector, std::to_string(msg.source_node_id), ids, 0, msg.source_node_id};
      mitigation.apply(resolve_inspector_event(match, policy), incident);
    });

    std::vector<InspectionOutcome> outcomes;
    auto handle = [&](std::uint64_t loop, const EmittedMessage& em) {
      // Over the wire and back: the inspector sees exactly what the terminal decoded.
      const auto frame = encode_frame(em.message);
      const auto msg = decode_frame(frame, loop * 1'000'000'000ULL);
      dispatched = false;
      auto outcome = inspector.inspect(msg);
      if (outcome.blocked_at_ingress) {
        ++result.blocked_at_ingress;
      } else if (em.injected) {
        ++result.injected;
        const auto id = em.injected->signature_id;
        if (std::any_of(outcome.match.hits.begin(), outcome.match.hits.end(),
                        [id](const Hit& h) { return h.signature_id == id; }))
          ++result.detected;
      } else {
        ++result.benign;
        if (outcome.malicious()) ++result.false_positives;
      }
      if (dispatched && em.injected) ++result.malicious_dispatched;
      csv.row(std::to_string(run) + "," + inspection_csv_row(loop, outcome));
      outcomes.push_back(std::move(outcome));
    };

    for (std::uint64_t loop = 0; loop < config.loops; ++loop)
      for (const auto& em : emu.step()) handle(loop, em);
    for (const auto& em : emu.teardown()) handle(config.loops, em);

    result.runs.push_back({summarize(outcomes)});
    all.insert(all.end(), outcomes.begin(), outcomes.end());
  }
  result.overall = summarize(all);

  auto summary = open_csv(opts, "inspector_summary.csv", "run,msg_kind,avg_ms,max_ms,count");
  auto summary_rows = [&summary](const std::string& run, const std::vector<KindLatency>& table) {
    for (const auto& k : table)
      summary.row(run + "," + std::string(to_string(k.kind)) + "," + fixed(k.summary.average_ms) + "," +
                  fixed(k.summary.maximum_ms) + "," + std::to_string(k.summary.count));
  };
  for (std::size_t run = 0; run < result.runs.size(); ++run) summary_rows(std::to_string(run), result.runs[run].per_kind);
  summary_rows("all", result.overall);
  return result;
}

// ---------------------------------------------------------------------------

TrainingData collect_training_data(const HarnessOptions& opts) {
  auto config = detector_preset();
  apply_scenario_overrides(config, opts.scenario_overrides, "detector");
  config.poison_target_fraction = 0.0;
  config.loops = opts.train_ticks;
  config.rng_seed = derive_seed(opts.seed, kStreamTraining, 0);
  config.validate();
  if (opts.train_ticks < 5 * (kSequenceLength + 1))
    throw Error(Errc::config, "train_ticks too small for an 80/20 split of ten-step windows");

  Emulator emu(config);
  std::map<std::uint32_t, std::vector<KpmRecord>> per_ue;
  for (std::uint64_t t = 0; t < config.loops; ++t)
    for (const auto& r : emu.generate_tick(t).records) per_ue[r.ue_id].push_back(r);

  const auto split_tick = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(config.loops)));
  TrainingData data;
  for (const auto& [ue, series] : per_ue)
    data.train_records.insert(data.train_records.end(), series.begin(), series.begin() + split_tick);

  const auto scaler = fit_scaler(data.train_records);
  for (const auto& [ue, series] : per_ue) {
    for (std::size_t end = kSequenceLength; end < split_tick; ++end)
      data.train_windows.push_back(
          normalize_window(scaler, std::span(series).subspan(end - kSequenceLength, kSequenceLength), series[end]));
    for (std::size_t end = split_tick + kSequenceLength; end < series.size(); ++end) {
      RecordWindow w;
      w.history.assign(series.begin() + static_cast<std::ptrdiff_t>(end - kSequenceLength),
                       series.begin() + static_cast<std::ptrdiff_t>(end));
      w.next = series[end];
      data.validation_windows.push_back(std::move(w));
    }
    data.validation_series.emplace_back(series.begin() + static_cast<std::ptrdiff_t>(split_tick), series.end());
  }
  return data;
}

TrainedDetector train_detector(const HarnessOptions& opts) {
  const auto data = collect_training_data(opts);
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream dataset(opts.out_dir / "training_dataset.csv");
    if (!dataset) throw Error(Errc::io, "cannot write training dataset");
    write_kpm_csv(dataset, data.train_records);
  }
  const auto start = std::chrono::steady_clock::now();

  TrainedDetector out;
  auto bundle = std::make_shared<DetectorBundle>();
  bundle->scaler = fit_scaler(data.train_records);
  bundle->model = train_model(data.train_windows, opts.training, &out.report);
  bundle->threshold =
      calibrate_threshold(bundle->model, bundle->scaler, data.validation_windows, opts.threshold_quantile);
  bundle->imputed_thresholds = calibrate_imputed_thresholds(bundle->model, bundle->scaler, data.validation_series,
                                                           opts.threshold_quantile);
  out.training_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto scores = score_batch(bundle->model, bundle->scaler, data.validation_windows);
  const auto over = std::count_if(scores.begin(), scores.end(), [&](double s) { return s > bundle->threshold; });
  out.validation_fpr_pct = 100.0 * static_cast<double>(over) / static_cast<double>(scores.size());
  out.bundle = std::move(bundle);
  return out;
}

std::shared_ptr<const DetectorBundle> obtain_bundle(const HarnessOptions& opts, TrainedDetector* trained) {
  if (!opts.model_path.empty()) return std::make_shared<const DetectorBundle>(DetectorBundle::load(opts.model_path));
  auto t = train_detector(opts);
  auto bundle = t.bundle;
  if (trained) *trained = std::move(t);
  return bundle;
}

DetectorResult run_detector_experiment(const HarnessOptions& opts, const DetectorBundle& bundle_ref) {
  const auto bundle = std::make_shared<const DetectorBundle>(bundle_ref);
  const auto rulebook = load_or_make_rulebook(opts);
  const auto policy = experiment_policy(opts, *rulebook);
  auto csv = open_csv(opts, "detector.csv", "af,adr_pct,fpr_pct,latency_ms");

  DetectorResult result;
  for (std::size_t ai = 0; ai < opts.af_grid.size(); ++ai) {
    const double af = opts.af_grid[ai];
    auto config = detector_preset();
    apply_scenario_overrides(config, opts.scenario_overrides, "detector");
    config.amplification_factor = af;
    config.loops = opts.live_ticks;
    config.validate();

    auto labels_csv = open_csv(opts, "labels_af" + af_label(af) + ".csv", "ue_id,timestamp_ms,poisoned,af");
    std::vector<AnomalyVerdict> verdicts;
    std::vector<GroundTruthLabel> labels;
    AfResult ar;
    ar.af = af;

    for (std::size_t run = 0; run < opts.runs; ++run) {
      config.rng_seed = derive_seed(opts.seed, kStreamDetector, ai * 1000 + run);
      Emulator emu(config, rulebook);
      PoisoningDetector detector(bundle, opts.timing);
      Blocklist blocklist;
      MitigationUnit mitigation(blocklist);
      TelemetryStore store;

      for (std::uint64_t t = 0; t < config.loops; ++t) {
        TickRecords tick;
        const auto messages = emu.step(&tick);
        std::map<std::pair<std::uint32_t, std::uint64_t>, GroundTruthLabel> truth;
        for (const auto& l : tick.labels) {
          truth[{l.ue_id, l.timestamp_ms}] = l;
          if (run == 0)
            labels_csv.row(std::to_string(l.ue_id) + "," + std::to_string(l.timestamp_ms) + "," +
                           (l.poisoned ? "1" : "0") + "," + fixed(l.af, 2));
        }

        std::vector<KpmRecord> records;
        for (const auto& em : messages) {
          if (em.message.kind != E2MessageKind::Indication) continue;
          const auto msg = decode_frame(encode_frame(em.message), t * 1'000'000'000ULL);
          auto report = decode_kpm_payload(msg.payload, msg.source_node_id, em.cell_id);
          records.insert(records.end(), report.records.begin(), report.records.end());
        }

        auto res = detector.process_tick(records);
        ar.max_tick_ms = std::max(ar.max_tick_ms, res.elapsed_ms);
        for (const auto& v : res.verdicts) {
          verdicts.push_back(v);
          labels.push_back(truth.at({v.ue_id, v.timestamp_ms}));
          if (v.is_anomalous) {
            const auto node = emu.profile(v.ue_id).node_id;
            Incident incident{Detector::kpm, std::to_string(v.ue_id), std::string(to_string(v.magnitude)),
                              v.timestamp_ms, node};
            mitigation.apply(resolve_kpm_event(v, node, policy), incident);
          }
        }
        store.append(res.accepted);
        for (const auto& f : res.flagged)
          if (store.contains(f.ue_id, f.timestamp_ms)) ++result.stored_flagged;
      }
    }

    ar.metrics = evaluate(verdicts, labels);
    if (!ar.metrics.adr_pct)
      throw Error(Errc::config, "no poisoned records at AF " + af_label(af) + "; detection rate undefined");

    std::vector<double> benign;
    double poisoned_sum = 0.0;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
      if (labels[i].poisoned) poisoned_sum += verdicts[i].score;
      else benign.push_back(verdicts[i].score);
    }
    if (!benign.empty()) {
      ar.benign_score_mean = std::accumulate(benign.begin(), benign.end(), 0.0) / static_cast<double>(benign.size());
      double ss = 0.0;
      for (double s : benign) ss += (s - ar.benign_score_mean) * (s - ar.benign_score_mean);
      ar.benign_score_sd = std::sqrt(ss / static_cast<double>(benign.size()));
    }
    ar.poisoned_score_mean = poisoned_sum / static_cast<double>(ar.metrics.poisoned);

    csv.row(fixed(af, 2) + "," + fixed(*ar.metrics.adr_pct, 4) + "," + fixed(ar.metrics.fpr_pct.value_or(0.0), 4) +
            "," + fixed(ar.metrics.mean_latency_ms));
    result.per_af.push_back(ar);
  }
  return result;
}

// ---------------------------------------------------------------------------

double AttestationSeries::steady_state_ms() const {
  if (round_latency_ms.size() < 2) return 0.0;
  return std::accumulate(round_latency_ms.begin() + 1, round_latency_ms.end(), 0.0) /
         static_cast<double>(round_latency_ms.size() - 1);
}

double AttestationSeries::steady_state_ms_per_mb() const { return size_mb > 0.0 ? steady_state_ms() / size_mb : 0.0; }

AttestationResult run_attestation_experiment(const HarnessOptions& opts) {
  if (opts.attestation_rounds < 2) throw Error(Errc::config, "attestation_rounds must be at least 2");
  const auto dir = image_dir(opts);
  std::filesystem::create_directories(dir);
  auto csv = open_csv(opts, "attestation.csv", "size_mb,round,latency_ms,outcome");
  auto rounds_csv = open_csv(opts, "attestation_rounds.csv", "round,xapp_id,image_mb,latency_ms,outcome");

  AttestationResult result;
  std::uint64_t sim_clock_ns = 0;
  const std::uint64_t period_ns = opts.attestation_period_ms * 1'000'000ULL;

  for (std::size_t si = 0; si < opts.image_sizes_mb.size(); ++si) {
    AttestationSeries series;
    series.size_mb = opts.image_sizes_mb[si];
    const auto bytes = static_cast<std::size_t>(std::llround(series.size_mb * kMiB));
    if (bytes == 0) throw Error(Errc::config, "image size must be positive");
    std::vector<std::vector<AttestationVerdict>> outcomes(opts.attestation_rounds);

    for (std::size_t run = 0; run < opts.runs; ++run) {
      const auto seed = derive_seed(opts.seed, kStreamAttestation, si * 1000 + run);
      XappImage image{"xapp-" + std::to_string(si) + "-run" + std::to_string(run), random_image(bytes, seed), bytes};
      const auto path = (dir / (image.xapp_id + ".img")).string();
      write_image_file(path, image.live_bytes);

      auto engine = make_engine(opts, seed, &sim_clock_ns);
      engine->register_reference(image.xapp_id, path, XappTier::standard);
      std::vector<double> latencies;
      for (std::size_t round = 0; round < opts.attestation_rounds; ++round) {
        sim_clock_ns = round * period_ns;
        const auto r = engine->attestation_round(image);
        latencies.push_back(r.latency_ms);
        rounds_csv.row(attestation_csv_row(round + 1, r, series.size_mb));
        outcomes[round].push_back(r.verdict);
        if (is_violation(r.verdict)) ++series.clean_violations;
      }
      series.per_run.push_back(std::move(latencies));
      std::filesystem::remove(path);
    }

    series.round_latency_ms.assign(opts.attestation_rounds, 0.0);
    for (const auto& run : series.per_run)
      for (std::size_t i = 0; i < run.size(); ++i) series.round_latency_ms[i] += run[i] / static_cast<double>(opts.runs);
    for (std::size_t i = 0; i < opts.attestation_rounds; ++i) {
      const auto& o = outcomes[i];
      const bool uniform = std::all_of(o.begin(), o.end(), [&](AttestationVerdict v) { return v == o.front(); });
      csv.row(fixed(series.size_mb, 2) + "," + std::to_string(i + 1) + "," + fixed(series.round_latency_ms[i]) + "," +
              (uniform ? std::string(to_string(o.front())) : std::string("mixed")));
    }
    result.series.push_back(std::move(series));
  }

  // Injection trial under the high-impact tier.
  {
    const auto seed = derive_seed(opts.seed, kStreamAttestation, 999'999);
    const std::size_t bytes = 1 << 20;
    XappImage image{"xapp-injected", random_image(bytes, seed), bytes};
    const auto path = (dir / "xapp-injected.img").string();
    write_image_file(path, image.live_bytes);

    auto engine = make_engine(opts, seed, &sim_clock_ns);
    engine->register_reference(image.xapp_id, path, XappTier::high_impact);
    Blocklist blocklist;
    MitigationUnit mitigation(blocklist);
    const auto policy = load_policy_for(opts, SignatureSet{});

    sim_clock_ns = 0;
    const auto clean = engine->attestation_round(image);
    std::mt19937_64 rng(seed);
    Bytes code(64);
    for (auto& b : code) b = static_cast<std::uint8_t>(rng());
    inject_code(image, std::uniform_int_distribution<std::size_t>(0, bytes)(rng), code);
    sim_clock_ns = period_ns;
    const auto after = engine->attestation_round(image);

    result.injection_detected = !is_violation(clean.verdict) && is_violation(after.verdict);
    if (is_violation(after.verdict)) {
      const auto actions = resolve_attestation_event(image.xapp_id, to_string(XappTier::high_impact), policy);
      mitigation.apply(actions, {Detector::attestation, image.xapp_id, std::string(to_string(after.verdict)),
                                 sim_clock_ns / 1'000'000, 0});
    }
    result.injected_xapp_blocked = blocklist.xapp_blocked(image.xapp_id);
    result.incident_reports = mitigation.log().size();
    if (!opts.out_dir.empty()) {
      std::ofstream log(opts.out_dir / "attestation_incidents.csv");
      mitigation.write_log_csv(log);
    }
    std::filesystem::remove(path);
  }
  if (opts.out_dir.empty()) {
    std::filesystem::remove_all(dir);
  } else {
    std::error_code ec;
    std::filesystem::remove(dir, ec);  // only when empty
  }
  return result;
}

// ---------------------------------------------------------------------------

Stat stat_of(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi, std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size())};
}

ConsumerDecision consumer_xapp_loop(const TelemetryStore& store, std::uint64_t tick, double fixed_cost_ms,
                                    TimingMode timing) {
  const auto start = monotonic_ns();
  ConsumerDecision d;
  const auto records = store.records_at(tick * 1000);
  d.records = records.size();
  // Stand-in classifier: downlink throughput per PRB far below the slice norm.
  for (const auto& r : records) {
    const double prb = r.features[kPrbUsedDl];
    if (prb > 0.0 && r.features[kUeThpDl] / prb < 50.0) ++d.suspicious_ues;
  }
  if (timing == TimingMode::wall) {
    while (ms_since(start) < fixed_cost_ms) {
    }
    d.processing_ms = ms_since(start);
  } else {
    d.processing_ms = fixed_cost_ms + static_cast<double>(records.size()) * cost::kNsPerStoredRecord / 1e6;
  }
  return d;
}

UseCaseResult run_use_case(const HarnessOptions& opts, std::uint32_t ue_count,
                           std::shared_ptr<const DetectorBundle> bundle) {
  auto config = use_case_preset(ue_count);
  apply_scenario_overrides(config, opts.scenario_overrides, "use_case");
  config.total_ues = ue_count;
  config.validate();

  const auto rulebook = load_or_make_rulebook(opts);
  const auto automaton = std::make_shared<const AhoCorasickMatcher>(AhoCorasickMatcher::build(*rulebook));
  const auto policy = experiment_policy(opts, *rulebook);
  auto csv = open_csv(opts, "use_case_" + std::to_string(ue_count) + ".csv",
                      "run,loop,inspector_ms,detector_ms,shift_ms,loop_wall_ms");

  const auto dir = image_dir(opts);
  std::uint64_t sim_clock_ns = 0;

  UseCaseResult result;
  result.ue_count = ue_count;
  std::vector<double> insp, det, shift;

  for (std::size_t run = 0; run < opts.runs; ++run) {
    const auto seed = derive_seed(opts.seed, kStreamUseCase, ue_count * 1000ULL + run);
    config.rng_seed = seed;
    Emulator emu(config, rulebook);

    TelemetryStore baseline_store, guarded_store;
    Blocklist blocklist;
    MitigationUnit mitigation(blocklist);
    IngressInspector inspector(rulebook, automaton, blocklist, {opts.matcher, opts.timing});
    PoisoningDetector detector(bundle, opts.timing);

    std::vector<const E2Message*> forwarded;
    inspector.set_dispatch([&](const E2Message& msg) { forwarded.push_back(&msg); });
    inspector.set_mitigation([&](const E2Message& msg, const MatchResult& match) {
      std::string ids;
      for (const auto& h : match.hits) ids += (ids.empty() ? "" : ";") + std::to_string(h.signature_id);
      mitigation.apply(resolve_inspector_event(match, policy),
                       {Detector::inspector, std::to_string(msg.source_node_id), ids, 0, msg.source_node_id});
    });

    std::optional<XappImage> xapp;
    std::unique_ptr<AttestationEngine> engine;
    std::string image_path;
    if (opts.attest_during_use_case) {
      const auto bytes = static_cast<std::size_t>(std::llround(opts.use_case_xapp_mb * kMiB));
      xapp = XappImage{"consumer-xapp", random_image(bytes, seed), bytes};
      std::filesystem::create_directories(dir);
      image_path = (dir / ("consumer-" + std::to_string(ue_count) + "-run" + std::to_string(run) + ".img")).string();
      write_image_file(image_path, xapp->live_bytes);
      engine = make_engine(opts, seed, &sim_clock_ns);
      engine->register_reference(xapp->xapp_id, image_path, XappTier::standard);
    }

    for (std::uint64_t loop = 0; loop < config.loops; ++loop) {
      TickRecords tick;
      const auto messages = emu.step(&tick);
      const auto cell_records = records_per_cell(emu, tick);
      result.emitted_records += tick.records.size();

      std::vector<Bytes> frames;
      frames.reserve(messages.size());
      for (const auto& em : messages) frames.push_back(encode_frame(em.message));
      const auto ingress_ns = loop * 1'000'000'000ULL;

      // Baseline: decode and store.
      double baseline_avail_ms = 0.0;
      {
        const auto start = monotonic_ns();
        std::size_t decoded_bytes = 0, stored = 0;
        for (std::size_t i = 0; i < frames.size(); ++i) {
          const auto msg = decode_frame(frames[i], ingress_ns);
          decoded_bytes += frames[i].size();
          if (msg.kind != E2MessageKind::Indication) continue;
          // Injected payloads no longer parse; an unprotected RIC drops them here.
          try {
            const auto report = decode_kpm_payload(msg.payload, msg.source_node_id, messages[i].cell_id);
            stored += baseline_store.append(report.records);
          } catch (const Error&) {
          }
        }
        result.baseline_stored += stored;
        baseline_avail_ms = opts.timing == TimingMode::wall
                                ? ms_since(start)
                                : (static_cast<double>(decoded_bytes) * cost::kNsPerDecodedByte +
                                   static_cast<double>(stored) * cost::kNsPerStoredRecord) / 1e6;
      }
      const auto baseline_decision = consumer_xapp_loop(baseline_store, loop, opts.consumer_cost_ms, opts.timing);

      // Safeguarded: inspect, decode, verify, store.
      LoopMetrics m;
      m.run = run;
      m.loop = loop;
      const auto start = monotonic_ns();
      std::size_t decoded_bytes = 0, stored = 0;
      std::vector<E2Message> decoded;
      decoded.reserve(frames.size());
      for (const auto& f : frames) {
        decoded.push_back(decode_frame(f, ingress_ns));
        decoded_bytes += f.size();
      }

      const auto inspect_start = monotonic_ns();
      double scan_cost_ms = 0.0;
      forwarded.clear();
      for (std::size_t i = 0; i < decoded.size(); ++i) {
        const auto outcome = inspector.inspect(decoded[i]);
        scan_cost_ms += static_cast<double>(outcome.inspect_latency_ns) / 1e6;
        if (outcome.route != Route::forwarded && decoded[i].kind == E2MessageKind::Indication)
          result.dropped_by_inspector += cell_records.at(messages[i].cell_id);
      }
      m.inspector_ms = opts.timing == TimingMode::wall ? ms_since(inspect_start) : scan_cost_ms;

      std::vector<KpmRecord> records;
      for (const auto* msg : forwarded) {
        if (msg->kind != E2MessageKind::Indication) continue;
        const auto idx = static_cast<std::size_t>(msg - decoded.data());
        auto report = decode_kpm_payload(msg->payload, msg->source_node_id, messages[idx].cell_id);
        records.insert(records.end(), report.records.begin(), report.records.end());
      }

      auto res = detector.process_tick(records);
      m.detector_ms = res.elapsed_ms;
      for (const auto& v : res.verdicts) {
        if (!v.is_anomalous) continue;
        const auto node = emu.profile(v.ue_id).node_id;
        mitigation.apply(resolve_kpm_event(v, node, policy),
                         {Detector::kpm, std::to_string(v.ue_id), std::string(to_string(v.magnitude)),
                          v.timestamp_ms, node});
      }
      result.flagged_records += res.flagged.size();
      stored = guarded_store.append(res.accepted);
      result.safeguarded_stored += stored;
      for (const auto& f : res.flagged)
        if (guarded_store.contains(f.ue_id, f.timestamp_ms)) ++result.stored_flagged;

      const double guarded_avail_ms = opts.timing == TimingMode::wall
                                          ? ms_since(start)
                                          : (static_cast<double>(decoded_bytes) * cost::kNsPerDecodedByte +
                                             static_cast<double>(stored) * cost::kNsPerStoredRecord) / 1e6 +
                                                m.inspector_ms + m.detector_ms;
      const auto decision = consumer_xapp_loop(guarded_store, loop, opts.consumer_cost_ms, opts.timing);
      m.decision_records = decision.records;

      m.shift_ms = guarded_avail_ms - baseline_avail_ms;
      m.loop_wall_ms = guarded_avail_ms + decision.processing_ms;
      m.baseline_loop_wall_ms = baseline_avail_ms + baseline_decision.processing_ms;
      if (m.loop_wall_ms >= 1000.0) ++result.budget_violations;
      result.baseline_runtime_ms += std::max(1000.0, m.baseline_loop_wall_ms);
      result.safeguarded_runtime_ms += std::max(1000.0, m.loop_wall_ms);

      insp.push_back(m.inspector_ms);
      det.push_back(m.detector_ms);
      shift.push_back(m.shift_ms);
      csv.row(std::to_string(run) + "," + std::to_string(loop) + "," + fixed(m.inspector_ms) + "," +
              fixed(m.detector_ms) + "," + fixed(m.shift_ms) + "," + fixed(m.loop_wall_ms));
      result.loops.push_back(m);

      // Attestation in the idle remainder of the loop, off the measured path.
      if (engine && loop % 5 == 0) {
        sim_clock_ns = loop * 1'000'000'000ULL;
        const auto r = engine->attestation_round(*xapp);
        ++result.attestation_rounds;
        if (is_violation(r.verdict)) ++result.attestation_violations;
      }
    }
    for (const auto& em : emu.teardown()) inspector.inspect(decode_frame(encode_frame(em.message), 0));
    if (!image_path.empty()) std::filesystem::remove(image_path);
  }
  if (opts.attest_during_use_case) {
    std::error_code ec;
    if (opts.out_dir.empty()) std::filesystem::remove_all(dir, ec);
    else std::filesystem::remove(dir, ec);
  }

  result.inspector = stat_of(insp);
  result.detector = stat_of(det);
  result.shift = stat_of(shift);
  double comp = 0.0;
  for (std::size_t i = 0; i < insp.size(); ++i) comp += insp[i] + det[i];
  result.mean_component_ms = insp.empty() ? 0.0 : comp / static_cast<double>(insp.size());
  return result;
}

}  // namespace ricguard
