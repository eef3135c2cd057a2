#include "msgpath/acceptance.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "msgpath/model.hpp"
#include "msgpath/simulator.hpp"
#include "msgpath/trace.hpp"
#include "msgpath/whatif.hpp"

namespace msgpath {

namespace {

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return std::string(buf);
}

// Uniform draw quantized to 0.01 ns so every value is exact in picoseconds.
double draw(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return std::round(dist(rng) * 100.0) / 100.0;
}

// Plausible small-message timing sets (same order of magnitude as the
// reference system).
ComponentTimings random_timings(std::mt19937_64& rng) {
  ComponentTimings t;
  t.llp_post.md_setup = Duration(draw(rng, 5, 40));
  t.llp_post.barrier_md = Duration(draw(rng, 2, 30));
  t.llp_post.barrier_dbc = Duration(draw(rng, 2, 30));
  t.llp_post.pio_copy = Duration(draw(rng, 20, 120));
  t.llp_post.misc = Duration(draw(rng, 2, 25));
  t.llp_prog = Duration(draw(rng, 20, 100));
  t.misc.busy_post = Duration(draw(rng, 2, 12));
  t.misc.measurement_update = Duration(draw(rng, 10, 60));
  t.misc.per_msg_full = Duration(draw(rng, 1, 6));
  t.hlp.isend_mpi = Duration(draw(rng, 5, 40));
  t.hlp.isend_proto = Duration(draw(rng, 1, 10));
  t.hlp.tx_prog = Duration(draw(rng, 20, 80));
  t.hlp.rx_cb_mpi = Duration(draw(rng, 20, 60));
  t.hlp.rx_cb_proto = Duration(draw(rng, 40, 160));
  t.hlp.rx_post_progress_mpi = Duration(draw(rng, 10, 60));
  t.io_net.pcie = Duration(draw(rng, 40, 160));
  t.io_net.wire = Duration(draw(rng, 100, 400));
  t.io_net.switch_latency = Duration(draw(rng, 10, 150));
  t.io_net.has_switch = (rng() % 2) == 0;
  t.io_net.rc_to_mem.set(8, Duration(draw(rng, 100, 350)));
  return t;
}

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << what;
    }
  }
};

CriterionResult model_exactness(const ComponentTimings& t) {
  Check c;
  struct Case {
    const char* name;
    double got;
    double want;
  };
  const Case cases[] = {
      {"inj_overhead(llp)", inj_overhead(t, StackLevel::llp_only).ns(), 295.73},
      {"inj_overhead(full)", inj_overhead(t, StackLevel::full_stack).ns(), 264.97},
      {"latency(llp,8B)", latency(t, StackLevel::llp_only, 8).ns(), 1135.80},
      {"latency(full,8B)", latency(t, StackLevel::full_stack, 8).ns(), 1387.02},
  };
  std::ostringstream values;
  for (const auto& k : cases) {
    c.expect(std::abs(k.got - k.want) <= 0.01,
             fmt("%s = %.4f, want %.2f +-0.01", k.name, k.got, k.want));
    values << fmt("%s=%.2f ", k.name, k.got);
  }
  std::string detail = c.ok ? values.str() : c.detail.str();
  return {1, "model exactness (295.73 / 264.97 / 1135.80 / 1387.02 ns)", c.ok,
          detail};
}

CriterionResult observed_error(const ComponentTimings& t) {
  Check c;
  struct Case {
    const char* name;
    double modeled;
    double observed;
    double margin;
  };
  const Case cases[] = {
      {"injection llp", inj_overhead(t, StackLevel::llp_only).ns(), 282.33, 0.05},
      {"injection full", inj_overhead(t, StackLevel::full_stack).ns(), 263.91, 0.01},
      {"latency llp", latency(t, StackLevel::llp_only, 8).ns(), 1190.25, 0.05},
      {"latency full", latency(t, StackLevel::full_stack, 8).ns(), 1336.0, 0.04},
  };
  std::ostringstream values;
  for (const auto& k : cases) {
    double err = relative_error(Duration(k.modeled), Duration(k.observed));
    c.expect(err <= k.margin, fmt("%s: rel err %.4f > %.2f vs observed %.2f",
                                  k.name, err, k.margin, k.observed));
    values << fmt("%s=%.2f%% ", k.name, 100.0 * err);
  }
  std::string detail = c.ok ? values.str() : c.detail.str();
  return {2, "modeled vs observed within stated margins (5/1/5/4 %)", c.ok,
          detail};
}

CriterionResult breakdown_percentages(const ComponentTimings& t) {
  Check c;
  auto category =
      breakdown(t, Metric::latency, StackLevel::full_stack, Granularity::category, 8);
  double net_pct = 0.0;
  double cpu_io_pct = 0.0;
  for (const auto& e : category.entries) {
    if (e.label == "Network") {
      net_pct = e.percent;
    } else {
      cpu_io_pct += e.percent;
    }
  }
  c.expect(std::abs(net_pct - 27.6) <= 0.1,
           fmt("Network %.3f%%, want 27.6 +-0.1", net_pct));
  c.expect(std::abs(cpu_io_pct - 72.4) <= 0.1,
           fmt("CPU+I/O %.3f%%, want 72.4 +-0.1", cpu_io_pct));

  auto on_node =
      breakdown(t, Metric::latency, StackLevel::full_stack, Granularity::on_node, 8);
  double initiator = 0.0, target = 0.0;
  for (const auto& e : on_node.entries) {
    if (e.label == "initiator") initiator = e.time.ns();
    if (e.label == "target") target = e.time.ns();
  }
  c.expect(target > initiator,
           fmt("target %.2f ns not above initiator %.2f ns", target, initiator));
  std::string detail =
      c.ok ? fmt("Network=%.2f%% CPU+I/O=%.2f%% target=%.2f initiator=%.2f",
                 net_pct, cpu_io_pct, target, initiator)
           : c.detail.str();
  return {3, "breakdown percentages (Network 27.6%, CPU+I/O 72.4%, target-heavy)",
          c.ok, detail};
}

PipelineConfig putbw_config() {
  PipelineConfig cfg;
  cfg.workload = WorkloadMode::llp_putbw;
  cfg.poll_interval = 16;
  cfg.unsignaled_interval = 1;
  cfg.txq_depth = 64;
  return cfg;
}

CriterionResult simulator_convergence(const ComponentTimings& t) {
  Check c;
  PipelineConfig cfg = putbw_config();
  auto run = simulate_injection(t, cfg, 10000);
  double sim_inj = run.mean_nic_interarrival_ns(2 * cfg.txq_depth);
  double model_inj = inj_overhead(t, StackLevel::llp_only).ns();
  double rel = std::abs(sim_inj - model_inj) / model_inj;
  c.expect(rel <= 0.01,
           fmt("putbw mean interarrival %.3f vs model %.2f (%.3f%%)", sim_inj,
               model_inj, 100.0 * rel));

  PipelineConfig pp = cfg;
  pp.workload = WorkloadMode::llp_pingpong;
  auto llp = simulate_pingpong(t, pp, 200, StackLevel::llp_only);
  auto full = simulate_pingpong(t, pp, 200, StackLevel::full_stack);
  double llp_lat = llp.mean_one_way_latency_ns();
  double full_lat = full.mean_one_way_latency_ns();
  c.expect(std::abs(llp_lat - latency(t, StackLevel::llp_only, 8).ns()) <= 0.01,
           fmt("pingpong llp latency %.4f", llp_lat));
  c.expect(std::abs(full_lat - latency(t, StackLevel::full_stack, 8).ns()) <= 0.01,
           fmt("pingpong full latency %.4f", full_lat));
  std::string detail =
      c.ok ? fmt("putbw=%.3f ns (%.3f%% off), pingpong=%.2f/%.2f ns", sim_inj,
                 100.0 * rel, llp_lat, full_lat)
           : c.detail.str();
  return {4, "simulator convergence (putbw within 1%, pingpong within 0.01 ns)",
          c.ok, detail};
}

CriterionResult overlap_invariance(const ComponentTimings& t) {
  Check c;
  PipelineConfig cfg = putbw_config();
  auto base = simulate_injection(t, cfg, 4000);
  double base_inj = base.mean_nic_interarrival_ns(2 * cfg.txq_depth);
  std::ostringstream values;
  for (double scale : {0.25, 0.5, 2.0, 4.0}) {
    ComponentTimings scaled = t;
    scaled.io_net.pcie = scale * t.io_net.pcie;
    auto run = simulate_injection(scaled, cfg, 4000);
    double inj = run.mean_nic_interarrival_ns(2 * cfg.txq_depth);
    double rel = std::abs(inj - base_inj) / base_inj;
    c.expect(rel < 0.005, fmt("pcie x%.2f shifts interarrival by %.3f%%",
                              scale, 100.0 * rel));
    values << fmt("x%.2f:%.4f%% ", scale, 100.0 * rel);
  }
  std::string detail = c.ok ? values.str() : c.detail.str();
  return {5, "overlap invariance (pcie x0.25..x4 moves interarrival < 0.5%)",
          c.ok, detail};
}

CriterionResult estimator_round_trip(const ComponentTimings&) {
  Check c;
  std::mt19937_64 rng(0x5eed0006);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    ComponentTimings t = random_timings(rng);
    PipelineConfig cfg;
    cfg.workload = WorkloadMode::llp_pingpong;
    auto run = simulate_pingpong(t, cfg, 40, StackLevel::llp_only);
    auto records = synth_trace(run, t, cfg);

    double pcie_got = estimate_pcie(records).ns();
    double net_got = estimate_network(records).ns();
    RcToMemKnowns knowns{t.io_net.pcie, t.llp_post_total(), t.llp_prog};
    double rc_got = estimate_rc_to_mem(records, knowns, cfg.message_size_bytes).ns();

    auto rel = [](double got, double want) {
      return std::abs(got - want) / want;
    };
    double e1 = rel(pcie_got, t.io_net.pcie.ns());
    double e2 = rel(net_got, t.network_total().ns());
    double e3 = rel(rc_got, t.rc_to_mem(8).ns());
    worst = std::max({worst, e1, e2, e3});
    c.expect(e1 <= 0.02, fmt("set %d: pcie %.3f vs %.3f", i, pcie_got,
                             t.io_net.pcie.ns()));
    c.expect(e2 <= 0.02, fmt("set %d: network %.3f vs %.3f", i, net_got,
                             t.network_total().ns()));
    c.expect(e3 <= 0.02,
             fmt("set %d: rc_to_mem %.3f vs %.3f", i, rc_got, t.rc_to_mem(8).ns()));
  }
  std::string detail = c.ok ? fmt("10 randomized sets, worst error %.4f%%",
                                  100.0 * worst)
                            : c.detail.str();
  return {6, "estimator round trip recovers pcie/network/rc_to_mem within 2%",
          c.ok, detail};
}

CriterionResult whatif_claims(const ComponentTimings& t) {
  Check c;
  auto point = [&](OptimizationTarget target, double fraction, Metric metric) {
    return sweep(t, {target}, {fraction}, metric, StackLevel::full_stack, 8).at(0);
  };

  auto pio_inj = point(OptimizationTarget::pio_copy, 0.84, Metric::injection);
  c.expect(pio_inj.percent_reduction >= 25.0,
           fmt("PIO 84%%: injection -%.2f%% < 25%%", pio_inj.percent_reduction));
  auto pio_lat = point(OptimizationTarget::pio_copy, 0.84, Metric::latency);
  c.expect(pio_lat.percent_reduction >= 5.0,
           fmt("PIO 84%%: latency -%.2f%% < 5%%", pio_lat.percent_reduction));

  auto io_lat = point(OptimizationTarget::io_all, 0.5, Metric::latency);
  c.expect(io_lat.percent_reduction >= 15.0,
           fmt("io_all 50%%: latency -%.2f%% < 15%%", io_lat.percent_reduction));

  double switch_ns = t.io_net.switch_latency.ns();
  double switch_fraction = switch_ns > 30.0 ? 1.0 - 30.0 / switch_ns : 0.0;
  auto sw_lat = point(OptimizationTarget::switch_latency, switch_fraction,
                      Metric::latency);
  c.expect(std::abs(sw_lat.percent_reduction - 5.45) <= 1.0,
           fmt("switch to 30 ns: latency -%.2f%%, want 5.45 +-1pp",
               sw_lat.percent_reduction));

  auto hlp_inj = point(OptimizationTarget::hlp_all, 0.2, Metric::injection);
  c.expect(std::abs(hlp_inj.percent_reduction - 6.44) <= 1.0,
           fmt("HLP 20%%: injection -%.2f%%, want 6.44 +-1pp",
               hlp_inj.percent_reduction));
  auto llp_inj = point(OptimizationTarget::llp_all, 0.2, Metric::injection);
  c.expect(std::abs(llp_inj.percent_reduction - 13.33) <= 1.0,
           fmt("LLP 20%%: injection -%.2f%%, want 13.33 +-1pp",
               llp_inj.percent_reduction));

  std::string detail =
      c.ok ? fmt("pio: inj -%.2f%% lat -%.2f%%; io_all -%.2f%%; switch -%.2f%%; "
                 "hlp -%.2f%%; llp -%.2f%%",
                 pio_inj.percent_reduction, pio_lat.percent_reduction,
                 io_lat.percent_reduction, sw_lat.percent_reduction,
                 hlp_inj.percent_reduction, llp_inj.percent_reduction)
           : c.detail.str();
  return {7, "what-if claims (PIO, integrated NIC, switch, HLP/LLP bounds)",
          c.ok, detail};
}

CriterionResult property_suites(const ComponentTimings&) {
  Check c;
  constexpr int kCases = 100;

  {
    std::mt19937_64 rng(0x5eed0801);
    for (int i = 0; i < kCases && c.ok; ++i) {
      ComponentTimings t = random_timings(rng);
      for (Metric metric : {Metric::injection, Metric::latency}) {
        for (StackLevel level : {StackLevel::llp_only, StackLevel::full_stack}) {
          auto report = breakdown(t, metric, level, Granularity::fine, 8);
          double op = evaluate_metric_ns(t, metric, level, 8);
          c.expect(std::abs(report.total.ns() - op) <= 1e-9 * std::max(1.0, op),
                   fmt("additivity case %d: fine total %.9f vs op %.9f", i,
                       report.total.ns(), op));
          double sum = 0.0;
          double pct = 0.0;
          for (const auto& e : report.entries) {
            sum += e.time.ns();
            pct += e.percent;
          }
          c.expect(std::abs(sum - report.total.ns()) <= 1e-9 * std::max(1.0, op),
                   fmt("additivity case %d: entries do not sum to total", i));
          c.expect(std::abs(pct - 100.0) <= 1e-9,
                   fmt("additivity case %d: percents sum to %.12f", i, pct));
        }
      }
    }
  }

  {
    std::mt19937_64 rng(0x5eed0802);
    for (int i = 0; i < kCases && c.ok; ++i) {
      ComponentTimings t = random_timings(rng);
      ComponentTimings bumped = t;
      double delta = draw(rng, 0.01, 50.0);
      switch (rng() % 6) {
        case 0: bumped.llp_post.pio_copy = bumped.llp_post.pio_copy + Duration(delta); break;
        case 1: bumped.llp_prog = bumped.llp_prog + Duration(delta); break;
        case 2: bumped.io_net.pcie = bumped.io_net.pcie + Duration(delta); break;
        case 3: bumped.io_net.wire = bumped.io_net.wire + Duration(delta); break;
        case 4: bumped.hlp.tx_prog = bumped.hlp.tx_prog + Duration(delta); break;
        case 5: bumped.misc.busy_post = bumped.misc.busy_post + Duration(delta); break;
      }
      for (Metric metric : {Metric::injection, Metric::latency}) {
        for (StackLevel level : {StackLevel::llp_only, StackLevel::full_stack}) {
          double before = evaluate_metric_ns(t, metric, level, 8);
          double after = evaluate_metric_ns(bumped, metric, level, 8);
          c.expect(after >= before - 1e-12,
                   fmt("monotonicity case %d: %s/%s fell from %.4f to %.4f", i,
                       to_string(metric).c_str(), to_string(level).c_str(),
                       before, after));
        }
      }
    }
  }

  {
    std::mt19937_64 rng(0x5eed0803);
    for (int i = 0; i < kCases && c.ok; ++i) {
      ComponentTimings t = random_timings(rng);
      auto target = all_optimization_targets()[rng() % all_optimization_targets().size()];
      auto points = sweep(t, {target}, {0.1, 0.5, 0.9}, Metric::latency,
                          StackLevel::full_stack, 8);
      double s1 = (points[1].optimized_ns - points[0].optimized_ns) / 0.4;
      double s2 = (points[2].optimized_ns - points[1].optimized_ns) / 0.4;
      c.expect(std::abs(s1 - s2) <= 1e-9 * std::max(1.0, std::abs(s1)),
               fmt("linearity case %d (%s): slopes %.9f vs %.9f", i,
                   to_string(target).c_str(), s1, s2));
      c.expect(points[0].percent_reduction <= points[1].percent_reduction + 1e-12 &&
                   points[1].percent_reduction <= points[2].percent_reduction + 1e-12,
               fmt("monotonic sweep case %d (%s)", i, to_string(target).c_str()));
    }
  }

  {
    std::mt19937_64 rng(0x5eed0804);
    for (int i = 0; i < kCases && c.ok; ++i) {
      std::vector<TraceRecord> records;
      std::int64_t ts = 0;
      auto n = 2 + rng() % 60;
      for (std::uint64_t k = 0; k < n; ++k) {
        ts += static_cast<std::int64_t>(rng() % 500000);
        TraceRecord r;
        r.timestamp_ps = ts;
        r.direction = (rng() % 2) ? Direction::up : Direction::down;
        switch (rng() % 5) {
          case 0: r.kind = TlpKind::MWr; break;
          case 1: r.kind = TlpKind::MRd; break;
          case 2: r.kind = TlpKind::CplD; break;
          case 3: r.kind = TlpKind::ACK; break;
          case 4: r.kind = TlpKind::UpdateFC; break;
        }
        bool dllp = r.kind == TlpKind::ACK || r.kind == TlpKind::UpdateFC;
        r.payload_bytes = dllp ? 0 : static_cast<std::uint32_t>(8 * (1 + rng() % 8));
        r.tag = (rng() % 3) ? "t" + std::to_string(rng() % 100) : "";
        records.push_back(std::move(r));
      }
      auto reparsed = parse_trace(records_to_csv(records));
      c.expect(reparsed == records, fmt("trace round-trip case %d differs", i));
    }
  }

  {
    std::mt19937_64 rng(0x5eed0805);
    for (int i = 0; i < kCases && c.ok; ++i) {
      ComponentTimings t = random_timings(rng);
      PipelineConfig cfg;
      cfg.workload = (rng() % 2) ? WorkloadMode::llp_putbw : WorkloadMode::llp_pingpong;
      cfg.poll_interval = 1 + rng() % 24;
      cfg.txq_depth = 4 + rng() % 61;
      cfg.unsignaled_interval = 1;
      if (rng() % 4 == 0) cfg.rc_credits = 1 + rng() % 32;
      if (cfg.workload == WorkloadMode::llp_putbw) {
        auto a = simulate_injection(t, cfg, 200);
        auto b = simulate_injection(t, cfg, 200);
        c.expect(a.events == b.events && a.nic_arrival_ps == b.nic_arrival_ps,
                 fmt("determinism case %d (putbw) differs", i));
      } else {
        auto a = simulate_pingpong(t, cfg, 30);
        auto b = simulate_pingpong(t, cfg, 30);
        c.expect(a.events == b.events &&
                     a.one_way_latency_ps == b.one_way_latency_ps,
                 fmt("determinism case %d (pingpong) differs", i));
      }
    }
  }

  std::string detail = c.ok ? fmt("%d randomized cases per property", kCases)
                            : c.detail.str();
  return {8,
          "property suites (additivity, monotonicity, linearity, trace "
          "round-trip, determinism)",
          c.ok, detail};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const ComponentTimings& timings) {
  std::vector<CriterionResult> results;
  results.push_back(model_exactness(timings));
  results.push_back(observed_error(timings));
  results.push_back(breakdown_percentages(timings));
  results.push_back(simulator_convergence(timings));
  results.push_back(overlap_invariance(timings));
  results.push_back(estimator_round_trip(timings));
  results.push_back(whatif_claims(timings));
  results.push_back(property_suites(timings));
  return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

}  // namespace msgpath
