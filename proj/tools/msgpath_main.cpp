#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "msgpath/acceptance.hpp"
#include "msgpath/config_io.hpp"
#include "msgpath/model.hpp"
#include "msgpath/simulator.hpp"
#include "msgpath/trace.hpp"
#include "msgpath/whatif.hpp"

namespace {

using namespace msgpath;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReproductionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ComponentTimings load_or_default(const std::string& config_path) {
  if (config_path.empty()) {
    return reference_timings();  // same values as configs/tx2_cx4.cfg
  }
  return load_timings_file(config_path);
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void add_model_command(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "model", "Print modeled injection overhead and latency at both levels");
  auto config = std::make_shared<std::string>();
  auto msg_size = std::make_shared<std::uint32_t>(8);
  sub->add_option("--config", *config, "timings config file (default: built-in reference set)");
  sub->add_option("--msg-size", *msg_size, "payload size in bytes")->default_val(8);

  sub->callback([config, msg_size] {
    ComponentTimings t = load_or_default(*config);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "gen_completion        %10.2f ns\n",
                  gen_completion(t).ns());
    std::cout << buf;
    if (t.llp_post_total().ns() > 0.0) {
      std::snprintf(buf, sizeof(buf), "min_poll_interval     %10u\n",
                    min_poll_interval(t));
    } else {
      std::snprintf(buf, sizeof(buf), "min_poll_interval            n/a\n");
    }
    std::cout << buf;
    for (auto level : {StackLevel::llp_only, StackLevel::full_stack}) {
      std::snprintf(buf, sizeof(buf), "inj_overhead   %-5s  %10.2f ns\n",
                    to_string(level).c_str(), inj_overhead(t, level).ns());
      std::cout << buf;
    }
    for (auto level : {StackLevel::llp_only, StackLevel::full_stack}) {
      std::snprintf(buf, sizeof(buf), "latency        %-5s  %10.2f ns  (msg %u B)\n",
                    to_string(level).c_str(), latency(t, level, *msg_size).ns(),
                    *msg_size);
      std::cout << buf;
    }
  });
}

void add_breakdown_command(CLI::App& app) {
  auto* sub = app.add_subcommand("breakdown",
                                 "Emit a labeled component/time breakdown");
  auto config = std::make_shared<std::string>();
  auto metric = std::make_shared<std::string>("latency");
  auto level = std::make_shared<std::string>("full");
  auto granularity = std::make_shared<std::string>("fine");
  auto msg_size = std::make_shared<std::uint32_t>(8);
  auto split = std::make_shared<bool>(false);
  auto format = std::make_shared<std::string>("csv");
  auto out_path = std::make_shared<std::string>();
  sub->add_option("--config", *config, "timings config file");
  sub->add_option("--metric", *metric, "injection|latency")->default_val("latency");
  sub->add_option("--level", *level, "llp|full")->default_val("full");
  sub->add_option("--granularity", *granularity, "fine|category|on-node")
      ->default_val("fine");
  sub->add_option("--msg-size", *msg_size, "payload size in bytes")->default_val(8);
  sub->add_flag("--split-llp-post", *split, "expand the post cost into its five steps");
  sub->add_option("--format", *format, "csv|json")->default_val("csv");
  sub->add_option("--out", *out_path, "output file (default: stdout)");

  sub->callback([=] {
    ComponentTimings t = load_or_default(*config);
    auto report = breakdown(t, metric_from_string(*metric),
                            stack_level_from_string(*level),
                            granularity_from_string(*granularity), *msg_size,
                            *split);
    if (*format == "csv") {
      write_output(*out_path, report.to_csv());
    } else if (*format == "json") {
      write_output(*out_path, report.to_json() + "\n");
    } else {
      throw std::invalid_argument("unknown format '" + *format + "'");
    }
  });
}

struct SimulateArgs {
  std::string config;
  std::string sim_config;
  std::string mode = "putbw";
  std::uint64_t messages = 10000;
  std::uint32_t poll_interval = 16;
  std::uint32_t batch = 1;
  std::uint32_t txq_depth = 64;
  std::uint32_t unsignaled = 1;
  std::uint32_t credits = 0;  // 0 = unlimited
  std::uint32_t msg_size = 8;
  std::uint32_t completion_size = 64;
  double nic_service_ns = 0.0;
  std::string level = "llp";
  std::string emit_trace;
  std::string emit_events;
  std::int64_t warmup = -1;  // -1: 2 * txq_depth
};

void add_simulate_command(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "simulate", "Run the pipeline simulator and print a JSON summary");
  auto a = std::make_shared<SimulateArgs>();
  sub->add_option("--config", a->config, "timings config file");
  sub->add_option("--sim-config", a->sim_config, "pipeline config file (sim.* keys)");
  sub->add_option("--mode", a->mode, "putbw|pingpong|mpi-window")->default_val("putbw");
  sub->add_option("--messages", a->messages,
                  "messages to post (round trips in pingpong mode)")
      ->default_val(10000);
  auto* p = sub->add_option("--poll-interval", a->poll_interval, "posts between polls");
  auto* b = sub->add_option("--batch", a->batch, "completions per poll");
  auto* d = sub->add_option("--txq-depth", a->txq_depth, "transmit queue depth");
  auto* u = sub->add_option("--unsignaled-interval", a->unsignaled,
                            "one completion every c posts");
  auto* cr = sub->add_option("--credits", a->credits, "RC credits, 0 = unlimited");
  auto* ms = sub->add_option("--msg-size", a->msg_size, "payload size in bytes");
  auto* cs = sub->add_option("--completion-size", a->completion_size,
                             "completion entry size in bytes");
  auto* ns = sub->add_option("--nic-service", a->nic_service_ns,
                             "NIC service time in ns");
  sub->add_option("--level", a->level, "llp|full (pingpong mode)")->default_val("llp");
  sub->add_option("--emit-trace", a->emit_trace, "write a synthetic PCIe trace CSV");
  sub->add_option("--emit-events", a->emit_events, "write the event log CSV");
  sub->add_option("--warmup", a->warmup,
                  "arrivals to discard for the steady-state mean (-1: 2*depth)");

  sub->callback([=] {
    ComponentTimings t = load_or_default(a->config);
    PipelineConfig cfg;
    if (!a->sim_config.empty()) cfg = load_pipeline_config_file(a->sim_config);
    cfg.workload = workload_mode_from_string(a->mode);
    if (p->count()) cfg.poll_interval = a->poll_interval;
    if (b->count()) cfg.poll_batch = a->batch;
    if (d->count()) cfg.txq_depth = a->txq_depth;
    if (u->count()) cfg.unsignaled_interval = a->unsignaled;
    if (cr->count()) {
      if (a->credits == 0) {
        cfg.rc_credits.reset();
      } else {
        cfg.rc_credits = a->credits;
      }
    }
    if (ms->count()) cfg.message_size_bytes = a->msg_size;
    if (cs->count()) cfg.completion_size_bytes = a->completion_size;
    if (ns->count()) cfg.nic_service = Duration(a->nic_service_ns);

    SimResult result;
    if (cfg.workload == WorkloadMode::llp_pingpong) {
      result = simulate_pingpong(t, cfg, a->messages,
                                 stack_level_from_string(a->level));
    } else {
      result = simulate_injection(t, cfg, a->messages);
    }
    if (!a->emit_trace.empty()) {
      write_output(a->emit_trace, records_to_csv(synth_trace(result, t, cfg)));
    }
    if (!a->emit_events.empty()) {
      write_output(a->emit_events, result.events_csv());
    }
    std::cout << result.summary_json() << "\n";
  });
}

void add_analyze_trace_command(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "analyze-trace",
      "Estimate component timings from a PCIe trace and emit them as config");
  auto trace_path = std::make_shared<std::string>();
  auto kind = std::make_shared<std::string>("putbw");
  auto config = std::make_shared<std::string>();
  auto msg_size = std::make_shared<std::uint32_t>(8);
  auto chunk_gap = std::make_shared<double>(5.0);
  auto out_path = std::make_shared<std::string>();
  sub->add_option("--trace", *trace_path, "trace CSV file")->required();
  sub->add_option("--trace-kind", *kind, "putbw|pingpong")->default_val("putbw");
  sub->add_option("--config", *config,
                  "timings config supplying the known post/progress costs");
  sub->add_option("--msg-size", *msg_size, "payload size in bytes")->default_val(8);
  sub->add_option("--chunk-gap", *chunk_gap, "PIO chunk grouping threshold, ns")
      ->default_val(5.0);
  sub->add_option("--out", *out_path, "output file (default: stdout)");

  sub->callback([=] {
    auto records = parse_trace_file(*trace_path);
    ComponentTimings base = load_or_default(*config);
    std::ostringstream out;
    char buf[160];
    out << "# timings estimated from " << *trace_path << " (" << *kind << ")\n";

    Duration pcie = base.io_net.pcie;
    if (*kind == "putbw") {
      // The queue-fill transient of an injection trace can pipeline
      // completion writes past their ACKs; report that instead of failing.
      try {
        pcie = estimate_pcie(records);
        std::snprintf(buf, sizeof(buf), "io.pcie = %.3f\n", pcie.ns());
        out << buf;
      } catch (const EstimationError& e) {
        out << "# io.pcie not estimable: " << e.what() << "\n";
      }
    } else {
      pcie = estimate_pcie(records);
      std::snprintf(buf, sizeof(buf), "io.pcie = %.3f\n", pcie.ns());
      out << buf;
    }

    if (*kind == "putbw") {
      InjectionFilter filter;
      filter.chunk_gap_ns = *chunk_gap;
      auto stats = injection_interval_stats(records, filter);
      std::snprintf(buf, sizeof(buf),
                    "# observed injection overhead: count=%zu mean=%.3f "
                    "median=%.3f p25=%.3f p75=%.3f min=%.3f max=%.3f ns\n",
                    stats.count, stats.mean_ns, stats.median_ns, stats.p25_ns,
                    stats.p75_ns, stats.min_ns, stats.max_ns);
      out << buf;
    } else if (*kind == "pingpong") {
      Duration network = estimate_network(records, *chunk_gap);
      RcToMemKnowns knowns{pcie, base.llp_post_total(), base.llp_prog};
      Duration rc = estimate_rc_to_mem(records, knowns, *msg_size, *chunk_gap);
      out << "# network total below assumes a direct NIC-to-NIC path\n";
      std::snprintf(buf, sizeof(buf), "net.wire = %.3f\n", network.ns());
      out << buf;
      out << "net.has_switch = false\n";
      std::snprintf(buf, sizeof(buf), "io.rc_to_mem.%u = %.3f\n", *msg_size,
                    rc.ns());
      out << buf;
    } else {
      throw std::invalid_argument("unknown trace kind '" + *kind + "'");
    }
    write_output(*out_path, out.str());
  });
}

void add_whatif_command(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "whatif", "Sweep component reductions and report metric improvements");
  auto config = std::make_shared<std::string>();
  auto targets_csv = std::make_shared<std::string>("all");
  auto fractions_csv = std::make_shared<std::string>();
  auto metric = std::make_shared<std::string>("latency");
  auto level = std::make_shared<std::string>("full");
  auto msg_size = std::make_shared<std::uint32_t>(8);
  auto gnuplot = std::make_shared<bool>(false);
  auto confirm = std::make_shared<bool>(false);
  auto out_path = std::make_shared<std::string>();
  sub->add_option("--config", *config, "timings config file");
  sub->add_option("--targets", *targets_csv,
                  "comma-separated optimization targets, or 'all'")
      ->default_val("all");
  sub->add_option("--fractions", *fractions_csv,
                  "comma-separated reductions in [0,1] (default 0.1,0.3,0.5,0.7,0.9)");
  sub->add_option("--metric", *metric, "injection|latency")->default_val("latency");
  sub->add_option("--level", *level, "llp|full")->default_val("full");
  sub->add_option("--msg-size", *msg_size, "payload size in bytes")->default_val(8);
  sub->add_flag("--gnuplot", *gnuplot, "emit gnuplot data blocks instead of CSV");
  sub->add_flag("--confirm-sim", *confirm,
                "re-derive each point from a simulator run and report the delta");
  sub->add_option("--out", *out_path, "output file (default: stdout)");

  sub->callback([=] {
    ComponentTimings t = load_or_default(*config);
    std::vector<OptimizationTarget> targets;
    if (*targets_csv == "all") {
      targets = all_optimization_targets();
    } else {
      for (const auto& name : split_csv(*targets_csv)) {
        targets.push_back(optimization_target_from_string(name));
      }
    }
    std::vector<double> fractions;
    if (fractions_csv->empty()) {
      fractions = default_sweep_fractions();
    } else {
      for (const auto& f : split_csv(*fractions_csv)) {
        fractions.push_back(std::stod(f));
      }
    }
    auto points = sweep(t, targets, fractions, metric_from_string(*metric),
                        stack_level_from_string(*level), *msg_size);
    std::string body = *gnuplot ? whatif_gnuplot(points) : whatif_csv(points);
    if (*confirm) {
      PipelineConfig cfg;
      std::ostringstream extra;
      extra << "# simulator confirmation (analytic vs simulated optimized ns)\n";
      char buf[160];
      for (const auto& p : points) {
        double sim_ns = confirm_with_simulator(t, p, cfg, 4000);
        std::snprintf(buf, sizeof(buf), "# %s f=%.2f analytic=%.3f sim=%.3f\n",
                      to_string(p.target).c_str(), p.fraction, p.optimized_ns,
                      sim_ns);
        extra << buf;
      }
      body += extra.str();
    }
    write_output(*out_path, body);
  });
}

void add_reproduce_command(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "reproduce",
      "Run the full reproduction suite against the reference config");
  auto config = std::make_shared<std::string>();
  sub->add_option("--config", *config, "timings config file");

  sub->callback([config] {
    ComponentTimings t = load_or_default(*config);
    auto results = run_acceptance(t);
    for (const auto& r : results) {
      std::printf("%s  criterion %d: %s  [%s]\n", r.passed ? "PASS" : "FAIL",
                  r.id, r.name.c_str(), r.detail.c_str());
    }
    if (!all_passed(results)) {
      throw ReproductionFailure("reproduction checks failed");
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-message communication breakdown toolkit: analytical "
               "injection/latency models, a pipeline simulator, PCIe-trace "
               "estimators, and what-if sweeps"};
  app.require_subcommand(1);
  add_model_command(app);
  add_breakdown_command(app);
  add_simulate_command(app);
  add_analyze_trace_command(app);
  add_whatif_command(app);
  add_reproduce_command(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ReproductionFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TraceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const EstimationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DeadlockError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
