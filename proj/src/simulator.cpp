#include "msgpath/simulator.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <deque>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace msgpath {

std::string to_string(SimEventKind kind) {
  switch (kind) {
    case SimEventKind::post_begin: return "post_begin";
    case SimEventKind::post_end: return "post_end";
    case SimEventKind::busy_post: return "busy_post";
    case SimEventKind::doorbell_mwr_issued: return "doorbell_mwr_issued";
    case SimEventKind::nic_arrival: return "nic_arrival";
    case SimEventKind::net_depart: return "net_depart";
    case SimEventKind::target_arrival: return "target_arrival";
    case SimEventKind::target_payload_written: return "target_payload_written";
    case SimEventKind::ack_arrival: return "ack_arrival";
    case SimEventKind::completion_mwr_issued: return "completion_mwr_issued";
    case SimEventKind::completion_visible: return "completion_visible";
    case SimEventKind::poll_begin: return "poll_begin";
    case SimEventKind::poll_success: return "poll_success";
    case SimEventKind::poll_empty: return "poll_empty";
  }
  throw std::logic_error("unreachable event kind");
}

namespace {

struct CostsPs {
  std::int64_t llp_post = 0;
  std::int64_t hlp_post = 0;
  std::int64_t prog = 0;
  std::int64_t hlp_rx_prog = 0;
  std::int64_t tx_prog = 0;
  std::int64_t busy = 0;
  std::int64_t meas = 0;
  std::int64_t per_msg_full = 0;
  std::int64_t pcie = 0;
  std::int64_t network = 0;
  std::int64_t rc_msg = 0;
  std::int64_t rc_completion = 0;
  std::int64_t nic_service = 0;
};

CostsPs resolve_costs(const ComponentTimings& t, const PipelineConfig& cfg) {
  CostsPs c;
  c.llp_post = t.llp_post_total().ps();
  c.hlp_post = t.hlp_post_total().ps();
  c.prog = t.llp_prog.ps();
  c.hlp_rx_prog = t.hlp_rx_prog_total().ps();
  c.tx_prog = t.hlp.tx_prog.ps();
  c.busy = t.misc.busy_post.ps();
  c.meas = t.misc.measurement_update.ps();
  c.per_msg_full = t.misc.per_msg_full.ps();
  c.pcie = t.io_net.pcie.ps();
  c.network = t.network_total().ps();
  c.rc_msg = t.rc_to_mem(cfg.message_size_bytes).ps();
  c.rc_completion = t.rc_to_mem(cfg.completion_size_bytes).ps();
  c.nic_service = cfg.nic_service.ps();
  return c;
}

struct PendingCompletion {
  std::int64_t visible_ps;
  std::uint64_t msg_id;
};

// Per-side credit gate for downstream MWr. With finite credits a doorbell
// waits until the oldest outstanding transaction has paid its PCIe traversal.
class CreditGate {
 public:
  CreditGate(std::optional<std::uint32_t> limit, std::int64_t pcie_ps)
      : limit_(limit), pcie_ps_(pcie_ps) {}

  std::int64_t issue(std::int64_t ready_ps) {
    if (!limit_) return ready_ps;
    std::int64_t at = ready_ps;
    if (returns_.size() >= *limit_) {
      at = std::max(at, returns_.front());
      returns_.pop_front();
    }
    returns_.push_back(at + pcie_ps_);
    return at;
  }

 private:
  std::optional<std::uint32_t> limit_;
  std::int64_t pcie_ps_;
  std::deque<std::int64_t> returns_;
};

struct MessageTimes {
  std::int64_t nic_arrival = 0;
  std::int64_t target_payload_written = 0;
  std::int64_t ack_arrival = 0;
  std::int64_t completion_visible = 0;
  bool signaled = false;
};

class SimBuilder {
 public:
  SimBuilder(const ComponentTimings& t, const PipelineConfig& cfg)
      : cfg_(cfg), costs_(resolve_costs(t, cfg)) {
    result_.mode = cfg.workload;
    result_.config = cfg;
  }

  void log(std::int64_t time_ps, std::uint64_t msg, SimEventKind kind) {
    result_.events.push_back({time_ps, msg, kind});
  }

  // Everything downstream of the doorbell is contention-free and can be laid
  // out as soon as the doorbell is issued.
  MessageTimes hardware_chain(std::uint64_t m, std::int64_t doorbell_ps) {
    const auto& c = costs_;
    MessageTimes mt;
    log(doorbell_ps, m, SimEventKind::doorbell_mwr_issued);
    mt.nic_arrival = doorbell_ps + c.pcie;
    log(mt.nic_arrival, m, SimEventKind::nic_arrival);
    result_.nic_arrival_ps.push_back(mt.nic_arrival);
    std::int64_t depart = mt.nic_arrival + c.nic_service;
    log(depart, m, SimEventKind::net_depart);
    std::int64_t target = depart + c.network;
    log(target, m, SimEventKind::target_arrival);
    mt.target_payload_written = target + c.nic_service + c.pcie + c.rc_msg;
    log(mt.target_payload_written, m, SimEventKind::target_payload_written);
    mt.ack_arrival = target + c.nic_service + c.network;
    log(mt.ack_arrival, m, SimEventKind::ack_arrival);
    mt.signaled = (m % cfg_.unsignaled_interval) == 0;
    if (mt.signaled) {
      std::int64_t issued = mt.ack_arrival + c.nic_service;
      log(issued, m, SimEventKind::completion_mwr_issued);
      mt.completion_visible = issued + c.pcie + c.rc_completion;
      log(mt.completion_visible, m, SimEventKind::completion_visible);
      ++result_.completions_written;
    }
    return mt;
  }

  SimResult finish() {
    std::stable_sort(result_.events.begin(), result_.events.end(),
                     [](const SimEvent& a, const SimEvent& b) {
                       if (a.time_ps != b.time_ps) return a.time_ps < b.time_ps;
                       if (a.msg_id != b.msg_id) return a.msg_id < b.msg_id;
                       return static_cast<int>(a.kind) < static_cast<int>(b.kind);
                     });
    return std::move(result_);
  }

  const PipelineConfig& cfg_;
  CostsPs costs_;
  SimResult result_;
};

}  // namespace

SimResult simulate_injection(const ComponentTimings& t,
                             const PipelineConfig& cfg,
                             std::uint64_t n_messages) {
  cfg.validate();
  if (cfg.workload != WorkloadMode::llp_putbw &&
      cfg.workload != WorkloadMode::mpi_window) {
    throw std::invalid_argument(
        "simulate_injection needs putbw or mpi-window workload mode");
  }
  if (n_messages < 1) {
    throw std::invalid_argument("n_messages must be >= 1");
  }

  const bool window = cfg.workload == WorkloadMode::mpi_window;
  SimBuilder sim(t, cfg);
  const CostsPs& c = sim.costs_;
  const std::int64_t post_cost = c.llp_post + (window ? c.hlp_post : 0);
  const std::int64_t per_msg_misc = window ? c.per_msg_full : c.meas;

  CreditGate credits(cfg.rc_credits, c.pcie);
  std::deque<std::uint64_t> txq;
  std::deque<PendingCompletion> cq;
  std::uint64_t unharvested_signaled = 0;
  std::int64_t cpu = 0;
  std::uint32_t since_poll = 0;

  // One poll: dequeues up to poll_batch entries visible at the read time,
  // freeing every slot up to each signaled message. Each dequeue is one CQ
  // read, so a batch of b costs b progress calls; an empty read costs one.
  auto poll_once = [&]() -> std::uint32_t {
    sim.log(cpu, 0, SimEventKind::poll_begin);
    std::uint32_t got = 0;
    while (got < cfg.poll_batch && !cq.empty() && cq.front().visible_ps <= cpu) {
      std::uint64_t id = cq.front().msg_id;
      cq.pop_front();
      --unharvested_signaled;
      while (!txq.empty() && txq.front() <= id) txq.pop_front();
      sim.log(cpu, id, SimEventKind::poll_success);
      ++got;
      cpu += c.prog;
    }
    if (got == 0) {
      sim.log(cpu, 0, SimEventKind::poll_empty);
      cpu += c.prog;
    }
    return got;
  };

  // Spin-polling can only make progress if some poll will eventually
  // succeed; otherwise the configuration is wedged.
  auto require_pending = [&]() {
    if (unharvested_signaled == 0) {
      throw DeadlockError(
          "transmit queue full with no completion pending; polling cannot "
          "free a slot (is unsignaled_interval > txq_depth?)");
    }
  };

  for (std::uint64_t m = 1; m <= n_messages; ++m) {
    while (txq.size() >= cfg.txq_depth) {
      sim.log(cpu, m, SimEventKind::busy_post);
      cpu += c.busy;
      ++sim.result_.busy_post_count;
      if (poll_once() == 0) {
        require_pending();
        if (c.busy + c.prog == 0) {
          cpu = std::max(cpu, cq.front().visible_ps);
        }
      }
    }

    sim.log(cpu, m, SimEventKind::post_begin);
    cpu += post_cost;
    sim.log(cpu, m, SimEventKind::post_end);
    std::int64_t doorbell = credits.issue(cpu);
    MessageTimes mt = sim.hardware_chain(m, doorbell);
    if (mt.signaled) {
      cq.push_back({mt.completion_visible, m});
      ++unharvested_signaled;
    }
    txq.push_back(m);

    if (window) cpu += c.tx_prog;
    cpu += per_msg_misc;

    ++since_poll;
    if (!window && since_poll >= cfg.poll_interval) {
      since_poll = 0;
      // The benchmark polls *for* a completion: it keeps progressing until
      // one is dequeued, which makes poll_interval = 1 a synchronous post.
      if (unharvested_signaled > 0) {
        while (poll_once() == 0) {
          if (c.prog == 0) cpu = std::max(cpu, cq.front().visible_ps);
        }
      } else {
        poll_once();
      }
    } else if (window && since_poll >= cfg.unsignaled_interval) {
      // The progress engine's CQ dequeue cadence follows the signaling
      // interval; its per-message overhead is already in tx_prog.
      since_poll = 0;
      poll_once();
    }
  }

  return sim.finish();
}

SimResult simulate_pingpong(const ComponentTimings& t,
                            const PipelineConfig& cfg, std::uint64_t n_iters,
                            StackLevel level) {
  cfg.validate();
  if (cfg.workload != WorkloadMode::llp_pingpong) {
    throw std::invalid_argument("simulate_pingpong needs pingpong workload mode");
  }
  if (n_iters < 1) {
    throw std::invalid_argument("n_iters must be >= 1");
  }

  const bool full = level == StackLevel::full_stack;
  SimBuilder sim(t, cfg);
  const CostsPs& c = sim.costs_;
  const std::int64_t post_cost = c.llp_post + (full ? c.hlp_post : 0);
  const std::int64_t rx_cost = c.prog + (full ? c.hlp_rx_prog : 0);

  std::array<std::int64_t, 2> cpu{0, 0};
  std::array<CreditGate, 2> credits{CreditGate(cfg.rc_credits, c.pcie),
                                    CreditGate(cfg.rc_credits, c.pcie)};
  std::array<std::deque<std::uint64_t>, 2> txq;
  std::array<std::deque<PendingCompletion>, 2> cq;

  sim.result_.one_way_latency_ps.reserve(2 * n_iters);

  std::uint64_t m = 0;
  for (std::uint64_t iter = 0; iter < n_iters; ++iter) {
    for (int sender = 0; sender < 2; ++sender) {
      const int receiver = 1 - sender;
      ++m;

      // Send completions are reaped while waiting for the reply; the reap
      // itself stays off the critical path.
      auto& scq = cq[sender];
      while (!scq.empty() && scq.front().visible_ps <= cpu[sender]) {
        std::uint64_t id = scq.front().msg_id;
        scq.pop_front();
        while (!txq[sender].empty() && txq[sender].front() <= id) {
          txq[sender].pop_front();
        }
      }
      while (txq[sender].size() >= cfg.txq_depth) {
        sim.log(cpu[sender], m, SimEventKind::busy_post);
        cpu[sender] += c.busy;
        ++sim.result_.busy_post_count;
        if (scq.empty()) {
          throw DeadlockError(
              "ping-pong transmit queue full with no completion pending");
        }
        cpu[sender] = std::max(cpu[sender], scq.front().visible_ps);
        std::uint64_t id = scq.front().msg_id;
        scq.pop_front();
        sim.log(cpu[sender], id, SimEventKind::poll_begin);
        sim.log(cpu[sender], id, SimEventKind::poll_success);
        cpu[sender] += c.prog;
        while (!txq[sender].empty() && txq[sender].front() <= id) {
          txq[sender].pop_front();
        }
      }

      std::int64_t post_begin = cpu[sender];
      sim.log(post_begin, m, SimEventKind::post_begin);
      cpu[sender] += post_cost;
      sim.log(cpu[sender], m, SimEventKind::post_end);
      std::int64_t doorbell = credits[sender].issue(cpu[sender]);
      MessageTimes mt = sim.hardware_chain(m, doorbell);
      if (mt.signaled) cq[sender].push_back({mt.completion_visible, m});
      txq[sender].push_back(m);

      // The receiver has been spinning on its posted receive; the successful
      // poll starts the moment the payload lands in memory.
      std::int64_t visible = mt.target_payload_written;
      cpu[receiver] = std::max(cpu[receiver], visible);
      sim.log(cpu[receiver], m, SimEventKind::poll_begin);
      sim.log(cpu[receiver], m, SimEventKind::poll_success);
      cpu[receiver] += rx_cost;
      sim.result_.one_way_latency_ps.push_back(cpu[receiver] - post_begin);
    }
  }

  return sim.finish();
}

double SimResult::mean_nic_interarrival_ns(std::size_t discard_first) const {
  if (nic_arrival_ps.size() < discard_first + 2) {
    throw std::invalid_argument(
        "need at least two NIC arrivals after the discarded warmup");
  }
  const std::int64_t first = nic_arrival_ps[discard_first];
  const std::int64_t last = nic_arrival_ps.back();
  const auto n = nic_arrival_ps.size() - discard_first - 1;
  return static_cast<double>(last - first) / static_cast<double>(n) / 1000.0;
}

double SimResult::mean_one_way_latency_ns() const {
  if (one_way_latency_ps.empty()) {
    throw std::invalid_argument("no one-way latencies recorded");
  }
  double sum = 0.0;
  for (auto v : one_way_latency_ps) sum += static_cast<double>(v);
  return sum / static_cast<double>(one_way_latency_ps.size()) / 1000.0;
}

namespace {

std::string format_ns(std::int64_t ps) {
  std::int64_t whole = ps / 1000;
  std::int64_t frac = ps % 1000;
  char buf[48];
  if (frac == 0) {
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(whole));
    return buf;
  }
  std::snprintf(buf, sizeof(buf), "%lld.%03lld", static_cast<long long>(whole),
                static_cast<long long>(frac));
  std::string s(buf);
  while (s.back() == '0') s.pop_back();
  return s;
}

}  // namespace

std::string SimResult::events_csv() const {
  std::ostringstream out;
  out << "time_ns,msg_id,event\n";
  for (const auto& e : events) {
    out << format_ns(e.time_ps) << ',' << e.msg_id << ','
        << to_string(e.kind) << '\n';
  }
  return out.str();
}

std::string SimResult::summary_json() const {
  nlohmann::json j;
  j["mode"] = to_string(mode);
  j["messages"] = nic_arrival_ps.size();
  j["busy_posts"] = busy_post_count;
  j["completions_written"] = completions_written;
  j["events"] = events.size();
  const std::size_t warmup = 2 * static_cast<std::size_t>(config.txq_depth);
  if (nic_arrival_ps.size() >= warmup + 2) {
    j["mean_nic_interarrival_ns"] = mean_nic_interarrival_ns(warmup);
    j["warmup_arrivals_discarded"] = warmup;
  } else if (nic_arrival_ps.size() >= 2) {
    j["mean_nic_interarrival_ns"] = mean_nic_interarrival_ns(0);
    j["warmup_arrivals_discarded"] = 0;
  }
  if (!one_way_latency_ps.empty()) {
    j["mean_one_way_latency_ns"] = mean_one_way_latency_ns();
  }
  return j.dump(2);
}

std::vector<TraceRecord> synth_trace(const SimResult& result,
                                     const ComponentTimings& t,
                                     const PipelineConfig& cfg) {
  const CostsPs c = resolve_costs(t, cfg);
  const bool pingpong = result.mode == WorkloadMode::llp_pingpong;
  const std::uint32_t pio_chunks =
      std::max<std::uint32_t>(1, (cfg.message_size_bytes + 63) / 64);

  // In a ping-pong run, odd message ids were posted by the traced node.
  auto local_send = [&](std::uint64_t m) {
    return !pingpong || (m % 2 == 1);
  };

  std::vector<TraceRecord> records;
  for (const auto& e : result.events) {
    switch (e.kind) {
      case SimEventKind::nic_arrival:
        if (local_send(e.msg_id)) {
          for (std::uint32_t k = 0; k < pio_chunks; ++k) {
            records.push_back({e.time_ps + static_cast<std::int64_t>(k) * 1000,
                               Direction::down, TlpKind::MWr, 64, "pio"});
          }
        }
        break;
      case SimEventKind::completion_mwr_issued:
        if (local_send(e.msg_id)) {
          records.push_back(
              {e.time_ps, Direction::up, TlpKind::MWr, 64, "cqe"});
          records.push_back({e.time_ps + 2 * c.pcie, Direction::down,
                             TlpKind::ACK, 0, "ack"});
        }
        break;
      case SimEventKind::target_arrival:
        // Inbound replies surface as the NIC's payload write toward memory.
        if (pingpong && !local_send(e.msg_id)) {
          records.push_back({e.time_ps + c.nic_service, Direction::up,
                             TlpKind::MWr, cfg.message_size_bytes, "payload"});
          records.push_back({e.time_ps + c.nic_service + 2 * c.pcie,
                             Direction::down, TlpKind::ACK, 0, "ack"});
        }
        break;
      default:
        break;
    }
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const TraceRecord& a, const TraceRecord& b) {
                     return a.timestamp_ps < b.timestamp_ps;
                   });
  return records;
}

}  // namespace msgpath
