#include "msgpath/model.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace msgpath {

std::string to_string(StackLevel level) {
  return level == StackLevel::llp_only ? "llp" : "full";
}

std::string to_string(Metric metric) {
  return metric == Metric::injection ? "injection" : "latency";
}

std::string to_string(Granularity granularity) {
  switch (granularity) {
    case Granularity::fine:
      return "fine";
    case Granularity::category:
      return "category";
    case Granularity::on_node:
      return "on-node";
  }
  throw std::logic_error("unreachable granularity");
}

StackLevel stack_level_from_string(const std::string& name) {
  if (name == "llp" || name == "llp_only") return StackLevel::llp_only;
  if (name == "full" || name == "full_stack") return StackLevel::full_stack;
  throw std::invalid_argument("unknown stack level '" + name + "'");
}

Metric metric_from_string(const std::string& name) {
  if (name == "injection") return Metric::injection;
  if (name == "latency") return Metric::latency;
  throw std::invalid_argument("unknown metric '" + name + "'");
}

Granularity granularity_from_string(const std::string& name) {
  if (name == "fine") return Granularity::fine;
  if (name == "category") return Granularity::category;
  if (name == "on-node" || name == "on_node") return Granularity::on_node;
  throw std::invalid_argument("unknown granularity '" + name + "'");
}

Duration gen_completion(const ComponentTimings& t,
                        std::uint32_t completion_size_bytes) {
  return 2.0 * (t.io_net.pcie + t.network_total()) +
         t.rc_to_mem(completion_size_bytes);
}

std::uint32_t min_poll_interval(const ComponentTimings& t,
                                std::uint32_t completion_size_bytes) {
  double post = t.llp_post_total().ns();
  if (post <= 0.0) {
    throw std::invalid_argument("min_poll_interval requires llp_post_total > 0");
  }
  double ratio = gen_completion(t, completion_size_bytes).ns() / post;
  auto p = static_cast<std::uint32_t>(std::ceil(ratio));
  return p < 1 ? 1u : p;
}

Duration cpu_time(const ComponentTimings& t, StackLevel level) {
  if (level == StackLevel::llp_only) {
    return t.llp_post_total() + t.llp_prog + t.misc_inj_total();
  }
  // Post + Post_prog + Misc. All of the send-progress overhead is attributed
  // to the HLP; the LLP's share is below reporting precision.
  return t.hlp_post_total() + t.llp_post_total() + t.hlp.tx_prog +
         t.misc.per_msg_full;
}

Duration inj_overhead(const ComponentTimings& t, StackLevel level) {
  return cpu_time(t, level);
}

Duration msg_inj_overhead(const ComponentTimings& t, StackLevel level) {
  return cpu_time(t, level) + t.io_net.pcie;
}

Duration latency(const ComponentTimings& t, StackLevel level,
                 std::uint32_t msg_size_bytes) {
  Duration llp = t.llp_post_total() + 2.0 * t.io_net.pcie + t.network_total() +
                 t.rc_to_mem(msg_size_bytes) + t.llp_prog;
  if (level == StackLevel::llp_only) {
    return llp;
  }
  return llp + t.hlp_post_total() + t.hlp_rx_prog_total();
}

double relative_error(Duration modeled, Duration observed) {
  if (observed.ns() <= 0.0) {
    throw std::invalid_argument("relative_error requires observed > 0");
  }
  return std::abs(modeled.ns() - observed.ns()) / observed.ns();
}

namespace {

enum class Category { cpu, io, network };

struct FineTerm {
  std::string label;
  Duration time;
  Category category;
};

void push_llp_post(std::vector<FineTerm>& terms, const ComponentTimings& t,
                   bool split) {
  if (!split) {
    terms.push_back({"LLP_post", t.llp_post_total(), Category::cpu});
    return;
  }
  terms.push_back({"MD_setup", t.llp_post.md_setup, Category::cpu});
  terms.push_back({"Barrier_MD", t.llp_post.barrier_md, Category::cpu});
  terms.push_back({"Barrier_DBC", t.llp_post.barrier_dbc, Category::cpu});
  terms.push_back({"PIO_copy", t.llp_post.pio_copy, Category::cpu});
  terms.push_back({"LLP_post_misc", t.llp_post.misc, Category::cpu});
}

std::vector<FineTerm> fine_terms(const ComponentTimings& t, Metric metric,
                                 StackLevel level, std::uint32_t msg_size_bytes,
                                 bool split_llp_post) {
  std::vector<FineTerm> terms;
  if (metric == Metric::injection) {
    if (level == StackLevel::llp_only) {
      push_llp_post(terms, t, split_llp_post);
      terms.push_back({"LLP_prog", t.llp_prog, Category::cpu});
      terms.push_back({"Misc", t.misc_inj_total(), Category::cpu});
    } else {
      terms.push_back({"HLP_post", t.hlp_post_total(), Category::cpu});
      push_llp_post(terms, t, split_llp_post);
      terms.push_back({"Post_prog", t.hlp.tx_prog, Category::cpu});
      terms.push_back({"Misc", t.misc.per_msg_full, Category::cpu});
    }
    return terms;
  }
  if (level == StackLevel::full_stack) {
    terms.push_back({"HLP_post", t.hlp_post_total(), Category::cpu});
  }
  push_llp_post(terms, t, split_llp_post);
  terms.push_back({"PCIe", 2.0 * t.io_net.pcie, Category::io});
  terms.push_back({"Network", t.network_total(), Category::network});
  terms.push_back({"RCtoMem", t.rc_to_mem(msg_size_bytes), Category::io});
  terms.push_back({"LLP_prog", t.llp_prog, Category::cpu});
  if (level == StackLevel::full_stack) {
    terms.push_back({"HLP_rx_prog", t.hlp_rx_prog_total(), Category::cpu});
  }
  return terms;
}

void finish_percents(BreakdownReport& report) {
  double total = report.total.ns();
  for (auto& e : report.entries) {
    e.percent = total > 0.0 ? 100.0 * e.time.ns() / total : 0.0;
  }
}

}  // namespace

BreakdownReport breakdown(const ComponentTimings& t, Metric metric,
                          StackLevel level, Granularity granularity,
                          std::uint32_t msg_size_bytes, bool split_llp_post) {
  if (metric == Metric::injection && granularity == Granularity::on_node) {
    throw std::invalid_argument(
        "on-node breakdown is defined for latency only");
  }

  BreakdownReport report;
  report.metric = metric;
  report.level = level;
  report.granularity = granularity;

  auto terms = fine_terms(t, metric, level, msg_size_bytes, split_llp_post);

  switch (granularity) {
    case Granularity::fine: {
      Duration total;
      for (const auto& term : terms) {
        report.entries.push_back({term.label, term.time, 0.0});
        total += term.time;
      }
      report.total = total;
      break;
    }
    case Granularity::category: {
      Duration cpu, io, network;
      for (const auto& term : terms) {
        switch (term.category) {
          case Category::cpu: cpu += term.time; break;
          case Category::io: io += term.time; break;
          case Category::network: network += term.time; break;
        }
      }
      report.entries.push_back({"CPU", cpu, 0.0});
      if (metric == Metric::latency) {
        report.entries.push_back({"I/O", io, 0.0});
        report.entries.push_back({"Network", network, 0.0});
      }
      report.total = cpu + io + network;
      break;
    }
    case Granularity::on_node: {
      // The network hop is excluded; PCIe splits one traversal per node.
      Duration initiator = t.hlp_post_total() + t.llp_post_total() + t.io_net.pcie;
      Duration target = t.io_net.pcie + t.rc_to_mem(msg_size_bytes) +
                        t.llp_prog + t.hlp_rx_prog_total();
      if (level == StackLevel::llp_only) {
        initiator = t.llp_post_total() + t.io_net.pcie;
        target = t.io_net.pcie + t.rc_to_mem(msg_size_bytes) + t.llp_prog;
      }
      report.entries.push_back({"initiator", initiator, 0.0});
      report.entries.push_back({"target", target, 0.0});
      report.total = initiator + target;
      break;
    }
  }
  finish_percents(report);
  return report;
}

std::string BreakdownReport::to_csv() const {
  std::ostringstream out;
  out << "label,ns,percent\n";
  char buf[96];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof(buf), "%s,%.3f,%.2f\n", e.label.c_str(),
                  e.time.ns(), e.percent);
    out << buf;
  }
  return out.str();
}

std::string BreakdownReport::to_json() const {
  nlohmann::json j;
  j["metric"] = msgpath::to_string(metric);
  j["level"] = msgpath::to_string(level);
  j["granularity"] = msgpath::to_string(granularity);
  j["total_ns"] = total.ns();
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries) {
    j["entries"].push_back(
        {{"label", e.label}, {"ns", e.time.ns()}, {"percent", e.percent}});
  }
  return j.dump(2);
}

}  // namespace msgpath
