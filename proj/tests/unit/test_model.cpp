#include <cmath>
#include <random>

#include "doctest.h"
#include "msgpath/model.hpp"
#include "msgpath/timings.hpp"
#include "test_util.hpp"

using namespace msgpath;

namespace {

bool near(double a, double b, double abs_tol) { return std::abs(a - b) <= abs_tol; }

// Handy single-component sets for degenerate cases.
ComponentTimings io_only(double pcie, double wire, double sw, bool has_switch,
                         double rc64) {
  ComponentTimings t = testutil::zero_timings();
  t.io_net.pcie = Duration(pcie);
  t.io_net.wire = Duration(wire);
  t.io_net.switch_latency = Duration(sw);
  t.io_net.has_switch = has_switch;
  t.io_net.rc_to_mem = RcToMemTable();
  t.io_net.rc_to_mem.set(64, Duration(rc64));
  return t;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("gen_completion: two I/O + network traversals plus the CQE write") {
  auto t = reference_timings();
  // 2 * (137.49 + 382.81) + 240.96 (the 64-byte lookup falls back to the
  // size-8 entry)
  CHECK(gen_completion(t).ns() == doctest::Approx(1281.56).epsilon(1e-12));

  CHECK(gen_completion(testutil::zero_timings()).ns() == 0.0);
  CHECK(gen_completion(io_only(1, 1, 0, false, 1)).ns() == doctest::Approx(5.0));
}

TEST_CASE("min_poll_interval") {
  auto t = reference_timings();
  CHECK(min_poll_interval(t) == 8);  // ceil(1281.56 / 175.42) = ceil(7.306)

  // gen_completion == llp_post_total -> exactly 1
  ComponentTimings eq = io_only(25, 25, 0, false, 0);
  eq.llp_post.md_setup = Duration(100.0);
  eq.io_net.rc_to_mem = RcToMemTable();
  eq.io_net.rc_to_mem.set(64, Duration(0.0));
  CHECK(gen_completion(eq).ns() == 100.0);
  CHECK(min_poll_interval(eq) == 1);

  // degenerate zero gen_completion clamps to 1
  ComponentTimings zero_io = testutil::zero_timings();
  zero_io.llp_post.md_setup = Duration(10.0);
  CHECK(min_poll_interval(zero_io) == 1);

  CHECK_THROWS_AS(min_poll_interval(testutil::zero_timings()),
                  std::invalid_argument);
}

TEST_CASE("cpu_time / inj_overhead at both levels") {
  auto t = reference_timings();
  // 175.42 + 61.63 + 58.68
  CHECK(cpu_time(t, StackLevel::llp_only).ns() == doctest::Approx(295.73).epsilon(1e-12));
  // (26.56 + 175.42) + 59.82 + 3.17
  CHECK(cpu_time(t, StackLevel::full_stack).ns() == doctest::Approx(264.97).epsilon(1e-12));
  CHECK(inj_overhead(t, StackLevel::llp_only) == cpu_time(t, StackLevel::llp_only));
  CHECK(inj_overhead(t, StackLevel::full_stack) == cpu_time(t, StackLevel::full_stack));
  CHECK(cpu_time(testutil::zero_timings(), StackLevel::llp_only).ns() == 0.0);
  CHECK(cpu_time(testutil::zero_timings(), StackLevel::full_stack).ns() == 0.0);
}

TEST_CASE("msg_inj_overhead adds one PCIe traversal") {
  auto t = reference_timings();
  CHECK(msg_inj_overhead(t, StackLevel::llp_only).ns() ==
        doctest::Approx(433.22).epsilon(1e-12));  // 295.73 + 137.49

  ComponentTimings no_pcie = t;
  no_pcie.io_net.pcie = Duration(0.0);
  CHECK(msg_inj_overhead(no_pcie, StackLevel::llp_only) ==
        inj_overhead(no_pcie, StackLevel::llp_only));
  CHECK(msg_inj_overhead(testutil::zero_timings(), StackLevel::llp_only).ns() == 0.0);
}

TEST_CASE("latency at both levels") {
  auto t = reference_timings();
  CHECK(latency(t, StackLevel::llp_only, 8).ns() ==
        doctest::Approx(1135.80).epsilon(1e-12));
  CHECK(latency(t, StackLevel::full_stack, 8).ns() ==
        doctest::Approx(1387.02).epsilon(1e-12));
  CHECK(latency(testutil::zero_timings(), StackLevel::full_stack, 8).ns() == 0.0);
}

TEST_CASE("relative_error") {
  CHECK(relative_error(Duration(295.73), Duration(282.33)) ==
        doctest::Approx(0.047462).epsilon(1e-4));
  CHECK(relative_error(Duration(295.73), Duration(282.33)) < 0.05);
  CHECK(relative_error(Duration(1135.80), Duration(1190.25)) ==
        doctest::Approx(0.045747).epsilon(1e-4));
  CHECK(relative_error(Duration(1135.80), Duration(1190.25)) < 0.05);
  CHECK(relative_error(Duration(42.0), Duration(42.0)) == 0.0);
  CHECK_THROWS_AS(relative_error(Duration(1.0), Duration(0.0)),
                  std::invalid_argument);
}

TEST_CASE("category breakdown matches the reference shares") {
  auto t = reference_timings();
  auto report = breakdown(t, Metric::latency, StackLevel::full_stack,
                          Granularity::category, 8);
  REQUIRE(report.entries.size() == 3);
  double network_pct = 0.0, cpu_io_pct = 0.0;
  for (const auto& e : report.entries) {
    if (e.label == "Network") {
      network_pct = e.percent;
    } else {
      cpu_io_pct += e.percent;
    }
  }
  CHECK(near(network_pct, 27.6, 0.1));
  CHECK(near(cpu_io_pct, 72.4, 0.1));
  CHECK(report.total.ns() == doctest::Approx(1387.02).epsilon(1e-12));
}

TEST_CASE("on-node breakdown is target-heavy") {
  auto t = reference_timings();
  auto report = breakdown(t, Metric::latency, StackLevel::full_stack,
                          Granularity::on_node, 8);
  REQUIRE(report.entries.size() == 2);
  CHECK(report.entries[0].label == "initiator");
  CHECK(report.entries[1].label == "target");
  CHECK(report.entries[0].time.ns() == doctest::Approx(339.47).epsilon(1e-12));
  CHECK(report.entries[1].time.ns() == doctest::Approx(664.74).epsilon(1e-12));
  CHECK(report.entries[1].time.ns() > report.entries[0].time.ns());
  // network excluded: on-node total is latency minus the network hop
  CHECK(report.total.ns() ==
        doctest::Approx(1387.02 - 382.81).epsilon(1e-12));
}

TEST_CASE("on-node injection breakdown is rejected") {
  auto t = reference_timings();
  CHECK_THROWS_AS(breakdown(t, Metric::injection, StackLevel::full_stack,
                            Granularity::on_node, 8),
                  std::invalid_argument);
}

TEST_CASE("single nonzero component owns 100 percent") {
  ComponentTimings t = testutil::zero_timings();
  t.io_net.wire = Duration(123.0);
  auto report =
      breakdown(t, Metric::latency, StackLevel::llp_only, Granularity::fine, 8);
  for (const auto& e : report.entries) {
    if (e.label == "Network") {
      CHECK(e.percent == doctest::Approx(100.0));
    } else {
      CHECK(e.time.ns() == 0.0);
    }
  }
}

TEST_CASE("fine entries follow the formula order and split on request") {
  auto t = reference_timings();
  auto fine = breakdown(t, Metric::latency, StackLevel::full_stack,
                        Granularity::fine, 8);
  REQUIRE(fine.entries.size() == 7);
  CHECK(fine.entries[0].label == "HLP_post");
  CHECK(fine.entries[1].label == "LLP_post");
  CHECK(fine.entries[2].label == "PCIe");
  CHECK(fine.entries[3].label == "Network");
  CHECK(fine.entries[4].label == "RCtoMem");
  CHECK(fine.entries[5].label == "LLP_prog");
  CHECK(fine.entries[6].label == "HLP_rx_prog");

  auto split = breakdown(t, Metric::latency, StackLevel::full_stack,
                         Granularity::fine, 8, true);
  CHECK(split.entries.size() == 11);  // LLP_post expands to five steps
  CHECK(split.total.ns() == doctest::Approx(fine.total.ns()).epsilon(1e-12));
}

TEST_CASE("fine breakdown total equals the model value (additivity)") {
  std::mt19937_64 rng(0xadd17171);
  for (int i = 0; i < 100; ++i) {
    auto t = testutil::random_timings(rng);
    for (auto metric : {Metric::injection, Metric::latency}) {
      for (auto level : {StackLevel::llp_only, StackLevel::full_stack}) {
        auto report = breakdown(t, metric, level, Granularity::fine, 8);
        double want = metric == Metric::injection
                          ? inj_overhead(t, level).ns()
                          : latency(t, level, 8).ns();
        CHECK(near(report.total.ns(), want, 1e-9 * std::max(1.0, want)));
        double pct = 0.0;
        for (const auto& e : report.entries) pct += e.percent;
        CHECK(near(pct, 100.0, 1e-9));
      }
    }
  }
}

TEST_CASE("category entries are exact sums of their fine entries") {
  std::mt19937_64 rng(0xca7e6041);
  for (int i = 0; i < 100; ++i) {
    auto t = testutil::random_timings(rng);
    auto fine = breakdown(t, Metric::latency, StackLevel::full_stack,
                          Granularity::fine, 8);
    auto category = breakdown(t, Metric::latency, StackLevel::full_stack,
                              Granularity::category, 8);
    double cpu = 0.0, io = 0.0, net = 0.0;
    for (const auto& e : fine.entries) {
      if (e.label == "PCIe" || e.label == "RCtoMem") {
        io += e.time.ns();
      } else if (e.label == "Network") {
        net += e.time.ns();
      } else {
        cpu += e.time.ns();
      }
    }
    REQUIRE(category.entries.size() == 3);
    CHECK(near(category.entries[0].time.ns(), cpu, 1e-9));
    CHECK(near(category.entries[1].time.ns(), io, 1e-9));
    CHECK(near(category.entries[2].time.ns(), net, 1e-9));
  }
}

TEST_CASE("monotonicity: raising any single field never lowers an output") {
  std::mt19937_64 rng(0x60600042);
  for (int i = 0; i < 200; ++i) {
    auto t = testutil::random_timings(rng);
    auto bumped = t;
    Duration delta(testutil::draw(rng, 0.01, 80.0));
    switch (rng() % 8) {
      case 0: bumped.llp_post.md_setup += delta; break;
      case 1: bumped.llp_post.pio_copy += delta; break;
      case 2: bumped.llp_prog += delta; break;
      case 3: bumped.misc.measurement_update += delta; break;
      case 4: bumped.hlp.rx_cb_proto += delta; break;
      case 5: bumped.io_net.pcie += delta; break;
      case 6: bumped.io_net.wire += delta; break;
      case 7: bumped.io_net.rc_to_mem.set(8, t.rc_to_mem(8) + delta); break;
    }
    for (auto level : {StackLevel::llp_only, StackLevel::full_stack}) {
      CHECK(inj_overhead(bumped, level).ns() >= inj_overhead(t, level).ns());
      CHECK(msg_inj_overhead(bumped, level).ns() >= msg_inj_overhead(t, level).ns());
      CHECK(latency(bumped, level, 8).ns() >= latency(t, level, 8).ns());
    }
    CHECK(gen_completion(bumped).ns() >= gen_completion(t).ns());
  }
}

TEST_CASE("injection overhead ignores I/O and network fields") {
  std::mt19937_64 rng(0x10af00d5);
  for (int i = 0; i < 100; ++i) {
    auto t = testutil::random_timings(rng);
    auto perturbed = t;
    perturbed.io_net.pcie = Duration(testutil::draw(rng, 0, 500));
    perturbed.io_net.wire = Duration(testutil::draw(rng, 0, 500));
    perturbed.io_net.switch_latency = Duration(testutil::draw(rng, 0, 500));
    perturbed.io_net.has_switch = !t.io_net.has_switch;
    perturbed.io_net.rc_to_mem = RcToMemTable();
    perturbed.io_net.rc_to_mem.set(8, Duration(testutil::draw(rng, 0, 500)));
    for (auto level : {StackLevel::llp_only, StackLevel::full_stack}) {
      CHECK(inj_overhead(perturbed, level) == inj_overhead(t, level));
    }
  }
}

TEST_CASE("with the HLP layer degenerate, full-stack equals llp-only") {
  // Zero HLP post/receive costs, move the send-progress cost back to the
  // CQ poll, and use the injection-benchmark misc at the full level.
  std::mt19937_64 rng(0x1e7e1042);
  for (int i = 0; i < 100; ++i) {
    auto t = testutil::random_timings(rng);
    t.hlp.isend_mpi = Duration(0.0);
    t.hlp.isend_proto = Duration(0.0);
    t.hlp.rx_cb_mpi = Duration(0.0);
    t.hlp.rx_cb_proto = Duration(0.0);
    t.hlp.rx_post_progress_mpi = Duration(0.0);
    t.hlp.tx_prog = t.llp_prog;
    t.misc.per_msg_full = t.misc_inj_total();
    CHECK(inj_overhead(t, StackLevel::full_stack).ns() ==
          doctest::Approx(inj_overhead(t, StackLevel::llp_only).ns()).epsilon(1e-12));
    CHECK(latency(t, StackLevel::full_stack, 8).ns() ==
          doctest::Approx(latency(t, StackLevel::llp_only, 8).ns()).epsilon(1e-12));
  }
}

TEST_CASE("breakdown serialization") {
  auto t = reference_timings();
  auto report = breakdown(t, Metric::latency, StackLevel::full_stack,
                          Granularity::category, 8);
  auto csv = report.to_csv();
  CHECK(csv.find("label,ns,percent") == 0);
  CHECK(csv.find("Network,382.810,27.60") != std::string::npos);
  auto json = report.to_json();
  CHECK(json.find("\"granularity\": \"category\"") != std::string::npos);
  CHECK(json.find("\"total_ns\": 1387.02") != std::string::npos);
}

}  // TEST_SUITE
