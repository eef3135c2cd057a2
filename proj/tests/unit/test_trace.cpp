#include <algorithm>
#include <random>
#include <string>

#include "doctest.h"
#include "msgpath/model.hpp"
#include "msgpath/simulator.hpp"
#include "msgpath/trace.hpp"
#include "test_util.hpp"

using namespace msgpath;

namespace {

constexpr const char* kHeader = "timestamp_ns,direction,tlp_type,payload_bytes,tag\n";

TraceRecord rec(double ns, Direction dir, TlpKind kind, std::uint32_t payload,
                std::string tag = "") {
  return {Duration(ns).ps(), dir, kind, payload, std::move(tag)};
}

}  // namespace

TEST_SUITE("trace") {

TEST_CASE("header-only file parses to an empty list") {
  CHECK(parse_trace(kHeader).empty());
  CHECK_THROWS_AS(parse_trace(""), TraceError);
  CHECK_THROWS_AS(parse_trace("not,the,header\n"), TraceError);
}

TEST_CASE("one valid row round-trips exactly") {
  auto records = parse_trace(std::string(kHeader) + "123.456,down,MWr,64,pio\n");
  REQUIRE(records.size() == 1);
  CHECK(records[0].timestamp_ps == 123456);
  CHECK(records[0].direction == Direction::down);
  CHECK(records[0].kind == TlpKind::MWr);
  CHECK(records[0].payload_bytes == 64);
  CHECK(records[0].tag == "pio");
}

TEST_CASE("malformed rows are reported with their line number") {
  CHECK_THROWS_WITH_AS(parse_trace(std::string(kHeader) + "1,down,MWr,64\n"),
                       doctest::Contains("line 2"), TraceError);
  CHECK_THROWS_WITH_AS(parse_trace(std::string(kHeader) + "1,sideways,MWr,64,\n"),
                       doctest::Contains("direction"), TraceError);
  CHECK_THROWS_WITH_AS(parse_trace(std::string(kHeader) + "1,down,Bogus,64,\n"),
                       doctest::Contains("tlp_type"), TraceError);
  CHECK_THROWS_AS(parse_trace(std::string(kHeader) + "-1,down,MWr,64,\n"),
                  TraceError);
  CHECK_THROWS_AS(parse_trace(std::string(kHeader) + "1.2345,down,MWr,64,\n"),
                  TraceError);  // more than 3 fractional digits
  // DLLPs must not carry a payload
  CHECK_THROWS_AS(parse_trace(std::string(kHeader) + "1,down,ACK,64,\n"),
                  TraceError);
}

TEST_CASE("out-of-order timestamps are sorted stably") {
  auto records = parse_trace(std::string(kHeader) +
                             "200,down,MWr,64,b\n100,down,MWr,64,a\n200,up,ACK,0,c\n");
  REQUIRE(records.size() == 3);
  CHECK(records[0].tag == "a");
  CHECK(records[1].tag == "b");
  CHECK(records[2].tag == "c");
}

TEST_CASE("serialize/parse round trip is lossless") {
  std::mt19937_64 rng(0x7074ce01);
  for (int i = 0; i < 100; ++i) {
    std::vector<TraceRecord> records;
    std::int64_t ts = 0;
    auto n = 1 + rng() % 50;
    for (std::uint64_t k = 0; k < n; ++k) {
      ts += static_cast<std::int64_t>(rng() % 400000);
      TlpKind kind{};
      switch (rng() % 5) {
        case 0: kind = TlpKind::MWr; break;
        case 1: kind = TlpKind::MRd; break;
        case 2: kind = TlpKind::CplD; break;
        case 3: kind = TlpKind::ACK; break;
        case 4: kind = TlpKind::UpdateFC; break;
      }
      bool dllp = kind == TlpKind::ACK || kind == TlpKind::UpdateFC;
      records.push_back({ts, (rng() % 2) ? Direction::up : Direction::down, kind,
                         dllp ? 0u : static_cast<std::uint32_t>(8 + rng() % 120),
                         (rng() % 2) ? "tag" + std::to_string(rng() % 10) : ""});
    }
    CHECK(parse_trace(records_to_csv(records)) == records);
  }
}

TEST_CASE("interval stats: uniform and hand-computed spacings") {
  std::vector<TraceRecord> uniform = {
      rec(0, Direction::down, TlpKind::MWr, 64),
      rec(100, Direction::down, TlpKind::MWr, 64),
      rec(200, Direction::down, TlpKind::MWr, 64),
  };
  auto s = injection_interval_stats(uniform);
  CHECK(s.count == 2);
  CHECK(s.mean_ns == doctest::Approx(100.0));
  CHECK(s.median_ns == doctest::Approx(100.0));

  std::vector<TraceRecord> skewed = {
      rec(0, Direction::down, TlpKind::MWr, 64),
      rec(100, Direction::down, TlpKind::MWr, 64),
      rec(300, Direction::down, TlpKind::MWr, 64),
  };
  s = injection_interval_stats(skewed);
  CHECK(s.mean_ns == doctest::Approx(150.0));
  CHECK(s.median_ns == doctest::Approx(150.0));
  CHECK(s.min_ns == doctest::Approx(100.0));
  CHECK(s.max_ns == doctest::Approx(200.0));
  CHECK(s.p25_ns == doctest::Approx(125.0));
  CHECK(s.p75_ns == doctest::Approx(175.0));
  CHECK(s.min_ns <= s.p25_ns);
  CHECK(s.p25_ns <= s.median_ns);
  CHECK(s.median_ns <= s.p75_ns);
  CHECK(s.p75_ns <= s.max_ns);

  CHECK_THROWS_AS(
      injection_interval_stats({rec(0, Direction::down, TlpKind::MWr, 64)}),
      EstimationError);
}

TEST_CASE("interval stats ignore non-matching records") {
  std::vector<TraceRecord> records = {
      rec(0, Direction::down, TlpKind::MWr, 64),
      rec(10, Direction::up, TlpKind::MWr, 64),
      rec(50, Direction::down, TlpKind::MRd, 64),
      rec(60, Direction::down, TlpKind::MWr, 8),
      rec(70, Direction::up, TlpKind::ACK, 0),
      rec(100, Direction::down, TlpKind::MWr, 64),
  };
  auto s = injection_interval_stats(records);
  CHECK(s.count == 1);
  CHECK(s.mean_ns == doctest::Approx(100.0));
}

TEST_CASE("interval stats are invariant under interleaved noise") {
  std::mt19937_64 rng(0xf117e201);
  for (int i = 0; i < 100; ++i) {
    std::vector<TraceRecord> matching;
    std::int64_t ts = 0;
    auto n = 3 + rng() % 30;
    for (std::uint64_t k = 0; k < n; ++k) {
      ts += 20000 + static_cast<std::int64_t>(rng() % 400000);  // > chunk gap
      matching.push_back({ts, Direction::down, TlpKind::MWr, 64, ""});
    }
    auto base = injection_interval_stats(matching);

    std::vector<TraceRecord> noisy = matching;
    for (int j = 0; j < 20; ++j) {
      std::int64_t t = static_cast<std::int64_t>(rng() % (ts + 1));
      switch (rng() % 4) {
        case 0: noisy.push_back({t, Direction::up, TlpKind::MWr, 64, ""}); break;
        case 1: noisy.push_back({t, Direction::down, TlpKind::MRd, 64, ""}); break;
        case 2: noisy.push_back({t, Direction::down, TlpKind::MWr, 8, ""}); break;
        case 3: noisy.push_back({t, Direction::up, TlpKind::ACK, 0, ""}); break;
      }
    }
    std::stable_sort(noisy.begin(), noisy.end(),
                     [](const TraceRecord& a, const TraceRecord& b) {
                       return a.timestamp_ps < b.timestamp_ps;
                     });
    auto with_noise = injection_interval_stats(noisy);
    CHECK(with_noise.count == base.count);
    CHECK(with_noise.mean_ns == base.mean_ns);
    CHECK(with_noise.median_ns == base.median_ns);
    CHECK(with_noise.min_ns == base.min_ns);
    CHECK(with_noise.max_ns == base.max_ns);
  }
}

TEST_CASE("chunk grouping collapses one post's PIO burst") {
  std::vector<TraceRecord> records = {
      rec(0, Direction::down, TlpKind::MWr, 64),
      rec(1, Direction::down, TlpKind::MWr, 64),    // same burst
      rec(2, Direction::down, TlpKind::MWr, 64),    // same burst
      rec(300, Direction::down, TlpKind::MWr, 64),
      rec(301, Direction::down, TlpKind::MWr, 64),  // same burst
      rec(600, Direction::down, TlpKind::MWr, 64),
  };
  auto s = injection_interval_stats(records);
  CHECK(s.count == 2);
  CHECK(s.mean_ns == doctest::Approx(300.0));
}

TEST_CASE("pcie estimate: half the MWr-to-ACK round trip") {
  std::vector<TraceRecord> records = {
      rec(0, Direction::up, TlpKind::MWr, 64, "cqe"),
      rec(274.98, Direction::down, TlpKind::ACK, 0),
  };
  CHECK(estimate_pcie(records).ns() == doctest::Approx(137.49));

  std::vector<TraceRecord> coincident = {
      rec(10, Direction::up, TlpKind::MWr, 64),
      rec(10, Direction::down, TlpKind::ACK, 0),
  };
  CHECK(estimate_pcie(coincident).ns() == 0.0);

  CHECK_THROWS_AS(estimate_pcie({rec(0, Direction::up, TlpKind::MWr, 64)}),
                  EstimationError);
  std::vector<TraceRecord> ambiguous = {
      rec(0, Direction::up, TlpKind::MWr, 64),
      rec(1, Direction::up, TlpKind::MWr, 64),
      rec(2, Direction::down, TlpKind::ACK, 0),
  };
  CHECK_THROWS_WITH_AS(estimate_pcie(ambiguous), doctest::Contains("ambiguous"),
                       EstimationError);
}

TEST_CASE("network estimate: half the ping-to-completion gap") {
  std::vector<TraceRecord> records = {
      rec(0, Direction::down, TlpKind::MWr, 64, "ping"),
      rec(765.62, Direction::up, TlpKind::MWr, 64, "cqe"),
  };
  CHECK(estimate_network(records).ns() == doctest::Approx(382.81));

  std::vector<TraceRecord> coincident = {
      rec(5, Direction::down, TlpKind::MWr, 64),
      rec(5, Direction::up, TlpKind::MWr, 64),
  };
  CHECK(estimate_network(coincident).ns() == 0.0);
  CHECK_THROWS_AS(estimate_network({rec(0, Direction::down, TlpKind::MWr, 64)}),
                  EstimationError);
}

TEST_CASE("rc_to_mem estimate subtracts the known components") {
  // pong-to-ping delta of 752.99 with the reference knowns leaves 240.96
  std::vector<TraceRecord> records = {
      rec(0, Direction::up, TlpKind::MWr, 8, "payload"),
      rec(752.99, Direction::down, TlpKind::MWr, 64, "ping"),
  };
  RcToMemKnowns knowns{Duration(137.49), Duration(175.42), Duration(61.63)};
  CHECK(estimate_rc_to_mem(records, knowns, 8).ns() == doctest::Approx(240.96));

  // delta exactly equal to the knowns leaves zero
  std::vector<TraceRecord> tight = {
      rec(0, Direction::up, TlpKind::MWr, 8),
      rec(512.03, Direction::down, TlpKind::MWr, 64),
  };
  CHECK(estimate_rc_to_mem(tight, knowns, 8).ns() == doctest::Approx(0.0));

  std::vector<TraceRecord> inconsistent = {
      rec(0, Direction::up, TlpKind::MWr, 8),
      rec(100, Direction::down, TlpKind::MWr, 64),
  };
  CHECK_THROWS_AS(estimate_rc_to_mem(inconsistent, knowns, 8), EstimationError);
  CHECK_THROWS_AS(estimate_rc_to_mem({}, knowns, 8), EstimationError);
}

TEST_CASE("switch estimate is a latency difference") {
  CHECK(estimate_switch(Duration(1243.8), Duration(1135.8)).ns() ==
        doctest::Approx(108.0));
  CHECK(estimate_switch(Duration(50.0), Duration(50.0)).ns() == 0.0);
  CHECK_THROWS_AS(estimate_switch(Duration(40.0), Duration(50.0)),
                  EstimationError);
  CHECK_THROWS_AS(estimate_switch(Duration(0.0), Duration(50.0)),
                  std::invalid_argument);
}

TEST_CASE("simulator round trip: injection trace reproduces the overhead") {
  auto t = reference_timings();
  PipelineConfig cfg;
  cfg.workload = WorkloadMode::llp_putbw;
  cfg.poll_interval = 16;
  cfg.txq_depth = 64;
  auto run = simulate_injection(t, cfg, 2000);
  auto records = synth_trace(run, t, cfg);

  // parse/serialize round trip against the simulator output
  CHECK(parse_trace(records_to_csv(records)) == records);

  // stats over the steady window, past the queue-fill transient
  std::int64_t cutoff = run.nic_arrival_ps[2 * cfg.txq_depth];
  std::vector<TraceRecord> steady;
  for (const auto& r : records) {
    if (r.timestamp_ps >= cutoff) steady.push_back(r);
  }
  auto stats = injection_interval_stats(steady);
  double model = inj_overhead(t, StackLevel::llp_only).ns();
  CHECK(std::abs(stats.mean_ns - model) / model <= 0.01);

  // While the queue is filling, completion writes come faster than their
  // ACKs return, so the greedy pairing flags the full trace as ambiguous;
  // the steady window pairs cleanly and recovers the traversal.
  CHECK_THROWS_AS(estimate_pcie(records), EstimationError);
  CHECK(std::abs(estimate_pcie(steady).ns() - t.io_net.pcie.ns()) <= 0.01);
}

TEST_CASE("simulator round trip: ping-pong trace recovers every component") {
  std::mt19937_64 rng(0xe5717a7e);
  for (int i = 0; i < 10; ++i) {
    auto t = testutil::random_timings(rng);
    PipelineConfig cfg;
    cfg.workload = WorkloadMode::llp_pingpong;
    auto run = simulate_pingpong(t, cfg, 30);
    auto records = synth_trace(run, t, cfg);

    CHECK(std::abs(estimate_pcie(records).ns() - t.io_net.pcie.ns()) <= 0.01);
    CHECK(std::abs(estimate_network(records).ns() - t.network_total().ns()) <= 0.01);
    RcToMemKnowns knowns{t.io_net.pcie, t.llp_post_total(), t.llp_prog};
    CHECK(std::abs(estimate_rc_to_mem(records, knowns, 8).ns() -
                   t.rc_to_mem(8).ns()) <= 0.01);
  }
}

TEST_CASE("switch recovery from two simulated latency runs") {
  auto t = reference_timings();
  PipelineConfig cfg;
  cfg.workload = WorkloadMode::llp_pingpong;
  auto with_switch = simulate_pingpong(t, cfg, 20);
  auto no_switch = t;
  no_switch.io_net.has_switch = false;
  auto direct = simulate_pingpong(no_switch, cfg, 20);
  auto est = estimate_switch(Duration(with_switch.mean_one_way_latency_ns()),
                             Duration(direct.mean_one_way_latency_ns()));
  CHECK(std::abs(est.ns() - t.io_net.switch_latency.ns()) <= 0.01);
}

}  // TEST_SUITE
