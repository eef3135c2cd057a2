#include "msgpath/timings.hpp"

#include <stdexcept>

namespace msgpath {

ComponentTimings reference_timings() {
  ComponentTimings t;
  t.llp_post.md_setup = Duration(27.78);
  t.llp_post.barrier_md = Duration(17.33);
  t.llp_post.barrier_dbc = Duration(21.07);
  t.llp_post.pio_copy = Duration(94.25);
  t.llp_post.misc = Duration(14.99);
  t.llp_prog = Duration(61.63);
  t.misc.busy_post = Duration(8.99);
  t.misc.measurement_update = Duration(49.69);
  t.misc.per_msg_full = Duration(3.17);
  t.hlp.isend_mpi = Duration(24.37);
  t.hlp.isend_proto = Duration(2.19);
  t.hlp.tx_prog = Duration(59.82);
  t.hlp.rx_cb_mpi = Duration(47.99);
  t.hlp.rx_cb_proto = Duration(139.78);
  t.hlp.rx_post_progress_mpi = Duration(36.89);
  t.io_net.pcie = Duration(137.49);
  t.io_net.wire = Duration(274.81);
  t.io_net.switch_latency = Duration(108.0);
  t.io_net.has_switch = true;
  t.io_net.rc_to_mem.set(8, Duration(240.96));
  return t;
}

std::string to_string(WorkloadMode mode) {
  switch (mode) {
    case WorkloadMode::llp_putbw:
      return "putbw";
    case WorkloadMode::llp_pingpong:
      return "pingpong";
    case WorkloadMode::mpi_window:
      return "mpi-window";
  }
  throw std::logic_error("unreachable workload mode");
}

WorkloadMode workload_mode_from_string(const std::string& name) {
  if (name == "putbw" || name == "llp_putbw") return WorkloadMode::llp_putbw;
  if (name == "pingpong" || name == "llp_pingpong") {
    return WorkloadMode::llp_pingpong;
  }
  if (name == "mpi-window" || name == "mpi_window") {
    return WorkloadMode::mpi_window;
  }
  throw std::invalid_argument("unknown workload mode '" + name + "'");
}

}  // namespace msgpath
