#pragma once

#include "ccirc/scenario.hpp"

namespace ccirc {

struct sweep_options {
   int seeds_per_cell = 20;
   std::vector<tick_t> gst_values{0};
   net_mode mode = net_mode::partial_synchrony;
   tick_t delta = 1;
   tick_t epoch = 2;   // underlay T
   tick_t tconf = 4;   // underlay confirmation latency
   uint64_t base_seed = 1;
   bool scripted_variants = true;
   int parallelism = 1;
   int tx_count = 2;
   int cell_cap = 5;  // max leaf count swept exhaustively
};

struct sweep_cell {
   fault_assignment faults;
   bool predicted_safe = false;
   bool predicted_live = false;
   bool safety_held = true;
   bool liveness_held = true;
   tick_t worst_latency = 0;
   int runs = 0;
   bool contradiction = false;
   uint64_t first_bad_seed = 0;
   tick_t first_bad_gst = 0;
};

struct sweep_result {
   int k = 0;
   tick_t liveness_bound = 0;
   std::vector<sweep_cell> cells;
   int contradictions = 0;
   /// Worst measured latency across cells where liveness is guaranteed.
   tick_t guaranteed_worst_latency = 0;

   std::string to_table() const;
};

/// Runs every fault assignment in {0,1}^(2k) through seeded randomized
/// adversaries (plus deterministic scripted stall/fork variants) and
/// aggregates the worst verdict per cell against the algebra's prediction.
sweep_result sweep(const circuit_node& circuit, const sweep_options& opts);

/// Structural pacing/latency of the circuit under the given per-chain
/// template, without running a simulation.
std::pair<tick_t, tick_t> derive_pace_and_bound(const circuit_node& node, tick_t epoch,
                                                tick_t tconf);

}  // namespace ccirc
