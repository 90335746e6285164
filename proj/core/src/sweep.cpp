#include "ccirc/sweep.hpp"

#include <algorithm>
#include <future>
#include <sstream>

namespace ccirc {

std::pair<tick_t, tick_t> derive_pace_and_bound(const circuit_node& node, tick_t epoch,
                                                tick_t tconf) {
   switch (node.kind) {
      case circuit_node::kind_t::leaf:
         return {epoch, tconf};
      case circuit_node::kind_t::serial: {
         auto acc = derive_pace_and_bound(node.children[0], epoch, tconf);
         for (size_t i = 1; i < node.children.size(); ++i) {
            auto c = derive_pace_and_bound(node.children[i], epoch, tconf);
            acc = {std::max(acc.first, c.first), acc.second + c.first + c.second};
         }
         return acc;
      }
      case circuit_node::kind_t::lvl: {
         tick_t hop = 0, pace = 0;
         for (const auto& c : node.children) {
            auto r = derive_pace_and_bound(c, epoch, tconf);
            pace = std::max(pace, r.first);
            hop = std::max(hop, r.second);
         }
         tick_t e = 3 * hop;
         return {e, 2 * e};  // f = 1
      }
      case circuit_node::kind_t::lvs: {
         auto a = derive_pace_and_bound(node.children[0], epoch, tconf);
         auto b = derive_pace_and_bound(node.children[1], epoch, tconf);
         tick_t look = std::max(a.second, b.second);
         return {std::max(a.first, b.first), 2 * look};
      }
   }
   return {epoch, tconf};
}

namespace {

scenario cell_scenario(const circuit_node& circuit, const sweep_options& opts,
                       const fault_assignment& fa, tick_t gst, uint64_t seed, tick_t pace,
                       tick_t bound) {
   scenario sc;
   sc.name = "sweep-cell";
   sc.net.mode = opts.mode;
   sc.net.delta = opts.delta;
   sc.net.gst = gst;
   int k = std::max(1, circuit.max_leaf());
   for (int i = 1; i <= k; ++i) {
      chain_config cfg;
      cfg.id = "c" + std::to_string(i);
      cfg.epoch = opts.epoch;
      cfg.tconf = opts.tconf;
      sc.chains.push_back(cfg);
   }
   sc.circuit = circuit;
   sc.faults = fa;
   // Overlay-epoch-aligned injections, measured from max(gst, t).
   for (int n = 0; n < opts.tx_count; ++n)
      sc.txs.push_back(tx_injection{"x" + std::to_string(n + 1),
                                    static_cast<tick_t>(n) * pace, {}});
   tick_t last_deadline = std::max(gst, sc.txs.back().at) + bound;
   sc.horizon = last_deadline + pace + 4;
   sc.seed = seed;
   sc.use_randomized_adversary = true;
   return sc;
}

// Deterministic scripted variants exercising the fault budget at its
// boundary: total stalls for non-live chains, early fork splits for
// non-safe ones.
std::vector<scenario> scripted_variants(scenario base, const fault_assignment& fa) {
   std::vector<scenario> out;
   bool any_nonlive = false, any_nonsafe = false;
   for (const auto& f : fa) {
      any_nonlive |= !f.live;
      any_nonsafe |= !f.safe;
   }
   if (any_nonlive) {
      scenario sc = base;
      sc.use_randomized_adversary = false;
      sc.name = "sweep-cell-stall";
      for (size_t i = 0; i < fa.size(); ++i) {
         if (fa[i].live) continue;
         for (const auto& obs : sc.observers)
            sc.script.push_back(script_action{script_action::kind_t::stall, 0,
                                              static_cast<int>(i + 1), -1, 0, obs, 0, kNever,
                                              {}, ""});
      }
      out.push_back(std::move(sc));
   }
   if (any_nonsafe) {
      scenario sc = base;
      sc.use_randomized_adversary = false;
      sc.name = "sweep-cell-fork";
      for (size_t i = 0; i < fa.size(); ++i) {
         if (fa[i].safe) continue;
         int chain = static_cast<int>(i + 1);
         sc.script.push_back(
             script_action{script_action::kind_t::fork, sc.chains[i].epoch, chain, 0, 1, "", 0,
                           0, {}, ""});
         // Second client and half the circuit-side readers follow the fork.
         sc.script.push_back(script_action{script_action::kind_t::route, sc.chains[i].epoch,
                                           chain, 1, 0, sc.observers.back(), 0, 0, {}, ""});
      }
      out.push_back(std::move(sc));
   }
   return out;
}

void fold_run(sweep_cell& cell, const run_result& r, uint64_t seed, tick_t gst) {
   ++cell.runs;
   cell.safety_held = cell.safety_held && r.v.safety_held;
   cell.liveness_held = cell.liveness_held && r.v.liveness_held;
   cell.worst_latency = std::max(cell.worst_latency, r.v.worst_latency);
   if (!cell.contradiction && r.contradicts_prediction()) {
      cell.contradiction = true;
      cell.first_bad_seed = seed;
      cell.first_bad_gst = gst;
   }
}

}  // namespace

sweep_result sweep(const circuit_node& circuit, const sweep_options& opts) {
   circuit.validate();
   int k = circuit.max_leaf();
   if (k > opts.cell_cap)
      throw config_error("sweep over " + std::to_string(k) +
                         " chains exceeds the exhaustive cap; raise cell_cap or sample");

   auto [pace, bound] = derive_pace_and_bound(circuit, opts.epoch, opts.tconf);

   sweep_result result;
   result.k = k;
   result.liveness_bound = bound;

   uint32_t cells = 1u << (2 * k);
   result.cells.resize(cells);

   auto run_cell = [&](uint32_t idx) {
      sweep_cell cell;
      fault_assignment fa(static_cast<size_t>(k));
      for (int i = 0; i < k; ++i) {
         fa[static_cast<size_t>(i)].safe = (idx >> (2 * i)) & 1u;
         fa[static_cast<size_t>(i)].live = (idx >> (2 * i + 1)) & 1u;
      }
      cell.faults = fa;
      cell.predicted_safe = eval_safety(circuit, fa);
      cell.predicted_live = eval_liveness(circuit, fa);

      for (tick_t gst : opts.gst_values) {
         for (int s = 0; s < opts.seeds_per_cell; ++s) {
            uint64_t seed = opts.base_seed * 0x9e3779b97f4a7c15ull + idx * 1315423911ull +
                            static_cast<uint64_t>(s) * 2654435761ull + static_cast<uint64_t>(gst);
            auto sc = cell_scenario(circuit, opts, fa, gst, seed, pace, bound);
            fold_run(cell, run_scenario(sc), seed, gst);
         }
         if (opts.scripted_variants) {
            auto base = cell_scenario(circuit, opts, fa, gst, 0, pace, bound);
            for (auto& sc : scripted_variants(std::move(base), fa))
               fold_run(cell, run_scenario(sc), 0, gst);
         }
      }
      return cell;
   };

   if (opts.parallelism > 1) {
      std::vector<std::future<sweep_cell>> futs;
      futs.reserve(cells);
      for (uint32_t idx = 0; idx < cells; ++idx)
         futs.push_back(std::async(std::launch::async, run_cell, idx));
      for (uint32_t idx = 0; idx < cells; ++idx) result.cells[idx] = futs[idx].get();
   } else {
      for (uint32_t idx = 0; idx < cells; ++idx) result.cells[idx] = run_cell(idx);
   }

   for (const auto& cell : result.cells) {
      if (cell.contradiction) ++result.contradictions;
      if (cell.predicted_live)
         result.guaranteed_worst_latency =
             std::max(result.guaranteed_worst_latency, cell.worst_latency);
   }
   return result;
}

std::string sweep_result::to_table() const {
   std::ostringstream os;
   os << "faults(s/l per chain)  predicted  observed  latency\n";
   for (const auto& c : cells) {
      std::string f;
      for (const auto& cf : c.faults) {
         f += cf.safe ? 'S' : '-';
         f += cf.live ? 'L' : '-';
         f += ' ';
      }
      os << f << "  " << (c.predicted_safe ? "safe" : "....") << "/"
         << (c.predicted_live ? "live" : "....") << "  "
         << (c.safety_held ? "safe" : "VIOL") << "/" << (c.liveness_held ? "live" : "VIOL")
         << "  " << c.worst_latency << (c.contradiction ? "  << CONTRADICTION" : "") << "\n";
   }
   os << "cells=" << cells.size() << " contradictions=" << contradictions
      << " bound=" << liveness_bound << " worst_guaranteed_latency=" << guaranteed_worst_latency
      << "\n";
   return os.str();
}

}  // namespace ccirc
