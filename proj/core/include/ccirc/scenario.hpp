#pragma once

#include <memory>
#include <optional>

#include "ccirc/circuits.hpp"
#include "ccirc/judge.hpp"
#include "ccirc/lvl_gate.hpp"
#include "ccirc/lvs_gate.hpp"
#include "ccirc/serial_gate.hpp"
#include "ccirc/underlay.hpp"

namespace ccirc {

struct tx_injection {
   std::string id;
   tick_t at = 0;
   std::vector<int> chains;  // 1-based leaf indices; empty = all leaves
};

struct script_action {
   enum class kind_t { fork, route, stall, expose, withhold, deaf };
   kind_t kind = kind_t::fork;
   tick_t at = 0;
   int chain = 1;   // 1-based leaf index
   int branch = 0;  // fork parent / route target / stall scope (-1 = all)
   uint64_t height = 0;          // fork point
   std::string observer;         // route/stall/expose target
   tick_t from = 0, until = 0;   // stall window
   std::vector<int> branches;    // expose set
   std::string tx_id;            // withhold target (-1 branch = all)
   bool marker = true;           // fork: add a divergence marker tx
};

/// Endpoints matching a prefix in group_a cannot exchange messages with
/// endpoints matching group_b before `until`.
struct partition_directive {
   std::vector<std::string> group_a, group_b;
   tick_t until = 0;
};

struct scenario {
   std::string name = "scenario";
   network_model net;
   std::vector<chain_config> chains;
   circuit_node circuit = circuit_node::leaf(1);
   std::optional<fault_assignment> faults;  // overrides chain safe/live flags
   std::vector<tx_injection> txs;
   std::vector<script_action> script;
   std::vector<partition_directive> partitions;
   std::vector<std::string> observers{"client1", "client2"};
   tick_t horizon = 100;
   uint64_t seed = 1;
   bool use_randomized_adversary = true;
   randomized_options adv_opts;
   bool allow_uncertified_serial = false;
   std::optional<tick_t> liveness_bound;  // default: derived from the circuit

   fault_assignment effective_faults() const;
   void validate() const;
};

struct run_result {
   verdict v;
   bool predicted_safe = false;
   bool predicted_live = false;
   tick_t liveness_bound = 0;
   std::string root_id;
   std::vector<trace_event> trace;

   bool contradicts_prediction() const {
      return (predicted_safe && !v.safety_held) || (predicted_live && !v.liveness_held);
   }
};

/// Simulation-side instantiation of a circuit tree: shared leaf chains,
/// one gate object per internal node. Gate ids are preorder-indexed
/// ("s<i>" serial, "t<i>" lvl, "p<i>" lvs; serial folds append "f<j>").
struct built_circuit {
   std::shared_ptr<chain_handle> root;
   std::vector<std::shared_ptr<underlay_chain>> leaves;
   std::vector<std::shared_ptr<chain_handle>> gates;
   std::vector<actor*> gate_actors;  // serial embedders + lvl drivers
   std::vector<actor*> post_actors;  // lvs ring samplers
};

built_circuit build_circuit(simulation& sim, const circuit_node& node,
                            const std::vector<chain_config>& configs, bool allow_uncertified);

/// Wraps a base adversary with scripted partition directives.
class scripted_adversary : public adversary {
 public:
   scripted_adversary(std::shared_ptr<adversary> base, std::vector<partition_directive> parts);

   tick_t deliver_time(const envelope& env, tick_t earliest, tick_t latest) override;
   tick_t release_tick(const std::string& chain, int branch, uint64_t height,
                       const std::string& observer, tick_t produced, tick_t latest) override;
   int branch_for(const std::string& chain, const std::string& observer, tick_t now,
                  int branches) override;
   bool produce_block(const std::string& chain, int branch, tick_t now, bool must) override;
   bool include_tx(const std::string& chain, int branch, const std::string& tx_id, tick_t now,
                   bool must) override;
   std::optional<uint64_t> fork_request(const std::string& chain, tick_t now, int branches,
                                        uint64_t head_height) override;

 private:
   std::shared_ptr<adversary> base_;
   std::vector<partition_directive> parts_;
};

run_result run_scenario(const scenario& sc, bool keep_trace = false);

}  // namespace ccirc
