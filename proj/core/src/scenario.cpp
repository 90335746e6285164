#include "ccirc/scenario.hpp"

#include <algorithm>
#include <functional>

namespace ccirc {

fault_assignment scenario::effective_faults() const {
   if (faults) return *faults;
   fault_assignment fa;
   for (const auto& c : chains) fa.push_back(chain_fault{c.safe, c.live});
   return fa;
}

void scenario::validate() const {
   net.validate();
   if (chains.empty()) throw config_error("scenario needs at least one chain");
   circuit.validate();
   if (circuit.max_leaf() > static_cast<int>(chains.size()))
      throw config_error("circuit references leaf " + std::to_string(circuit.max_leaf()) +
                         " but only " + std::to_string(chains.size()) + " chains are configured");
   if (faults && faults->size() != chains.size())
      throw config_error("fault assignment length must match the chain count");
   if (horizon < 1) throw config_error("horizon must be >= 1");
   for (const auto& c : chains) c.validate();
   for (const auto& tx : txs)
      for (int idx : tx.chains)
         if (idx < 1 || idx > static_cast<int>(chains.size()))
            throw config_error("tx injection references unknown chain " + std::to_string(idx));
}

// --- circuit instantiation ----------------------------------------------------

namespace {

struct build_ctx {
   simulation& sim;
   const std::vector<chain_config>& configs;
   bool allow_uncertified;
   std::vector<std::shared_ptr<underlay_chain>> leaves;
   std::vector<std::shared_ptr<chain_handle>> gates;
   std::vector<actor*> gate_actors;
   std::vector<actor*> post_actors;
   int counter = 0;
};

std::shared_ptr<chain_handle> build_node(build_ctx& ctx, const circuit_node& node) {
   int index = ctx.counter++;
   switch (node.kind) {
      case circuit_node::kind_t::leaf:
         return ctx.leaves.at(static_cast<size_t>(node.leaf_index - 1));
      case circuit_node::kind_t::serial: {
         std::vector<std::shared_ptr<chain_handle>> parts;
         for (const auto& c : node.children) parts.push_back(build_node(ctx, c));
         serial_gate::options opts{ctx.allow_uncertified};
         std::shared_ptr<chain_handle> acc = parts[0];
         for (size_t j = 1; j < parts.size(); ++j) {
            std::string gid = "s" + std::to_string(index);
            if (j + 1 < parts.size()) gid += "f" + std::to_string(j);
            auto gate = std::make_shared<serial_gate>(ctx.sim, gid, acc, parts[j], opts);
            ctx.sim.add_actor(sim_phase::gate, gate.get());
            ctx.gate_actors.push_back(gate.get());
            ctx.gates.push_back(gate);
            acc = gate;
         }
         return acc;
      }
      case circuit_node::kind_t::lvl: {
         std::vector<std::shared_ptr<chain_handle>> parts;
         for (const auto& c : node.children) parts.push_back(build_node(ctx, c));
         auto gate = std::make_shared<lvl_gate>(ctx.sim, "t" + std::to_string(index),
                                                std::move(parts), 1);
         ctx.sim.add_actor(sim_phase::gate, gate.get());
         ctx.gate_actors.push_back(gate.get());
         ctx.gates.push_back(gate);
         return gate;
      }
      case circuit_node::kind_t::lvs: {
         auto a = build_node(ctx, node.children[0]);
         auto b = build_node(ctx, node.children[1]);
         auto gate = std::make_shared<lvs_gate>(ctx.sim, "p" + std::to_string(index), a, b);
         ctx.sim.add_actor(sim_phase::post, gate.get());
         ctx.post_actors.push_back(gate.get());
         ctx.gates.push_back(gate);
         return gate;
      }
   }
   throw config_error("unknown circuit node kind");
}

}  // namespace

built_circuit build_circuit(simulation& sim, const circuit_node& node,
                            const std::vector<chain_config>& configs, bool allow_uncertified) {
   node.validate();
   build_ctx ctx{sim, configs, allow_uncertified, {}, {}, {}, {}, 0};
   for (const auto& cfg : configs) {
      auto chain = std::make_shared<underlay_chain>(sim, cfg);
      sim.add_actor(sim_phase::chain, chain.get());
      ctx.leaves.push_back(std::move(chain));
   }
   auto root = build_node(ctx, node);
   return built_circuit{root, std::move(ctx.leaves), std::move(ctx.gates),
                        std::move(ctx.gate_actors), std::move(ctx.post_actors)};
}

// --- scripted adversary ---------------------------------------------------------

namespace {
bool matches_any(const std::string& endpoint, const std::vector<std::string>& prefixes) {
   for (const auto& p : prefixes)
      if (endpoint.rfind(p, 0) == 0) return true;
   return false;
}
}  // namespace

scripted_adversary::scripted_adversary(std::shared_ptr<adversary> base,
                                       std::vector<partition_directive> parts)
    : base_(std::move(base)), parts_(std::move(parts)) {}

tick_t scripted_adversary::deliver_time(const envelope& env, tick_t earliest, tick_t latest) {
   tick_t floor = earliest;
   for (const auto& p : parts_) {
      if (env.send_time >= p.until) continue;
      bool ab = matches_any(env.sender, p.group_a) && matches_any(env.recipient, p.group_b);
      bool ba = matches_any(env.sender, p.group_b) && matches_any(env.recipient, p.group_a);
      if (ab || ba) floor = std::max(floor, p.until);
   }
   tick_t t = base_->deliver_time(env, floor, std::max(floor, latest));
   return std::clamp(t, floor, std::max(floor, latest));
}

tick_t scripted_adversary::release_tick(const std::string& chain, int branch, uint64_t height,
                                        const std::string& observer, tick_t produced,
                                        tick_t latest) {
   return base_->release_tick(chain, branch, height, observer, produced, latest);
}

int scripted_adversary::branch_for(const std::string& chain, const std::string& observer,
                                   tick_t now, int branches) {
   return base_->branch_for(chain, observer, now, branches);
}

bool scripted_adversary::produce_block(const std::string& chain, int branch, tick_t now,
                                       bool must) {
   return base_->produce_block(chain, branch, now, must);
}

bool scripted_adversary::include_tx(const std::string& chain, int branch,
                                    const std::string& tx_id, tick_t now, bool must) {
   return base_->include_tx(chain, branch, tx_id, now, must);
}

std::optional<uint64_t> scripted_adversary::fork_request(const std::string& chain, tick_t now,
                                                         int branches, uint64_t head_height) {
   return base_->fork_request(chain, now, branches, head_height);
}

// --- runner -----------------------------------------------------------------------

namespace {

/// Applies injections and script actions at their ticks, then samples the
/// root output into the judge after chains have stepped.
class harness_actor : public actor {
 public:
   harness_actor(const scenario& sc, built_circuit& built, run_judge& judge, tick_t bound)
       : sc_(sc), built_(built), judge_(judge), bound_(bound) {}

   void inject(simulation& sim, tick_t now) {
      for (const auto& a : sc_.script) {
         if (a.at != now) continue;
         auto& chain = *built_.leaves.at(static_cast<size_t>(a.chain - 1));
         switch (a.kind) {
            case script_action::kind_t::fork:
               chain.fork_branch(a.branch, a.height, a.marker);
               break;
            case script_action::kind_t::route:
               chain.route_observer(a.observer, a.branch, a.from);
               break;
            case script_action::kind_t::stall:
               chain.set_stall({a.observer}, a.from, a.until, a.branch);
               break;
            case script_action::kind_t::expose:
               chain.expose_branches(a.observer, a.branches);
               break;
            case script_action::kind_t::withhold:
               chain.withhold_tx(a.tx_id, a.branch);
               break;
            case script_action::kind_t::deaf:
               chain.set_deaf(a.branch, a.observer, a.until);
               break;
         }
      }
      for (const auto& tx : sc_.txs) {
         if (tx.at != now) continue;
         transaction t{tx.id, nullptr};
         if (tx.chains.empty()) {
            for (auto& leaf : built_.leaves) leaf->submit(t, now);
         } else {
            for (int idx : tx.chains)
               built_.leaves.at(static_cast<size_t>(idx - 1))->submit(t, now);
         }
         tick_t deadline = std::max(sim.net().gst, tx.at) + bound_;
         if (deadline <= sc_.horizon) judge_.register_tx(tx.id, tx.at, deadline);
      }
   }

   void sample(simulation&, tick_t now) {
      for (const auto& obs : sc_.observers)
         judge_.sample(obs, now, built_.root->read(obs, now).l);
      judge_.end_tick(now);
   }

   void step(simulation&, tick_t) override {}

   const scenario& sc_;
   built_circuit& built_;
   run_judge& judge_;
   tick_t bound_;
};

struct phase_hook : actor {
   std::function<void(simulation&, tick_t)> fn;
   void step(simulation& sim, tick_t now) override { fn(sim, now); }
};

}  // namespace

run_result run_scenario(const scenario& sc, bool keep_trace) {
   sc.validate();

   std::shared_ptr<adversary> base;
   if (sc.use_randomized_adversary)
      base = std::make_shared<randomized_adversary>(sc.seed, sc.adv_opts);
   else
      base = std::make_shared<honest_adversary>();
   auto adv = std::make_shared<scripted_adversary>(base, sc.partitions);

   simulation sim(sc.net, adv);

   std::vector<chain_config> cfgs = sc.chains;
   auto fa = sc.effective_faults();
   for (size_t i = 0; i < cfgs.size(); ++i) {
      cfgs[i].safe = fa[i].safe;
      cfgs[i].live = fa[i].live;
   }

   auto built = build_circuit(sim, sc.circuit, cfgs, sc.allow_uncertified_serial);
   for (const auto& obs : sc.observers) built.root->register_observer(obs);

   tick_t bound = sc.liveness_bound.value_or(built.root->latency_bound());
   run_judge judge(sc.observers, sc.net.gst);
   harness_actor harness(sc, built, judge, bound);

   phase_hook injector;
   injector.fn = [&](simulation& s, tick_t t) { harness.inject(s, t); };
   phase_hook sampler;
   sampler.fn = [&](simulation& s, tick_t t) { harness.sample(s, t); };
   sim.add_actor(sim_phase::inject, &injector);
   sim.add_actor(sim_phase::post, &sampler);  // after lvs rings

   sim.run_until(sc.horizon);

   run_result res;
   res.v = judge.result();
   res.liveness_bound = bound;
   res.root_id = built.root->id();
   int k = static_cast<int>(sc.chains.size());
   fault_assignment eval_fa = fa;
   res.predicted_safe = eval_safety(sc.circuit, eval_fa);
   res.predicted_live = eval_liveness(sc.circuit, eval_fa);
   (void)k;
   if (keep_trace) res.trace = sim.trace();
   return res;
}

}  // namespace ccirc
