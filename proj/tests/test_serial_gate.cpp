#include <doctest.h>

#include "ccirc/scenario.hpp"
#include "ccirc/serial_gate.hpp"

using namespace ccirc;

namespace {

chain_config cfg(const std::string& id, bool safe = true, bool live = true) {
   chain_config c;
   c.id = id;
   c.epoch = 1;
   c.tconf = 4;
   c.safe = safe;
   c.live = live;
   return c;
}

// Honest delivery except a fixed release lag for one observer of one chain.
struct lagging_adversary : honest_adversary {
   std::string chain, observer;
   tick_t lag;
   lagging_adversary(std::string c, std::string o, tick_t l)
       : chain(std::move(c)), observer(std::move(o)), lag(l) {}
   tick_t release_tick(const std::string& ch, int branch, uint64_t height,
                       const std::string& obs, tick_t produced, tick_t latest) override {
      if (ch == chain && obs == observer) return std::min(produced + lag, latest);
      return produced;
   }
};

struct rig {
   simulation sim;
   std::shared_ptr<underlay_chain> head, carrier;
   std::shared_ptr<serial_gate> gate;

   rig(chain_config a, chain_config b, std::shared_ptr<adversary> adv,
       serial_gate::options opts = serial_gate::options{})
       : sim({net_mode::partial_synchrony, 1, 0}, std::move(adv)) {
      head = std::make_shared<underlay_chain>(sim, a);
      carrier = std::make_shared<underlay_chain>(sim, b);
      gate = std::make_shared<serial_gate>(sim, "s0", head, carrier, opts);
      sim.add_actor(sim_phase::gate, gate.get());
      sim.add_actor(sim_phase::chain, head.get());
      sim.add_actor(sim_phase::chain, carrier.get());
   }
};

}  // namespace

TEST_CASE("construction requires certificate-generating constituents") {
   simulation sim({net_mode::partial_synchrony, 1, 0}, std::make_shared<honest_adversary>());
   auto a = cfg("A");
   a.certificates = false;
   auto head = std::make_shared<underlay_chain>(sim, a);
   auto carrier = std::make_shared<underlay_chain>(sim, cfg("B"));
   CHECK_THROWS_AS(serial_gate(sim, "s0", head, carrier, serial_gate::options{}), config_error);
   CHECK_NOTHROW(serial_gate(sim, "s1", head, carrier, serial_gate::options{true}));
}

TEST_CASE("both constituents honest: snapshots fold into the head ledger") {
   rig r(cfg("A"), cfg("B"), std::make_shared<honest_adversary>());
   r.gate->submit(transaction{"tx1", nullptr}, 0);
   r.gate->submit(transaction{"tx2", nullptr}, 0);
   r.sim.run_until(2);
   CHECK(r.gate->read("x", 2).l == make_ledger({"tx1", "tx2"}));

   r.gate->submit(transaction{"tx3", nullptr}, 2);
   r.gate->submit(transaction{"tx4", nullptr}, 2);
   r.sim.run_until(4);
   auto out = r.gate->read("x", 4);
   CHECK(out.l == make_ledger({"tx1", "tx2", "tx3", "tx4"}));
   CHECK(r.sim.certs().verify(out.cert, digest_of(out.l)));  // composed gate certifies
}

TEST_CASE("carrier split: stale snapshots still give consistent outputs") {
   // One carrier branch keeps embedding an old head view; clients on the
   // two branches disagree on length but never on content.
   auto adv = std::make_shared<lagging_adversary>("A", "s0/embed@1", 3);
   rig r(cfg("A"), cfg("B", false, true), adv);
   r.gate->submit(transaction{"tx1", nullptr}, 0);
   r.gate->submit(transaction{"tx2", nullptr}, 0);
   r.sim.run_until(2);
   r.carrier->fork_branch(0, 0, false);
   r.carrier->route_observer("x", 0, 2);
   r.carrier->route_observer("y", 2, 2);
   r.gate->submit(transaction{"tx3", nullptr}, 3);
   r.gate->submit(transaction{"tx4", nullptr}, 3);
   r.sim.run_until(5);

   auto lx = r.gate->read("x", 5).l;
   auto ly = r.gate->read("y", 5).l;
   CHECK(lx == make_ledger({"tx1", "tx2", "tx3", "tx4"}));
   CHECK(ly == make_ledger({"tx1", "tx2"}));
   CHECK(consistent(lx, ly));
}

TEST_CASE("head split: same carrier ledger, identical outputs after sanitization") {
   rig r(cfg("A", false, true), cfg("B"), std::make_shared<honest_adversary>());
   r.gate->submit(transaction{"tx1", nullptr}, 0);
   r.gate->submit(transaction{"tx2", nullptr}, 0);
   r.sim.run_until(1);
   r.gate->submit(transaction{"tx3", nullptr}, 1);
   r.gate->submit(transaction{"tx4", nullptr}, 1);
   r.sim.run_until(2);

   // Fork the head above its first block; the fork withholds tx3/tx4 and
   // carries its own tail instead.
   int br = r.head->fork_branch(0, 1, false);
   r.head->withhold_tx("tx3", br);
   r.head->withhold_tx("tx4", br);
   r.head->route_observer("s0/embed@0", 0, 2);
   r.sim.run_until(4);
   r.head->route_observer("s0/embed@0", br, 4);  // embedder now sees the other head fork
   r.head->submit(transaction{"tx'3", nullptr}, 4);
   r.head->submit(transaction{"tx'4", nullptr}, 4);
   r.head->withhold_tx("tx'3", 0);
   r.head->withhold_tx("tx'4", 0);
   r.sim.run_until(8);

   auto lx = r.gate->read("x", 8).l;
   auto ly = r.gate->read("y", 8).l;
   CHECK(lx == ly);  // same carrier, same snapshots, same fold
   CHECK(lx.contains_id("tx1"));
   CHECK(lx.contains_id("tx4"));
   CHECK(lx.contains_id("tx'3"));
   // first occurrences kept: the conflicting snapshot only contributes its tail
   CHECK(lx == make_ledger({"tx1", "tx2", "tx3", "tx4", "tx'3", "tx'4"}));
}

TEST_CASE("liveness bound: both live within head+carrier budget") {
   scenario sc;
   sc.net = {net_mode::partial_synchrony, 1, 0};
   sc.chains = {cfg("A"), cfg("B")};
   sc.chains[0].epoch = 2;
   sc.chains[1].epoch = 2;
   sc.circuit = circuit_node::serial({circuit_node::leaf(1), circuit_node::leaf(2)});
   sc.txs = {{"x1", 0, {}}, {"x2", 5, {}}};
   sc.horizon = 40;
   for (uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
      sc.seed = seed;
      auto r = run_scenario(sc);
      CHECK(r.v.safety_held);
      CHECK(r.v.liveness_held);
      CHECK(r.v.worst_latency <= 2 * 4);  // 2 * tconf
   }
}

TEST_CASE("head not live: composed liveness fails, safety holds") {
   scenario sc;
   sc.net = {net_mode::partial_synchrony, 1, 0};
   sc.chains = {cfg("A", true, false), cfg("B")};
   sc.circuit = circuit_node::serial({circuit_node::leaf(1), circuit_node::leaf(2)});
   sc.txs = {{"x1", 0, {}}};
   sc.horizon = 30;
   sc.use_randomized_adversary = false;
   sc.script.push_back(
       {script_action::kind_t::stall, 0, 1, -1, 0, "s0/embed@0", 0, kNever, {}, ""});
   auto r = run_scenario(sc);
   CHECK(r.v.safety_held);
   CHECK_FALSE(r.v.liveness_held);
   CHECK_FALSE(r.contradicts_prediction());  // liveness was not predicted
}
