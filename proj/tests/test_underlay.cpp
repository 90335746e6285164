#include <doctest.h>

#include "ccirc/underlay.hpp"

using namespace ccirc;

namespace {

chain_config cfg(const std::string& id, bool safe = true, bool live = true) {
   chain_config c;
   c.id = id;
   c.epoch = 2;
   c.tconf = 4;
   c.safe = safe;
   c.live = live;
   return c;
}

struct rig {
   simulation sim;
   underlay_chain chain;

   rig(chain_config c, network_model n = {net_mode::partial_synchrony, 1, 0},
       std::shared_ptr<adversary> adv = std::make_shared<honest_adversary>())
       : sim(n, std::move(adv)), chain(sim, c) {
      sim.add_actor(sim_phase::chain, &chain);
   }
   void submit(const std::string& id, tick_t at) {
      chain.submit(transaction{id, nullptr}, at);
   }
};

}  // namespace

TEST_CASE("config validation") {
   auto c = cfg("x");
   c.tconf = 1;  // < epoch
   CHECK_THROWS_AS(c.validate(), config_error);
   c = cfg("");
   CHECK_THROWS_AS(c.validate(), config_error);
}

TEST_CASE("live chain meets its inclusion deadline for every observer") {
   SUBCASE("gst 0") {
      rig r(cfg("A"));
      r.submit("tx1", 0);
      r.sim.run_until(4);  // deadline = max(0, 0) + tconf
      CHECK(r.chain.read("obs1", 4).l.contains_id("tx1"));
      CHECK(r.chain.read("obs2", 4).l.contains_id("tx1"));
   }
   SUBCASE("gst 10, submitted pre-GST") {
      rig r(cfg("A"), {net_mode::partial_synchrony, 1, 10},
            std::make_shared<randomized_adversary>(7));
      r.sim.run_until(0);
      r.submit("tx1", 0);
      r.sim.run_until(14);  // max(gst, 0) + tconf
      CHECK(r.chain.read("obs1", 14).l.contains_id("tx1"));
   }
}

TEST_CASE("duplicate submissions are rejected") {
   rig r(cfg("A"));
   r.submit("tx1", 0);
   r.submit("tx1", 1);
   r.sim.run_until(6);
   auto l = r.chain.read("c", 6).l;
   int seen = 0;
   for (const auto& tx : l.txs) seen += tx.id == "tx1";
   CHECK(seen == 1);
}

TEST_CASE("safe chain reads are certified and pairwise consistent") {
   rig r(cfg("A"));
   r.submit("tx1", 0);
   r.submit("tx2", 2);
   r.sim.run_until(8);
   auto a = r.chain.read("obs1", 8);
   auto b = r.chain.read("obs2", 5);
   CHECK(consistent(a.l, b.l));
   CHECK(r.sim.certs().verify(a.cert, digest_of(a.l)));
   CHECK(r.sim.certs().verify(b.cert, digest_of(b.l)));
}

TEST_CASE("fork_branch is rejected on safe certificate-generating chains") {
   rig r(cfg("A"));
   r.sim.run_until(4);
   CHECK_THROWS_AS(r.chain.fork_branch(0, 1), contract_violation);
}

TEST_CASE("split-brain chain serves conflicting certified views") {
   rig r(cfg("A", false, true));
   r.submit("tx1", 0);
   r.submit("tx2", 2);
   r.sim.run_until(4);
   int b = r.chain.fork_branch(0, 1);
   r.chain.route_observer("obs1", 0, 0);
   r.chain.route_observer("obs2", b, 0);
   r.submit("tx3", 5);
   r.sim.run_until(12);

   auto v1 = r.chain.read("obs1", 12);
   auto v2 = r.chain.read("obs2", 12);
   CHECK_FALSE(consistent(v1.l, v2.l));
   CHECK(r.sim.certs().verify(v1.cert, digest_of(v1.l)));
   CHECK(r.sim.certs().verify(v2.cert, digest_of(v2.l)));  // both branches certified
   CHECK(v2.l.contains_id("tx3"));  // split-brain live: every branch stays live

   SUBCASE("fork of a fork gives three pairwise conflicting branches") {
      int b2 = r.chain.fork_branch(0, 2);
      r.chain.route_observer("obs3", b2, 12);
      r.sim.run_until(20);
      auto v3 = r.chain.read("obs3", 20);
      CHECK_FALSE(consistent(r.chain.read("obs1", 20).l, v3.l));
      CHECK_FALSE(consistent(r.chain.read("obs2", 20).l, v3.l));
   }
}

TEST_CASE("read_all exposes every branch of a split chain") {
   rig r(cfg("A", false, true));
   r.submit("tx1", 0);
   r.sim.run_until(4);
   r.chain.fork_branch(0, 1);
   r.sim.run_until(10);
   CHECK(r.chain.read_all("c", 10).size() == 2);
}

TEST_CASE("stalls freeze views and respect the liveness precondition") {
   SUBCASE("non-live chain can stall one observer forever") {
      rig r(cfg("A", true, false));
      r.chain.set_stall({"obs1"}, 0, kNever);
      r.submit("tx1", 0);
      r.sim.run_until(20);
      CHECK(r.chain.read("obs1", 20).l.empty());
      auto moving = r.chain.read("obs2", 20).l;  // honest base releases immediately
      CHECK(moving.contains_id("tx1"));
      CHECK(consistent(r.chain.read("obs1", 20).l, moving));  // prefix relation
   }
   SUBCASE("live chain allows stalls only up to gst") {
      rig live(cfg("A"), {net_mode::partial_synchrony, 1, 8});
      CHECK_NOTHROW(live.chain.set_stall({"obs1"}, 0, 8));
      CHECK_THROWS_AS(live.chain.set_stall({"obs1"}, 0, 9), contract_violation);
   }
}

TEST_CASE("non-certificate safe chain reads the longest branch unanimously") {
   auto c = cfg("A");
   c.certificates = false;
   c.max_branches = 2;
   rig r(c);
   r.submit("tx1", 0);
   r.sim.run_until(4);
   r.chain.fork_branch(0, 1);
   r.chain.withhold_tx("tx2", 1);
   r.chain.route_observer("s/embed", 1, 4);
   r.submit("tx2", 5);
   r.sim.run_until(12);

   auto direct1 = r.chain.read("obs1", 12);
   auto direct2 = r.chain.read("obs2", 12);
   CHECK(direct1.l == direct2.l);            // canonical branch stays longest
   CHECK_FALSE(direct1.cert.valid());        // nothing to verify against
   auto snap = r.chain.read_snapshot("s/embed", 12);
   CHECK_FALSE(consistent(snap.l, direct1.l));  // embedder fed the short fork
}
