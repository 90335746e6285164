#include <doctest.h>

#include "ccirc/lvl_gate.hpp"
#include "ccirc/scenario.hpp"

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

oft_message ack_of(const overlay_block& b, int64_t epoch, int validator) {
   return oft_message{oft_kind::ack, epoch, validator, b, {}};
}

oft_message ld_of(const overlay_block& b, int64_t epoch, int validator) {
   return oft_message{oft_kind::leader_down, epoch, validator, b, {}};
}

oft_record inbound(const oft_message& m, tick_t at) {
   oft_record r;
   r.gate = "g";
   r.inbound = true;
   r.at = at;
   r.msg = m;
   return r;
}

}  // namespace

TEST_CASE("leader rotates round-robin") {
   oft_machine m3("g", 3, 1, 0, 12);
   CHECK(m3.leader_of(0) == 0);
   CHECK(m3.leader_of(4) == 1);
   oft_machine m5("g", 5, 2, 0, 12);
   CHECK(m5.leader_of(7) == 2);
}

TEST_CASE("epoch 0 leader proposes a genesis child without a ticket") {
   oft_machine m("g", 3, 1, 0, 12);
   auto recs = m.step(-1, 2, {}, {transaction{"tx1", nullptr}});
   REQUIRE(recs.size() == 1);
   CHECK(recs[0]->msg.kind == oft_kind::propose);
   CHECK(recs[0]->msg.epoch == 0);
   CHECK(recs[0]->msg.ticket.empty());
   CHECK(recs[0]->msg.blk.parent == digest_of(overlay_genesis()));
   CHECK(recs[0]->msg.blk.txs.size() == 1);
}

TEST_CASE("proposal rules") {
   overlay_block b1{1, digest_of(overlay_genesis()), 0, {transaction{"tx1", nullptr}}};

   SUBCASE("rule 1: certificate from the previous epoch") {
      oft_machine m("g", 3, 1, 1, 12);  // validator 1 leads epoch 1
      // two foreign acks form C_0(b1)
      m.step(-1, 10, {ack_of(b1, 0, 0), ack_of(b1, 0, 2)}, {});
      auto recs = m.step(10, 12, {}, {});  // epoch 1 enter
      REQUIRE(!recs.empty());
      CHECK(recs.back()->msg.kind == oft_kind::propose);
      CHECK(recs.back()->msg.epoch == 1);
      CHECK(recs.back()->msg.blk.parent == digest_of(b1));
      CHECK(recs.back()->msg.ticket.size() == 2);
   }
   SUBCASE("rule 2: f+1 leader-downs, extend the max-epoch carried block") {
      oft_machine m("g", 3, 1, 1, 12);
      auto recs = m.step(-1, 13, {ld_of(b1, 0, 0), ld_of(overlay_genesis(), 0, 2)}, {});
      REQUIRE(!recs.empty());
      const auto& prop = recs.back();
      CHECK(prop->msg.kind == oft_kind::propose);
      CHECK(prop->msg.blk.parent == digest_of(b1));  // genesis tie loses to a real block
      CHECK(prop->msg.ticket.size() == 2);
   }
   SUBCASE("rule 3: no ticket, no proposal") {
      oft_machine m("g", 3, 1, 1, 12);
      auto recs = m.step(-1, 13, {}, {});
      CHECK(recs.empty());
   }
}

TEST_CASE("acknowledge fires once per epoch for the first observed proposal") {
   oft_machine m("g", 3, 1, 2, 12);
   overlay_block b1{1, digest_of(overlay_genesis()), 0, {}};
   oft_message prop{oft_kind::propose, 0, 0, b1, {}};
   auto recs = m.step(-1, 5, {prop}, {});  // ack point of epoch 0 (offset 4)
   REQUIRE(!recs.empty());
   CHECK(recs.back()->msg.kind == oft_kind::ack);
   CHECK(recs.back()->msg.epoch == 0);

   SUBCASE("no proposal, no ack") {
      oft_machine fresh("g", 3, 1, 2, 12);
      CHECK(fresh.step(-1, 5, {}, {}).empty());
   }
}

TEST_CASE("leader-down carries the highest acked block, genesis when fresh") {
   SUBCASE("fresh validator sends genesis") {
      oft_machine m("g", 3, 1, 2, 12);
      auto recs = m.step(-1, 9, {}, {});  // leader-down point (offset 8)
      REQUIRE(recs.size() == 1);
      CHECK(recs[0]->msg.kind == oft_kind::leader_down);
      CHECK(recs[0]->msg.blk.height == 0);
   }
   SUBCASE("after an ack it carries that block") {
      oft_machine m("g", 3, 1, 2, 12);
      overlay_block b1{1, digest_of(overlay_genesis()), 0, {}};
      m.step(-1, 5, {oft_message{oft_kind::propose, 0, 0, b1, {}}}, {});
      auto recs = m.step(5, 9, {}, {});
      REQUIRE(recs.size() == 1);
      CHECK(recs[0]->msg.kind == oft_kind::leader_down);
      CHECK(digest_of(recs[0]->msg.blk) == digest_of(b1));
   }
   SUBCASE("an observed certificate suppresses the leader-down") {
      oft_machine m("g", 3, 1, 2, 12);
      overlay_block b1{1, digest_of(overlay_genesis()), 0, {}};
      m.step(-1, 5, {oft_message{oft_kind::propose, 0, 0, b1, {}}}, {});
      auto recs = m.step(5, 9, {ack_of(b1, 0, 0), ack_of(b1, 0, 1)}, {});
      for (const auto& r : recs) CHECK(r->msg.kind != oft_kind::leader_down);
   }
}

TEST_CASE("commit requires a proposal plus f+1 acks") {
   oft_machine m("g", 3, 1, 2, 12);
   overlay_block b1{1, digest_of(overlay_genesis()), 0, {}};
   m.step(-1, 5, {oft_message{oft_kind::propose, 0, 0, b1, {}}}, {});
   CHECK(m.committed_tips().empty());
   m.step(5, 6, {ack_of(b1, 0, 0), ack_of(b1, 0, 1)}, {});
   REQUIRE(m.committed_tips().size() == 1);
   CHECK(m.committed_tips()[0] == digest_of(b1));
}

TEST_CASE("trace replay rejects invalid actions") {
   overlay_block b1{1, digest_of(overlay_genesis()), 0, {}};

   SUBCASE("proposal by a non-leader") {
      oft_machine m("g", 3, 1, 1, 12);
      oft_record bogus;
      bogus.gate = "g";
      bogus.at = 2;  // epoch 0, enter window; leader is 0, not 1
      bogus.msg = oft_message{oft_kind::propose, 0, 1, b1, {}};
      CHECK_FALSE(m.apply(bogus));
   }
   SUBCASE("ack without a proposal") {
      oft_machine m("g", 3, 1, 2, 12);
      oft_record bogus;
      bogus.gate = "g";
      bogus.at = 5;
      bogus.msg = ack_of(b1, 0, 2);
      bogus.inbound = false;
      CHECK_FALSE(m.apply(bogus));
   }
   SUBCASE("action outside its phase window") {
      oft_machine m("g", 3, 1, 0, 12);
      oft_record late;
      late.gate = "g";
      late.at = 9;  // leader-down window, not the enter window
      late.msg = oft_message{oft_kind::propose, 0, 0, b1, {}};
      CHECK_FALSE(m.apply(late));
   }
}

TEST_CASE("three live hosts commit within two overlay sub-epochs") {
   scenario sc;
   sc.net = {net_mode::partial_synchrony, 1, 0};
   sc.chains = {cfg("c1"), cfg("c2"), cfg("c3")};
   sc.circuit =
       circuit_node::lvl({circuit_node::leaf(1), circuit_node::leaf(2), circuit_node::leaf(3)});
   sc.txs = {{"x1", 0, {}}};
   sc.horizon = 30;
   sc.use_randomized_adversary = false;

   auto base = std::make_shared<honest_adversary>();
   simulation sim(sc.net, base);
   auto cfgs = sc.chains;
   auto built = build_circuit(sim, sc.circuit, cfgs, false);
   built.root->register_observer("c");
   for (auto& leaf : built.leaves) leaf->submit(transaction{"x1", nullptr}, 0);
   // overlay epoch = 3 * tconf = 12; validators hold a certificate for the
   // first proposal by 2*tconf = 8, and the client assembles it within the
   // same epoch
   sim.run_until(11);
   CHECK(built.root->read("c", 11).l.contains_id("x1"));
}

TEST_CASE("one stalled host leaves a live quorum; two stalled hosts do not") {
   scenario sc;
   sc.net = {net_mode::partial_synchrony, 1, 0};
   sc.chains = {cfg("c1"), cfg("c2"), cfg("c3", true, false)};
   sc.circuit =
       circuit_node::lvl({circuit_node::leaf(1), circuit_node::leaf(2), circuit_node::leaf(3)});
   sc.txs = {{"x1", 0, {}}, {"x2", 12, {}}};
   sc.horizon = 80;
   sc.use_randomized_adversary = false;
   for (const auto* obs : {"client1", "client2"})
      sc.script.push_back({script_action::kind_t::stall, 0, 3, -1, 0, obs, 0, kNever, {}, ""});

   SUBCASE("one stalled") {
      auto r = run_scenario(sc);
      CHECK(r.v.safety_held);
      CHECK(r.v.liveness_held);
      CHECK(r.v.worst_latency <= 24);  // f(3 tconf) + 3 tconf
   }
   SUBCASE("two stalled") {
      sc.chains[1].live = false;
      for (const auto* obs : {"client1", "client2"})
         sc.script.push_back({script_action::kind_t::stall, 0, 2, -1, 0, obs, 0, kNever, {}, ""});
      // stop production outright on both stalled chains
      scenario sc2 = sc;
      auto r = run_scenario(sc2);
      CHECK_FALSE(r.v.liveness_held);
      CHECK_FALSE(r.contradicts_prediction());
   }
}

TEST_CASE("an injected invalid record stalls only that emulated validator") {
   scenario sc;
   sc.net = {net_mode::partial_synchrony, 1, 0};
   sc.chains = {cfg("c1"), cfg("c2"), cfg("c3")};
   sc.circuit =
       circuit_node::lvl({circuit_node::leaf(1), circuit_node::leaf(2), circuit_node::leaf(3)});

   simulation sim(sc.net, std::make_shared<honest_adversary>());
   auto built = build_circuit(sim, sc.circuit, sc.chains, false);
   built.root->register_observer("c");

   // A proposal record from the wrong leader, planted on chain 3's ledger.
   auto bogus = std::make_shared<oft_record>();
   bogus->gate = built.gates[0]->id();
   bogus->inbound = false;
   bogus->at = 2;
   bogus->msg = oft_message{oft_kind::propose, 0, 2,
                            overlay_block{1, digest_of(overlay_genesis()), 0, {}}, {}};
   built.leaves[2]->submit_record(transaction{"bogus#1", bogus}, 0, "");

   for (auto& leaf : built.leaves) leaf->submit(transaction{"x1", nullptr}, 0);
   sim.run_until(24);
   // validators on chains 1 and 2 still form a quorum
   CHECK(built.root->read("c", 24).l.contains_id("x1"));
}

TEST_CASE("five validators tolerate two stalled hosts") {
   // n = 2f+1 = 5 driven directly, as a differential check of the gate's
   // general quorum logic.
   scenario sc;
   sc.net = {net_mode::partial_synchrony, 1, 0};
   for (int i = 1; i <= 5; ++i) sc.chains.push_back(cfg("c" + std::to_string(i)));
   sc.chains[3].live = false;
   sc.chains[4].live = false;

   simulation sim(sc.net, std::make_shared<honest_adversary>());
   std::vector<std::shared_ptr<chain_handle>> parts;
   auto built_leaves = std::vector<std::shared_ptr<underlay_chain>>{};
   for (auto& c : sc.chains) {
      auto leaf = std::make_shared<underlay_chain>(sim, c);
      sim.add_actor(sim_phase::chain, leaf.get());
      built_leaves.push_back(leaf);
      parts.push_back(leaf);
   }
   auto gate = std::make_shared<lvl_gate>(sim, "t0", parts, 2);
   sim.add_actor(sim_phase::gate, gate.get());
   for (int i = 3; i < 5; ++i)
      built_leaves[i]->set_stall({"c"}, 0, kNever);
   for (auto& leaf : built_leaves) leaf->submit(transaction{"x1", nullptr}, 0);
   sim.run_until(60);  // f(3 tconf) + 3 tconf = 36, plus client margin
   CHECK(gate->read("c", 60).l.contains_id("x1"));
}
