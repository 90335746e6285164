#include "ccirc/attacks.hpp"

#include "ccirc/sweep.hpp"

namespace ccirc {

namespace {

chain_config make_chain(const std::string& id, bool safe, bool live) {
   chain_config cfg;
   cfg.id = id;
   cfg.epoch = 2;
   cfg.tconf = 4;
   cfg.safe = safe;
   cfg.live = live;
   return cfg;
}

script_action fork_at(tick_t at, int chain, uint64_t height) {
   script_action a;
   a.kind = script_action::kind_t::fork;
   a.at = at;
   a.chain = chain;
   a.branch = 0;
   a.height = height;
   return a;
}

script_action route_at(tick_t at, int chain, const std::string& observer, int branch) {
   script_action a;
   a.kind = script_action::kind_t::route;
   a.at = at;
   a.chain = chain;
   a.branch = branch;
   a.observer = observer;
   a.from = at;
   return a;
}

script_action stall_at(tick_t at, int chain, const std::string& observer, tick_t from,
                       tick_t until) {
   script_action a;
   a.kind = script_action::kind_t::stall;
   a.at = at;
   a.chain = chain;
   a.observer = observer;
   a.from = from;
   a.until = until;
   return a;
}

script_action withhold_at(tick_t at, int chain, const std::string& tx_id, int branch) {
   script_action a;
   a.kind = script_action::kind_t::withhold;
   a.at = at;
   a.chain = chain;
   a.tx_id = tx_id;
   a.branch = branch;
   return a;
}

script_action deaf_at(tick_t at, int chain, int branch, const std::string& prefix, tick_t until) {
   script_action a;
   a.kind = script_action::kind_t::deaf;
   a.at = at;
   a.chain = chain;
   a.branch = branch;
   a.observer = prefix;
   a.until = until;
   return a;
}

script_action stall_branch(tick_t at, int chain, const std::string& observer, int branch,
                           tick_t from, tick_t until) {
   script_action a;
   a.kind = script_action::kind_t::stall;
   a.at = at;
   a.chain = chain;
   a.observer = observer;
   a.branch = branch;
   a.from = from;
   a.until = until;
   return a;
}

}  // namespace

attack_scenario make_serial_no_certificates_attack() {
   attack_scenario atk;
   atk.name = "serial-no-certificates";
   atk.description =
       "Serial gate over a head chain without certificates: the carrier forks and each "
       "carrier branch embeds a different head fork; clients output conflicting ledgers "
       "although the head chain itself stays safe.";

   scenario sc;
   sc.name = atk.name;
   sc.net.mode = net_mode::partial_synchrony;
   sc.net.delta = 1;
   sc.net.gst = 0;
   auto head = make_chain("A", true, true);
   head.certificates = false;
   head.max_branches = 2;
   auto carrier = make_chain("B", false, true);
   sc.chains = {head, carrier};
   sc.circuit = circuit_node::serial({circuit_node::leaf(1), circuit_node::leaf(2)});
   sc.allow_uncertified_serial = true;
   sc.use_randomized_adversary = false;

   for (int i = 1; i <= 4; ++i)
      sc.txs.push_back(tx_injection{"tx" + std::to_string(i), i - 1, {1}});

   // Short fork of the head chain (never overtakes the canonical branch,
   // and its miners never include the later transactions), then a carrier
   // split: each carrier branch embeds what "its" head branch shows.
   sc.script.push_back(fork_at(2, 2, 0));  // carrier splits from genesis
   sc.script.push_back(fork_at(6, 1, 1));  // head forks above height 1
   sc.script.push_back(withhold_at(6, 1, "tx3", 1));
   sc.script.push_back(withhold_at(6, 1, "tx4", 1));
   sc.script.push_back(route_at(6, 1, "s0/embed@0", 0));
   sc.script.push_back(route_at(6, 1, "s0/embed@1", 1));
   sc.script.push_back(route_at(2, 2, "client1", 0));
   sc.script.push_back(route_at(2, 2, "client2", 1));

   sc.horizon = 40;
   sc.seed = 7;
   sc.liveness_bound = 40;  // safety attack; keep the liveness judge quiet
   atk.sc = std::move(sc);
   return atk;
}

attack_scenario make_three_worlds_attack(const bit_vector& l1, const bit_vector& l2,
                                         const bit_vector& s3) {
   if (l1.k != 3 || l2.k != 3 || s3.k != 3)
      throw config_error("three-world attack is instantiated over 3 chains");
   uint32_t q = l1.bits & l2.bits;
   if ((q & s3.bits) != 0)
      throw config_error("three-world attack needs an empty (l1,l2,s3) intersection");
   if (__builtin_popcount(q) != 1 || l1.count() != 2 || l2.count() != 2)
      throw config_error("three-world attack expects two overlapping 2-chain quorums");

   int split = 1;
   while (!((q >> (split - 1)) & 1u)) ++split;  // the common live chain
   int side1 = ind(bit_vector{3, l1.bits & ~q}).front();
   int side2 = ind(bit_vector{3, l2.bits & ~q}).front();

   attack_scenario atk;
   atk.name = "three-worlds";
   atk.description =
       "World-3 build of the partial-synchrony converse: the chain common to both liveness "
       "quorums splits, serving world 1 to client1 and world 2 to client2 until GST; outputs "
       "conflict although the chains named safe stay safe.";

   scenario sc;
   sc.name = atk.name;
   sc.net.mode = net_mode::partial_synchrony;
   sc.net.delta = 1;
   for (int i = 1; i <= 3; ++i) sc.chains.push_back(make_chain("c" + std::to_string(i), true, true));
   sc.chains[static_cast<size_t>(split - 1)].safe = false;
   sc.chains[static_cast<size_t>(split - 1)].max_branches = 2;
   sc.circuit = circuit_node::lvl(
       {circuit_node::leaf(1), circuit_node::leaf(2), circuit_node::leaf(3)});
   sc.use_randomized_adversary = false;

   auto [pace, bound] = derive_pace_and_bound(sc.circuit, 2, 4);
   sc.net.gst = 2 * bound;
   sc.horizon = sc.net.gst + bound + pace;
   sc.liveness_bound = sc.horizon;  // the attack argues safety, not latency

   int v_split = split - 1, v1 = side1 - 1, v2 = side2 - 1;
   std::string gate = "t0";

   sc.script.push_back(fork_at(1, split, 0));
   sc.script.push_back(route_at(1, split, "client1", 0));
   sc.script.push_back(route_at(1, split, "client2", 1));
   sc.script.push_back(route_at(1, split, gate + "/ccc/v" + std::to_string(v1), 0));
   sc.script.push_back(route_at(1, split, gate + "/ccc/v" + std::to_string(v2), 1));
   // Each fictitious instance of the common chain lives in one world: it
   // neither hears the other side nor shows itself to the other client
   // before GST.
   sc.script.push_back(deaf_at(1, split, 0, gate + "/v" + std::to_string(v2), sc.net.gst));
   sc.script.push_back(deaf_at(1, split, 1, gate + "/v" + std::to_string(v1), sc.net.gst));
   sc.script.push_back(stall_branch(1, split, "client1", 1, 0, sc.net.gst));
   sc.script.push_back(stall_branch(1, split, "client2", 0, 0, sc.net.gst));
   // Each client sees only its quorum until GST.
   sc.script.push_back(stall_at(0, side2, "client1", 0, sc.net.gst));
   sc.script.push_back(stall_at(0, side1, "client2", 0, sc.net.gst));
   // The two quorum sides cannot exchange overlay messages until GST.
   sc.partitions.push_back(partition_directive{
       {gate + "/v" + std::to_string(v1)}, {gate + "/v" + std::to_string(v2)}, sc.net.gst});

   sc.script.push_back(withhold_at(1, split, "tx1", 1));
   sc.script.push_back(withhold_at(1, split, "tx2", 0));
   sc.txs.push_back(tx_injection{"tx1", 2, {side1, split}});
   sc.txs.push_back(tx_injection{"tx2", 2, {side2, split}});

   atk.sc = std::move(sc);
   return atk;
}

attack_scenario make_naive_parallel_attack() {
   attack_scenario atk;
   atk.name = "naive-parallel";
   atk.description =
       "Two safe but non-live chains, each looking live to a different client: the parallel "
       "gate outputs conflicting ledgers, so two-chain live-if-either safe-if-both-safe is "
       "unachievable.";

   scenario sc;
   sc.name = atk.name;
   sc.net.mode = net_mode::synchrony;
   sc.net.delta = 1;
   sc.chains = {make_chain("A", true, false), make_chain("B", true, false)};
   sc.circuit = circuit_node::lvs({circuit_node::leaf(1), circuit_node::leaf(2)});
   sc.use_randomized_adversary = false;

   sc.script.push_back(stall_at(0, 1, "client2", 0, kNever));
   sc.script.push_back(stall_at(0, 2, "client1", 0, kNever));
   sc.txs.push_back(tx_injection{"tx1", 0, {1}});
   sc.txs.push_back(tx_injection{"tx2", 0, {2}});

   sc.horizon = 40;
   sc.liveness_bound = 40;
   atk.sc = std::move(sc);
   return atk;
}

attack_scenario make_sync_converse_attack() {
   attack_scenario atk;
   atk.name = "sync-converse";
   atk.description =
       "Synchronous converse worlds against a parallel gate claimed safe from safety alone: "
       "a safe non-live chain stalls towards one client, so the clients' outputs conflict "
       "although both chains are safe.";

   scenario sc;
   sc.name = atk.name;
   sc.net.mode = net_mode::synchrony;
   sc.net.delta = 1;
   sc.chains = {make_chain("A", true, false), make_chain("B", true, true)};
   sc.circuit = circuit_node::lvs({circuit_node::leaf(1), circuit_node::leaf(2)});
   sc.use_randomized_adversary = false;

   sc.script.push_back(stall_at(0, 1, "client2", 0, kNever));
   sc.txs.push_back(tx_injection{"tx1", 0, {1}});
   sc.txs.push_back(tx_injection{"tx2", 0, {2}});

   sc.horizon = 40;
   sc.liveness_bound = 40;
   atk.sc = std::move(sc);
   return atk;
}

std::vector<attack_scenario> attack_library() {
   return {
       make_serial_no_certificates_attack(),
       make_three_worlds_attack(bit_vector::parse("110"), bit_vector::parse("011"),
                                bit_vector::parse("101")),
       make_sync_converse_attack(),
       make_naive_parallel_attack(),
   };
}

}  // namespace ccirc
