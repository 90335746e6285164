#include <doctest.h>

#include <random>

#include "ccirc/json_io.hpp"

using namespace ccirc;

TEST_CASE("circuit nodes round-trip through JSON") {
   auto t = synthesize_ksl(4, 3, 3);
   CHECK(circuit_from_json(circuit_to_json(t)).to_string() == t.to_string());

   SUBCASE("accepts bare integers and leaf objects") {
      CHECK(circuit_from_json(json::parse("3")).to_string() == "3");
      CHECK(circuit_from_json(json::parse(R"({"leaf": 2})")).to_string() == "2");
      auto node = circuit_from_json(json::parse(R"({"serial": [1, {"lvl": [1, 2, 3]}]})"));
      CHECK(node.to_string() == "serial(1,lvl(1,2,3))");
   }
   SUBCASE("rejects unknown nodes") {
      CHECK_THROWS_AS(circuit_from_json(json::parse(R"({"parallel": [1, 2]})")), config_error);
   }
   SUBCASE("random trees survive the round trip") {
      std::mt19937_64 rng(5);
      std::function<circuit_node(int)> gen = [&](int depth) {
         if (depth == 0 || rng() % 3 == 0)
            return circuit_node::leaf(1 + static_cast<int>(rng() % 4));
         std::vector<circuit_node> ch;
         for (int i = 0; i < 3; ++i) ch.push_back(gen(depth - 1));
         return rng() % 2 ? circuit_node::lvl(std::move(ch))
                          : circuit_node::serial(std::move(ch));
      };
      for (int i = 0; i < 50; ++i) {
         auto tree = gen(3);
         CHECK(circuit_from_json(circuit_to_json(tree)).to_string() == tree.to_string());
      }
   }
}

TEST_CASE("characterizations round-trip through JSON") {
   auto c = predicted_properties(
       circuit_node::lvl({circuit_node::leaf(1), circuit_node::leaf(2), circuit_node::leaf(3)}),
       net_mode::partial_synchrony);
   CHECK(characterization_from_json(characterization_to_json(c)) == c);

   auto perm = pareto_set(4, net_mode::synchrony).front();
   CHECK(characterization_from_json(characterization_to_json(perm)) == perm);
}

TEST_CASE("scenarios round-trip through JSON") {
   auto atk = make_three_worlds_attack(bit_vector::parse("110"), bit_vector::parse("011"),
                                       bit_vector::parse("101"));
   auto j = scenario_to_json(atk.sc);
   auto sc = scenario_from_json(j);
   CHECK(sc.name == atk.sc.name);
   CHECK(sc.net.gst == atk.sc.net.gst);
   CHECK(sc.chains.size() == atk.sc.chains.size());
   CHECK(sc.script.size() == atk.sc.script.size());
   CHECK(sc.partitions.size() == atk.sc.partitions.size());
   CHECK(sc.circuit.to_string() == atk.sc.circuit.to_string());

   // the round-tripped scenario reproduces the same verdict
   auto r1 = run_scenario(atk.sc);
   auto r2 = run_scenario(sc);
   REQUIRE(r1.v.safety_violation.has_value());
   REQUIRE(r2.v.safety_violation.has_value());
   CHECK(r1.v.safety_violation->ledger_a == r2.v.safety_violation->ledger_a);

   SUBCASE("unbounded stall windows survive the round trip") {
      auto par = make_naive_parallel_attack();
      auto back = scenario_from_json(scenario_to_json(par.sc));
      CHECK(json::diff(scenario_to_json(par.sc), scenario_to_json(back)).empty());
      auto rr = run_scenario(back);
      CHECK_FALSE(rr.v.safety_held);
   }
}

TEST_CASE("verdicts and sweep reports serialize") {
   scenario sc;
   sc.net = {net_mode::partial_synchrony, 1, 0};
   chain_config c;
   c.id = "c1";
   c.epoch = 2;
   c.tconf = 4;
   sc.chains = {c};
   sc.circuit = circuit_node::leaf(1);
   sc.txs = {{"x1", 0, {}}};
   sc.horizon = 12;
   auto r = run_scenario(sc);
   auto j = run_result_to_json(r);
   CHECK(j["verdict"]["safety"] == "held");
   CHECK(j["predicted"]["live"] == true);

   sweep_options opts;
   opts.seeds_per_cell = 1;
   auto res = sweep(circuit_node::leaf(1), opts);
   auto js = sweep_to_json(res);
   CHECK(js["cells"].size() == 4);
   CHECK(js["contradictions"] == 0);
}

TEST_CASE("trace export is one JSON object per line") {
   scenario sc;
   sc.net = {net_mode::partial_synchrony, 1, 0};
   chain_config c;
   c.id = "c1";
   c.epoch = 2;
   c.tconf = 4;
   sc.chains = {c};
   sc.circuit = circuit_node::leaf(1);
   sc.txs = {{"x1", 0, {}}};
   sc.horizon = 8;
   auto r = run_scenario(sc, true);
   auto text = trace_to_jsonl(r.trace);
   REQUIRE(!text.empty());
   std::istringstream in(text);
   std::string line;
   while (std::getline(in, line)) {
      auto j = json::parse(line);
      CHECK(j.contains("tick"));
      CHECK(j.contains("kind"));
   }
}
