#include "ccirc/json_io.hpp"

#include <fstream>

namespace ccirc {

json circuit_to_json(const circuit_node& node) {
   switch (node.kind) {
      case circuit_node::kind_t::leaf:
         return node.leaf_index;
      case circuit_node::kind_t::serial:
      case circuit_node::kind_t::lvl:
      case circuit_node::kind_t::lvs: {
         const char* key = node.kind == circuit_node::kind_t::serial ? "serial"
                           : node.kind == circuit_node::kind_t::lvl  ? "lvl"
                                                                     : "lvs";
         json arr = json::array();
         for (const auto& c : node.children) arr.push_back(circuit_to_json(c));
         return json{{key, arr}};
      }
   }
   throw config_error("unknown circuit node");
}

circuit_node circuit_from_json(const json& j) {
   if (j.is_number_integer()) return circuit_node::leaf(j.get<int>());
   if (!j.is_object()) throw config_error("circuit node must be an integer or an object");
   auto children_of = [](const json& arr) {
      std::vector<circuit_node> out;
      for (const auto& c : arr) out.push_back(circuit_from_json(c));
      return out;
   };
   if (j.contains("leaf")) return circuit_node::leaf(j["leaf"].get<int>());
   if (j.contains("serial")) return circuit_node::serial(children_of(j["serial"]));
   if (j.contains("lvl")) return circuit_node::lvl(children_of(j["lvl"]));
   if (j.contains("lvs")) return circuit_node::lvs(children_of(j["lvs"]));
   throw config_error("circuit node needs one of: leaf, serial, lvl, lvs");
}

json characterization_to_json(const characterization& c) {
   json j;
   j["k"] = c.k;
   if (c.mode == characterization::mode_t::general) {
      j["mode"] = "general";
      auto dump = [](const std::vector<guarantee>& v) {
         json arr = json::array();
         for (const auto& g : v) arr.push_back(json::array({g.s.to_string(), g.l.to_string()}));
         return arr;
      };
      j["ES"] = dump(c.es);
      j["EL"] = dump(c.el);
   } else {
      j["mode"] = "perm";
      auto dump = [](const std::vector<perm_triple>& v) {
         json arr = json::array();
         for (const auto& t : v) arr.push_back(json::array({t.ns, t.nl, t.nsl}));
         return arr;
      };
      j["PS"] = dump(c.ps);
      j["PL"] = dump(c.pl);
   }
   return j;
}

characterization characterization_from_json(const json& j) {
   characterization c;
   c.k = j.at("k").get<int>();
   std::string mode = j.at("mode").get<std::string>();
   if (mode == "general") {
      c.mode = characterization::mode_t::general;
      auto parse = [&](const json& arr) {
         std::vector<guarantee> out;
         for (const auto& e : arr)
            out.push_back(guarantee{bit_vector::parse(e.at(0).get<std::string>()),
                                    bit_vector::parse(e.at(1).get<std::string>())});
         return out;
      };
      c.es = parse(j.at("ES"));
      c.el = parse(j.at("EL"));
   } else if (mode == "perm") {
      c.mode = characterization::mode_t::perm_invariant;
      auto parse = [](const json& arr) {
         std::vector<perm_triple> out;
         for (const auto& e : arr)
            out.push_back(perm_triple{e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
         return out;
      };
      c.ps = parse(j.at("PS"));
      c.pl = parse(j.at("PL"));
   } else {
      throw config_error("characterization mode must be general or perm");
   }
   return c;
}

namespace {

const char* action_name(script_action::kind_t k) {
   switch (k) {
      case script_action::kind_t::fork: return "fork";
      case script_action::kind_t::route: return "route";
      case script_action::kind_t::stall: return "stall";
      case script_action::kind_t::expose: return "expose";
      case script_action::kind_t::withhold: return "withhold";
      case script_action::kind_t::deaf: return "deaf";
   }
   return "?";
}

script_action::kind_t action_kind(const std::string& s) {
   if (s == "fork") return script_action::kind_t::fork;
   if (s == "route") return script_action::kind_t::route;
   if (s == "stall") return script_action::kind_t::stall;
   if (s == "expose") return script_action::kind_t::expose;
   if (s == "withhold") return script_action::kind_t::withhold;
   if (s == "deaf") return script_action::kind_t::deaf;
   throw config_error("unknown script action: " + s);
}

}  // namespace

json scenario_to_json(const scenario& sc) {
   json j;
   j["name"] = sc.name;
   j["network"] = {{"mode", sc.net.mode == net_mode::synchrony ? "sync" : "psync"},
                   {"delta", sc.net.delta},
                   {"gst", sc.net.gst}};
   json chains = json::array();
   for (const auto& c : sc.chains)
      chains.push_back(json{{"id", c.id},
                            {"epoch", c.epoch},
                            {"tconf", c.tconf},
                            {"safe", c.safe},
                            {"live", c.live},
                            {"certificates", c.certificates},
                            {"max_branches", c.max_branches}});
   j["chains"] = chains;
   j["circuit"] = circuit_to_json(sc.circuit);
   if (sc.faults) {
      json fa = json::array();
      for (const auto& f : *sc.faults) fa.push_back(json{{"safe", f.safe}, {"live", f.live}});
      j["faults"] = fa;
   }
   json txs = json::array();
   for (const auto& t : sc.txs)
      txs.push_back(json{{"id", t.id}, {"at", t.at}, {"chains", t.chains}});
   j["txs"] = txs;
   json script = json::array();
   for (const auto& a : sc.script) {
      json e{{"action", action_name(a.kind)}, {"at", a.at}, {"chain", a.chain}};
      switch (a.kind) {
         case script_action::kind_t::fork:
            e["branch"] = a.branch;
            e["height"] = a.height;
            e["marker"] = a.marker;
            break;
         case script_action::kind_t::route:
            e["observer"] = a.observer;
            e["branch"] = a.branch;
            e["from"] = a.from;
            break;
         case script_action::kind_t::stall:
            e["observer"] = a.observer;
            e["from"] = a.from;
            e["until"] = a.until;
            e["branch"] = a.branch;
            break;
         case script_action::kind_t::expose:
            e["observer"] = a.observer;
            e["branches"] = a.branches;
            break;
         case script_action::kind_t::withhold:
            e["tx"] = a.tx_id;
            e["branch"] = a.branch;
            break;
         case script_action::kind_t::deaf:
            e["observer"] = a.observer;
            e["branch"] = a.branch;
            e["until"] = a.until;
            break;
      }
      script.push_back(std::move(e));
   }
   j["script"] = script;
   json parts = json::array();
   for (const auto& p : sc.partitions)
      parts.push_back(json{{"a", p.group_a}, {"b", p.group_b}, {"until", p.until}});
   j["partitions"] = parts;
   j["observers"] = sc.observers;
   j["horizon"] = sc.horizon;
   j["seed"] = sc.seed;
   j["adversary"] = sc.use_randomized_adversary ? "randomized" : "honest";
   j["allow_uncertified_serial"] = sc.allow_uncertified_serial;
   if (sc.liveness_bound) j["liveness_bound"] = *sc.liveness_bound;
   return j;
}

scenario scenario_from_json(const json& j) {
   scenario sc;
   sc.name = j.value("name", "scenario");
   if (j.contains("network")) {
      const auto& n = j["network"];
      sc.net.mode = n.value("mode", "psync") == "sync" ? net_mode::synchrony
                                                       : net_mode::partial_synchrony;
      sc.net.delta = n.value<tick_t>("delta", 1);
      sc.net.gst = n.value<tick_t>("gst", 0);
   }
   for (const auto& c : j.at("chains")) {
      chain_config cfg;
      cfg.id = c.at("id").get<std::string>();
      cfg.epoch = c.value<tick_t>("epoch", 1);
      cfg.tconf = c.value<tick_t>("tconf", cfg.epoch * 2);
      cfg.safe = c.value("safe", true);
      cfg.live = c.value("live", true);
      cfg.certificates = c.value("certificates", true);
      cfg.max_branches = c.value("max_branches", 4);
      sc.chains.push_back(cfg);
   }
   sc.circuit = circuit_from_json(j.at("circuit"));
   if (j.contains("faults")) {
      fault_assignment fa;
      for (const auto& f : j["faults"])
         fa.push_back(chain_fault{f.at("safe").get<bool>(), f.at("live").get<bool>()});
      sc.faults = fa;
   }
   for (const auto& t : j.value("txs", json::array())) {
      tx_injection tx;
      tx.id = t.at("id").get<std::string>();
      tx.at = t.value<tick_t>("at", 0);
      tx.chains = t.value("chains", std::vector<int>{});
      sc.txs.push_back(std::move(tx));
   }
   for (const auto& e : j.value("script", json::array())) {
      script_action a;
      a.kind = action_kind(e.at("action").get<std::string>());
      a.at = e.value<tick_t>("at", 0);
      a.chain = e.value("chain", 1);
      a.branch = e.value("branch", 0);
      a.height = e.value<uint64_t>("height", 0);
      a.observer = e.value("observer", "");
      a.from = e.value<tick_t>("from", a.at);
      a.until = e.value<tick_t>("until", 0);
      a.branches = e.value("branches", std::vector<int>{});
      a.tx_id = e.value("tx", "");
      a.marker = e.value("marker", true);
      sc.script.push_back(std::move(a));
   }
   for (const auto& p : j.value("partitions", json::array())) {
      partition_directive d;
      d.group_a = p.at("a").get<std::vector<std::string>>();
      d.group_b = p.at("b").get<std::vector<std::string>>();
      d.until = p.at("until").get<tick_t>();
      sc.partitions.push_back(std::move(d));
   }
   if (j.contains("observers")) sc.observers = j["observers"].get<std::vector<std::string>>();
   sc.horizon = j.value<tick_t>("horizon", 100);
   sc.seed = j.value<uint64_t>("seed", 1);
   sc.use_randomized_adversary = j.value("adversary", "randomized") != "honest";
   sc.allow_uncertified_serial = j.value("allow_uncertified_serial", false);
   if (j.contains("liveness_bound")) sc.liveness_bound = j["liveness_bound"].get<tick_t>();
   return sc;
}

json verdict_to_json(const verdict& v) {
   json j;
   j["safety"] = v.safety_held ? "held" : "violated";
   if (v.safety_violation) {
      const auto& w = *v.safety_violation;
      j["safety_witness"] = {{"observer_a", w.obs_a}, {"tick_a", w.tick_a},
                             {"ledger_a", w.ledger_a}, {"observer_b", w.obs_b},
                             {"tick_b", w.tick_b},   {"ledger_b", w.ledger_b}};
   }
   j["liveness"] = v.liveness_held ? "held" : "violated";
   if (v.liveness_violation) {
      const auto& w = *v.liveness_violation;
      j["liveness_witness"] = {{"tx", w.tx_id}, {"deadline", w.deadline},
                               {"missing_observer", w.observer}};
   }
   j["worst_latency"] = v.worst_latency;
   j["judged_txs"] = v.judged_txs;
   return j;
}

json run_result_to_json(const run_result& r) {
   json j;
   j["verdict"] = verdict_to_json(r.v);
   j["predicted"] = {{"safe", r.predicted_safe}, {"live", r.predicted_live}};
   j["liveness_bound"] = r.liveness_bound;
   j["contradicts_prediction"] = r.contradicts_prediction();
   j["root"] = r.root_id;
   return j;
}

json sweep_to_json(const sweep_result& s) {
   json cells = json::array();
   for (const auto& c : s.cells) {
      std::string f;
      for (const auto& cf : c.faults) {
         f += cf.safe ? 'S' : '-';
         f += cf.live ? 'L' : '-';
      }
      cells.push_back(json{{"faults", f},
                           {"predicted_safe", c.predicted_safe},
                           {"predicted_live", c.predicted_live},
                           {"safety_held", c.safety_held},
                           {"liveness_held", c.liveness_held},
                           {"worst_latency", c.worst_latency},
                           {"runs", c.runs},
                           {"contradiction", c.contradiction},
                           {"first_bad_seed", c.first_bad_seed}});
   }
   return json{{"k", s.k},
               {"liveness_bound", s.liveness_bound},
               {"contradictions", s.contradictions},
               {"guaranteed_worst_latency", s.guaranteed_worst_latency},
               {"cells", cells}};
}

std::string trace_to_jsonl(const std::vector<trace_event>& trace) {
   std::string out;
   for (const auto& e : trace) {
      json j{{"tick", e.tick}, {"from", e.sender}, {"to", e.recipient}, {"kind", e.kind}};
      out += j.dump();
      out += '\n';
   }
   return out;
}

json load_json_file(const std::string& path) {
   std::ifstream in(path);
   if (!in) throw config_error("cannot open " + path);
   json j;
   in >> j;
   return j;
}

void save_text_file(const std::string& path, const std::string& content) {
   std::ofstream out(path);
   if (!out) throw config_error("cannot write " + path);
   out << content;
}

}  // namespace ccirc
