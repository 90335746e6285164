#include <CLI11.hpp>

#include <iostream>

#include "ccirc/attacks.hpp"
#include "ccirc/circuits.hpp"
#include "ccirc/json_io.hpp"
#include "ccirc/scenario.hpp"
#include "ccirc/sweep.hpp"

using namespace ccirc;

namespace {

// Exit codes: 0 success / verdicts as predicted, 1 verdict mismatch,
// 2 usage or configuration error.
constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kUsage = 2;

uint64_t config_hash(const std::vector<std::string>& parts, uint64_t seed) {
   uint64_t h = 1469598103934665603ull ^ seed;
   for (const auto& p : parts) {
      for (char c : p) h = (h ^ static_cast<uint64_t>(static_cast<unsigned char>(c))) *
                           1099511628211ull;
      h = (h ^ 0x1f) * 1099511628211ull;
   }
   return h;
}

std::vector<int> parse_tuple(const std::string& s, size_t n) {
   std::vector<int> out;
   std::string cur;
   for (char c : s) {
      if (c == ',') {
         out.push_back(std::stoi(cur));
         cur.clear();
      } else {
         cur += c;
      }
   }
   if (!cur.empty()) out.push_back(std::stoi(cur));
   if (out.size() != n)
      throw config_error("expected " + std::to_string(n) + " comma-separated integers: " + s);
   return out;
}

void emit(const json& j, const std::string& out_path, bool table, const std::string& rendered) {
   std::string text = table && !rendered.empty() ? rendered : j.dump(2) + "\n";
   if (out_path.empty())
      std::cout << text;
   else
      save_text_file(out_path, text);
}

}  // namespace

int main(int argc, char** argv) {
   CLI::App app{"blockchain circuit synthesis and adversarial simulation"};
   app.require_subcommand(1);

   std::string ksl, kslb, general_path, mode = "psync", out_path, format = "json";
   std::string scenario_path, circuit_path, dom_a, dom_b, attack_name;
   uint64_t seed = 1;
   int k = 3, seeds_per_cell = 20, parallelism = 1;
   std::vector<tick_t> gsts{0};
   tick_t epoch = 2, tconf = 4;
   bool run_attacks = false;
   int max_k = kDefaultSynthesisCap;

   auto add_common = [&](CLI::App* cmd) {
      cmd->add_option("--out", out_path, "write the report to this file instead of stdout");
      cmd->add_option("--format", format)->check(CLI::IsMember({"json", "table"}));
   };

   auto* synth = app.add_subcommand("synth", "synthesize a circuit for a target guarantee");
   synth->add_option("--ksl", ksl, "k,s,l tuple");
   synth->add_option("--general", general_path, "characterization JSON file");
   synth->add_option("--mode", mode)->check(CLI::IsMember({"psync", "sync"}));
   synth->add_option("--max-k", max_k, "materialization cap");
   add_common(synth);

   auto* check = app.add_subcommand("check", "decide achievability of a guarantee");
   check->add_option("--ksl", ksl, "k,s,l tuple (partial synchrony)");
   check->add_option("--sync", kslb, "k,s,l,b tuple (synchrony)");
   check->add_option("--general", general_path, "characterization JSON file");
   check->add_option("--mode", mode)->check(CLI::IsMember({"psync", "sync"}));
   add_common(check);

   auto* run = app.add_subcommand("run", "run one scenario file");
   run->add_option("scenario", scenario_path, "scenario JSON file")->required();
   run->add_option("--seed", seed, "override the scenario seed");
   run->add_option("--trace", circuit_path, "write the event trace (JSON lines) to this path");
   add_common(run);

   auto* sw = app.add_subcommand("sweep", "sweep all fault assignments of a circuit");
   sw->add_option("--circuit", circuit_path, "circuit JSON file")->required();
   sw->add_option("--mode", mode)->check(CLI::IsMember({"psync", "sync"}));
   sw->add_option("--seeds", seeds_per_cell, "randomized schedules per cell");
   sw->add_option("--gst", gsts, "GST values to sweep");
   sw->add_option("--epoch", epoch, "underlay epoch duration");
   sw->add_option("--tconf", tconf, "underlay confirmation latency");
   sw->add_option("--seed", seed, "base seed");
   sw->add_option("--parallel", parallelism, "cells run in parallel");
   add_common(sw);

   auto* pareto = app.add_subcommand("pareto", "enumerate the pareto-optimal family");
   pareto->add_option("--k", k, "number of underlay chains")->required();
   pareto->add_option("--mode", mode)->check(CLI::IsMember({"psync", "sync"}));
   add_common(pareto);

   auto* dom = app.add_subcommand("dominates", "compare two characterizations");
   dom->add_option("a", dom_a, "characterization JSON file")->required();
   dom->add_option("b", dom_b, "characterization JSON file")->required();
   add_common(dom);

   auto* attacks = app.add_subcommand("attacks", "list or run the scripted attack library");
   attacks->add_option("--name", attack_name, "run only this attack");
   attacks->add_flag("--run", run_attacks, "execute the attacks and report verdicts");
   attacks->add_option("--seed", seed, "seed echoed into reports");
   add_common(attacks);

   CLI11_PARSE(app, argc, argv);

   std::vector<std::string> argv_parts(argv, argv + argc);
   net_mode nmode = mode == "sync" ? net_mode::synchrony : net_mode::partial_synchrony;

   try {
      if (synth->parsed()) {
         circuit_node node = circuit_node::leaf(1);
         json req;
         if (!ksl.empty()) {
            auto t = parse_tuple(ksl, 3);
            node = synthesize_ksl(t[0], t[1], t[2], std::max(max_k, t[0]));
            req = json{{"ksl", ksl}};
         } else if (!general_path.empty()) {
            auto c = characterization_from_json(load_json_file(general_path));
            if (c.mode != characterization::mode_t::general)
               throw config_error("synth --general expects a general-mode characterization");
            node = nmode == net_mode::synchrony
                       ? synthesize_general_sync(c.es, c.el, c.k, std::max(max_k, c.k))
                       : synthesize_general_psync(c.es, c.el, c.k, std::max(max_k, c.k));
            req = json{{"general", general_path}};
         } else {
            std::cerr << "synth needs --ksl or --general\n";
            return kUsage;
         }
         auto predicted = predicted_properties(node, nmode);
         json j{{"request", req},
                {"mode", mode},
                {"circuit", circuit_to_json(node)},
                {"circuit_text", node.to_string()},
                {"predicted", characterization_to_json(predicted)},
                {"config_hash", config_hash(argv_parts, seed)}};
         emit(j, out_path, format == "table", node.to_string() + "\n");
         return kOk;
      }

      if (check->parsed()) {
         json j{{"config_hash", config_hash(argv_parts, seed)}};
         if (!ksl.empty()) {
            auto t = parse_tuple(ksl, 3);
            bool ok = achievable_ksl(t[0], t[1], t[2]);
            j["achievable"] = ok;
            if (!ok) {
               int kk = t[0], s = t[1], l = t[2];
               if (l < kk / 2 + 1)
                  j["reason"] = "l=" + std::to_string(l) + " < floor(k/2)+1=" +
                                std::to_string(kk / 2 + 1);
               else if (l > kk)
                  j["reason"] = "l > k";
               else
                  j["reason"] = "s=" + std::to_string(s) + " < 2(k-l)+1=" +
                                std::to_string(2 * (kk - l) + 1);
            }
         } else if (!kslb.empty()) {
            auto t = parse_tuple(kslb, 4);
            j["achievable"] = achievable_sync(t[0], t[1], t[2], t[3]);
         } else if (!general_path.empty()) {
            auto c = characterization_from_json(load_json_file(general_path));
            auto reason = nmode == net_mode::synchrony
                              ? check_general_sync_reason(c.es, c.el, c.k)
                              : check_general_psync(c.es, c.el, c.k);
            j["achievable"] = !reason.has_value();
            if (reason) j["reason"] = *reason;
         } else {
            std::cerr << "check needs --ksl, --sync or --general\n";
            return kUsage;
         }
         std::string line = std::string(j["achievable"].get<bool>() ? "achievable" : "unachievable");
         if (j.contains("reason")) line += ": " + j["reason"].get<std::string>();
         emit(j, out_path, format == "table", line + "\n");
         return kOk;
      }

      if (run->parsed()) {
         auto sc = scenario_from_json(load_json_file(scenario_path));
         if (run->count("--seed")) sc.seed = seed;
         bool keep_trace = !circuit_path.empty();
         auto r = run_scenario(sc, keep_trace);
         if (keep_trace) save_text_file(circuit_path, trace_to_jsonl(r.trace));
         json j = run_result_to_json(r);
         j["scenario"] = sc.name;
         j["seed"] = sc.seed;
         j["config_hash"] = config_hash(argv_parts, sc.seed);
         emit(j, out_path, false, "");
         return r.contradicts_prediction() ? kMismatch : kOk;
      }

      if (sw->parsed()) {
         auto node = circuit_from_json(load_json_file(circuit_path));
         sweep_options opts;
         opts.seeds_per_cell = seeds_per_cell;
         opts.gst_values = gsts;
         opts.mode = nmode;
         opts.epoch = epoch;
         opts.tconf = tconf;
         opts.base_seed = seed;
         opts.parallelism = parallelism;
         auto res = sweep(node, opts);
         json j = sweep_to_json(res);
         j["config_hash"] = config_hash(argv_parts, seed);
         emit(j, out_path, format == "table", res.to_table());
         return res.contradictions ? kMismatch : kOk;
      }

      if (pareto->parsed()) {
         json arr = json::array();
         std::string table;
         for (const auto& c : pareto_set(k, nmode)) {
            arr.push_back(characterization_to_json(c));
            table += characterization_to_json(c).dump() + "\n";
         }
         json j{{"k", k}, {"mode", mode}, {"family", arr},
                {"config_hash", config_hash(argv_parts, seed)}};
         emit(j, out_path, format == "table", table);
         return kOk;
      }

      if (dom->parsed()) {
         auto a = characterization_from_json(load_json_file(dom_a));
         auto b = characterization_from_json(load_json_file(dom_b));
         json j{{"a_dominates_b", dominates(a, b)},
                {"b_dominates_a", dominates(b, a)},
                {"config_hash", config_hash(argv_parts, seed)}};
         emit(j, out_path, format == "table",
              std::string(j["a_dominates_b"].get<bool>() ? "a>=b" : "a!>=b") + " " +
                  (j["b_dominates_a"].get<bool>() ? "b>=a" : "b!>=a") + "\n");
         return kOk;
      }

      if (attacks->parsed()) {
         json arr = json::array();
         bool all_as_expected = true;
         std::string table;
         for (auto& atk : attack_library()) {
            if (!attack_name.empty() && atk.name != attack_name) continue;
            json e{{"name", atk.name}, {"description", atk.description},
                   {"seed", atk.sc.seed}};
            if (run_attacks) {
               auto r = run_scenario(atk.sc);
               e["verdict"] = verdict_to_json(r.v);
               bool as_expected = atk.expect_safety_violation == !r.v.safety_held;
               e["as_expected"] = as_expected;
               all_as_expected = all_as_expected && as_expected;
               table += atk.name + ": " + (r.v.safety_held ? "safety held" : "safety violated") +
                        (as_expected ? "" : "  << UNEXPECTED") + "\n";
            } else {
               table += atk.name + ": " + atk.description + "\n";
            }
            arr.push_back(std::move(e));
         }
         if (arr.empty()) {
            std::cerr << "no attack named " << attack_name << "\n";
            return kUsage;
         }
         json j{{"attacks", arr}, {"config_hash", config_hash(argv_parts, seed)}};
         emit(j, out_path, format == "table", table);
         return run_attacks && !all_as_expected ? kMismatch : kOk;
      }
   } catch (const config_error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kUsage;
   } catch (const contract_violation& e) {
      std::cerr << "contract violation: " << e.what() << "\n";
      return kUsage;
   }
   return kUsage;
}
