#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "ccirc/ledger.hpp"

namespace ccirc {

struct safety_witness {
   std::string obs_a;
   tick_t tick_a = 0;
   std::string ledger_a;
   std::string obs_b;
   tick_t tick_b = 0;
   std::string ledger_b;
};

struct liveness_witness {
   std::string tx_id;
   tick_t deadline = 0;
   std::string observer;
};

struct verdict {
   bool safety_held = true;
   std::optional<safety_witness> safety_violation;
   bool liveness_held = true;
   std::optional<liveness_witness> liveness_violation;
   tick_t worst_latency = 0;  // over judged transactions, when held
   size_t judged_txs = 0;
};

/// Online safety/liveness oracle over sampled (observer, tick) outputs:
/// per-observer monotonicity, pairwise cross-observer consistency with an
/// incremental common-prefix check, and deadline-bound transaction
/// inclusion.
class run_judge {
 public:
   run_judge(std::vector<std::string> observers, tick_t gst);

   void register_tx(const std::string& id, tick_t injected, tick_t deadline);
   void sample(const std::string& obs, tick_t now, const ledger& out);
   /// Call once per tick after all observers were sampled.
   void end_tick(tick_t now);

   const verdict& result() const { return verdict_; }

 private:
   struct obs_state {
      ledger last;
      tick_t last_tick = -1;
      std::unordered_set<std::string> ids;
   };
   struct tx_state {
      std::string id;
      tick_t injected = 0;
      tick_t deadline = 0;
      std::set<std::string> seen_by;
      bool satisfied = false;
   };

   void flag_safety(const std::string& oa, tick_t ta, const ledger& la, const std::string& ob,
                    tick_t tb, const ledger& lb);

   std::vector<std::string> observers_;
   tick_t gst_ = 0;
   std::map<std::string, obs_state> state_;
   std::map<std::pair<std::string, std::string>, size_t> verified_prefix_;
   std::vector<tx_state> txs_;
   verdict verdict_;
};

}  // namespace ccirc
