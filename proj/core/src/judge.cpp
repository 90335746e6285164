#include "ccirc/judge.hpp"

#include <algorithm>

namespace ccirc {

run_judge::run_judge(std::vector<std::string> observers, tick_t gst)
    : observers_(std::move(observers)), gst_(gst) {}

void run_judge::register_tx(const std::string& id, tick_t injected, tick_t deadline) {
   txs_.push_back(tx_state{id, injected, deadline, {}, false});
   ++verdict_.judged_txs;
}

void run_judge::flag_safety(const std::string& oa, tick_t ta, const ledger& la,
                            const std::string& ob, tick_t tb, const ledger& lb) {
   if (!verdict_.safety_held) return;
   verdict_.safety_held = false;
   verdict_.safety_violation =
       safety_witness{oa, ta, la.to_string(), ob, tb, lb.to_string()};
}

void run_judge::sample(const std::string& obs, tick_t now, const ledger& out) {
   auto& st = state_[obs];

   if (verdict_.safety_held && st.last_tick >= 0 && !is_prefix(st.last, out))
      flag_safety(obs, st.last_tick, st.last, obs, now, out);

   if (verdict_.safety_held) {
      for (const auto& other : observers_) {
         if (other == obs) continue;
         auto oit = state_.find(other);
         if (oit == state_.end() || oit->second.last_tick < 0) continue;
         const ledger& theirs = oit->second.last;
         auto key = obs < other ? std::make_pair(obs, other) : std::make_pair(other, obs);
         size_t& verified = verified_prefix_[key];
         size_t common = std::min(out.size(), theirs.size());
         bool ok = true;
         for (size_t i = verified; i < common; ++i)
            if (out[i].id != theirs[i].id) {
               ok = false;
               break;
            }
         if (!ok) {
            flag_safety(obs, now, out, other, oit->second.last_tick, theirs);
            break;
         }
         verified = common;
      }
   }

   // Track ids; rebuild on the (already flagged) non-monotone path.
   if (st.last_tick >= 0 && is_prefix(st.last, out)) {
      for (size_t i = st.last.size(); i < out.size(); ++i) st.ids.insert(out[i].id);
   } else {
      st.ids.clear();
      for (const auto& tx : out.txs) st.ids.insert(tx.id);
   }
   st.last = out;
   st.last_tick = now;

   for (auto& tx : txs_) {
      if (tx.satisfied || tx.seen_by.count(obs)) continue;
      if (st.ids.count(tx.id)) {
         tx.seen_by.insert(obs);
         if (tx.seen_by.size() == observers_.size()) {
            tx.satisfied = true;
            tick_t latency = now - std::max(gst_, tx.injected);
            verdict_.worst_latency = std::max(verdict_.worst_latency, latency);
         }
      }
   }
}

void run_judge::end_tick(tick_t now) {
   if (!verdict_.liveness_held) return;
   for (const auto& tx : txs_) {
      if (tx.satisfied || tx.deadline != now) continue;
      std::string missing;
      for (const auto& obs : observers_)
         if (!tx.seen_by.count(obs)) {
            missing = obs;
            break;
         }
      verdict_.liveness_held = false;
      verdict_.liveness_violation = liveness_witness{tx.id, tx.deadline, missing};
      return;
   }
}

}  // namespace ccirc
