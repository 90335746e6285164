#include "ccirc/lvs_gate.hpp"

#include <algorithm>
#include <unordered_set>

namespace ccirc {

lvs_gate::lvs_gate(simulation& sim, std::string gate_id, std::shared_ptr<chain_handle> a,
                   std::shared_ptr<chain_handle> b)
    : sim_(sim), id_(std::move(gate_id)), a_(std::move(a)), b_(std::move(b)) {
   pace_ = std::max(a_->pace(), b_->pace());
   lookback_ = std::max(a_->latency_bound(), b_->latency_bound());
   if (sim_.net().mode == net_mode::partial_synchrony)
      sim_.log_event(0, id_, id_, "warn:lvs-under-partial-synchrony");
}

void lvs_gate::register_observer(const std::string& obs) {
   a_->register_observer(obs);
   b_->register_observer(obs);
   tick_t start = std::max<tick_t>(sim_.now(), 0);
   auto [it, fresh] = rings_.try_emplace(obs);
   if (fresh) {
      it->second.online_since = start;
      it->second.first_tick = start;
   }
}

void lvs_gate::submit(const transaction& tx, tick_t now) {
   a_->submit(tx, now);
   b_->submit(tx, now);
}

void lvs_gate::ensure_entry(ring& r, const std::string& obs, tick_t now) {
   while (r.first_tick + static_cast<tick_t>(r.entries.size()) <= now) {
      tick_t t = r.first_tick + static_cast<tick_t>(r.entries.size());
      // Ticks missed while the ring was not sampled are filled with the
      // current view; only reachable for observers appearing mid-run.
      (void)t;
      r.entries.push_back(view_pair{a_->read(obs, now).l, b_->read(obs, now).l});
   }
   while (r.first_tick + lookback_ < now && r.entries.size() > static_cast<size_t>(lookback_) + 1) {
      r.entries.pop_front();
      ++r.first_tick;
   }
}

void lvs_gate::step(simulation&, tick_t now) {
   for (auto& [obs, r] : rings_) ensure_entry(r, obs, now);
}

read_result lvs_gate::read(const std::string& observer, tick_t now) {
   auto it = rings_.find(observer);
   if (it == rings_.end()) {
      register_observer(observer);
      it = rings_.find(observer);
   }
   ring& r = it->second;
   ensure_entry(r, observer, now);

   auto entry_at = [&](tick_t t) -> const view_pair& {
      return r.entries[static_cast<size_t>(t - r.first_tick)];
   };

   auto finish = [&](ledger out) {
      return read_result{std::move(out), sim_.certs().issue(id_, digest_of(out))};
   };

   if (now - r.online_since < lookback_ || now - lookback_ < r.first_tick)
      return finish(ledger{});

   const view_pair& cur = entry_at(now);
   const view_pair& lag = entry_at(now - lookback_);

   auto subset_of = [](const ledger& small, const ledger& big) {
      std::unordered_set<std::string_view> ids;
      ids.reserve(big.size());
      for (const auto& tx : big.txs) ids.insert(tx.id);
      for (const auto& tx : small.txs)
         if (!ids.count(tx.id)) return false;
      return true;
   };

   size_t ell = std::min(lag.a.size(), lag.b.size());
   ell = std::min({ell, cur.a.size(), cur.b.size()});
   bool cond = subset_of(lag.a, cur.b) && subset_of(lag.b, cur.a);

   ledger out = interleave(cur.a.prefix(ell), cur.b.prefix(ell));
   if (!cond) {
      const ledger& longer = lag.a.size() >= lag.b.size() ? cur.a : cur.b;  // tie: A
      for (size_t i = ell; i < longer.size(); ++i) out.txs.push_back(longer[i]);
   }
   auto& prev = outputs_[observer];
   prev = merge_monotone(prev, out);
   return finish(prev);
}

}  // namespace ccirc
