#include "ccirc/underlay.hpp"

#include <algorithm>

namespace ccirc {

void chain_config::validate() const {
   if (id.empty()) throw config_error("chain id must not be empty");
   if (epoch < 1) throw config_error("chain epoch must be >= 1: " + id);
   if (tconf < epoch) throw config_error("chain tconf must be >= epoch: " + id);
   if (max_branches < 1) throw config_error("max_branches must be >= 1: " + id);
}

underlay_chain::underlay_chain(simulation& sim, chain_config cfg) : sim_(sim), cfg_(cfg) {
   cfg_.validate();
   branches_.emplace_back();
}

void underlay_chain::submit(const transaction& tx, tick_t now) {
   if (tx.id.empty()) throw contract_violation("transaction id must not be empty");
   if (!seen_ids_.insert(tx.id).second) {
      sim_.log_event(now, "env", cfg_.id, "reject-duplicate:" + tx.id);
      return;
   }
   mempool_.push_back(pending_tx{tx, now});
}

void underlay_chain::add_program(chain_program* prog) { programs_.push_back(prog); }

void underlay_chain::submit_record(const transaction& tx, int branch,
                                   const std::string& replace_key) {
   auto& recs = branches_[branch].records;
   if (!replace_key.empty())
      std::erase_if(recs, [&](const pending_record& r) { return r.replace_key == replace_key; });
   recs.push_back(pending_record{tx, replace_key});
}

int underlay_chain::fork_branch(int parent_branch, uint64_t at_height, bool divergence_marker) {
   if (cfg_.safe && cfg_.certificates)
      throw contract_violation("fork_branch on a safe certificate-generating chain: " + cfg_.id);
   if (branch_count() >= cfg_.max_branches)
      throw contract_violation("branch cap reached on " + cfg_.id);
   if (parent_branch < 0 || parent_branch >= branch_count())
      throw contract_violation("fork_branch: no such branch");
   const auto& parent = branches_[parent_branch];
   at_height = std::min<uint64_t>(at_height, parent.blocks.size());

   branch_state child;
   child.blocks.assign(parent.blocks.begin(), parent.blocks.begin() + at_height);
   child.cum_txs.assign(parent.cum_txs.begin(), parent.cum_txs.begin() + at_height);
   size_t keep = at_height ? child.cum_txs.back() : 0;
   child.flat = parent.flat.prefix(keep);
   for (const auto& tx : child.flat.txs) child.included_ids.insert(tx.id);
   branches_.push_back(std::move(child));
   int idx = branch_count() - 1;

   if (divergence_marker) {
      // Guarantees the new branch conflicts beyond the fork point even if
      // the adversary replays the same pending txs.
      transaction marker{cfg_.id + "#fork" + std::to_string(idx), nullptr};
      branches_[idx].records.push_back(pending_record{marker, ""});
   }
   sim_.log_event(sim_.now(), cfg_.id, cfg_.id, "fork@" + std::to_string(at_height));
   return idx;
}

void underlay_chain::set_stall(const std::vector<std::string>& observers, tick_t from,
                               tick_t until, int branch) {
   if (cfg_.live && until > sim_.net().gst)
      throw contract_violation("post-GST stall on a live chain: " + cfg_.id);
   for (const auto& obs : observers) stalls_[obs].push_back(stall_window{from, until, branch});
}

void underlay_chain::expose_branches(const std::string& observer, std::vector<int> branches) {
   exposures_[observer] = std::move(branches);
}

void underlay_chain::route_observer(const std::string& observer, int branch, tick_t from_tick) {
   auto& timeline = routes_[observer];
   timeline.emplace_back(from_tick, branch);
   std::sort(timeline.begin(), timeline.end());
}

void underlay_chain::set_deaf(int branch, const std::string& prefix, tick_t until) {
   if (cfg_.safe && cfg_.certificates)
      throw contract_violation("set_deaf on a safe certificate-generating chain: " + cfg_.id);
   deaf_.push_back(deaf_rule{branch, prefix, until});
}

bool underlay_chain::is_deaf(int branch, const std::string& sender, tick_t now) const {
   for (const auto& d : deaf_)
      if (d.branch == branch && now <= d.until && sender.rfind(d.prefix, 0) == 0) return true;
   return false;
}

void underlay_chain::withhold_tx(const std::string& tx_id, int branch) {
   if (cfg_.live && cfg_.safe && cfg_.certificates)
      throw contract_violation("withhold_tx on a safe live chain: " + cfg_.id);
   withheld_[tx_id].insert(branch);
}

int underlay_chain::longest_branch() const {
   int best = 0;
   for (int b = 1; b < branch_count(); ++b)
      if (branches_[b].blocks.size() > branches_[best].blocks.size()) best = b;
   return best;
}

int underlay_chain::routed_branch(const std::string& observer, tick_t now) {
   if (branch_count() == 1) return 0;
   if (auto it = routes_.find(observer); it != routes_.end()) {
      int branch = -1;
      for (const auto& [from, b] : it->second)
         if (now >= from) branch = b;
      if (branch >= 0) return std::min(branch, branch_count() - 1);
   }
   if (cfg_.safe) return longest_branch();  // non-certificate safe chain: unanimous reads
   auto it = branch_latch_.find(observer);
   if (it == branch_latch_.end()) {
      int b = sim_.adv().branch_for(cfg_.id, observer, now, branch_count());
      it = branch_latch_.emplace(observer, std::min(b, branch_count() - 1)).first;
   }
   return std::min(it->second, branch_count() - 1);
}

void underlay_chain::step(simulation& sim, tick_t now) {
   if (!cfg_.safe || !cfg_.certificates) {
      if (auto h = sim.adv().fork_request(cfg_.id, now, branch_count(),
                                          branches_[0].blocks.size());
          h && branch_count() < cfg_.max_branches && !(cfg_.safe && cfg_.certificates)) {
         fork_branch(0, *h);
      }
   }
   if (now <= 0 || now % cfg_.epoch != 0) return;
   for (int b = 0; b < branch_count(); ++b) produce(sim, b, now);
}

void underlay_chain::produce(simulation& sim, int branch, tick_t now) {
   bool canonical = branch == 0;
   // A live split-brain chain keeps every branch individually live; a live
   // safe chain has only its canonical branch to keep.
   bool must = cfg_.live && now >= sim.net().gst && (canonical || !cfg_.safe);
   if (!must && !sim.adv().produce_block(cfg_.id, branch, now, must)) return;
   // A safe non-certificate chain keeps its canonical branch longest so
   // direct reads stay unanimous; side forks may only trail it.
   if (!canonical && cfg_.safe &&
       branches_[branch].blocks.size() + 1 >= branches_[0].blocks.size())
      return;

   auto& st = branches_[branch];
   block blk;
   blk.height = st.blocks.size() + 1;
   blk.parent = st.blocks.empty() ? 0 : digest_of(st.blocks.back());
   blk.timestamp = now;

   // Gate records go in first: a freshly forked branch diverges at its
   // marker before any shared pending transactions follow.
   for (auto& rec : st.records) {
      blk.txs.push_back(rec.tx);
      st.included_ids.insert(rec.tx.id);
   }
   st.records.clear();
   std::vector<transaction> user_txs;
   for (auto& p : mempool_) {
      if (st.included_ids.count(p.tx.id)) continue;
      auto wh = withheld_.find(p.tx.id);
      if (wh != withheld_.end() && (wh->second.count(-1) || wh->second.count(branch))) continue;
      bool tx_must = cfg_.live && now >= std::max(sim.net().gst, p.submitted);
      if (!tx_must && !sim.adv().include_tx(cfg_.id, branch, p.tx.id, now, tx_must)) continue;
      blk.txs.push_back(p.tx);
      user_txs.push_back(p.tx);
      st.included_ids.insert(p.tx.id);
   }
   for (auto* prog : programs_) {
      auto recs = prog->on_block(sim, branch, now, st.flat, user_txs);
      for (auto& r : recs) {
         st.included_ids.insert(r.id);
         blk.txs.push_back(std::move(r));
      }
   }

   for (const auto& tx : blk.txs) st.flat.txs.push_back(tx);
   st.cum_txs.push_back(st.flat.size());
   sim.log_event(now, cfg_.id, cfg_.id,
                 "block@" + std::to_string(blk.height) +
                     (branch ? "/b" + std::to_string(branch) : ""));
   st.blocks.push_back(std::move(blk));
}

size_t underlay_chain::released_blocks(const std::string& observer, int branch, tick_t now) {
   auto& memo = release_memo_[{observer, branch}];
   const auto& st = branches_[branch];
   while (memo.size() < st.blocks.size()) {
      const block& blk = st.blocks[memo.size()];
      tick_t latest = cfg_.live
                          ? std::max(sim_.net().gst, blk.timestamp) + (cfg_.tconf - cfg_.epoch)
                          : kNever;
      tick_t rel = sim_.adv().release_tick(cfg_.id, branch, blk.height, observer, blk.timestamp,
                                           latest);
      rel = std::clamp(rel, blk.timestamp, latest);
      // Scripted stall windows defer releases falling inside them.
      if (auto it = stalls_.find(observer); it != stalls_.end())
         for (const auto& w : it->second)
            if ((w.branch < 0 || w.branch == branch) && rel >= w.from && rel <= w.until)
               rel = w.until + 1;
      if (!memo.empty()) rel = std::max(rel, memo.back());  // views grow in order
      memo.push_back(rel);
   }
   size_t n = 0;
   while (n < memo.size() && memo[n] <= now) ++n;
   return n;
}

ledger underlay_chain::view_of(const std::string& observer, int branch, tick_t now) {
   size_t blocks = released_blocks(observer, branch, now);
   const auto& st = branches_[branch];
   size_t txs = blocks ? st.cum_txs[blocks - 1] : 0;
   return st.flat.prefix(txs);
}

read_result underlay_chain::read(const std::string& observer, tick_t now) {
   int branch = routed_branch(observer, now);
   ledger l = view_of(observer, branch, now);
   certificate cert;
   if (cfg_.certificates) cert = sim_.certs().issue(cfg_.id, digest_of(l));
   return read_result{std::move(l), cert};
}

std::vector<read_result> underlay_chain::read_all(const std::string& observer, tick_t now) {
   std::vector<int> branches;
   if (auto it = exposures_.find(observer); it != exposures_.end()) {
      branches = it->second;
   } else if (branch_count() > 1 && !cfg_.safe) {
      // Conflicting certified views circulate: every branch reaches the
      // observer at its own released prefix.
      for (int b = 0; b < branch_count(); ++b) branches.push_back(b);
   }
   if (branches.empty()) return {read(observer, now)};
   std::vector<read_result> out;
   for (int b : branches) {
      if (b < 0 || b >= branch_count()) continue;
      ledger l = view_of(observer, b, now);
      certificate cert;
      if (cfg_.certificates) cert = sim_.certs().issue(cfg_.id, digest_of(l));
      out.push_back(read_result{std::move(l), cert});
   }
   if (out.empty()) out.push_back(read(observer, now));
   return out;
}

read_result underlay_chain::read_snapshot(const std::string& observer, tick_t now) {
   if (cfg_.certificates) return read(observer, now);
   // Non-certificate chain: the embedder can be fed any fork, and there is
   // no certificate to pin what it saw.
   int branch = 0;
   if (branch_count() > 1) {
      branch = -1;
      if (auto it = routes_.find(observer); it != routes_.end())
         for (const auto& [from, b] : it->second)
            if (now >= from) branch = b;
      if (branch < 0)
         branch = sim_.adv().branch_for(cfg_.id, observer, now, branch_count());
      branch = std::min(branch, branch_count() - 1);
   }
   return read_result{view_of(observer, branch, now), certificate{}};
}

}  // namespace ccirc
