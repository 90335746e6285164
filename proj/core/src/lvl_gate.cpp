#include "ccirc/lvl_gate.hpp"

#include <algorithm>

#include "ccirc/serial_gate.hpp"

namespace ccirc {

namespace {
constexpr uint64_t kFnvOffset = 1469598103934665603ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

uint64_t mix(uint64_t h, uint64_t v) {
   for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= kFnvPrime;
   }
   return h;
}
}  // namespace

uint64_t digest_of(const overlay_block& b) {
   uint64_t h = kFnvOffset;
   h = mix(h, b.height);
   h = mix(h, b.parent);
   h = mix(h, static_cast<uint64_t>(b.epoch));
   for (const auto& tx : b.txs) {
      for (char c : tx.id) h = mix(h, static_cast<unsigned char>(c));
      h = mix(h, 0x1f);
   }
   return h ? h : 1;
}

overlay_block overlay_genesis() { return overlay_block{}; }

bool is_gate_record(const transaction& tx) {
   if (!tx.payload) return false;
   return dynamic_cast<const oft_record*>(tx.payload.get()) != nullptr ||
          dynamic_cast<const snapshot_payload*>(tx.payload.get()) != nullptr;
}

namespace {
// Overlay mempool filter: only this gate's own trace records stay out of
// proposals. Foreign gate records (snapshots bound for an enclosing
// serial carrier, another overlay's messages) are payload data that must
// flow through this protocol's ledger like any transaction.
bool own_record(const transaction& tx, const std::string& gate) {
   auto rec = dynamic_cast<const oft_record*>(tx.payload.get());
   return rec && rec->gate == gate;
}
}  // namespace

// --- oft_machine -----------------------------------------------------------

oft_machine::oft_machine(std::string gate, int n, int f, int index, tick_t epoch_len)
    : gate_(std::move(gate)), n_(n), f_(f), index_(index), epoch_len_(epoch_len) {
   blocks_[digest_of(overlay_genesis())] = overlay_genesis();
}

void oft_machine::ingest(const oft_message& msg) {
   blocks_.emplace(digest_of(msg.blk), msg.blk);
   for (const auto& t : msg.ticket) {
      blocks_.emplace(digest_of(t.blk), t.blk);
      if (t.kind == oft_kind::ack)
         acks_[{t.epoch, digest_of(t.blk)}].emplace(t.validator, t);
      else if (t.kind == oft_kind::leader_down)
         leader_downs_[t.epoch].emplace(t.validator, t);
   }
   switch (msg.kind) {
      case oft_kind::propose: {
         if (msg.validator != leader_of(msg.epoch)) return;  // not from the epoch leader
         auto& props = proposals_[msg.epoch];
         uint64_t d = digest_of(msg.blk);
         if (std::find(props.begin(), props.end(), d) == props.end()) props.push_back(d);
         break;
      }
      case oft_kind::ack:
         acks_[{msg.epoch, digest_of(msg.blk)}].emplace(msg.validator, msg);
         break;
      case oft_kind::leader_down:
         leader_downs_[msg.epoch].emplace(msg.validator, msg);
         break;
   }
   check_commits();
}

void oft_machine::check_commits() {
   for (const auto& [key, senders] : acks_) {
      if (static_cast<int>(senders.size()) < f_ + 1) continue;
      const auto& [epoch, digest] = key;
      auto props = proposals_.find(epoch);
      if (props == proposals_.end() ||
          std::find(props->second.begin(), props->second.end(), digest) == props->second.end())
         continue;
      if (committed_set_.insert(digest).second) committed_tips_.push_back(digest);
   }
}

std::optional<overlay_block> oft_machine::certified_block(int64_t epoch) const {
   std::optional<overlay_block> best;
   uint64_t best_digest = 0;
   for (const auto& [key, senders] : acks_) {
      if (key.first != epoch || static_cast<int>(senders.size()) < f_ + 1) continue;
      // Unique when the hosting chains are safe; pick deterministically otherwise.
      if (!best || key.second > best_digest) {
         best_digest = key.second;
         best = blocks_.at(key.second);
      }
   }
   return best;
}

namespace {
// Leader-down carried blocks compare by (epoch, non-genesis, digest); a
// genesis tie at epoch 0 must lose to a real epoch-0 block.
std::tuple<int64_t, int, uint64_t> ld_block_rank(const overlay_block& b) {
   return {b.epoch, b.height != 0 ? 1 : 0, digest_of(b)};
}
}  // namespace

std::optional<oft_message> oft_machine::act_enter(int64_t v,
                                                  const std::vector<transaction>& mempool) {
   if (leader_of(v) != index_ || proposed_epochs_.count(v)) return std::nullopt;

   overlay_block parent;
   std::vector<oft_message> ticket;
   if (v == 0) {
      parent = overlay_genesis();
   } else if (auto cert = certified_block(v - 1)) {
      parent = *cert;
      uint64_t d = digest_of(parent);
      for (const auto& [val, msg] : acks_.at({v - 1, d})) {
         ticket.push_back(msg);
         if (static_cast<int>(ticket.size()) == f_ + 1) break;
      }
   } else if (auto ld = leader_downs_.find(v - 1);
              ld != leader_downs_.end() && static_cast<int>(ld->second.size()) >= f_ + 1) {
      bool first = true;
      for (const auto& [val, msg] : ld->second) {
         if (static_cast<int>(ticket.size()) < f_ + 1) ticket.push_back(msg);
         if (first || ld_block_rank(msg.blk) > ld_block_rank(parent)) parent = msg.blk;
         first = false;
      }
   } else {
      return std::nullopt;  // no ticket: do not build or propose
   }

   overlay_block blk;
   blk.height = parent.height + 1;
   blk.parent = digest_of(parent);
   blk.epoch = v;
   // Outstanding transactions: everything on the hosting ledger not yet in
   // the chain being extended.
   std::set<std::string> in_chain;
   const overlay_block* cur = &parent;
   while (true) {
      for (const auto& tx : cur->txs) in_chain.insert(tx.id);
      if (cur->parent == 0) break;
      auto it = blocks_.find(cur->parent);
      if (it == blocks_.end()) break;
      cur = &it->second;
   }
   for (const auto& tx : mempool) {
      if (in_chain.count(tx.id)) continue;
      if (!blk.txs.empty() && blk.txs.back().id == tx.id) continue;
      blk.txs.push_back(tx);
   }

   proposed_epochs_.insert(v);
   return oft_message{oft_kind::propose, v, index_, std::move(blk), std::move(ticket)};
}

std::optional<oft_message> oft_machine::act_ack(int64_t v) {
   if (acked_epochs_.count(v)) return std::nullopt;
   auto props = proposals_.find(v);
   if (props == proposals_.end() || props->second.empty()) return std::nullopt;
   const overlay_block& blk = blocks_.at(props->second.front());  // first observed wins
   acked_epochs_.insert(v);
   if (v > highest_acked_.first) highest_acked_ = {v, digest_of(blk)};
   return oft_message{oft_kind::ack, v, index_, blk, {}};
}

std::optional<oft_message> oft_machine::act_leader_down(int64_t v) {
   if (ld_epochs_.count(v)) return std::nullopt;
   if (certified_block(v)) return std::nullopt;
   overlay_block carried = highest_acked_.first < 0 ? overlay_genesis()
                                                    : blocks_.at(highest_acked_.second);
   ld_epochs_.insert(v);
   return oft_message{oft_kind::leader_down, v, index_, std::move(carried), {}};
}

std::vector<std::shared_ptr<oft_record>> oft_machine::step(
    tick_t prev_ts, tick_t now, const std::vector<oft_message>& inbound,
    const std::vector<transaction>& mempool) {
   std::vector<std::shared_ptr<oft_record>> records;
   for (const auto& msg : inbound) {
      auto rec = std::make_shared<oft_record>();
      rec->gate = gate_;
      rec->inbound = true;
      rec->at = now;
      rec->msg = msg;
      ingest(msg);
      records.push_back(std::move(rec));
   }

   int64_t v = now / epoch_len_;
   tick_t enter = v * epoch_len_;
   tick_t unit = epoch_len_ / 3;
   tick_t ack_at = enter + unit;
   tick_t ld_at = enter + 2 * unit;

   auto emit = [&](std::optional<oft_message> msg) {
      if (!msg) return;
      ingest(*msg);
      auto rec = std::make_shared<oft_record>();
      rec->gate = gate_;
      rec->inbound = false;
      rec->at = now;
      rec->msg = std::move(*msg);
      records.push_back(std::move(rec));
   };

   // Act on each phase point of the current epoch that has been crossed,
   // while still inside that phase's window.
   if (enter > prev_ts && now >= enter && now < ack_at) emit(act_enter(v, mempool));
   if (ack_at > prev_ts && now >= ack_at && now < ld_at) emit(act_ack(v));
   if (ld_at > prev_ts && now >= ld_at) emit(act_leader_down(v));

   last_ts_ = now;
   return records;
}

bool oft_machine::validate_action(const oft_message& msg, tick_t at) {
   if (msg.validator != index_) return false;
   int64_t v = at / epoch_len_;
   if (msg.epoch != v) return false;
   tick_t enter = v * epoch_len_;
   tick_t unit = epoch_len_ / 3;
   switch (msg.kind) {
      case oft_kind::propose: {
         if (at >= enter + unit) return false;
         if (leader_of(v) != index_ || proposed_epochs_.count(v)) return false;
         if (v == 0) {
            if (!msg.ticket.empty()) return false;
            if (msg.blk.parent != digest_of(overlay_genesis())) return false;
         } else if (auto cert = certified_block(v - 1)) {
            if (msg.blk.parent != digest_of(*cert)) return false;
            if (static_cast<int>(msg.ticket.size()) < f_ + 1) return false;
         } else {
            // must hold and extend the maximum of f+1 leader-down messages
            auto ld = leader_downs_.find(v - 1);
            if (ld == leader_downs_.end() || static_cast<int>(ld->second.size()) < f_ + 1)
               return false;
            overlay_block best;
            bool first = true;
            for (const auto& [val, m] : ld->second) {
               if (first || ld_block_rank(m.blk) > ld_block_rank(best)) best = m.blk;
               first = false;
            }
            if (msg.blk.parent != digest_of(best)) return false;
         }
         if (msg.blk.epoch != v) return false;
         return true;
      }
      case oft_kind::ack: {
         if (at < enter + unit || at >= enter + 2 * unit) return false;
         if (acked_epochs_.count(v)) return false;
         auto props = proposals_.find(v);
         if (props == proposals_.end() || props->second.empty()) return false;
         return props->second.front() == digest_of(msg.blk);
      }
      case oft_kind::leader_down: {
         if (at < enter + 2 * unit) return false;
         if (ld_epochs_.count(v) || certified_block(v)) return false;
         overlay_block carried = highest_acked_.first < 0 ? overlay_genesis()
                                                          : blocks_.at(highest_acked_.second);
         return digest_of(msg.blk) == digest_of(carried);
      }
   }
   return false;
}

bool oft_machine::apply(const oft_record& rec) {
   if (rec.at < last_ts_) return false;  // records run in block order
   if (rec.inbound) {
      ingest(rec.msg);
      last_ts_ = rec.at;
      return true;
   }
   if (!validate_action(rec.msg, rec.at)) return false;
   int64_t v = rec.msg.epoch;
   switch (rec.msg.kind) {
      case oft_kind::propose:
         proposed_epochs_.insert(v);
         break;
      case oft_kind::ack:
         acked_epochs_.insert(v);
         if (v > highest_acked_.first) highest_acked_ = {v, digest_of(rec.msg.blk)};
         break;
      case oft_kind::leader_down:
         ld_epochs_.insert(v);
         break;
   }
   ingest(rec.msg);
   last_ts_ = rec.at;
   return true;
}

// --- leaf hosting ----------------------------------------------------------

class lvl_host_program : public chain_program {
 public:
   lvl_host_program(lvl_gate& gate, int idx) : gate_(gate), idx_(idx) {}

   std::vector<transaction> on_block(simulation& sim, int branch, tick_t now, const ledger& before,
                                     const std::vector<transaction>& block_user_txs) override {
      // Per-branch incremental state; a fresh branch (fork) replays its
      // copied prefix once. The state always equals what a client
      // replaying this ledger would compute.
      auto [it, fresh] = branches_.try_emplace(branch);
      branch_state& st = it->second;
      if (fresh) st.machine = oft_machine(gate_.id_, gate_.n_, gate_.f_, idx_, gate_.epoch_len_);
      if (st.consumed_txs > before.size()) {
         // trace shrank: cannot happen within a branch; rebuild
         st = branch_state{};
         st.machine = oft_machine(gate_.id_, gate_.n_, gate_.f_, idx_, gate_.epoch_len_);
      }
      for (size_t i = st.consumed_txs; i < before.size(); ++i) {
         const transaction& tx = before[i];
         if (st.self_ids.erase(tx.id)) continue;  // already ingested when emitted
         auto rec = std::dynamic_pointer_cast<const oft_record>(tx.payload);
         if (!rec || rec->gate != gate_.id_) {
            if (tx.payload == nullptr || !own_record(tx, gate_.id_)) st.mempool.push_back(tx);
            continue;
         }
         if (rec->inbound) ++st.inbound_seen;
         if (!st.dead && !st.machine.apply(*rec)) st.dead = true;
         st.prev_ts = rec->at;
      }
      st.consumed_txs = before.size();
      if (st.dead) return {};  // invalid trace: this instance is stalled for good

      std::vector<transaction> mempool = st.mempool;
      for (const auto& tx : block_user_txs) mempool.push_back(tx);

      auto inbound = gate_.take_inbound(idx_, static_cast<int>(st.inbound_seen), now);
      st.inbound_seen += inbound.size();
      underlay_chain* host = gate_.leaf_hosts_[idx_];
      std::erase_if(inbound, [&](const oft_message& m) {
         return host->is_deaf(branch, gate_.id_ + "/v" + std::to_string(m.validator), now);
      });
      auto records = st.machine.step(st.prev_ts, now, inbound, mempool);
      st.prev_ts = now;

      std::vector<transaction> out;
      int branches = gate_.leaf_hosts_[idx_]->branch_count();
      for (auto& rec : records) {
         if (!rec->inbound) gate_.broadcast(sim, idx_, rec->msg, now, branch, branches);
         std::string id = gate_.id_ + "/v" + std::to_string(idx_) + "#" +
                          std::to_string(gate_.rec_seq_++);
         st.self_ids.insert(id);
         out.push_back(transaction{std::move(id), std::move(rec)});
      }
      return out;
   }

 private:
   struct branch_state {
      oft_machine machine;
      size_t consumed_txs = 0;
      size_t inbound_seen = 0;
      tick_t prev_ts = -1;
      bool dead = false;
      std::vector<transaction> mempool;  // user txs seen on this branch
      std::set<std::string> self_ids;    // records emitted and already ingested
   };

   lvl_gate& gate_;
   int idx_;
   std::map<int, branch_state> branches_;
};

// --- lvl_gate ---------------------------------------------------------------

lvl_gate::lvl_gate(simulation& sim, std::string gate_id,
                   std::vector<std::shared_ptr<chain_handle>> children, int f)
    : sim_(sim), id_(std::move(gate_id)), children_(std::move(children)), f_(f) {
   n_ = static_cast<int>(children_.size());
   if (f_ < 1 || n_ != 2 * f_ + 1)
      throw config_error("lvl composition needs 2f+1 constituents: " + id_);
   for (const auto& c : children_) hop_bound_ = std::max(hop_bound_, c->latency_bound());
   epoch_len_ = 3 * hop_bound_;
   inbound_log_.resize(n_);
   inbound_cursor_.resize(n_);
   drivers_.resize(n_);
   for (int i = 0; i < n_; ++i) {
      auto* leaf = dynamic_cast<underlay_chain*>(children_[i].get());
      leaf_hosts_.push_back(leaf);
      if (leaf) {
         programs_.push_back(std::make_unique<lvl_host_program>(*this, i));
         leaf->add_program(programs_.back().get());
      } else {
         drivers_[i].machine = oft_machine(id_, n_, f_, i, epoch_len_);
         children_[i]->register_observer(id_ + "/host" + std::to_string(i));
      }
   }
}

lvl_gate::~lvl_gate() = default;

void lvl_gate::register_observer(const std::string& obs) {
   for (auto& c : children_) c->register_observer(obs);
}

void lvl_gate::submit(const transaction& tx, tick_t now) {
   for (auto& c : children_) c->submit(tx, now);
}

void lvl_gate::broadcast(simulation& sim, int from, const oft_message& msg, tick_t now, int branch,
                         int branches) {
   for (int j = 0; j < n_; ++j) {
      if (j == from) continue;
      if (branches > 1) {
         // Split-brain sender: each recipient hears exactly one fictitious
         // instance, chosen by the adversary's routing.
         std::string audience = id_ + "/ccc/v" + std::to_string(j);
         if (leaf_hosts_[from]->route_for(audience, now) != branch) continue;
      }
      tick_t latest = kNever;
      if (leaf_hosts_[from]) {
         const auto& cfg = leaf_hosts_[from]->config();
         if (cfg.live) latest = std::max(sim.net().gst, now) + (cfg.tconf - cfg.epoch);
      } else {
         latest = sim.net().latest_delivery(now);
      }
      auto payload = std::make_shared<oft_record>();
      payload->gate = id_;
      payload->at = now;
      payload->msg = msg;
      envelope env;
      env.sender = id_ + "/v" + std::to_string(from);
      env.recipient = id_ + "/v" + std::to_string(j);
      env.kind = "oft";
      env.payload = payload;
      sim.send(std::move(env), latest);
   }
}

std::vector<oft_message> lvl_gate::take_inbound(int validator, int from_count, tick_t now) {
   const auto& log = inbound_log_[validator];
   std::vector<oft_message> out;
   for (size_t i = from_count; i < log.size(); ++i) out.push_back(log[i]);
   return out;
}

void lvl_gate::step(simulation& sim, tick_t now) {
   for (int i = 0; i < n_; ++i) {
      for (auto& env : sim.drain_inbox(id_ + "/v" + std::to_string(i), now)) {
         auto rec = std::dynamic_pointer_cast<const oft_record>(env.payload);
         if (rec) inbound_log_[i].push_back(rec->msg);
      }
   }
   for (int i = 0; i < n_; ++i)
      if (!leaf_hosts_[i] && now > 0 && now % children_[i]->pace() == 0)
         drive_composite(sim, i, now);
}

void lvl_gate::drive_composite(simulation& sim, int idx, tick_t now) {
   auto& drv = drivers_[idx];
   ledger trace = children_[idx]->read(id_ + "/host" + std::to_string(idx), now).l;

   std::vector<const oft_record*> recs;
   std::vector<transaction> mempool;
   for (const auto& tx : trace.txs) {
      auto rec = std::dynamic_pointer_cast<const oft_record>(tx.payload);
      if (rec && rec->gate == id_)
         recs.push_back(rec.get());
      else
         mempool.push_back(tx);
   }
   if (recs.size() < drv.consumed) {  // reorg: rebuild from scratch
      drv.machine = oft_machine(id_, n_, f_, idx, epoch_len_);
      drv.consumed = 0;
   }
   tick_t prev_ts = -1;
   for (size_t i = drv.consumed; i < recs.size(); ++i) {
      if (!drv.machine.apply(*recs[i])) break;
      if (!recs[i]->inbound) broadcast(sim, idx, recs[i]->msg, recs[i]->at, 0, 1);
      prev_ts = recs[i]->at;
   }
   drv.consumed = recs.size();

   // Decide actions on a scratch copy fed with not-yet-recorded inbound;
   // the canonical state only ever advances through the trace.
   oft_machine scratch = drv.machine;
   auto inbound = take_inbound(idx, static_cast<int>(inbound_cursor_[idx][0]), now);
   inbound_cursor_[idx][0] += inbound.size();
   auto records = scratch.step(prev_ts, now, inbound, mempool);
   for (auto& rec : records) {
      if (!rec->inbound) {
         auto key = std::make_pair(rec->msg.epoch, static_cast<int>(rec->msg.kind));
         if (!drv.emitted.insert(key).second) continue;
      }
      children_[idx]->submit(
          transaction{id_ + "/v" + std::to_string(idx) + "#c" + std::to_string(drv.rec_seq++),
                      std::move(rec)},
          now);
   }
}

lvl_gate::replay_cursor& lvl_gate::advance_cursor(client_state& cs, int validator, int view_idx,
                                                  const ledger& trace) {
   auto& cur = cs.cursors[{validator, view_idx}];
   std::vector<std::pair<const oft_record*, const std::string*>> recs;
   for (const auto& tx : trace.txs) {
      auto rec = dynamic_cast<const oft_record*>(tx.payload.get());
      if (rec && rec->gate == id_) recs.emplace_back(rec, &tx.id);
   }
   bool same_branch = cur.initialized && recs.size() >= cur.record_ids.size();
   if (same_branch)
      for (size_t i = 0; i < cur.record_ids.size(); ++i)
         if (*recs[i].second != cur.record_ids[i]) {
            same_branch = false;
            break;
         }
   if (!same_branch) {
      cur.machine = oft_machine(id_, n_, f_, validator, epoch_len_);
      cur.initialized = true;
      cur.record_ids.clear();
      cur.consumed = 0;
      cur.dead = false;
   }
   for (size_t i = cur.consumed; i < recs.size(); ++i) {
      if (!cur.dead && !cur.machine.apply(*recs[i].first)) cur.dead = true;
      cur.record_ids.push_back(*recs[i].second);
   }
   cur.consumed = recs.size();
   return cur;
}

read_result lvl_gate::read(const std::string& observer, tick_t now) {
   auto& cs = clients_[observer];

   std::map<uint64_t, overlay_block> blocks;
   blocks[digest_of(overlay_genesis())] = overlay_genesis();
   std::map<uint64_t, int> commit_votes;
   std::vector<std::vector<uint64_t>> tips_by_validator(n_);

   for (int i = 0; i < n_; ++i) {
      auto views = children_[i]->read_all(observer, now);
      for (size_t vi = 0; vi < views.size(); ++vi) {
         auto& cur = advance_cursor(cs, i, static_cast<int>(vi), views[vi].l);
         for (const auto& [d, b] : cur.machine.known_blocks()) blocks.emplace(d, b);
         for (uint64_t tip : cur.machine.committed_tips()) tips_by_validator[i].push_back(tip);
      }
   }
   for (int i = 0; i < n_; ++i) {
      // prefix closure over the union of known blocks: a committed tip
      // commits its whole chain
      std::set<uint64_t> committed_by_i;
      for (uint64_t tip : tips_by_validator[i]) {
         uint64_t d = tip;
         while (committed_by_i.insert(d).second) {
            auto it = blocks.find(d);
            if (it == blocks.end() || it->second.parent == 0) break;
            d = it->second.parent;
         }
      }
      for (uint64_t d : committed_by_i) ++commit_votes[d];
   }

   // Longest block committed by f+1 or more validators, fully resolvable
   // back to genesis. Ties break by (epoch, digest).
   const overlay_block* best = nullptr;
   uint64_t best_digest = 0;
   for (const auto& [d, votes] : commit_votes) {
      if (votes < f_ + 1) continue;
      auto it = blocks.find(d);
      if (it == blocks.end() || it->second.height == 0) continue;
      // chain must be known down to genesis
      const overlay_block* cur = &it->second;
      bool resolvable = true;
      while (cur->parent != 0) {
         auto pit = blocks.find(cur->parent);
         if (pit == blocks.end()) {
            resolvable = false;
            break;
         }
         cur = &pit->second;
      }
      if (!resolvable) continue;
      const overlay_block& cand = it->second;
      if (!best || std::tie(cand.height, cand.epoch, d) >
                       std::tie(best->height, best->epoch, best_digest)) {
         best = &cand;
         best_digest = d;
      }
   }

   if (best) {
      std::vector<const overlay_block*> chain;
      const overlay_block* cur = best;
      while (true) {
         chain.push_back(cur);
         if (cur->parent == 0) break;
         cur = &blocks.at(cur->parent);
      }
      ledger out;
      for (auto it = chain.rbegin(); it != chain.rend(); ++it)
         out = clean(out, ledger{(*it)->txs});
      cs.out = merge_monotone(cs.out, out);
      cs.out_height = std::max<uint64_t>(cs.out_height, best->height);
   }
   return read_result{cs.out, sim_.certs().issue(id_, digest_of(cs.out))};
}

}  // namespace ccirc
