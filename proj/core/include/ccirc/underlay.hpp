#pragma once

#include <map>
#include <optional>
#include <set>

#include "ccirc/chain.hpp"
#include "ccirc/simnet.hpp"

namespace ccirc {

struct chain_config {
   std::string id;
   tick_t epoch = 1;  // T: one block per epoch ticks
   tick_t tconf = 2;  // liveness latency bound when live
   bool safe = true;
   bool live = true;
   bool certificates = true;
   int max_branches = 4;

   void validate() const;
};

/// A smart contract hosted on a chain: invoked once per produced block,
/// per branch, and returns record transactions appended to that block.
class chain_program {
 public:
   virtual ~chain_program() = default;
   virtual std::vector<transaction> on_block(simulation& sim, int branch, tick_t now,
                                             const ledger& before,
                                             const std::vector<transaction>& block_user_txs) = 0;
};

/// Simulated underlay blockchain. Produces blocks in epochs of fixed
/// duration, issues certificates through the registry, and realizes its
/// (safe, live) fault budget under adversary control:
///   - safe:  a single canonical branch; all reads are consistent prefixes.
///   - !safe: fork_branch creates split-brain branches, each individually
///            certified; observers are routed per branch.
///   - live:  every submitted tx reaches every observer's view by
///            max(gst, t) + tconf; releases and production are clamped.
///   - !live: production and view release are unconstrained.
class underlay_chain : public chain_handle, public actor {
 public:
   underlay_chain(simulation& sim, chain_config cfg);

   // chain_handle
   const std::string& id() const override { return cfg_.id; }
   bool generates_certificates() const override { return cfg_.certificates; }
   tick_t pace() const override { return cfg_.epoch; }
   tick_t latency_bound() const override { return cfg_.tconf; }
   void submit(const transaction& tx, tick_t now) override;
   read_result read(const std::string& observer, tick_t now) override;
   std::vector<read_result> read_all(const std::string& observer, tick_t now) override;
   read_result read_snapshot(const std::string& observer, tick_t now) override;

   // fault injection
   int fork_branch(int parent_branch, uint64_t at_height, bool divergence_marker = true);
   /// Freeze these observers' views in [from, until]; branch -1 = all.
   void set_stall(const std::vector<std::string>& observers, tick_t from, tick_t until,
                  int branch = -1);
   void expose_branches(const std::string& observer, std::vector<int> branches);
   /// Pin an observer to a branch from `from_tick` on (scripted routing).
   void route_observer(const std::string& observer, int branch, tick_t from_tick);
   /// A fictitious instance on `branch` never ingests messages from
   /// senders matching `prefix` while now <= until (split-brain omission).
   void set_deaf(int branch, const std::string& prefix, tick_t until);
   bool is_deaf(int branch, const std::string& sender, tick_t now) const;
   /// Scripted withholding: the tx never enters blocks of the given branch
   /// (-1: all branches). Allowed while not live (omission) or not safe
   /// (split-brain instances see different mempools).
   void withhold_tx(const std::string& tx_id, int branch);

   // contract hosting (several gates may share one chain)
   void add_program(chain_program* prog);
   /// Append a gate record to the next block of one branch, replacing any
   /// pending record with the same replace_key (empty: no replacement).
   void submit_record(const transaction& tx, int branch, const std::string& replace_key);
   /// Branch this observer is currently routed to.
   int route_for(const std::string& observer, tick_t now) { return routed_branch(observer, now); }

   // actor
   void step(simulation& sim, tick_t now) override;

   int branch_count() const { return static_cast<int>(branches_.size()); }
   uint64_t head_height(int branch) const { return branches_[branch].blocks.size(); }
   const ledger& branch_ledger(int branch) const { return branches_[branch].flat; }
   const chain_config& config() const { return cfg_; }

 private:
   struct pending_tx {
      transaction tx;
      tick_t submitted = 0;
   };
   struct pending_record {
      transaction tx;
      std::string replace_key;
   };
   struct branch_state {
      std::vector<block> blocks;
      std::vector<size_t> cum_txs;  // cumulative tx count per block
      ledger flat;
      std::set<std::string> included_ids;
      std::vector<pending_record> records;
   };
   struct stall_window {
      tick_t from = 0;
      tick_t until = 0;
      int branch = -1;
   };
   struct deaf_rule {
      int branch = 0;
      std::string prefix;
      tick_t until = 0;
   };

   void produce(simulation& sim, int branch, tick_t now);
   // Number of blocks of `branch` visible to `observer` at `now`.
   size_t released_blocks(const std::string& observer, int branch, tick_t now);
   ledger view_of(const std::string& observer, int branch, tick_t now);
   int routed_branch(const std::string& observer, tick_t now);
   int longest_branch() const;

   simulation& sim_;
   chain_config cfg_;
   std::vector<branch_state> branches_;
   std::vector<pending_tx> mempool_;
   std::set<std::string> seen_ids_;
   std::map<std::string, std::set<int>> withheld_;  // tx -> branches (-1 = all)
   std::vector<chain_program*> programs_;
   // (observer, branch) -> memoized release tick per height
   std::map<std::pair<std::string, int>, std::vector<tick_t>> release_memo_;
   std::map<std::string, std::vector<stall_window>> stalls_;
   // observer -> scripted routing timeline [(from, branch)...]
   std::map<std::string, std::vector<std::pair<tick_t, int>>> routes_;
   // Unscripted observers latch onto one branch at first exposure; forks
   // happen at the head, so the latched branch extends their history.
   std::map<std::string, int> branch_latch_;
   std::map<std::string, std::vector<int>> exposures_;
   std::vector<deaf_rule> deaf_;
};

}  // namespace ccirc
