#pragma once

#include <deque>
#include <map>
#include <memory>

#include "ccirc/chain.hpp"
#include "ccirc/simnet.hpp"

namespace ccirc {

/// Synchronous parallel composition of two chains: transactions broadcast
/// to both; a client online for at least the lookback interleaves the two
/// ledgers, falling back to the longer lagged ledger's tail when the
/// cross-inclusion condition fails.
///
/// Safe if both constituents are safe and live; live within 2x the child
/// bound if either is live. The raw output may carry positional duplicates;
/// downstream consumers sanitize.
class lvs_gate : public chain_handle, public actor {
 public:
   lvs_gate(simulation& sim, std::string gate_id, std::shared_ptr<chain_handle> a,
            std::shared_ptr<chain_handle> b);

   const std::string& id() const override { return id_; }
   bool generates_certificates() const override {
      return a_->generates_certificates() && b_->generates_certificates();
   }
   tick_t pace() const override { return pace_; }
   tick_t latency_bound() const override { return 2 * lookback_; }
   void register_observer(const std::string& obs) override;
   void submit(const transaction& tx, tick_t now) override;
   read_result read(const std::string& observer, tick_t now) override;

   void step(simulation& sim, tick_t now) override;

   tick_t lookback() const { return lookback_; }

 private:
   struct view_pair {
      ledger a, b;
   };
   struct ring {
      tick_t online_since = 0;
      tick_t first_tick = 0;
      std::deque<view_pair> entries;
   };

   void ensure_entry(ring& r, const std::string& obs, tick_t now);

   simulation& sim_;
   std::string id_;
   std::shared_ptr<chain_handle> a_, b_;
   tick_t pace_ = 1;
   tick_t lookback_ = 1;
   std::map<std::string, ring> rings_;
   std::map<std::string, ledger> outputs_;  // per-observer monotone output
};

}  // namespace ccirc
