#pragma once

#include <memory>

#include "ccirc/chain.hpp"
#include "ccirc/simnet.hpp"
#include "ccirc/underlay.hpp"

namespace ccirc {

/// One certified view of the head chain carried as a transaction inside
/// the carrier chain.
struct snapshot_payload : payload_data {
   std::string gate;
   ledger snapshot;
   certificate cert;
};

/// Serial composition: validators of the carrier chain embed certified
/// snapshots of the head chain into every carrier block; clients fold
/// clean over the certified snapshots in carrier-ledger order.
/// Transactions route into the head chain.
///
/// Safe if either constituent is safe, live within
/// head.bound + carrier.pace + carrier.bound when both are live.
class serial_gate : public chain_handle, public actor {
 public:
   struct options {
      // Accepts non-certificate children and uncertified snapshots.
      // Exists for fork-attack scenarios; never set in normal composition.
      bool allow_uncertified = false;
   };

   serial_gate(simulation& sim, std::string gate_id, std::shared_ptr<chain_handle> head,
               std::shared_ptr<chain_handle> carrier, options opts);
   serial_gate(simulation& sim, std::string gate_id, std::shared_ptr<chain_handle> head,
               std::shared_ptr<chain_handle> carrier);

   const std::string& id() const override { return id_; }
   bool generates_certificates() const override { return true; }
   tick_t pace() const override { return pace_; }
   tick_t latency_bound() const override { return bound_; }
   void register_observer(const std::string& obs) override;
   void submit(const transaction& tx, tick_t now) override;
   read_result read(const std::string& observer, tick_t now) override;

   void step(simulation& sim, tick_t now) override;

   const chain_handle& head() const { return *head_; }
   const chain_handle& carrier() const { return *carrier_; }

 private:
   void embed_into_leaf(tick_t now);
   void embed_into_composite(tick_t now);

   simulation& sim_;
   std::string id_;
   std::shared_ptr<chain_handle> head_;
   std::shared_ptr<chain_handle> carrier_;
   options opts_;
   underlay_chain* leaf_carrier_ = nullptr;  // fast path when the carrier is a leaf
   tick_t pace_ = 1;
   tick_t bound_ = 0;
   uint64_t embed_seq_ = 0;
   std::map<std::string, ledger> client_out_;  // per-observer monotone output
};

}  // namespace ccirc
