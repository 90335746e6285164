#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>

#include "ccirc/chain.hpp"
#include "ccirc/simnet.hpp"
#include "ccirc/underlay.hpp"

namespace ccirc {

struct overlay_block {
   uint64_t height = 0;
   uint64_t parent = 0;  // digest of parent overlay block; 0 for genesis
   int64_t epoch = 0;    // epoch at which the block was proposed
   std::vector<transaction> txs;
};
uint64_t digest_of(const overlay_block& b);
overlay_block overlay_genesis();

enum class oft_kind { propose, ack, leader_down };

struct oft_message {
   oft_kind kind = oft_kind::ack;
   int64_t epoch = 0;
   int validator = 0;
   overlay_block blk;  // propose: proposal; ack: acked block; leader-down: highest-acked block
   // Proposals carry a ticket except for epoch 0: the epoch v-1 certificate
   // (f+1 acks) or f+1 leader-down messages.
   std::vector<oft_message> ticket;
};

/// One entry of an emulated validator's execution trace, recorded as a
/// transaction on its hosting chain. Inbound entries log messages received
/// over cross-chain communication so clients can replay the execution.
struct oft_record : payload_data {
   std::string gate;
   bool inbound = false;
   tick_t at = 0;  // block timestamp of the recording block
   oft_message msg;
};

/// Deterministic emulated OFT validator. The same transition logic drives
/// live execution (step) and client-side trace replay (apply), so an
/// injected record that no honest execution produces fails validation.
class oft_machine {
 public:
   oft_machine() = default;
   oft_machine(std::string gate, int n, int f, int index, tick_t epoch_len);

   /// Replay one trace record in ledger order. Returns false when the
   /// record is not a valid transition; the trace is dead from there on.
   bool apply(const oft_record& rec);

   /// Live execution for the hosting block at `now`; prev_ts is the
   /// previous block's timestamp (-1 before the first block). Returns the
   /// records for this block: inbound logs first, then actions.
   std::vector<std::shared_ptr<oft_record>> step(tick_t prev_ts, tick_t now,
                                                 const std::vector<oft_message>& inbound,
                                                 const std::vector<transaction>& mempool);

   const std::map<uint64_t, overlay_block>& known_blocks() const { return blocks_; }
   const std::vector<uint64_t>& committed_tips() const { return committed_tips_; }
   int64_t epoch_of(tick_t t) const { return t / epoch_len_; }
   int leader_of(int64_t epoch) const { return static_cast<int>(epoch % n_); }

 private:
   void ingest(const oft_message& msg);
   bool validate_action(const oft_message& msg, tick_t at);
   std::optional<oft_message> act_enter(int64_t v, const std::vector<transaction>& mempool);
   std::optional<oft_message> act_ack(int64_t v);
   std::optional<oft_message> act_leader_down(int64_t v);
   void check_commits();
   std::optional<overlay_block> certified_block(int64_t epoch) const;
   bool in_committed_chain(const std::string& tx_id) const;

   std::string gate_;
   int n_ = 3, f_ = 1, index_ = 0;
   tick_t epoch_len_ = 3;

   std::map<uint64_t, overlay_block> blocks_;
   // per epoch: proposals seen (digests, first one wins the ack)
   std::map<int64_t, std::vector<uint64_t>> proposals_;
   // (epoch, digest) -> ack message per distinct acking validator
   std::map<std::pair<int64_t, uint64_t>, std::map<int, oft_message>> acks_;
   // epoch -> distinct leader-down senders and their carried blocks
   std::map<int64_t, std::map<int, oft_message>> leader_downs_;
   std::pair<int64_t, uint64_t> highest_acked_{-1, 0};  // (epoch, digest)
   std::set<int64_t> acked_epochs_, proposed_epochs_, ld_epochs_;
   std::vector<uint64_t> committed_tips_;
   std::set<uint64_t> committed_set_;
   std::set<std::string> committed_tx_ids_;
   tick_t last_ts_ = -1;
};

/// Triangular composition: an OFT overlay with n = 2f+1 validators, each
/// emulated by a contract hosted on one constituent chain. Clients output
/// the longest overlay block committed by f+1 or more emulated validators.
class lvl_gate : public chain_handle, public actor {
 public:
   lvl_gate(simulation& sim, std::string gate_id,
            std::vector<std::shared_ptr<chain_handle>> children, int f = 1);
   ~lvl_gate() override;

   const std::string& id() const override { return id_; }
   bool generates_certificates() const override { return true; }
   tick_t pace() const override { return epoch_len_; }
   tick_t latency_bound() const override { return static_cast<tick_t>(f_ + 1) * epoch_len_; }
   void register_observer(const std::string& obs) override;
   void submit(const transaction& tx, tick_t now) override;
   read_result read(const std::string& observer, tick_t now) override;

   void step(simulation& sim, tick_t now) override;

   tick_t overlay_epoch_len() const { return epoch_len_; }
   int validators() const { return n_; }

 private:
   friend class lvl_host_program;

   struct replay_cursor {
      oft_machine machine;
      bool initialized = false;
      size_t consumed = 0;  // records of this gate consumed from the trace
      std::vector<std::string> record_ids;
      bool dead = false;
   };
   struct client_state {
      ledger out;
      uint64_t out_height = 0;
      // one replay per (validator, exposed view index)
      std::map<std::pair<int, int>, replay_cursor> cursors;
   };
   struct composite_driver {
      oft_machine machine;
      size_t consumed = 0;
      std::set<std::pair<int64_t, int>> emitted;  // (epoch, kind) already submitted
      uint64_t rec_seq = 0;
   };

   void broadcast(simulation& sim, int from, const oft_message& msg, tick_t now, int branch,
                  int branches);
   std::vector<oft_message> take_inbound(int validator, int from_count, tick_t now);
   void drive_composite(simulation& sim, int idx, tick_t now);
   /// Replays one exposed trace, feeding only records of this gate.
   replay_cursor& advance_cursor(client_state& cs, int validator, int view_idx,
                                 const ledger& trace);

   simulation& sim_;
   std::string id_;
   std::vector<std::shared_ptr<chain_handle>> children_;
   int n_ = 3, f_ = 1;
   tick_t hop_bound_ = 0;   // U: worst emulated-validator message latency
   tick_t epoch_len_ = 0;   // 3U
   std::vector<underlay_chain*> leaf_hosts_;  // nullptr for composite children
   std::vector<std::unique_ptr<chain_program>> programs_;
   std::vector<composite_driver> drivers_;
   // per validator: delivered CCC messages, with per-branch read cursors
   std::vector<std::vector<oft_message>> inbound_log_;
   std::vector<std::map<int, size_t>> inbound_cursor_;
   std::map<std::string, client_state> clients_;
   uint64_t rec_seq_ = 0;
};

/// True for transactions that belong to gate machinery rather than users.
bool is_gate_record(const transaction& tx);

}  // namespace ccirc
