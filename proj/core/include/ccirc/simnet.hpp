#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ccirc/ledger.hpp"

namespace ccirc {

constexpr tick_t kNever = std::numeric_limits<tick_t>::max() / 4;

enum class net_mode { partial_synchrony, synchrony };

struct network_model {
   net_mode mode = net_mode::partial_synchrony;
   tick_t delta = 1;
   tick_t gst = 0;

   void validate() const;

   /// Latest admissible delivery for a message sent at `send`:
   /// max(gst, send) + delta.
   tick_t latest_delivery(tick_t send) const { return std::max(gst, send) + delta; }
};

struct envelope {
   uint64_t seq = 0;  // global FIFO tiebreak
   std::string sender;
   std::string recipient;
   std::string kind;
   std::shared_ptr<const payload_data> payload;
   tick_t send_time = 0;
   tick_t deliver_time = 0;
};

struct trace_event {
   tick_t tick = 0;
   std::string sender;
   std::string recipient;
   std::string kind;
};

/// Issuer-side bookkeeping standing in for signatures: a certificate is
/// valid only if the issuer recorded that exact (digest, token) pair.
class cert_registry {
 public:
   certificate issue(const std::string& issuer, uint64_t digest);
   bool verify(const certificate& cert, uint64_t digest) const;

 private:
   std::map<std::string, std::map<uint64_t, uint64_t>> issued_;
   uint64_t next_token_ = 1;
};

/// Everything the adversary decides during a run. All hooks must be
/// deterministic in (construction arguments, seed). Bounds passed in are
/// already clamped to the invariants the callee enforces; implementations
/// pick any value inside them.
class adversary {
 public:
   virtual ~adversary() = default;

   /// Delivery tick in [earliest, latest].
   virtual tick_t deliver_time(const envelope& env, tick_t earliest, tick_t latest) = 0;

   /// When block `height` of (chain, branch), produced at tick `produced`,
   /// becomes visible to `observer`. Must lie in [produced, latest].
   virtual tick_t release_tick(const std::string& chain, int branch, uint64_t height,
                               const std::string& observer, tick_t produced, tick_t latest) = 0;

   /// Branch shown to this observer right now, in [0, branches).
   virtual int branch_for(const std::string& chain, const std::string& observer, tick_t now,
                          int branches) = 0;

   /// Whether a branch of a non-live chain produces its block this epoch.
   /// `must` is true when liveness deadlines force production.
   virtual bool produce_block(const std::string& chain, int branch, tick_t now, bool must) = 0;

   /// Whether a pending transaction goes into the block being produced.
   virtual bool include_tx(const std::string& chain, int branch, const std::string& tx_id,
                           tick_t now, bool must) = 0;

   /// Height at which to fork a non-safe chain this tick, if any.
   virtual std::optional<uint64_t> fork_request(const std::string& chain, tick_t now,
                                                int branches, uint64_t head_height) = 0;
};

/// Adversary that misbehaves as little as possible: immediate delivery,
/// immediate release, canonical branch, always produce and include.
class honest_adversary : public adversary {
 public:
   tick_t deliver_time(const envelope&, tick_t earliest, tick_t) override { return earliest; }
   tick_t release_tick(const std::string&, int, uint64_t, const std::string&, tick_t produced,
                       tick_t) override {
      return produced;
   }
   int branch_for(const std::string&, const std::string&, tick_t, int) override { return 0; }
   bool produce_block(const std::string&, int, tick_t, bool) override { return true; }
   bool include_tx(const std::string&, int, const std::string&, tick_t, bool) override {
      return true;
   }
   std::optional<uint64_t> fork_request(const std::string&, tick_t, int, uint64_t) override {
      return std::nullopt;
   }
};

struct randomized_options {
   int max_branches = 4;
   double fork_rate = 0.08;     // per-tick fork chance on a non-safe chain
   double stall_rate = 0.25;    // chance a non-live branch skips its block
   double withhold_rate = 0.3;  // chance a non-live chain omits a pending tx
};

/// Seeded adversary biased toward boundary behavior: delays hug the
/// deadline, stalls release exactly at GST, forks appear early.
class randomized_adversary : public adversary {
 public:
   randomized_adversary(uint64_t seed, randomized_options opts = {});

   tick_t deliver_time(const envelope& env, tick_t earliest, tick_t latest) override;
   tick_t release_tick(const std::string& chain, int branch, uint64_t height,
                       const std::string& observer, tick_t produced, tick_t latest) override;
   int branch_for(const std::string& chain, const std::string& observer, tick_t now,
                  int branches) override;
   bool produce_block(const std::string& chain, int branch, tick_t now, bool must) override;
   bool include_tx(const std::string& chain, int branch, const std::string& tx_id, tick_t now,
                   bool must) override;
   std::optional<uint64_t> fork_request(const std::string& chain, tick_t now, int branches,
                                        uint64_t head_height) override;

 private:
   // Stateless per-site hashing: every decision site maps to a stable
   // value, so call order and repetition cannot perturb other choices.
   uint64_t site_seed(const std::string& site) const;
   double uniform(const std::string& site);

   uint64_t seed_;
   randomized_options opts_;
};

/// Execution phases within one tick; actors run phase by phase in
/// registration order.
enum class sim_phase { inject = 0, gate = 1, chain = 2, post = 3 };

class simulation;

struct actor {
   virtual ~actor() = default;
   virtual void step(simulation& sim, tick_t now) = 0;
};

/// Deterministic tick-driven event loop: message queue, actor scheduler,
/// trace log and certificate registry for one run.
class simulation {
 public:
   simulation(network_model net, std::shared_ptr<adversary> adv);

   const network_model& net() const { return net_; }
   adversary& adv() { return *adv_; }
   cert_registry& certs() { return certs_; }
   tick_t now() const { return now_; }

   void add_actor(sim_phase phase, actor* a);

   /// Schedules the envelope; deliver_time is chosen by the adversary
   /// within [now, latest] (latest defaults to the network bound).
   /// Pass kNever as `latest` for messages with no delivery obligation.
   void send(envelope env, std::optional<tick_t> latest = std::nullopt);

   /// Drain messages addressed to `recipient` with deliver_time <= now.
   std::vector<envelope> drain_inbox(const std::string& recipient, tick_t now);

   /// Advance through tick t inclusive, stepping actors each tick.
   void run_until(tick_t t);

   const std::vector<trace_event>& trace() const { return trace_; }
   void log_event(tick_t tick, const std::string& sender, const std::string& recipient,
                  const std::string& kind);

 private:
   network_model net_;
   std::shared_ptr<adversary> adv_;
   cert_registry certs_;
   tick_t now_ = -1;
   uint64_t next_seq_ = 0;
   std::vector<std::pair<sim_phase, actor*>> actors_;
   // recipient -> pending envelopes ordered by (deliver_time, seq)
   std::map<std::string, std::vector<envelope>> pending_;
   std::vector<trace_event> trace_;
};

}  // namespace ccirc
