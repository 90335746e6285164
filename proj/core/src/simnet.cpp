#include "ccirc/simnet.hpp"

#include <algorithm>

namespace ccirc {

void network_model::validate() const {
   if (delta <= 0) throw config_error("network delta must be positive");
   if (gst < 0) throw config_error("gst must be non-negative");
   if (mode == net_mode::synchrony && gst != 0)
      throw config_error("synchronous network requires gst == 0");
}

certificate cert_registry::issue(const std::string& issuer, uint64_t digest) {
   auto& per_issuer = issued_[issuer];
   auto it = per_issuer.find(digest);
   if (it == per_issuer.end()) it = per_issuer.emplace(digest, next_token_++).first;
   return certificate{issuer, digest, it->second};
}

bool cert_registry::verify(const certificate& cert, uint64_t digest) const {
   if (!cert.valid() || cert.subject != digest) return false;
   auto issuer_it = issued_.find(cert.issuer);
   if (issuer_it == issued_.end()) return false;
   auto it = issuer_it->second.find(digest);
   return it != issuer_it->second.end() && it->second == cert.token;
}

randomized_adversary::randomized_adversary(uint64_t seed, randomized_options opts)
    : seed_(seed), opts_(opts) {}

uint64_t randomized_adversary::site_seed(const std::string& site) const {
   uint64_t h = seed_ ^ 0x9e3779b97f4a7c15ull;
   for (char c : site)
      h = (h ^ static_cast<uint64_t>(static_cast<unsigned char>(c))) * 0x100000001b3ull;
   // splitmix64 finalizer: repeated queries of one site stay stable
   h ^= h >> 30;
   h *= 0xbf58476d1ce4e5b9ull;
   h ^= h >> 27;
   h *= 0x94d049bb133111ebull;
   h ^= h >> 31;
   return h;
}

double randomized_adversary::uniform(const std::string& site) {
   return static_cast<double>(site_seed(site) >> 11) * (1.0 / 9007199254740992.0);
}

tick_t randomized_adversary::deliver_time(const envelope& env, tick_t earliest, tick_t latest) {
   std::string site = "dlv/" + std::to_string(env.seq);
   if (latest >= kNever) {
      // No delivery obligation: usually drop, sometimes deliver late.
      double u = uniform(site);
      return u < 0.7 ? kNever : earliest + static_cast<tick_t>(u * 20);
   }
   double u = uniform(site);
   if (u < 0.5) return latest;  // boundary bias
   if (u < 0.65) return earliest;
   return earliest + static_cast<tick_t>((latest - earliest) * (u - 0.65) / 0.35);
}

tick_t randomized_adversary::release_tick(const std::string& chain, int branch, uint64_t height,
                                          const std::string& observer, tick_t produced,
                                          tick_t latest) {
   if (latest >= kNever) {
      // Non-live chain: stall-style only — the view freezes from an
      // observer-specific point onward, across all branches, and is never
      // revealed in bursts of content younger than the stall.
      double u = uniform("rel/" + chain + "/" + observer + "/freeze");
      if (u < 0.25) return produced;  // never frozen
      tick_t freeze_at = 0;
      if (u >= 0.6) freeze_at = static_cast<tick_t>((u - 0.6) * 120);
      return produced < freeze_at ? produced : kNever;
   }
   std::string site = "rel/" + chain + "/" + std::to_string(branch) + "/" + observer;
   double u = uniform(site + "/h" + std::to_string(height));
   if (u < 0.5) return latest;  // boundary bias
   if (u < 0.7) return produced;
   return produced + static_cast<tick_t>((latest - produced) * (u - 0.7) / 0.3);
}

int randomized_adversary::branch_for(const std::string& chain, const std::string& observer,
                                     tick_t now, int branches) {
   if (branches <= 1) return 0;
   int assigned = static_cast<int>(uniform("route/" + chain + "/" + observer) * branches);
   return std::min(assigned, branches - 1);
}

bool randomized_adversary::produce_block(const std::string& chain, int branch, tick_t now,
                                         bool must) {
   if (must) return true;
   // Halt-style only, chain-wide: production stops from one point onward
   // on every branch, and never resumes with a catch-up burst. Branches
   // forked after the halt stay silent too.
   double u = uniform("halt/" + chain);
   if (u >= opts_.stall_rate + 0.35) return true;  // never halts
   tick_t halt_at = 0;
   if (u >= opts_.stall_rate) halt_at = static_cast<tick_t>((u - opts_.stall_rate) * 200);
   return now < halt_at;
}

bool randomized_adversary::include_tx(const std::string& chain, int branch,
                                      const std::string& tx_id, tick_t now, bool must) {
   if (must) return true;
   // Withholding is a chain-wide include-next-or-never decision; a forked
   // branch cannot surface content its siblings withheld.
   return uniform("incl/" + chain + "/" + tx_id) >= opts_.withhold_rate;
}

std::optional<uint64_t> randomized_adversary::fork_request(const std::string& chain, tick_t now,
                                                           int branches, uint64_t head_height) {
   if (branches >= opts_.max_branches || head_height == 0) return std::nullopt;
   // Equivocation forks at the head: every fictitious instance inherits an
   // honestly-delivered past and diverges in future blocks. Deep rollbacks
   // are for scripted pre-GST worlds.
   if (uniform("fork/" + chain + "/" + std::to_string(now)) < opts_.fork_rate)
      return head_height;
   return std::nullopt;
}

simulation::simulation(network_model net, std::shared_ptr<adversary> adv)
    : net_(net), adv_(std::move(adv)) {
   net_.validate();
}

void simulation::add_actor(sim_phase phase, actor* a) { actors_.emplace_back(phase, a); }

void simulation::send(envelope env, std::optional<tick_t> latest) {
   env.seq = next_seq_++;
   env.send_time = now_ < 0 ? 0 : now_;
   tick_t earliest = env.send_time;
   tick_t bound = std::max(earliest, latest.value_or(net_.latest_delivery(env.send_time)));
   env.deliver_time = adv_->deliver_time(env, earliest, bound);
   if (env.deliver_time < earliest) env.deliver_time = earliest;
   if (env.deliver_time > bound) env.deliver_time = bound;
   log_event(env.send_time, env.sender, env.recipient, "send:" + env.kind);
   pending_[env.recipient].push_back(std::move(env));
}

std::vector<envelope> simulation::drain_inbox(const std::string& recipient, tick_t now) {
   std::vector<envelope> out;
   auto it = pending_.find(recipient);
   if (it == pending_.end()) return out;
   auto& queue = it->second;
   for (auto& env : queue)
      if (env.deliver_time <= now) out.push_back(env);
   std::erase_if(queue, [&](const envelope& env) { return env.deliver_time <= now; });
   std::sort(out.begin(), out.end(), [](const envelope& a, const envelope& b) {
      return std::tie(a.deliver_time, a.seq) < std::tie(b.deliver_time, b.seq);
   });
   for (const auto& env : out) log_event(now, env.sender, env.recipient, "deliver:" + env.kind);
   return out;
}

void simulation::run_until(tick_t t) {
   for (tick_t tk = now_ + 1; tk <= t; ++tk) {
      now_ = tk;
      for (auto phase : {sim_phase::inject, sim_phase::gate, sim_phase::chain, sim_phase::post})
         for (auto& [p, a] : actors_)
            if (p == phase) a->step(*this, tk);
   }
   now_ = std::max(now_, t);
}

void simulation::log_event(tick_t tick, const std::string& sender, const std::string& recipient,
                           const std::string& kind) {
   trace_.push_back(trace_event{tick, sender, recipient, kind});
}

}  // namespace ccirc
