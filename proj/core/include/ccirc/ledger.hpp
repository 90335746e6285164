#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccirc {

using tick_t = int64_t;

/// Raised when a caller breaks a documented precondition.
struct contract_violation : std::logic_error {
   using std::logic_error::logic_error;
};

/// Raised on malformed configuration or input files.
struct config_error : std::runtime_error {
   using std::runtime_error::runtime_error;
};

/// Base for gate-specific data carried inside transactions. The ledger
/// algebra never looks at payloads; identity is by id alone.
struct payload_data {
   virtual ~payload_data() = default;
};

struct transaction {
   std::string id;
   std::shared_ptr<const payload_data> payload;

   friend bool operator==(const transaction& a, const transaction& b) { return a.id == b.id; }
};

/// An ordered sequence of transactions with unique ids.
struct ledger {
   std::vector<transaction> txs;

   ledger() = default;
   explicit ledger(std::vector<transaction> t) : txs(std::move(t)) {}

   size_t size() const { return txs.size(); }
   bool empty() const { return txs.empty(); }
   const transaction& operator[](size_t i) const { return txs[i]; }

   bool contains_id(const std::string& id) const;

   /// First `n` transactions (n clamped to size).
   ledger prefix(size_t n) const;

   /// Canonical text encoding: comma-joined ids.
   std::string to_string() const;

   friend bool operator==(const ledger& a, const ledger& b);
};

/// Convenience for tests and scenarios: ledger from bare ids.
ledger make_ledger(std::initializer_list<std::string> ids);
ledger make_ledger(const std::vector<std::string>& ids);

struct block {
   uint64_t height = 0;
   uint64_t parent = 0;        // digest of parent; 0 for genesis
   tick_t timestamp = 0;       // production tick, used for epoch tracking
   std::vector<transaction> txs;
};

/// Finality token for a ledger, checked against issuer-side bookkeeping
/// (see cert_registry). Unforgeable by construction in simulation.
struct certificate {
   std::string issuer;
   uint64_t subject = 0;       // digest of the certified ledger
   uint64_t token = 0;

   bool valid() const { return token != 0; }
};

/// Fixed-length 0/1 vector; bit i is 1-based, following circuit indices.
struct bit_vector {
   int k = 0;
   uint32_t bits = 0;

   bit_vector() = default;
   bit_vector(int k_, uint32_t bits_) : k(k_), bits(bits_) {}

   /// Parse "101"-style strings, index 1 = leftmost character.
   static bit_vector parse(const std::string& s);
   static bit_vector zeros(int k) { return {k, 0}; }
   static bit_vector ones(int k) { return {k, k >= 32 ? 0xffffffffu : ((1u << k) - 1)}; }

   bool bit(int i) const { return (bits >> (i - 1)) & 1u; }
   bit_vector with_bit(int i, bool v) const;
   int count() const;
   std::string to_string() const;

   friend bool operator==(const bit_vector&, const bit_vector&) = default;
   friend auto operator<=>(const bit_vector& a, const bit_vector& b) {
      if (auto c = a.k <=> b.k; c != 0) return c;
      return a.bits <=> b.bits;
   }
};

/// Injected misbehavior budget for one underlay chain.
struct chain_fault {
   bool safe = true;
   bool live = true;

   friend bool operator==(const chain_fault&, const chain_fault&) = default;
};

/// One entry per underlay chain, leaf order.
using fault_assignment = std::vector<chain_fault>;

// --- ledger algebra -------------------------------------------------------

/// True iff a's transactions are an exact leading segment of b's.
bool is_prefix(const ledger& a, const ledger& b);

/// True iff one ledger is a prefix of the other.
bool consistent(const ledger& a, const ledger& b);

/// a followed by the transactions of b not already in a, order preserved.
/// The result has no duplicate ids and a is a prefix of it.
ledger clean(const ledger& a, const ledger& b);

/// Left fold of clean over a snapshot sequence.
ledger clean_all(std::span<const ledger> snapshots);

/// Positional interleaving of two equal-length ledgers: output position
/// 2i-1 (1-based) comes from a, position 2i from b.
/// Throws contract_violation on length mismatch.
ledger interleave(const ledger& a, const ledger& b);

/// 1-based indices where the bit is set, ascending.
std::vector<int> ind(const bit_vector& v);

/// Client-side finality lock-in: keep the longer view when candidate and
/// previous output are consistent, append-and-sanitize when they conflict.
/// Keeps per-client outputs monotone without losing conflicting commits.
ledger merge_monotone(const ledger& prev, const ledger& candidate);

/// Deterministic content digest over the id sequence (FNV-1a).
uint64_t digest_of(const ledger& l);
uint64_t digest_of(const block& b);

}  // namespace ccirc
