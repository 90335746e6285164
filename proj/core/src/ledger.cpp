#include "ccirc/ledger.hpp"

#include <algorithm>
#include <unordered_set>

namespace ccirc {

bool ledger::contains_id(const std::string& id) const {
   return std::any_of(txs.begin(), txs.end(), [&](const transaction& t) { return t.id == id; });
}

ledger ledger::prefix(size_t n) const {
   n = std::min(n, txs.size());
   return ledger{std::vector<transaction>(txs.begin(), txs.begin() + n)};
}

std::string ledger::to_string() const {
   std::string out;
   for (size_t i = 0; i < txs.size(); ++i) {
      if (i) out += ',';
      out += txs[i].id;
   }
   return out;
}

bool operator==(const ledger& a, const ledger& b) {
   if (a.txs.size() != b.txs.size()) return false;
   for (size_t i = 0; i < a.txs.size(); ++i)
      if (a.txs[i].id != b.txs[i].id) return false;
   return true;
}

ledger make_ledger(std::initializer_list<std::string> ids) {
   ledger l;
   for (const auto& id : ids) l.txs.push_back(transaction{id, nullptr});
   return l;
}

ledger make_ledger(const std::vector<std::string>& ids) {
   ledger l;
   for (const auto& id : ids) l.txs.push_back(transaction{id, nullptr});
   return l;
}

bit_vector bit_vector::parse(const std::string& s) {
   if (s.empty() || s.size() > 31) throw config_error("bit vector must have 1..31 bits: " + s);
   bit_vector v{static_cast<int>(s.size()), 0};
   for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1')
         v.bits |= 1u << i;
      else if (s[i] != '0')
         throw config_error("bit vector may contain only 0/1: " + s);
   }
   return v;
}

bit_vector bit_vector::with_bit(int i, bool v) const {
   bit_vector out = *this;
   if (v)
      out.bits |= 1u << (i - 1);
   else
      out.bits &= ~(1u << (i - 1));
   return out;
}

int bit_vector::count() const { return __builtin_popcount(bits); }

std::string bit_vector::to_string() const {
   std::string s(k, '0');
   for (int i = 1; i <= k; ++i)
      if (bit(i)) s[i - 1] = '1';
   return s;
}

bool is_prefix(const ledger& a, const ledger& b) {
   if (a.size() > b.size()) return false;
   for (size_t i = 0; i < a.size(); ++i)
      if (a.txs[i].id != b.txs[i].id) return false;
   return true;
}

bool consistent(const ledger& a, const ledger& b) { return is_prefix(a, b) || is_prefix(b, a); }

ledger clean(const ledger& a, const ledger& b) {
   ledger out = a;
   std::unordered_set<std::string_view> seen;
   seen.reserve(a.size() + b.size());
   for (const auto& tx : a.txs) seen.insert(tx.id);
   for (const auto& tx : b.txs)
      if (seen.insert(tx.id).second) out.txs.push_back(tx);
   return out;
}

ledger clean_all(std::span<const ledger> snapshots) {
   ledger out;
   for (const auto& s : snapshots) out = clean(out, s);
   return out;
}

ledger interleave(const ledger& a, const ledger& b) {
   if (a.size() != b.size())
      throw contract_violation("interleave requires equal-length ledgers");
   ledger out;
   out.txs.reserve(2 * a.size());
   for (size_t i = 0; i < a.size(); ++i) {
      out.txs.push_back(a.txs[i]);
      out.txs.push_back(b.txs[i]);
   }
   return out;
}

std::vector<int> ind(const bit_vector& v) {
   std::vector<int> out;
   for (int i = 1; i <= v.k; ++i)
      if (v.bit(i)) out.push_back(i);
   return out;
}

ledger merge_monotone(const ledger& prev, const ledger& candidate) {
   if (is_prefix(prev, candidate)) return candidate;
   if (is_prefix(candidate, prev)) return prev;
   return clean(prev, candidate);
}

namespace {
constexpr uint64_t kFnvOffset = 1469598103934665603ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

uint64_t fnv1a(uint64_t h, const void* data, size_t n) {
   const auto* p = static_cast<const unsigned char*>(data);
   for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= kFnvPrime;
   }
   return h;
}
}  // namespace

uint64_t digest_of(const ledger& l) {
   uint64_t h = kFnvOffset;
   for (const auto& tx : l.txs) {
      h = fnv1a(h, tx.id.data(), tx.id.size());
      h = fnv1a(h, "\x1f", 1);
   }
   // Zero is reserved for "no certificate"; remap the unlucky collision.
   return h ? h : 1;
}

uint64_t digest_of(const block& b) {
   uint64_t h = kFnvOffset;
   h = fnv1a(h, &b.height, sizeof b.height);
   h = fnv1a(h, &b.parent, sizeof b.parent);
   h = fnv1a(h, &b.timestamp, sizeof b.timestamp);
   for (const auto& tx : b.txs) {
      h = fnv1a(h, tx.id.data(), tx.id.size());
      h = fnv1a(h, "\x1f", 1);
   }
   return h ? h : 1;
}

}  // namespace ccirc
