#include <doctest.h>

#include <array>
#include <random>
#include <set>

#include "ccirc/ledger.hpp"

using namespace ccirc;

TEST_CASE("is_prefix") {
   CHECK(is_prefix(make_ledger({}), make_ledger({"tx1"})));
   CHECK(is_prefix(make_ledger({"tx1", "tx2"}), make_ledger({"tx1", "tx2", "tx3", "tx4"})));
   CHECK_FALSE(is_prefix(make_ledger({"tx1", "tx3"}), make_ledger({"tx1", "tx2", "tx3"})));
   CHECK_FALSE(is_prefix(make_ledger({"tx1", "tx2"}), make_ledger({"tx1"})));
}

TEST_CASE("consistent") {
   CHECK(consistent(make_ledger({"tx1", "tx2"}), make_ledger({"tx1", "tx2", "tx3", "tx4"})));
   CHECK_FALSE(consistent(make_ledger({"tx1"}), make_ledger({"tx2"})));
   auto l = make_ledger({"a", "b", "c"});
   CHECK(consistent(l, l));  // reflexive
   CHECK(consistent(make_ledger({"a", "b", "c"}), make_ledger({"a"})));  // symmetric
   CHECK(consistent(make_ledger({"a"}), make_ledger({"a", "b", "c"})));
}

TEST_CASE("clean") {
   CHECK(clean(make_ledger({"tx1", "tx2"}), make_ledger({"tx1", "tx2", "tx3", "tx4"})) ==
         make_ledger({"tx1", "tx2", "tx3", "tx4"}));
   CHECK(clean(make_ledger({"tx1", "tx2"}), make_ledger({"tx1", "tx2"})) ==
         make_ledger({"tx1", "tx2"}));
   auto l = make_ledger({"x", "y"});
   CHECK(clean(ledger{}, l) == l);

   SUBCASE("three snapshots with a conflicting tail") {
      std::vector<ledger> snaps = {make_ledger({"tx1", "tx2"}),
                                   make_ledger({"tx1", "tx2", "tx3", "tx4"}),
                                   make_ledger({"tx1", "tx2", "tx'3", "tx'4"})};
      CHECK(clean_all(snaps) == make_ledger({"tx1", "tx2", "tx3", "tx4", "tx'3", "tx'4"}));
   }
}

TEST_CASE("interleave") {
   CHECK(interleave(make_ledger({"a1", "a2"}), make_ledger({"b1", "b2"})) ==
         make_ledger({"a1", "b1", "a2", "b2"}));
   CHECK(interleave(ledger{}, ledger{}) == ledger{});
   CHECK(interleave(make_ledger({"a1"}), make_ledger({"b1"})) == make_ledger({"a1", "b1"}));
   CHECK_THROWS_AS(interleave(make_ledger({"a"}), make_ledger({"b", "c"})), contract_violation);
}

TEST_CASE("ind") {
   CHECK(ind(bit_vector::parse("101")) == std::vector<int>{1, 3});
   CHECK(ind(bit_vector::parse("000")).empty());
   CHECK(ind(bit_vector::ones(5)) == std::vector<int>{1, 2, 3, 4, 5});
}

TEST_CASE("bit_vector parsing and printing") {
   auto v = bit_vector::parse("0110");
   CHECK(v.k == 4);
   CHECK_FALSE(v.bit(1));
   CHECK(v.bit(2));
   CHECK(v.to_string() == "0110");
   CHECK(v.count() == 2);
   CHECK_THROWS_AS(bit_vector::parse("01x"), config_error);
}

namespace {

ledger random_ledger(std::mt19937_64& rng, int pool, int max_len) {
   std::uniform_int_distribution<int> len(0, max_len);
   std::uniform_int_distribution<int> pick(0, pool - 1);
   ledger l;
   int n = len(rng);
   for (int i = 0; i < n && static_cast<int>(l.size()) < pool; ++i) {
      std::string id = "t" + std::to_string(pick(rng));
      if (!l.contains_id(id)) l.txs.push_back(transaction{id, nullptr});
   }
   return l;
}

// Random pairwise-consistent triple: three prefixes of one base ledger.
std::array<ledger, 3> consistent_triple(std::mt19937_64& rng) {
   ledger base;
   for (int i = 0; i < 12; ++i) base.txs.push_back(transaction{"b" + std::to_string(i), nullptr});
   std::uniform_int_distribution<size_t> cut(0, base.size());
   return {base.prefix(cut(rng)), base.prefix(cut(rng)), base.prefix(cut(rng))};
}

}  // namespace

TEST_CASE("clean keeps the left operand as a prefix and never duplicates ids") {
   std::mt19937_64 rng(0xc0ffee);
   for (int trial = 0; trial < 2000; ++trial) {
      ledger a = random_ledger(rng, 20, 10);
      ledger b = random_ledger(rng, 20, 10);
      ledger c = clean(a, b);
      CHECK(is_prefix(a, c));
      std::set<std::string> ids;
      for (const auto& tx : c.txs) CHECK(ids.insert(tx.id).second);
      for (const auto& tx : b.txs) CHECK(c.contains_id(tx.id));
   }
}

TEST_CASE("clean of consistent ledgers stays consistent with a third") {
   std::mt19937_64 rng(0xfeed);
   for (int trial = 0; trial < 2000; ++trial) {
      auto [x, y, z] = consistent_triple(rng);
      CHECK(consistent(clean(x, y), z));
   }
}

TEST_CASE("interleave positional identity on random equal-length pairs") {
   std::mt19937_64 rng(0xbead);
   std::uniform_int_distribution<int> len(0, 16);
   for (int trial = 0; trial < 500; ++trial) {
      int n = len(rng);
      ledger a, b;
      for (int i = 0; i < n; ++i) {
         a.txs.push_back(
             transaction{"a" + std::to_string(trial) + "_" + std::to_string(i), nullptr});
         b.txs.push_back(
             transaction{"b" + std::to_string(trial) + "_" + std::to_string(i), nullptr});
      }
      ledger o = interleave(a, b);
      REQUIRE(o.size() == 2 * a.size());
      for (size_t i = 1; i <= a.size(); ++i) {
         CHECK(o[2 * i - 2].id == a[i - 1].id);  // position 2i-1, 1-indexed
         CHECK(o[2 * i - 1].id == b[i - 1].id);  // position 2i
      }
   }
}

TEST_CASE("merge_monotone retains, extends, or appends") {
   auto prev = make_ledger({"a", "b"});
   CHECK(merge_monotone(prev, make_ledger({"a", "b", "c"})) == make_ledger({"a", "b", "c"}));
   CHECK(merge_monotone(prev, make_ledger({"a"})) == prev);
   CHECK(merge_monotone(prev, make_ledger({"a", "x"})) == make_ledger({"a", "b", "x"}));
}

TEST_CASE("digest is order-sensitive and nonzero") {
   CHECK(digest_of(make_ledger({"a", "b"})) != digest_of(make_ledger({"b", "a"})));
   CHECK(digest_of(ledger{}) != 0);
}
