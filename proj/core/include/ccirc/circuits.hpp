#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccirc/ledger.hpp"
#include "ccirc/simnet.hpp"

namespace ccirc {

/// Composition tree: leaves are underlay indices (1-based), internal nodes
/// are the three gates. One underlay may appear in many subtrees.
struct circuit_node {
   enum class kind_t { leaf, serial, lvl, lvs };
   kind_t kind = kind_t::leaf;
   int leaf_index = 1;
   std::vector<circuit_node> children;

   static circuit_node leaf(int index);
   static circuit_node serial(std::vector<circuit_node> ch);
   static circuit_node lvl(std::vector<circuit_node> ch);  // exactly 3
   static circuit_node lvs(std::vector<circuit_node> ch);  // exactly 2

   void validate() const;
   int max_leaf() const;
   size_t node_count() const;
   std::string to_string() const;
};

/// A requirement pair (s, l): which chains must be safe / live.
struct guarantee {
   bit_vector s, l;

   friend bool operator==(const guarantee&, const guarantee&) = default;
   friend auto operator<=>(const guarantee& a, const guarantee& b) {
      if (auto c = a.s <=> b.s; c != 0) return c;
      return a.l <=> b.l;
   }
};

/// True iff a's requirements are componentwise at most b's.
bool leq(const guarantee& a, const guarantee& b);

/// Permutation-class representative (n_s, n_l, n_sl).
struct perm_triple {
   int ns = 0, nl = 0, nsl = 0;

   friend bool operator==(const perm_triple&, const perm_triple&) = default;
   friend auto operator<=>(const perm_triple&, const perm_triple&) = default;
};
bool leq(const perm_triple& a, const perm_triple& b);

/// Security description of an overlay protocol: extreme elements of its
/// safety/liveness guarantee sets, in general or permutation-invariant form.
struct characterization {
   enum class mode_t { general, perm_invariant };
   mode_t mode = mode_t::general;
   int k = 0;
   std::vector<guarantee> es, el;     // general form
   std::vector<perm_triple> ps, pl;   // permutation-invariant form

   friend bool operator==(const characterization&, const characterization&) = default;
};

// --- closed-form achievability ----------------------------------------------

/// Partially synchronous (k,s,l): floor(k/2)+1 <= l <= k and s >= 2(k-l)+1.
bool achievable_ksl(int k, int s, int l);

/// Synchronous (k,s,l,b): additionally b >= k-l+1.
bool achievable_sync(int k, int s, int l, int b);

// --- tree evaluation ----------------------------------------------------------

/// Boolean semantics per gate: serial S=OR/L=AND, lvl S=AND/L=majority,
/// lvs S=AND of (S and L), L=OR.
bool eval_safety(const circuit_node& node, const fault_assignment& fa);
bool eval_liveness(const circuit_node& node, const fault_assignment& fa);

/// Exhaustive 4^k evaluation of the tree; general-mode extreme elements.
/// Lvs nodes are rejected under partial synchrony.
characterization predicted_properties(const circuit_node& node, net_mode mode, int k = 0);

// --- extreme elements ----------------------------------------------------------

std::vector<guarantee> exm(std::vector<guarantee> v);
std::vector<perm_triple> exm(std::vector<perm_triple> v);
perm_triple class_rep(const bit_vector& s, const bit_vector& l);

/// Permutation-invariant view of a general characterization; requires the
/// extreme sets to be closed under coordinate permutations.
characterization to_perm_invariant(const characterization& c);

// --- synthesis -----------------------------------------------------------------

inline constexpr int kDefaultSynthesisCap = 6;

/// Tree achieving a tuple dominating (k,s,l). Errors name the violated
/// inequality when the tuple is unachievable.
circuit_node synthesize_ksl(int k, int s, int l, int max_k = kDefaultSynthesisCap);

/// Given a base over k leaves, the (k+m)-chain serial-of-subsets lift
/// achieving (k+m, s, l+m).
circuit_node lemma_leave(const circuit_node& base, int k, int m,
                         int max_k = kDefaultSynthesisCap);

/// The (2f+1)-chain liveness-majority network built recursively from
/// 3-ary lvl and serial gates.
circuit_node synthesize_lvl(int f, int max_k = kDefaultSynthesisCap);
/// Same network shape over arbitrary children (odd count).
circuit_node lvl_network(std::vector<circuit_node> children);

/// Reason a tuple fails the partially synchronous achievability clauses,
/// or nullopt when it satisfies them.
std::optional<std::string> check_general_psync(const std::vector<guarantee>& es,
                                               const std::vector<guarantee>& el, int k);
std::optional<std::string> check_general_sync_reason(const std::vector<guarantee>& es,
                                                     const std::vector<guarantee>& el, int k);
bool check_general_sync(const std::vector<guarantee>& es, const std::vector<guarantee>& el,
                        int k);

circuit_node synthesize_general_psync(const std::vector<guarantee>& es,
                                      const std::vector<guarantee>& el, int k,
                                      int max_k = kDefaultSynthesisCap);
circuit_node synthesize_general_sync(const std::vector<guarantee>& es,
                                     const std::vector<guarantee>& el, int k,
                                     int max_k = kDefaultSynthesisCap);

// --- dominance and pareto -------------------------------------------------------

/// p dominates q: every extreme element of q is covered by one of p
/// componentwise below it (same k and mode required).
bool dominates(const characterization& p, const characterization& q);

/// Closed-form pareto-optimal permutation-invariant family for k chains.
std::vector<characterization> pareto_set(int k, net_mode mode);

}  // namespace ccirc
