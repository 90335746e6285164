#include "ccirc/circuits.hpp"

#include <algorithm>
#include <set>

namespace ccirc {

// --- circuit_node ------------------------------------------------------------

circuit_node circuit_node::leaf(int index) {
   circuit_node n;
   n.kind = kind_t::leaf;
   n.leaf_index = index;
   return n;
}

circuit_node circuit_node::serial(std::vector<circuit_node> ch) {
   circuit_node n;
   n.kind = kind_t::serial;
   n.children = std::move(ch);
   return n;
}

circuit_node circuit_node::lvl(std::vector<circuit_node> ch) {
   circuit_node n;
   n.kind = kind_t::lvl;
   n.children = std::move(ch);
   return n;
}

circuit_node circuit_node::lvs(std::vector<circuit_node> ch) {
   circuit_node n;
   n.kind = kind_t::lvs;
   n.children = std::move(ch);
   return n;
}

void circuit_node::validate() const {
   switch (kind) {
      case kind_t::leaf:
         if (leaf_index < 1) throw config_error("leaf index must be >= 1");
         return;
      case kind_t::serial:
         if (children.size() < 2) throw config_error("serial node needs >= 2 children");
         break;
      case kind_t::lvl:
         if (children.size() != 3) throw config_error("lvl node needs exactly 3 children");
         break;
      case kind_t::lvs:
         if (children.size() != 2) throw config_error("lvs node needs exactly 2 children");
         break;
   }
   for (const auto& c : children) c.validate();
}

int circuit_node::max_leaf() const {
   if (kind == kind_t::leaf) return leaf_index;
   int m = 0;
   for (const auto& c : children) m = std::max(m, c.max_leaf());
   return m;
}

size_t circuit_node::node_count() const {
   size_t n = 1;
   for (const auto& c : children) n += c.node_count();
   return n;
}

std::string circuit_node::to_string() const {
   switch (kind) {
      case kind_t::leaf:
         return std::to_string(leaf_index);
      case kind_t::serial:
      case kind_t::lvl:
      case kind_t::lvs: {
         std::string out = kind == kind_t::serial ? "serial(" : kind == kind_t::lvl ? "lvl(" : "lvs(";
         for (size_t i = 0; i < children.size(); ++i) {
            if (i) out += ",";
            out += children[i].to_string();
         }
         return out + ")";
      }
   }
   return "?";
}

// --- orders -------------------------------------------------------------------

bool leq(const guarantee& a, const guarantee& b) {
   return (a.s.bits & b.s.bits) == a.s.bits && (a.l.bits & b.l.bits) == a.l.bits;
}

bool leq(const perm_triple& a, const perm_triple& b) {
   return a.ns <= b.ns && a.nl <= b.nl && a.nsl <= b.nsl;
}

// --- closed-form achievability --------------------------------------------------

bool achievable_ksl(int k, int s, int l) {
   if (k < 1) throw config_error("achievable_ksl: k must be >= 1");
   return l >= k / 2 + 1 && l <= k && s >= 2 * (k - l) + 1;
}

bool achievable_sync(int k, int s, int l, int b) {
   if (k < 1) throw config_error("achievable_sync: k must be >= 1");
   return l >= k / 2 + 1 && l <= k && s >= 2 * (k - l) + 1 && b >= k - l + 1;
}

// --- tree evaluation -------------------------------------------------------------

namespace {

struct sl_bits {
   bool s, l;
};

sl_bits eval_node(const circuit_node& n, const fault_assignment& fa) {
   switch (n.kind) {
      case circuit_node::kind_t::leaf: {
         const auto& f = fa.at(static_cast<size_t>(n.leaf_index - 1));
         return {f.safe, f.live};
      }
      case circuit_node::kind_t::serial: {
         bool s = false, l = true;
         for (const auto& c : n.children) {
            auto r = eval_node(c, fa);
            s = s || r.s;
            l = l && r.l;
         }
         return {s, l};
      }
      case circuit_node::kind_t::lvl: {
         bool s = true;
         int live = 0;
         for (const auto& c : n.children) {
            auto r = eval_node(c, fa);
            s = s && r.s;
            live += r.l ? 1 : 0;
         }
         return {s, live >= 2};
      }
      case circuit_node::kind_t::lvs: {
         auto a = eval_node(n.children[0], fa);
         auto b = eval_node(n.children[1], fa);
         return {a.s && a.l && b.s && b.l, a.l || b.l};
      }
   }
   return {false, false};
}

bool has_lvs(const circuit_node& n) {
   if (n.kind == circuit_node::kind_t::lvs) return true;
   return std::any_of(n.children.begin(), n.children.end(), has_lvs);
}

fault_assignment assignment_from_bits(int k, uint32_t s_bits, uint32_t l_bits) {
   fault_assignment fa(static_cast<size_t>(k));
   for (int i = 0; i < k; ++i) {
      fa[static_cast<size_t>(i)].safe = (s_bits >> i) & 1u;
      fa[static_cast<size_t>(i)].live = (l_bits >> i) & 1u;
   }
   return fa;
}

}  // namespace

bool eval_safety(const circuit_node& node, const fault_assignment& fa) {
   return eval_node(node, fa).s;
}

bool eval_liveness(const circuit_node& node, const fault_assignment& fa) {
   return eval_node(node, fa).l;
}

characterization predicted_properties(const circuit_node& node, net_mode mode, int k) {
   node.validate();
   if (mode == net_mode::partial_synchrony && has_lvs(node))
      throw config_error("lvs gates are defined under synchrony only");
   if (k == 0) k = node.max_leaf();
   if (k < node.max_leaf()) throw config_error("k smaller than the largest leaf index");
   if (k > 15) throw config_error("predicted_properties: k capped at 15");

   uint32_t all = k >= 32 ? 0xffffffffu : ((1u << k) - 1);
   size_t side = static_cast<size_t>(all) + 1;
   std::vector<uint8_t> safe_table(side * side), live_table(side * side);
   for (uint32_t s = 0; s <= all; ++s)
      for (uint32_t l = 0; l <= all; ++l) {
         auto r = eval_node(node, assignment_from_bits(k, s, l));
         safe_table[s * side + l] = r.s;
         live_table[s * side + l] = r.l;
      }

   // Monotone functions: a true point is extreme iff clearing any single
   // bit makes it false.
   auto extremes = [&](const std::vector<uint8_t>& table) {
      std::vector<guarantee> out;
      for (uint32_t s = 0; s <= all; ++s)
         for (uint32_t l = 0; l <= all; ++l) {
            if (!table[s * side + l]) continue;
            bool extreme = true;
            for (int i = 0; i < k && extreme; ++i) {
               uint32_t bit = 1u << i;
               if ((s & bit) && table[(s ^ bit) * side + l]) extreme = false;
               if ((l & bit) && table[s * side + (l ^ bit)]) extreme = false;
            }
            if (extreme) out.push_back(guarantee{bit_vector{k, s}, bit_vector{k, l}});
         }
      std::sort(out.begin(), out.end());
      return out;
   };

   characterization c;
   c.mode = characterization::mode_t::general;
   c.k = k;
   c.es = extremes(safe_table);
   c.el = extremes(live_table);
   return c;
}

// --- extreme elements -------------------------------------------------------------

std::vector<guarantee> exm(std::vector<guarantee> v) {
   std::sort(v.begin(), v.end());
   v.erase(std::unique(v.begin(), v.end()), v.end());
   std::vector<guarantee> out;
   for (const auto& a : v) {
      bool minimal = true;
      for (const auto& b : v)
         if (!(b == a) && leq(b, a)) {
            minimal = false;
            break;
         }
      if (minimal) out.push_back(a);
   }
   return out;
}

std::vector<perm_triple> exm(std::vector<perm_triple> v) {
   std::sort(v.begin(), v.end());
   v.erase(std::unique(v.begin(), v.end()), v.end());
   std::vector<perm_triple> out;
   for (const auto& a : v) {
      bool minimal = true;
      for (const auto& b : v)
         if (!(b == a) && leq(b, a)) {
            minimal = false;
            break;
         }
      if (minimal) out.push_back(a);
   }
   return out;
}

perm_triple class_rep(const bit_vector& s, const bit_vector& l) {
   perm_triple t;
   t.ns = s.count();
   t.nl = l.count();
   t.nsl = bit_vector{s.k, s.bits & l.bits}.count();
   return t;
}

characterization to_perm_invariant(const characterization& c) {
   if (c.mode == characterization::mode_t::perm_invariant) return c;
   int k = c.k;
   std::vector<int> perm(static_cast<size_t>(k));
   for (int i = 0; i < k; ++i) perm[static_cast<size_t>(i)] = i;

   auto permuted = [&](const bit_vector& v, const std::vector<int>& p) {
      bit_vector out{v.k, 0};
      for (int i = 1; i <= v.k; ++i)
         if (v.bit(p[static_cast<size_t>(i - 1)] + 1)) out.bits |= 1u << (i - 1);
      return out;
   };
   auto check_closed = [&](const std::vector<guarantee>& set) {
      std::set<guarantee> have(set.begin(), set.end());
      std::vector<int> p = perm;
      do {
         for (const auto& g : set)
            if (!have.count(guarantee{permuted(g.s, p), permuted(g.l, p)})) return false;
      } while (std::next_permutation(p.begin(), p.end()));
      return true;
   };
   if (!check_closed(c.es) || !check_closed(c.el))
      throw config_error("characterization is not permutation invariant");

   characterization out;
   out.mode = characterization::mode_t::perm_invariant;
   out.k = k;
   std::set<perm_triple> ps, pl;
   for (const auto& g : c.es) ps.insert(class_rep(g.s, g.l));
   for (const auto& g : c.el) pl.insert(class_rep(g.s, g.l));
   out.ps = exm(std::vector<perm_triple>(ps.begin(), ps.end()));
   out.pl = exm(std::vector<perm_triple>(pl.begin(), pl.end()));
   return out;
}

// --- synthesis ---------------------------------------------------------------------

namespace {

circuit_node relabel(const circuit_node& n, const std::vector<int>& mapping) {
   if (n.kind == circuit_node::kind_t::leaf)
      return circuit_node::leaf(mapping.at(static_cast<size_t>(n.leaf_index - 1)));
   circuit_node out = n;
   out.children.clear();
   for (const auto& c : n.children) out.children.push_back(relabel(c, mapping));
   return out;
}

std::vector<std::vector<int>> subsets_of_size(int n, int r) {
   std::vector<std::vector<int>> out;
   std::vector<int> idx(static_cast<size_t>(r));
   for (int i = 0; i < r; ++i) idx[static_cast<size_t>(i)] = i + 1;
   while (true) {
      out.push_back(idx);
      int i = r - 1;
      while (i >= 0 && idx[static_cast<size_t>(i)] == n - (r - 1 - i)) --i;
      if (i < 0) break;
      ++idx[static_cast<size_t>(i)];
      for (int j = i + 1; j < r; ++j)
         idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
   }
   return out;
}

circuit_node serial_of(std::vector<circuit_node> parts) {
   if (parts.empty()) throw config_error("serial composition of nothing");
   if (parts.size() == 1) return parts.front();
   return circuit_node::serial(std::move(parts));
}

}  // namespace

circuit_node lvl_network(std::vector<circuit_node> children) {
   int n = static_cast<int>(children.size());
   if (n == 1) return children.front();
   if (n < 3 || n % 2 == 0) throw config_error("lvl network needs an odd number >= 3 of parts");
   int f = (n - 1) / 2;
   if (f == 1) return circuit_node::lvl(std::move(children));

   // All size-(2f-1) subsets, lexicographic, each through the smaller network.
   auto idx_sets = subsets_of_size(n, 2 * f - 1);
   std::vector<circuit_node> stage;
   for (const auto& set : idx_sets) {
      std::vector<circuit_node> part;
      for (int i : set) part.push_back(children[static_cast<size_t>(i - 1)]);
      stage.push_back(lvl_network(std::move(part)));
   }

   // Greedy lexicographic grouping.
   std::vector<circuit_node> outputs;
   size_t pos = 0;
   auto take_group = [&](int size) {
      std::vector<circuit_node> group;
      for (int i = 0; i < size; ++i) group.push_back(stage[pos++]);
      return group;
   };
   if (f % 2 == 1) {
      // f odd: f+1 groups of 2f-1 plus one leftover part, arity f+2 at the top.
      for (int g = 0; g < f + 1; ++g) outputs.push_back(lvl_network(take_group(2 * f - 1)));
      outputs.push_back(stage[pos++]);
   } else {
      // f even: f groups of 2f-1, the last 2f parts through the one-extra
      // serial-of-subsets lift, arity f+1 at the top.
      for (int g = 0; g < f; ++g) outputs.push_back(lvl_network(take_group(2 * f - 1)));
      auto last = take_group(2 * f);
      auto lift_sets = subsets_of_size(2 * f, 2 * f - 1);
      std::vector<circuit_node> lifted;
      for (const auto& set : lift_sets) {
         std::vector<circuit_node> part;
         for (int i : set) part.push_back(last[static_cast<size_t>(i - 1)]);
         lifted.push_back(lvl_network(std::move(part)));
      }
      outputs.push_back(serial_of(std::move(lifted)));
   }
   return lvl_network(std::move(outputs));
}

circuit_node synthesize_lvl(int f, int max_k) {
   if (f < 1) throw config_error("synthesize_lvl: f must be >= 1");
   if (2 * f + 1 > max_k)
      throw config_error("synthesize_lvl: 2f+1 exceeds the materialization cap");
   std::vector<circuit_node> leaves;
   for (int i = 1; i <= 2 * f + 1; ++i) leaves.push_back(circuit_node::leaf(i));
   return lvl_network(std::move(leaves));
}

circuit_node lemma_leave(const circuit_node& base, int k, int m, int max_k) {
   if (m < 1) throw config_error("lemma_leave: m must be >= 1");
   if (base.max_leaf() > k) throw config_error("lemma_leave: base uses more than k leaves");
   if (k + m > max_k) throw config_error("lemma_leave: k+m exceeds the materialization cap");
   std::vector<circuit_node> parts;
   for (const auto& subset : subsets_of_size(k + m, k)) parts.push_back(relabel(base, subset));
   return serial_of(std::move(parts));
}

circuit_node synthesize_ksl(int k, int s, int l, int max_k) {
   if (k < 1) throw config_error("synthesize_ksl: k must be >= 1");
   if (l < k / 2 + 1)
      throw config_error("unachievable: l=" + std::to_string(l) + " < floor(k/2)+1=" +
                         std::to_string(k / 2 + 1));
   if (l > k) throw config_error("unachievable: l=" + std::to_string(l) + " > k");
   if (s < 2 * (k - l) + 1)
      throw config_error("unachievable: s=" + std::to_string(s) + " < 2(k-l)+1=" +
                         std::to_string(2 * (k - l) + 1));
   if (k > max_k) throw config_error("synthesize_ksl: k exceeds the materialization cap");

   int fb = k - l;                  // boundary point (2fb+1, 2fb+1, fb+1)
   int boundary_k = 2 * fb + 1;
   circuit_node base = fb == 0 ? circuit_node::leaf(1) : synthesize_lvl(fb, max_k);
   int m = k - boundary_k;
   if (m == 0) return base;
   return lemma_leave(base, boundary_k, m, max_k);
}

// --- general-form checkers and synthesis ----------------------------------------------

namespace {

std::string vec_str(const bit_vector& v) { return v.to_string(); }

uint32_t inter3(uint32_t a, uint32_t b, uint32_t c) { return a & b & c; }

}  // namespace

std::optional<std::string> check_general_psync(const std::vector<guarantee>& es,
                                               const std::vector<guarantee>& el, int k) {
   for (const auto& g : el)
      if (g.l.k != k || g.s.k != k) return "liveness tuple with wrong width";
   for (const auto& g : es)
      if (g.l.k != k || g.s.k != k) return "safety tuple with wrong width";
   for (const auto& g : el)
      if (g.s.bits != 0) return "liveness tuple (" + vec_str(g.s) + "," + vec_str(g.l) +
                                ") depends on safety";
   for (const auto& g : es)
      if (g.l.bits != 0) return "safety tuple (" + vec_str(g.s) + "," + vec_str(g.l) +
                                ") depends on liveness";
   for (const auto& l1 : el)
      for (const auto& l2 : el)
         for (const auto& s : es)
            if (inter3(l1.l.bits, l2.l.bits, s.s.bits) == 0)
               return "triple (" + vec_str(l1.l) + ", " + vec_str(l2.l) + ", " + vec_str(s.s) +
                      ") has empty intersection";
   return std::nullopt;
}

std::optional<std::string> check_general_sync_reason(const std::vector<guarantee>& es,
                                                     const std::vector<guarantee>& el, int k) {
   for (const auto& g : el)
      if (g.l.k != k || g.s.k != k) return "liveness tuple with wrong width";
   for (const auto& g : es)
      if (g.l.k != k || g.s.k != k) return "safety tuple with wrong width";
   for (const auto& g : el)
      if (g.s.bits != 0) return "liveness tuple (" + vec_str(g.s) + "," + vec_str(g.l) +
                                ") depends on safety";
   for (const auto& l1 : el)
      for (const auto& l2 : el)
         for (const auto& s : es) {
            bool pair_ok = (l1.l.bits & s.s.bits & s.l.bits) != 0 &&
                           (l2.l.bits & s.s.bits & s.l.bits) != 0;
            bool common_safe = inter3(l1.l.bits, l2.l.bits, s.s.bits) != 0;
            if (!pair_ok && !common_safe)
               return "triple (" + vec_str(l1.l) + ", " + vec_str(l2.l) + ", (" + vec_str(s.s) +
                      "," + vec_str(s.l) + ")) has neither a safe-live pair nor a common safe chain";
         }
   return std::nullopt;
}

bool check_general_sync(const std::vector<guarantee>& es, const std::vector<guarantee>& el,
                        int k) {
   return !check_general_sync_reason(es, el, k).has_value();
}

namespace {

std::vector<std::vector<int>> liveness_quorums(const std::vector<guarantee>& el) {
   std::vector<std::vector<int>> quorums;
   for (const auto& g : el) {
      auto q = ind(g.l);
      if (q.empty()) throw config_error("empty liveness quorum");
      if (std::find(quorums.begin(), quorums.end(), q) == quorums.end()) quorums.push_back(q);
   }
   return quorums;
}

std::vector<int> intersect_sorted(const std::vector<int>& a, const std::vector<int>& b) {
   std::vector<int> out;
   std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
   return out;
}

circuit_node serial_of_indices(const std::vector<int>& q) {
   std::vector<circuit_node> parts;
   for (int i : q) parts.push_back(circuit_node::leaf(i));
   return serial_of(std::move(parts));
}

/// App-style quorum induction shared by the psync and sync constructions;
/// with_lvs adds the cross-pair lvs blocks to the intersection serials.
circuit_node build_quorum_circuit(const std::vector<std::vector<int>>& quorums, bool with_lvs) {
   circuit_node prev = serial_of_indices(quorums.front());
   for (size_t m = 1; m < quorums.size(); ++m) {
      const auto& next_q = quorums[m];
      circuit_node second = serial_of_indices(next_q);

      std::vector<circuit_node> third_parts;
      for (size_t i = 0; i < m; ++i) {
         auto common = intersect_sorted(quorums[i], next_q);
         std::vector<circuit_node> serial_parts;
         for (int c : common) serial_parts.push_back(circuit_node::leaf(c));
         if (with_lvs) {
            std::set<std::pair<int, int>> pairs;
            for (int j1 : quorums[i])
               for (int j2 : next_q)
                  if (j1 != j2) pairs.insert({std::min(j1, j2), std::max(j1, j2)});
            for (const auto& [a, b] : pairs)
               serial_parts.push_back(
                   circuit_node::lvs({circuit_node::leaf(a), circuit_node::leaf(b)}));
         }
         if (serial_parts.empty())
            throw config_error("quorums " + std::to_string(i + 1) + " and " +
                               std::to_string(m + 1) +
                               " are disjoint: no gate circuit can cover them");
         third_parts.push_back(serial_of(std::move(serial_parts)));
      }
      for (size_t i = 0; i + 1 < m; ++i) third_parts.push_back(prev);

      circuit_node third = third_parts.size() == 1 ? third_parts.front()
                                                   : lvl_network(std::move(third_parts));
      prev = circuit_node::lvl({prev, std::move(second), std::move(third)});
   }
   return prev;
}

}  // namespace

circuit_node synthesize_general_psync(const std::vector<guarantee>& es,
                                      const std::vector<guarantee>& el, int k, int max_k) {
   if (auto reason = check_general_psync(es, el, k))
      throw config_error("unachievable under partial synchrony: " + *reason);
   if (k > max_k) throw config_error("k exceeds the materialization cap");
   if (el.empty()) {
      for (const auto& g : es)
         if (g.s.bits == 0) throw config_error("unconditional safety is unachievable");
      std::vector<circuit_node> parts;
      for (int i = 1; i <= k; ++i) parts.push_back(circuit_node::leaf(i));
      return serial_of(std::move(parts));
   }
   return build_quorum_circuit(liveness_quorums(el), false);
}

circuit_node synthesize_general_sync(const std::vector<guarantee>& es,
                                     const std::vector<guarantee>& el, int k, int max_k) {
   if (auto reason = check_general_sync_reason(es, el, k))
      throw config_error("unachievable under synchrony: " + *reason);
   if (k > max_k) throw config_error("k exceeds the materialization cap");
   if (el.empty()) {
      for (const auto& g : es)
         if (g.s.bits == 0 && g.l.bits == 0)
            throw config_error("unconditional safety is unachievable");
      std::vector<circuit_node> parts;
      for (int i = 1; i <= k; ++i) parts.push_back(circuit_node::leaf(i));
      return serial_of(std::move(parts));
   }
   return build_quorum_circuit(liveness_quorums(el), true);
}

// --- dominance and pareto ----------------------------------------------------------

bool dominates(const characterization& p, const characterization& q) {
   if (p.k != q.k) throw config_error("dominates: mismatched chain counts");
   if (p.mode != q.mode) throw config_error("dominates: mismatched characterization modes");
   if (p.mode == characterization::mode_t::general) {
      auto covered = [](const std::vector<guarantee>& mine, const std::vector<guarantee>& theirs) {
         for (const auto& t : theirs) {
            bool ok = false;
            for (const auto& m : mine)
               if (leq(m, t)) {
                  ok = true;
                  break;
               }
            if (!ok) return false;
         }
         return true;
      };
      return covered(p.es, q.es) && covered(p.el, q.el);
   }
   auto covered = [](const std::vector<perm_triple>& mine, const std::vector<perm_triple>& theirs) {
      for (const auto& t : theirs) {
         bool ok = false;
         for (const auto& m : mine)
            if (leq(m, t)) {
               ok = true;
               break;
            }
         if (!ok) return false;
      }
      return true;
   };
   return covered(p.ps, q.ps) && covered(p.pl, q.pl);
}

std::vector<characterization> pareto_set(int k, net_mode mode) {
   if (k < 1) throw config_error("pareto_set: k must be >= 1");
   std::vector<characterization> out;
   for (int ml = k / 2 + 1; ml <= k; ++ml) {
      characterization c;
      c.mode = characterization::mode_t::perm_invariant;
      c.k = k;
      c.ps.push_back(perm_triple{2 * (k - ml) + 1, 0, 0});
      if (mode == net_mode::synchrony) c.ps.push_back(perm_triple{0, 0, k - ml + 1});
      c.pl.push_back(perm_triple{0, ml, 0});
      out.push_back(std::move(c));
   }
   return out;
}

}  // namespace ccirc
