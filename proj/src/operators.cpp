#include "rlsearch/operators.hpp"

#include <algorithm>

#include "rlsearch/error.hpp"

namespace rls {

const char* operator_name(operator_kind op) {
  switch (op) {
    case operator_kind::two_opt: return "2-opt";
    case operator_kind::node_swap: return "swap";
    case operator_kind::relocation: return "relocation";
  }
  return "?";
}

operator_kind operator_from_name(const std::string& name) {
  if (name == "2-opt" || name == "two-opt" || name == "two_opt") return operator_kind::two_opt;
  if (name == "swap" || name == "node-swap" || name == "node_swap") return operator_kind::node_swap;
  if (name == "relocation" || name == "relocate") return operator_kind::relocation;
  fail(errc::invalid_argument, "unknown operator: " + name);
}

namespace {

void require_bounds(const solution& sol, int i, int j) {
  const int I = sol.size();
  if (i < 0 || j < 0 || i >= I || j >= I) fail(errc::invalid_argument, "action position out of range");
}

}  // namespace

solution apply_two_opt(const solution& sol, action a) {
  require_bounds(sol, a.i, a.j);
  if (a.i == a.j) fail(errc::degenerate_action, "degenerate-action");
  solution next = sol;
  std::reverse(next.seq.begin() + a.i, next.seq.begin() + a.j + 1);
  return next;
}

solution apply_node_swap(const solution& sol, action a) {
  require_bounds(sol, a.i, a.j);
  if (a.i == a.j) fail(errc::degenerate_action, "degenerate-action");
  solution next = sol;
  std::swap(next.seq[static_cast<size_t>(a.i)], next.seq[static_cast<size_t>(a.j)]);
  return next;
}

solution apply_relocation_directed(const solution& sol, int from, int to) {
  require_bounds(sol, from, to);
  if (from == to) fail(errc::degenerate_action, "degenerate-action");
  solution next = sol;
  const int moved = next.seq[static_cast<size_t>(from)];
  next.seq.erase(next.seq.begin() + from);
  const int insert_at = to > from ? to : to + 1;  // slot right after the element originally at `to`
  next.seq.insert(next.seq.begin() + insert_at, moved);
  return next;
}

solution apply_relocation(const solution& sol, action a) { return apply_relocation_directed(sol, a.i, a.j); }

solution apply_cell(operator_kind op, const solution& sol, int i, int j) {
  switch (op) {
    case operator_kind::two_opt: return apply_two_opt(sol, make_action(i, j));
    case operator_kind::node_swap: return apply_node_swap(sol, make_action(i, j));
    case operator_kind::relocation: return apply_relocation_directed(sol, i, j);
  }
  fail(errc::invalid_argument, "unknown operator");
}

double move_delta(const instance& inst, const solution& sol, operator_kind op, int i, int j) {
  require_bounds(sol, i, j);
  if (i == j) fail(errc::degenerate_action, "degenerate-action");
  const int I = sol.size();
  const auto& s = sol.seq;
  const auto at = [&](int k) { return s[static_cast<size_t>(((k % I) + I) % I)]; };

  switch (op) {
    case operator_kind::two_opt: {
      const int lo = std::min(i, j), hi = std::max(i, j);
      if (lo == 0 && hi == I - 1) return 0.0;  // full reversal, same cycle
      const int a = at(lo - 1), b = at(lo), c = at(hi), e = at(hi + 1);
      return inst.dist(a, c) + inst.dist(b, e) - inst.dist(a, b) - inst.dist(c, e);
    }
    case operator_kind::node_swap: {
      const int lo = std::min(i, j), hi = std::max(i, j);
      if (I == 2) return 0.0;
      const int x = at(lo), y = at(hi);
      if (hi == lo + 1) {
        const int a = at(lo - 1), b = at(hi + 1);
        return inst.dist(a, y) + inst.dist(x, b) - inst.dist(a, x) - inst.dist(y, b);
      }
      if (lo == 0 && hi == I - 1) {  // cyclically adjacent: y precedes x across the wrap
        const int a = at(hi - 1), b = at(lo + 1);
        return inst.dist(a, x) + inst.dist(y, b) - inst.dist(a, y) - inst.dist(x, b);
      }
      const int p = at(lo - 1), ni = at(lo + 1), pj = at(hi - 1), nj = at(hi + 1);
      return inst.dist(p, y) + inst.dist(y, ni) + inst.dist(pj, x) + inst.dist(x, nj) -
             (inst.dist(p, x) + inst.dist(x, ni) + inst.dist(pj, y) + inst.dist(y, nj));
    }
    case operator_kind::relocation: {
      if (((j + 1) % I) == i) return 0.0;  // reinserting after the predecessor is the identity
      const int p = at(i - 1), x = at(i), nx = at(i + 1), t = at(j), u = at(j + 1);
      return inst.dist(p, nx) + inst.dist(t, x) + inst.dist(x, u) -
             (inst.dist(p, x) + inst.dist(x, nx) + inst.dist(t, u));
    }
  }
  fail(errc::invalid_argument, "unknown operator");
}

namespace {

// O(1)-per-pair feasibility of CVRP 2-opt moves. Reversing slots [i..j] only
// changes the two customer runs crossing the joints (i-1,i) and (j,j+1); every
// other run keeps its load. Loads of the affected runs are assembled from
// demand prefix sums and the depot positions nearest to the joints.
class two_opt_mask_builder {
public:
  two_opt_mask_builder(const instance& inst, const solution& sol) : inst_(inst), sol_(sol), I_(sol.size()) {
    pref_.resize(static_cast<size_t>(I_) + 1, 0);
    for (int k = 0; k < I_; ++k) {
      const int v = sol.seq[static_cast<size_t>(k)];
      pref_[static_cast<size_t>(k) + 1] = pref_[static_cast<size_t>(k)] + inst.demand(v);
      if (v == inst.depot()) depots_.push_back(k);
    }
  }

  bool feasible(int i, int j) const {
    const auto lb = std::lower_bound(depots_.begin(), depots_.end(), i);
    const auto ub = std::upper_bound(depots_.begin(), depots_.end(), j);
    const int inside = static_cast<int>(ub - lb);
    if (inside == 0) return true;                 // pure intra-route reversal
    if (i == 0 && j == I_ - 1) return true;       // full reversal, same cycle
    const int lo_in = *lb;
    const int hi_in = *(ub - 1);
    const int head_rev = load(hi_in + 1, j);      // run that will start the reversed segment
    const int tail_rev = load(i, lo_in - 1);      // run that will end it
    const int outside = static_cast<int>(depots_.size()) - inside;
    if (outside == 0) {
      // depot-free outside region: both joints merge into one run
      const int outside_load = cyc_load(j + 1, i - 1);
      return outside_load + head_rev + tail_rev <= inst_.capacity();
    }
    const int d1 = nearest_backward(i - 1);
    const int between_left = static_cast<int>(((static_cast<long>(i) - d1 + I_) % I_)) - 1;
    const int left_tail = between_left > 0 ? cyc_load(d1 + 1, d1 + between_left) : 0;
    const int d2 = nearest_forward((j + 1) % I_);
    const int between_right = static_cast<int>(((static_cast<long>(d2) - j + I_) % I_)) - 1;
    const int right_tail = between_right > 0 ? cyc_load(j + 1, j + between_right) : 0;
    return left_tail + head_rev <= inst_.capacity() && tail_rev + right_tail <= inst_.capacity();
  }

private:
  int load(int a, int b) const {  // inclusive, 0 when empty
    return a > b ? 0 : pref_[static_cast<size_t>(b) + 1] - pref_[static_cast<size_t>(a)];
  }
  int cyc_load(int a, int b) const {  // inclusive cyclic interval walked forward from a to b
    a = ((a % I_) + I_) % I_;
    b = ((b % I_) + I_) % I_;
    return a <= b ? load(a, b) : load(a, I_ - 1) + load(0, b);
  }
  int nearest_backward(int pos) const {  // nearest depot at or before pos, wrapping
    pos = ((pos % I_) + I_) % I_;
    const auto it = std::upper_bound(depots_.begin(), depots_.end(), pos);
    return it == depots_.begin() ? depots_.back() : *(it - 1);
  }
  int nearest_forward(int pos) const {  // nearest depot at or after pos, wrapping
    const auto it = std::lower_bound(depots_.begin(), depots_.end(), pos);
    return it == depots_.end() ? depots_.front() : *it;
  }

  const instance& inst_;
  const solution& sol_;
  int I_;
  std::vector<int> pref_;
  std::vector<int> depots_;
};

}  // namespace

std::vector<uint8_t> feasibility_mask(const instance& inst, const solution& sol, operator_kind op) {
  const int I = sol.size();
  std::vector<uint8_t> mask(static_cast<size_t>(I) * static_cast<size_t>(I), 0);
  if (inst.kind() == problem_kind::tsp) {
    for (int i = 0; i < I; ++i) {
      for (int j = 0; j < I; ++j) {
        if (i != j) mask[static_cast<size_t>(i) * I + j] = 1;
      }
    }
    return mask;
  }
  if (op == operator_kind::two_opt) {
    two_opt_mask_builder builder(inst, sol);
    for (int i = 0; i < I; ++i) {
      for (int j = i + 1; j < I; ++j) {
        const uint8_t ok = builder.feasible(i, j) ? 1 : 0;
        mask[static_cast<size_t>(i) * I + j] = ok;
        mask[static_cast<size_t>(j) * I + i] = ok;
      }
    }
    return mask;
  }
  // swap is symmetric, relocation directional
  for (int i = 0; i < I; ++i) {
    const int j_start = op == operator_kind::node_swap ? i + 1 : 0;
    for (int j = j_start; j < I; ++j) {
      if (i == j) continue;
      const uint8_t ok = is_feasible(inst, apply_cell(op, sol, i, j)) ? 1 : 0;
      mask[static_cast<size_t>(i) * I + j] = ok;
      if (op == operator_kind::node_swap) mask[static_cast<size_t>(j) * I + i] = ok;
    }
  }
  return mask;
}

}  // namespace rls
