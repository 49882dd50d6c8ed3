#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rlsearch/solution.hpp"

namespace rls {

enum class operator_kind : uint8_t { two_opt = 0, node_swap = 1, relocation = 2 };

const char* operator_name(operator_kind op);
operator_kind operator_from_name(const std::string& name);

// Segment reversal of slots i..j. Involution.
solution apply_two_opt(const solution& sol, action a);

// Exchange of slots i and j. Involution.
solution apply_node_swap(const solution& sol, action a);

// Occupant of position i removed and reinserted immediately after the element
// originally at position j. The canonical pair is directional here; the
// reverse move is expressed through apply_relocation_directed(j, i).
solution apply_relocation(const solution& sol, action a);
solution apply_relocation_directed(const solution& sol, int from, int to);

// Applies op for a raw matrix cell: 2-opt and swap canonicalize the pair,
// relocation keeps the sampled direction (move occupant of i after j).
solution apply_cell(operator_kind op, const solution& sol, int i, int j);

// O(1) change in tour_length caused by apply_cell; agrees with full
// recomputation to 1e-9 absolute.
double move_delta(const instance& inst, const solution& sol, operator_kind op, int i, int j);

// Row-major I*I matrix; entry (i,j) true iff apply_cell(op, sol, i, j) yields
// a feasible solution. Diagonal false; for TSP every off-diagonal entry true.
std::vector<uint8_t> feasibility_mask(const instance& inst, const solution& sol, operator_kind op);

}  // namespace rls
