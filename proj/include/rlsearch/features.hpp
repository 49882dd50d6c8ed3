#pragma once

#include <vector>

#include "rlsearch/instance.hpp"
#include "rlsearch/solution.hpp"

namespace rls {

// Raw per-position inputs. TSP: the visited node's coordinates (F = 2).
// CVRP: coordinates of the cyclic left neighbor, the node itself and the
// cyclic right neighbor, plus the node's demand scaled by capacity (F = 7).
int feature_dim(problem_kind kind);

// Row-major I x F matrix for the current state.
std::vector<double> node_features(const instance& inst, const solution& sol);

// Sinusoidal positional encoding: sin(pos / 10000^(floor(dim/2)/d_model)) on
// even dims, cos of the same argument on odd dims.
double positional_encoding(int pos, int dim, int d_model);

}  // namespace rls
