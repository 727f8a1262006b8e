#pragma once

// Object-flow slicing: backward closure over the "mutates-before-use"
// relation of a seed path, started from a dependency call-site statement.

#include <cstddef>
#include <utility>
#include <vector>

#include "carve/seed_paths.hpp"

namespace carve {

struct FlowSlice {
  std::size_t path = 0;
  std::size_t seed = 0;
  std::vector<std::size_t> members;  // ascending path indices, seed excluded
  // (l, n): statement n uses a ref mutated by statement l; sorted.
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  friend bool operator==(const FlowSlice&, const FlowSlice&) = default;
};

// The closure alone, over raw statements. No precondition on the seed.
FlowSlice slice_statements(const std::vector<StatementNode>& statements, std::size_t k);

// Throws Usage when k is out of range or statement k spawned no DEP context.
FlowSlice compute_slice(const Analysis& analysis, std::size_t path, std::size_t k);

// One slice per DEP-bearing statement occurrence, ordered by (path, k).
std::vector<FlowSlice> compute_all_slices(const Analysis& analysis);
std::vector<FlowSlice> compute_all_slices_serial(const Analysis& analysis);

Json slices_to_json(const std::vector<FlowSlice>& slices);

}  // namespace carve
