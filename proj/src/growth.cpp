// SPDX-License-Identifier: Apache-2.0
#include "spherization/growth.hpp"

#include <unordered_set>

#include "spherization/errors.hpp"

namespace spherization {

std::vector<std::uint64_t> ball_counts(const IntMatrix2& A, int n_max, GeneratorSet gens, std::size_t max_elements) {
  if (n_max < 0) throw config_error("n_max must be non-negative");
  if (gens == GeneratorSet::SemiDirect && n_max > 16) throw config_error("semidirect ball counts are limited to n_max <= 16");
  if (A.det() != 1) throw config_error("monodromy must have determinant 1");
  std::vector<GroupElement> generators{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  if (gens == GeneratorSet::SemiDirect) {
    generators.push_back({0, 0, 1});
    generators.push_back({0, 0, -1});
  }
  std::unordered_set<GroupElement, GroupElementHash> seen{GroupElement{}};
  std::vector<GroupElement> frontier{GroupElement{}};
  std::vector<std::uint64_t> b{1};
  for (int n = 1; n <= n_max; ++n) {
    std::vector<GroupElement> next;
    for (const GroupElement& g : frontier) {
      for (const GroupElement& s : generators) {
        const GroupElement h = multiply(g, s, A);
        if (seen.insert(h).second) next.push_back(h);
      }
    }
    if (seen.size() > max_elements) throw budget_error("Cayley ball exceeds the element budget");
    b.push_back(seen.size());
    frontier = std::move(next);
  }
  return b;
}

}  // namespace spherization
