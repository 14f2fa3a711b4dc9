// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "spherization/lattice_group.hpp"

namespace spherization {

enum class GeneratorSet {
  /// (+-e1, 0), (+-e2, 0), (0, +-1) in Z^2 x|_A Z.
  SemiDirect,
  /// (+-e1, 0), (+-e2, 0) only, with l frozen: the Z^2 control.
  AbelianControl,
};

/// b_0..b_{n_max}: number of elements of word length <= n, by breadth-first
/// search of the Cayley graph. The semidirect product is limited to n_max <= 16.
std::vector<std::uint64_t> ball_counts(const IntMatrix2& A, int n_max, GeneratorSet gens = GeneratorSet::SemiDirect,
                                       std::size_t max_elements = 50'000'000);

}  // namespace spherization
