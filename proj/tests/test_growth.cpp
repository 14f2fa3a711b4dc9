// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <array>
#include <cstdint>
#include <set>
#include <vector>

#include "spherization/entropy.hpp"
#include "spherization/growth.hpp"

using namespace spherization;

namespace {

// Independent oracle: BFS with an ordered set and the semidirect law written
// out with explicit powers of A.
std::vector<std::uint64_t> oracle_balls(int n_max) {
  using E = std::array<long long, 3>;
  auto apply_power = [](long long l, long long x, long long y) {
    // A = [[2,1],[1,1]], A^-1 = [[1,-1],[-1,2]].
    for (long long i = 0; i < (l > 0 ? l : -l); ++i) {
      const long long nx = l > 0 ? 2 * x + y : x - y;
      const long long ny = l > 0 ? x + y : -x + 2 * y;
      x = nx;
      y = ny;
    }
    return std::array<long long, 2>{x, y};
  };
  const std::array<E, 6> gens{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
  std::set<E> seen{{0, 0, 0}};
  std::vector<E> frontier{{0, 0, 0}};
  std::vector<std::uint64_t> b{1};
  for (int n = 1; n <= n_max; ++n) {
    std::vector<E> next;
    for (const E& g : frontier) {
      for (const E& s : gens) {
        const auto v = apply_power(g[2], s[0], s[1]);
        const E h{g[0] + v[0], g[1] + v[1], g[2] + s[2]};
        if (seen.insert(h).second) next.push_back(h);
      }
    }
    frontier = std::move(next);
    b.push_back(seen.size());
  }
  return b;
}

}  // namespace

TEST_CASE("ball counts match the independent BFS oracle") {
  const std::vector<std::uint64_t> frozen{1, 7, 33, 103, 273, 663, 1521, 3355, 7277, 15547, 32817, 68607, 142241};
  CHECK(oracle_balls(12) == frozen);
  CHECK(ball_counts(IntMatrix2{{2, 1, 1, 1}}, 12) == frozen);
}

TEST_CASE("abelian control grows quadratically") {
  const auto b = ball_counts(IntMatrix2{{2, 1, 1, 1}}, 48, GeneratorSet::AbelianControl);
  for (int n = 0; n <= 48; ++n) CHECK(b[n] == std::uint64_t(2 * n * n + 2 * n + 1));
  std::vector<double> y(b.begin(), b.end());
  const GrowthFit f = fit_exponential_rate(y, 6);
  CHECK(f.verdict == Verdict::Polynomial);
  CHECK(f.rate <= 0.1);
}

TEST_CASE("semidirect growth is exponential") {
  const auto b = ball_counts(IntMatrix2{{2, 1, 1, 1}}, 12);
  for (std::size_t n = 1; n < b.size(); ++n) CHECK(b[n] > b[n - 1]);
  std::vector<double> y(b.begin(), b.end());
  const GrowthFit f = fit_exponential_rate(y, 6);
  CHECK(f.verdict == Verdict::Exponential);
  CHECK(f.rate >= 0.3);
}

TEST_CASE("radius cap") { CHECK_THROWS(ball_counts(IntMatrix2{{2, 1, 1, 1}}, 17)); }
