// SPDX-License-Identifier: Apache-2.0
#pragma once

// Conforming edge-bisection refinement shared by the volume estimator and the
// chord census. Polylines (j = 1) split segments; surfaces (j = 2) split each
// triangle by the number of its marked edges into 2, 3 or 4 children, so
// neighbours always agree on inserted midpoints.

#include <algorithm>
#include <array>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace spherization {

class SplitMesh {
 public:
  using Cell = std::array<int, 3>;

  SplitMesh(int j, std::vector<Cell> cells) : j_(j), cells_(std::move(cells)) {
    for (int c = 0; c < static_cast<int>(cells_.size()); ++c) attach(c);
    mark_all_dirty();
  }

  int j() const { return j_; }
  const std::vector<Cell>& cells() const { return cells_; }
  void mark_all_dirty() {
    dirty_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) dirty_[c] = static_cast<int>(c);
  }

  /// Edges of dirty cells for which too_long(a, b) holds, in first-seen order.
  /// Clears the dirty set.
  template <class Pred>
  std::vector<std::pair<int, int>> long_edges(Pred&& too_long) {
    std::vector<std::pair<int, int>> out;
    std::unordered_set<std::uint64_t> seen;
    for (int c : dirty_) {
      for (int e = 0; e < edges_per_cell(); ++e) {
        const auto [a, b] = edge(cells_[c], e);
        if (!seen.insert(key(a, b)).second) continue;
        if (too_long(a, b)) out.emplace_back(a, b);
      }
    }
    dirty_.clear();
    return out;
  }

  /// Splits the given edges; edge i gets midpoint vertex first_new + i. The
  /// children become the new dirty set.
  void split(const std::vector<std::pair<int, int>>& edges, int first_new) {
    std::unordered_map<std::uint64_t, int> mids;
    std::vector<int> affected;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::uint64_t k = key(edges[i].first, edges[i].second);
      mids.emplace(k, first_new + static_cast<int>(i));
      for (int c : adjacency_.at(k))
        if (c >= 0) affected.push_back(c);
    }
    std::sort(affected.begin(), affected.end());
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
    auto mid = [&](int a, int b) {
      auto it = mids.find(key(a, b));
      return it == mids.end() ? -1 : it->second;
    };
    for (int c : affected) {
      const Cell s = cells_[c];
      detach(c);
      std::vector<Cell> kids;
      if (j_ == 1) {
        const int m = mid(s[0], s[1]);
        kids = {{s[0], m, -1}, {m, s[1], -1}};
      } else {
        const std::array<int, 3> e{mid(s[0], s[1]), mid(s[1], s[2]), mid(s[2], s[0])};
        const int marked = (e[0] >= 0) + (e[1] >= 0) + (e[2] >= 0);
        if (marked == 3) {
          kids = {{s[0], e[0], e[2]}, {e[0], s[1], e[1]}, {e[2], e[1], s[2]}, {e[0], e[1], e[2]}};
        } else if (marked == 1) {
          const int q = e[0] >= 0 ? 0 : (e[1] >= 0 ? 1 : 2);
          const int a = s[q], b = s[(q + 1) % 3], cc = s[(q + 2) % 3];
          kids = {{a, e[q], cc}, {e[q], b, cc}};
        } else {
          const int q = e[0] < 0 ? 0 : (e[1] < 0 ? 1 : 2);  // the unmarked edge (a, b)
          const int a = s[q], b = s[(q + 1) % 3], cc = s[(q + 2) % 3];
          const int mbc = e[(q + 1) % 3], mca = e[(q + 2) % 3];
          kids = {{a, b, mbc}, {a, mbc, mca}, {mca, mbc, cc}};
        }
      }
      cells_[c] = kids[0];
      attach(c);
      dirty_.push_back(c);
      for (std::size_t i = 1; i < kids.size(); ++i) {
        cells_.push_back(kids[i]);
        const int id = static_cast<int>(cells_.size()) - 1;
        attach(id);
        dirty_.push_back(id);
      }
    }
    std::sort(dirty_.begin(), dirty_.end());
  }

 private:
  static std::uint64_t key(int a, int b) {
    const auto [lo, hi] = std::minmax(a, b);
    return (static_cast<std::uint64_t>(lo) << 32) | static_cast<std::uint32_t>(hi);
  }
  int edges_per_cell() const { return j_ == 1 ? 1 : 3; }
  std::pair<int, int> edge(const Cell& s, int e) const {
    return j_ == 1 ? std::pair{s[0], s[1]} : std::pair{s[e], s[(e + 1) % 3]};
  }
  void attach(int c) {
    for (int e = 0; e < edges_per_cell(); ++e) {
      const auto [a, b] = edge(cells_[c], e);
      auto& slot = adjacency_.try_emplace(key(a, b), std::array<int, 2>{-1, -1}).first->second;
      (slot[0] < 0 ? slot[0] : slot[1]) = c;
    }
  }
  void detach(int c) {
    for (int e = 0; e < edges_per_cell(); ++e) {
      const auto [a, b] = edge(cells_[c], e);
      auto it = adjacency_.find(key(a, b));
      auto& slot = it->second;
      if (slot[0] == c) slot[0] = -1;
      if (slot[1] == c) slot[1] = -1;
      if (slot[0] < 0 && slot[1] < 0) adjacency_.erase(it);
    }
  }

  int j_;
  std::vector<Cell> cells_;
  std::unordered_map<std::uint64_t, std::array<int, 2>> adjacency_;
  std::vector<int> dirty_;
};

}  // namespace spherization
