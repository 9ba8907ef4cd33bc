#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "capscale/rng.hpp"

namespace capscale {

/// A node location in the unit square [-1/2, 1/2]^2.
using Point = Eigen::Vector2d;

/// Node positions, one column per node.
using Positions = Eigen::Matrix2Xd;

using NodeId = std::uint32_t;

/// 1-based cell coordinates; (1,1) is the lower-left cell.
struct CellCoord {
  int v1 = 1;  // column
  int v2 = 1;  // row

  friend bool operator==(const CellCoord&, const CellCoord&) = default;
  friend auto operator<=>(const CellCoord&, const CellCoord&) = default;
};

using SubLatticeId = int;

/// Regular r x r partition of the unit square.
class Lattice {
 public:
  Lattice(int r, double n_ref);

  int r() const { return r_; }
  int cell_count() const { return r_ * r_; }
  double side() const { return 1.0 / r_; }
  double n_ref() const { return n_ref_; }

  bool contains(const CellCoord& c) const {
    return c.v1 >= 1 && c.v1 <= r_ && c.v2 >= 1 && c.v2 <= r_;
  }

  /// Row-major linear index: (v2-1)*r + (v1-1).
  std::size_t index(const CellCoord& c) const {
    return static_cast<std::size_t>(c.v2 - 1) * r_ + (c.v1 - 1);
  }
  CellCoord coord(std::size_t index) const {
    return {static_cast<int>(index % r_) + 1, static_cast<int>(index / r_) + 1};
  }

  Point center(const CellCoord& c) const;

 private:
  int r_;
  double n_ref_;
};

/// Lattice of about n / (9 ln n) cells for n nodes. Throws for n < 2.
Lattice build_lattice(double n);

/// Lattice with side round(sqrt(cells)), at least 1. Used when the cell
/// count is not n / (9 ln n), e.g. the cluster-head lattice.
Lattice lattice_with_cells(double cells, double n_ref);

/// Half-open cells clamped at the top/right edges. Throws for points outside
/// the closed unit square.
CellCoord cell_of(const Point& p, const Lattice& lat);

/// Edge-adjacent cells, in the order left, right, down, up.
std::vector<CellCoord> neighbors(const CellCoord& c, const Lattice& lat);

SubLatticeId sublattice_of(const CellCoord& c);

/// Concentric-square index of `other` around `center` within one sub-lattice:
/// Chebyshev distance / 3. Throws if the cells are in different sub-lattices.
int ring_index(const CellCoord& center, const CellCoord& other);

/// Lower bound on the point-to-point distance between two cells at ring i.
inline double ring_min_distance(int ring, const Lattice& lat) {
  return lat.side() * (3.0 * ring - 2.0);
}

/// iid uniform points in the unit square.
Positions place_nodes(std::size_t count, Rng& rng);

/// Buckets node ids by cell. Ids within a bucket are ascending.
class CellDirectory {
 public:
  CellDirectory() = default;
  CellDirectory(const Lattice& lat, const Positions& pos, const std::vector<NodeId>& nodes);

  const NodeId* begin(std::size_t cell) const { return ids_.data() + offsets_[cell]; }
  const NodeId* end(std::size_t cell) const { return ids_.data() + offsets_[cell + 1]; }
  std::size_t count(std::size_t cell) const { return offsets_[cell + 1] - offsets_[cell]; }
  std::size_t cell_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> ids_;
};

}  // namespace capscale
