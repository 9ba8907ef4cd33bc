#include "capscale/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace capscale {

Lattice::Lattice(int r, double n_ref) : r_(r), n_ref_(n_ref) {
  if (r < 1) throw std::invalid_argument("lattice side must be >= 1");
}

Point Lattice::center(const CellCoord& c) const {
  const double x0 = side();
  return {-0.5 + (c.v1 - 0.5) * x0, -0.5 + (c.v2 - 0.5) * x0};
}

Lattice build_lattice(double n) {
  if (!(n >= 2.0)) throw std::invalid_argument("build_lattice: n must be >= 2");
  return lattice_with_cells(n / (9.0 * std::log(n)), n);
}

Lattice lattice_with_cells(double cells, double n_ref) {
  const double side = std::round(std::sqrt(std::max(cells, 0.0)));
  return Lattice(std::max(1, static_cast<int>(side)), n_ref);
}

namespace {

int axis_cell(double coord, int r) {
  const int v = static_cast<int>(std::floor((coord + 0.5) * r)) + 1;
  return std::clamp(v, 1, r);
}

}  // namespace

CellCoord cell_of(const Point& p, const Lattice& lat) {
  if (!(std::abs(p.x()) <= 0.5 && std::abs(p.y()) <= 0.5)) {
    throw std::invalid_argument("cell_of: point outside the unit square");
  }
  return {axis_cell(p.x(), lat.r()), axis_cell(p.y(), lat.r())};
}

std::vector<CellCoord> neighbors(const CellCoord& c, const Lattice& lat) {
  std::vector<CellCoord> out;
  out.reserve(4);
  for (const CellCoord n : {CellCoord{c.v1 - 1, c.v2}, CellCoord{c.v1 + 1, c.v2},
                            CellCoord{c.v1, c.v2 - 1}, CellCoord{c.v1, c.v2 + 1}}) {
    if (lat.contains(n)) out.push_back(n);
  }
  return out;
}

SubLatticeId sublattice_of(const CellCoord& c) {
  return 3 * ((c.v1 - 1) % 3) + ((c.v2 - 1) % 3);
}

int ring_index(const CellCoord& center, const CellCoord& other) {
  if (sublattice_of(center) != sublattice_of(other)) {
    throw std::invalid_argument("ring_index: cells belong to different sub-lattices");
  }
  const int cheb = std::max(std::abs(center.v1 - other.v1), std::abs(center.v2 - other.v2));
  return cheb / 3;
}

Positions place_nodes(std::size_t count, Rng& rng) {
  Positions pos(2, static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < pos.cols(); ++i) {
    pos(0, i) = uniform01(rng) - 0.5;
    pos(1, i) = uniform01(rng) - 0.5;
  }
  return pos;
}

CellDirectory::CellDirectory(const Lattice& lat, const Positions& pos,
                             const std::vector<NodeId>& nodes) {
  const std::size_t g = static_cast<std::size_t>(lat.cell_count());
  std::vector<std::size_t> cell(nodes.size());
  offsets_.assign(g + 1, 0);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    cell[k] = lat.index(cell_of(pos.col(nodes[k]), lat));
    ++offsets_[cell[k] + 1];
  }
  for (std::size_t c = 0; c < g; ++c) offsets_[c + 1] += offsets_[c];
  ids_.resize(nodes.size());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t k = 0; k < nodes.size(); ++k) ids_[fill[cell[k]]++] = nodes[k];
  for (std::size_t c = 0; c < g; ++c) {
    std::sort(ids_.begin() + offsets_[c], ids_.begin() + offsets_[c + 1]);
  }
}

}  // namespace capscale
