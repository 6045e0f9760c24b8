#ifndef IFEM_POINT_LOCATION_HPP
#define IFEM_POINT_LOCATION_HPP

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ifem/geometry.hpp"
#include "ifem/mesh.hpp"

namespace ifem {

// Query points grouped by owning cell. Each query index appears exactly once
// across back_map, and mapping cells[g] at reference_points[g][j] reproduces
// the query point back_map[g][j].
struct PointLocationResult {
  std::vector<int> cells;
  std::vector<std::vector<Vec2>> reference_points;
  std::vector<std::vector<int>> back_map;
};

// Newton inversion of the bilinear cell map, started from the cell center.
// Returns the reference coordinates clamped to [0,1]^2, or nullopt when the
// point lies outside the cell (beyond a 1e-10 reference-coordinate band).
std::optional<Vec2> invert_mapping(const Mesh& mesh, int cell, const Vec2& x);

// Uniform-bin acceleration index over cell bounding boxes. Built once per
// mesh and shared by all queries; queries are pure.
class CellLocator {
 public:
  explicit CellLocator(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }

  // Owning cell (ties broken toward the lowest cell index) and reference
  // coordinates. Throws PointOutsideDomainError when no cell owns x.
  std::pair<int, Vec2> locate(const Vec2& x, int hint = -1) const;

  PointLocationResult compute_point_locations(std::span<const Vec2> points) const;

 private:
  std::vector<int> candidates(const Vec2& x) const;

  const Mesh* mesh_;
  BoundingBox bbox_;
  int nx_ = 1, ny_ = 1;
  double inv_dx_ = 1.0, inv_dy_ = 1.0;
  std::vector<std::vector<int>> bins_;
};

// Convenience forms that build a locator on the fly.
std::pair<int, Vec2> locate_point(const Mesh& mesh, const Vec2& x, int hint = -1);
PointLocationResult compute_point_locations(const Mesh& mesh, std::span<const Vec2> points);

}  // namespace ifem

#endif
