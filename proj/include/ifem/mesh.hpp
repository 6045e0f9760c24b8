#ifndef IFEM_MESH_HPP
#define IFEM_MESH_HPP

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ifem/geometry.hpp"

namespace ifem {

// A boundary face is one edge of one cell. Local faces of a cell with
// counterclockwise vertices (v0,v1,v2,v3) are f -> (v_f, v_{f+1 mod 4}).
struct BoundaryFace {
  int cell;
  int local_face;
  int marker;
};

// Circular boundary description attached to a marker. Refinement projects
// new vertices created on faces with this marker back onto the circle, and
// quadratic cell geometry places its boundary edge nodes on it.
struct BoundaryCircle {
  Vec2 center;
  double radius;
  int marker;
};

// Conforming quadrilateral mesh. Immutable after construction: all mutating
// operations return a new mesh.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 4>> cells,
       std::vector<BoundaryFace> boundary_faces,
       std::vector<BoundaryCircle> boundary_circles = {}, int level = 0);

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_cells() const { return static_cast<int>(cells_.size()); }
  int level() const { return level_; }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 4>& cell(int c) const { return cells_[c]; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 4>>& cells() const { return cells_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_faces_; }
  const std::vector<BoundaryCircle>& boundary_circles() const { return boundary_circles_; }

  static constexpr std::array<std::array<int, 2>, 4> face_local_vertices = {
      {{0, 1}, {1, 2}, {2, 3}, {3, 0}}};

  // Global vertex indices of a local face.
  std::array<int, 2> face_vertices(int c, int f) const {
    return {cells_[c][face_local_vertices[f][0]], cells_[c][face_local_vertices[f][1]]};
  }

  // Neighbor across local face f, or -1 on the boundary.
  int neighbor(int c, int f) const { return neighbors_[c][f]; }

  // Boundary marker of local face f, or nullopt for interior faces.
  std::optional<int> boundary_marker(int c, int f) const;

  const BoundaryCircle* circle_for_marker(int marker) const;

  Vec2 cell_center(int c) const;
  // Exact area of the bilinear cell (the det of the bilinear map is itself
  // bilinear, so a 2x2 Gauss rule integrates it exactly).
  double cell_area(int c) const;
  double cell_diameter(int c) const;
  BoundingBox cell_bbox(int c) const;
  double total_area() const;

 private:
  void finalize();  // builds connectivity and checks invariants

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 4>> cells_;
  std::vector<BoundaryFace> boundary_faces_;
  std::vector<BoundaryCircle> boundary_circles_;
  std::vector<std::array<int, 4>> neighbors_;
  std::vector<std::array<int, 4>> face_markers_;  // -1 when interior
  int level_ = 0;
};

// Uniform n x n grid over an axis-aligned square. All outer faces carry
// marker 1.
Mesh generate_square_grid(const Vec2& lower_corner, double edge_length,
                          int subdivisions_per_side);

// Structured polar grid between circles r = inner_radius and
// r = inner_radius + width, periodic in the angle. Vertices lie exactly on
// the concentric circles. Inner boundary has marker 0, outer marker 1, both
// with circle attachments so refinement keeps them circular.
Mesh generate_annulus_grid(const Vec2& center, double inner_radius, double width,
                           int cells_radial, int cells_circumferential);

// Five-cell disk (central square plus four rim cells) whose outer boundary
// carries marker 1 with a circle attachment.
Mesh generate_disk_grid(const Vec2& center, double radius);

// Quadrisects every cell `levels` times. New vertices on boundary faces with
// a circle attachment are projected onto their circle.
Mesh refine_globally(const Mesh& mesh, int levels);

// AVS-UCD ASCII, single block, quads plus optional "line" faces with markers.
Mesh read_ucd(std::istream& in);
void write_ucd(const Mesh& mesh, std::ostream& out);

}  // namespace ifem

#endif
