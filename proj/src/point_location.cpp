#include "ifem/point_location.hpp"

#include <algorithm>
#include <cmath>

#include "ifem/errors.hpp"

namespace ifem {

namespace {

constexpr double kInsideBand = 1e-10;    // acceptance band in reference coordinates
constexpr double kInteriorBand = 1e-8;   // strict-interior threshold for hint short-cuts
constexpr double kNewtonTol = 1e-12;

// Bilinear map and its Jacobian from the four cell corners, without the
// positivity check (Newton iterates may wander outside the cell).
struct BilinearCell {
  Vec2 p0, p1, p2, p3;

  explicit BilinearCell(const Mesh& mesh, int cell) {
    const auto& v = mesh.cell(cell);
    p0 = mesh.vertex(v[0]);
    p1 = mesh.vertex(v[1]);
    p2 = mesh.vertex(v[2]);
    p3 = mesh.vertex(v[3]);
  }

  Vec2 value(const Vec2& r) const {
    const double a = r.x(), b = r.y();
    return (1 - a) * (1 - b) * p0 + a * (1 - b) * p1 + a * b * p2 + (1 - a) * b * p3;
  }
  Mat2 jacobian(const Vec2& r) const {
    const double a = r.x(), b = r.y();
    Mat2 J;
    J.col(0) = (1 - b) * (p1 - p0) + b * (p2 - p3);
    J.col(1) = (1 - a) * (p3 - p0) + a * (p2 - p1);
    return J;
  }
};

}  // namespace

std::optional<Vec2> invert_mapping(const Mesh& mesh, int cell, const Vec2& x) {
  const BilinearCell bc(mesh, cell);
  const double scale = std::max(1.0, mesh.cell_diameter(cell));

  Vec2 r(0.5, 0.5);
  bool converged = false;
  for (int it = 0; it < 30; ++it) {
    const Vec2 res = bc.value(r) - x;
    if (res.norm() < kNewtonTol * scale) {
      converged = true;
      break;
    }
    const Mat2 J = bc.jacobian(r);
    const double det = J.determinant();
    if (std::abs(det) < 1e-30) {
      // Singular inside or near the cell means a degenerate cell; further
      // out it just means the query point is not in this cell.
      if (r.x() > -0.5 && r.x() < 1.5 && r.y() > -0.5 && r.y() < 1.5)
        throw DegenerateMappingError("invert_mapping: singular Jacobian in cell " +
                                     std::to_string(cell));
      return std::nullopt;
    }
    r -= J.inverse() * res;
    // A diverging iterate is a clear rejection; keeps far-away queries cheap.
    if (r.lpNorm<Eigen::Infinity>() > 1e3) return std::nullopt;
  }
  if (!converged) return std::nullopt;
  if (r.x() < -kInsideBand || r.x() > 1.0 + kInsideBand || r.y() < -kInsideBand ||
      r.y() > 1.0 + kInsideBand)
    return std::nullopt;
  return Vec2(std::clamp(r.x(), 0.0, 1.0), std::clamp(r.y(), 0.0, 1.0));
}

CellLocator::CellLocator(const Mesh& mesh) : mesh_(&mesh) {
  const int nc = mesh.n_cells();
  bbox_.lo = bbox_.hi = mesh.vertex(0);
  for (int v = 1; v < mesh.n_vertices(); ++v) bbox_.extend(mesh.vertex(v));

  std::vector<double> diams(nc);
  for (int c = 0; c < nc; ++c) diams[c] = mesh.cell_diameter(c);
  std::nth_element(diams.begin(), diams.begin() + nc / 2, diams.end());
  const double bin_size = std::max(diams[nc / 2], 1e-12 * std::max(1.0, bbox_.diameter()));

  nx_ = std::clamp(static_cast<int>(std::ceil((bbox_.hi.x() - bbox_.lo.x()) / bin_size)), 1, 2048);
  ny_ = std::clamp(static_cast<int>(std::ceil((bbox_.hi.y() - bbox_.lo.y()) / bin_size)), 1, 2048);
  inv_dx_ = nx_ / std::max(bbox_.hi.x() - bbox_.lo.x(), 1e-300);
  inv_dy_ = ny_ / std::max(bbox_.hi.y() - bbox_.lo.y(), 1e-300);

  bins_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  const double pad = 1e-9 * std::max(1.0, bbox_.diameter());
  for (int c = 0; c < nc; ++c) {
    BoundingBox box = mesh.cell_bbox(c);
    box.pad(pad);
    const int i0 = std::clamp(static_cast<int>((box.lo.x() - bbox_.lo.x()) * inv_dx_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((box.hi.x() - bbox_.lo.x()) * inv_dx_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((box.lo.y() - bbox_.lo.y()) * inv_dy_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((box.hi.y() - bbox_.lo.y()) * inv_dy_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) bins_[static_cast<std::size_t>(j) * nx_ + i].push_back(c);
  }
  // Ascending cell order inside each bin realizes the lowest-index tie break.
  for (auto& bin : bins_) std::sort(bin.begin(), bin.end());
}

std::vector<int> CellLocator::candidates(const Vec2& x) const {
  const int i = std::clamp(static_cast<int>((x.x() - bbox_.lo.x()) * inv_dx_), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>((x.y() - bbox_.lo.y()) * inv_dy_), 0, ny_ - 1);
  return bins_[static_cast<std::size_t>(j) * nx_ + i];
}

namespace {

bool strictly_interior(const Vec2& r) {
  return r.x() > kInteriorBand && r.x() < 1.0 - kInteriorBand && r.y() > kInteriorBand &&
         r.y() < 1.0 - kInteriorBand;
}

}  // namespace

std::pair<int, Vec2> CellLocator::locate(const Vec2& x, int hint) const {
  // Points strictly inside the hint cell (or one of its neighbors) have a
  // unique owner, so the full tie-breaking search can be skipped.
  if (hint >= 0 && hint < mesh_->n_cells()) {
    if (auto r = invert_mapping(*mesh_, hint, x); r && strictly_interior(*r))
      return {hint, *r};
    for (int f = 0; f < 4; ++f) {
      const int n = mesh_->neighbor(hint, f);
      if (n < 0) continue;
      if (auto r = invert_mapping(*mesh_, n, x); r && strictly_interior(*r)) return {n, *r};
    }
  }
  for (int c : candidates(x)) {
    if (auto r = invert_mapping(*mesh_, c, x)) return {c, *r};
  }
  throw PointOutsideDomainError("point (" + std::to_string(x.x()) + ", " +
                                std::to_string(x.y()) + ") lies outside the mesh");
}

PointLocationResult CellLocator::compute_point_locations(std::span<const Vec2> points) const {
  PointLocationResult result;
  std::vector<int> group_of_cell;  // lazily grown map cell -> group index
  int hint = -1;
  for (std::size_t k = 0; k < points.size(); ++k) {
    int cell;
    Vec2 ref;
    try {
      std::tie(cell, ref) = locate(points[k], hint);
    } catch (const PointOutsideDomainError& e) {
      throw PointOutsideDomainError(std::string(e.what()) + " (query point " +
                                        std::to_string(k) + ")",
                                    k);
    }
    hint = cell;
    if (group_of_cell.size() < static_cast<std::size_t>(cell + 1))
      group_of_cell.resize(cell + 1, -1);
    int g = group_of_cell[cell];
    if (g < 0) {
      g = static_cast<int>(result.cells.size());
      group_of_cell[cell] = g;
      result.cells.push_back(cell);
      result.reference_points.emplace_back();
      result.back_map.emplace_back();
    }
    result.reference_points[g].push_back(ref);
    result.back_map[g].push_back(static_cast<int>(k));
  }
  return result;
}

std::pair<int, Vec2> locate_point(const Mesh& mesh, const Vec2& x, int hint) {
  return CellLocator(mesh).locate(x, hint);
}

PointLocationResult compute_point_locations(const Mesh& mesh, std::span<const Vec2> points) {
  return CellLocator(mesh).compute_point_locations(points);
}

}  // namespace ifem
