#include "ifem/mesh.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "ifem/errors.hpp"

namespace ifem {

namespace {

// Key for an undirected edge.
std::pair<int, int> edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

struct PairHash {
  std::size_t operator()(const std::pair<int, int>& p) const {
    return std::hash<long long>()((static_cast<long long>(p.first) << 32) ^ p.second);
  }
};

}  // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 4>> cells,
           std::vector<BoundaryFace> boundary_faces,
           std::vector<BoundaryCircle> boundary_circles, int level)
    : vertices_(std::move(vertices)),
      cells_(std::move(cells)),
      boundary_faces_(std::move(boundary_faces)),
      boundary_circles_(std::move(boundary_circles)),
      level_(level) {
  finalize();
}

void Mesh::finalize() {
  const int nc = n_cells();
  neighbors_.assign(nc, {-1, -1, -1, -1});
  face_markers_.assign(nc, {-1, -1, -1, -1});

  std::unordered_map<std::pair<int, int>, std::pair<int, int>, PairHash> first_owner;
  first_owner.reserve(4 * nc);
  for (int c = 0; c < nc; ++c) {
    for (int v : cells_[c]) {
      if (v < 0 || v >= n_vertices())
        throw ConsistencyError("cell " + std::to_string(c) + " references unknown vertex " +
                               std::to_string(v));
    }
    for (int f = 0; f < 4; ++f) {
      auto [a, b] = face_vertices(c, f);
      if (a == b) throw ConsistencyError("degenerate face in cell " + std::to_string(c));
      auto key = edge_key(a, b);
      auto it = first_owner.find(key);
      if (it == first_owner.end()) {
        first_owner.emplace(key, std::make_pair(c, f));
      } else {
        auto [c2, f2] = it->second;
        if (neighbors_[c2][f2] != -1)
          throw ConsistencyError("more than two cells share an edge");
        neighbors_[c][f] = c2;
        neighbors_[c2][f2] = c;
      }
    }
  }

  for (const BoundaryFace& bf : boundary_faces_) {
    if (bf.cell < 0 || bf.cell >= nc || bf.local_face < 0 || bf.local_face >= 4)
      throw ConsistencyError("boundary face refers to an unknown cell face");
    face_markers_[bf.cell][bf.local_face] = bf.marker;
  }

  // Orientation invariant: positive bilinear determinant at the cell center.
  for (int c = 0; c < nc; ++c) {
    const Vec2& p0 = vertices_[cells_[c][0]];
    const Vec2& p1 = vertices_[cells_[c][1]];
    const Vec2& p2 = vertices_[cells_[c][2]];
    const Vec2& p3 = vertices_[cells_[c][3]];
    const Vec2 dxi = 0.5 * (p1 - p0 + p2 - p3);
    const Vec2 deta = 0.5 * (p3 - p0 + p2 - p1);
    const double det = dxi.x() * deta.y() - dxi.y() * deta.x();
    if (det <= 0.0)
      throw ConsistencyError("cell " + std::to_string(c) +
                             " is not counterclockwise (det at center <= 0)");
  }
}

std::optional<int> Mesh::boundary_marker(int c, int f) const {
  const int m = face_markers_[c][f];
  if (m < 0) return std::nullopt;
  return m;
}

const BoundaryCircle* Mesh::circle_for_marker(int marker) const {
  for (const BoundaryCircle& bc : boundary_circles_)
    if (bc.marker == marker) return &bc;
  return nullptr;
}

Vec2 Mesh::cell_center(int c) const {
  Vec2 s = Vec2::Zero();
  for (int v : cells_[c]) s += vertices_[v];
  return 0.25 * s;
}

double Mesh::cell_area(int c) const {
  // Shoelace formula; exact for straight-edged quads.
  double a = 0.0;
  for (int f = 0; f < 4; ++f) {
    const Vec2& p = vertices_[cells_[c][f]];
    const Vec2& q = vertices_[cells_[c][(f + 1) % 4]];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

double Mesh::cell_diameter(int c) const {
  const Vec2& p0 = vertices_[cells_[c][0]];
  const Vec2& p1 = vertices_[cells_[c][1]];
  const Vec2& p2 = vertices_[cells_[c][2]];
  const Vec2& p3 = vertices_[cells_[c][3]];
  return std::max((p2 - p0).norm(), (p3 - p1).norm());
}

BoundingBox Mesh::cell_bbox(int c) const {
  BoundingBox box;
  box.lo = box.hi = vertices_[cells_[c][0]];
  for (int k = 1; k < 4; ++k) box.extend(vertices_[cells_[c][k]]);
  return box;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int c = 0; c < n_cells(); ++c) a += cell_area(c);
  return a;
}

Mesh generate_square_grid(const Vec2& lower_corner, double edge_length,
                          int subdivisions_per_side) {
  if (edge_length <= 0.0) throw InvalidArgumentError("square grid: edge_length must be > 0");
  if (subdivisions_per_side < 1)
    throw InvalidArgumentError("square grid: subdivisions_per_side must be >= 1");

  const int n = subdivisions_per_side;
  const double h = edge_length / n;
  std::vector<Vec2> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices.emplace_back(lower_corner.x() + i * h, lower_corner.y() + j * h);

  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::array<int, 4>> cells;
  cells.reserve(n * n);
  std::vector<BoundaryFace> faces;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int c = static_cast<int>(cells.size());
      cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
      if (j == 0) faces.push_back({c, 0, 1});
      if (i == n - 1) faces.push_back({c, 1, 1});
      if (j == n - 1) faces.push_back({c, 2, 1});
      if (i == 0) faces.push_back({c, 3, 1});
    }
  return Mesh(std::move(vertices), std::move(cells), std::move(faces));
}

Mesh generate_annulus_grid(const Vec2& center, double inner_radius, double width,
                           int cells_radial, int cells_circumferential) {
  if (inner_radius <= 0.0 || width <= 0.0)
    throw InvalidArgumentError("annulus grid: radius and width must be > 0");
  if (cells_radial < 1 || cells_circumferential < 4)
    throw InvalidArgumentError(
        "annulus grid: need cells_radial >= 1 and cells_circumferential >= 4");

  const int nr = cells_radial;
  const int nc = cells_circumferential;
  std::vector<Vec2> vertices;
  vertices.reserve((nr + 1) * nc);
  for (int k = 0; k <= nr; ++k) {
    const double r = inner_radius + k * width / nr;
    for (int j = 0; j < nc; ++j) {
      const double th = 2.0 * std::numbers::pi * j / nc;
      vertices.emplace_back(center.x() + r * std::cos(th), center.y() + r * std::sin(th));
    }
  }
  auto vid = [nc](int k, int j) { return k * nc + (j % nc); };

  std::vector<std::array<int, 4>> cells;
  cells.reserve(nr * nc);
  std::vector<BoundaryFace> faces;
  for (int k = 0; k < nr; ++k)
    for (int j = 0; j < nc; ++j) {
      const int c = static_cast<int>(cells.size());
      cells.push_back({vid(k, j), vid(k + 1, j), vid(k + 1, j + 1), vid(k, j + 1)});
      if (k == 0) faces.push_back({c, 3, 0});
      if (k == nr - 1) faces.push_back({c, 1, 1});
    }
  std::vector<BoundaryCircle> circles = {{center, inner_radius, 0},
                                         {center, inner_radius + width, 1}};
  return Mesh(std::move(vertices), std::move(cells), std::move(faces), std::move(circles));
}

Mesh generate_disk_grid(const Vec2& center, double radius) {
  if (radius <= 0.0) throw InvalidArgumentError("disk grid: radius must be > 0");

  // Central square plus four rim cells; rim vertices on the circle at the
  // diagonals, inner square scaled to balance cell sizes.
  const double b = radius / std::sqrt(2.0);
  const double a = b / (1.0 + std::sqrt(2.0));
  std::vector<Vec2> vertices(8);
  const double sx[4] = {-1.0, 1.0, 1.0, -1.0};
  const double sy[4] = {-1.0, -1.0, 1.0, 1.0};
  for (int k = 0; k < 4; ++k) {
    vertices[k] = center + Vec2(a * sx[k], a * sy[k]);      // inner square, ccw
    vertices[4 + k] = center + Vec2(b * sx[k], b * sy[k]);  // on the circle, ccw
  }
  std::vector<std::array<int, 4>> cells = {
      {0, 1, 2, 3},  // center
      {4, 5, 1, 0},  // bottom
      {5, 6, 2, 1},  // right
      {6, 7, 3, 2},  // top
      {7, 4, 0, 3},  // left
  };
  std::vector<BoundaryFace> faces = {{1, 0, 1}, {2, 0, 1}, {3, 0, 1}, {4, 0, 1}};
  std::vector<BoundaryCircle> circles = {{center, radius, 1}};
  return Mesh(std::move(vertices), std::move(cells), std::move(faces), std::move(circles));
}

namespace {

Mesh refine_once(const Mesh& mesh) {
  std::vector<Vec2> vertices = mesh.vertices();
  std::vector<std::array<int, 4>> cells;
  cells.reserve(4 * mesh.n_cells());
  std::vector<BoundaryFace> faces;

  std::unordered_map<std::pair<int, int>, int, PairHash> edge_midpoint;
  edge_midpoint.reserve(2 * mesh.n_cells());

  auto midpoint_of = [&](int c, int f) {
    auto [va, vb] = mesh.face_vertices(c, f);
    auto key = edge_key(va, vb);
    auto it = edge_midpoint.find(key);
    if (it != edge_midpoint.end()) return it->second;
    Vec2 m = 0.5 * (mesh.vertex(va) + mesh.vertex(vb));
    if (auto marker = mesh.boundary_marker(c, f)) {
      if (const BoundaryCircle* bc = mesh.circle_for_marker(*marker)) {
        Vec2 d = m - bc->center;
        const double len = d.norm();
        if (len > 0.0) m = bc->center + bc->radius / len * d;
      }
    }
    const int idx = static_cast<int>(vertices.size());
    vertices.push_back(m);
    edge_midpoint.emplace(key, idx);
    return idx;
  };

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& v = mesh.cell(c);
    const int m01 = midpoint_of(c, 0);
    const int m12 = midpoint_of(c, 1);
    const int m23 = midpoint_of(c, 2);
    const int m30 = midpoint_of(c, 3);
    const int cc = static_cast<int>(vertices.size());
    // Serendipity completion: reduces to the vertex average on straight
    // cells and follows the curvature of snapped boundary midpoints.
    const Vec2 edge_sum = vertices[m01] + vertices[m12] + vertices[m23] + vertices[m30];
    const Vec2 vert_sum =
        mesh.vertex(v[0]) + mesh.vertex(v[1]) + mesh.vertex(v[2]) + mesh.vertex(v[3]);
    vertices.push_back(0.5 * edge_sum - 0.25 * vert_sum);
    cells.push_back({v[0], m01, cc, m30});
    cells.push_back({m01, v[1], m12, cc});
    cells.push_back({cc, m12, v[2], m23});
    cells.push_back({m30, cc, m23, v[3]});
  }

  // A parent boundary face with local index f splits into the same local
  // face of children f and (f+1) mod 4.
  for (const BoundaryFace& bf : mesh.boundary_faces()) {
    faces.push_back({4 * bf.cell + bf.local_face, bf.local_face, bf.marker});
    faces.push_back({4 * bf.cell + (bf.local_face + 1) % 4, bf.local_face, bf.marker});
  }

  return Mesh(std::move(vertices), std::move(cells), std::move(faces), mesh.boundary_circles(),
              mesh.level() + 1);
}

}  // namespace

Mesh refine_globally(const Mesh& mesh, int levels) {
  if (levels < 0) throw InvalidArgumentError("refine_globally: levels must be >= 0");
  Mesh out = mesh;
  for (int l = 0; l < levels; ++l) out = refine_once(out);
  return out;
}

namespace {

// Reads the next content line, skipping blanks and '#' comments.
bool next_content_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

Mesh read_ucd(std::istream& in) {
  std::string line;
  int line_no = 0;

  if (!next_content_line(in, line, line_no))
    throw ParseError("ucd: missing header line", line_no);
  long n_vertices = 0, n_entries = 0;
  {
    std::istringstream ss(line);
    long a = 0, b = 0, c = 0;
    if (!(ss >> n_vertices >> n_entries >> a >> b >> c))
      throw ParseError("ucd: malformed header line", line_no);
  }
  if (n_vertices < 0 || n_entries < 0) throw ParseError("ucd: negative counts", line_no);

  std::vector<Vec2> vertices(n_vertices);
  std::map<long, int> vertex_index;
  for (long k = 0; k < n_vertices; ++k) {
    if (!next_content_line(in, line, line_no))
      throw ParseError("ucd: unexpected end of file in vertex list", line_no);
    std::istringstream ss(line);
    long id;
    double x, y, z;
    if (!(ss >> id >> x >> y >> z)) throw ParseError("ucd: malformed vertex line", line_no);
    vertices[k] = Vec2(x, y);
    if (!vertex_index.emplace(id, static_cast<int>(k)).second)
      throw ParseError("ucd: duplicate vertex id", line_no);
  }

  auto lookup = [&](long id, int at_line) {
    auto it = vertex_index.find(id);
    if (it == vertex_index.end())
      throw ConsistencyError("ucd: line " + std::to_string(at_line) +
                             " references unknown vertex " + std::to_string(id));
    return it->second;
  };

  std::vector<std::array<int, 4>> cells;
  std::vector<std::pair<std::array<int, 2>, int>> marked_edges;  // (vertices, marker)
  for (long k = 0; k < n_entries; ++k) {
    if (!next_content_line(in, line, line_no))
      throw ParseError("ucd: unexpected end of file in cell list", line_no);
    std::istringstream ss(line);
    long id, material;
    std::string type;
    if (!(ss >> id >> material >> type)) throw ParseError("ucd: malformed cell line", line_no);
    if (type == "quad") {
      long v[4];
      if (!(ss >> v[0] >> v[1] >> v[2] >> v[3]))
        throw ParseError("ucd: malformed quad line", line_no);
      cells.push_back({lookup(v[0], line_no), lookup(v[1], line_no), lookup(v[2], line_no),
                       lookup(v[3], line_no)});
    } else if (type == "line") {
      long v[2];
      if (!(ss >> v[0] >> v[1])) throw ParseError("ucd: malformed line entry", line_no);
      marked_edges.push_back(
          {{lookup(v[0], line_no), lookup(v[1], line_no)}, static_cast<int>(material)});
    } else {
      throw ParseError("ucd: unsupported cell type '" + type + "'", line_no);
    }
  }

  // Resolve marked edges to (cell, local face). Edges without a listed marker
  // but on the geometric boundary get marker 0.
  std::unordered_map<std::pair<int, int>, std::pair<int, int>, PairHash> boundary_edges;
  {
    std::unordered_map<std::pair<int, int>, int, PairHash> edge_count;
    for (std::size_t c = 0; c < cells.size(); ++c)
      for (int f = 0; f < 4; ++f) {
        auto key = edge_key(cells[c][Mesh::face_local_vertices[f][0]],
                            cells[c][Mesh::face_local_vertices[f][1]]);
        ++edge_count[key];
        boundary_edges[key] = {static_cast<int>(c), f};
      }
    for (const auto& [key, count] : edge_count)
      if (count > 1) boundary_edges.erase(key);
  }

  std::unordered_map<std::pair<int, int>, int, PairHash> markers;
  for (const auto& [verts, marker] : marked_edges) {
    auto key = edge_key(verts[0], verts[1]);
    if (!boundary_edges.count(key))
      throw ConsistencyError("ucd: marked line is not a boundary edge of any quad");
    markers[key] = marker;
  }

  std::vector<BoundaryFace> faces;
  for (const auto& [key, cf] : boundary_edges) {
    auto it = markers.find(key);
    faces.push_back({cf.first, cf.second, it == markers.end() ? 0 : it->second});
  }
  // Deterministic order independent of hash iteration.
  std::sort(faces.begin(), faces.end(), [](const BoundaryFace& a, const BoundaryFace& b) {
    return std::tie(a.cell, a.local_face) < std::tie(b.cell, b.local_face);
  });

  return Mesh(std::move(vertices), std::move(cells), std::move(faces));
}

void write_ucd(const Mesh& mesh, std::ostream& out) {
  out << mesh.n_vertices() << ' '
      << mesh.n_cells() + static_cast<int>(mesh.boundary_faces().size()) << " 0 0 0\n";
  out.precision(16);
  for (int v = 0; v < mesh.n_vertices(); ++v)
    out << v + 1 << ' ' << mesh.vertex(v).x() << ' ' << mesh.vertex(v).y() << " 0\n";
  int id = 1;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& v = mesh.cell(c);
    out << id++ << " 0 quad " << v[0] + 1 << ' ' << v[1] + 1 << ' ' << v[2] + 1 << ' '
        << v[3] + 1 << '\n';
  }
  for (const BoundaryFace& bf : mesh.boundary_faces()) {
    auto [a, b] = mesh.face_vertices(bf.cell, bf.local_face);
    out << id++ << ' ' << bf.marker << " line " << a + 1 << ' ' << b + 1 << '\n';
  }
}

}  // namespace ifem
