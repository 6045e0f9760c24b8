#include "ifem/linear_algebra.hpp"

#include <algorithm>

#include "ifem/errors.hpp"

namespace ifem {

SparseBlock::SparseBlock(int rows, int cols, std::vector<std::vector<int>> adjacency)
    : rows_(rows), cols_(cols) {
  row_ptr_.assign(rows + 1, 0);
  std::size_t total = 0;
  for (int i = 0; i < rows; ++i) {
    auto& adj = adjacency[i];
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    total += adj.size();
    row_ptr_[i + 1] = static_cast<int>(total);
  }
  cols_idx_.reserve(total);
  for (int i = 0; i < rows; ++i)
    cols_idx_.insert(cols_idx_.end(), adjacency[i].begin(), adjacency[i].end());
  values_.assign(total, 0.0);
}

void SparseBlock::add(int i, int j, double v) {
  const auto begin = cols_idx_.begin() + row_ptr_[i];
  const auto end = cols_idx_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j)
    throw InvalidArgumentError("sparse write outside the pattern at (" + std::to_string(i) +
                               ", " + std::to_string(j) + ")");
  values_[static_cast<std::size_t>(it - cols_idx_.begin())] += v;
}

double SparseBlock::get(int i, int j) const {
  const auto begin = cols_idx_.begin() + row_ptr_[i];
  const auto end = cols_idx_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_idx_.begin())];
}

void SparseBlock::zero_row(int i) {
  std::fill(values_.begin() + row_ptr_[i], values_.begin() + row_ptr_[i + 1], 0.0);
}

void SparseBlock::add_multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[cols_idx_[k]];
    y[i] += s;
  }
}

void SparseBlock::add_multiply_transposed(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  for (int i = 0; i < rows_; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) y[cols_idx_[k]] += values_[k] * xi;
  }
}

BlockedVector BlockedSparseMatrix::multiply(const BlockedVector& x) const {
  BlockedVector y(n_fluid, n_solid);
  ff.add_multiply(x.fluid, y.fluid);
  fs.add_multiply(x.solid, y.fluid);
  sf.add_multiply(x.fluid, y.solid);
  ss.add_multiply(x.solid, y.solid);
  return y;
}

Eigen::SparseMatrix<double> BlockedSparseMatrix::to_eigen() const {
  const int n = n_fluid + n_solid;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(ff.nnz() + fs.nnz() + sf.nnz() + ss.nnz());
  ff.for_each([&](int i, int j, double v) { triplets.emplace_back(i, j, v); });
  fs.for_each([&](int i, int j, double v) { triplets.emplace_back(i, j + n_fluid, v); });
  sf.for_each([&](int i, int j, double v) { triplets.emplace_back(i + n_fluid, j, v); });
  ss.for_each(
      [&](int i, int j, double v) { triplets.emplace_back(i + n_fluid, j + n_fluid, v); });
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace ifem
