#ifndef IFEM_LINEAR_ALGEBRA_HPP
#define IFEM_LINEAR_ALGEBRA_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

namespace ifem {

// Monolithic unknown split into the fluid block (velocity then pressure
// coefficients) and the solid block (displacement coefficients).
struct BlockedVector {
  Eigen::VectorXd fluid;
  Eigen::VectorXd solid;

  BlockedVector() = default;
  BlockedVector(int n_fluid, int n_solid)
      : fluid(Eigen::VectorXd::Zero(n_fluid)), solid(Eigen::VectorXd::Zero(n_solid)) {}

  int size() const { return static_cast<int>(fluid.size() + solid.size()); }
  void set_zero() {
    fluid.setZero();
    solid.setZero();
  }
  double inf_norm() const {
    double n = 0.0;
    if (fluid.size()) n = fluid.lpNorm<Eigen::Infinity>();
    if (solid.size()) n = std::max(n, solid.lpNorm<Eigen::Infinity>());
    return n;
  }
  double& global(int i) {
    return i < fluid.size() ? fluid[i] : solid[i - fluid.size()];
  }
  double global(int i) const {
    return i < fluid.size() ? fluid[i] : solid[i - fluid.size()];
  }
  BlockedVector& operator+=(const BlockedVector& o) {
    fluid += o.fluid;
    solid += o.solid;
    return *this;
  }
  BlockedVector& operator-=(const BlockedVector& o) {
    fluid -= o.fluid;
    solid -= o.solid;
    return *this;
  }
  BlockedVector& operator*=(double a) {
    fluid *= a;
    solid *= a;
    return *this;
  }
};

// Compressed sparse rows with a frozen pattern. Writing an entry outside the
// pattern is an error.
class SparseBlock {
 public:
  SparseBlock() = default;
  // adjacency[i] lists the column indices of row i (any order, duplicates ok).
  SparseBlock(int rows, int cols, std::vector<std::vector<int>> adjacency);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return cols_idx_.size(); }

  void set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }
  void add(int i, int j, double v);
  double get(int i, int j) const;  // 0 outside the pattern
  void zero_row(int i);

  // y += A x and y += A^T x
  void add_multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  void add_multiply_transposed(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;

  template <typename F>
  void for_each(F&& f) const {
    for (int i = 0; i < rows_; ++i)
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) f(i, cols_idx_[k], values_[k]);
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> cols_idx_;
  std::vector<double> values_;
};

// Four-block Jacobian layout mirroring BlockedVector.
struct BlockedSparseMatrix {
  int n_fluid = 0, n_solid = 0;
  SparseBlock ff, fs, sf, ss;

  void set_zero() {
    ff.set_zero();
    fs.set_zero();
    sf.set_zero();
    ss.set_zero();
  }
  void zero_row(int global_row) {
    if (global_row < n_fluid) {
      ff.zero_row(global_row);
      fs.zero_row(global_row);
    } else {
      sf.zero_row(global_row - n_fluid);
      ss.zero_row(global_row - n_fluid);
    }
  }
  void add_global(int i, int j, double v) {
    if (i < n_fluid) {
      if (j < n_fluid) ff.add(i, j, v);
      else fs.add(i, j - n_fluid, v);
    } else {
      if (j < n_fluid) sf.add(i - n_fluid, j, v);
      else ss.add(i - n_fluid, j - n_fluid, v);
    }
  }
  BlockedVector multiply(const BlockedVector& x) const;
  Eigen::SparseMatrix<double> to_eigen() const;
};

}  // namespace ifem

#endif
