#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bingham {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
/// Compressed sparse row storage; column indices are sorted and unique per row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// Thrown when a factorization hits a zero pivot.  `pivot()` is the offending
/// column when the factorization can report it, -1 otherwise.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, long pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  [[nodiscard]] long pivot() const { return pivot_; }

 private:
  long pivot_;
};

/// Sums duplicates.  Throws std::out_of_range naming the first bad index.
SparseMatrix assemble_from_triplets(std::span<const int> rows, std::span<const int> cols,
                                    std::span<const double> vals, int num_rows, int num_cols);

/// Unchecked fast path used by the assemblers.
SparseMatrix from_triplets(const std::vector<Triplet>& triplets, int num_rows, int num_cols);

/// Sparse LU with partial pivoting (UMFPACK).  General square matrices,
/// including the indefinite saddle-point systems.
class SparseLU {
 public:
  explicit SparseLU(const SparseMatrix& a);
  ~SparseLU();
  SparseLU(SparseLU&&) noexcept;
  SparseLU& operator=(SparseLU&&) noexcept;

  [[nodiscard]] Vector solve(const Vector& b) const;
  [[nodiscard]] int size() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
};

/// Sparse Cholesky for the SPD Riesz matrices.
class SparseCholesky {
 public:
  SparseCholesky();
  explicit SparseCholesky(const SparseMatrix& a);
  ~SparseCholesky();
  SparseCholesky(SparseCholesky&&) noexcept;
  SparseCholesky& operator=(SparseCholesky&&) noexcept;

  [[nodiscard]] Vector solve(const Vector& b) const;
  [[nodiscard]] bool empty() const { return impl_ == nullptr; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Vector solve_sparse(const SparseMatrix& a, const Vector& b);

/// Dense partial-pivot LU; test oracle for the sparse path.
Vector dense_oracle_solve(const DenseMatrix& a, const Vector& b);

struct GeneralizedEigen {
  Vector values;        // ascending
  DenseMatrix vectors;  // B-orthonormal columns
};

/// A x = lambda B x with A symmetric and B symmetric positive definite.
/// Throws std::invalid_argument when B is not SPD.
GeneralizedEigen dense_generalized_eigen(const DenseMatrix& a, const DenseMatrix& b);

/// Restrict a square sparse matrix to the rows/columns listed in `keep`.
SparseMatrix submatrix(const SparseMatrix& a, std::span<const int> keep);

void write_matrix_market(std::ostream& os, const SparseMatrix& a);

}  // namespace bingham
