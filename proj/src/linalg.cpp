#include "bingham/linalg.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <Eigen/UmfPackSupport>

#include <ostream>
#include <regex>

namespace bingham {

namespace {
using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

// UMFPACK reports singularity without a location; Eigen's supernodal LU
// names the zero column (1-based, in its column ordering), so it is only run
// on the failure path.
long locate_zero_pivot(const ColMatrix& a, std::string& message) {
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  message = lu.lastErrorMessage();
  std::smatch m;
  if (!std::regex_search(message, m, std::regex("([0-9]+)\\s*$"))) return -1;
  const long permuted = std::stol(m[1]) - 1;
  const auto& perm = lu.colsPermutation().indices();
  for (Eigen::Index c = 0; c < perm.size(); ++c)
    if (perm[c] == permuted) return static_cast<long>(c);
  return -1;
}
}  // namespace

SparseMatrix assemble_from_triplets(std::span<const int> rows, std::span<const int> cols,
                                    std::span<const double> vals, int num_rows, int num_cols) {
  if (rows.size() != cols.size() || rows.size() != vals.size())
    throw std::invalid_argument("assemble_from_triplets: array lengths differ");
  std::vector<Triplet> t;
  t.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= num_rows)
      throw std::out_of_range("assemble_from_triplets: row index " + std::to_string(rows[i]) +
                              " at triplet " + std::to_string(i) + " outside [0," +
                              std::to_string(num_rows) + ")");
    if (cols[i] < 0 || cols[i] >= num_cols)
      throw std::out_of_range("assemble_from_triplets: column index " + std::to_string(cols[i]) +
                              " at triplet " + std::to_string(i) + " outside [0," +
                              std::to_string(num_cols) + ")");
    t.emplace_back(rows[i], cols[i], vals[i]);
  }
  return from_triplets(t, num_rows, num_cols);
}

SparseMatrix from_triplets(const std::vector<Triplet>& triplets, int num_rows, int num_cols) {
  SparseMatrix a(num_rows, num_cols);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

struct SparseLU::Impl {
  ColMatrix a;  // UmfPackLU::solve reads the factored matrix again
  Eigen::UmfPackLU<ColMatrix> lu;
};

SparseLU::SparseLU(const SparseMatrix& a) : impl_(std::make_unique<Impl>()), n_(a.rows()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("SparseLU: matrix is not square");
  impl_->a = a;
  impl_->a.makeCompressed();
  // Saddle systems have a symmetric pattern; this strategy roughly halves factor time.
  impl_->lu.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
  impl_->lu.compute(impl_->a);
  if (impl_->lu.info() != Eigen::Success) {
    std::string detail;
    const long pivot = locate_zero_pivot(impl_->a, detail);
    throw SingularMatrixError("SparseLU: singular matrix (" + detail + ")", pivot);
  }
}

SparseLU::~SparseLU() = default;
SparseLU::SparseLU(SparseLU&&) noexcept = default;
SparseLU& SparseLU::operator=(SparseLU&&) noexcept = default;

Vector SparseLU::solve(const Vector& b) const {
  if (b.size() != n_) throw std::invalid_argument("SparseLU::solve: size mismatch");
  Vector x = impl_->lu.solve(b);
  return x;
}

struct SparseCholesky::Impl {
  Eigen::SimplicialLLT<ColMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
};

SparseCholesky::SparseCholesky(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  ColMatrix c = a;
  impl_->llt.compute(c);
  if (impl_->llt.info() != Eigen::Success)
    throw SingularMatrixError("SparseCholesky: matrix is not positive definite", -1);
}

SparseCholesky::SparseCholesky() = default;
SparseCholesky::~SparseCholesky() = default;
SparseCholesky::SparseCholesky(SparseCholesky&&) noexcept = default;
SparseCholesky& SparseCholesky::operator=(SparseCholesky&&) noexcept = default;

Vector SparseCholesky::solve(const Vector& b) const { return impl_->llt.solve(b); }

Vector solve_sparse(const SparseMatrix& a, const Vector& b) { return SparseLU(a).solve(b); }

Vector dense_oracle_solve(const DenseMatrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw std::invalid_argument("dense_oracle_solve: dimension mismatch");
  Eigen::FullPivLU<DenseMatrix> lu(a);
  if (!lu.isInvertible()) throw SingularMatrixError("dense_oracle_solve: singular matrix", -1);
  return lu.solve(b);
}

GeneralizedEigen dense_generalized_eigen(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument("dense_generalized_eigen: dimension mismatch");
  Eigen::LLT<DenseMatrix> llt(b);
  if (llt.info() != Eigen::Success || (b - b.transpose()).norm() > 1e-12 * (1.0 + b.norm()))
    throw std::invalid_argument("dense_generalized_eigen: B is not symmetric positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(a, b);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense_generalized_eigen: eigen solver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

SparseMatrix submatrix(const SparseMatrix& a, std::span<const int> keep) {
  std::vector<int> map(a.rows(), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) map[keep[i]] = static_cast<int>(i);
  std::vector<Triplet> t;
  t.reserve(a.nonZeros());
  for (int r = 0; r < a.outerSize(); ++r) {
    if (map[r] < 0) continue;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it)
      if (map[it.col()] >= 0) t.emplace_back(map[r], map[it.col()], it.value());
  }
  const int n = static_cast<int>(keep.size());
  return from_triplets(t, n, n);
}

void write_matrix_market(std::ostream& os, const SparseMatrix& a) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  os.precision(17);
  for (int r = 0; r < a.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(a, r); it; ++it)
      os << r + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace bingham
