#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace otm {

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Symmetric sparse matrix in compressed-row layout. Duplicate triplet
/// entries are summed during construction.
class SparseOperator {
public:
    SparseOperator() = default;

    static SparseOperator from_triplets(int n, std::vector<Triplet> triplets,
                                        bool symmetric = true);

    int size() const { return n_; }
    std::int64_t nnz() const { return static_cast<std::int64_t>(values_.size()); }
    bool symmetric() const { return symmetric_; }

    void apply(std::span<const double> x, std::span<double> y) const;

    std::vector<double> diagonal() const;

    /// Stored entry (i,j), or 0 if outside the pattern.
    double entry(int i, int j) const;

    /// Largest relative asymmetry max |a_ij - a_ji| / max|a|; 0 for empty.
    double max_asymmetry() const;

    std::span<const int> row_offsets() const { return row_ptr_; }
    std::span<const int> columns() const { return cols_; }
    std::span<const double> values() const { return values_; }

private:
    int n_ = 0;
    bool symmetric_ = true;
    std::vector<int> row_ptr_;
    std::vector<int> cols_;
    std::vector<double> values_;
};

struct CgResult {
    bool converged = false;
    int iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> residual_history;
};

/// Jacobi-preconditioned conjugate gradient. Solves A x = b starting from the
/// provided x. `project_constant_kernel` keeps iterates orthogonal to the
/// all-ones vector for consistent singular (pure Neumann) systems.
CgResult cg_jacobi(const SparseOperator& A, std::span<const double> b,
                   std::vector<double>& x, double rel_tol, int max_iter,
                   bool project_constant_kernel = false);

}  // namespace otm
