#include "otmorph/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "otmorph/errors.hpp"

namespace otm {

SparseOperator SparseOperator::from_triplets(int n, std::vector<Triplet> triplets,
                                             bool symmetric) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseOperator A;
    A.n_ = n;
    A.symmetric_ = symmetric;
    A.row_ptr_.assign(n + 1, 0);
    A.cols_.reserve(triplets.size());
    A.values_.reserve(triplets.size());

    for (std::size_t s = 0; s < triplets.size();) {
        const int r = triplets[s].row;
        const int c = triplets[s].col;
        double v = 0.0;
        while (s < triplets.size() && triplets[s].row == r && triplets[s].col == c) {
            v += triplets[s].value;
            ++s;
        }
        A.cols_.push_back(c);
        A.values_.push_back(v);
        A.row_ptr_[r + 1]++;
    }
    for (int r = 0; r < n; ++r) A.row_ptr_[r + 1] += A.row_ptr_[r];
    return A;
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
    for (int r = 0; r < n_; ++r) {
        double acc = 0.0;
        for (int s = row_ptr_[r]; s < row_ptr_[r + 1]; ++s) {
            acc += values_[s] * x[cols_[s]];
        }
        y[r] = acc;
    }
}

std::vector<double> SparseOperator::diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (int r = 0; r < n_; ++r) {
        for (int s = row_ptr_[r]; s < row_ptr_[r + 1]; ++s) {
            if (cols_[s] == r) d[r] = values_[s];
        }
    }
    return d;
}

double SparseOperator::entry(int i, int j) const {
    for (int s = row_ptr_[i]; s < row_ptr_[i + 1]; ++s) {
        if (cols_[s] == j) return values_[s];
    }
    return 0.0;
}

double SparseOperator::max_asymmetry() const {
    double worst = 0.0;
    for (int r = 0; r < n_; ++r) {
        for (int s = row_ptr_[r]; s < row_ptr_[r + 1]; ++s) {
            worst = std::max(worst, std::abs(values_[s] - entry(cols_[s], r)));
        }
    }
    return worst;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

void remove_mean(std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    for (double& e : v) e -= m;
}

}  // namespace

CgResult cg_jacobi(const SparseOperator& A, std::span<const double> b,
                   std::vector<double>& x, double rel_tol, int max_iter,
                   bool project_constant_kernel) {
    const int n = A.size();
    CgResult res;

    const double norm_b = std::sqrt(dot(b, b));
    if (norm_b == 0.0) {
        x.assign(n, 0.0);
        res.converged = true;
        return res;
    }

    std::vector<double> inv_diag = A.diagonal();
    for (double& d : inv_diag) d = d != 0.0 ? 1.0 / d : 1.0;

    std::vector<double> r(n), z(n), p(n), q(n);
    A.apply(x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    if (project_constant_kernel) remove_mean(r);

    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    double res_norm = std::sqrt(dot(r, r));

    int it = 0;
    res.residual_history.push_back(res_norm / norm_b);
    while (res_norm > rel_tol * norm_b && it < max_iter) {
        A.apply(p, q);
        const double pq = dot(p, q);
        if (pq <= 0.0) break;  // lost positive curvature
        const double alpha = rz / pq;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        ++it;
        if (project_constant_kernel && it % 50 == 0) {
            remove_mean(r);
            remove_mean(x);
        }
        for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        res_norm = std::sqrt(dot(r, r));
        res.residual_history.push_back(res_norm / norm_b);
    }

    res.iterations = it;
    res.relative_residual = res_norm / norm_b;
    res.converged = res_norm <= rel_tol * norm_b;
    return res;
}

}  // namespace otm
