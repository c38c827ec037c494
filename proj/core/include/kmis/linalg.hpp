#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace kmis {

using Vec = std::vector<double>;

/// Small dense row-major matrix. Everything in this project is at most
/// action-dimension sized, so no attempt is made at large-matrix performance.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    static Mat identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    Mat transposed() const;
    Vec mul(const Vec& v) const;            // A v
    Vec transposed_mul(const Vec& v) const; // A^T v
    Mat mul(const Mat& other) const;        // A B

    double max_abs() const;
    bool all_finite() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// Symmetric matrix; construction symmetrizes so entries(i,j) == entries(j,i)
/// holds exactly. Dimension is capped at 64.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int dim);

    // (M + M^T)/2 of an arbitrary square matrix.
    static SymMatrix from_full(const Mat& m);
    static SymMatrix diagonal(const Vec& entries);
    static SymMatrix identity(int dim);

    int dim() const { return dim_; }
    double operator()(int i, int j) const { return full_(i, j); }
    // Sets both (i,j) and (j,i).
    void set(int i, int j, double value);

    const Mat& full() const { return full_; }
    double trace() const;
    double max_abs() const { return full_.max_abs(); }
    bool all_finite() const { return full_.all_finite(); }

    // v^T M v
    double quad_form(const Vec& v) const;

private:
    int dim_ = 0;
    Mat full_;
};

struct EigenDecomposition {
    Vec eigenvalues;   // descending
    Mat eigenvectors;  // columns, orthonormal, matching eigenvalue order
    int positive_count = 0;
    int negative_count = 0;
    int zero_count = 0;
    double zero_threshold = 0.0;  // absolute threshold used for classification

    bool is_zero(int i) const {
        return zero_threshold == 0.0 || std::abs(eigenvalues[i]) < zero_threshold;
    }
};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations
/// (off-diagonal sweep tolerance 1e-13 * max|M|, at most 100 sweeps).
/// Eigenvalues with |lambda| < zero_tol_rel * max|lambda| are classified zero;
/// an all-zero matrix classifies everything zero.
EigenDecomposition sym_eig(const SymMatrix& m, double zero_tol_rel = 1e-8);

}  // namespace kmis
