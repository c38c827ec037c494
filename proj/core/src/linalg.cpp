#include "kmis/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kmis/errors.hpp"

namespace kmis {

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::transposed() const {
    Mat t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Vec Mat::mul(const Vec& v) const {
    if (static_cast<int>(v.size()) != cols_) throw std::invalid_argument("Mat::mul: size mismatch");
    Vec out(rows_, 0.0);
    for (int i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

Vec Mat::transposed_mul(const Vec& v) const {
    if (static_cast<int>(v.size()) != rows_) throw std::invalid_argument("Mat::transposed_mul: size mismatch");
    Vec out(cols_, 0.0);
    for (int j = 0; j < cols_; ++j) {
        double s = 0.0;
        for (int i = 0; i < rows_; ++i) s += (*this)(i, j) * v[i];
        out[j] = s;
    }
    return out;
}

Mat Mat::mul(const Mat& other) const {
    if (cols_ != other.rows_) throw std::invalid_argument("Mat::mul: shape mismatch");
    Mat out(rows_, other.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            const double a = (*this)(i, k);
            if (a == 0.0) continue;
            for (int j = 0; j < other.cols_; ++j) out(i, j) += a * other(k, j);
        }
    return out;
}

double Mat::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool Mat::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

SymMatrix::SymMatrix(int dim) : dim_(dim), full_(dim, dim) {
    if (dim < 1 || dim > 64) throw std::invalid_argument("SymMatrix: dim must be in [1, 64]");
}

SymMatrix SymMatrix::from_full(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("SymMatrix::from_full: not square");
    SymMatrix s(m.rows());
    for (int i = 0; i < m.rows(); ++i) {
        s.full_(i, i) = m(i, i);
        for (int j = i + 1; j < m.cols(); ++j) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            s.full_(i, j) = v;
            s.full_(j, i) = v;
        }
    }
    return s;
}

SymMatrix SymMatrix::diagonal(const Vec& entries) {
    SymMatrix s(static_cast<int>(entries.size()));
    for (int i = 0; i < s.dim_; ++i) s.full_(i, i) = entries[i];
    return s;
}

SymMatrix SymMatrix::identity(int dim) {
    SymMatrix s(dim);
    for (int i = 0; i < dim; ++i) s.full_(i, i) = 1.0;
    return s;
}

void SymMatrix::set(int i, int j, double value) {
    full_(i, j) = value;
    full_(j, i) = value;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < dim_; ++i) t += full_(i, i);
    return t;
}

double SymMatrix::quad_form(const Vec& v) const {
    if (static_cast<int>(v.size()) != dim_) throw std::invalid_argument("SymMatrix::quad_form: size mismatch");
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
        double row = 0.0;
        for (int j = 0; j < dim_; ++j) row += full_(i, j) * v[j];
        s += v[i] * row;
    }
    return s;
}

EigenDecomposition sym_eig(const SymMatrix& m, double zero_tol_rel) {
    if (!m.all_finite()) throw std::invalid_argument("sym_eig: non-finite entries");
    if (zero_tol_rel <= 0.0) throw std::invalid_argument("sym_eig: zero_tol_rel must be positive");

    const int n = m.dim();
    Mat a = m.full();
    Mat v = Mat::identity(n);
    const double off_tol = 1e-13 * m.max_abs();

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off_max = 0.0;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) off_max = std::max(off_max, std::abs(a(p, q)));
        if (off_max <= off_tol) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= off_tol) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&a](int i, int j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Mat(n, n);
    for (int j = 0; j < n; ++j) {
        out.eigenvalues[j] = a(order[j], order[j]);
        for (int i = 0; i < n; ++i) out.eigenvectors(i, j) = v(i, order[j]);
    }

    double max_abs_lambda = 0.0;
    for (double l : out.eigenvalues) max_abs_lambda = std::max(max_abs_lambda, std::abs(l));
    out.zero_threshold = zero_tol_rel * max_abs_lambda;
    for (double l : out.eigenvalues) {
        if (max_abs_lambda == 0.0 || std::abs(l) < out.zero_threshold) {
            ++out.zero_count;
        } else if (l > 0.0) {
            ++out.positive_count;
        } else {
            ++out.negative_count;
        }
    }
    return out;
}

}  // namespace kmis
