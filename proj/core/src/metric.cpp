#include "kmis/metric.hpp"

#include <cmath>
#include <stdexcept>

#include "kmis/errors.hpp"

namespace kmis {

namespace {

constexpr double kDegenerateScale = 1e-300;

Mat assemble_from_spectrum(const Mat& vectors, const Vec& diag) {
    const int d = vectors.rows();
    Mat out(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k) acc += vectors(r, k) * diag[k] * vectors(c, k);
            out(r, c) = acc;
        }
    return out;
}

}  // namespace

double mahalanobis_distance(const Vec& a, const Vec& b, const SymMatrix& metric) {
    if (a.size() != b.size() || static_cast<int>(a.size()) != metric.dim())
        throw std::invalid_argument("mahalanobis_distance: dimension mismatch");
    const auto eig = sym_eig(metric);
    if (eig.negative_count > 0 || eig.zero_count > 0)
        throw std::invalid_argument("mahalanobis_distance: metric is not positive-definite");
    Vec diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    return std::sqrt(metric.quad_form(diff));
}

SymMatrix optimal_metric(const SymMatrix& hessian) {
    const int d = hessian.dim();
    const auto eig = sym_eig(hessian);
    const int d_plus = eig.positive_count;
    const int d_minus = eig.negative_count;
    if (d_plus + d_minus == 0)
        throw DegenerateHessianError("optimal_metric: all eigenvalues are zero");

    // m_i = d_+ * lambda_i (positive branch) or -d_- * lambda_i (negative
    // branch, made positive); zero directions stay zero.
    Vec m(d, 0.0);
    double log_det = 0.0;
    for (int i = 0; i < d; ++i) {
        if (eig.is_zero(i)) continue;
        const double l = eig.eigenvalues[i];
        m[i] = l > 0.0 ? d_plus * l : -d_minus * l;
        log_det += std::log(m[i]);
    }
    const double alpha = std::exp(-log_det / (d_plus + d_minus));
    for (int i = 0; i < d; ++i) m[i] *= alpha;
    return SymMatrix::from_full(assemble_from_spectrum(eig.eigenvectors, m));
}

StateMetric regularized_metric(const SymMatrix& hessian) {
    const int d = hessian.dim();
    const auto eig = sym_eig(hessian);

    double max_abs = 0.0;
    for (double l : eig.eigenvalues) max_abs = std::max(max_abs, std::abs(l));
    if (!(max_abs > kDegenerateScale)) {
        StateMetric out;
        out.a_hat = SymMatrix::identity(d);
        out.l_hat = Mat::identity(d);
        out.beta = 1.0;
        out.gamma = 0.0;
        out.degenerate = true;
        return out;
    }

    const int d_plus = eig.positive_count;
    const int d_minus = eig.negative_count;

    // Spectrum of X: nonnegative, zero along the zero eigenspace.
    Vec x(d, 0.0);
    for (int i = 0; i < d; ++i) {
        if (eig.is_zero(i)) continue;
        const double l = eig.eigenvalues[i];
        x[i] = l > 0.0 ? d_plus * l : -d_minus * l;
    }

    const double eps = 0.01 * max_abs;
    // Y = X + eps*I shares X's eigenvectors; determinant via log-sum to
    // survive extreme scales.
    double log_det_y = 0.0;
    for (int i = 0; i < d; ++i) log_det_y += std::log(x[i] + eps);
    const double beta = std::exp(-log_det_y / d);
    const double gamma = beta * eps;

    Vec a_spec(d), l_spec(d);
    for (int i = 0; i < d; ++i) {
        a_spec[i] = beta * (x[i] + eps);
        if (!(a_spec[i] >= 0.0))
            throw InternalConsistencyError(
                "regularized_metric: negative spectrum entry before square root");
        l_spec[i] = std::sqrt(a_spec[i]);
    }

    StateMetric out;
    out.a_hat = SymMatrix::from_full(assemble_from_spectrum(eig.eigenvectors, a_spec));
    // L = U * diag(sqrt(beta*x_i + gamma)); columns scaled, no U^T factor.
    Mat l(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) l(r, c) = eig.eigenvectors(r, c) * l_spec[c];
    out.l_hat = std::move(l);
    out.beta = beta;
    out.gamma = gamma;
    out.degenerate = false;
    return out;
}

Mat transform_matrix(const StateMetric& metric) {
    if (metric.degenerate) return Mat::identity(metric.a_hat.dim());
    const int d = metric.a_hat.dim();
    const auto eig = sym_eig(metric.a_hat);
    Mat l(d, d);
    for (int c = 0; c < d; ++c) {
        const double v = eig.eigenvalues[c];
        if (v < 0.0 && std::abs(v) > eig.zero_threshold)
            throw InternalConsistencyError(
                "transform_matrix: metric has a negative eigenvalue");
        const double root = std::sqrt(std::max(v, 0.0));
        for (int r = 0; r < d; ++r) l(r, c) = eig.eigenvectors(r, c) * root;
    }
    return l;
}

std::vector<DistanceContribution> metric_distance_decomposition(const Vec& a,
                                                                const Vec& target,
                                                                const SymMatrix& hessian) {
    const int d = hessian.dim();
    if (static_cast<int>(a.size()) != d || a.size() != target.size())
        throw std::invalid_argument("metric_distance_decomposition: dimension mismatch");
    const auto eig = sym_eig(hessian);
    const int d_plus = eig.positive_count;
    const int d_minus = eig.negative_count;
    if (d_plus + d_minus == 0)
        throw DegenerateHessianError("metric_distance_decomposition: all-zero spectrum");

    double log_det = 0.0;
    for (int i = 0; i < d; ++i) {
        if (eig.is_zero(i)) continue;
        const double l = eig.eigenvalues[i];
        log_det += std::log(l > 0.0 ? d_plus * l : -d_minus * l);
    }
    const double alpha = std::exp(-log_det / (d_plus + d_minus));

    Vec diff(d);
    for (int i = 0; i < d; ++i) diff[i] = a[i] - target[i];

    std::vector<DistanceContribution> out;
    for (int i = 0; i < d; ++i) {
        if (eig.is_zero(i)) continue;
        const double l = eig.eigenvalues[i];
        double proj = 0.0;
        for (int r = 0; r < d; ++r) proj += eig.eigenvectors(r, i) * diff[r];
        const double scale = l > 0.0 ? d_plus : d_minus;
        DistanceContribution c;
        c.eigenvalue = l;
        c.projection = proj;
        c.contribution = alpha * scale * std::abs(l) * proj * proj;
        out.push_back(c);
    }
    return out;
}

}  // namespace kmis
