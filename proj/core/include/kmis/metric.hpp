#pragma once

#include <vector>

#include "kmis/linalg.hpp"

namespace kmis {

/// Local Mahalanobis metric at a state: the unit-determinant matrix a_hat,
/// a factor l_hat with l_hat*l_hat^T = a_hat, the determinant normalizer
/// and ridge actually used, and whether construction fell back to identity.
struct StateMetric {
    SymMatrix a_hat{1};
    Mat l_hat{1, 1};
    double beta = 1.0;
    double gamma = 0.0;
    bool degenerate = false;
};

/// sqrt((a-b)^T A (a-b)) for symmetric positive-definite A.
double mahalanobis_distance(const Vec& a, const Vec& b, const SymMatrix& metric);

/// Unit-determinant metric from a curvature matrix with no zero eigenvalues
/// (restricted to the nonzero eigenspace). Signs of negative directions are
/// flipped; throws DegenerateHessianError when every eigenvalue is zero.
SymMatrix optimal_metric(const SymMatrix& hessian);

/// Total-function variant: ridge-regularized over the full space, with an
/// identity fallback for (numerically) all-zero curvature.
StateMetric regularized_metric(const SymMatrix& hessian);

/// The factor l_hat of a StateMetric, recomputed from its eigenstructure.
Mat transform_matrix(const StateMetric& metric);

struct DistanceContribution {
    double eigenvalue = 0.0;   // curvature eigenvalue along the direction
    double projection = 0.0;   // u^T (a - target)
    double contribution = 0.0; // scale * |eigenvalue| * projection^2
};

/// Per-eigendirection breakdown of the squared optimal-metric distance.
std::vector<DistanceContribution> metric_distance_decomposition(const Vec& a,
                                                                const Vec& target,
                                                                const SymMatrix& hessian);

}  // namespace kmis
