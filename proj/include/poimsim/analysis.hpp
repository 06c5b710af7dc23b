// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace poimsim::analysis {

using Matrix = std::vector<std::vector<double>>;

struct PcaResult {
    std::vector<std::array<double, 2>> projected;
    std::array<std::vector<double>, 2> components;  // unit loadings, first nonzero entry positive
    std::array<double, 2> variance_ratio{};
    std::vector<double> eigenvalues;  // all, descending
    std::vector<double> mean;
    std::vector<double> stddev;
};

// Standardize columns (zero-variance columns map to zero), then project onto
// the top-2 eigenvectors of the covariance matrix.
PcaResult pca2(const Matrix& points);

struct KMeansResult {
    std::vector<int> assignments;
    Matrix centroids;
    double inertia{0.0};
    std::vector<double> inertia_trace;  // per Lloyd iteration, non-increasing
    int iterations{0};
};

// k-means++ seeding, Lloyd iterations to an assignment fixpoint (or 300
// rounds); deterministic per seed.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t rng_seed);

double silhouette(const Matrix& points, const std::vector<int>& assignments);
double calinski_harabasz(const Matrix& points, const std::vector<int>& assignments);

struct ClusterReport {
    PcaResult pca;
    KMeansResult clustering;
    double silhouette_score{0.0};
    double calinski_harabasz_score{0.0};
    std::vector<std::size_t> cluster_sizes;

    std::string to_text() const;
    void write_points_csv(std::ostream& out) const;
};

// Full separability pipeline: standardize + PCA to 2-D, cluster the
// projection, score it.
ClusterReport cluster_pipeline(const Matrix& points, int k, std::uint64_t rng_seed);

// Cyclic Jacobi eigensolver for small symmetric matrices; exposed for the
// oracle comparisons in the test suite.
void jacobi_eigen(Matrix a, std::vector<double>& eigenvalues, Matrix& eigenvectors);

}  // namespace poimsim::analysis
