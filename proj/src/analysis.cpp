// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "poimsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "poimsim/errors.hpp"
#include "poimsim/rng.hpp"

namespace poimsim::analysis {

namespace {

void check_rectangular(const Matrix& points) {
    if (points.empty()) fail(Err::kDegenerateInput, "no points");
    const std::size_t dims = points[0].size();
    for (const std::vector<double>& row : points) {
        if (row.size() != dims) fail(Err::kDimensionMismatch, "ragged point matrix");
    }
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

}  // namespace

void jacobi_eigen(Matrix a, std::vector<double>& eigenvalues, Matrix& eigenvectors) {
    const std::size_t n = a.size();
    eigenvectors.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) eigenvectors[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        }
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i][p];
                    const double aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[p][i];
                    const double aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = eigenvectors[i][p];
                    const double viq = eigenvectors[i][q];
                    eigenvectors[i][p] = c * vip - s * viq;
                    eigenvectors[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a[i][i];
}

PcaResult pca2(const Matrix& points) {
    check_rectangular(points);
    const std::size_t n = points.size();
    const std::size_t dims = points[0].size();
    if (n < 2 || dims < 2) fail(Err::kDegenerateInput, "pca2 needs at least 2 points and 2 dimensions");

    PcaResult result;
    result.mean.assign(dims, 0.0);
    result.stddev.assign(dims, 0.0);
    for (const std::vector<double>& row : points) {
        for (std::size_t j = 0; j < dims; ++j) result.mean[j] += row[j];
    }
    for (std::size_t j = 0; j < dims; ++j) result.mean[j] /= static_cast<double>(n);
    for (const std::vector<double>& row : points) {
        for (std::size_t j = 0; j < dims; ++j) {
            const double d = row[j] - result.mean[j];
            result.stddev[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < dims; ++j) result.stddev[j] = std::sqrt(result.stddev[j] / static_cast<double>(n));

    Matrix standardized(n, std::vector<double>(dims, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dims; ++j) {
            standardized[i][j] =
                result.stddev[j] == 0.0 ? 0.0 : (points[i][j] - result.mean[j]) / result.stddev[j];
        }
    }

    Matrix covariance(dims, std::vector<double>(dims, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < dims; ++p) {
            for (std::size_t q = p; q < dims; ++q) {
                covariance[p][q] += standardized[i][p] * standardized[i][q];
            }
        }
    }
    for (std::size_t p = 0; p < dims; ++p) {
        for (std::size_t q = p; q < dims; ++q) {
            covariance[p][q] /= static_cast<double>(n - 1);
            covariance[q][p] = covariance[p][q];
        }
    }

    std::vector<double> eigenvalues;
    Matrix eigenvectors;
    jacobi_eigen(covariance, eigenvalues, eigenvectors);

    std::vector<std::size_t> order(dims);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return eigenvalues[a] > eigenvalues[b];
    });

    result.eigenvalues.reserve(dims);
    for (std::size_t j : order) result.eigenvalues.push_back(eigenvalues[j]);

    double trace = 0.0;
    for (double value : result.eigenvalues) trace += value;
    if (trace <= 0.0) fail(Err::kDegenerateInput, "covariance has no variance");

    for (int component = 0; component < 2; ++component) {
        std::vector<double> loading(dims);
        for (std::size_t i = 0; i < dims; ++i) {
            loading[i] = eigenvectors[i][order[static_cast<std::size_t>(component)]];
        }
        // Sign convention: first loading of magnitude above tolerance is positive.
        for (double value : loading) {
            if (std::abs(value) > 1e-12) {
                if (value < 0) {
                    for (double& entry : loading) entry = -entry;
                }
                break;
            }
        }
        result.components[static_cast<std::size_t>(component)] = std::move(loading);
        result.variance_ratio[static_cast<std::size_t>(component)] =
            result.eigenvalues[static_cast<std::size_t>(component)] / trace;
    }

    result.projected.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int component = 0; component < 2; ++component) {
            double dot = 0.0;
            for (std::size_t j = 0; j < dims; ++j) {
                dot += standardized[i][j] * result.components[static_cast<std::size_t>(component)][j];
            }
            result.projected[i][static_cast<std::size_t>(component)] = dot;
        }
    }
    return result;
}

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t rng_seed) {
    check_rectangular(points);
    const std::size_t n = points.size();
    if (k < 1) fail(Err::kConfigError, "k must be positive");
    if (static_cast<std::size_t>(k) > n) fail(Err::kKTooLarge, "k exceeds point count");

    rng::DeterministicRng rng(rng_seed);

    // k-means++ seeding.
    Matrix centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    centroids.push_back(points[rng.uniform_below(n)]);
    std::vector<double> best_sq(n, 0.0);
    while (centroids.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double nearest = sq_dist(points[i], centroids[0]);
            for (std::size_t c = 1; c < centroids.size(); ++c) {
                nearest = std::min(nearest, sq_dist(points[i], centroids[c]));
            }
            best_sq[i] = nearest;
            total += nearest;
        }
        if (total == 0.0) {
            centroids.push_back(points[rng.uniform_below(n)]);
            continue;
        }
        double target = rng.uniform() * total;
        std::size_t chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= best_sq[i];
            if (target <= 0.0) {
                chosen = i;
                break;
            }
        }
        centroids.push_back(points[chosen]);
    }

    KMeansResult result;
    result.assignments.assign(n, -1);
    const std::size_t dims = points[0].size();
    for (int iteration = 0; iteration < 300; ++iteration) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(points[i], centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(points[i], centroids[static_cast<std::size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (result.assignments[i] != best) {
                result.assignments[i] = best;
                changed = true;
            }
            inertia += best_d;
        }
        result.inertia = inertia;
        result.inertia_trace.push_back(inertia);
        result.iterations = iteration + 1;
        if (!changed) break;

        Matrix sums(static_cast<std::size_t>(k), std::vector<double>(dims, 0.0));
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(result.assignments[i]);
            ++counts[c];
            for (std::size_t j = 0; j < dims; ++j) sums[c][j] += points[i][j];
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (counts[c] == 0) {
                // Re-seed an emptied cluster on the point farthest from its centroid.
                std::size_t farthest = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d =
                        sq_dist(points[i], centroids[static_cast<std::size_t>(result.assignments[i])]);
                    if (d > far_d) {
                        far_d = d;
                        farthest = i;
                    }
                }
                centroids[c] = points[farthest];
                continue;
            }
            for (std::size_t j = 0; j < dims; ++j) {
                centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
            }
        }
    }
    result.centroids = std::move(centroids);
    return result;
}

namespace {

int cluster_count(const std::vector<int>& assignments) {
    int k = 0;
    for (int a : assignments) k = std::max(k, a + 1);
    return k;
}

}  // namespace

double silhouette(const Matrix& points, const std::vector<int>& assignments) {
    check_rectangular(points);
    if (points.size() != assignments.size()) fail(Err::kDimensionMismatch, "assignment count mismatch");
    const int k = cluster_count(assignments);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignments) {
        if (a < 0) fail(Err::kConfigError, "negative cluster id");
        ++sizes[static_cast<std::size_t>(a)];
    }
    int nonempty = 0;
    for (std::size_t size : sizes) nonempty += size > 0 ? 1 : 0;
    if (nonempty < 2) fail(Err::kSingleCluster, "silhouette needs at least two clusters");

    const std::size_t n = points.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(assignments[i]);
        if (sizes[own] == 1) continue;  // singleton silhouette is 0
        std::vector<double> mean_dist(static_cast<std::size_t>(k), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            mean_dist[static_cast<std::size_t>(assignments[j])] += std::sqrt(sq_dist(points[i], points[j]));
        }
        const double a = mean_dist[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (c == own || sizes[c] == 0) continue;
            b = std::min(b, mean_dist[c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

double calinski_harabasz(const Matrix& points, const std::vector<int>& assignments) {
    check_rectangular(points);
    if (points.size() != assignments.size()) fail(Err::kDimensionMismatch, "assignment count mismatch");
    const int k = cluster_count(assignments);
    const std::size_t n = points.size();
    const std::size_t dims = points[0].size();
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    Matrix centroids(static_cast<std::size_t>(k), std::vector<double>(dims, 0.0));
    std::vector<double> overall(dims, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(assignments[i]);
        ++sizes[c];
        for (std::size_t j = 0; j < dims; ++j) {
            centroids[c][j] += points[i][j];
            overall[j] += points[i][j];
        }
    }
    int nonempty = 0;
    for (std::size_t size : sizes) nonempty += size > 0 ? 1 : 0;
    if (nonempty < 2) fail(Err::kSingleCluster, "index needs at least two clusters");
    for (std::size_t j = 0; j < dims; ++j) overall[j] /= static_cast<double>(n);
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
        if (sizes[c] == 0) continue;
        for (std::size_t j = 0; j < dims; ++j) centroids[c][j] /= static_cast<double>(sizes[c]);
    }

    double within = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        within += sq_dist(points[i], centroids[static_cast<std::size_t>(assignments[i])]);
    }
    double between = 0.0;
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
        if (sizes[c] == 0) continue;
        between += static_cast<double>(sizes[c]) * sq_dist(centroids[c], overall);
    }
    if (within == 0.0) return std::numeric_limits<double>::infinity();
    return (between / static_cast<double>(nonempty - 1)) /
           (within / static_cast<double>(n - static_cast<std::size_t>(nonempty)));
}

ClusterReport cluster_pipeline(const Matrix& points, int k, std::uint64_t rng_seed) {
    ClusterReport report;
    report.pca = pca2(points);
    Matrix projected;
    projected.reserve(report.pca.projected.size());
    for (const std::array<double, 2>& p : report.pca.projected) projected.push_back({p[0], p[1]});
    report.clustering = kmeans(projected, k, rng_seed);
    report.silhouette_score = silhouette(projected, report.clustering.assignments);
    report.calinski_harabasz_score = calinski_harabasz(projected, report.clustering.assignments);
    report.cluster_sizes.assign(static_cast<std::size_t>(k), 0);
    for (int a : report.clustering.assignments) ++report.cluster_sizes[static_cast<std::size_t>(a)];
    return report;
}

std::string ClusterReport::to_text() const {
    std::ostringstream out;
    out << "points=" << pca.projected.size() << '\n';
    out << "variance_ratio_pc1=" << pca.variance_ratio[0] << '\n';
    out << "variance_ratio_pc2=" << pca.variance_ratio[1] << '\n';
    out << "silhouette=" << silhouette_score << '\n';
    out << "calinski_harabasz=" << calinski_harabasz_score << '\n';
    for (std::size_t c = 0; c < cluster_sizes.size(); ++c) {
        out << "cluster_" << c << "_size=" << cluster_sizes[c] << '\n';
    }
    return out.str();
}

void ClusterReport::write_points_csv(std::ostream& out) const {
    out << "pc1,pc2,cluster\n";
    for (std::size_t i = 0; i < pca.projected.size(); ++i) {
        out << pca.projected[i][0] << ',' << pca.projected[i][1] << ',' << clustering.assignments[i] << '\n';
    }
}

}  // namespace poimsim::analysis
