// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent oracles for the test suites. Everything here re-derives
// results from first principles, sharing only type definitions with the
// library so that a bug cannot hide in a shared helper.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "poimsim/inference.hpp"

namespace poimsim::test_oracle {

using fixedpoint::Int128;
using fixedpoint::Int256;
using inference::ArchKind;
using inference::ModelArch;
using inference::QuantizedModel;
using inference::TreeNode;

// Truncating division via explicit magnitude handling.
inline Int256 trunc_div(const Int256& a, const Int256& b) {
    const bool negative = (a < 0) != (b < 0);
    const Int256 magnitude = boost::multiprecision::abs(a) / boost::multiprecision::abs(b);
    return negative ? Int256(-magnitude) : magnitude;
}

inline Int256 scaled_term(const Int128& w, const Int128& x, const Int128& scale) {
    return trunc_div(Int256(w) * Int256(x), Int256(scale));
}

inline Int256 oracle_linear(const QuantizedModel& m, const std::vector<Int128>& x) {
    Int256 acc{m.biases[0]};
    for (std::size_t i = 0; i < x.size(); ++i) acc += scaled_term(m.weights[i], x[i], m.scale.value());
    return acc;
}

inline Int256 oracle_mlp(const QuantizedModel& m, const std::vector<Int128>& x) {
    const Int128 scale = m.scale.value();
    std::vector<Int256> current(x.begin(), x.end());
    std::size_t w_off = 0;
    std::size_t b_off = 0;
    std::size_t prev = static_cast<std::size_t>(m.arch.input_dim);
    for (std::size_t layer = 0; layer < m.arch.layer_sizes.size(); ++layer) {
        const auto size = static_cast<std::size_t>(m.arch.layer_sizes[layer]);
        std::vector<Int256> next(size);
        for (std::size_t i = 0; i < size; ++i) {
            Int256 acc{m.biases[b_off + i]};
            for (std::size_t j = 0; j < prev; ++j) {
                acc += trunc_div(Int256(m.weights[w_off + i * prev + j]) * current[j], Int256(scale));
            }
            const bool hidden = layer + 1 < m.arch.layer_sizes.size();
            next[i] = hidden && acc < 0 ? Int256(0) : acc;
        }
        w_off += prev * size;
        b_off += size;
        current = std::move(next);
        prev = size;
    }
    return current[0];
}

inline Int256 oracle_cnn(const QuantizedModel& m, const std::vector<Int128>& x) {
    const Int128 scale = m.scale.value();
    const auto f_count = static_cast<std::size_t>(m.arch.filters);
    const auto kernel = static_cast<std::size_t>(m.arch.kernel);
    const std::size_t positions = static_cast<std::size_t>(m.arch.input_dim) - kernel + 1;
    const std::size_t readout_off = f_count * kernel;

    Int256 logit{m.biases[f_count]};
    for (std::size_t f = 0; f < f_count; ++f) {
        for (std::size_t p = 0; p < positions; ++p) {
            Int256 activation{m.biases[f]};
            for (std::size_t k = 0; k < kernel; ++k) {
                activation += trunc_div(Int256(m.weights[f * kernel + k]) * Int256(x[p + k]), Int256(scale));
            }
            if (activation < 0) activation = 0;
            logit += trunc_div(Int256(m.weights[readout_off + f * positions + p]) * activation, Int256(scale));
        }
    }
    return logit;
}

inline Int256 oracle_rnn(const QuantizedModel& m, const std::vector<Int128>& x) {
    const Int128 scale = m.scale.value();
    const auto units = static_cast<std::size_t>(m.arch.units);
    const auto steps = static_cast<std::size_t>(m.arch.timesteps);
    const auto width = static_cast<std::size_t>(m.arch.rnn_step_width());
    const std::size_t whh_off = units * width;
    const std::size_t out_off = whh_off + units * units;

    std::vector<Int256> hidden(units, Int256(0));
    for (std::size_t t = 0; t < steps; ++t) {
        std::vector<Int256> next(units);
        for (std::size_t u = 0; u < units; ++u) {
            Int256 acc{m.biases[u]};
            for (std::size_t j = 0; j < width; ++j) {
                const std::size_t idx = t * width + j;
                const Int256 xv = idx < static_cast<std::size_t>(m.arch.input_dim) ? Int256(x[idx]) : Int256(0);
                acc += trunc_div(Int256(m.weights[u * width + j]) * xv, Int256(scale));
            }
            for (std::size_t v = 0; v < units; ++v) {
                acc += trunc_div(Int256(m.weights[whh_off + u * units + v]) * hidden[v], Int256(scale));
            }
            next[u] = acc < 0 ? Int256(0) : acc;
        }
        hidden = std::move(next);
    }
    Int256 logit{m.biases[units]};
    for (std::size_t u = 0; u < units; ++u) {
        logit += trunc_div(Int256(m.weights[out_off + u]) * hidden[u], Int256(scale));
    }
    return logit;
}

inline int oracle_tree(const QuantizedModel& m, const std::vector<Int128>& x) {
    std::size_t idx = 0;
    while (true) {
        const TreeNode& node = m.arch.nodes[idx];
        if (node.is_leaf()) return node.label;
        idx = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= m.weights[idx] ? node.left
                                                                                                   : node.right);
    }
}

// 1 if logit > 0 else 0; the independent sign rule.
inline int oracle_label(const QuantizedModel& m, const std::vector<Int128>& x) {
    switch (m.arch.kind) {
        case ArchKind::kLinear: return oracle_linear(m, x) > 0 ? 1 : 0;
        case ArchKind::kMlp: return oracle_mlp(m, x) > 0 ? 1 : 0;
        case ArchKind::kCnn1d: return oracle_cnn(m, x) > 0 ? 1 : 0;
        case ArchKind::kRnn: return oracle_rnn(m, x) > 0 ? 1 : 0;
        case ArchKind::kDecisionTree: return oracle_tree(m, x);
    }
    return -1;
}

inline Int256 oracle_logit(const QuantizedModel& m, const std::vector<Int128>& x) {
    switch (m.arch.kind) {
        case ArchKind::kLinear: return oracle_linear(m, x);
        case ArchKind::kMlp: return oracle_mlp(m, x);
        case ArchKind::kCnn1d: return oracle_cnn(m, x);
        case ArchKind::kRnn: return oracle_rnn(m, x);
        case ArchKind::kDecisionTree: break;
    }
    return 0;
}

// Second float implementation with long double accumulation.
inline double float_forward_oracle(const inference::FloatModel& m, const std::vector<double>& x) {
    const ModelArch& arch = m.arch;
    std::vector<long double> current(x.begin(), x.end());
    if (arch.kind == ArchKind::kLinear) {
        long double acc = m.biases[0];
        for (std::size_t i = 0; i < x.size(); ++i) acc += static_cast<long double>(m.weights[i]) * current[i];
        return static_cast<double>(acc);
    }
    if (arch.kind == ArchKind::kMlp) {
        std::size_t w_off = 0;
        std::size_t b_off = 0;
        std::size_t prev = static_cast<std::size_t>(arch.input_dim);
        for (std::size_t layer = 0; layer < arch.layer_sizes.size(); ++layer) {
            const auto size = static_cast<std::size_t>(arch.layer_sizes[layer]);
            std::vector<long double> next(size, 0.0L);
            for (std::size_t i = 0; i < size; ++i) {
                long double acc = m.biases[b_off + i];
                for (std::size_t j = 0; j < prev; ++j) {
                    acc += static_cast<long double>(m.weights[w_off + i * prev + j]) * current[j];
                }
                next[i] = layer + 1 < arch.layer_sizes.size() && acc < 0 ? 0.0L : acc;
            }
            w_off += prev * size;
            b_off += size;
            current = std::move(next);
            prev = size;
        }
        return static_cast<double>(current[0]);
    }
    if (arch.kind == ArchKind::kCnn1d) {
        const auto f_count = static_cast<std::size_t>(arch.filters);
        const auto kernel = static_cast<std::size_t>(arch.kernel);
        const std::size_t positions = static_cast<std::size_t>(arch.input_dim) - kernel + 1;
        long double logit = m.biases[f_count];
        for (std::size_t f = 0; f < f_count; ++f) {
            for (std::size_t p = 0; p < positions; ++p) {
                long double activation = m.biases[f];
                for (std::size_t k = 0; k < kernel; ++k) {
                    activation += static_cast<long double>(m.weights[f * kernel + k]) * current[p + k];
                }
                if (activation < 0) activation = 0;
                logit += static_cast<long double>(m.weights[f_count * kernel + f * positions + p]) * activation;
            }
        }
        return static_cast<double>(logit);
    }
    // RNN
    const auto units = static_cast<std::size_t>(arch.units);
    const auto steps = static_cast<std::size_t>(arch.timesteps);
    const auto width = static_cast<std::size_t>(arch.rnn_step_width());
    const std::size_t whh_off = units * width;
    const std::size_t out_off = whh_off + units * units;
    std::vector<long double> hidden(units, 0.0L);
    for (std::size_t t = 0; t < steps; ++t) {
        std::vector<long double> next(units, 0.0L);
        for (std::size_t u = 0; u < units; ++u) {
            long double acc = m.biases[u];
            for (std::size_t j = 0; j < width; ++j) {
                const std::size_t idx = t * width + j;
                if (idx < static_cast<std::size_t>(arch.input_dim)) {
                    acc += static_cast<long double>(m.weights[u * width + j]) * current[idx];
                }
            }
            for (std::size_t v = 0; v < units; ++v) {
                acc += static_cast<long double>(m.weights[whh_off + u * units + v]) * hidden[v];
            }
            next[u] = acc < 0 ? 0.0L : acc;
        }
        hidden = std::move(next);
    }
    long double logit = m.biases[units];
    for (std::size_t u = 0; u < units; ++u) {
        logit += static_cast<long double>(m.weights[out_off + u]) * hidden[u];
    }
    return static_cast<double>(logit);
}

// Symmetric eigensolver independent of the library's Jacobi: Householder
// tridiagonalization followed by QL with implicit shifts (tred2/tqli without
// the eigenvector updates). Returns eigenvalues in descending order.
inline void householder_ql_eigen(std::vector<std::vector<double>> a, std::vector<double>& eigenvalues) {
    const int n = static_cast<int>(a.size());
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    const auto at = [&](int i, int j) -> double& {
        return a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    };

    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0;
        double scale = 0.0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scale += std::abs(at(i, k));
            if (scale == 0.0) {
                e[static_cast<std::size_t>(i)] = at(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    at(i, k) /= scale;
                    h += at(i, k) * at(i, k);
                }
                double f = at(i, l);
                double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
                e[static_cast<std::size_t>(i)] = scale * g;
                h -= f * g;
                at(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += at(j, k) * at(i, k);
                    for (int k = j + 1; k <= l; ++k) g += at(k, j) * at(i, k);
                    e[static_cast<std::size_t>(j)] = g / h;
                    f += e[static_cast<std::size_t>(j)] * at(i, j);
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = at(i, j);
                    const double ej = e[static_cast<std::size_t>(j)] - hh * f;
                    e[static_cast<std::size_t>(j)] = ej;
                    for (int k = 0; k <= j; ++k) {
                        at(j, k) -= f * e[static_cast<std::size_t>(k)] + ej * at(i, k);
                    }
                }
            }
        } else {
            e[static_cast<std::size_t>(i)] = at(i, l);
        }
        d[static_cast<std::size_t>(i)] = h;
    }
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = at(i, i);

    for (int i = 1; i < n; ++i) e[static_cast<std::size_t>(i - 1)] = e[static_cast<std::size_t>(i)];
    e[static_cast<std::size_t>(n - 1)] = 0.0;

    for (int l = 0; l < n; ++l) {
        int iterations = 0;
        int m = l;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[static_cast<std::size_t>(m)]) +
                                  std::abs(d[static_cast<std::size_t>(m + 1)]);
                if (std::abs(e[static_cast<std::size_t>(m)]) <= 1e-15 * dd) break;
            }
            if (m != l) {
                if (iterations++ == 60) break;
                double g = (d[static_cast<std::size_t>(l + 1)] - d[static_cast<std::size_t>(l)]) /
                           (2.0 * e[static_cast<std::size_t>(l)]);
                double r = std::hypot(g, 1.0);
                const double sign_r = g >= 0.0 ? std::abs(r) : -std::abs(r);
                g = d[static_cast<std::size_t>(m)] - d[static_cast<std::size_t>(l)] +
                    e[static_cast<std::size_t>(l)] / (g + sign_r);
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                int i = m - 1;
                bool underflow = false;
                for (; i >= l; --i) {
                    double f = s * e[static_cast<std::size_t>(i)];
                    const double b = c * e[static_cast<std::size_t>(i)];
                    r = std::hypot(f, g);
                    e[static_cast<std::size_t>(i + 1)] = r;
                    if (r == 0.0) {
                        d[static_cast<std::size_t>(i + 1)] -= p;
                        e[static_cast<std::size_t>(m)] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[static_cast<std::size_t>(i + 1)] - p;
                    r = (d[static_cast<std::size_t>(i)] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[static_cast<std::size_t>(i + 1)] = g + p;
                    g = c * r - b;
                }
                if (underflow && i >= l) continue;
                d[static_cast<std::size_t>(l)] -= p;
                e[static_cast<std::size_t>(l)] = g;
                e[static_cast<std::size_t>(m)] = 0.0;
            }
        } while (m != l);
    }
    std::sort(d.rbegin(), d.rend());
    eigenvalues = std::move(d);
}

}  // namespace poimsim::test_oracle
