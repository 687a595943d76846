#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "dnscov/errors.hpp"
#include "dnscov/features.hpp"
#include "dnscov/rng.hpp"
#include "dnscov/time.hpp"

namespace dnscov {

/// RBF kernel, exp(-gamma * ||x - y||^2). Result in (0, 1] for gamma > 0.
inline double rbf_kernel(const FeatureVector& x, const FeatureVector& y, double gamma) {
    return std::exp(-gamma * squared_distance(x, y));
}

/// Numeric cutoff below which a dual coefficient does not make a point a
/// support vector.
constexpr double kSupportVectorEpsilon = 1e-8;

/// Trained one-class SVM. Only support vectors (alpha > epsilon) are
/// stored; the dual constraints sum(alpha) = 1 and 0 <= alpha <= 1/(nu*l)
/// hold over them. Negative decision values mean anomalous.
struct OcsvmModel {
    std::vector<FeatureVector> support_vectors;
    std::vector<double> alphas;
    double rho = 0.0;
    double gamma = 0.0;
    double nu = 0.0;
    TimestampMs trained_at = 0;
    std::uint64_t training_size = 0;

    double upper_bound() const { return 1.0 / (nu * static_cast<double>(training_size)); }
};

inline double decision(const OcsvmModel& model, const FeatureVector& x) {
    double sum = 0.0;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
        sum += model.alphas[i] * rbf_kernel(model.support_vectors[i], x, model.gamma);
    return sum - model.rho;
}

struct TrainOptions {
    double tol = 1e-6;
    std::uint64_t max_iter = 100000;
    TimestampMs trained_at = 0;
};

namespace detail {

/// Kernel matrix access: fully cached for small problems, recomputed by row
/// above the cache limit (the gradient updates only ever need two rows).
class KernelView {
public:
    static constexpr std::size_t kFullCacheLimit = 2048;

    KernelView(const std::vector<FeatureVector>& pts, double gamma)
        : pts_(pts), gamma_(gamma), n_(pts.size()) {
        if (n_ <= kFullCacheLimit) {
            cache_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i) {
                cache_[i * n_ + i] = 1.0;
                for (std::size_t j = i + 1; j < n_; ++j) {
                    const double k = rbf_kernel(pts_[i], pts_[j], gamma_);
                    cache_[i * n_ + j] = k;
                    cache_[j * n_ + i] = k;
                }
            }
        }
    }

    bool cached() const { return !cache_.empty(); }

    double at(std::size_t i, std::size_t j) const {
        if (cached()) return cache_[i * n_ + j];
        return rbf_kernel(pts_[i], pts_[j], gamma_);
    }

    /// Writes row i into out (size n).
    void row(std::size_t i, std::vector<double>& out) const {
        out.resize(n_);
        if (cached()) {
            std::copy(cache_.begin() + i * n_, cache_.begin() + (i + 1) * n_, out.begin());
        } else {
            for (std::size_t j = 0; j < n_; ++j) out[j] = rbf_kernel(pts_[i], pts_[j], gamma_);
        }
    }

private:
    const std::vector<FeatureVector>& pts_;
    double gamma_;
    std::size_t n_;
    std::vector<double> cache_;
};

inline bool all_points_identical(const std::vector<FeatureVector>& data) {
    for (std::size_t i = 1; i < data.size(); ++i)
        if (squared_distance(data[0], data[i]) > 0.0) return false;
    return true;
}

}  // namespace detail

/// Solves the nu-OCSVM dual
///   minimize 1/2 sum_ij alpha_i alpha_j K(x_i, x_j)
///   s.t.     0 <= alpha_i <= 1/(nu*l),  sum_i alpha_i = 1
/// by sequential two-coordinate descent on the maximal violating pair,
/// which preserves the equality constraint at every step. rho is the
/// average gradient over interior support vectors.
inline OcsvmModel train(const std::vector<FeatureVector>& data, double gamma, double nu,
                        const TrainOptions& opts = {}) {
    const std::size_t n = data.size();
    if (n < 10) throw std::invalid_argument("training requires at least 10 points");
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("nu must be in (0, 1]");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (detail::all_points_identical(data)) throw DegenerateData();

    const double c_bound = 1.0 / (nu * static_cast<double>(n));
    detail::KernelView kernel(data, gamma);

    std::vector<double> alpha(n, 1.0 / static_cast<double>(n));
    std::vector<double> grad(n, 0.0);  // grad_i = sum_j alpha_j K_ij
    {
        std::vector<double> row;
        for (std::size_t i = 0; i < n; ++i) {
            kernel.row(i, row);
            double g = 0.0;
            for (std::size_t j = 0; j < n; ++j) g += alpha[j] * row[j];
            grad[i] = g;
        }
    }

    const double upper_snap = c_bound * (1.0 - 1e-12);
    std::vector<double> row_i, row_j;
    bool converged = false;
    for (std::uint64_t iter = 0; iter < opts.max_iter; ++iter) {
        // maximal violating pair: most decreasable vs most increasable
        std::size_t best_up = n, best_down = n;
        double g_min = std::numeric_limits<double>::infinity();
        double g_max = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            if (alpha[k] < upper_snap && grad[k] < g_min) {
                g_min = grad[k];
                best_up = k;
            }
            if (alpha[k] > 0.0 && grad[k] > g_max) {
                g_max = grad[k];
                best_down = k;
            }
        }
        if (best_up == n || best_down == n || g_max - g_min < opts.tol) {
            converged = true;
            break;
        }

        const std::size_t i = best_up, j = best_down;
        const double eta = kernel.at(i, i) + kernel.at(j, j) - 2.0 * kernel.at(i, j);
        const double max_step = std::min(c_bound - alpha[i], alpha[j]);
        double step = eta > 1e-15 ? (g_max - g_min) / eta : max_step;
        step = std::min(step, max_step);

        alpha[i] = std::min(alpha[i] + step, c_bound);
        alpha[j] = std::max(alpha[j] - step, 0.0);

        kernel.row(i, row_i);
        kernel.row(j, row_j);
        for (std::size_t k = 0; k < n; ++k) grad[k] += step * (row_i[k] - row_j[k]);
    }
    if (!converged) throw NoConvergence(opts.max_iter);

    // Fold sub-epsilon stragglers into a coefficient with headroom so the
    // stored support set is exactly { alpha > epsilon } and the mass stays 1.
    for (std::size_t k = 0; k < n; ++k) {
        if (alpha[k] > 0.0 && alpha[k] <= kSupportVectorEpsilon) {
            for (std::size_t r = 0; r < n; ++r) {
                if (r != k && alpha[r] > kSupportVectorEpsilon &&
                    c_bound - alpha[r] >= alpha[k]) {
                    alpha[r] += alpha[k];
                    alpha[k] = 0.0;
                    break;
                }
            }
        }
    }

    double rho = 0.0;
    std::size_t interior = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (alpha[k] > kSupportVectorEpsilon && alpha[k] < upper_snap) {
            rho += grad[k];
            ++interior;
        }
    }
    if (interior > 0) {
        rho /= static_cast<double>(interior);
    } else {
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            if (alpha[k] >= upper_snap) lo = std::max(lo, grad[k]);
            else if (alpha[k] <= kSupportVectorEpsilon) hi = std::min(hi, grad[k]);
        }
        if (std::isinf(lo)) rho = hi;
        else if (std::isinf(hi)) rho = lo;
        else rho = 0.5 * (lo + hi);
    }

    OcsvmModel model;
    model.gamma = gamma;
    model.nu = nu;
    model.rho = rho;
    model.trained_at = opts.trained_at;
    model.training_size = n;
    for (std::size_t k = 0; k < n; ++k) {
        if (alpha[k] > kSupportVectorEpsilon) {
            model.support_vectors.push_back(data[k]);
            model.alphas.push_back(alpha[k]);
        }
    }
    return model;
}

/// Hyper-parameter pair ordered by (gamma, nu); the grid default spans
/// 10^-3 .. 10^2 in decades on both axes.
using HyperPair = std::pair<double, double>;

inline std::vector<HyperPair> default_grid() {
    const double decades[] = {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
    std::vector<HyperPair> grid;
    for (double g : decades)
        for (double v : decades) grid.push_back({g, v});
    return grid;
}

struct GridSearchResult {
    double best_gamma = 0.0;
    double best_nu = 0.0;
    std::map<HyperPair, double> validation_scores;
    std::uint64_t split_seed = 0;
};

struct GridSearchOutcome {
    GridSearchResult result;
    OcsvmModel model;  ///< retrained on the full data set with the best pair
};

namespace detail {

/// Validation score for one cell: fraction of validation points accepted,
/// penalized by the gap between nu and the realized training reject rate.
/// Keeps nu meaningful where the raw accept rate alone would collapse to
/// the smallest nu.
inline double cell_score(const OcsvmModel& model, const std::vector<FeatureVector>& train_split,
                         const std::vector<FeatureVector>& val_split, double nu) {
    std::size_t accepted = 0;
    for (const auto& x : val_split)
        if (decision(model, x) >= 0.0) ++accepted;
    std::size_t rejected_train = 0;
    for (const auto& x : train_split)
        if (decision(model, x) < 0.0) ++rejected_train;
    const double accept_rate = static_cast<double>(accepted) / static_cast<double>(val_split.size());
    const double train_reject_rate =
        static_cast<double>(rejected_train) / static_cast<double>(train_split.size());
    return accept_rate - std::abs(nu - train_reject_rate);
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t workers =
        std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace detail

/// Seeded-shuffle 75/25 split, one model per grid cell scored on the
/// validation part, then a final model retrained on all data with the best
/// pair. Cells that fail to train (including infeasible nu > 1) score
/// -infinity. Ties prefer smaller gamma, then smaller nu.
inline GridSearchOutcome grid_search(const std::vector<FeatureVector>& data,
                                     std::vector<HyperPair> grid = default_grid(),
                                     double split_frac = 0.75, std::uint64_t seed = 0,
                                     const TrainOptions& opts = {}) {
    if (grid.empty()) throw std::invalid_argument("grid must not be empty");
    const std::size_t n = data.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i)
        std::swap(idx[i - 1], idx[rng.below(i)]);

    std::size_t train_count = static_cast<std::size_t>(split_frac * static_cast<double>(n));
    train_count = std::clamp<std::size_t>(train_count, 1, n - 1);
    std::vector<FeatureVector> train_split, val_split;
    train_split.reserve(train_count);
    val_split.reserve(n - train_count);
    for (std::size_t i = 0; i < n; ++i)
        (i < train_count ? train_split : val_split).push_back(data[idx[i]]);

    std::sort(grid.begin(), grid.end());
    std::vector<double> scores(grid.size(), -std::numeric_limits<double>::infinity());
    detail::parallel_for(grid.size(), [&](std::size_t c) {
        const auto [gamma, nu] = grid[c];
        try {
            OcsvmModel m = train(train_split, gamma, nu, opts);
            scores[c] = detail::cell_score(m, train_split, val_split, nu);
        } catch (const Error&) {
        } catch (const std::invalid_argument&) {
        }
    });

    GridSearchOutcome out;
    out.result.split_seed = seed;
    std::size_t best = grid.size();
    for (std::size_t c = 0; c < grid.size(); ++c) {
        out.result.validation_scores[grid[c]] = scores[c];
        if (best == grid.size() || scores[c] > scores[best]) best = c;
    }
    if (std::isinf(scores[best]))
        throw Error("every grid cell failed to train");
    out.result.best_gamma = grid[best].first;
    out.result.best_nu = grid[best].second;
    out.model = train(data, out.result.best_gamma, out.result.best_nu, opts);
    return out;
}

}  // namespace dnscov
