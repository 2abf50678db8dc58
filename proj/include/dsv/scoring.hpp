#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dsv/embedding_set.hpp"
#include "dsv/errors.hpp"
#include "dsv/geometry.hpp"
#include "dsv/rng.hpp"

namespace dsv {

namespace detail {

// Dense lower Cholesky factorization; throws NumericError when the matrix is
// not positive definite. Dimensions here are small (tens), so no pivoting.
class Cholesky {
public:
    Cholesky() = default;

    Cholesky(const std::vector<double>& matrix, std::size_t dim) : dim_(dim), l_(matrix) {
        for (std::size_t j = 0; j < dim_; ++j) {
            double d = l_[j * dim_ + j];
            for (std::size_t k = 0; k < j; ++k) d -= l_[j * dim_ + k] * l_[j * dim_ + k];
            if (d <= 0.0 || !std::isfinite(d))
                throw NumericError("singular regularized covariance");
            const double diag = std::sqrt(d);
            l_[j * dim_ + j] = diag;
            for (std::size_t i = j + 1; i < dim_; ++i) {
                double s = l_[i * dim_ + j];
                for (std::size_t k = 0; k < j; ++k) s -= l_[i * dim_ + k] * l_[j * dim_ + k];
                l_[i * dim_ + j] = s / diag;
            }
        }
    }

    // Squared Mahalanobis form: r^T (L L^T)^{-1} r = ||L^{-1} r||^2.
    double quadratic(std::span<const double> r) const {
        std::vector<double> y(dim_);
        double out = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            double s = r[i];
            for (std::size_t k = 0; k < i; ++k) s -= l_[i * dim_ + k] * y[k];
            y[i] = s / l_[i * dim_ + i];
            out += y[i] * y[i];
        }
        return out;
    }

    double log_det() const {
        double s = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) s += std::log(l_[i * dim_ + i]);
        return 2.0 * s;
    }

private:
    std::size_t dim_ = 0;
    std::vector<double> l_;
};

inline std::vector<double> covariance(const EmbeddingSet& set, std::span<const double> mean) {
    const std::size_t d = set.dim();
    std::vector<double> cov(d * d, 0.0);
    for (std::size_t r = 0; r < set.size(); ++r) {
        auto row = set.row(r);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                cov[i * d + j] += (row[i] - mean[i]) * (row[j] - mean[j]);
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            cov[i * d + j] /= static_cast<double>(set.size());
            cov[j * d + i] = cov[i * d + j];
        }
    return cov;
}

inline void regularize(std::vector<double>& cov, std::size_t d) {
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += cov[i * d + i];
    const double lambda = 1e-6 * trace / static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i) cov[i * d + i] += lambda;
}

} // namespace detail

/// Anomaly scorer from a Gaussian fit of the training embeddings. With one
/// component (the default) the score is the squared Mahalanobis distance
/// under covariance Σ + λI, λ = 1e-6·trace(Σ)/dim. With several components
/// an EM-fitted mixture is used and the score is the negative log-likelihood.
/// Higher scores mean more anomalous either way.
class GaussianScorer {
public:
    explicit GaussianScorer(const EmbeddingSet& trn, std::size_t components = 1,
                            std::uint64_t seed = 0) {
        if (trn.size() < 2) throw ValidationError("GaussianScorer: needs at least 2 train points");
        if (components == 0) throw ValidationError("GaussianScorer: components must be >= 1");
        dim_ = trn.dim();
        if (components == 1) {
            fit_single(trn);
        } else {
            if (trn.size() < 2 * components)
                throw ValidationError("GaussianScorer: too few train points for mixture");
            fit_mixture(trn, components, seed);
        }
    }

    double score(std::span<const double> z) const {
        if (z.size() != dim_) throw ValidationError("GaussianScorer: dimension mismatch");
        if (components_.size() == 1 && mixture_ == false) {
            std::vector<double> r(dim_);
            for (std::size_t i = 0; i < dim_; ++i) r[i] = z[i] - components_[0].mean[i];
            return components_[0].chol.quadratic(r);
        }
        // negative log of the mixture density
        double best = -std::numeric_limits<double>::infinity();
        std::vector<double> logs(components_.size());
        std::vector<double> r(dim_);
        for (std::size_t c = 0; c < components_.size(); ++c) {
            for (std::size_t i = 0; i < dim_; ++i) r[i] = z[i] - components_[c].mean[i];
            logs[c] = components_[c].log_weight - 0.5 * components_[c].chol.quadratic(r) -
                      0.5 * components_[c].chol.log_det() -
                      0.5 * static_cast<double>(dim_) * std::log(2.0 * 3.14159265358979323846);
            best = std::max(best, logs[c]);
        }
        double sum = 0.0;
        for (double l : logs) sum += std::exp(l - best);
        return -(best + std::log(sum));
    }

    std::vector<double> score_all(const EmbeddingSet& set) const {
        std::vector<double> out(set.size());
        for (std::size_t i = 0; i < set.size(); ++i) out[i] = score(set.row(i));
        return out;
    }

private:
    struct Component {
        std::vector<double> mean;
        detail::Cholesky chol;
        double log_weight = 0.0;
    };

    void fit_single(const EmbeddingSet& trn) {
        Component c;
        c.mean = mean_vector(trn);
        auto cov = detail::covariance(trn, c.mean);
        detail::regularize(cov, dim_);
        c.chol = detail::Cholesky(cov, dim_);
        components_.push_back(std::move(c));
        mixture_ = false;
    }

    void fit_mixture(const EmbeddingSet& trn, std::size_t k, std::uint64_t seed) {
        mixture_ = true;
        const std::size_t n = trn.size();
        Rng rng(seed);
        // means start at k distinct training points, shared global covariance
        std::vector<std::size_t> picks;
        while (picks.size() < k) {
            const std::size_t p = rng.index(n);
            bool dup = false;
            for (std::size_t q : picks) dup |= (q == p);
            if (!dup) picks.push_back(p);
        }
        const std::vector<double> global_mean = mean_vector(trn);
        auto global_cov = detail::covariance(trn, global_mean);
        detail::regularize(global_cov, dim_);
        components_.resize(k);
        for (std::size_t c = 0; c < k; ++c) {
            components_[c].mean.assign(trn.row(picks[c]).begin(), trn.row(picks[c]).end());
            components_[c].chol = detail::Cholesky(global_cov, dim_);
            components_[c].log_weight = -std::log(static_cast<double>(k));
        }
        std::vector<double> resp(n * k);
        for (int iter = 0; iter < 50; ++iter) {
            // E step
            for (std::size_t i = 0; i < n; ++i) {
                auto z = trn.row(i);
                double best = -std::numeric_limits<double>::infinity();
                std::vector<double> logs(k);
                std::vector<double> r(dim_);
                for (std::size_t c = 0; c < k; ++c) {
                    for (std::size_t d = 0; d < dim_; ++d) r[d] = z[d] - components_[c].mean[d];
                    logs[c] = components_[c].log_weight -
                              0.5 * components_[c].chol.quadratic(r) -
                              0.5 * components_[c].chol.log_det();
                    best = std::max(best, logs[c]);
                }
                double sum = 0.0;
                for (std::size_t c = 0; c < k; ++c) sum += std::exp(logs[c] - best);
                for (std::size_t c = 0; c < k; ++c)
                    resp[i * k + c] = std::exp(logs[c] - best) / sum;
            }
            // M step
            for (std::size_t c = 0; c < k; ++c) {
                double wc = 0.0;
                std::vector<double> mean(dim_, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    wc += resp[i * k + c];
                    auto z = trn.row(i);
                    for (std::size_t d = 0; d < dim_; ++d) mean[d] += resp[i * k + c] * z[d];
                }
                if (wc < 1e-12) continue; // dead component keeps old parameters
                for (double& m : mean) m /= wc;
                std::vector<double> cov(dim_ * dim_, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    auto z = trn.row(i);
                    const double w = resp[i * k + c];
                    for (std::size_t a = 0; a < dim_; ++a)
                        for (std::size_t b = 0; b <= a; ++b)
                            cov[a * dim_ + b] += w * (z[a] - mean[a]) * (z[b] - mean[b]);
                }
                for (std::size_t a = 0; a < dim_; ++a)
                    for (std::size_t b = 0; b <= a; ++b) {
                        cov[a * dim_ + b] /= wc;
                        cov[b * dim_ + a] = cov[a * dim_ + b];
                    }
                detail::regularize(cov, dim_);
                components_[c].mean = std::move(mean);
                components_[c].chol = detail::Cholesky(cov, dim_);
                components_[c].log_weight = std::log(wc / static_cast<double>(n));
            }
        }
    }

    std::size_t dim_ = 0;
    bool mixture_ = false;
    std::vector<Component> components_;
};

/// Squared Mahalanobis anomaly score of z against a single Gaussian fit.
inline double gaussian_score(const EmbeddingSet& trn, std::span<const double> z) {
    return GaussianScorer(trn).score(z);
}

} // namespace dsv
