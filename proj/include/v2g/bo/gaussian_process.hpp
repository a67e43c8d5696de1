#ifndef V2G_BO_GAUSSIAN_PROCESS_HPP
#define V2G_BO_GAUSSIAN_PROCESS_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "v2g/bo/nelder_mead.hpp"

namespace v2g::bo {

/// Matern 5/2 correlation at scaled distance r.
template <typename Scalar>
Scalar matern52(Scalar r) {
    const Scalar s5r = std::sqrt(Scalar(5)) * r;
    return (Scalar(1) + s5r + s5r * s5r / Scalar(3)) * std::exp(-s5r);
}

struct GpOptions {
    /// Observation noise variance in standardized units; also the minimum jitter.
    double noise_variance = 1e-8;
    double length_scale_min = 1e-2;
    double length_scale_max = 1e2;
    double signal_variance_min = 1e-2;
    double signal_variance_max = 1e2;
    /// Log-normal prior on each length scale (median, log-space sd); sd 0 gives plain
    /// maximum likelihood. Keeps small designs from switching dimensions off.
    double length_scale_prior_median = 0.5;
    double length_scale_prior_sd = 1.0;
    int restarts = 8;
    NelderMeadOptions search{300, 1.0, 1e-9, 1e-5};
    /// Subtract the mean and divide by the standard deviation before fitting.
    bool standardize = true;
};

template <typename Scalar>
struct GpHyperparameters {
    Scalar signal_variance = 1;
    /// One entry per length-scale group.
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> length_scales;
};

template <typename Scalar>
struct GpPrediction {
    Scalar mean = 0;
    Scalar variance = 0;
    Scalar stddev() const { return std::sqrt(variance); }
};

/// Zero-mean GP regression with a Matern 5/2 ARD kernel. Input dimensions are mapped
/// onto length-scale groups, so a one-hot block can share a single length scale.
template <typename Scalar>
class GaussianProcess {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    GaussianProcess() = default;
    /// `groups[d]` is the length-scale group of input dimension d (0-based, dense).
    explicit GaussianProcess(std::vector<int> groups, GpOptions options = {})
        : groups_(std::move(groups)), options_(options) {
        int g = 0;
        for (int v : groups_) g = std::max(g, v + 1);
        group_count_ = g;
    }

    int input_dim() const { return static_cast<int>(groups_.size()); }
    int group_count() const { return group_count_; }
    Eigen::Index size() const { return x_.rows(); }
    const GpHyperparameters<Scalar>& hyperparameters() const { return hyper_; }
    const GpOptions& options() const { return options_; }
    Scalar target_mean() const { return y_mean_; }
    Scalar target_scale() const { return y_scale_; }
    /// Jitter that was finally added to the diagonal.
    Scalar jitter() const { return jitter_; }

    /// Fits hyperparameters by multi-start maximization of the log marginal likelihood
    /// (plus the length-scale prior),
    /// then conditions on the data. Rows of X are observations.
    void fit(const Matrix& X, const Vector& y) {
        set_data(X, y);
        const int p = group_count_ + 1;
        const auto lo = Vector::Constant(p, Scalar(std::log(options_.length_scale_min))).eval();
        const auto hi = Vector::Constant(p, Scalar(std::log(options_.length_scale_max))).eval();
        Vector lo_b = lo, hi_b = hi;
        lo_b[0] = Scalar(std::log(options_.signal_variance_min));
        hi_b[0] = Scalar(std::log(options_.signal_variance_max));
        const auto objective = [&](const Vector& theta) {
            const Vector t = theta.cwiseMax(lo_b).cwiseMin(hi_b);
            // Quadratic wall keeps the simplex near the box without flat regions.
            const Scalar wall = (theta - t).squaredNorm();
            const Scalar lml = log_marginal_likelihood(unpack(t));
            Scalar prior = 0;
            if (options_.length_scale_prior_sd > 0) {
                const Scalar m = Scalar(std::log(options_.length_scale_prior_median));
                prior = (t.tail(p - 1).array() - m).square().sum() / Scalar(2 * options_.length_scale_prior_sd * options_.length_scale_prior_sd);
            }
            return std::isfinite(lml) ? -lml + prior + wall : std::numeric_limits<Scalar>::max() / 4;
        };
        Scalar best_value = std::numeric_limits<Scalar>::infinity();
        Vector best;
        for (int s = 0; s < options_.restarts; ++s) {
            const double frac = options_.restarts > 1 ? static_cast<double>(s) / (options_.restarts - 1) : 0.5;
            Vector theta(p);
            theta[0] = Scalar(0);
            theta.tail(p - 1).setConstant(Scalar(std::log(0.05) + frac * (std::log(5.0) - std::log(0.05))));
            Scalar value = 0;
            Vector found = nelder_mead<Scalar>(objective, theta, options_.search, &value);
            if (value < best_value) {
                best_value = value;
                best = found.cwiseMax(lo_b).cwiseMin(hi_b);
            }
        }
        condition_standardized(unpack(best));
    }

    /// Conditions on data with fixed hyperparameters.
    void condition(const Matrix& X, const Vector& y, const GpHyperparameters<Scalar>& hyper) {
        set_data(X, y);
        condition_standardized(hyper);
    }

    /// Posterior in the caller's units.
    GpPrediction<Scalar> predict(const Vector& x) const {
        const auto s = predict_standardized(x);
        return {y_mean_ + y_scale_ * s.mean, y_scale_ * y_scale_ * s.variance};
    }

    /// Posterior in standardized target units.
    GpPrediction<Scalar> predict_standardized(const Vector& x) const {
        GpPrediction<Scalar> out;
        out.variance = hyper_.signal_variance;
        if (size() == 0) return out;
        const Vector scaled = x.cwiseProduct(inv_ls_);
        Vector k(size());
        for (Eigen::Index i = 0; i < size(); ++i) k[i] = hyper_.signal_variance * matern52(std::sqrt((xs_.row(i).transpose() - scaled).squaredNorm()));
        out.mean = k.dot(alpha_);
        const Vector v = chol_.matrixL().solve(k);
        out.variance = std::max(Scalar(0), hyper_.signal_variance - v.squaredNorm());
        return out;
    }

    /// Log marginal likelihood of the stored (standardized) data under `hyper`.
    Scalar log_marginal_likelihood(const GpHyperparameters<Scalar>& hyper) const {
        Matrix K = covariance(hyper);
        Scalar jitter = 0;
        Eigen::LLT<Matrix> llt;
        if (!factorize(K, llt, jitter)) return -std::numeric_limits<Scalar>::infinity();
        const Vector a = llt.solve(ys_);
        const Scalar logdet = Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
        return Scalar(-0.5) * ys_.dot(a) - Scalar(0.5) * logdet - Scalar(0.5) * Scalar(size()) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
    }

private:
    void set_data(const Matrix& X, const Vector& y) {
        if (X.rows() < 1) throw std::invalid_argument("GP needs at least one observation");
        if (X.cols() != input_dim() || y.size() != X.rows()) throw std::invalid_argument("GP data dimension mismatch");
        if (!y.allFinite() || !X.allFinite()) throw std::invalid_argument("GP data must be finite");
        x_ = X;
        y_mean_ = 0;
        y_scale_ = 1;
        if (options_.standardize) {
            y_mean_ = y.mean();
            if (y.size() > 1) {
                const Scalar sd = std::sqrt((y.array() - y_mean_).square().sum() / Scalar(y.size() - 1));
                if (sd > Scalar(0)) y_scale_ = sd;
            }
        }
        ys_ = (y.array() - y_mean_).matrix() / y_scale_;
    }

    GpHyperparameters<Scalar> unpack(const Vector& theta) const {
        GpHyperparameters<Scalar> h;
        h.signal_variance = std::exp(theta[0]);
        h.length_scales = theta.tail(theta.size() - 1).array().exp().matrix();
        return h;
    }

    Vector inverse_scales(const GpHyperparameters<Scalar>& h) const {
        Vector inv(input_dim());
        for (int d = 0; d < input_dim(); ++d) inv[d] = Scalar(1) / h.length_scales[groups_[static_cast<std::size_t>(d)]];
        return inv;
    }

    Matrix covariance(const GpHyperparameters<Scalar>& h) const {
        const Matrix xs = x_ * inverse_scales(h).asDiagonal();
        const Eigen::Index n = size();
        Matrix K(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            K(i, i) = h.signal_variance;
            for (Eigen::Index j = 0; j < i; ++j) K(i, j) = K(j, i) = h.signal_variance * matern52((xs.row(i) - xs.row(j)).norm());
        }
        return K;
    }

    // Adds the noise floor and escalates jitter until the Cholesky factorization succeeds.
    bool factorize(Matrix& K, Eigen::LLT<Matrix>& llt, Scalar& jitter) const {
        const Scalar base = Scalar(options_.noise_variance);
        jitter = base;
        K.diagonal().array() += base;
        for (int attempt = 0; attempt < 12; ++attempt) {
            llt.compute(K);
            if (llt.info() == Eigen::Success) return true;
            const Scalar extra = jitter * Scalar(9);
            K.diagonal().array() += extra;
            jitter += extra;
        }
        return false;
    }

    void condition_standardized(const GpHyperparameters<Scalar>& hyper) {
        hyper_ = hyper;
        inv_ls_ = inverse_scales(hyper);
        xs_ = x_ * inv_ls_.asDiagonal();
        Matrix K = covariance(hyper);
        if (!factorize(K, chol_, jitter_)) throw std::runtime_error("GP covariance is not positive definite after jitter escalation");
        alpha_ = chol_.solve(ys_);
    }

    std::vector<int> groups_;
    int group_count_ = 0;
    GpOptions options_;
    GpHyperparameters<Scalar> hyper_;
    Matrix x_, xs_;
    Vector ys_, alpha_, inv_ls_;
    Scalar y_mean_ = 0, y_scale_ = 1, jitter_ = 0;
    Eigen::LLT<Matrix> chol_;
};

/// Standard normal density and distribution.
template <typename Scalar>
Scalar normal_pdf(Scalar z) {
    return std::exp(Scalar(-0.5) * z * z) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

template <typename Scalar>
Scalar normal_cdf(Scalar z) {
    return Scalar(0.5) * std::erfc(-z / std::sqrt(Scalar(2)));
}

/// Expected improvement below `incumbent` of N(mean, stddev^2).
template <typename Scalar>
Scalar expected_improvement(Scalar mean, Scalar stddev, Scalar incumbent) {
    const Scalar gain = incumbent - mean;
    if (!(stddev > Scalar(0))) return std::max(gain, Scalar(0));
    const Scalar z = gain / stddev;
    if (z < Scalar(-6)) {
        // z*Phi(z) + phi(z) cancels badly here; use its asymptotic series.
        const Scalar iz2 = Scalar(1) / (z * z);
        return stddev * normal_pdf(z) * iz2 * (Scalar(1) - Scalar(3) * iz2 + Scalar(15) * iz2 * iz2);
    }
    return std::max(Scalar(0), stddev * (z * normal_cdf(z) + normal_pdf(z)));
}

}  // namespace v2g::bo

#endif  // V2G_BO_GAUSSIAN_PROCESS_HPP
