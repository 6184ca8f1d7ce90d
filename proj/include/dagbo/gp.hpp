#ifndef DAGBO_GP_HPP
#define DAGBO_GP_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace dagbo::gp {

/// Matérn-5/2 ARD kernel hyperparameters. Inputs are assumed to live in the
/// unit hypercube.
struct KernelParams {
    Eigen::VectorXd lengthscales;
    double signal_variance = 1.0;
};

/// Matérn-5/2 covariance between the rows of A and B.
Eigen::MatrixXd matern52(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const KernelParams& params);

/// Cholesky of A; if that fails, retries with relative diagonal jitter
/// 1e-8, 1e-7, ..., 1e-4. Throws IllConditionedKernelError when every level fails.
Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& A, double* jitter_used = nullptr);

struct HyperBounds {
    double lengthscale_min = 0.005;
    double lengthscale_max = 10.0;
    double signal_min = 0.05;
    double signal_max = 20.0;
    double noise_min = 1e-6;
    double noise_max = 1.0;
    double mean_min = -3.0;
    double mean_max = 3.0;
};

struct FitConfig {
    /// Random restarts in addition to the default starting point.
    int restarts = 5;
    int max_iterations = 100;
    std::uint64_t seed = 0;
    /// When false the initial hyperparameters are used as given.
    bool optimize = true;
    HyperBounds bounds{};
    /// Starting point; defaults are filled in from the data dimension.
    std::optional<KernelParams> initial_kernel;
    double initial_noise = 1e-2;
    double initial_mean = 0.0;
};

struct Prediction {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

/**
 * Exact GP regression with a constant mean on standardized targets.
 *
 * Hyperparameter vector layout used by the likelihood routines:
 * [log lengthscale_0..D-1, log signal variance, log noise variance, mean].
 */
class GpRegressor {
public:
    /// Fits hyperparameters by maximizing the log marginal likelihood.
    /// Throws EmptyDataError for N = 0.
    static GpRegressor fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const FitConfig& config = {});

    /// A data-free GP: predictions are the prior N(target_mean, target_scale^2 * signal).
    static GpRegressor prior(int dim, double target_mean, double target_scale,
                             const FitConfig& config = {});

    /// Degenerate regressor with constant mean and tiny spread in standardized
    /// units: N(center, (scale * sigma)^2) everywhere.
    static GpRegressor narrow(int dim, double center, double scale, double sigma);

    int dim() const { return dim_; }
    int num_train() const { return static_cast<int>(X_.rows()); }
    bool is_prior() const { return X_.rows() == 0; }

    const KernelParams& kernel() const { return kernel_; }
    double noise_variance() const { return noise_; }
    double mean_constant() const { return mean_; }
    double target_mean() const { return y_mean_; }
    double target_scale() const { return y_scale_; }

    /// Predictive mean/variance in original target units.
    Prediction predict(const Eigen::MatrixXd& Xq, bool include_noise = false) const;

    /// Joint predictive covariance in original units.
    Eigen::MatrixXd predictive_covariance(const Eigen::MatrixXd& Xq, bool include_noise) const;

    /// S x M joint samples from the predictive distribution.
    Eigen::MatrixXd sample(const Eigen::MatrixXd& Xq, int num_samples, std::uint64_t seed,
                           bool include_noise) const;

    /// Log marginal likelihood of standardized targets at `theta`, with
    /// optional analytic gradient. Non-finite when the kernel is singular.
    static double log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y_std,
                                          const Eigen::VectorXd& theta, Eigen::VectorXd* grad);

private:
    void condition(const Eigen::VectorXd& y_std);

    int dim_ = 0;
    Eigen::MatrixXd X_;
    KernelParams kernel_;
    double noise_ = 1e-2;
    double mean_ = 0.0;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd alpha_;
};

/**
 * GP binary classifier with a logistic link and a Laplace approximation to the
 * latent posterior.
 *
 * Hyperparameter vector layout: [log lengthscale_0..D-1, log signal variance,
 * latent mean]. Single-class training data skips fitting and yields the
 * constant probability (positives + 1) / (N + 2).
 */
class GpClassifier {
public:
    /// Throws EmptyDataError for N = 0 and ConvergenceError when the Newton
    /// iterations for the final hyperparameters do not converge.
    static GpClassifier fit(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                            const FitConfig& config = {});

    /// Classifier with p(b = 1 | x) = p everywhere.
    static GpClassifier constant(int dim, double p);

    int dim() const { return dim_; }
    bool is_constant() const { return constant_p_.has_value(); }
    int num_train() const { return static_cast<int>(X_.rows()); }
    int newton_iterations() const { return newton_iterations_; }
    double final_newton_step() const { return final_step_; }
    const KernelParams& kernel() const { return kernel_; }
    double latent_mean_constant() const { return mean_; }

    /// Gaussian approximation to the latent function at the query rows.
    Prediction latent(const Eigen::MatrixXd& Xq) const;

    /// p(b = 1 | x) for each query row, averaging the link over the latent.
    Eigen::VectorXd probability(const Eigen::MatrixXd& Xq) const;

    /// S x M Bernoulli draws: latent sample, logistic link, then one coin per entry.
    Eigen::MatrixXi sample(const Eigen::MatrixXd& Xq, int num_samples, std::uint64_t seed) const;

    /// Laplace-approximate log marginal likelihood with gradient. Labels in {0, 1}.
    static double log_marginal_likelihood(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                          const Eigen::VectorXd& theta, Eigen::VectorXd* grad);

private:
    int dim_ = 0;
    std::optional<double> constant_p_;
    Eigen::MatrixXd X_;
    KernelParams kernel_;
    double mean_ = 0.0;
    Eigen::VectorXd grad_loglik_;  // at the mode
    Eigen::MatrixXd chol_b_;       // chol(I + W^1/2 K W^1/2)
    Eigen::VectorXd sqrt_w_;
    int newton_iterations_ = 0;
    double final_step_ = 0.0;
};

/// Logistic sigmoid, numerically stable in both tails.
double logistic(double z);

/// E[logistic(f)] for f ~ N(mean, variance), by Gauss-Hermite quadrature.
double expected_logistic(double mean, double variance);

}  // namespace dagbo::gp

#endif  // DAGBO_GP_HPP
