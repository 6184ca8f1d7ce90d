#include "dagbo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dagbo/errors.hpp"
#include "dagbo/optimize.hpp"
#include "dagbo/rng.hpp"

namespace dagbo::gp {

namespace {

constexpr double kSqrt5 = 2.2360679774997896964;
constexpr double kFitJitter = 1e-8;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Matérn-5/2 correlation as a function of the scaled distance r.
inline double matern_corr(double r) {
    return (1.0 + kSqrt5 * r + (5.0 / 3.0) * r * r) * std::exp(-kSqrt5 * r);
}

// d corr / d (log lengthscale_d) = (5/3)(1 + sqrt5 r) exp(-sqrt5 r) * (delta_d / l_d)^2.
inline double matern_dlog_factor(double r) {
    return (5.0 / 3.0) * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
}

struct KernelWork {
    Eigen::MatrixXd corr;                  // unscaled correlation
    Eigen::MatrixXd factor;                // matern_dlog_factor(r)
    std::vector<Eigen::MatrixXd> sq_dims;  // (delta_d / l_d)^2 per dimension
};

KernelWork kernel_work(const Eigen::MatrixXd& X, const Eigen::VectorXd& ls, bool want_grad) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    KernelWork w;
    w.corr.resize(n, n);
    if (want_grad) {
        w.factor.resize(n, n);
        w.sq_dims.assign(static_cast<std::size_t>(d), Eigen::MatrixXd::Zero(n, n));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            double r2 = 0.0;
            for (Eigen::Index k = 0; k < d; ++k) {
                const double z = (X(i, k) - X(j, k)) / ls(k);
                const double z2 = z * z;
                r2 += z2;
                if (want_grad) {
                    w.sq_dims[k](i, j) = z2;
                    w.sq_dims[k](j, i) = z2;
                }
            }
            const double r = std::sqrt(r2);
            w.corr(i, j) = w.corr(j, i) = matern_corr(r);
            if (want_grad) w.factor(i, j) = w.factor(j, i) = matern_dlog_factor(r);
        }
    }
    return w;
}

struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Golub-Welsch for the physicists' Hermite weight exp(-x^2).
const GaussHermite& gauss_hermite() {
    static const GaussHermite rule = [] {
        constexpr int n = 48;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(i / 2.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
        GaussHermite gh;
        for (int i = 0; i < n; ++i) {
            gh.nodes.push_back(eig.eigenvalues()(i));
            const double v0 = eig.eigenvectors()(0, i);
            gh.weights.push_back(std::sqrt(std::numbers::pi) * v0 * v0);
        }
        return gh;
    }();
    return rule;
}

Eigen::MatrixXd standard_normals(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd Z(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) Z(r, c) = rng.normal();
    }
    return Z;
}

void check_inputs(const Eigen::MatrixXd& X, Eigen::Index n_targets) {
    if (X.rows() == 0) throw EmptyDataError("GP fit requires at least one training point");
    if (X.rows() != n_targets) {
        throw DimensionError("GP fit: X has " + std::to_string(X.rows()) + " rows but " +
                             std::to_string(n_targets) + " targets");
    }
    if (!X.allFinite()) throw DimensionError("GP fit: non-finite inputs");
}

Eigen::VectorXd default_lengthscales(const FitConfig& config, int dim) {
    if (config.initial_kernel) {
        if (config.initial_kernel->lengthscales.size() != dim) {
            throw DimensionError("initial lengthscales do not match input dimension");
        }
        return config.initial_kernel->lengthscales;
    }
    return Eigen::VectorXd::Constant(dim, 0.5);
}

// Runs the default start plus `restarts` random starts; returns the best.
AscentResult multi_start(const ValueAndGradient& fn, const Eigen::VectorXd& start,
                         const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                         const Eigen::VectorXd& rand_lo, const Eigen::VectorXd& rand_hi,
                         const FitConfig& config) {
    AscentOptions opts;
    opts.max_iterations = config.max_iterations;
    AscentResult best = maximize_in_box(fn, start, lo, hi, opts);
    Rng rng(config.seed);
    for (int r = 0; r < config.restarts; ++r) {
        Eigen::VectorXd x0(start.size());
        for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = rng.uniform(rand_lo(i), rand_hi(i));
        AscentResult res = maximize_in_box(fn, x0, lo, hi, opts);
        if (std::isfinite(res.value) && (!std::isfinite(best.value) || res.value > best.value)) {
            best = std::move(res);
        }
    }
    return best;
}

}  // namespace

double logistic(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double expected_logistic(double mean, double variance) {
    if (variance <= 0.0) return logistic(mean);
    const auto& gh = gauss_hermite();
    const double s = std::sqrt(2.0 * variance);
    double acc = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        acc += gh.weights[i] * logistic(mean + s * gh.nodes[i]);
    }
    return acc / std::sqrt(std::numbers::pi);
}

Eigen::MatrixXd matern52(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const KernelParams& params) {
    if (A.cols() != B.cols() || A.cols() != params.lengthscales.size()) {
        throw DimensionError("matern52: input dimension mismatch");
    }
    Eigen::MatrixXd K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            double r2 = 0.0;
            for (Eigen::Index k = 0; k < A.cols(); ++k) {
                const double z = (A(i, k) - B(j, k)) / params.lengthscales(k);
                r2 += z * z;
            }
            K(i, j) = params.signal_variance * matern_corr(std::sqrt(r2));
        }
    }
    return K;
}

Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& A, double* jitter_used) {
    const Eigen::Index n = A.rows();
    if (n == 0) return Eigen::MatrixXd(0, 0);
    {
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() == Eigen::Success) {
            if (jitter_used) *jitter_used = 0.0;
            return llt.matrixL();
        }
    }
    const double scale = std::max(A.diagonal().cwiseAbs().mean(), 1e-300);
    for (double jitter = 1e-8; jitter <= 1e-4 * 1.0000001; jitter *= 10.0) {
        Eigen::MatrixXd M = A;
        M.diagonal().array() += jitter * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(M);
        if (llt.info() == Eigen::Success) {
            if (jitter_used) *jitter_used = jitter * scale;
            return llt.matrixL();
        }
    }
    throw IllConditionedKernelError("Cholesky failed after jitter escalation to 1e-4 (n=" +
                                    std::to_string(n) + ")");
}

// ---------------------------------------------------------------------------
// Regressor

double GpRegressor::log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                            const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (theta.size() != d + 3) throw DimensionError("regressor theta has wrong length");
    const Eigen::VectorXd ls = theta.head(d).array().exp();
    const double sf2 = std::exp(theta(d));
    const double sn2 = std::exp(theta(d + 1));
    const double c = theta(d + 2);

    KernelWork w = kernel_work(X, ls, grad != nullptr);
    Eigen::MatrixXd Ky = sf2 * w.corr;
    Ky.diagonal().array() += sn2;
    Eigen::LLT<Eigen::MatrixXd> llt(Ky);
    if (llt.info() != Eigen::Success) return kNegInf;

    const Eigen::VectorXd resid = y.array() - c;
    const Eigen::VectorXd alpha = llt.solve(resid);
    const Eigen::MatrixXd L = llt.matrixL();
    const double logdet_half = L.diagonal().array().log().sum();
    const double lml = -0.5 * resid.dot(alpha) - logdet_half -
                       0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (grad) {
        grad->resize(d + 3);
        const Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
        const Eigen::MatrixXd W = alpha * alpha.transpose() - Kinv;
        const Eigen::MatrixXd dfac = sf2 * w.factor;
        for (Eigen::Index k = 0; k < d; ++k) {
            (*grad)(k) = 0.5 * (W.array() * dfac.array() * w.sq_dims[k].array()).sum();
        }
        (*grad)(d) = 0.5 * sf2 * (W.array() * w.corr.array()).sum();
        (*grad)(d + 1) = 0.5 * sn2 * W.trace();
        (*grad)(d + 2) = alpha.sum();
    }
    return lml;
}

GpRegressor GpRegressor::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const FitConfig& config) {
    check_inputs(X, y.size());
    if (!y.allFinite()) throw DimensionError("GP fit: non-finite targets");
    const int dim = static_cast<int>(X.cols());

    GpRegressor gp;
    gp.dim_ = dim;
    gp.X_ = X;
    gp.y_mean_ = y.mean();
    const double var = (y.array() - gp.y_mean_).square().mean();
    gp.y_scale_ = (y.size() > 1 && var > 1e-24) ? std::sqrt(var) : 1.0;
    const Eigen::VectorXd y_std = (y.array() - gp.y_mean_) / gp.y_scale_;

    Eigen::VectorXd theta(dim + 3);
    theta.head(dim) = default_lengthscales(config, dim).array().log();
    theta(dim) = std::log(config.initial_kernel ? config.initial_kernel->signal_variance : 1.0);
    theta(dim + 1) = std::log(config.initial_noise);
    theta(dim + 2) = config.initial_mean;

    if (config.optimize) {
        const auto& b = config.bounds;
        Eigen::VectorXd lo(dim + 3), hi(dim + 3), rlo(dim + 3), rhi(dim + 3);
        lo.head(dim).setConstant(std::log(b.lengthscale_min));
        hi.head(dim).setConstant(std::log(b.lengthscale_max));
        rlo.head(dim).setConstant(std::log(0.05));
        rhi.head(dim).setConstant(std::log(2.0));
        lo(dim) = std::log(b.signal_min);
        hi(dim) = std::log(b.signal_max);
        rlo(dim) = std::log(0.2);
        rhi(dim) = std::log(5.0);
        lo(dim + 1) = std::log(b.noise_min);
        hi(dim + 1) = std::log(b.noise_max);
        rlo(dim + 1) = std::log(1e-5);
        rhi(dim + 1) = std::log(0.1);
        lo(dim + 2) = b.mean_min;
        hi(dim + 2) = b.mean_max;
        rlo(dim + 2) = -1.0;
        rhi(dim + 2) = 1.0;
        ValueAndGradient fn = [&](const Eigen::VectorXd& t, Eigen::VectorXd* g) {
            return log_marginal_likelihood(X, y_std, t, g);
        };
        AscentResult best = multi_start(fn, theta, lo, hi, rlo, rhi, config);
        if (!std::isfinite(best.value)) {
            throw IllConditionedKernelError("regressor: no finite marginal likelihood at any start");
        }
        theta = best.argmax;
    }
    gp.kernel_.lengthscales = theta.head(dim).array().exp();
    gp.kernel_.signal_variance = std::exp(theta(dim));
    gp.noise_ = std::exp(theta(dim + 1));
    gp.mean_ = theta(dim + 2);
    gp.condition(y_std);
    return gp;
}

GpRegressor GpRegressor::prior(int dim, double target_mean, double target_scale,
                               const FitConfig& config) {
    GpRegressor gp;
    gp.dim_ = dim;
    gp.X_.resize(0, dim);
    gp.kernel_.lengthscales = default_lengthscales(config, dim);
    gp.kernel_.signal_variance =
        config.initial_kernel ? config.initial_kernel->signal_variance : 1.0;
    gp.noise_ = config.initial_noise;
    gp.mean_ = 0.0;
    gp.y_mean_ = target_mean;
    gp.y_scale_ = target_scale;
    return gp;
}

GpRegressor GpRegressor::narrow(int dim, double center, double scale, double sigma) {
    GpRegressor gp;
    gp.dim_ = dim;
    gp.X_.resize(0, dim);
    // Tiny lengthscale: draws at distinct points are independent.
    gp.kernel_.lengthscales = Eigen::VectorXd::Constant(dim, 1e-6);
    gp.kernel_.signal_variance = sigma * sigma;
    gp.noise_ = 0.0;
    gp.mean_ = 0.0;
    gp.y_mean_ = center;
    gp.y_scale_ = scale;
    return gp;
}

void GpRegressor::condition(const Eigen::VectorXd& y_std) {
    Eigen::MatrixXd Ky = matern52(X_, X_, kernel_);
    Ky.diagonal().array() += noise_;
    chol_ = robust_cholesky(Ky);
    const Eigen::VectorXd resid = y_std.array() - mean_;
    alpha_ = chol_.triangularView<Eigen::Lower>().solve(resid);
    chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha_);
}

Prediction GpRegressor::predict(const Eigen::MatrixXd& Xq, bool include_noise) const {
    if (Xq.cols() != dim_) throw DimensionError("GpRegressor::predict: query dimension mismatch");
    Prediction p;
    const Eigen::Index m = Xq.rows();
    Eigen::VectorXd mean_std = Eigen::VectorXd::Constant(m, mean_);
    Eigen::VectorXd var_std = Eigen::VectorXd::Constant(m, kernel_.signal_variance);
    if (!is_prior()) {
        const Eigen::MatrixXd Ks = matern52(Xq, X_, kernel_);
        mean_std += Ks * alpha_;
        const Eigen::MatrixXd V = chol_.triangularView<Eigen::Lower>().solve(Ks.transpose());
        var_std -= V.colwise().squaredNorm().transpose();
        var_std = var_std.cwiseMax(0.0);
    }
    if (include_noise) var_std.array() += noise_;
    p.mean = y_mean_ + y_scale_ * mean_std.array();
    p.variance = y_scale_ * y_scale_ * var_std.array();
    return p;
}

Eigen::MatrixXd GpRegressor::predictive_covariance(const Eigen::MatrixXd& Xq,
                                                   bool include_noise) const {
    if (Xq.cols() != dim_) throw DimensionError("GpRegressor: query dimension mismatch");
    Eigen::MatrixXd cov = matern52(Xq, Xq, kernel_);
    if (!is_prior()) {
        const Eigen::MatrixXd Ks = matern52(Xq, X_, kernel_);
        const Eigen::MatrixXd V = chol_.triangularView<Eigen::Lower>().solve(Ks.transpose());
        cov.noalias() -= V.transpose() * V;
    }
    if (include_noise) cov.diagonal().array() += noise_;
    return y_scale_ * y_scale_ * cov;
}

Eigen::MatrixXd GpRegressor::sample(const Eigen::MatrixXd& Xq, int num_samples,
                                    std::uint64_t seed, bool include_noise) const {
    const Prediction p = predict(Xq, include_noise);
    const Eigen::MatrixXd L = robust_cholesky(predictive_covariance(Xq, include_noise));
    Rng rng(seed);
    const Eigen::MatrixXd Z = standard_normals(rng, Xq.rows(), num_samples);
    Eigen::MatrixXd out = (L * Z).transpose();
    out.rowwise() += p.mean.transpose();
    return out;
}

// ---------------------------------------------------------------------------
// Classifier

namespace {

struct LaplaceState {
    Eigen::VectorXd f;
    Eigen::VectorXd a;
    Eigen::VectorXd pi;
    Eigen::VectorXd sqrt_w;
    Eigen::MatrixXd L;  // chol(B)
    double log_q = kNegInf;
    int iterations = 0;
    double last_step = 0.0;
    bool converged = false;
};

double log_lik(const Eigen::VectorXd& f, const Eigen::VectorXd& t) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        const double z = (2.0 * t(i) - 1.0) * f(i);
        // log sigmoid(z), stable.
        acc += (z >= 0) ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
    }
    return acc;
}

// Newton iterations for the latent mode (damped), from the warm start `a0`.
LaplaceState laplace_mode(const Eigen::MatrixXd& K, const Eigen::VectorXd& t, double m,
                          const Eigen::VectorXd* a0) {
    const Eigen::Index n = K.rows();
    LaplaceState s;
    s.a = (a0 && a0->size() == n) ? *a0 : Eigen::VectorXd::Zero(n);
    s.f = (K * s.a).array() + m;
    // Newton objective: log p(y|f) - (f - m)^T K^-1 (f - m) / 2 with f - m = K a.
    auto psi_of = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& f) {
        return -0.5 * a.dot((f.array() - m).matrix()) + log_lik(f, t);
    };
    double psi = psi_of(s.a, s.f);
    if (!std::isfinite(psi)) {
        s.a.setZero();
        s.f.setConstant(m);
        psi = psi_of(s.a, s.f);
    }
    constexpr int kMaxNewton = 100;
    for (int it = 0; it < kMaxNewton; ++it) {
        s.iterations = it + 1;
        s.pi = s.f.unaryExpr([](double v) { return logistic(v); });
        const Eigen::VectorXd w = (s.pi.array() * (1.0 - s.pi.array())).cwiseMax(1e-300);
        s.sqrt_w = w.array().sqrt();
        Eigen::MatrixXd B = s.sqrt_w.asDiagonal() * K * s.sqrt_w.asDiagonal();
        B.diagonal().array() += 1.0;
        Eigen::LLT<Eigen::MatrixXd> llt(B);
        if (llt.info() != Eigen::Success) return s;
        s.L = llt.matrixL();
        const Eigen::VectorXd dlp = t - s.pi;
        const Eigen::VectorXd b = w.cwiseProduct((s.f.array() - m).matrix()) + dlp;
        const Eigen::VectorXd Kb = K * b;
        const Eigen::VectorXd rhs = s.sqrt_w.cwiseProduct(Kb);
        const Eigen::VectorXd inner = llt.solve(rhs);
        const Eigen::VectorXd a_new = b - s.sqrt_w.cwiseProduct(inner);
        const Eigen::VectorXd da = a_new - s.a;

        double step = 1.0;
        double psi_new = kNegInf;
        Eigen::VectorXd a_try, f_try;
        for (int bt = 0; bt < 30; ++bt) {
            a_try = s.a + step * da;
            f_try = (K * a_try).array() + m;
            psi_new = psi_of(a_try, f_try);
            if (std::isfinite(psi_new) && psi_new >= psi - 1e-12) break;
            step *= 0.5;
        }
        if (!std::isfinite(psi_new)) return s;
        s.last_step = (f_try - s.f).lpNorm<Eigen::Infinity>();
        s.a = a_try;
        s.f = f_try;
        const double gain = psi_new - psi;
        psi = psi_new;
        if (std::abs(gain) < 1e-10 && s.last_step < 1e-6) {
            s.converged = true;
            break;
        }
    }
    // Curvature at the final mode.
    s.pi = s.f.unaryExpr([](double v) { return logistic(v); });
    const Eigen::VectorXd w = (s.pi.array() * (1.0 - s.pi.array())).cwiseMax(1e-300);
    s.sqrt_w = w.array().sqrt();
    Eigen::MatrixXd B = s.sqrt_w.asDiagonal() * K * s.sqrt_w.asDiagonal();
    B.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success) {
        s.converged = false;
        return s;
    }
    s.L = llt.matrixL();
    s.log_q = psi_of(s.a, s.f) - s.L.diagonal().array().log().sum();
    return s;
}

Eigen::VectorXd labels_to_targets(const std::vector<int>& labels) {
    Eigen::VectorXd t(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw DimensionError("labels must be 0 or 1");
        t(static_cast<Eigen::Index>(i)) = labels[i];
    }
    return t;
}

double classifier_lml(const Eigen::MatrixXd& X, const Eigen::VectorXd& t,
                      const Eigen::VectorXd& theta, Eigen::VectorXd* grad,
                      Eigen::VectorXd* warm) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (theta.size() != d + 2) throw DimensionError("classifier theta has wrong length");
    const Eigen::VectorXd ls = theta.head(d).array().exp();
    const double sf2 = std::exp(theta(d));
    const double m = theta(d + 1);

    KernelWork w = kernel_work(X, ls, grad != nullptr);
    Eigen::MatrixXd K = sf2 * w.corr;
    K.diagonal().array() += kFitJitter;
    LaplaceState s = laplace_mode(K, t, m, warm);
    if (!s.converged || !std::isfinite(s.log_q)) return kNegInf;
    if (warm) *warm = s.a;
    if (grad) {
        grad->resize(d + 2);
        const auto Lt = s.L.triangularView<Eigen::Lower>();
        // R = W^1/2 B^-1 W^1/2
        Eigen::MatrixXd R = Lt.solve(Eigen::MatrixXd(s.sqrt_w.asDiagonal()));
        R = s.L.transpose().triangularView<Eigen::Upper>().solve(R);
        R = s.sqrt_w.asDiagonal() * R;
        const Eigen::MatrixXd C = Lt.solve(s.sqrt_w.asDiagonal() * K);
        const Eigen::VectorXd third =
            -(s.pi.array() * (1.0 - s.pi.array()) * (1.0 - 2.0 * s.pi.array())).matrix();
        const Eigen::VectorXd post_diag = K.diagonal() - C.colwise().squaredNorm().transpose();
        // d(-log|B|/2)/df_i = -(1/2) Sigma_ii dW_ii/df_i, and dW/df = -third.
        const Eigen::VectorXd s2 = 0.5 * post_diag.cwiseProduct(third);
        const Eigen::VectorXd dlp = t - s.pi;

        auto kernel_grad = [&](const Eigen::MatrixXd& dK) {
            const double s1 = 0.5 * s.a.dot(dK * s.a) - 0.5 * (R.array() * dK.array()).sum();
            const Eigen::VectorXd b = dK * dlp;
            const Eigen::VectorXd s3 = b - K * (R * b);
            return s1 + s2.dot(s3);
        };
        const Eigen::MatrixXd dfac = sf2 * w.factor;
        for (Eigen::Index k = 0; k < d; ++k) {
            (*grad)(k) = kernel_grad((dfac.array() * w.sq_dims[k].array()).matrix());
        }
        (*grad)(d) = kernel_grad(sf2 * w.corr);
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
        (*grad)(d + 1) = s.a.sum() + s2.dot(ones - K * (R * ones));
    }
    return s.log_q;
}

}  // namespace

double GpClassifier::log_marginal_likelihood(const Eigen::MatrixXd& X,
                                             const std::vector<int>& labels,
                                             const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
    return classifier_lml(X, labels_to_targets(labels), theta, grad, nullptr);
}

GpClassifier GpClassifier::constant(int dim, double p) {
    GpClassifier c;
    c.dim_ = dim;
    c.constant_p_ = p;
    c.X_.resize(0, dim);
    return c;
}

GpClassifier GpClassifier::fit(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                               const FitConfig& config) {
    check_inputs(X, static_cast<Eigen::Index>(labels.size()));
    const Eigen::VectorXd t = labels_to_targets(labels);
    const int dim = static_cast<int>(X.cols());
    const double positives = t.sum();
    const double n = static_cast<double>(t.size());
    if (positives == 0.0 || positives == n) return constant(dim, (positives + 1.0) / (n + 2.0));

    Eigen::VectorXd theta(dim + 2);
    theta.head(dim) = default_lengthscales(config, dim).array().log();
    theta(dim) = std::log(config.initial_kernel ? config.initial_kernel->signal_variance : 1.0);
    theta(dim + 1) = config.initial_mean;

    if (config.optimize) {
        const auto& b = config.bounds;
        Eigen::VectorXd lo(dim + 2), hi(dim + 2), rlo(dim + 2), rhi(dim + 2);
        lo.head(dim).setConstant(std::log(b.lengthscale_min));
        hi.head(dim).setConstant(std::log(b.lengthscale_max));
        rlo.head(dim).setConstant(std::log(0.05));
        rhi.head(dim).setConstant(std::log(2.0));
        lo(dim) = std::log(b.signal_min);
        hi(dim) = std::log(b.signal_max);
        rlo(dim) = std::log(0.5);
        rhi(dim) = std::log(10.0);
        lo(dim + 1) = b.mean_min;
        hi(dim + 1) = b.mean_max;
        rlo(dim + 1) = -2.0;
        rhi(dim + 1) = 2.0;
        Eigen::VectorXd warm;
        ValueAndGradient fn = [&](const Eigen::VectorXd& th, Eigen::VectorXd* g) {
            return classifier_lml(X, t, th, g, &warm);
        };
        AscentResult best = multi_start(fn, theta, lo, hi, rlo, rhi, config);
        if (std::isfinite(best.value)) theta = best.argmax;
    }

    GpClassifier c;
    c.dim_ = dim;
    c.X_ = X;
    c.kernel_.lengthscales = theta.head(dim).array().exp();
    c.kernel_.signal_variance = std::exp(theta(dim));
    c.mean_ = theta(dim + 1);
    Eigen::MatrixXd K = matern52(X, X, c.kernel_);
    K.diagonal().array() += kFitJitter;
    LaplaceState s = laplace_mode(K, t, c.mean_, nullptr);
    if (!s.converged) {
        std::ostringstream msg;
        msg << "Laplace mode did not converge after " << s.iterations
            << " Newton iterations (last step " << s.last_step << ", N=" << X.rows() << ")";
        throw ConvergenceError(msg.str());
    }
    c.grad_loglik_ = t - s.pi;
    c.chol_b_ = s.L;
    c.sqrt_w_ = s.sqrt_w;
    c.newton_iterations_ = s.iterations;
    c.final_step_ = s.last_step;
    return c;
}

Prediction GpClassifier::latent(const Eigen::MatrixXd& Xq) const {
    if (Xq.cols() != dim_) throw DimensionError("GpClassifier: query dimension mismatch");
    Prediction p;
    const Eigen::Index m = Xq.rows();
    if (constant_p_) {
        const double pc = *constant_p_;
        p.mean = Eigen::VectorXd::Constant(m, std::log(pc / (1.0 - pc)));
        p.variance = Eigen::VectorXd::Zero(m);
        return p;
    }
    const Eigen::MatrixXd Ks = matern52(Xq, X_, kernel_);
    p.mean = (Ks * grad_loglik_).array() + mean_;
    const Eigen::MatrixXd V =
        chol_b_.triangularView<Eigen::Lower>().solve(sqrt_w_.asDiagonal() * Ks.transpose());
    p.variance = (kernel_.signal_variance - V.colwise().squaredNorm().transpose().array())
                     .cwiseMax(0.0);
    return p;
}

Eigen::VectorXd GpClassifier::probability(const Eigen::MatrixXd& Xq) const {
    if (constant_p_) {
        if (Xq.cols() != dim_) throw DimensionError("GpClassifier: query dimension mismatch");
        return Eigen::VectorXd::Constant(Xq.rows(), *constant_p_);
    }
    const Prediction lat = latent(Xq);
    Eigen::VectorXd p(Xq.rows());
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = expected_logistic(lat.mean(i), lat.variance(i));
    return p;
}

Eigen::MatrixXi GpClassifier::sample(const Eigen::MatrixXd& Xq, int num_samples,
                                     std::uint64_t seed) const {
    if (Xq.cols() != dim_) throw DimensionError("GpClassifier: query dimension mismatch");
    const Eigen::Index m = Xq.rows();
    Eigen::MatrixXi out(num_samples, m);
    Rng rng(seed);
    if (constant_p_) {
        for (int s = 0; s < num_samples; ++s) {
            for (Eigen::Index j = 0; j < m; ++j) out(s, j) = rng.bernoulli(*constant_p_) ? 1 : 0;
        }
        return out;
    }
    const Prediction lat = latent(Xq);
    Eigen::MatrixXd cov = matern52(Xq, Xq, kernel_);
    const Eigen::MatrixXd Ks = matern52(Xq, X_, kernel_);
    const Eigen::MatrixXd V =
        chol_b_.triangularView<Eigen::Lower>().solve(sqrt_w_.asDiagonal() * Ks.transpose());
    cov.noalias() -= V.transpose() * V;
    const Eigen::MatrixXd L = robust_cholesky(cov);
    const Eigen::MatrixXd Z = standard_normals(rng, m, num_samples);
    const Eigen::MatrixXd F = L * Z;
    for (int s = 0; s < num_samples; ++s) {
        for (Eigen::Index j = 0; j < m; ++j) {
            out(s, j) = rng.bernoulli(logistic(lat.mean(j) + F(j, s))) ? 1 : 0;
        }
    }
    return out;
}

}  // namespace dagbo::gp
