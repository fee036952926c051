#include "ctrp/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctrp/errors.hpp"
#include "ctrp/parallel.hpp"

namespace ctrp {

void EnsembleModel::validate() const {
    if (members.empty()) throw parameter_error("ensemble: no members");
    const auto& first = members.front().spec;
    for (const auto& m : members) {
        if (m.spec.input_shape != first.input_shape || m.spec.output_shape() != first.output_shape())
            throw shape_error("ensemble: members must share input and output shapes");
    }
    if (weights.size() != size()) throw shape_error("ensemble: weight count mismatch");
}

namespace {

double log_inverse_gamma_density(double x, double shape, double rate) {
    return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double log_normal_density(double x, double mean, double var) {
    const double r = x - mean;
    return -0.5 * std::log(2.0 * M_PI * var) - r * r / (2.0 * var);
}

}  // namespace

double log_unnormalized_posterior(const EnsembleMember& member, const ChainDraw& theta,
                                  const Eigen::VectorXd& y, const PriorSpec& prior) {
    if (theta.sigma2 <= 0.0) throw parameter_error("log posterior: sigma2 must be positive");
    const Eigen::Index t_count = y.size();
    if (member.compressed_rows.rows() != t_count)
        throw shape_error("log posterior: cached covariates disagree with responses");

    const Eigen::VectorXd fitted = member.compressed_rows * theta.coefficient.vec();
    const double rss = (y.array() - theta.mu - fitted.array()).square().sum();
    double ll = -0.5 * static_cast<double>(t_count) * std::log(2.0 * M_PI * theta.sigma2) -
                rss / (2.0 * theta.sigma2);

    if (prior.family == PriorFamily::Parafac) {
        if (!theta.margins) throw parameter_error("log posterior: hierarchical prior needs margin draws");
        if (!member.chain.scale_summary)
            throw parameter_error("log posterior: member carries no fitted scale summary");
        const ParafacScaleSummary& sc = *member.chain.scale_summary;
        const MarginSet& ms = *theta.margins;
        for (int d = 0; d < ms.rank; ++d) {
            for (int m = 0; m < ms.order(); ++m) {
                const Eigen::VectorXd& g = ms.margins[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)];
                const Eigen::VectorXd& wv = sc.w[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)];
                for (Eigen::Index j = 0; j < g.size(); ++j)
                    ll += log_normal_density(g(j), 0.0, sc.tau * sc.zeta(d) * wv(j));
            }
        }
        ll += log_normal_density(theta.mu, 0.0, prior.parafac.sigma2_mu);
        ll += log_inverse_gamma_density(theta.sigma2, prior.parafac.a_sigma, prior.parafac.b_sigma);
    } else {
        GaussianPriorConfig cfg = prior.gaussian;
        if (cfg.mode_covariances.empty())
            cfg = GaussianPriorConfig::identity(theta.coefficient.shape());
        const Eigen::MatrixXd cov = separable_covariance(cfg.mode_covariances);
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) throw numeric_error("log posterior: prior covariance not PD");
        const Eigen::VectorXd b = theta.coefficient.vec();
        const Eigen::VectorXd half = llt.matrixL().solve(b);
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < cov.rows(); ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
        ll += -0.5 * half.squaredNorm() - 0.5 * logdet -
              0.5 * static_cast<double>(cov.rows()) * std::log(2.0 * M_PI);
        ll += log_normal_density(theta.mu, 0.0, cfg.sigma2_mu);
        ll += log_inverse_gamma_density(theta.sigma2, cfg.a_sigma, cfg.b_sigma);
    }
    return ll;
}

RlrResult rlr_weights(const std::vector<Eigen::MatrixXd>& h) {
    const int l_count = static_cast<int>(h.size());
    if (l_count < 1) throw parameter_error("rlr: no members");
    Eigen::Index s_min = h.front().rows();
    for (const auto& m : h) {
        if (m.cols() != l_count) throw shape_error("rlr: cross-evaluation column count must equal members");
        s_min = std::min(s_min, m.rows());
    }
    if (s_min < 1) throw parameter_error("rlr: empty draw set");

    Eigen::VectorXd eta = Eigen::VectorXd::Zero(l_count);
    const auto objective = [&](const Eigen::VectorXd& e, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
        double ll = 0.0;
        if (grad) grad->setZero();
        if (hess) hess->setZero();
        for (int l = 0; l < l_count; ++l) {
            for (Eigen::Index s = 0; s < s_min; ++s) {
                Eigen::VectorXd a = h[static_cast<std::size_t>(l)].row(s).transpose() + e;
                const double amax = a.maxCoeff();
                const Eigen::VectorXd ex = (a.array() - amax).exp();
                const double denom = ex.sum();
                ll += a(l) - amax - std::log(denom);
                if (grad || hess) {
                    const Eigen::VectorXd p = ex / denom;
                    if (grad) {
                        (*grad)(l) += 1.0;
                        *grad -= p;
                    }
                    if (hess) *hess -= Eigen::MatrixXd(p.asDiagonal()) - p * p.transpose();
                }
            }
        }
        return ll;
    };

    RlrResult result;
    if (l_count == 1) {
        result.weights = Eigen::VectorXd::Ones(1);
        result.etas = eta;
        return result;
    }

    Eigen::VectorXd grad(l_count);
    Eigen::MatrixXd hess(l_count, l_count);
    double ll = objective(eta, &grad, &hess);
    const int free = l_count - 1;
    for (int it = 1; it <= 500; ++it) {
        result.grad_norm = grad.cwiseAbs().maxCoeff();
        result.iterations = it - 1;
        if (result.grad_norm < 1e-8) {
            Eigen::VectorXd neg = -eta;
            const double m = neg.maxCoeff();
            Eigen::VectorXd wu = (neg.array() - m).exp();
            result.weights = wu / wu.sum();
            result.etas = eta;
            return result;
        }
        // Newton step on the free coordinates (eta_1 pinned at 0), with a
        // ridge fallback and backtracking to preserve ascent.
        Eigen::MatrixXd a = -hess.bottomRightCorner(free, free);
        a.diagonal().array() += 1e-12;
        Eigen::VectorXd step = a.ldlt().solve(grad.tail(free));
        double scale = 1.0;
        for (int back = 0; back < 60; ++back) {
            Eigen::VectorXd trial = eta;
            trial.tail(free) += scale * step;
            const double trial_ll = objective(trial, nullptr, nullptr);
            if (trial_ll >= ll - 1e-14) {
                eta = trial;
                ll = objective(eta, &grad, &hess);
                break;
            }
            scale *= 0.5;
        }
    }
    throw numeric_error("rlr: no convergence after 500 iterations, gradient max-norm " +
                        std::to_string(grad.cwiseAbs().maxCoeff()));
}

Eigen::VectorXd predictive_draws(const EnsembleMember& member, const DenseTensor& x_new,
                                 RngStream& rng) {
    if (x_new.shape() != member.spec.input_shape)
        throw shape_error("predictive draws: test point shape mismatch");
    const DenseTensor compressed = apply(member.spec, x_new);
    const Eigen::Index s_count = static_cast<Eigen::Index>(member.chain.draws.size());
    Eigen::VectorXd out(s_count);
    for (Eigen::Index s = 0; s < s_count; ++s) {
        const ChainDraw& draw = member.chain.draws[static_cast<std::size_t>(s)];
        const double mean = draw.mu + inner(draw.coefficient, compressed);
        out(s) = mean + std::sqrt(draw.sigma2) * rng.normal();
    }
    return out;
}

double PredictiveSummary::pooled_mean() const {
    double v = 0.0;
    for (int l = 0; l < weights.size(); ++l)
        v += weights(l) * member_draws[static_cast<std::size_t>(l)].mean();
    return v;
}

Eigen::VectorXd PredictiveSummary::member_means() const {
    Eigen::VectorXd m(static_cast<Eigen::Index>(member_draws.size()));
    for (Eigen::Index l = 0; l < m.size(); ++l) m(l) = member_draws[static_cast<std::size_t>(l)].mean();
    return m;
}

double PredictiveSummary::quantile(double prob) const {
    if (!(prob > 0.0 && prob < 1.0)) throw parameter_error("quantile: prob must lie in (0,1)");
    std::vector<std::pair<double, double>> atoms;  // value, mass
    for (int l = 0; l < weights.size(); ++l) {
        const Eigen::VectorXd& draws = member_draws[static_cast<std::size_t>(l)];
        if (draws.size() == 0) throw parameter_error("quantile: member has no draws");
        const double mass = weights(l) / static_cast<double>(draws.size());
        for (Eigen::Index s = 0; s < draws.size(); ++s) atoms.emplace_back(draws(s), mass);
    }
    std::sort(atoms.begin(), atoms.end());
    double cum = 0.0;
    for (const auto& [value, mass] : atoms) {
        cum += mass;
        if (cum + 1e-12 >= prob) return value;
    }
    return atoms.back().first;
}

PredictiveSummary predict_point(const EnsembleModel& model, const DenseTensor& x_new,
                                std::uint64_t seed) {
    model.validate();
    PredictiveSummary out;
    out.weights = model.weights;
    out.member_draws.resize(model.members.size());
    for (int l = 0; l < model.size(); ++l) {
        RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(l));
        out.member_draws[static_cast<std::size_t>(l)] =
            predictive_draws(model.members[static_cast<std::size_t>(l)], x_new, rng);
    }
    return out;
}

double pooled_point_forecast(const EnsembleModel& model, const DenseTensor& x_new,
                             std::uint64_t seed) {
    return predict_point(model, x_new, seed).pooled_mean();
}

std::vector<double> pooled_quantile(const EnsembleModel& model, const DenseTensor& x_new,
                                    std::span<const double> probs, std::uint64_t seed) {
    const PredictiveSummary summary = predict_point(model, x_new, seed);
    std::vector<double> out;
    out.reserve(probs.size());
    for (double p : probs) out.push_back(summary.quantile(p));
    return out;
}

EnsembleModel fit_ensemble(const std::vector<DenseTensor>& x, const Eigen::VectorXd& y,
                           const EnsembleConfig& config) {
    if (x.empty() || static_cast<Eigen::Index>(x.size()) != y.size())
        throw shape_error("fit: covariate/response count mismatch");
    if (config.members < 1) throw parameter_error("fit: need at least one member");

    const int l_count = config.members;
    EnsembleModel model;
    model.prior = config.prior;
    model.seed = config.seed;
    model.responses = y;
    model.members.resize(static_cast<std::size_t>(l_count));

    parallel_for(l_count, [&](int l) {
        EnsembleMember member;
        member.spec = config.family.realize(
            RngStream::substream(config.seed, static_cast<std::uint64_t>(l)).next_u64());
        CompressedDataset data;
        data.y = y;
        data.x.reserve(x.size());
        for (const auto& xi : x) data.x.push_back(apply(member.spec, xi));

        member.compressed_rows.resize(static_cast<Eigen::Index>(x.size()), data.x.front().size());
        for (std::size_t t = 0; t < data.x.size(); ++t)
            member.compressed_rows.row(static_cast<Eigen::Index>(t)) = data.x[t].vec().transpose();

        const std::uint64_t chain_seed =
            RngStream::substream(config.seed, static_cast<std::uint64_t>(l_count + l)).next_u64();
        if (config.prior.family == PriorFamily::Parafac) {
            member.chain = run_parafac_chain(data, config.prior.parafac, config.mcmc, chain_seed,
                                             config.zeta_update);
        } else {
            GaussianPriorConfig gc = config.prior.gaussian;
            if (gc.mode_covariances.empty())
                gc = GaussianPriorConfig::identity(data.x.front().shape());
            member.chain = run_gaussian_chain(data, gc, config.mcmc, chain_seed);
        }
        member.chain.projection_id = "member-" + std::to_string(l);
        model.members[static_cast<std::size_t>(l)] = std::move(member);
    });

    const std::vector<Eigen::MatrixXd> h = cross_evaluations(model, y, config.prior);
    const RlrResult rlr = rlr_weights(h);
    model.weights = rlr.weights;
    model.etas = rlr.etas;
    model.validate();
    return model;
}

std::vector<Eigen::MatrixXd> cross_evaluations(const EnsembleModel& model, const Eigen::VectorXd& y,
                                               const PriorSpec& prior) {
    const int l_count = model.size();
    const Eigen::Index t_count = y.size();
    std::size_t s_count = model.members.front().chain.draws.size();
    for (const auto& m : model.members) s_count = std::min(s_count, m.chain.draws.size());

    // Stacked coefficient draws per source member (q x S).
    const Eigen::Index q = model.members.front().compressed_rows.cols();
    std::vector<Eigen::MatrixXd> b_mats(static_cast<std::size_t>(l_count));
    for (int l = 0; l < l_count; ++l) {
        Eigen::MatrixXd b(q, static_cast<Eigen::Index>(s_count));
        for (std::size_t s = 0; s < s_count; ++s)
            b.col(static_cast<Eigen::Index>(s)) = model.members[static_cast<std::size_t>(l)].chain.draws[s].coefficient.vec();
        b_mats[static_cast<std::size_t>(l)] = std::move(b);
    }

    // Hierarchical prior terms condition on each evaluator's fitted scales.
    struct ScaleCache {
        std::vector<std::vector<Eigen::VectorXd>> inv_scale;  // [d][m]
        double log_norm = 0.0;                                // sum of -log(2 pi scale)/2
    };
    std::vector<ScaleCache> caches;
    Eigen::MatrixXd gaussian_prior_precision;
    double gaussian_log_norm = 0.0;
    if (prior.family == PriorFamily::Parafac) {
        caches.resize(static_cast<std::size_t>(l_count));
        for (int k = 0; k < l_count; ++k) {
            const auto& summary = model.members[static_cast<std::size_t>(k)].chain.scale_summary;
            if (!summary) throw parameter_error("cross evaluations: member carries no fitted scale summary");
            ScaleCache& cache = caches[static_cast<std::size_t>(k)];
            cache.inv_scale.resize(summary->w.size());
            for (std::size_t d = 0; d < summary->w.size(); ++d) {
                cache.inv_scale[d].resize(summary->w[d].size());
                for (std::size_t m = 0; m < summary->w[d].size(); ++m) {
                    const Eigen::VectorXd scale =
                        (summary->tau * summary->zeta(static_cast<Eigen::Index>(d)) *
                         summary->w[d][m].array())
                            .matrix();
                    cache.inv_scale[d][m] = scale.cwiseInverse();
                    cache.log_norm += -0.5 * (2.0 * M_PI * scale.array()).log().sum();
                }
            }
        }
    } else {
        GaussianPriorConfig cfg = prior.gaussian;
        if (cfg.mode_covariances.empty())
            cfg = GaussianPriorConfig::identity(model.members.front().chain.draws.front().coefficient.shape());
        const Eigen::MatrixXd cov = separable_covariance(cfg.mode_covariances);
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) throw numeric_error("cross evaluations: prior covariance not PD");
        gaussian_prior_precision = llt.solve(Eigen::MatrixXd::Identity(q, q));
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < q; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
        gaussian_log_norm = -0.5 * logdet - 0.5 * static_cast<double>(q) * std::log(2.0 * M_PI);
    }

    const double a_sigma = prior.family == PriorFamily::Parafac ? prior.parafac.a_sigma : prior.gaussian.a_sigma;
    const double b_sigma = prior.family == PriorFamily::Parafac ? prior.parafac.b_sigma : prior.gaussian.b_sigma;
    const double sigma2_mu = prior.family == PriorFamily::Parafac ? prior.parafac.sigma2_mu : prior.gaussian.sigma2_mu;

    std::vector<Eigen::MatrixXd> h(static_cast<std::size_t>(l_count));
    for (auto& m : h) m.resize(static_cast<Eigen::Index>(s_count), l_count);

    parallel_for(l_count, [&](int k) {
        const EnsembleMember& evaluator = model.members[static_cast<std::size_t>(k)];
        for (int l = 0; l < l_count; ++l) {
            const auto& draws = model.members[static_cast<std::size_t>(l)].chain.draws;
            const Eigen::MatrixXd fitted = evaluator.compressed_rows * b_mats[static_cast<std::size_t>(l)];
            for (std::size_t s = 0; s < s_count; ++s) {
                const ChainDraw& theta = draws[s];
                const double rss = (y.array() - theta.mu - fitted.col(static_cast<Eigen::Index>(s)).array())
                                       .square()
                                       .sum();
                double ll = -0.5 * static_cast<double>(t_count) * std::log(2.0 * M_PI * theta.sigma2) -
                            rss / (2.0 * theta.sigma2);
                if (prior.family == PriorFamily::Parafac) {
                    const ScaleCache& cache = caches[static_cast<std::size_t>(k)];
                    const MarginSet& ms = *theta.margins;
                    double quad = 0.0;
                    for (int d = 0; d < ms.rank; ++d)
                        for (int m = 0; m < ms.order(); ++m)
                            quad += (ms.margins[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)]
                                         .array()
                                         .square() *
                                     cache.inv_scale[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)]
                                         .array())
                                        .sum();
                    ll += cache.log_norm - 0.5 * quad;
                } else {
                    const Eigen::VectorXd b = b_mats[static_cast<std::size_t>(l)].col(static_cast<Eigen::Index>(s));
                    ll += gaussian_log_norm - 0.5 * b.dot(gaussian_prior_precision * b);
                }
                const double mu_var = sigma2_mu;
                ll += -0.5 * std::log(2.0 * M_PI * mu_var) - theta.mu * theta.mu / (2.0 * mu_var);
                ll += a_sigma * std::log(b_sigma) - std::lgamma(a_sigma) -
                      (a_sigma + 1.0) * std::log(theta.sigma2) - b_sigma / theta.sigma2;
                h[static_cast<std::size_t>(l)](static_cast<Eigen::Index>(s), k) = ll;
            }
        }
    });
    return h;
}

}  // namespace ctrp
