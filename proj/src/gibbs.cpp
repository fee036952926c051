#include "ctrp/gibbs.hpp"

#include <cmath>
#include <numeric>

#include "ctrp/errors.hpp"

namespace ctrp {

void CompressedDataset::validate() const {
    if (static_cast<int>(x.size()) != size()) throw shape_error("dataset: covariate/response count mismatch");
    for (const auto& t : x)
        if (!t.same_shape(x.front())) throw shape_error("dataset: covariates disagree on shape");
}

void ParafacPriorConfig::validate() const {
    if (rank < 1) throw parameter_error("prior: rank must be >= 1");
    for (double v : {alpha, a_tau, b_tau, a_lambda, b_lambda, a_sigma, b_sigma, sigma2_mu})
        if (!(v > 0.0)) throw parameter_error("prior: hyperparameters must be strictly positive");
}

void ParafacState::validate() const {
    margins.validate();
    const int d = margins.rank;
    if (zeta.size() != d) throw shape_error("state: zeta length must equal rank");
    for (int i = 0; i < d; ++i)
        if (!(zeta(i) > 0.0)) throw parameter_error("state: zeta must be strictly positive");
    if (!(tau > 0.0) || !(sigma2 > 0.0)) throw parameter_error("state: tau and sigma2 must be positive");
    for (const auto& ld : lambda)
        for (double v : ld)
            if (!(v > 0.0)) throw parameter_error("state: lambda must be positive");
    for (const auto& wd : w)
        for (const auto& wm : wd)
            if (!(wm.array() > 0.0).all()) throw parameter_error("state: w must be positive");
}

void McmcConfig::validate() const {
    if (iterations < 1 || burn_in < 0 || burn_in >= iterations || thin < 1)
        throw parameter_error("mcmc: need iterations > burn_in >= 0 and thin >= 1");
}

namespace {

// sum_m gamma_m' W_m^{-1} gamma_m for component d, with all scales diagonal.
double margin_quadratic(const ParafacState& s, int d) {
    double q = 0.0;
    const auto& comp = s.margins.margins[static_cast<std::size_t>(d)];
    for (std::size_t m = 0; m < comp.size(); ++m) {
        const Eigen::VectorXd& g = comp[m];
        const Eigen::VectorXd& wv = s.w[static_cast<std::size_t>(d)][m];
        q += (g.array().square() / wv.array()).sum();
    }
    return q;
}

double floored(double v) { return v < kPositiveFloor ? kPositiveFloor : v; }

}  // namespace

GigParams fc_zeta(int d, const ParafacState& s, const ParafacPriorConfig& c) {
    double qsum = 0.0;
    for (const auto& g : s.margins.margins[static_cast<std::size_t>(d)]) qsum += static_cast<double>(g.size());
    GigParams out;
    out.p = c.alpha - qsum / 2.0;
    out.a = 0.0;
    out.b = floored(margin_quadratic(s, d) / s.tau);
    return out;
}

GigParams fc_tau(const ParafacState& s, const ParafacPriorConfig& c) {
    double qsum = 0.0;
    for (const auto& g : s.margins.margins[0]) qsum += static_cast<double>(g.size());
    double b = 0.0;
    for (int d = 0; d < s.margins.rank; ++d) b += margin_quadratic(s, d) / s.zeta(d);
    GigParams out;
    out.p = c.a_tau - static_cast<double>(s.margins.rank) * qsum / 2.0;
    out.a = 2.0 * c.b_tau;
    out.b = floored(b);
    return out;
}

std::pair<double, double> fc_lambda(int d, int m, const ParafacState& s, const ParafacPriorConfig& c) {
    const Eigen::VectorXd& g = s.margins.margins[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)];
    const double shape = c.a_lambda + static_cast<double>(g.size());
    const double rate = g.array().abs().sum() / std::sqrt(s.tau * s.zeta(d)) + c.b_lambda;
    return {shape, rate};
}

GigParams fc_w(int d, int m, int j, const ParafacState& s) {
    const double lam = s.lambda[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)];
    const double g = s.margins.margins[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)](j);
    GigParams out;
    out.p = 0.5;
    out.a = lam * lam;
    out.b = g * g / (s.tau * s.zeta(d));
    return out;
}

namespace {

// <component-d coefficient, x> for every observation.
Eigen::VectorXd component_inner(const ParafacState& s, const CompressedDataset& data, int d) {
    const int t_count = data.size();
    const int last = s.margins.order() - 1;
    Eigen::VectorXd out(t_count);
    const Eigen::VectorXd& g_last = s.margins.margins[static_cast<std::size_t>(d)][static_cast<std::size_t>(last)];
    for (int t = 0; t < t_count; ++t)
        out(t) = g_last.dot(partial_parafac_contract(data.x[static_cast<std::size_t>(t)], s.margins, d, last));
    return out;
}

}  // namespace

MvnNatural fc_margin(int d, int m, const ParafacState& s, const CompressedDataset& data) {
    const int t_count = data.size();
    const Eigen::VectorXd& g = s.margins.margins[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)];
    const int q = static_cast<int>(g.size());

    // Residual contribution of the other components.
    Eigen::VectorXd rest = Eigen::VectorXd::Zero(t_count);
    for (int dd = 0; dd < s.margins.rank; ++dd) {
        if (dd == d) continue;
        rest += component_inner(s, data, dd);
    }

    Eigen::MatrixXd psi(t_count, q);
    for (int t = 0; t < t_count; ++t)
        psi.row(t) = partial_parafac_contract(data.x[static_cast<std::size_t>(t)], s.margins, d, m).transpose();

    MvnNatural out;
    out.precision = psi.transpose() * psi / s.sigma2;
    const Eigen::VectorXd& wv = s.w[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)];
    out.precision.diagonal() += ((1.0 / (s.tau * s.zeta(d))) / wv.array()).matrix();
    const Eigen::VectorXd resid = data.y.array() - s.mu - rest.array();
    out.linear = psi.transpose() * resid / s.sigma2;
    return out;
}

std::pair<double, double> fc_sigma2(const ParafacState& s, const CompressedDataset& data,
                                    const ParafacPriorConfig& c) {
    const DenseTensor b = s.coefficient();
    double rss = 0.0;
    for (int t = 0; t < data.size(); ++t) {
        const double r = data.y(t) - inner(b, data.x[static_cast<std::size_t>(t)]) - s.mu;
        rss += r * r;
    }
    return {c.a_sigma + data.size() / 2.0, c.b_sigma + rss / 2.0};
}

std::pair<double, double> fc_mu(const ParafacState& s, const CompressedDataset& data,
                                const ParafacPriorConfig& c) {
    const double t_count = static_cast<double>(data.size());
    const double var = 1.0 / (t_count / s.sigma2 + 1.0 / c.sigma2_mu);
    const DenseTensor b = s.coefficient();
    double sum = 0.0;
    for (int t = 0; t < data.size(); ++t)
        sum += data.y(t) - inner(b, data.x[static_cast<std::size_t>(t)]);
    return {var * sum / s.sigma2, var};
}

ParafacState draw_parafac_prior(const ParafacPriorConfig& c, const std::vector<int>& shape,
                                RngStream& rng) {
    c.validate();
    const int d_rank = c.rank;
    const int order = static_cast<int>(shape.size());

    ParafacState s;
    s.tau = sample_gamma(c.a_tau, c.b_tau, rng);
    s.zeta = sample_dirichlet(Eigen::VectorXd::Constant(d_rank, c.alpha), rng);
    s.lambda.assign(static_cast<std::size_t>(d_rank), std::vector<double>(static_cast<std::size_t>(order)));
    s.w.assign(static_cast<std::size_t>(d_rank), std::vector<Eigen::VectorXd>(static_cast<std::size_t>(order)));
    s.margins.rank = d_rank;
    s.margins.margins.assign(static_cast<std::size_t>(d_rank),
                             std::vector<Eigen::VectorXd>(static_cast<std::size_t>(order)));
    for (int d = 0; d < d_rank; ++d) {
        for (int m = 0; m < order; ++m) {
            const int q = shape[static_cast<std::size_t>(m)];
            const double lam = sample_gamma(c.a_lambda, c.b_lambda, rng);
            s.lambda[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)] = lam;
            Eigen::VectorXd wv(q), gv(q);
            for (int j = 0; j < q; ++j) wv(j) = rng.exponential(lam * lam / 2.0);
            const double scale = s.tau * s.zeta(d);
            for (int j = 0; j < q; ++j) gv(j) = std::sqrt(scale * wv(j)) * rng.normal();
            s.w[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)] = std::move(wv);
            s.margins.margins[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)] = std::move(gv);
        }
    }
    s.sigma2 = sample_inverse_gamma(c.a_sigma, c.b_sigma, rng);
    s.mu = std::sqrt(c.sigma2_mu) * rng.normal();
    return s;
}

void redraw_responses(CompressedDataset& data, const ParafacState& s, RngStream& rng) {
    const DenseTensor b = s.coefficient();
    const double sd = std::sqrt(s.sigma2);
    for (int t = 0; t < data.size(); ++t)
        data.y(t) = s.mu + inner(b, data.x[static_cast<std::size_t>(t)]) + sd * rng.normal();
}

namespace {

void zeta_block(ParafacState& s, const ParafacPriorConfig& c, ZetaUpdate mode, RngStream& rng) {
    const int d_rank = s.margins.rank;
    Eigen::VectorXd b_terms(d_rank), raw(d_rank);
    double p_sum = 0.0;
    for (int d = 0; d < d_rank; ++d) {
        const GigParams g = fc_zeta(d, s, c);
        if (g.p >= 0.0)
            throw parameter_error("zeta block: alpha must be smaller than half the margin dimensions");
        b_terms(d) = g.b;
        p_sum += g.p;
        raw(d) = sample_gig(g, rng);
    }
    Eigen::VectorXd proposal = raw / raw.sum();
    Eigen::Index imax;
    proposal.maxCoeff(&imax);
    proposal(imax) = 1.0 - (proposal.sum() - proposal(imax));

    if (mode == ZetaUpdate::Renormalize) {
        s.zeta = proposal;
        return;
    }
    // Independence accept/reject toward the simplex-constrained conditional.
    // The renormalized-GIG proposal density differs from the target only
    // through S = sum_d b_d / zeta_d: target carries exp(-S/2), proposal S^P.
    const double s_cur = (b_terms.array() / s.zeta.array()).sum();
    const double s_new = (b_terms.array() / proposal.array()).sum();
    const double log_accept = -0.5 * (s_new - s_cur) - p_sum * (std::log(s_new) - std::log(s_cur));
    if (std::log(rng.uniform01()) <= log_accept) s.zeta = proposal;
}

}  // namespace

void parafac_sweep(ParafacState& s, const CompressedDataset& data, const ParafacPriorConfig& c,
                   ZetaUpdate zeta_update, RngStream& rng) {
    const int d_rank = s.margins.rank;
    const int order = s.margins.order();

    for (int d = 0; d < d_rank; ++d) {
        for (int m = 0; m < order; ++m) {
            const MvnNatural fc = fc_margin(d, m, s, data);
            s.margins.margins[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)] =
                sample_mvn_from_precision(fc.linear, fc.precision, rng);
        }
    }
    zeta_block(s, c, zeta_update, rng);
    s.tau = sample_gig(fc_tau(s, c), rng);
    for (int d = 0; d < d_rank; ++d) {
        for (int m = 0; m < order; ++m) {
            const auto [shape, rate] = fc_lambda(d, m, s, c);
            s.lambda[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)] = sample_gamma(shape, rate, rng);
        }
    }
    for (int d = 0; d < d_rank; ++d) {
        for (int m = 0; m < order; ++m) {
            Eigen::VectorXd& wv = s.w[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)];
            for (int j = 0; j < wv.size(); ++j) wv(j) = std::max(sample_gig(fc_w(d, m, j, s), rng), kPositiveFloor);
        }
    }
    {
        const auto [shape, rate] = fc_sigma2(s, data, c);
        s.sigma2 = sample_inverse_gamma(shape, rate, rng);
    }
    {
        const auto [mean, var] = fc_mu(s, data, c);
        s.mu = mean + std::sqrt(var) * rng.normal();
    }
}

ChainOutput run_parafac_chain(const CompressedDataset& data, const ParafacPriorConfig& c,
                              const McmcConfig& mcmc, std::uint64_t seed, ZetaUpdate zeta_update) {
    data.validate();
    c.validate();
    mcmc.validate();

    RngStream rng(seed);
    ParafacState s = draw_parafac_prior(c, data.x.front().shape(), rng);

    ChainOutput out;
    out.iterations = mcmc.iterations;
    out.burn_in = mcmc.burn_in;
    out.thin = mcmc.thin;
    out.seed = seed;

    ParafacScaleSummary scales;
    scales.zeta = Eigen::VectorXd::Zero(c.rank);
    scales.w.assign(static_cast<std::size_t>(c.rank),
                    std::vector<Eigen::VectorXd>(static_cast<std::size_t>(s.margins.order())));
    for (int d = 0; d < c.rank; ++d)
        for (int m = 0; m < s.margins.order(); ++m)
            scales.w[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)] =
                Eigen::VectorXd::Zero(data.x.front().dim(m));
    scales.tau = 0.0;

    for (int it = 1; it <= mcmc.iterations; ++it) {
        try {
            parafac_sweep(s, data, c, zeta_update, rng);
        } catch (const std::exception& e) {
            throw numeric_error("parafac chain aborted at iteration " + std::to_string(it) + ": " + e.what());
        }
        if (it > mcmc.burn_in && (it - mcmc.burn_in - 1) % mcmc.thin == 0) {
            ChainDraw draw;
            draw.coefficient = s.coefficient();
            draw.mu = s.mu;
            draw.sigma2 = s.sigma2;
            draw.margins = s.margins;
            out.draws.push_back(std::move(draw));
            scales.tau += s.tau;
            scales.zeta += s.zeta;
            for (int d = 0; d < c.rank; ++d)
                for (int m = 0; m < s.margins.order(); ++m)
                    scales.w[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)] +=
                        s.w[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)];
        }
    }
    const double n_ret = static_cast<double>(out.draws.size());
    scales.tau /= n_ret;
    scales.zeta /= n_ret;
    for (auto& wd : scales.w)
        for (auto& wm : wd) wm /= n_ret;
    out.scale_summary = std::move(scales);
    return out;
}

void GaussianPriorConfig::validate() const {
    if (mode_covariances.empty()) throw parameter_error("gaussian prior: need one covariance per mode");
    for (const auto& cov : mode_covariances) {
        if (cov.rows() != cov.cols()) throw shape_error("gaussian prior: covariances must be square");
        if (!cov.isApprox(cov.transpose(), 1e-10))
            throw parameter_error("gaussian prior: covariances must be symmetric");
    }
    if (!(a_sigma > 0.0) || !(b_sigma > 0.0) || !(sigma2_mu > 0.0))
        throw parameter_error("gaussian prior: hyperparameters must be positive");
}

GaussianPriorConfig GaussianPriorConfig::identity(const std::vector<int>& shape, double scale) {
    GaussianPriorConfig c;
    for (int p : shape)
        c.mode_covariances.push_back(scale * Eigen::MatrixXd::Identity(p, p));
    return c;
}

Eigen::MatrixXd separable_covariance(const std::vector<Eigen::MatrixXd>& mode_covariances) {
    // First mode fastest: kron(Sigma_M, ..., Sigma_1).
    Eigen::MatrixXd acc = mode_covariances.front();
    for (std::size_t m = 1; m < mode_covariances.size(); ++m) {
        const Eigen::MatrixXd& s = mode_covariances[m];
        Eigen::MatrixXd next(acc.rows() * s.rows(), acc.cols() * s.cols());
        for (Eigen::Index i = 0; i < s.rows(); ++i)
            for (Eigen::Index j = 0; j < s.cols(); ++j)
                next.block(i * acc.rows(), j * acc.cols(), acc.rows(), acc.cols()) = s(i, j) * acc;
        acc = std::move(next);
    }
    return acc;
}

ChainOutput run_gaussian_chain(const CompressedDataset& data, const GaussianPriorConfig& c,
                               const McmcConfig& mcmc, std::uint64_t seed,
                               const GaussianChainOptions& options) {
    data.validate();
    c.validate();
    mcmc.validate();
    const std::vector<int>& shape = data.x.front().shape();
    if (c.mode_covariances.size() != shape.size())
        throw shape_error("gaussian chain: one covariance per compressed mode required");
    for (std::size_t m = 0; m < shape.size(); ++m)
        if (c.mode_covariances[m].rows() != shape[m])
            throw shape_error("gaussian chain: covariance size must match compressed mode");

    const int t_count = data.size();
    const Eigen::Index q = data.x.front().size();
    Eigen::MatrixXd x_rows(t_count, q);
    for (int t = 0; t < t_count; ++t) x_rows.row(t) = data.x[static_cast<std::size_t>(t)].vec().transpose();

    const Eigen::MatrixXd gram = x_rows.transpose() * x_rows;
    Eigen::LLT<Eigen::MatrixXd> prior_llt(separable_covariance(c.mode_covariances));
    if (prior_llt.info() != Eigen::Success)
        throw numeric_error("gaussian chain: prior covariance is not positive definite");
    const Eigen::MatrixXd prior_precision = prior_llt.solve(Eigen::MatrixXd::Identity(q, q));

    RngStream rng(seed);
    double sigma2 = options.fixed_sigma2.value_or(c.b_sigma / std::max(c.a_sigma - 1.0, 0.5));
    double mu = options.fixed_mu.value_or(0.0);
    Eigen::VectorXd b_vec = Eigen::VectorXd::Zero(q);

    ChainOutput out;
    out.iterations = mcmc.iterations;
    out.burn_in = mcmc.burn_in;
    out.thin = mcmc.thin;
    out.seed = seed;

    for (int it = 1; it <= mcmc.iterations; ++it) {
        try {
            Eigen::MatrixXd precision = gram / sigma2 + prior_precision;
            Eigen::VectorXd h = x_rows.transpose() * (data.y.array() - mu).matrix() / sigma2;
            b_vec = sample_mvn_from_precision(h, precision, rng);

            const Eigen::VectorXd fitted = x_rows * b_vec;
            if (!options.fixed_sigma2) {
                const double rss = (data.y.array() - mu - fitted.array()).square().sum();
                sigma2 = sample_inverse_gamma(c.a_sigma + t_count / 2.0, c.b_sigma + rss / 2.0, rng);
            }
            if (!options.fixed_mu) {
                const double var = 1.0 / (t_count / sigma2 + 1.0 / c.sigma2_mu);
                const double mean = var * (data.y - fitted).sum() / sigma2;
                mu = mean + std::sqrt(var) * rng.normal();
            }
        } catch (const std::exception& e) {
            throw numeric_error("gaussian chain aborted at iteration " + std::to_string(it) + ": " + e.what());
        }
        if (it > mcmc.burn_in && (it - mcmc.burn_in - 1) % mcmc.thin == 0) {
            ChainDraw draw;
            draw.coefficient = DenseTensor(shape, std::vector<double>(b_vec.data(), b_vec.data() + q));
            draw.mu = mu;
            draw.sigma2 = sigma2;
            out.draws.push_back(std::move(draw));
        }
    }
    return out;
}

}  // namespace ctrp
