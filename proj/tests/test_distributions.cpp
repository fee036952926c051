#include "ctrp/distributions.hpp"

#include <doctest.h>

#include <cmath>

#include "ctrp/errors.hpp"
#include "test_support.hpp"

using namespace ctrp;
using ctrp_test::quadrature_moments;

TEST_CASE("gamma sampler matches its first two moments") {
    RngStream rng(101);
    const double shape = 3.5, rate = 2.0;
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_gamma(shape, rate, rng);
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double se_mean = std::sqrt(shape / (rate * rate) / n);
    CHECK(std::abs(mean - shape / rate) < 3.0 * se_mean);
    CHECK(var == doctest::Approx(shape / (rate * rate)).epsilon(0.05));
}

TEST_CASE("inverse gamma mean identity") {
    RngStream rng(102);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_inverse_gamma(3.0, 1.0, rng);
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::abs(mean - 0.5) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("gig gamma limit: b = 0 with p > 0") {
    RngStream rng(103);
    const GigParams g{2.5, 3.0, 0.0};
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_gig(g, rng);
    const double mean = sum / n;
    const double expect = 2.0 * g.p / g.a;  // Gamma(p, a/2) mean
    const double se = std::sqrt(g.p / ((g.a / 2) * (g.a / 2)) / n);
    CHECK(std::abs(mean - expect) < 3.0 * se);
}

TEST_CASE("gig inverse-gamma limit: a = 0 with p < 0") {
    RngStream rng(104);
    const GigParams g{-3.0, 0.0, 4.0};  // InverseGamma(3, 2), mean 1
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_gig(g, rng);
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::abs(mean - 1.0) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("gig interior case matches the quadrature oracle") {
    const GigParams g{0.5, 2.0, 3.0};
    RngStream rng(105);
    const int n = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_gig(g, rng);
        sum += x;
        sum2 += x * x;
    }
    const auto oracle =
        quadrature_moments([&](double x) { return gig_log_unnorm(x, g); }, 1e-9, 60.0);
    CHECK(sum / n == doctest::Approx(oracle.mean).epsilon(0.01));
    CHECK(sum2 / n == doctest::Approx(oracle.second).epsilon(0.01));
}

TEST_CASE("gig with negative index and both parameters positive") {
    const GigParams g{-1.75, 200.0, 7.0};
    RngStream rng(106);
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_gig(g, rng);
    const auto oracle =
        quadrature_moments([&](double x) { return gig_log_unnorm(x, g); }, 1e-9, 10.0);
    CHECK(sum / n == doctest::Approx(oracle.mean).epsilon(0.01));
}

TEST_CASE("gig rejects invalid corner parameters") {
    RngStream rng(107);
    CHECK_THROWS_AS(sample_gig({0.5, 0.0, 0.0}, rng), parameter_error);
    CHECK_THROWS_AS(sample_gig({-0.5, 2.0, 0.0}, rng), parameter_error);
    CHECK_THROWS_AS(sample_gig({0.5, 0.0, 2.0}, rng), parameter_error);
}

TEST_CASE("dirichlet draws close the simplex exactly") {
    RngStream rng(108);
    const int d = 5;
    const Eigen::VectorXd alpha = Eigen::VectorXd::Constant(d, 0.04);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd x = sample_dirichlet(alpha, rng);
        // Exact closure in the documented reduction order.
        Eigen::Index imax;
        x.maxCoeff(&imax);
        double rest = 0.0;
        for (Eigen::Index j = 0; j < d; ++j)
            if (j != imax) rest += x(j);
        CHECK(rest + x(imax) == 1.0);
        CHECK((x.array() > 0.0).all());
        mean += x;
    }
    mean /= n;
    for (int k = 0; k < d; ++k) CHECK(mean(k) == doctest::Approx(1.0 / d).epsilon(0.15));
}

TEST_CASE("mvn from identity precision gives standard normal margins") {
    RngStream rng(109);
    const int n = 10000;
    std::vector<double> first;
    first.reserve(n);
    const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::VectorXd h = Eigen::VectorXd::Zero(3);
    for (int i = 0; i < n; ++i) first.push_back(sample_mvn_from_precision(h, p, rng)(0));
    CHECK(ctrp_test::ks_p_value(first, ctrp_test::std_normal_cdf) > 0.001);
}

TEST_CASE("mvn natural parameterization: mean is P^-1 h and covariance P^-1") {
    RngStream rng(110);
    Eigen::MatrixXd p(2, 2);
    p << 4.0, 1.0, 1.0, 3.0;
    Eigen::VectorXd h(2);
    h << 2.0, -1.0;
    const Eigen::VectorXd mean_expect = p.ldlt().solve(h);
    const Eigen::MatrixXd cov_expect = p.inverse();
    const int n = 200000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(2, 2);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd x = sample_mvn_from_precision(h, p, rng);
        mean += x;
        second += x * x.transpose();
    }
    mean /= n;
    const Eigen::MatrixXd cov = second / n - mean * mean.transpose();
    for (int i = 0; i < 2; ++i) {
        CHECK(mean(i) == doctest::Approx(mean_expect(i)).epsilon(0.02));
        for (int j = 0; j < 2; ++j)
            CHECK(cov(i, j) == doctest::Approx(cov_expect(i, j)).epsilon(0.05));
    }
}

TEST_CASE("mvn rejects a non-PD precision") {
    RngStream rng(111);
    Eigen::MatrixXd p(2, 2);
    p << 1.0, 2.0, 2.0, 1.0;  // indefinite
    CHECK_THROWS_AS(sample_mvn_from_precision(Eigen::VectorXd::Zero(2), p, rng), numeric_error);
}

TEST_CASE("samplers are deterministic given the stream state") {
    RngStream a(42), b(42);
    for (int i = 0; i < 50; ++i) {
        CHECK(sample_gamma(2.0, 1.0, a) == sample_gamma(2.0, 1.0, b));
        CHECK(sample_gig({0.5, 1.0, 1.0}, a) == sample_gig({0.5, 1.0, 1.0}, b));
    }
}

TEST_CASE("substreams are order-independent") {
    RngStream s3 = RngStream::substream(9, 3);
    RngStream s7 = RngStream::substream(9, 7);
    RngStream s3_again = RngStream::substream(9, 3);
    CHECK(s3.next_u64() == s3_again.next_u64());
    RngStream s3_b = RngStream::substream(9, 3);
    s3_b.next_u64();
    CHECK(s7.next_u64() != s3_b.next_u64());
}
