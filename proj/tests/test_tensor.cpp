#include "ctrp/tensor.hpp"

#include <doctest.h>

#include "ctrp/errors.hpp"
#include "test_support.hpp"

using namespace ctrp;
using ctrp_test::random_tensor;

namespace {

DenseTensor matrix2x2(double a11, double a12, double a21, double a22) {
    // First mode fastest: columns stack.
    return DenseTensor({2, 2}, {a11, a21, a12, a22});
}

}  // namespace

TEST_CASE("mode product contracts the requested mode") {
    const DenseTensor t = matrix2x2(1, 2, 3, 4);
    Eigen::MatrixXd h(1, 2);
    h << 1, 1;
    const DenseTensor out = mode_product(t, h, 0);
    CHECK(out.shape() == std::vector<int>{1, 2});
    CHECK(out[0] == doctest::Approx(4.0));
    CHECK(out[1] == doctest::Approx(6.0));
}

TEST_CASE("mode product with the identity is exact") {
    RngStream rng(7);
    const DenseTensor t = random_tensor({3, 4, 2}, rng);
    for (int m = 0; m < 3; ++m) {
        const DenseTensor out = mode_product(t, Eigen::MatrixXd::Identity(t.dim(m), t.dim(m)), m);
        for (std::int64_t i = 0; i < t.size(); ++i) CHECK(out[i] == t[i]);
    }
}

TEST_CASE("preserving one mode reduces to row-wise combinations") {
    // 3x2 input, identity on mode 0, a 1x2 vector on mode 1.
    const DenseTensor t({3, 2}, {1, 2, 3, 4, 5, 6});  // t(i,j), first mode fastest
    Eigen::MatrixXd h2(1, 2);
    h2 << 0.5, -1.0;
    DenseTensor out = mode_product(t, Eigen::MatrixXd::Identity(3, 3), 0);
    out = mode_product(out, h2, 1);
    CHECK(out.shape() == std::vector<int>{3, 1});
    for (int i = 0; i < 3; ++i) {
        const int idx0[2] = {i, 0}, idx1[2] = {i, 1};
        CHECK(out[i] == doctest::Approx(0.5 * t.at(idx0) - 1.0 * t.at(idx1)));
    }
}

TEST_CASE("mode products along distinct modes commute") {
    RngStream rng(11);
    const DenseTensor t = random_tensor({3, 4, 2}, rng);
    Eigen::MatrixXd a(2, 3), b(5, 4);
    for (int i = 0; i < a.size(); ++i) a(i) = rng.normal();
    for (int i = 0; i < b.size(); ++i) b(i) = rng.normal();
    const DenseTensor ab = mode_product(mode_product(t, a, 0), b, 1);
    const DenseTensor ba = mode_product(mode_product(t, b, 1), a, 0);
    REQUIRE(ab.shape() == ba.shape());
    for (std::int64_t i = 0; i < ab.size(); ++i)
        CHECK(ab[i] == doctest::Approx(ba[i]).epsilon(1e-12));
}

TEST_CASE("mode range product: full contraction against an indicator block") {
    const DenseTensor t = matrix2x2(1, 2, 3, 4);
    // Block with one leading mode of size 1 and trailing modes (2,2): the
    // diagonal indicator picks out t11 + t22.
    const DenseTensor h({1, 2, 2}, {1, 0, 0, 1});
    const DenseTensor out = mode_range_product(t, h, 0, 1, 1);
    CHECK(out.shape() == std::vector<int>{1});
    CHECK(out[0] == doctest::Approx(5.0));
}

TEST_CASE("mode range product: delta block is the identity") {
    RngStream rng(3);
    const DenseTensor t = random_tensor({2, 3}, rng);
    DenseTensor h({2, 3, 2, 3});
    for (int j2 = 0; j2 < 3; ++j2)
        for (int j1 = 0; j1 < 2; ++j1) {
            const int idx[4] = {j1, j2, j1, j2};
            h.at(idx) = 1.0;
        }
    const DenseTensor out = mode_range_product(t, h, 0, 1, 2);
    REQUIRE(out.shape() == t.shape());
    for (std::int64_t i = 0; i < t.size(); ++i) CHECK(out[i] == doctest::Approx(t[i]));
}

TEST_CASE("mode range product: shape bookkeeping with a trailing kept mode") {
    RngStream rng(5);
    const DenseTensor t = random_tensor({2, 2, 2}, rng);
    DenseTensor h({3, 2, 2});
    for (std::int64_t i = 0; i < h.size(); ++i) h[i] = rng.normal();
    const DenseTensor out = mode_range_product(t, h, 0, 1, 1);
    CHECK(out.shape() == std::vector<int>{3, 2});
    // Brute-force contraction oracle.
    for (int k = 0; k < 3; ++k)
        for (int j3 = 0; j3 < 2; ++j3) {
            double expect = 0.0;
            for (int j1 = 0; j1 < 2; ++j1)
                for (int j2 = 0; j2 < 2; ++j2) {
                    const int ti[3] = {j1, j2, j3}, hi[3] = {k, j1, j2};
                    expect += t.at(ti) * h.at(hi);
                }
            const int oi[2] = {k, j3};
            CHECK(out.at(oi) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("mode range product rejects bad ranges") {
    const DenseTensor t = matrix2x2(1, 2, 3, 4);
    const DenseTensor h({1, 2, 2}, {1, 0, 0, 1});
    CHECK_THROWS_AS(mode_range_product(t, h, 1, 0, 1), shape_error);
    CHECK_THROWS_AS(mode_range_product(t, h, 0, 2, 1), shape_error);
    const DenseTensor bad({1, 3, 2}, std::vector<double>(6, 0.0));
    CHECK_THROWS_AS(mode_range_product(t, bad, 0, 1, 1), shape_error);
}

TEST_CASE("inner product and norm") {
    const DenseTensor t = matrix2x2(1, 2, 3, 4);
    const DenseTensor id = matrix2x2(1, 0, 0, 1);
    CHECK(inner(t, id) == doctest::Approx(5.0));
    const DenseTensor zero({2, 2});
    CHECK(inner(t, zero) == 0.0);
    RngStream rng(13);
    const DenseTensor a = random_tensor({4, 3}, rng);
    CHECK(inner(a, a) == doctest::Approx(frobenius_norm(a) * frobenius_norm(a)));
    CHECK(frobenius_norm(DenseTensor({1, 2}, {3, 4})) == doctest::Approx(5.0));
    CHECK(frobenius_norm(zero) == 0.0);
    CHECK_THROWS_AS(inner(t, DenseTensor({3})), shape_error);
}

TEST_CASE("inner product: bilinear, symmetric, Cauchy-Schwarz on 100 pairs") {
    RngStream rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const DenseTensor a = random_tensor({3, 2, 2}, rng);
        const DenseTensor b = random_tensor({3, 2, 2}, rng);
        CHECK(inner(a, b) == doctest::Approx(inner(b, a)));
        CHECK(std::abs(inner(a, b)) <= frobenius_norm(a) * frobenius_norm(b) * (1.0 + 1e-12));
        DenseTensor sum = a;
        for (std::int64_t i = 0; i < sum.size(); ++i) sum[i] = 2.0 * a[i] + 3.0 * b[i];
        CHECK(inner(sum, b) == doctest::Approx(2.0 * inner(a, b) + 3.0 * inner(b, b)));
    }
}

TEST_CASE("full matricization equals vectorization") {
    RngStream rng(19);
    const DenseTensor t = random_tensor({2, 3}, rng);
    const int modes[2] = {0, 1};
    const Eigen::MatrixXd m = matricize(t, modes);
    REQUIRE(m.rows() == 6);
    REQUIRE(m.cols() == 1);
    for (int i = 0; i < 6; ++i) CHECK(m(i, 0) == t[i]);
}

TEST_CASE("matricize round-trip is bit-exact") {
    RngStream rng(23);
    const DenseTensor t = random_tensor({3, 4, 2}, rng);
    const std::vector<std::vector<int>> mode_lists = {{0}, {1}, {2}, {1, 0}, {2, 1}, {0, 2, 1}};
    for (const auto& modes : mode_lists) {
        const Eigen::MatrixXd m = matricize(t, modes);
        const DenseTensor back = dematricize(m, modes, t.shape());
        for (std::int64_t i = 0; i < t.size(); ++i) CHECK(back[i] == t[i]);
    }
}

TEST_CASE("single-mode matricization matches the canonical matrix view") {
    RngStream rng(29);
    const DenseTensor t = random_tensor({2, 3}, rng);
    const int modes[1] = {0};
    const Eigen::MatrixXd m = matricize(t, modes);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 3);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) {
            const int idx[2] = {i, j};
            CHECK(m(i, j) == t.at(idx));
        }
}

TEST_CASE("matricize rejects duplicate or invalid modes") {
    const DenseTensor t = matrix2x2(1, 2, 3, 4);
    const int dup[2] = {0, 0};
    const int bad[1] = {2};
    CHECK_THROWS_AS(matricize(t, dup), shape_error);
    CHECK_THROWS_AS(matricize(t, bad), shape_error);
}

TEST_CASE("rank-1 compose is the outer product") {
    MarginSet ms;
    ms.rank = 1;
    ms.margins = {{Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)}};
    const DenseTensor b = parafac_compose(ms);
    CHECK(b.shape() == std::vector<int>{2, 2});
    const int i11[2] = {0, 0}, i12[2] = {0, 1}, i21[2] = {1, 0}, i22[2] = {1, 1};
    CHECK(b.at(i11) == doctest::Approx(3));
    CHECK(b.at(i12) == doctest::Approx(4));
    CHECK(b.at(i21) == doctest::Approx(6));
    CHECK(b.at(i22) == doctest::Approx(8));
}

TEST_CASE("a zero margin nullifies its component and compose is additive") {
    MarginSet two;
    two.rank = 2;
    two.margins = {{Eigen::Vector2d(1, 2), Eigen::Vector3d(3, 4, 5)},
                   {Eigen::Vector2d(-1, 1), Eigen::Vector3d(2, 0, 1)}};
    MarginSet first = two, second = two;
    first.rank = second.rank = 1;
    first.margins = {two.margins[0]};
    second.margins = {two.margins[1]};
    const DenseTensor sum = parafac_compose(two);
    const DenseTensor f = parafac_compose(first);
    const DenseTensor s = parafac_compose(second);
    for (std::int64_t i = 0; i < sum.size(); ++i) CHECK(sum[i] == doctest::Approx(f[i] + s[i]));

    MarginSet zeroed = two;
    zeroed.margins[1][0].setZero();
    const DenseTensor z = parafac_compose(zeroed);
    for (std::int64_t i = 0; i < z.size(); ++i) CHECK(z[i] == doctest::Approx(f[i]));
}

TEST_CASE("rank-1 compose matches a nested-loop oracle on all shapes up to 4x4x4") {
    RngStream rng(31);
    for (int p1 = 1; p1 <= 4; ++p1)
        for (int p2 = 1; p2 <= 4; ++p2)
            for (int p3 = 1; p3 <= 4; ++p3) {
                MarginSet ms;
                ms.rank = 1;
                ms.margins.resize(1);
                for (int p : {p1, p2, p3}) {
                    Eigen::VectorXd g(p);
                    for (int i = 0; i < p; ++i) g(i) = rng.normal();
                    ms.margins[0].push_back(g);
                }
                const DenseTensor b = parafac_compose(ms);
                for (int i = 0; i < p1; ++i)
                    for (int j = 0; j < p2; ++j)
                        for (int k = 0; k < p3; ++k) {
                            const int idx[3] = {i, j, k};
                            CHECK(b.at(idx) == doctest::Approx(ms.margins[0][0](i) * ms.margins[0][1](j) *
                                                               ms.margins[0][2](k)));
                        }
            }
}

TEST_CASE("partial contraction: row sums of the identity") {
    MarginSet ms;
    ms.rank = 1;
    ms.margins = {{Eigen::Vector2d(9, 9), Eigen::Vector2d(1, 1)}};  // skip mode margin unused
    const DenseTensor eye = matrix2x2(1, 0, 0, 1);
    const Eigen::VectorXd psi = partial_parafac_contract(eye, ms, 0, 0);
    REQUIRE(psi.size() == 2);
    CHECK(psi(0) == doctest::Approx(1.0));
    CHECK(psi(1) == doctest::Approx(1.0));
}

TEST_CASE("partial contraction of a zero tensor is zero") {
    MarginSet ms;
    ms.rank = 1;
    ms.margins = {{Eigen::Vector3d(1, 2, 3), Eigen::Vector2d(1, 1)}};
    const Eigen::VectorXd psi = partial_parafac_contract(DenseTensor({3, 2}), ms, 0, 1);
    CHECK(psi.norm() == 0.0);
}

TEST_CASE("partial contraction satisfies the inner-product identity") {
    RngStream rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        MarginSet ms;
        ms.rank = 1;
        ms.margins.resize(1);
        for (int p : {3, 3}) {
            Eigen::VectorXd g(p);
            for (int i = 0; i < p; ++i) g(i) = rng.normal();
            ms.margins[0].push_back(g);
        }
        const DenseTensor x = random_tensor({3, 3}, rng);
        const double direct = inner(parafac_compose(ms), x);
        for (int skip = 0; skip < 2; ++skip) {
            const Eigen::VectorXd psi = partial_parafac_contract(x, ms, 0, skip);
            CHECK(direct == doctest::Approx(ms.margins[0][static_cast<std::size_t>(skip)].dot(psi))
                                .epsilon(1e-10));
        }
    }
}

TEST_CASE("tensor construction validates shape against data") {
    CHECK_THROWS_AS(DenseTensor({2, 2}, {1, 2, 3}), shape_error);
    CHECK_THROWS_AS(DenseTensor({0, 2}), shape_error);
    CHECK_THROWS_AS(partial_parafac_contract(DenseTensor({2, 2}),
                                             MarginSet{1, {{Eigen::Vector2d(1, 1)}}}, 0, 0),
                    shape_error);
}
