#include "tenseg/cp_als.hpp"
#include "tenseg/hosvd.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tenseg;
using tenseg::testing::random_matrix;
using tenseg::testing::random_tensor;
using tenseg::testing::relative_error;

namespace {

DenseTensor low_rank_tensor(const Shape& shape, std::size_t rank, std::uint64_t seed) {
    DenseTensor t(shape);
    std::vector<Vector> cols(shape.size());
    for (std::size_t l = 0; l < rank; ++l) {
        for (std::size_t k = 0; k < shape.size(); ++k)
            cols[k] = random_matrix(static_cast<Eigen::Index>(shape[k]), 1, seed * 100 + l * 10 + k).col(0);
        t.vec() += rank1_outer(cols).vec();
    }
    return t;
}

Vector vec_of(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

/// Squared singular values of unfold(t, mode), largest first.
Vector squared_singular_values(const DenseTensor& t, std::size_t mode) {
    Eigen::JacobiSVD<Matrix> svd(unfold(t, mode));
    return svd.singularValues().array().square();
}

}  // namespace

TEST(CpAls, RecoversExactRankOne) {
    const DenseTensor t = rank1_outer({vec_of({1, 2}), vec_of({3, 4}), vec_of({5, 6})});
    const CPModel m = cp_als(t, {.rank = 1, .seed = 7});
    EXPECT_LT(relative_error(m.reconstruct(), t), 1e-8);
    EXPECT_LT(m.relative_error, 1e-8);
    EXPECT_GT(m.weights[0], 0.0);
}

TEST(CpAls, ZeroTensor) {
    const CPModel m = cp_als(DenseTensor(Shape{3, 4, 5}), {.rank = 1});
    EXPECT_EQ(m.weights[0], 0.0);
    EXPECT_EQ(frobenius_norm(m.reconstruct()), 0.0);
    EXPECT_EQ(m.relative_error, 0.0);
}

TEST(CpAls, RecoversThreeTermTensorWithRestarts) {
    const DenseTensor t = low_rank_tensor({10, 10, 10}, 3, 3);
    const CPModel m = cp_als(t, {.rank = 3, .max_iters = 1000, .rel_tol = 1e-12, .seed = 11, .restarts = 5});
    EXPECT_LT(relative_error(m.reconstruct(), t), 1e-6);
}

TEST(CpAls, ErrorHistoryIsNonIncreasing) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const DenseTensor t = random_tensor({6, 5, 4}, 40 + seed);
        const CPModel m = cp_als(t, {.rank = 3, .max_iters = 60, .rel_tol = 1e-14, .seed = seed});
        ASSERT_FALSE(m.error_history.empty());
        for (std::size_t i = 1; i < m.error_history.size(); ++i)
            EXPECT_LE(m.error_history[i], m.error_history[i - 1] + 1e-10) << "seed " << seed << " sweep " << i;
    }
}

TEST(CpAls, ReportedErrorMatchesReconstruction) {
    const DenseTensor t = random_tensor({5, 6, 7}, 3);
    const CPModel m = cp_als(t, {.rank = 4, .max_iters = 50, .seed = 2});
    const double direct = (t.vec() - m.reconstruct().vec()).norm();
    EXPECT_NEAR(m.error_history.back(), direct, 1e-8 * frobenius_norm(t));
}

TEST(CpAls, FactorColumnsAreUnitNormAndWeightsSorted) {
    const DenseTensor t = random_tensor({4, 5, 6, 3}, 8);
    const CPModel m = cp_als(t, {.rank = 5, .max_iters = 30, .seed = 1});
    for (const auto& f : m.factors)
        for (Eigen::Index l = 0; l < f.cols(); ++l) EXPECT_NEAR(f.col(l).norm(), 1.0, 1e-9);
    for (Eigen::Index l = 1; l < m.weights.size(); ++l)
        EXPECT_GE(std::abs(m.weights[l - 1]), std::abs(m.weights[l]));
    EXPECT_EQ(m.shape(), t.shape());
}

TEST(CpAls, ScaleEquivariance) {
    const DenseTensor t = random_tensor({5, 4, 6}, 9);
    const AlsConfig cfg{.rank = 3, .max_iters = 40, .seed = 5};
    const CPModel a = cp_als(t, cfg);
    for (double c : {0.5, 3.0}) {
        const CPModel b = cp_als(c * t, cfg);
        ASSERT_EQ(a.rank(), b.rank());
        for (Eigen::Index l = 0; l < a.weights.size(); ++l)
            EXPECT_NEAR(b.weights[l], c * a.weights[l], 1e-8 * c * std::abs(a.weights[0]));
        for (std::size_t k = 0; k < a.factors.size(); ++k)
            for (Eigen::Index l = 0; l < a.weights.size(); ++l) {
                const double dot = std::abs(a.factors[k].col(l).dot(b.factors[k].col(l)));
                EXPECT_NEAR(dot, 1.0, 1e-8);
            }
    }
}

TEST(CpAls, DeterministicForFixedSeed) {
    const DenseTensor t = random_tensor({4, 4, 4}, 12);
    const AlsConfig cfg{.rank = 2, .seed = 99, .restarts = 3};
    const CPModel a = cp_als(t, cfg);
    const CPModel b = cp_als(t, cfg);
    EXPECT_EQ(a.weights, b.weights);
    for (std::size_t k = 0; k < a.factors.size(); ++k) EXPECT_EQ(a.factors[k], b.factors[k]);
}

TEST(CpAls, RankAboveExtentsUsesPseudoInverse) {
    const DenseTensor t = random_tensor({2, 2, 2}, 13);
    const CPModel m = cp_als(t, {.rank = 6, .max_iters = 50, .seed = 3});
    EXPECT_EQ(m.rank(), 6u);
    for (Eigen::Index l = 0; l < m.weights.size(); ++l) EXPECT_TRUE(std::isfinite(m.weights[l]));
}

TEST(CpAls, RejectsBadInput) {
    DenseTensor t = random_tensor({3, 3, 3}, 14);
    EXPECT_THROW((void)cp_als(t, {.rank = 0}), std::invalid_argument);
    EXPECT_THROW((void)cp_als(DenseTensor(Shape{5}), {.rank = 1}), std::invalid_argument);
    t[4] = std::nan("");
    EXPECT_THROW((void)cp_als(t, {.rank = 1}), std::invalid_argument);
}

TEST(TimeSeriesFromCp, Examples) {
    CPModel m;
    m.weights = Vector::Constant(1, 2.0);
    m.factors = {Matrix::Ones(3, 1), Matrix::Ones(5, 1)};
    EXPECT_EQ(time_series_from_cp(m, 2), Matrix::Constant(1, 5, 2.0));

    CPModel z;
    z.weights = vec_of({1.5, 0.0, -2.0});
    Matrix u(2, 3);
    u << 1, 2, 3, 4, 5, 6;
    z.factors = {Matrix::Ones(4, 3), u};
    const Matrix s = time_series_from_cp(z, 2);
    ASSERT_EQ(s.rows(), 3);
    ASSERT_EQ(s.cols(), 2);
    const double expected[3][2] = {{1.5 * 1, 1.5 * 4}, {0, 0}, {-2.0 * 3, -2.0 * 6}};
    for (Eigen::Index l = 0; l < 3; ++l)
        for (Eigen::Index t = 0; t < 2; ++t) EXPECT_EQ(s(l, t), expected[l][t]);
    EXPECT_THROW((void)time_series_from_cp(z, 3), std::out_of_range);
}

TEST(Hosvd, FullRankReconstructs) {
    const DenseTensor t = random_tensor({4, 4, 4}, 15);
    const HOSVDModel m = hosvd(t, {4, 4, 4});
    EXPECT_LT(relative_error(m.reconstruct(), t), 1e-9);
}

TEST(Hosvd, RankOneTensor) {
    const DenseTensor t = rank1_outer({vec_of({1, -2, 3}), vec_of({0.5, 4}), vec_of({2, 1, 1, 3})});
    const HOSVDModel m = hosvd(t, {1, 1, 1});
    EXPECT_LT(relative_error(m.reconstruct(), t), 1e-8);
}

TEST(Hosvd, TruncationMatchesDenseSvdOracle) {
    const DenseTensor t = random_tensor({5, 5, 5}, 16);
    const HOSVDModel m = hosvd(t, {2, 2, 2});
    // independent oracle: projectors from JacobiSVD of each unfolding
    DenseTensor approx = t;
    for (std::size_t k = 1; k <= 3; ++k) {
        Eigen::JacobiSVD<Matrix> svd(unfold(t, k), Eigen::ComputeThinU);
        const Matrix u = svd.matrixU().leftCols(2);
        approx = mode_product(approx, u * u.transpose(), k);
    }
    const double oracle = (t.vec() - approx.vec()).norm();
    const double got = (t.vec() - m.reconstruct().vec()).norm();
    EXPECT_NEAR(got, oracle, 1e-8);
}

TEST(Hosvd, FactorsAreOrthonormal) {
    const DenseTensor t = random_tensor({6, 5, 7, 3}, 17);
    const HOSVDModel m = hosvd(t, {3, 5, 2, 2});
    for (const auto& u : m.factors) {
        const Matrix g = u.transpose() * u;
        EXPECT_LT((g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff(), 1e-9);
    }
    EXPECT_EQ(m.core.shape(), (Shape{3, 5, 2, 2}));
}

TEST(Hosvd, TruncationErrorBound) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const DenseTensor t = random_tensor({6, 5, 4}, 30 + seed);
        const std::vector<std::size_t> ranks{3, 2, 2};
        const HOSVDModel m = hosvd(t, ranks);
        const double err2 = (t.vec() - m.reconstruct().vec()).squaredNorm();
        double bound = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            const Vector s2 = squared_singular_values(t, k + 1);
            bound += s2.tail(s2.size() - static_cast<Eigen::Index>(ranks[k])).sum();
        }
        EXPECT_LE(err2, bound * (1 + 1e-12));
    }
}

TEST(Hosvd, RejectsBadRanks) {
    const DenseTensor t = random_tensor({3, 3, 3}, 18);
    EXPECT_THROW((void)hosvd(t, {4, 1, 1}), std::invalid_argument);
    EXPECT_THROW((void)hosvd(t, {0, 1, 1}), std::invalid_argument);
    EXPECT_THROW((void)hosvd(t, {1, 1}), std::invalid_argument);
}

TEST(TimeSeriesFromHosvd, RankOneIsScaledLeadingSingularVector) {
    const DenseTensor t = random_tensor({4, 3, 9}, 19);
    const Matrix s = time_series_from_hosvd(hosvd(t, {4, 3, 1}), 3);
    ASSERT_EQ(s.rows(), 1);
    ASSERT_EQ(s.cols(), 9);
    Eigen::JacobiSVD<Matrix> svd(unfold(t, 3), Eigen::ComputeThinU);
    const Vector expected = svd.singularValues()[0] * svd.matrixU().col(0);
    // equal up to the sign of the singular vector
    const double sign = expected.dot(s.row(0).transpose()) < 0 ? -1.0 : 1.0;
    EXPECT_LT((s.row(0).transpose() - sign * expected).norm(), 1e-9 * expected.norm());
}

TEST(TimeSeriesFromHosvd, RowsOrthogonalAndZeroCase) {
    const DenseTensor t = random_tensor({4, 4, 6}, 20);
    const Matrix s = time_series_from_hosvd(hosvd(t, {4, 4, 3}), 3);
    const Matrix g = s * s.transpose();
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            if (i != j) {
                EXPECT_NEAR(g(i, j), 0.0, 1e-9 * g.diagonal().maxCoeff());
            }

    const Matrix zero = time_series_from_hosvd(hosvd(DenseTensor(Shape{3, 3, 5}), {2, 2, 2}), 3);
    EXPECT_EQ(zero.cwiseAbs().maxCoeff(), 0.0);
}
