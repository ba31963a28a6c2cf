#include "tenseg/tensor.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tenseg;
using tenseg::testing::random_matrix;
using tenseg::testing::random_tensor;
using tenseg::testing::unravel;

TEST(DenseTensor, RejectsBadShapes) {
    EXPECT_THROW(DenseTensor(Shape{}), std::invalid_argument);
    EXPECT_THROW(DenseTensor(Shape{2, 0}), std::invalid_argument);
    EXPECT_THROW(DenseTensor(Shape{2, 2}, std::vector<double>(3)), std::invalid_argument);
}

TEST(DenseTensor, VecOrderIsModeOneFastest) {
    const Shape shape{2, 3, 4};
    DenseTensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 3; ++b)
            for (std::size_t c = 0; c < 4; ++c) {
                const std::vector<std::size_t> idx{a, b, c};
                EXPECT_EQ(t(idx), static_cast<double>(a + 2 * (b + 3 * c)));
            }
    const std::vector<std::size_t> bad{2, 0, 0};
    EXPECT_THROW((void)t(bad), std::out_of_range);
}

TEST(Unfold, MatrixModeOneIsIdentity) {
    DenseTensor t(Shape{2, 2}, {1, 2, 3, 4});
    Matrix expected(2, 2);
    expected << 1, 3, 2, 4;
    EXPECT_EQ(unfold(t, 1), expected);
}

TEST(Unfold, ShapeArithmetic) {
    const auto t = random_tensor({2, 3, 4}, 1);
    const Matrix m = unfold(t, 2);
    EXPECT_EQ(m.rows(), 3);
    EXPECT_EQ(m.cols(), 8);
    EXPECT_THROW((void)unfold(t, 0), std::out_of_range);
    EXPECT_THROW((void)unfold(t, 4), std::out_of_range);
}

TEST(Unfold, ColumnEnumerationOnLabelledEntries) {
    const Shape shape{2, 2, 2};
    DenseTensor t(shape);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k) {
                const std::vector<std::size_t> idx{i, j, k};
                t(idx) = 100.0 * i + 10.0 * j + k;
            }
    const Matrix m = unfold(t, 1);
    // columns (j,k) = (0,0), (1,0), (0,1), (1,1)
    const std::size_t order[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    for (std::size_t col = 0; col < 4; ++col)
        for (std::size_t i = 0; i < 2; ++i)
            EXPECT_EQ(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)),
                      100.0 * i + 10.0 * order[col][0] + order[col][1]);
}

TEST(Unfold, MatchesDefinitionForEveryMode) {
    const Shape shape{3, 2, 4, 2};
    const auto t = random_tensor(shape, 2);
    for (std::size_t mode = 1; mode <= shape.size(); ++mode) {
        const Matrix m = unfold(t, mode);
        for (std::size_t flat = 0; flat < t.size(); ++flat) {
            const auto idx = unravel(flat, shape);
            std::size_t col = 0;
            std::size_t stride = 1;
            for (std::size_t k = 0; k < shape.size(); ++k) {
                if (k + 1 == mode) continue;
                col += idx[k] * stride;
                stride *= shape[k];
            }
            EXPECT_EQ(m(static_cast<Eigen::Index>(idx[mode - 1]), static_cast<Eigen::Index>(col)), t[flat]);
        }
    }
}

TEST(Fold, RoundTripIsExact) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Shape shape{2, 2, 2};
        const auto t = random_tensor(shape, seed);
        for (std::size_t mode = 1; mode <= 3; ++mode) EXPECT_EQ(fold(unfold(t, mode), mode, shape), t);
    }
    const auto t = random_tensor({2, 3, 4}, 9);
    const DenseTensor f = fold(unfold(t, 2), 2, {2, 3, 4});
    EXPECT_EQ(f.shape(), (Shape{2, 3, 4}));
    EXPECT_EQ(f, t);
}

TEST(Fold, RejectsDimensionMismatch) {
    EXPECT_THROW((void)fold(Matrix::Zero(3, 7), 2, {2, 3, 4}), std::invalid_argument);
    EXPECT_THROW((void)fold(Matrix::Zero(2, 12), 2, {2, 3, 4}), std::invalid_argument);
}

TEST(ModeProduct, IdentityLeavesTensorUnchanged) {
    const auto t = random_tensor({2, 3, 4}, 3);
    for (std::size_t mode = 1; mode <= 3; ++mode) {
        const auto n = static_cast<Eigen::Index>(t.extent(mode));
        EXPECT_EQ(mode_product(t, Matrix::Identity(n, n), mode), t);
    }
}

TEST(ModeProduct, RowOfOnesSumsTheMode) {
    const auto t = random_tensor({2, 3, 4}, 4);
    const DenseTensor s = mode_product(t, Matrix::Ones(1, 3), 2);
    EXPECT_EQ(s.shape(), (Shape{2, 1, 4}));
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t c = 0; c < 4; ++c) {
            double sum = 0.0;
            for (std::size_t b = 0; b < 3; ++b) sum += t(std::vector<std::size_t>{a, b, c});
            EXPECT_NEAR(s(std::vector<std::size_t>{a, 0, c}), sum, 1e-12);
        }
}

TEST(ModeProduct, MatchesFoldedMatrixProduct) {
    const auto t = random_tensor({2, 3, 4}, 5);
    const Matrix m = random_matrix(5, 3, 6);
    const DenseTensor y = mode_product(t, m, 2);
    const DenseTensor expected = fold(m * unfold(t, 2), 2, {2, 5, 4});
    EXPECT_LT(tenseg::testing::relative_error(y, expected), 1e-12);
}

TEST(ModeProduct, UnfoldingIdentityOnRandomInputs) {
    const Shape shape{3, 4, 2, 5};
    const auto t = random_tensor(shape, 7);
    for (std::size_t mode = 1; mode <= shape.size(); ++mode) {
        const Matrix m = random_matrix(3, static_cast<Eigen::Index>(shape[mode - 1]), 10 + mode);
        const Matrix lhs = unfold(mode_product(t, m, mode), mode);
        const Matrix rhs = m * unfold(t, mode);
        EXPECT_LT((lhs - rhs).norm() / rhs.norm(), 1e-12) << "mode " << mode;
    }
}

TEST(ModeProduct, RejectsInnerDimensionMismatch) {
    const auto t = random_tensor({2, 3, 4}, 8);
    EXPECT_THROW((void)mode_product(t, Matrix::Zero(2, 4), 2), std::invalid_argument);
}

TEST(FrobeniusNorm, Examples) {
    EXPECT_EQ(frobenius_norm(DenseTensor(Shape{3, 2})), 0.0);
    EXPECT_EQ(frobenius_norm(DenseTensor(Shape{1}, {3.0})), 3.0);
    EXPECT_DOUBLE_EQ(frobenius_norm(DenseTensor(Shape{2, 2}, {1, 3, 2, 4})), std::sqrt(30.0));
}

TEST(FrobeniusNorm, Homogeneity) {
    const auto t = random_tensor({3, 3, 3}, 11);
    for (double c : {-2.5, 0.1, 7.0})
        EXPECT_NEAR(frobenius_norm(c * t), std::abs(c) * frobenius_norm(t), 1e-12 * frobenius_norm(t) * std::abs(c));
}

TEST(Rank1Outer, Examples) {
    EXPECT_EQ(rank1_outer({Vector::Ones(2), Vector::Ones(3)}), DenseTensor(Shape{2, 3}, std::vector<double>(6, 1.0)));

    Vector v1(2), v2(2);
    v1 << 1, 2;
    v2 << 3, 4;
    const DenseTensor m = rank1_outer({v1, v2});
    EXPECT_EQ(m(std::vector<std::size_t>{0, 0}), 3.0);
    EXPECT_EQ(m(std::vector<std::size_t>{0, 1}), 4.0);
    EXPECT_EQ(m(std::vector<std::size_t>{1, 0}), 6.0);
    EXPECT_EQ(m(std::vector<std::size_t>{1, 1}), 8.0);

    Vector z = Vector::Ones(3);
    z[1] = 0.0;
    const DenseTensor slab = rank1_outer({Vector::Ones(2), z, Vector::Ones(2)});
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(slab(std::vector<std::size_t>{a, 1, c}), 0.0);
}

TEST(Rank1Outer, VecIsReversedKronecker) {
    const Vector a = random_matrix(2, 1, 20).col(0);
    const Vector b = random_matrix(3, 1, 21).col(0);
    const Vector c = random_matrix(4, 1, 22).col(0);
    const DenseTensor t = rank1_outer({a, b, c});
    // c ⊗ b ⊗ a, written out by hand
    std::size_t i = 0;
    for (Eigen::Index k = 0; k < c.size(); ++k)
        for (Eigen::Index j = 0; j < b.size(); ++j)
            for (Eigen::Index l = 0; l < a.size(); ++l) EXPECT_DOUBLE_EQ(t[i++], c[k] * b[j] * a[l]);
}

TEST(Rank1Outer, RejectsEmptyInput) {
    EXPECT_THROW((void)rank1_outer(std::span<const Vector>{}), std::invalid_argument);
}
