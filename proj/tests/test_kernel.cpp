#include "test_support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace lstsvrpi;
using namespace lstsvrpi::testing;

TEST(KernelEval, RbfSelfSimilarityIsOne) {
    const vector x{ { 0.3, -2.0, 7.0 } };
    for (const double mu : { 0.01, 1.0, 100.0 }) {
        EXPECT_EQ(kernel_eval(x, x, kernel_spec::rbf(mu)), 1.0);
    }
}

TEST(KernelEval, RbfUnitWidth) {
    EXPECT_NEAR(kernel_eval(vector{ { 0.0, 0.0 } }, vector{ { 1.0, 1.0 } }, kernel_spec::rbf(1.0)), 0.367879, 5e-7);
}

TEST(KernelEval, LinearIsDot) {
    EXPECT_EQ(kernel_eval(vector{ { 1, 2 } }, vector{ { 3, 4 } }, kernel_spec::linear()), 11.0);
}

TEST(KernelEval, LengthMismatch) {
    EXPECT_THROW((void)kernel_eval(vector::Zero(2), vector::Zero(3), kernel_spec::linear()), data_error);
}

TEST(KernelSpec, InvalidWidth) {
    EXPECT_THROW(kernel_spec::rbf(0.0).validate(), usage_error);
    EXPECT_THROW(kernel_spec::rbf(-1.0).validate(), usage_error);
    EXPECT_THROW((void)parse_kernel_kind("poly"), usage_error);
}

TEST(Gram, RbfSelfGramUnitDiagonalSymmetric) {
    std::mt19937_64 rng{ 1 };
    const matrix a = uniform_matrix(rng, 3, 4);
    const matrix k = gram(a, a, kernel_spec::rbf(0.7));
    ASSERT_EQ(k.rows(), 3);
    ASSERT_EQ(k.cols(), 3);
    EXPECT_EQ(k.diagonal(), vector::Ones(3));
    EXPECT_EQ(k, k.transpose());
}

TEST(Gram, LinearSelfGramIsOuterProduct) {
    std::mt19937_64 rng{ 2 };
    const matrix a = uniform_matrix(rng, 5, 3);
    EXPECT_LE((gram(a, a, kernel_spec::linear()) - a * a.transpose()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Gram, CrossGramTransposes) {
    std::mt19937_64 rng{ 3 };
    const matrix a = uniform_matrix(rng, 4, 2);
    const matrix b = uniform_matrix(rng, 6, 2);
    for (const auto &spec : { kernel_spec::rbf(0.5), kernel_spec::linear() }) {
        EXPECT_EQ(gram(a, b, spec), gram(b, a, spec).transpose());
    }
}

TEST(Gram, PositiveSemidefinite) {
    std::mt19937_64 rng{ 4 };
    for (int t = 0; t < 20; ++t) {
        const matrix a = uniform_matrix(rng, uniform_int(rng, 2, 30), uniform_int(rng, 1, 5));
        const auto spec = t % 2 ? kernel_spec::rbf(log2_uniform(rng, -3, 2)) : kernel_spec::linear();
        const Eigen::SelfAdjointEigenSolver<matrix> eig{ gram(a, a, spec) };
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10 * std::max(1.0, eig.eigenvalues().maxCoeff()));
    }
}

TEST(Gram, DiagonalMatchesGram) {
    std::mt19937_64 rng{ 5 };
    const matrix a = uniform_matrix(rng, 6, 3);
    EXPECT_EQ(kernel_diagonal(a, kernel_spec::rbf(2.0)), vector::Ones(6));
    EXPECT_LE((kernel_diagonal(a, kernel_spec::linear()) - gram(a, a, kernel_spec::linear()).diagonal()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Gram, ColumnMismatch) {
    EXPECT_THROW((void)gram(matrix::Zero(2, 2), matrix::Zero(2, 3), kernel_spec::linear()), data_error);
}
