#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

using namespace lstsvrpi;
using namespace lstsvrpi::testing;

namespace {

dataset parse(const std::string &text, const column_selector &target = column_selector::last()) {
    std::istringstream in{ text };
    return parse_csv(in, target);
}

std::string error_message(const std::string &text) {
    try {
        (void)parse(text);
    } catch (const data_error &e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Csv, ParsesHeaderAndNamedTarget) {
    const auto d = parse("a,b,y\n1,2,3\n4,5,6\n", column_selector::name("y"));
    ASSERT_EQ(d.features.rows(), 2);
    ASSERT_EQ(d.features.cols(), 2);
    EXPECT_EQ(d.features(0, 0), 1);
    EXPECT_EQ(d.features(0, 1), 2);
    EXPECT_EQ(d.features(1, 0), 4);
    EXPECT_EQ(d.features(1, 1), 5);
    EXPECT_EQ(d.targets(0), 3);
    EXPECT_EQ(d.targets(1), 6);
    EXPECT_EQ(d.feature_names, (std::vector<std::string>{ "a", "b" }));
    EXPECT_EQ(d.target_name, "y");
}

TEST(Csv, TargetByIndexMovesColumn) {
    const auto d = parse("a,b,y\n1,2,3\n4,5,6\n", column_selector::index(0));
    EXPECT_EQ(d.targets(1), 4);
    EXPECT_EQ(d.features(1, 0), 5);
    EXPECT_EQ(d.features(1, 1), 6);
}

TEST(Csv, NonNumericCellNamesRow) {
    const auto msg = error_message("a,b,y\nabc,2,3\n");
    EXPECT_NE(msg.find("row 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("abc"), std::string::npos) << msg;
}

TEST(Csv, RaggedRowIsRejected) {
    EXPECT_FALSE(error_message("a,b,y\n1,2,3\n4,5\n").empty());
}

TEST(Csv, UnknownTargetIsRejected) {
    EXPECT_THROW((void)parse("a,b,y\n1,2,3\n", column_selector::name("z")), data_error);
}

TEST(Csv, MissingFileIsDataError) {
    EXPECT_THROW((void)load_csv("/nonexistent/file.csv"), data_error);
}

TEST(Csv, ServoSizedFileLoads) {
    const auto dir = scratch_dir("servo");
    {
        std::ofstream out{ dir / "servo.csv" };
        out << "pgain,vgain,class\n";
        for (int i = 0; i < 167; ++i) {
            out << (i % 5 + 3) << ',' << (i % 4 + 1) << ',' << 0.1 * i << '\n';
        }
    }
    const auto d = load_csv(dir / "servo.csv");
    EXPECT_EQ(d.num_samples(), 167u);
    EXPECT_EQ(d.num_features(), 2u);
}

TEST(Csv, WriteThenParseRoundTripsExactly) {
    std::mt19937_64 rng{ 1 };
    dataset d{ uniform_matrix(rng, 7, 3, -1e3, 1e3), uniform_vector(rng, 7), { "p", "q", "r" }, "t" };
    std::ostringstream out;
    write_csv(out, d);
    const auto back = parse(out.str());
    EXPECT_EQ(back.features, d.features);
    EXPECT_EQ(back.targets, d.targets);
    EXPECT_EQ(back.feature_names, d.feature_names);
}

TEST(Normalize, EndpointsMapToUnitInterval) {
    const dataset d{ matrix{ { 1 }, { 3 }, { 5 } }, vector{ { 0, 1, 2 } } };
    const auto [n, stats] = min_max_normalize(d);
    EXPECT_DOUBLE_EQ(n.features(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(n.features(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(n.features(2, 0), 1.0);
    EXPECT_DOUBLE_EQ(n.targets(1), 0.5);
}

TEST(Normalize, ConstantColumnBecomesZero) {
    const dataset d{ matrix{ { 7 }, { 7 }, { 7 } }, vector{ { 0, 1, 2 } } };
    const auto n = min_max_normalize(d).first;
    EXPECT_EQ(n.features.col(0), vector::Zero(3));
}

TEST(Normalize, ColumnsScaleIndependently) {
    const dataset d{ matrix{ { 0, 10 }, { 2, 20 }, { 4, 40 } }, vector{ { 0, 1, 2 } } };
    const auto n = min_max_normalize(d).first;
    EXPECT_DOUBLE_EQ(n.features(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(n.features(1, 1), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(n.features(2, 1), 1.0);
}

TEST(Normalize, ApplyIsLinearWithoutClipping) {
    norm_stats stats{ vector{ { 1.0 } }, vector{ { 5.0 } } };
    const matrix x{ { 3.0 }, { 7.0 } };
    const auto s = scale_features(x, stats);
    EXPECT_DOUBLE_EQ(s(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(s(1, 0), 1.5);
}

TEST(Normalize, ApplyWithOwnStatsIsIdempotent) {
    const dataset d{ matrix{ { 1 }, { 3 }, { 5 } }, vector{ { 0, 1, 2 } } };
    const auto [n, stats] = min_max_normalize(d);
    EXPECT_EQ(apply_norm(d, stats).features, n.features);
}

TEST(Normalize, ColumnCountMismatchIsDataError) {
    norm_stats stats{ vector{ { 1.0 } }, vector{ { 5.0 } } };
    EXPECT_THROW((void)scale_features(matrix::Zero(2, 2), stats), data_error);
}

TEST(SplitPrivileged, CeilingHalfIsRegular) {
    for (const auto &[d, dr] : { std::pair{ 8, 4 }, std::pair{ 7, 4 }, std::pair{ 2, 1 }, std::pair{ 3, 2 } }) {
        const dataset data{ matrix::Zero(3, d), vector::Zero(3) };
        const auto pi = split_privileged(data);
        EXPECT_EQ(pi.regular.cols(), dr) << "d=" << d;
        EXPECT_EQ(pi.privileged.cols(), d - dr) << "d=" << d;
    }
}

TEST(SplitPrivileged, SingleFeatureIsRejected) {
    const dataset data{ matrix::Zero(3, 1), vector::Zero(3) };
    try {
        (void)split_privileged(data);
        FAIL();
    } catch (const data_error &e) {
        EXPECT_NE(std::string{ e.what() }.find("insufficient features for PI split"), std::string::npos);
    }
}

TEST(SplitPrivileged, KeepsColumnOrder) {
    const dataset data{ matrix{ { 1, 2, 3 } }, vector{ { 9 } } };
    const auto pi = split_privileged(data);
    EXPECT_EQ(pi.regular(0, 1), 2);
    EXPECT_EQ(pi.privileged(0, 0), 3);
}

TEST(TrainTestSplit, RatioCardinalityAndDisjointness) {
    dataset data{ matrix(10, 1), vector(10) };
    for (int i = 0; i < 10; ++i) {
        data.features(i, 0) = i;
        data.targets(i) = i;
    }
    const auto [train, test] = train_test_split(data, ratio_split{ 0.7, 99 });
    ASSERT_EQ(train.num_samples(), 7u);
    ASSERT_EQ(test.num_samples(), 3u);
    std::set<double> seen;
    for (Eigen::Index i = 0; i < 7; ++i) seen.insert(train.targets(i));
    for (Eigen::Index i = 0; i < 3; ++i) seen.insert(test.targets(i));
    EXPECT_EQ(seen.size(), 10u);
}

TEST(TrainTestSplit, SameSeedSameSplit) {
    std::mt19937_64 rng{ 3 };
    const dataset data{ uniform_matrix(rng, 20, 2), uniform_vector(rng, 20) };
    const auto a = train_test_split(data, ratio_split{ 0.7, 5 });
    const auto b = train_test_split(data, ratio_split{ 0.7, 5 });
    EXPECT_EQ(a.first.targets, b.first.targets);
    EXPECT_EQ(a.second.targets, b.second.targets);
}

TEST(TrainTestSplit, HeadKeepsOrder) {
    dataset data{ matrix(750, 1), vector(750) };
    for (int i = 0; i < 750; ++i) {
        data.features(i, 0) = i;
        data.targets(i) = i;
    }
    const auto [train, test] = train_test_split(data, head_split{ 200 });
    ASSERT_EQ(train.num_samples(), 200u);
    ASSERT_EQ(test.num_samples(), 550u);
    EXPECT_EQ(train.targets(199), 199);
    EXPECT_EQ(test.targets(0), 200);
    EXPECT_EQ(test.targets(549), 749);
}

TEST(TrainTestSplit, InvalidSchemes) {
    const dataset data{ matrix::Zero(10, 1), vector::Zero(10) };
    EXPECT_THROW((void)train_test_split(data, ratio_split{ 1.0, 0 }), usage_error);
    EXPECT_THROW((void)train_test_split(data, head_split{ 10 }), data_error);
}

TEST(Synthetic, FormulaValues) {
    using std::numbers::pi;
    EXPECT_NEAR(evaluate_synthetic(synthetic_fn::f1, vector{ { pi, 0.0 } }), 0.0, 1e-15);
    EXPECT_NEAR(evaluate_synthetic(synthetic_fn::f2, vector::Constant(5, 0.5)), 14.5711, 5e-5);
    EXPECT_DOUBLE_EQ(evaluate_synthetic(synthetic_fn::f3, vector::Zero(2)), 1.0);
    EXPECT_DOUBLE_EQ(evaluate_synthetic(synthetic_fn::f1, vector::Zero(2)), 1.0);
}

TEST(Synthetic, ShapesAndDomains) {
    const auto [train, test] = gen_synthetic(synthetic_fn::f2, 100, 200, noise_spec{ noise_kind::uniform_pm02, 1 }, 7);
    EXPECT_EQ(train.features.rows(), 100);
    EXPECT_EQ(train.features.cols(), 5);
    EXPECT_EQ(test.features.rows(), 200);
    EXPECT_GE(train.features.minCoeff(), 0.0);
    EXPECT_LE(train.features.maxCoeff(), 1.0);
    for (Eigen::Index i = 0; i < test.features.rows(); ++i) {
        EXPECT_EQ(test.targets(i), evaluate_synthetic(synthetic_fn::f2, test.features.row(i).transpose()));
    }
    for (Eigen::Index i = 0; i < train.features.rows(); ++i) {
        EXPECT_LE(std::abs(train.targets(i) - evaluate_synthetic(synthetic_fn::f2, train.features.row(i).transpose())), 0.2);
    }
    EXPECT_EQ(gen_synthetic(synthetic_fn::f1, 3, 3, {}, 0).first.features.cols(), 2);
}

TEST(Synthetic, Deterministic) {
    const auto a = gen_synthetic(synthetic_fn::f4, 10, 10, noise_spec{ noise_kind::gaussian_02, 3 }, 4);
    const auto b = gen_synthetic(synthetic_fn::f4, 10, 10, noise_spec{ noise_kind::gaussian_02, 3 }, 4);
    EXPECT_EQ(a.first.features, b.first.features);
    EXPECT_EQ(a.first.targets, b.first.targets);
}

TEST(LagEmbed, SmallSeries) {
    const auto d = lag_embed(vector{ { 1, 2, 3, 4 } }, 2);
    EXPECT_EQ(d.features, (matrix{ { 1, 2 }, { 2, 3 } }));
    EXPECT_EQ(d.targets, (vector{ { 3, 4 } }));
}

TEST(LagEmbed, StockLength) {
    EXPECT_EQ(lag_embed(vector::LinSpaced(755, 0, 1), 5).num_samples(), 750u);
}

TEST(LagEmbed, TooShort) {
    EXPECT_THROW((void)lag_embed(vector::Zero(5), 5), data_error);
}
