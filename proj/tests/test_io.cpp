#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace lstsvrpi;
using namespace lstsvrpi::testing;

namespace {

trained_model sample_model(bool kernel) {
    std::mt19937_64 rng{ kernel ? 1u : 2u };
    const Eigen::Index m = kernel ? 12 : 4;
    const pi_dataset data{ uniform_matrix(rng, m, 2), uniform_matrix(rng, m, 1), uniform_vector(rng, m) };
    auto model = fit(data, hyperparams{ 0.5, 2, 0.25, 4, 1.5, 3, 0.01, 0.02, kernel ? std::optional{ kernel_spec::rbf(0.375) } : std::nullopt });
    if (kernel) {
        model.norm = norm_stats{ vector{ { -1.0, 0.1 } }, vector{ { 3.0, 0.7 } }, -2.0, 5.0 };
    }
    return model;
}

trained_model round_trip(const trained_model &model) {
    std::stringstream buf;
    save_model(buf, model);
    return load_model(buf);
}

}  // namespace

TEST(ModelIo, RoundTripIsExact) {
    for (const bool kernel : { false, true }) {
        const auto model = sample_model(kernel);
        const auto back = round_trip(model);
        EXPECT_EQ(back.hp, model.hp);
        EXPECT_EQ(back.v1, model.v1);
        EXPECT_EQ(back.v2, model.v2);
        EXPECT_EQ(back.v1_star, model.v1_star);
        EXPECT_EQ(back.v2_star, model.v2_star);
        EXPECT_EQ(back.duals.alpha, model.duals.alpha);
        EXPECT_EQ(back.duals.beta, model.duals.beta);
        EXPECT_EQ(back.train_regular, model.train_regular);
        EXPECT_EQ(back.train_privileged, model.train_privileged);
        EXPECT_EQ(back.train_targets, model.train_targets);
        ASSERT_EQ(back.norm.has_value(), model.norm.has_value());
        if (model.norm) {
            EXPECT_EQ(back.norm->min, model.norm->min);
            EXPECT_EQ(back.norm->max, model.norm->max);
            EXPECT_EQ(back.norm->target_min, model.norm->target_min);
            EXPECT_EQ(back.norm->target_max, model.norm->target_max);
        }
        const matrix probe = matrix::Constant(3, 2, 0.4);
        EXPECT_EQ(predict(back, probe), predict(model, probe));
    }
}

TEST(ModelIo, SerializationIsStable) {
    const auto model = sample_model(true);
    std::ostringstream a;
    std::ostringstream b;
    save_model(a, model);
    save_model(b, round_trip(model));
    EXPECT_EQ(a.str(), b.str());
}

TEST(ModelIo, RejectsForeignDocuments) {
    std::istringstream not_json{ "hello" };
    EXPECT_THROW((void)load_model(not_json), data_error);
    std::istringstream wrong_format{ R"({"format":"something-else","version":1})" };
    EXPECT_THROW((void)load_model(wrong_format), data_error);
}

TEST(ModelIo, RejectsInconsistentShapes) {
    auto j = model_to_json(sample_model(false));
    j["v1"].push_back(1.0);
    EXPECT_THROW((void)model_from_json(j), data_error);
}

TEST(ModelIo, MissingFile) {
    EXPECT_THROW((void)load_model(std::filesystem::path{ "/nonexistent/model.json" }), data_error);
}
