/**
 * @file
 * @brief JSON serialization of trained models. Doubles are written in
 *        shortest round-trip form, so save/load is lossless.
 */

#pragma once

#include "lstsvrpi/dataset.hpp"
#include "lstsvrpi/error.hpp"
#include "lstsvrpi/kernel.hpp"
#include "lstsvrpi/linalg.hpp"
#include "lstsvrpi/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace lstsvrpi {

inline constexpr int model_format_version = 1;

namespace detail {

using json = nlohmann::json;

[[nodiscard]] inline json to_json_vector(const vector &v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

[[nodiscard]] inline json to_json_matrix(const matrix &m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row[static_cast<std::size_t>(j)] = m(i, j);
        }
        rows.push_back(row);
    }
    return json{ { "rows", m.rows() }, { "cols", m.cols() }, { "data", rows } };
}

[[nodiscard]] inline vector vector_from_json(const json &j) {
    const auto values = j.get<std::vector<double>>();
    vector out(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = values[i];
    }
    return out;
}

[[nodiscard]] inline matrix matrix_from_json(const json &j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto &data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows) {
        throw data_error{ "model file: matrix row count mismatch" };
    }
    matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto row = data.at(static_cast<std::size_t>(i)).get<std::vector<double>>();
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw data_error{ "model file: matrix column count mismatch in row " + std::to_string(i) };
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            out(i, k) = row[static_cast<std::size_t>(k)];
        }
    }
    return out;
}

}  // namespace detail

[[nodiscard]] inline nlohmann::json model_to_json(const trained_model &model) {
    using detail::json;
    const auto &hp = model.hp;
    json kernel = nullptr;
    if (hp.kernel) {
        kernel = json{ { "kind", std::string{ to_string(hp.kernel->kind) } }, { "mu", hp.kernel->mu } };
    }
    json j;
    j["format"] = "lstsvrpi-model";
    j["version"] = model_format_version;
    j["hyperparams"] = json{ { "c", { hp.c1, hp.c2, hp.c3, hp.c4, hp.c5, hp.c6 } }, { "eps1", hp.eps1 }, { "eps2", hp.eps2 }, { "kernel", kernel } };
    j["v1"] = detail::to_json_vector(model.v1);
    j["v2"] = detail::to_json_vector(model.v2);
    j["v1_star"] = detail::to_json_vector(model.v1_star);
    j["v2_star"] = detail::to_json_vector(model.v2_star);
    j["alpha"] = detail::to_json_vector(model.duals.alpha);
    j["beta"] = detail::to_json_vector(model.duals.beta);
    j["train_regular"] = detail::to_json_matrix(model.train_regular);
    j["train_privileged"] = detail::to_json_matrix(model.train_privileged);
    j["train_targets"] = detail::to_json_vector(model.train_targets);
    if (model.norm) {
        j["norm"] = json{ { "min", detail::to_json_vector(model.norm->min) },
                          { "max", detail::to_json_vector(model.norm->max) },
                          { "target_min", model.norm->target_min },
                          { "target_max", model.norm->target_max } };
    } else {
        j["norm"] = nullptr;
    }
    return j;
}

[[nodiscard]] inline trained_model model_from_json(const nlohmann::json &j) {
    try {
        if (j.at("format").get<std::string>() != "lstsvrpi-model") {
            throw data_error{ "model file: unknown format tag" };
        }
        if (j.at("version").get<int>() != model_format_version) {
            throw data_error{ "model file: unsupported version " + j.at("version").dump() };
        }
        trained_model model;
        const auto &h = j.at("hyperparams");
        const auto c = h.at("c").get<std::vector<double>>();
        if (c.size() != 6) {
            throw data_error{ "model file: expected 6 c values" };
        }
        model.hp.c1 = c[0];
        model.hp.c2 = c[1];
        model.hp.c3 = c[2];
        model.hp.c4 = c[3];
        model.hp.c5 = c[4];
        model.hp.c6 = c[5];
        model.hp.eps1 = h.at("eps1").get<double>();
        model.hp.eps2 = h.at("eps2").get<double>();
        const auto &k = h.at("kernel");
        if (k.is_null()) {
            model.hp.kernel.reset();
        } else {
            model.hp.kernel = kernel_spec{ parse_kernel_kind(k.at("kind").get<std::string>()), k.at("mu").get<double>() };
        }
        model.hp.validate();
        model.v1 = detail::vector_from_json(j.at("v1"));
        model.v2 = detail::vector_from_json(j.at("v2"));
        model.v1_star = detail::vector_from_json(j.at("v1_star"));
        model.v2_star = detail::vector_from_json(j.at("v2_star"));
        model.duals.alpha = detail::vector_from_json(j.at("alpha"));
        model.duals.beta = detail::vector_from_json(j.at("beta"));
        model.train_regular = detail::matrix_from_json(j.at("train_regular"));
        model.train_privileged = detail::matrix_from_json(j.at("train_privileged"));
        model.train_targets = detail::vector_from_json(j.at("train_targets"));
        if (!j.at("norm").is_null()) {
            const auto &n = j.at("norm");
            model.norm = norm_stats{ detail::vector_from_json(n.at("min")), detail::vector_from_json(n.at("max")), n.at("target_min").get<double>(), n.at("target_max").get<double>() };
            if (model.norm->num_columns() != model.num_regular()) {
                throw data_error{ "model file: normalization covers " + std::to_string(model.norm->num_columns()) + " columns, model has " + std::to_string(model.num_regular()) };
            }
        }
        const auto q = model.hp.kernel ? model.train_regular.rows() + 1 : model.train_regular.cols() + 1;
        if (model.v1.size() != q || model.v2.size() != q) {
            throw data_error{ "model file: weight length does not match the stored training data" };
        }
        return model;
    } catch (const nlohmann::json::exception &e) {
        throw data_error{ std::string{ "model file: " } + e.what() };
    }
}

inline void save_model(std::ostream &out, const trained_model &model) {
    out << model_to_json(model).dump(1) << '\n';
}

inline void save_model(const std::filesystem::path &path, const trained_model &model) {
    std::ofstream out{ path, std::ios::binary };
    if (!out) {
        throw data_error{ "cannot write model file " + path.string() };
    }
    save_model(out, model);
}

[[nodiscard]] inline trained_model load_model(std::istream &in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw data_error{ std::string{ "model file: " } + e.what() };
    }
    return model_from_json(j);
}

[[nodiscard]] inline trained_model load_model(const std::filesystem::path &path) {
    std::ifstream in{ path, std::ios::binary };
    if (!in) {
        throw data_error{ "cannot open model file " + path.string() };
    }
    return load_model(in);
}

}  // namespace lstsvrpi
