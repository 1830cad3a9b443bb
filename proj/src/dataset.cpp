#include "tlnp/dataset.hpp"

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tlnp/error.hpp"

namespace tlnp {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::normal:
            return "normal";
        case Role::target_abnormal:
            return "target_abnormal";
        case Role::source_abnormal:
            return "source_abnormal";
    }
    return "unknown";
}

std::string_view to_string(SplitKind split) {
    return split == SplitKind::train ? "train" : "test";
}

Role parse_role(std::string_view name) {
    if (name == "normal") return Role::normal;
    if (name == "target_abnormal") return Role::target_abnormal;
    if (name == "source_abnormal") return Role::source_abnormal;
    throw InputError("unknown dataset role: " + std::string(name));
}

SplitKind parse_split(std::string_view name) {
    if (name == "train") return SplitKind::train;
    if (name == "test") return SplitKind::test;
    throw InputError("unknown split: " + std::string(name));
}

void Dataset::validate() const {
    if (!X.allFinite()) {
        throw InputError("dataset contains non-finite entries");
    }
}

Dataset concatenate(const Dataset& a, const Dataset& b) {
    if (b.empty()) return a;
    if (a.empty()) return Dataset{b.X, a.role, a.split};
    if (a.X.cols() != b.X.cols()) {
        throw InputError("cannot concatenate datasets of different dimension");
    }
    Dataset out{Matrix(a.X.rows() + b.X.rows(), a.X.cols()), a.role, a.split};
    out.X.topRows(a.X.rows()) = a.X;
    out.X.bottomRows(b.X.rows()) = b.X;
    return out;
}

std::size_t DatasetBundle::dim() const {
    for (const Dataset* d : {&normal_train, &target_train, &source_train, &normal_test,
                             &target_test, &source_test}) {
        if (d->X.cols() > 0) return d->dim();
    }
    return 0;
}

void to_json(nlohmann::json& j, const Dataset& data) {
    std::vector<std::vector<double>> rows(data.size());
    for (Eigen::Index r = 0; r < data.X.rows(); ++r) {
        rows[static_cast<std::size_t>(r)].assign(data.X.row(r).data(),
                                                 data.X.row(r).data() + data.X.cols());
    }
    j = nlohmann::json{{"role", to_string(data.role)},
                       {"split", to_string(data.split)},
                       {"dim", data.dim()},
                       {"rows", rows}};
}

void from_json(const nlohmann::json& j, Dataset& data) {
    data.role = parse_role(j.at("role").get<std::string>());
    data.split = parse_split(j.value("split", std::string("train")));
    const auto rows = j.at("rows").get<std::vector<std::vector<double>>>();
    const std::size_t dim = rows.empty() ? j.value("dim", std::size_t{0}) : rows.front().size();
    data.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != dim) {
            throw InputError("ragged dataset rows");
        }
        for (std::size_t c = 0; c < dim; ++c) {
            data.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    data.validate();
}

void to_json(nlohmann::json& j, const DatasetBundle& bundle) {
    j = nlohmann::json{{"normal_train", bundle.normal_train}, {"target_train", bundle.target_train},
                       {"source_train", bundle.source_train}, {"normal_test", bundle.normal_test},
                       {"target_test", bundle.target_test},   {"source_test", bundle.source_test}};
}

void from_json(const nlohmann::json& j, DatasetBundle& bundle) {
    j.at("normal_train").get_to(bundle.normal_train);
    j.at("target_train").get_to(bundle.target_train);
    j.at("source_train").get_to(bundle.source_train);
    j.at("normal_test").get_to(bundle.normal_test);
    j.at("target_test").get_to(bundle.target_test);
    j.at("source_test").get_to(bundle.source_test);
}

}  // namespace tlnp
