#pragma once

#include <cstddef>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "tlnp/types.hpp"

namespace tlnp {

enum class Role { normal, target_abnormal, source_abnormal };
enum class SplitKind { train, test };

std::string_view to_string(Role role);
std::string_view to_string(SplitKind split);
Role parse_role(std::string_view name);
SplitKind parse_split(std::string_view name);

struct Dataset {
    Matrix X;
    Role role = Role::normal;
    SplitKind split = SplitKind::train;

    std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(X.cols()); }
    bool empty() const { return X.rows() == 0; }

    // Throws InputError on non-finite entries.
    void validate() const;
};

// Rows of a followed by rows of b; takes the role/split of a. Column counts
// must agree unless one side is empty.
Dataset concatenate(const Dataset& a, const Dataset& b);

// Train-split data for one NP problem. The normal class always comes from the
// target domain; source may be empty.
struct TrainingSet {
    Dataset normal;
    Dataset target;
    Dataset source;
};

// Train and test datasets for every role.
struct DatasetBundle {
    Dataset normal_train;
    Dataset target_train;
    Dataset source_train;
    Dataset normal_test;
    Dataset target_test;
    Dataset source_test;

    TrainingSet training() const { return {normal_train, target_train, source_train}; }
    std::size_t dim() const;
};

void to_json(nlohmann::json& j, const Dataset& data);
void from_json(const nlohmann::json& j, Dataset& data);
void to_json(nlohmann::json& j, const DatasetBundle& bundle);
void from_json(const nlohmann::json& j, DatasetBundle& bundle);

}  // namespace tlnp
