#include "tlnp/risk.hpp"

#include <algorithm>
#include <vector>

#include "tlnp/error.hpp"

namespace tlnp {
namespace {

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void require_nonempty(std::size_t n) {
    if (n == 0) {
        throw UndefinedError("risk over an empty dataset is undefined");
    }
}

void require_normal(const Dataset& data) {
    if (data.role != Role::normal) {
        throw InputError("Type-I error needs normal data");
    }
}

void require_abnormal(const Dataset& data) {
    if (data.role == Role::normal) {
        throw InputError("Type-II error needs abnormal data");
    }
}

std::vector<double> scores_of(const Model& model, const Dataset& data) {
    const Vector s = forward_rows(model, data.X);
    return {s.data(), s.data() + s.size()};
}

}  // namespace

double order_invariant_mean(std::span<const double> values) {
    require_nonempty(values.size());
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return pairwise_sum(sorted) / static_cast<double>(sorted.size());
}

double zero_one_type1_scores(std::span<const double> scores) {
    require_nonempty(scores.size());
    const auto flagged = std::count_if(scores.begin(), scores.end(), [](double s) { return s >= 0.0; });
    return static_cast<double>(flagged) / static_cast<double>(scores.size());
}

double zero_one_type2_scores(std::span<const double> scores) {
    require_nonempty(scores.size());
    const auto missed = std::count_if(scores.begin(), scores.end(), [](double s) { return s < 0.0; });
    return static_cast<double>(missed) / static_cast<double>(scores.size());
}

double surrogate_type1_scores(const SurrogateLossSpec& spec, std::span<const double> scores) {
    std::vector<double> losses(scores.size());
    std::transform(scores.begin(), scores.end(), losses.begin(),
                   [&](double s) { return eval_loss(spec, s); });
    return order_invariant_mean(losses);
}

double surrogate_type2_scores(const SurrogateLossSpec& spec, std::span<const double> scores) {
    std::vector<double> losses(scores.size());
    std::transform(scores.begin(), scores.end(), losses.begin(),
                   [&](double s) { return eval_loss(spec, -s); });
    return order_invariant_mean(losses);
}

double zero_one_type1(const Model& model, const Dataset& normal) {
    require_normal(normal);
    require_nonempty(normal.size());
    return zero_one_type1_scores(scores_of(model, normal));
}

double zero_one_type2(const Model& model, const Dataset& abnormal) {
    require_abnormal(abnormal);
    require_nonempty(abnormal.size());
    return zero_one_type2_scores(scores_of(model, abnormal));
}

double surrogate_type1(const SurrogateLossSpec& spec, const Model& model, const Dataset& normal) {
    require_normal(normal);
    require_nonempty(normal.size());
    return surrogate_type1_scores(spec, scores_of(model, normal));
}

double surrogate_type2(const SurrogateLossSpec& spec, const Model& model,
                       const Dataset& abnormal) {
    require_abnormal(abnormal);
    require_nonempty(abnormal.size());
    return surrogate_type2_scores(spec, scores_of(model, abnormal));
}

}  // namespace tlnp
