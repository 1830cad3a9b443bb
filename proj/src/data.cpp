#include "tlnp/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "tlnp/error.hpp"
#include "tlnp/seed.hpp"

namespace tlnp {
namespace {

Vector broadcast_mean(const std::vector<double>& mean, std::size_t dim, const char* name) {
    if (mean.size() == 1) return Vector::Constant(static_cast<Eigen::Index>(dim), mean.front());
    if (mean.size() != dim) {
        throw ConfigError(std::string(name) + " must have 1 or dim entries");
    }
    return Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(dim));
}

Dataset sample_gaussian(const Vector& mean, std::size_t n, Role role, SplitKind split,
                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset out{Matrix(static_cast<Eigen::Index>(n), mean.size()), role, split};
    for (Eigen::Index r = 0; r < out.X.rows(); ++r) {
        for (Eigen::Index c = 0; c < out.X.cols(); ++c) {
            out.X(r, c) = mean[c] + normal(rng);
        }
    }
    return out;
}

Dataset take_rows(const Dataset& data, const std::vector<Eigen::Index>& rows) {
    Dataset out{Matrix(static_cast<Eigen::Index>(rows.size()), data.X.cols()), data.role,
                data.split};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = data.X.row(rows[i]);
    }
    return out;
}

// Splits one CSV line on commas; double quotes group a field.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

bool is_missing(const std::string& field) {
    return field.empty() || field == "NA" || field == "NaN" || field == "nan" || field == "null";
}

std::optional<double> parse_number(const std::string& field) {
    std::istringstream in(field);
    in.imbue(std::locale::classic());
    double value = 0.0;
    in >> value;
    if (in.fail() || !in.eof() || !std::isfinite(value)) return std::nullopt;
    return value;
}

}  // namespace

void GaussianSpec::validate() const {
    if (dim < 1) throw ConfigError("gaussian dim must be at least 1");
    broadcast_mean(mean_normal, dim, "mean_normal");
    broadcast_mean(mean_target_abnormal, dim, "mean_target_abnormal");
    broadcast_mean(mean_source_abnormal, dim, "mean_source_abnormal");
}

DatasetBundle gen_gaussian(const GaussianSpec& spec) {
    spec.validate();
    const Vector m0 = broadcast_mean(spec.mean_normal, spec.dim, "mean_normal");
    const Vector mt = broadcast_mean(spec.mean_target_abnormal, spec.dim, "mean_target_abnormal");
    const Vector ms = broadcast_mean(spec.mean_source_abnormal, spec.dim, "mean_source_abnormal");
    auto stream = [&](std::uint64_t k) { return combine_seed(spec.seed, k); };

    DatasetBundle bundle;
    bundle.normal_train = sample_gaussian(m0, spec.n_normal, Role::normal, SplitKind::train, stream(0));
    bundle.target_train =
        sample_gaussian(mt, spec.n_target, Role::target_abnormal, SplitKind::train, stream(1));
    bundle.source_train =
        sample_gaussian(ms, spec.n_source, Role::source_abnormal, SplitKind::train, stream(2));
    bundle.normal_test =
        sample_gaussian(m0, spec.n_normal_test, Role::normal, SplitKind::test, stream(3));
    bundle.target_test =
        sample_gaussian(mt, spec.n_target_test, Role::target_abnormal, SplitKind::test, stream(4));
    bundle.source_test =
        sample_gaussian(ms, spec.n_source_test, Role::source_abnormal, SplitKind::test, stream(5));
    return bundle;
}

std::vector<Dataset> split(const Dataset& data, const std::vector<double>& fractions,
                           std::uint64_t seed) {
    if (fractions.empty()) throw ConfigError("split needs at least one fraction");
    double total = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0)) throw ConfigError("split fractions must be non-negative");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
    const std::size_t n = data.size();
    if (n < fractions.size()) {
        throw SplitError("cannot split " + std::to_string(n) + " rows into " +
                         std::to_string(fractions.size()) + " parts");
    }

    std::vector<std::size_t> sizes(fractions.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        sizes[i] = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions[i]));
        assigned += sizes[i];
    }
    sizes[0] += n - assigned;

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Dataset> parts;
    std::size_t offset = 0;
    for (std::size_t size : sizes) {
        parts.push_back(take_rows(
            data, std::vector<Eigen::Index>(order.begin() + static_cast<std::ptrdiff_t>(offset),
                                            order.begin() + static_cast<std::ptrdiff_t>(offset + size))));
        offset += size;
    }
    return parts;
}

Standardizer Standardizer::fit(const Dataset& data) {
    if (data.empty()) throw UndefinedError("cannot fit a standardizer on empty data");
    Standardizer s;
    s.mean = data.X.colwise().mean().transpose();
    const Matrix centered = data.X.rowwise() - s.mean.transpose();
    s.scale = (centered.colwise().squaredNorm() / static_cast<double>(data.size())).cwiseSqrt().transpose();
    for (Eigen::Index c = 0; c < s.scale.size(); ++c) {
        if (!(s.scale[c] > 0.0)) s.scale[c] = 1.0;
    }
    return s;
}

void Standardizer::apply(Dataset& data) const {
    if (data.empty()) return;
    if (data.X.cols() != mean.size()) throw InputError("standardizer dimension mismatch");
    data.X = ((data.X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array())
                 .matrix();
}

void Standardizer::apply(DatasetBundle& bundle) const {
    for (Dataset* d : {&bundle.normal_train, &bundle.target_train, &bundle.source_train,
                       &bundle.normal_test, &bundle.target_test, &bundle.source_test}) {
        apply(*d);
    }
}

double nearest_rank_percentile(std::vector<double> values, double percentile) {
    if (values.empty()) throw UndefinedError("percentile of an empty sample");
    if (!(percentile > 0.0 && percentile < 100.0)) {
        throw ConfigError("percentile must lie in (0, 100)");
    }
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

void CsvIngestSpec::validate() const {
    if (feature_columns.empty()) throw ConfigError("csv ingest needs feature columns");
    if (label_column.empty()) throw ConfigError("csv ingest needs a label column");
    if (!(percentile > 0.0 && percentile < 100.0)) {
        throw ConfigError("percentile must lie in (0, 100)");
    }
    if (abnormal_role == Role::normal) throw ConfigError("abnormal role cannot be normal");
}

CsvIngestResult ingest_csv(const CsvIngestSpec& spec) {
    spec.validate();
    std::ifstream in(spec.path);
    if (!in) throw IngestError("cannot open " + spec.path.string());

    std::string line;
    if (!std::getline(in, line)) throw IngestError("empty csv file " + spec.path.string());
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_csv_line(line);
    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) column[trim(header[i])] = i;

    auto locate = [&](const std::string& name) {
        const auto it = column.find(name);
        if (it == column.end()) throw IngestError("missing column '" + name + "'");
        return it->second;
    };
    std::vector<std::size_t> feature_idx;
    for (const auto& name : spec.feature_columns) feature_idx.push_back(locate(name));
    const std::size_t label_idx = locate(spec.label_column);

    CsvIngestResult result;
    std::vector<std::vector<double>> features;
    std::vector<double> labels;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++result.total_rows;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            ++result.dropped_unparseable;
            continue;
        }
        std::vector<double> row;
        row.reserve(feature_idx.size());
        bool missing = false;
        bool bad = false;
        auto read = [&](std::size_t idx) -> double {
            const std::string field = trim(fields[idx]);
            if (is_missing(field)) {
                missing = true;
                return 0.0;
            }
            const auto value = parse_number(field);
            if (!value) {
                bad = true;
                return 0.0;
            }
            return *value;
        };
        for (std::size_t idx : feature_idx) row.push_back(read(idx));
        const double label = read(label_idx);
        if (bad) {
            ++result.dropped_unparseable;
        } else if (missing) {
            ++result.dropped_missing;
        } else {
            features.push_back(std::move(row));
            labels.push_back(label);
        }
    }
    if (result.total_rows > 0 &&
        static_cast<double>(result.dropped_unparseable) >
            spec.max_bad_fraction * static_cast<double>(result.total_rows)) {
        throw IngestError(std::to_string(result.dropped_unparseable) + " of " +
                          std::to_string(result.total_rows) + " rows could not be parsed");
    }
    if (labels.empty()) throw IngestError("no usable rows in " + spec.path.string());

    result.threshold = nearest_rank_percentile(labels, spec.percentile);
    const auto d = static_cast<Eigen::Index>(feature_idx.size());
    std::vector<std::size_t> normal_rows;
    std::vector<std::size_t> abnormal_rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] > result.threshold ? abnormal_rows : normal_rows).push_back(i);
    }
    result.abnormal_rows = abnormal_rows.size();

    auto build = [&](const std::vector<std::size_t>& rows, Role role) {
        Dataset out{Matrix(static_cast<Eigen::Index>(rows.size()), d), role, SplitKind::train};
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (Eigen::Index c = 0; c < d; ++c) {
                out.X(static_cast<Eigen::Index>(r), c) = features[rows[r]][static_cast<std::size_t>(c)];
            }
        }
        return out;
    };
    auto divide = [&](const Dataset& all, Dataset& train, Dataset& test, std::uint64_t stream) {
        if (all.size() < spec.split_fractions.size()) {
            // Too few rows to split: everything goes to training.
            train = all;
            test = Dataset{Matrix(0, d), all.role, SplitKind::test};
            return;
        }
        auto parts = split(all, spec.split_fractions, combine_seed(spec.seed, stream));
        train = std::move(parts[0]);
        train.split = SplitKind::train;
        if (parts.size() > 1) {
            test = std::move(parts[1]);
        } else {
            test = Dataset{Matrix(0, d), all.role, SplitKind::test};
        }
        test.split = SplitKind::test;
    };

    DatasetBundle& b = result.bundle;
    divide(build(normal_rows, Role::normal), b.normal_train, b.normal_test, 0);
    const Dataset abnormal = build(abnormal_rows, spec.abnormal_role);
    const Dataset empty_target{Matrix(0, d), Role::target_abnormal, SplitKind::train};
    const Dataset empty_source{Matrix(0, d), Role::source_abnormal, SplitKind::train};
    if (spec.abnormal_role == Role::target_abnormal) {
        divide(abnormal, b.target_train, b.target_test, 1);
        b.source_train = empty_source;
        b.source_test = Dataset{Matrix(0, d), Role::source_abnormal, SplitKind::test};
    } else {
        divide(abnormal, b.source_train, b.source_test, 1);
        b.target_train = empty_target;
        b.target_test = Dataset{Matrix(0, d), Role::target_abnormal, SplitKind::test};
    }

    if (spec.standardize && !b.normal_train.empty()) {
        result.standardizer = Standardizer::fit(b.normal_train);
        result.standardizer->apply(b);
    }
    return result;
}

void to_json(nlohmann::json& j, const GaussianSpec& spec) {
    j = nlohmann::json{{"type", "gaussian"},
                       {"dim", spec.dim},
                       {"mean_normal", spec.mean_normal},
                       {"mean_target_abnormal", spec.mean_target_abnormal},
                       {"mean_source_abnormal", spec.mean_source_abnormal},
                       {"n_normal", spec.n_normal},
                       {"n_target", spec.n_target},
                       {"n_source", spec.n_source},
                       {"n_normal_test", spec.n_normal_test},
                       {"n_target_test", spec.n_target_test},
                       {"n_source_test", spec.n_source_test},
                       {"seed", spec.seed}};
}

namespace {

std::vector<double> read_mean(const nlohmann::json& j, const char* key, std::vector<double> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_number()) return {v.get<double>()};
    return v.get<std::vector<double>>();
}

}  // namespace

void from_json(const nlohmann::json& j, GaussianSpec& spec) {
    GaussianSpec defaults;
    spec.dim = j.value("dim", defaults.dim);
    spec.mean_normal = read_mean(j, "mean_normal", defaults.mean_normal);
    spec.mean_target_abnormal = read_mean(j, "mean_target_abnormal", defaults.mean_target_abnormal);
    spec.mean_source_abnormal = read_mean(j, "mean_source_abnormal", defaults.mean_source_abnormal);
    spec.n_normal = j.value("n_normal", defaults.n_normal);
    spec.n_target = j.value("n_target", defaults.n_target);
    spec.n_source = j.value("n_source", defaults.n_source);
    spec.n_normal_test = j.value("n_normal_test", defaults.n_normal_test);
    spec.n_target_test = j.value("n_target_test", defaults.n_target_test);
    spec.n_source_test = j.value("n_source_test", defaults.n_source_test);
    spec.seed = j.value("seed", defaults.seed);
}

void to_json(nlohmann::json& j, const CsvIngestSpec& spec) {
    j = nlohmann::json{{"path", spec.path.string()},
                       {"feature_columns", spec.feature_columns},
                       {"label_column", spec.label_column},
                       {"percentile", spec.percentile},
                       {"split_fractions", spec.split_fractions},
                       {"seed", spec.seed},
                       {"standardize", spec.standardize},
                       {"abnormal_role", to_string(spec.abnormal_role)},
                       {"max_bad_fraction", spec.max_bad_fraction}};
}

void from_json(const nlohmann::json& j, CsvIngestSpec& spec) {
    CsvIngestSpec defaults;
    spec.path = j.at("path").get<std::string>();
    spec.feature_columns = j.at("feature_columns").get<std::vector<std::string>>();
    spec.label_column = j.at("label_column").get<std::string>();
    spec.percentile = j.value("percentile", defaults.percentile);
    spec.split_fractions = j.value("split_fractions", defaults.split_fractions);
    spec.seed = j.value("seed", defaults.seed);
    spec.standardize = j.value("standardize", defaults.standardize);
    spec.abnormal_role =
        parse_role(j.value("abnormal_role", std::string(to_string(defaults.abnormal_role))));
    spec.max_bad_fraction = j.value("max_bad_fraction", defaults.max_bad_fraction);
}

}  // namespace tlnp
