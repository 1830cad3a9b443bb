#include "tlnp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "tlnp/baselines.hpp"
#include "tlnp/error.hpp"
#include "tlnp/oracle.hpp"
#include "tlnp/risk.hpp"
#include "tlnp/seed.hpp"

namespace tlnp {

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
    nlohmann::json batch;
    switch (cfg.batch_mode) {
        case BatchMode::automatic:
            batch = "auto";
            break;
        case BatchMode::full:
            batch = "full";
            break;
        case BatchMode::fixed:
            batch = cfg.batch_size;
            break;
    }
    j = nlohmann::json{{"learning_rate", cfg.learning_rate},
                       {"epochs", cfg.epochs},
                       {"batch_size", batch},
                       {"auto_batch_size", cfg.batch_size},
                       {"full_batch_limit", cfg.full_batch_limit},
                       {"adam_beta1", cfg.adam_beta1},
                       {"adam_beta2", cfg.adam_beta2},
                       {"adam_eps", cfg.adam_eps},
                       {"divergence_limit", cfg.divergence_limit},
                       {"seed", cfg.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
    TrainConfig d;
    cfg.learning_rate = j.value("learning_rate", d.learning_rate);
    cfg.epochs = j.value("epochs", d.epochs);
    cfg.full_batch_limit = j.value("full_batch_limit", d.full_batch_limit);
    cfg.adam_beta1 = j.value("adam_beta1", d.adam_beta1);
    cfg.adam_beta2 = j.value("adam_beta2", d.adam_beta2);
    cfg.adam_eps = j.value("adam_eps", d.adam_eps);
    cfg.divergence_limit = j.value("divergence_limit", d.divergence_limit);
    cfg.seed = j.value("seed", d.seed);
    cfg.batch_mode = BatchMode::automatic;
    cfg.batch_size = j.value("auto_batch_size", d.batch_size);
    if (j.contains("batch_size")) {
        const auto& b = j.at("batch_size");
        if (b.is_string()) {
            const auto s = b.get<std::string>();
            if (s == "full") {
                cfg.batch_mode = BatchMode::full;
            } else if (s != "auto") {
                throw ConfigError("batch_size must be an integer, \"auto\" or \"full\"");
            }
        } else {
            cfg.batch_mode = BatchMode::fixed;
            cfg.batch_size = b.get<std::size_t>();
        }
    }
}

void to_json(nlohmann::json& j, const SurrogateLossSpec& spec) {
    j = nlohmann::json{{"family", to_string(spec.family)}, {"clamp", spec.clamp}};
}

void from_json(const nlohmann::json& j, SurrogateLossSpec& spec) {
    SurrogateLossSpec d;
    spec.family = parse_loss_family(j.value("family", std::string(to_string(d.family))));
    spec.clamp = j.value("clamp", d.clamp);
}

namespace {

std::string_view to_string(SweepVariable v) { return v == SweepVariable::n_source ? "n_S" : "n_T"; }

SweepVariable parse_sweep_variable(const std::string& name) {
    if (name == "n_S") return SweepVariable::n_source;
    if (name == "n_T") return SweepVariable::n_target;
    throw ConfigError("sweep variable must be n_S or n_T");
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

Dataset subsample(const Dataset& data, std::size_t count, std::uint64_t seed) {
    if (count >= data.size()) return data;
    // Prefix of one fixed permutation, so smaller counts give nested subsets.
    std::vector<Eigen::Index> order(data.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    Dataset out{Matrix(static_cast<Eigen::Index>(count), data.X.cols()), data.role, data.split};
    for (std::size_t i = 0; i < count; ++i) out.X.row(static_cast<Eigen::Index>(i)) = data.X.row(order[i]);
    return out;
}


struct MethodOutput {
    TunedHypothesis hypothesis;
    nlohmann::json audit;
};

MethodOutput oracle_on_reduced_class(const Learner& learner, const TrainingSet& data,
                                     const TlnpConfig& cfg) {
    const Step1Result step1 = step1_grid(make_fitter(learner, data), data, cfg);
    FiniteClass cls;
    for (const auto& h : step1.members) cls.hypotheses.push_back(h.model);
    // 2 c_tilde / sqrt(n_T) matches the constant-c slack c / sqrt(n_T).
    cls.c_tilde = cfg.c_universal / 2.0;
    const OracleChoice choice = solve_procedure8(cls, data, learner.loss, cfg.alpha, cfg.epsilon0);
    nlohmann::json audit{{"class_size", cls.size()},
                         {"chosen_index", choice.index},
                         {"surrogate_type1", choice.type1},
                         {"surrogate_target", choice.target}};
    if (choice.source) audit["surrogate_source"] = *choice.source;
    return {step1.members[choice.index], audit};
}

MethodOutput run_method(const std::string& method, const Learner& learner, const TrainingSet& data,
                        const TlnpConfig& cfg) {
    if (method == "tlnp" || method == "tlnp_variance") {
        TlnpConfig c = cfg;
        c.filter_mode = method == "tlnp" ? FilterMode::constant_c : FilterMode::variance_method;
        TlnpResult r = run_tlnp(learner, data, c);
        nlohmann::json audit = audit_json(r);
        return {std::move(r.selected), std::move(audit)};
    }
    if (method == "only_target_np") return {only_target_np(learner, data, cfg), nullptr};
    if (method == "only_source_np") return {only_source_np(learner, data, cfg), nullptr};
    if (method == "pooled_np") return {pooled_np(learner, data, cfg), nullptr};
    if (method == "threshold_target") return {threshold_classifier(learner, data, cfg, false), nullptr};
    if (method == "threshold_pooled") return {threshold_classifier(learner, data, cfg, true), nullptr};
    if (method == "tlod") return {tlod(learner, data, cfg), nullptr};
    if (method == "oracle_fixture") return oracle_on_reduced_class(learner, data, cfg);
    throw ConfigError("unknown method: " + method);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (runs < 1) throw ConfigError("runs must be at least 1");
    for (const auto& m : methods) {
        if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
            throw ConfigError("unknown method: " + m);
        }
    }
    if (sweep) {
        if (sweep->values.empty()) throw ConfigError("sweep needs at least one value");
        for (double v : sweep->values) {
            if (!(v > 0.0)) throw ConfigError("sweep values must be positive");
        }
    }
    TlnpConfig t = tlnp;
    t.alpha = alpha;
    t.epsilon0 = epsilon0;
    t.validate();
    train.validate();
    loss.validate();
    if (model_kind == ModelKind::mlp2 && hidden_units < 1) {
        throw ConfigError("mlp2 needs at least one hidden unit");
    }
}

std::vector<double> ExperimentConfig::sweep_points() const {
    if (sweep) return sweep->values;
    return {0.0};
}

void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
    nlohmann::json data;
    if (const auto* g = std::get_if<GaussianSpec>(&cfg.data)) {
        data = *g;
    } else {
        const auto& c = std::get<CsvSource>(cfg.data);
        data = {{"type", "csv"}, {"target", c.target}};
        data["source"] = c.source ? nlohmann::json(*c.source) : nlohmann::json(nullptr);
    }
    j = nlohmann::json{{"data", data},
                       {"methods", cfg.methods},
                       {"alpha", cfg.alpha},
                       {"epsilon0", cfg.epsilon0},
                       {"runs", cfg.runs},
                       {"master_seed", cfg.master_seed},
                       {"model", {{"kind", to_string(cfg.model_kind)}, {"hidden_units", cfg.hidden_units}}},
                       {"loss", cfg.loss},
                       {"train", cfg.train},
                       {"tlnp", cfg.tlnp},
                       {"workers", cfg.workers}};
    // alpha and epsilon0 live at the top level only.
    j["tlnp"].erase("alpha");
    j["tlnp"].erase("epsilon0");
    if (cfg.sweep) {
        j["sweep"] = {{"variable", to_string(cfg.sweep->variable)}, {"values", cfg.sweep->values}};
    } else {
        j["sweep"] = nullptr;
    }
}

void from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
    static const std::set<std::string> known{"data",  "methods", "alpha", "epsilon0", "runs",    "master_seed",
                                             "model", "loss",    "train", "tlnp",     "workers", "sweep"};
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown config key: " + key);
    }
    ExperimentConfig d;
    if (j.contains("data")) {
        const auto& data = j.at("data");
        const auto type = data.value("type", std::string("gaussian"));
        if (type == "gaussian") {
            cfg.data = data.get<GaussianSpec>();
        } else if (type == "csv") {
            CsvSource csv{data.at("target").get<CsvIngestSpec>(), std::nullopt};
            if (data.contains("source") && !data.at("source").is_null()) {
                csv.source = data.at("source").get<CsvIngestSpec>();
            }
            cfg.data = csv;
        } else {
            throw ConfigError("data.type must be gaussian or csv");
        }
    } else {
        cfg.data = d.data;
    }
    cfg.methods = j.value("methods", d.methods);
    cfg.alpha = j.value("alpha", d.alpha);
    cfg.epsilon0 = j.value("epsilon0", d.epsilon0);
    cfg.runs = j.value("runs", d.runs);
    cfg.master_seed = j.value("master_seed", d.master_seed);
    if (j.contains("model")) {
        cfg.model_kind = parse_model_kind(j.at("model").value("kind", std::string("quadratic")));
        cfg.hidden_units = j.at("model").value("hidden_units", d.hidden_units);
    }
    cfg.loss = j.contains("loss") ? j.at("loss").get<SurrogateLossSpec>() : d.loss;
    cfg.train = j.contains("train") ? j.at("train").get<TrainConfig>() : d.train;
    cfg.tlnp = j.contains("tlnp") ? j.at("tlnp").get<TlnpConfig>() : d.tlnp;
    cfg.workers = j.value("workers", d.workers);
    cfg.sweep.reset();
    if (j.contains("sweep") && !j.at("sweep").is_null()) {
        SweepSpec s;
        s.variable = parse_sweep_variable(j.at("sweep").at("variable").get<std::string>());
        s.values = j.at("sweep").at("values").get<std::vector<double>>();
        cfg.sweep = s;
    }
    cfg.tlnp.alpha = cfg.alpha;
    cfg.tlnp.epsilon0 = cfg.epsilon0;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    nlohmann::json j = cfg;
    // Worker count changes scheduling only, never results.
    j.erase("workers");
    return fnv1a(j.dump());
}

std::string hash_hex(std::uint64_t hash) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << hash;
    return out.str();
}

void apply_env_overrides(ExperimentConfig& cfg) {
    if (const char* seed = std::getenv("TLNP_MASTER_SEED"); seed != nullptr && *seed != '\0') {
        cfg.master_seed = std::stoull(seed);
    }
    if (const char* workers = std::getenv("TLNP_WORKERS"); workers != nullptr && *workers != '\0') {
        cfg.workers = std::max<std::size_t>(1, std::stoull(workers));
    }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg = j.get<ExperimentConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    // Relative CSV paths are relative to the config file.
    if (auto* csv = std::get_if<CsvSource>(&cfg.data)) {
        const auto base = path.parent_path();
        if (csv->target.path.is_relative()) csv->target.path = base / csv->target.path;
        if (csv->source && csv->source->path.is_relative()) csv->source->path = base / csv->source->path;
    }
    apply_env_overrides(cfg);
    cfg.validate();
    return cfg;
}

std::uint64_t data_seed(std::uint64_t master_seed, std::size_t run) {
    return combine_seed(combine_seed(master_seed, static_cast<std::uint64_t>(run)),
                        std::string_view("data"));
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t run, const std::string& method) {
    return combine_seed(combine_seed(master_seed, static_cast<std::uint64_t>(run)),
                        std::string_view(method));
}

DatasetBundle build_run_data(const ExperimentConfig& cfg, double sweep_value, std::size_t run) {
    const std::uint64_t seed = data_seed(cfg.master_seed, run);
    if (const auto* g = std::get_if<GaussianSpec>(&cfg.data)) {
        GaussianSpec spec = *g;
        spec.seed = combine_seed(g->seed, seed);
        if (cfg.sweep) {
            const auto count = static_cast<std::size_t>(sweep_value);
            (cfg.sweep->variable == SweepVariable::n_source ? spec.n_source : spec.n_target) = count;
        }
        return gen_gaussian(spec);
    }

    const auto& csv = std::get<CsvSource>(cfg.data);
    CsvIngestSpec target = csv.target;
    target.seed = combine_seed(csv.target.seed, seed);
    target.abnormal_role = Role::target_abnormal;
    CsvIngestResult ingested = ingest_csv(target);
    DatasetBundle bundle = std::move(ingested.bundle);
    if (csv.source) {
        CsvIngestSpec source = *csv.source;
        source.seed = combine_seed(csv.source->seed, seed);
        source.abnormal_role = Role::source_abnormal;
        source.standardize = false;
        CsvIngestResult src = ingest_csv(source);
        // Source features use the target's training-normal statistics.
        if (ingested.standardizer) {
            ingested.standardizer->apply(src.bundle.source_train);
            ingested.standardizer->apply(src.bundle.source_test);
        }
        bundle.source_train = std::move(src.bundle.source_train);
        bundle.source_test = std::move(src.bundle.source_test);
    }
    if (cfg.sweep) {
        const auto count = static_cast<std::size_t>(sweep_value);
        Dataset& part =
            cfg.sweep->variable == SweepVariable::n_source ? bundle.source_train : bundle.target_train;
        part = subsample(part, count, combine_seed(seed, std::string_view("sweep")));
    }
    return bundle;
}

Learner learner_for(const ExperimentConfig& cfg, std::size_t dim, std::uint64_t seed) {
    Learner learner;
    learner.kind = cfg.model_kind;
    learner.arch = Architecture{dim, cfg.model_kind == ModelKind::mlp2 ? cfg.hidden_units : 0};
    learner.loss = cfg.loss;
    learner.train = cfg.train;
    learner.train.seed = seed;
    return learner;
}

TlnpConfig tlnp_config_for(const ExperimentConfig& cfg, std::uint64_t seed) {
    TlnpConfig tcfg = cfg.tlnp;
    tcfg.alpha = cfg.alpha;
    tcfg.epsilon0 = cfg.epsilon0;
    tcfg.split_seed = seed;
    return tcfg;
}

CellResult run_cell(const ExperimentConfig& cfg, const std::string& method,
                    const DatasetBundle& bundle, double sweep_value, std::size_t run) {
    CellResult cell;
    cell.method = method;
    cell.sweep_value = sweep_value;
    cell.run = run;
    cell.seed = cell_seed(cfg.master_seed, run, method);
    const auto start = std::chrono::steady_clock::now();
    try {
        const Learner learner = learner_for(cfg, bundle.dim(), cell.seed);
        const TlnpConfig tcfg = tlnp_config_for(cfg, cell.seed);
        const TrainingSet data = bundle.training();
        MethodOutput out = run_method(method, learner, data, tcfg);
        cell.train_type1 = out.hypothesis.train_type1;
        cell.train_type2 = out.hypothesis.train_target_type2;
        cell.lambda_s = out.hypothesis.lambda_s;
        cell.lambda_0 = out.hypothesis.lambda_0;
        cell.test_type1 = zero_one_type1(out.hypothesis.model, bundle.normal_test);
        cell.test_type2 = zero_one_type2(out.hypothesis.model, bundle.target_test);
        cell.audit = std::move(out.audit);
        cell.ok = true;
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
    }
    cell.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return cell;
}

std::vector<Aggregate> aggregate_cells(const std::vector<CellResult>& cells,
                                       const std::vector<std::string>& methods,
                                       const std::vector<double>& sweep_values) {
    std::vector<Aggregate> out;
    for (const auto& method : methods) {
        for (double value : sweep_values) {
            Aggregate agg;
            agg.method = method;
            agg.sweep_value = value;
            std::vector<double> type2, type1, train1;
            for (const auto& c : cells) {
                if (c.method != method || c.sweep_value != value) continue;
                if (!c.ok) {
                    ++agg.runs_failed;
                    continue;
                }
                ++agg.runs_ok;
                type2.push_back(c.test_type2);
                type1.push_back(c.test_type1);
                train1.push_back(c.train_type1);
            }
            agg.test_type2_mean = mean_of(type2);
            agg.test_type2_std = sample_std(type2, agg.test_type2_mean);
            agg.test_type1_mean = mean_of(type1);
            agg.test_type1_std = sample_std(type1, agg.test_type1_mean);
            agg.train_type1_mean = mean_of(train1);
            out.push_back(agg);
        }
    }
    return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<double> points = cfg.sweep_points();

    struct Job {
        std::size_t bundle;
        std::string method;
        double value;
        std::size_t run;
    };
    std::vector<DatasetBundle> bundles;
    std::vector<Job> jobs;
    for (double value : points) {
        for (std::size_t run = 0; run < cfg.runs; ++run) {
            bundles.push_back(build_run_data(cfg, value, run));
            for (const auto& method : cfg.methods) {
                jobs.push_back({bundles.size() - 1, method, value, run});
            }
        }
    }

    std::vector<CellResult> cells(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const Job& job = jobs[i];
            cells[i] = run_cell(cfg, job.method, bundles[job.bundle], job.value, job.run);
        }
    };
    const std::size_t threads = std::min<std::size_t>(std::max<std::size_t>(cfg.workers, 1),
                                                      std::max<std::size_t>(jobs.size(), 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    ExperimentReport report;
    report.config = cfg;
    report.config_hash = hash_hex(config_hash(cfg));
    if (cfg.sweep) report.sweep_variable = std::string(to_string(cfg.sweep->variable));
    for (const auto& c : cells) {
        if (!c.ok) {
            report.warnings.push_back(c.method + " run " + std::to_string(c.run) + " at sweep value " +
                                      std::to_string(c.sweep_value) + " failed: " + c.error);
        }
    }
    report.aggregates = aggregate_cells(cells, cfg.methods, points);
    report.cells = std::move(cells);
    return report;
}

nlohmann::json report_to_json(const ExperimentReport& report, bool include_timing) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : report.cells) {
        nlohmann::json cell{{"method", c.method},     {"sweep_value", c.sweep_value},
                            {"run", c.run},           {"seed", c.seed},
                            {"ok", c.ok},             {"error", c.error},
                            {"train_type1", c.train_type1}, {"train_type2", c.train_type2},
                            {"test_type1", c.test_type1},   {"test_type2", c.test_type2},
                            {"lambda_s", c.lambda_s}, {"lambda_0", c.lambda_0},
                            {"config_hash", report.config_hash}, {"audit", c.audit}};
        if (include_timing) cell["wall_seconds"] = c.wall_seconds;
        cells.push_back(std::move(cell));
    }
    nlohmann::json aggregates = nlohmann::json::array();
    for (const auto& a : report.aggregates) {
        aggregates.push_back({{"method", a.method},
                              {"sweep_value", a.sweep_value},
                              {"runs_ok", a.runs_ok},
                              {"runs_failed", a.runs_failed},
                              {"test_type2_mean", a.test_type2_mean},
                              {"test_type2_std", a.test_type2_std},
                              {"test_type1_mean", a.test_type1_mean},
                              {"test_type1_std", a.test_type1_std},
                              {"train_type1_mean", a.train_type1_mean}});
    }
    return {{"config", report.config},
            {"config_hash", report.config_hash},
            {"sweep_variable", report.sweep_variable ? nlohmann::json(*report.sweep_variable)
                                                     : nlohmann::json(nullptr)},
            {"cells", cells},
            {"aggregates", aggregates},
            {"warnings", report.warnings}};
}

ExperimentReport report_from_json(const nlohmann::json& j) {
    ExperimentReport report;
    report.config = j.at("config");
    report.config_hash = j.at("config_hash").get<std::string>();
    if (!j.at("sweep_variable").is_null()) {
        report.sweep_variable = j.at("sweep_variable").get<std::string>();
    }
    for (const auto& c : j.at("cells")) {
        CellResult cell;
        cell.method = c.at("method").get<std::string>();
        cell.sweep_value = c.at("sweep_value").get<double>();
        cell.run = c.at("run").get<std::size_t>();
        cell.seed = c.at("seed").get<std::uint64_t>();
        cell.ok = c.at("ok").get<bool>();
        cell.error = c.at("error").get<std::string>();
        cell.train_type1 = c.at("train_type1").get<double>();
        cell.train_type2 = c.at("train_type2").get<double>();
        cell.test_type1 = c.at("test_type1").get<double>();
        cell.test_type2 = c.at("test_type2").get<double>();
        cell.lambda_s = c.at("lambda_s").get<double>();
        cell.lambda_0 = c.at("lambda_0").get<double>();
        cell.wall_seconds = c.value("wall_seconds", 0.0);
        cell.audit = c.at("audit");
        report.cells.push_back(std::move(cell));
    }
    for (const auto& a : j.at("aggregates")) {
        Aggregate agg;
        agg.method = a.at("method").get<std::string>();
        agg.sweep_value = a.at("sweep_value").get<double>();
        agg.runs_ok = a.at("runs_ok").get<std::size_t>();
        agg.runs_failed = a.at("runs_failed").get<std::size_t>();
        agg.test_type2_mean = a.at("test_type2_mean").get<double>();
        agg.test_type2_std = a.at("test_type2_std").get<double>();
        agg.test_type1_mean = a.at("test_type1_mean").get<double>();
        agg.test_type1_std = a.at("test_type1_std").get<double>();
        agg.train_type1_mean = a.at("train_type1_mean").get<double>();
        report.aggregates.push_back(agg);
    }
    report.warnings = j.at("warnings").get<std::vector<std::string>>();
    return report;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << std::setprecision(17);
    return out;
}

std::string format_pm(double mean, double sd) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f \xC2\xB1 %.2f", mean, sd);
    return buf;
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& dir,
                                               ReportFormats formats) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;

    if (formats.json) {
        const auto path = dir / "report.json";
        auto out = open_for_write(path);
        out << report_to_json(report, false).dump(2) << '\n';
        written.push_back(path);

        const auto timing_path = dir / "timing.json";
        auto timing = open_for_write(timing_path);
        nlohmann::json t = nlohmann::json::array();
        for (const auto& c : report.cells) {
            t.push_back({{"method", c.method}, {"sweep_value", c.sweep_value}, {"run", c.run},
                         {"wall_seconds", c.wall_seconds}});
        }
        timing << t.dump(2) << '\n';
        written.push_back(timing_path);
    }

    std::vector<std::string> methods;
    std::vector<double> values;
    for (const auto& a : report.aggregates) {
        if (std::find(methods.begin(), methods.end(), a.method) == methods.end()) methods.push_back(a.method);
        if (std::find(values.begin(), values.end(), a.sweep_value) == values.end()) values.push_back(a.sweep_value);
    }
    const std::string variable = report.sweep_variable.value_or("none");

    if (formats.csv) {
        const auto path = dir / "aggregate.csv";
        auto out = open_for_write(path);
        out << "method,sweep_variable,sweep_value,runs_ok,runs_failed,test_type2_mean,"
               "test_type2_std,test_type1_mean,test_type1_std,train_type1_mean\n";
        for (const auto& a : report.aggregates) {
            out << a.method << ',' << variable << ',' << a.sweep_value << ',' << a.runs_ok << ','
                << a.runs_failed << ',' << a.test_type2_mean << ',' << a.test_type2_std << ','
                << a.test_type1_mean << ',' << a.test_type1_std << ',' << a.train_type1_mean
                << '\n';
        }
        written.push_back(path);

        // One row per method, one column per sweep value: "mean ± std" of test Type-II.
        const auto table_path = dir / "table.csv";
        auto table = open_for_write(table_path);
        table << "method";
        for (double v : values) table << ',' << variable << '=' << v;
        table << '\n';
        for (const auto& m : methods) {
            table << m;
            for (double v : values) {
                const auto it = std::find_if(report.aggregates.begin(), report.aggregates.end(),
                                             [&](const Aggregate& a) { return a.method == m && a.sweep_value == v; });
                table << ',' << (it != report.aggregates.end() && it->runs_ok > 0
                                     ? format_pm(it->test_type2_mean, it->test_type2_std)
                                     : std::string("n/a"));
            }
            table << '\n';
        }
        written.push_back(table_path);
    }

    if (formats.plot) {
        for (const auto& m : methods) {
            const auto path = dir / ("plot_" + m + ".dat");
            auto out = open_for_write(path);
            out << "# x y yerr  (x = " << variable << ", y = mean test Type-II, yerr = std)\n";
            for (const auto& a : report.aggregates) {
                if (a.method != m || a.runs_ok == 0) continue;
                out << a.sweep_value << ' ' << a.test_type2_mean << ' ' << a.test_type2_std << '\n';
            }
            written.push_back(path);
        }
    }
    return written;
}

}  // namespace tlnp
