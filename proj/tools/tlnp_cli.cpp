// Command-line front end: run experiments, generate data bundles, solve oracle
// fixtures and re-emit reports.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tlnp/data.hpp"
#include "tlnp/error.hpp"
#include "tlnp/experiment.hpp"
#include "tlnp/oracle.hpp"
#include "tlnp/seed.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw tlnp::IoError("cannot open " + path.string());
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw tlnp::ConfigError(path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw tlnp::IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

int cmd_run(const fs::path& config_path, const fs::path& out_dir, int workers, long long seed) {
    tlnp::ExperimentConfig cfg = tlnp::load_experiment_config(config_path);
    if (workers > 0) cfg.workers = static_cast<std::size_t>(workers);
    if (seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(seed);
    cfg.validate();

    const tlnp::ExperimentReport report = tlnp::run_experiment(cfg);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& path : tlnp::emit_report(report, out_dir)) std::cout << path.string() << '\n';

    std::cout << "config " << report.config_hash << '\n';
    for (const auto& a : report.aggregates) {
        std::cout << a.method << " @" << a.sweep_value << ": test Type-II " << a.test_type2_mean
                  << " +- " << a.test_type2_std << ", test Type-I " << a.test_type1_mean << " ("
                  << a.runs_ok << " ok, " << a.runs_failed << " failed)\n";
    }
    return 0;
}

int cmd_gen_data(const fs::path& spec_path, const fs::path& out_dir) {
    const json spec = read_json(spec_path);
    const json data_spec = spec.contains("data") ? spec.at("data") : spec;
    const std::string key = tlnp::hash_hex(tlnp::fnv1a(data_spec.dump()));
    const fs::path target = out_dir / ("bundle_" + key + ".json");
    if (fs::exists(target)) {
        std::cout << target.string() << " (cached)\n";
        return 0;
    }

    json out{{"spec", data_spec}, {"key", key}};
    const std::string type = data_spec.value("type", std::string("gaussian"));
    if (type == "gaussian") {
        out["bundle"] = tlnp::gen_gaussian(data_spec.get<tlnp::GaussianSpec>());
    } else if (type == "csv") {
        auto csv = data_spec.contains("target") ? data_spec.at("target").get<tlnp::CsvIngestSpec>()
                                                : data_spec.get<tlnp::CsvIngestSpec>();
        if (csv.path.is_relative()) csv.path = spec_path.parent_path() / csv.path;
        const tlnp::CsvIngestResult result = tlnp::ingest_csv(csv);
        out["bundle"] = result.bundle;
        out["ingest"] = {{"threshold", result.threshold},
                         {"total_rows", result.total_rows},
                         {"abnormal_rows", result.abnormal_rows},
                         {"dropped_missing", result.dropped_missing},
                         {"dropped_unparseable", result.dropped_unparseable}};
        if (result.dropped_missing > 0) {
            std::cerr << "dropped " << result.dropped_missing << " rows with missing values\n";
        }
    } else {
        throw tlnp::ConfigError("data type must be gaussian or csv");
    }
    write_json(target, out);
    std::cout << target.string() << '\n';
    return 0;
}

int cmd_oracle(const fs::path& fixture_path, const fs::path& out_path) {
    const json fx = read_json(fixture_path);
    tlnp::FiniteClass cls;
    cls.hypotheses = fx.at("hypotheses").get<std::vector<tlnp::Model>>();
    cls.c_tilde = fx.value("c_tilde", 0.0);
    const auto loss = fx.contains("loss") ? fx.at("loss").get<tlnp::SurrogateLossSpec>()
                                          : tlnp::SurrogateLossSpec{};
    const double alpha = fx.value("alpha", 0.05);
    const double eps0 = fx.value("epsilon0", 0.01);

    auto dataset = [&](const char* key, tlnp::Role role) {
        tlnp::Dataset d = fx.at(key).get<tlnp::Dataset>();
        d.role = role;
        return d;
    };
    const tlnp::TrainingSet data{dataset("normal", tlnp::Role::normal),
                                 dataset("target", tlnp::Role::target_abnormal),
                                 dataset("source", tlnp::Role::source_abnormal)};

    const tlnp::ClassRisks risks = tlnp::compute_class_risks(cls, data, loss);
    const tlnp::OracleChoice target_hat = tlnp::solve_target_hat(risks, alpha, eps0);
    const tlnp::OracleChoice chosen =
        tlnp::solve_procedure8(risks, alpha, eps0, cls.c_tilde, data.target.size());

    json result{{"target_hat", {{"index", target_hat.index},
                                {"surrogate_type1", target_hat.type1},
                                {"surrogate_target", target_hat.target}}},
                {"procedure", {{"index", chosen.index},
                               {"surrogate_type1", chosen.type1},
                               {"surrogate_target", chosen.target},
                               {"surrogate_source", *chosen.source}}},
                {"risks", {{"type1", risks.type1}, {"target", risks.target}, {"source", risks.source}}}};

    if (fx.contains("exponent")) {
        const json& e = fx.at("exponent");
        const auto est = tlnp::estimate_transfer_exponent(
            cls, e.at("normal_law").get<tlnp::DiscreteLaw>(), e.at("source_law").get<tlnp::DiscreteLaw>(),
            e.at("target_law").get<tlnp::DiscreteLaw>(), loss, e.value("alpha", alpha),
            e.value("r", 0.0), e.value("grid", std::vector<double>{0.5, 1, 1.5, 2, 3, 4}));
        result["transfer_exponent"] = {{"rho", est.rho},
                                       {"c", est.c},
                                       {"degenerate", est.degenerate},
                                       {"reference_index", est.reference_index}};
    }

    if (out_path.empty()) {
        std::cout << result.dump(2) << '\n';
    } else {
        write_json(out_path, result);
        std::cout << out_path.string() << '\n';
    }
    return 0;
}

int cmd_report(const fs::path& input, const fs::path& out_dir) {
    const tlnp::ExperimentReport report = tlnp::report_from_json(read_json(input));
    tlnp::ReportFormats formats;
    formats.json = false;
    for (const auto& path : tlnp::emit_report(report, out_dir, formats)) {
        std::cout << path.string() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transfer-learning Neyman-Pearson outlier detection"};
    app.require_subcommand(1);

    fs::path run_config;
    fs::path run_out = "results";
    int run_workers = 0;
    long long run_seed = -1;
    auto* run = app.add_subcommand("run", "Run an experiment from a config file");
    run->add_option("config", run_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--out", run_out, "Output directory");
    run->add_option("-w,--workers", run_workers, "Worker threads (overrides config and TLNP_WORKERS)");
    run->add_option("-s,--seed", run_seed, "Master seed (overrides config and TLNP_MASTER_SEED)");

    fs::path gen_spec;
    fs::path gen_out = "data";
    auto* gen = app.add_subcommand("gen-data", "Generate or ingest a dataset bundle");
    gen->add_option("spec", gen_spec, "Gaussian or CSV data spec (JSON)")->required()->check(CLI::ExistingFile);
    gen->add_option("-o,--out", gen_out, "Cache directory");

    fs::path oracle_fixture;
    fs::path oracle_out;
    auto* oracle = app.add_subcommand("oracle", "Solve a finite-class fixture exactly");
    oracle->add_option("fixture", oracle_fixture, "Fixture (JSON)")->required()->check(CLI::ExistingFile);
    oracle->add_option("-o,--out", oracle_out, "Write the result here instead of stdout");

    fs::path report_in;
    fs::path report_out = "results";
    auto* report = app.add_subcommand("report", "Re-emit CSV and plot files from a JSON report");
    report->add_option("report", report_in, "report.json")->required()->check(CLI::ExistingFile);
    report->add_option("-o,--out", report_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_config, run_out, run_workers, run_seed);
        if (*gen) return cmd_gen_data(gen_spec, gen_out);
        if (*oracle) return cmd_oracle(oracle_fixture, oracle_out);
        if (*report) return cmd_report(report_in, report_out);
    } catch (const tlnp::AlgorithmFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        for (const auto& line : e.diagnostics()) std::cerr << "  " << line << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
