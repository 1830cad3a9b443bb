#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "tlnp/baselines.hpp"
#include "tlnp/data.hpp"
#include "tlnp/error.hpp"
#include "tlnp/experiment.hpp"
#include "tlnp/losses.hpp"
#include "tlnp/models.hpp"
#include "tlnp/oracle.hpp"
#include "tlnp/risk.hpp"
#include "tlnp/tlnp.hpp"
#include "tlnp/trainer.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

using RowMatrix = tlnp::Matrix;

tlnp::Dataset as_dataset(const RowMatrix& X, tlnp::Role role) {
    tlnp::Dataset d{X, role, tlnp::SplitKind::train};
    d.validate();
    return d;
}

tlnp::TrainingSet training_set(const RowMatrix& normal, const RowMatrix& target,
                               const std::optional<RowMatrix>& source) {
    RowMatrix src = source ? *source : RowMatrix(0, normal.cols());
    return {as_dataset(normal, tlnp::Role::normal), as_dataset(target, tlnp::Role::target_abnormal),
            as_dataset(src, tlnp::Role::source_abnormal)};
}

tlnp::SurrogateLossSpec loss_spec(const std::string& family, double clamp) {
    tlnp::SurrogateLossSpec spec{tlnp::parse_loss_family(family), clamp};
    spec.validate();
    return spec;
}

json parse(const std::string& text) {
    try {
        return text.empty() ? json::object() : json::parse(text);
    } catch (const json::parse_error& e) {
        throw tlnp::ConfigError(e.what());
    }
}

// Experiment-style settings (model, loss, train, tlnp, alpha, epsilon0) from JSON.
tlnp::ExperimentConfig settings(const std::string& config_json) {
    try {
        tlnp::ExperimentConfig cfg = parse(config_json).get<tlnp::ExperimentConfig>();
        return cfg;
    } catch (const json::exception& e) {
        throw tlnp::ConfigError(e.what());
    }
}

py::dict hypothesis_dict(const tlnp::TunedHypothesis& h) {
    py::dict d;
    d["model"] = h.model;
    d["lambda_s"] = h.lambda_s;
    d["lambda_0"] = h.lambda_0;
    d["train_type1"] = h.train_type1;
    d["train_target_type2"] = h.train_target_type2;
    d["train_source_type2"] = h.train_source_type2;
    d["grid_index"] = h.grid_index;
    return d;
}

py::dict bundle_dict(const tlnp::DatasetBundle& b) {
    py::dict d;
    d["normal_train"] = b.normal_train.X;
    d["target_train"] = b.target_train.X;
    d["source_train"] = b.source_train.X;
    d["normal_test"] = b.normal_test.X;
    d["target_test"] = b.target_test.X;
    d["source_test"] = b.source_test.X;
    return d;
}

}  // namespace

PYBIND11_MODULE(_tlnp, m) {
    m.doc() = "Transfer-learning Neyman-Pearson classification (C++ core)";

    auto base = py::register_exception<tlnp::Error>(m, "TlnpError", PyExc_RuntimeError);
    py::register_exception<tlnp::InputError>(m, "InputError", base.ptr());
    py::register_exception<tlnp::ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<tlnp::UndefinedError>(m, "UndefinedError", base.ptr());
    py::register_exception<tlnp::IngestError>(m, "IngestError", base.ptr());
    py::register_exception<tlnp::AlgorithmFailure>(m, "AlgorithmFailure", base.ptr());
    py::register_exception<tlnp::FeasibilityError>(m, "FeasibilityError", base.ptr());
    py::register_exception<tlnp::TrainingDiverged>(m, "TrainingDiverged", base.ptr());

    m.def(
        "eval_loss",
        [](const std::string& family, double margin, double clamp) {
            return tlnp::eval_loss(loss_spec(family, clamp), margin);
        },
        py::arg("family"), py::arg("margin"), py::arg("clamp") = 20.0);
    m.def(
        "eval_loss_deriv",
        [](const std::string& family, double margin, double clamp) {
            return tlnp::eval_loss_deriv(loss_spec(family, clamp), margin);
        },
        py::arg("family"), py::arg("margin"), py::arg("clamp") = 20.0);

    py::class_<tlnp::Model>(m, "Model")
        .def_property_readonly("kind", [](const tlnp::Model& mdl) { return std::string(tlnp::to_string(mdl.kind)); })
        .def_property_readonly("input_dim", [](const tlnp::Model& mdl) { return mdl.arch.input_dim; })
        .def_property_readonly("hidden_units", [](const tlnp::Model& mdl) { return mdl.arch.hidden_units; })
        .def_readonly("seed", &tlnp::Model::seed)
        .def_property(
            "params", [](const tlnp::Model& mdl) { return mdl.params; },
            [](tlnp::Model& mdl, const tlnp::Vector& p) {
                tlnp::Model next = mdl;
                next.params = p;
                next.validate();
                mdl = next;
            })
        .def("forward", [](const tlnp::Model& mdl, const RowMatrix& X) { return tlnp::forward_rows(mdl, X); })
        .def("predict", [](const tlnp::Model& mdl, const RowMatrix& X) {
            const tlnp::Vector s = tlnp::forward_rows(mdl, X);
            Eigen::VectorXi out(s.size());
            for (Eigen::Index i = 0; i < s.size(); ++i) out[i] = s[i] >= 0.0 ? 1 : -1;
            return out;
        })
        .def("gradient", [](const tlnp::Model& mdl, const tlnp::Vector& x) { return tlnp::backward(mdl, x, 1.0); })
        .def("to_json", [](const tlnp::Model& mdl) { return json(mdl).dump(); })
        .def_static("from_json", [](const std::string& text) { return parse(text).get<tlnp::Model>(); })
        .def("__repr__", [](const tlnp::Model& mdl) {
            return "<tlnp.Model " + std::string(tlnp::to_string(mdl.kind)) + " d=" +
                   std::to_string(mdl.arch.input_dim) + " params=" + std::to_string(mdl.params.size()) + ">";
        });

    m.def(
        "init_model",
        [](const std::string& kind, std::size_t input_dim, std::size_t hidden_units, std::uint64_t seed) {
            return tlnp::init_model(tlnp::parse_model_kind(kind), {input_dim, hidden_units}, seed);
        },
        py::arg("kind"), py::arg("input_dim"), py::arg("hidden_units") = 0, py::arg("seed") = 0);
    m.def(
        "make_model",
        [](const std::string& kind, std::size_t input_dim, std::size_t hidden_units, const tlnp::Vector& params) {
            return tlnp::make_model(tlnp::parse_model_kind(kind), {input_dim, hidden_units}, params);
        },
        py::arg("kind"), py::arg("input_dim"), py::arg("hidden_units"), py::arg("params"));
    m.def(
        "parameter_count",
        [](const std::string& kind, std::size_t input_dim, std::size_t hidden_units) {
            return tlnp::parameter_count(tlnp::parse_model_kind(kind), {input_dim, hidden_units});
        },
        py::arg("kind"), py::arg("input_dim"), py::arg("hidden_units") = 0);

    m.def("type1_error", [](const tlnp::Model& mdl, const RowMatrix& normal) {
        return tlnp::zero_one_type1(mdl, as_dataset(normal, tlnp::Role::normal));
    });
    m.def("type2_error", [](const tlnp::Model& mdl, const RowMatrix& abnormal) {
        return tlnp::zero_one_type2(mdl, as_dataset(abnormal, tlnp::Role::target_abnormal));
    });
    m.def(
        "surrogate_type1",
        [](const tlnp::Model& mdl, const RowMatrix& normal, const std::string& family, double clamp) {
            return tlnp::surrogate_type1(loss_spec(family, clamp), mdl, as_dataset(normal, tlnp::Role::normal));
        },
        py::arg("model"), py::arg("normal"), py::arg("family") = "exponential", py::arg("clamp") = 20.0);
    m.def(
        "surrogate_type2",
        [](const tlnp::Model& mdl, const RowMatrix& abnormal, const std::string& family, double clamp) {
            return tlnp::surrogate_type2(loss_spec(family, clamp), mdl,
                                         as_dataset(abnormal, tlnp::Role::target_abnormal));
        },
        py::arg("model"), py::arg("abnormal"), py::arg("family") = "exponential", py::arg("clamp") = 20.0);

    m.def(
        "_train",
        [](const RowMatrix& normal, const RowMatrix& target, const std::optional<RowMatrix>& source,
           double lambda_s, double lambda_0, const std::string& config_json) {
            const tlnp::ExperimentConfig cfg = settings(config_json);
            const auto data = training_set(normal, target, source);
            const tlnp::Learner l = tlnp::learner_for(cfg, static_cast<std::size_t>(normal.cols()), cfg.train.seed);
            py::gil_scoped_release release;
            return tlnp::train(l.kind, l.arch, l.loss, data, lambda_s, lambda_0, l.train);
        });

    m.def(
        "_fit",
        [](const std::string& method, const RowMatrix& normal, const RowMatrix& target,
           const std::optional<RowMatrix>& source, const std::string& config_json) {
            const tlnp::ExperimentConfig cfg = settings(config_json);
            const auto data = training_set(normal, target, source);
            const tlnp::Learner learner =
                tlnp::learner_for(cfg, static_cast<std::size_t>(normal.cols()), cfg.train.seed);
            const tlnp::TlnpConfig tcfg = tlnp::tlnp_config_for(cfg, cfg.tlnp.split_seed);
            tlnp::TunedHypothesis h;
            json audit;
            {
                py::gil_scoped_release release;
                if (method == "tlnp" || method == "tlnp_variance") {
                    tlnp::TlnpConfig t = tcfg;
                    if (method == "tlnp_variance") t.filter_mode = tlnp::FilterMode::variance_method;
                    const tlnp::TlnpResult r = tlnp::run_tlnp(learner, data, t);
                    h = r.selected;
                    audit = tlnp::audit_json(r);
                } else if (method == "only_target_np") {
                    h = tlnp::only_target_np(learner, data, tcfg);
                } else if (method == "only_source_np") {
                    h = tlnp::only_source_np(learner, data, tcfg);
                } else if (method == "pooled_np") {
                    h = tlnp::pooled_np(learner, data, tcfg);
                } else if (method == "threshold_target" || method == "threshold_pooled") {
                    h = tlnp::threshold_classifier(learner, data, tcfg, method == "threshold_pooled");
                } else if (method == "tlod") {
                    h = tlnp::tlod(learner, data, tcfg);
                } else {
                    throw tlnp::ConfigError("unknown method: " + method);
                }
            }
            py::dict out = hypothesis_dict(h);
            out["audit"] = audit.is_null() ? py::none() : py::cast(audit.dump());
            return out;
        });

    m.def("_gen_gaussian", [](const std::string& spec_json) {
        return bundle_dict(tlnp::gen_gaussian(parse(spec_json).get<tlnp::GaussianSpec>()));
    });
    m.def("_ingest_csv", [](const std::string& spec_json) {
        const tlnp::CsvIngestResult r = tlnp::ingest_csv(parse(spec_json).get<tlnp::CsvIngestSpec>());
        py::dict out = bundle_dict(r.bundle);
        out["threshold"] = r.threshold;
        out["total_rows"] = r.total_rows;
        out["abnormal_rows"] = r.abnormal_rows;
        out["dropped_missing"] = r.dropped_missing;
        out["dropped_unparseable"] = r.dropped_unparseable;
        return out;
    });
    m.def("_run_experiment", [](const std::string& config_json, bool include_timing) {
        tlnp::ExperimentConfig cfg = settings(config_json);
        tlnp::ExperimentReport report;
        {
            py::gil_scoped_release release;
            report = tlnp::run_experiment(cfg);
        }
        return tlnp::report_to_json(report, include_timing).dump();
    });
    m.def("_config_hash", [](const std::string& config_json) {
        return tlnp::hash_hex(tlnp::config_hash(settings(config_json)));
    });

    m.def(
        "solve_procedure8",
        [](std::vector<double> type1, std::vector<double> target, std::vector<double> source,
           double alpha, double epsilon0, double c_tilde, std::size_t n_target) {
            tlnp::ClassRisks r{std::move(type1), std::move(target), std::move(source)};
            return tlnp::solve_procedure8(r, alpha, epsilon0, c_tilde, n_target).index;
        },
        py::arg("type1"), py::arg("target"), py::arg("source"), py::arg("alpha"), py::arg("epsilon0"),
        py::arg("c_tilde"), py::arg("n_target"));
    m.def(
        "solve_target_hat",
        [](std::vector<double> type1, std::vector<double> target, double alpha, double epsilon0) {
            tlnp::ClassRisks r{std::move(type1), std::move(target), {}};
            return tlnp::solve_target_hat(r, alpha, epsilon0).index;
        },
        py::arg("type1"), py::arg("target"), py::arg("alpha"), py::arg("epsilon0"));
}
