// Python bindings. Priors, configs and reports cross the boundary as plain
// dicts in the same layout as the CLI's JSON files.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fmig/cotrain.hpp"
#include "fmig/io.hpp"
#include "fmig/mechanisms.hpp"
#include "fmig/mig.hpp"
#include "fmig/prioranalysis.hpp"
#include "fmig/psgain.hpp"

namespace py = pybind11;
using fmig::json;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::object& o) {
    return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

fmig::TripletPrior prior_of(const py::dict& d) { return fmig::prior_from_json(from_py(d)); }

fmig::Hypothesis hyp_of(const std::vector<std::vector<double>>& rows) {
    std::vector<fmig::Simplex> s;
    for (const auto& r : rows) s.emplace_back(r);
    return fmig::Hypothesis(std::move(s));
}

std::vector<std::vector<double>> rows_of(const fmig::Hypothesis& h) {
    std::vector<std::vector<double>> out;
    for (const auto& r : h.rows()) out.push_back(r.vec());
    return out;
}

fmig::View view_of(const std::string& v) {
    if (v == "A" || v == "a") return fmig::View::A;
    if (v == "B" || v == "b") return fmig::View::B;
    throw std::invalid_argument("view must be 'A' or 'B'");
}

using Task = std::tuple<std::int64_t, std::optional<std::size_t>, std::optional<std::size_t>>;

fmig::SampleSet samples_of(const std::vector<Task>& tasks) {
    fmig::SampleSet s;
    for (const auto& [id, a, b] : tasks) s.push_back({id, a, b});
    return s;
}

fmig::OptimizerConfig config_of(const py::object& o) {
    return o.is_none() ? fmig::OptimizerConfig{} : fmig::optimizer_config_from_json(from_py(o));
}

}  // namespace

PYBIND11_MODULE(_fmig, m) {
    m.doc() = "f-mutual information gain toolkit";
    m.def("version", &fmig::version);

    m.def("builtin_names", &fmig::builtin_names);
    m.def(
        "f_divergence",
        [](const std::vector<double>& p, const std::vector<double>& q, const std::string& spec) {
            return fmig::f_divergence(fmig::Simplex(p), fmig::Simplex(q), fmig::builtin(spec));
        },
        py::arg("p"), py::arg("q"), py::arg("spec") = "kl");
    m.def(
        "f_mutual_information",
        [](const Eigen::MatrixXd& joint, const std::string& spec) {
            return fmig::f_mutual_information(fmig::JointAB(joint), fmig::builtin(spec));
        },
        py::arg("joint"), py::arg("spec") = "kl");

    m.def(
        "generate_prior",
        [](std::size_t sa, std::size_t sb, std::size_t sy, std::uint64_t seed, double concentration, bool require_stable) {
            return to_py(fmig::to_json(fmig::generate_prior(sa, sb, sy, seed, concentration, require_stable)));
        },
        py::arg("sigma_a"), py::arg("sigma_b"), py::arg("sigma_y"), py::arg("seed") = 0, py::arg("concentration") = 1.0,
        py::arg("require_stable") = false);
    m.def(
        "anchor_signals",
        [](const py::dict& prior, double mass) { return to_py(fmig::to_json(fmig::anchor_signals(prior_of(prior), mass))); },
        py::arg("prior"), py::arg("anchor_mass") = 0.0);
    m.def("induce_joint", [](const py::dict& prior) { return fmig::induce_joint(prior_of(prior)).table(); });
    m.def(
        "posterior_predictor",
        [](const py::dict& prior, const std::string& view) {
            return rows_of(fmig::Hypothesis::posterior_predictor(prior_of(prior), view_of(view)));
        },
        py::arg("prior"), py::arg("view"));
    m.def(
        "sample_tasks",
        [](const py::dict& prior, std::size_t n, std::optional<std::size_t> overlap, std::uint64_t seed) {
            std::vector<Task> out;
            for (const auto& t : fmig::sample_tasks(prior_of(prior), n, overlap.value_or(n), seed))
                out.emplace_back(t.task_id, t.x_a, t.x_b);
            return out;
        },
        py::arg("prior"), py::arg("n"), py::arg("overlap") = py::none(), py::arg("seed") = 0);

    m.def(
        "empirical_mig",
        [](const std::vector<std::vector<double>>& ha, const std::vector<std::vector<double>>& hb,
           const std::vector<double>& p, const std::string& spec, const std::vector<Task>& tasks) {
            return fmig::empirical_mig(hyp_of(ha), hyp_of(hb), fmig::Simplex(p), fmig::builtin(spec), samples_of(tasks));
        },
        py::arg("h_a"), py::arg("h_b"), py::arg("p"), py::arg("spec"), py::arg("tasks"));
    m.def(
        "expected_mig",
        [](const std::vector<std::vector<double>>& ha, const std::vector<std::vector<double>>& hb,
           const std::vector<double>& p, const std::string& spec, const py::dict& prior) {
            return fmig::expected_mig(hyp_of(ha), hyp_of(hb), fmig::Simplex(p), fmig::builtin(spec), prior_of(prior));
        },
        py::arg("h_a"), py::arg("h_b"), py::arg("p"), py::arg("spec"), py::arg("prior"));

    m.def(
        "optimize_mig",
        [](const py::dict& prior, const std::string& spec, const py::object& optimizer) {
            const auto q = prior_of(prior);
            const auto cfg = config_of(optimizer);
            fmig::CotrainResult r;
            {
                py::gil_scoped_release release;
                r = fmig::optimize_mig(q, fmig::builtin(spec), cfg);
            }
            return to_py(fmig::to_json(r));
        },
        py::arg("prior"), py::arg("spec") = "kl", py::arg("optimizer") = py::none());
    m.def(
        "optimize_ps_gain",
        [](const py::dict& prior, const std::string& rule, bool constrained, const py::object& optimizer) {
            const auto q = prior_of(prior);
            const auto cfg = config_of(optimizer);
            fmig::PsGainResult r;
            {
                py::gil_scoped_release release;
                r = fmig::optimize_ps_gain(q, fmig::scoring_rule(rule), cfg, constrained);
            }
            return to_py(fmig::to_json(r));
        },
        py::arg("prior"), py::arg("scoring_rule") = "log", py::arg("constrained") = true,
        py::arg("optimizer") = py::none());
    m.def("lsr_truth_value", [](const py::dict& prior) { return fmig::lsr_truth_value(prior_of(prior)); });

    m.def("check_stable", [](const py::dict& prior) { return to_py(fmig::to_json(fmig::check_stable(prior_of(prior)))); });
    m.def(
        "check_well_defined",
        [](const py::dict& prior, double res) {
            return to_py(fmig::to_json(fmig::check_well_defined(prior_of(prior), res)));
        },
        py::arg("prior"), py::arg("grid_resolution") = 0.05);
    m.def("verify_ci_identity", [](const py::dict& prior) { return fmig::verify_ci_identity(prior_of(prior)); });

    m.def(
        "verify_truthful",
        [](const py::dict& prior, const std::string& mechanism, const std::string& spec, double res) {
            if (mechanism != "single" && mechanism != "mcg") throw std::invalid_argument("mechanism must be single or mcg");
            const auto mech = mechanism == "single" ? fmig::Mechanism::single() : fmig::Mechanism::mcg(fmig::builtin(spec));
            return to_py(fmig::to_json(fmig::verify_truthful(prior_of(prior), mech, res)));
        },
        py::arg("prior"), py::arg("mechanism") = "single", py::arg("spec") = "kl", py::arg("grid_resolution") = 0.05);
    m.def(
        "verify_focal",
        [](const py::dict& prior, const std::string& spec, double res) {
            return to_py(fmig::to_json(fmig::verify_focal(prior_of(prior), fmig::builtin(spec), res)));
        },
        py::arg("prior"), py::arg("spec") = "kl", py::arg("grid_resolution") = 0.05);
}
