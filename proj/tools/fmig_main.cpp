// fmig: experiment runner over the library.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fmig/cotrain.hpp"
#include "fmig/detail/parallel.hpp"
#include "fmig/distributions.hpp"
#include "fmig/divergence.hpp"
#include "fmig/io.hpp"
#include "fmig/mechanisms.hpp"
#include "fmig/mig.hpp"
#include "fmig/prioranalysis.hpp"
#include "fmig/psgain.hpp"

namespace fs = std::filesystem;
using fmig::json;

namespace {

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    bool deterministic = false;
};

// Failures that should exit nonzero but are not malformed input.
struct CommandFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Context {
    json cfg;
    fs::path config_dir;
    fs::path out_dir;
    std::string hash;
    std::size_t threads = 1;

    fs::path resolve(const std::string& p) const {
        const fs::path path(p);
        return path.is_absolute() ? path : config_dir / path;
    }
    fs::path output(const json& cfg_key_holder, const char* key, const char* fallback) const {
        return out_dir / (cfg_key_holder.contains(key) ? cfg_key_holder[key].get<std::string>() : fallback);
    }
    std::string provenance() const { return fmig::provenance_line(hash); }
};

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void require(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw std::invalid_argument(where + ": missing key '" + key + "'");
}

std::vector<std::size_t> sizes_of(const json& j, const std::string& where) {
    require(j, "sizes", where);
    const auto sizes = j.at("sizes").get<std::vector<std::size_t>>();
    if (sizes.size() != 3) throw std::invalid_argument(where + ": 'sizes' must be [sigma_a, sigma_b, sigma_y]");
    return sizes;
}

const std::vector<std::string> kGenerateKeys{"sizes",       "seed",           "concentration", "require_stable",
                                             "max_retries", "anchor_signals", "anchor_mass"};

fmig::TripletPrior generate_from(const json& g) {
    const auto sizes = sizes_of(g, "generate");
    auto prior = fmig::generate_prior(sizes[0], sizes[1], sizes[2], get_or<std::uint64_t>(g, "seed", 0),
                                      get_or<double>(g, "concentration", 1.0), get_or<bool>(g, "require_stable", false),
                                      get_or<std::size_t>(g, "max_retries", 1000));
    // anchor_mass alone implies anchoring
    if (get_or<bool>(g, "anchor_signals", g.contains("anchor_mass")))
        prior = fmig::anchor_signals(prior, get_or<double>(g, "anchor_mass", 0.0));
    return prior;
}

// A prior is named by file ("prior") or generated in place ("generate").
fmig::TripletPrior load_prior(const Context& ctx) {
    const bool has_file = ctx.cfg.contains("prior");
    const bool has_gen = ctx.cfg.contains("generate");
    if (has_file == has_gen) throw std::invalid_argument("config: give exactly one of 'prior' or 'generate'");
    if (has_file) return fmig::read_prior_file(ctx.resolve(ctx.cfg["prior"].get<std::string>()));
    fmig::reject_unknown_keys(ctx.cfg["generate"], kGenerateKeys, "generate");
    return generate_from(ctx.cfg["generate"]);
}

fmig::ConvexSpec spec_of(const json& cfg) { return fmig::builtin(get_or<std::string>(cfg, "spec", "kl")); }

void open_csv(std::ofstream& out, const fs::path& path, const Context& ctx, const std::string& header) {
    out.open(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << ctx.provenance() << '\n' << header << '\n';
}

// gen-prior -----------------------------------------------------------------

int cmd_gen_prior(const Context& ctx) {
    auto allowed = kGenerateKeys;
    allowed.insert(allowed.end(), {"output", "report_stability", "well_defined_grid"});
    fmig::reject_unknown_keys(ctx.cfg, allowed, "gen-prior");
    const fmig::TripletPrior prior = generate_from(ctx.cfg);
    const fs::path path = ctx.output(ctx.cfg, "output", "prior.json");
    fmig::write_json_file(path, fmig::to_json(prior));
    std::cout << "wrote " << path.string() << '\n';
    if (get_or<bool>(ctx.cfg, "report_stability", false)) {
        const auto st = fmig::check_stable(prior);
        std::cout << "stable: " << (st.stable ? "yes" : "no") << " (rank_a " << st.rank_a << ", rank_b " << st.rank_b
                  << ", need " << prior.sigma_y() << ")\n";
    }
    if (ctx.cfg.contains("well_defined_grid")) {
        const auto wd = fmig::check_well_defined(prior, ctx.cfg["well_defined_grid"].get<double>());
        std::cout << "well-defined: " << fmig::to_string(wd.verdict) << '\n';
    }
    return 0;
}

// estimate-mi ---------------------------------------------------------------

int estimate_fixture(const Context& ctx) {
    const json fx = fmig::read_json_file(ctx.resolve(ctx.cfg["fixture"].get<std::string>()));
    fmig::reject_unknown_keys(fx, {"description", "spec", "p", "h_a", "h_b", "tasks"}, "fixture");
    const fmig::Hypothesis h_a = fmig::hypothesis_from_json(fx.at("h_a"));
    const fmig::Hypothesis h_b = fmig::hypothesis_from_json(fx.at("h_b"));
    const fmig::Simplex p(fx.at("p").get<std::vector<double>>());
    fmig::SampleSet samples;
    for (const auto& t : fx.at("tasks")) {
        fmig::reject_unknown_keys(t, {"task_id", "x_a", "x_b"}, "fixture task");
        fmig::TaskSample s;
        s.task_id = t.at("task_id").get<std::int64_t>();
        if (t.contains("x_a") && !t["x_a"].is_null()) s.x_a = t["x_a"].get<std::size_t>();
        if (t.contains("x_b") && !t["x_b"].is_null()) s.x_b = t["x_b"].get<std::size_t>();
        samples.push_back(s);
    }
    const auto spec = fmig::builtin(ctx.cfg.contains("spec") ? ctx.cfg["spec"].get<std::string>()
                                                             : get_or<std::string>(fx, "spec", "kl"));
    const double gain = fmig::empirical_mig(h_a, h_b, p, spec, samples);
    std::ofstream out;
    const fs::path path = ctx.output(ctx.cfg, "output", "mi.csv");
    open_csv(out, path, ctx, "n,replicate,empirical_gain,exact_mi,stderr");
    out << samples.size() << ",0," << fmig::format_double(gain) << ",,\n";
    std::cout << "empirical gain " << fmig::format_double(gain) << " nats (" << spec.name << ")\nwrote "
              << path.string() << '\n';
    return 0;
}

int cmd_estimate_mi(const Context& ctx) {
    fmig::reject_unknown_keys(ctx.cfg,
                              {"prior", "generate", "fixture", "spec", "sample_sizes", "replicates", "overlap_fraction",
                               "seed", "output"},
                              "estimate-mi");
    if (ctx.cfg.contains("fixture")) {
        if (ctx.cfg.contains("prior") || ctx.cfg.contains("generate") || ctx.cfg.contains("sample_sizes"))
            throw std::invalid_argument("estimate-mi: 'fixture' excludes prior and sample settings");
        return estimate_fixture(ctx);
    }
    const auto prior = load_prior(ctx);
    const auto spec = spec_of(ctx.cfg);
    require(ctx.cfg, "sample_sizes", "estimate-mi");
    const auto sizes = ctx.cfg["sample_sizes"].get<std::vector<std::size_t>>();
    const std::size_t reps = get_or<std::size_t>(ctx.cfg, "replicates", 100);
    const double overlap_fraction = get_or<double>(ctx.cfg, "overlap_fraction", 1.0);
    const std::uint64_t seed = get_or<std::uint64_t>(ctx.cfg, "seed", 0);
    if (sizes.empty() || reps < 2) throw std::invalid_argument("estimate-mi: need sample sizes and at least 2 replicates");
    if (!(overlap_fraction > 0.0 && overlap_fraction <= 1.0))
        throw std::invalid_argument("estimate-mi: overlap_fraction must lie in (0, 1]");

    const double exact = fmig::f_mutual_information(fmig::induce_joint(prior), spec);
    const auto h_a = fmig::Hypothesis::posterior_predictor(prior, fmig::View::A);
    const auto h_b = fmig::Hypothesis::posterior_predictor(prior, fmig::View::B);

    std::ofstream out;
    const fs::path path = ctx.output(ctx.cfg, "output", "mi.csv");
    open_csv(out, path, ctx, "n,replicate,empirical_gain,exact_mi,stderr");
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        const std::size_t n = sizes[si];
        const auto overlap = static_cast<std::size_t>(std::llround(overlap_fraction * static_cast<double>(n)));
        std::vector<double> gains(reps);
        fmig::detail::parallel_for(reps, ctx.threads, [&](std::size_t r) {
            const auto samples = fmig::sample_tasks(prior, n, overlap, seed + 1000003ULL * si + r);
            gains[r] = fmig::empirical_mig(h_a, h_b, prior.prior_y(), spec, samples);
        });
        double mean = 0.0;
        for (double g : gains) mean += g;
        mean /= static_cast<double>(reps);
        double var = 0.0;
        for (double g : gains) var += (g - mean) * (g - mean);
        var /= static_cast<double>(reps - 1);
        for (std::size_t r = 0; r < reps; ++r)
            out << n << ',' << r << ',' << fmig::format_double(gains[r]) << ',' << fmig::format_double(exact) << ",\n";
        const double se = std::sqrt(var / static_cast<double>(reps));
        out << n << ",mean," << fmig::format_double(mean) << ',' << fmig::format_double(exact) << ','
            << fmig::format_double(se) << '\n';
        std::cout << "n=" << n << " mean " << mean << " exact " << exact << " stderr " << se << '\n';
    }
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

// cotrain -------------------------------------------------------------------

void write_curve(const Context& ctx, const fs::path& path, const std::vector<fmig::RestartOutcome>& restarts) {
    std::ofstream out;
    open_csv(out, path, ctx, "restart,iteration,objective");
    for (const auto& r : restarts)
        for (std::size_t i = 0; i < r.curve.size(); ++i)
            out << r.index << ',' << i << ',' << fmig::format_double(r.curve[i]) << '\n';
}

int report_restarts(const std::vector<fmig::RestartOutcome>& restarts) {
    std::size_t failed = 0;
    for (const auto& r : restarts)
        if (r.aborted) {
            ++failed;
            std::cerr << "warning: restart " << r.index << " aborted: " << r.abort_reason << '\n';
        }
    if (failed == restarts.size()) throw CommandFailure("all restarts failed");
    return 0;
}

int cmd_cotrain(const Context& ctx) {
    fmig::reject_unknown_keys(ctx.cfg,
                              {"prior", "generate", "samples", "sizes", "mode", "spec", "scoring_rule", "constrained",
                               "optimizer", "n_samples", "overlap", "sample_seed", "output", "curve_output"},
                              "cotrain");
    const std::string mode = get_or<std::string>(ctx.cfg, "mode", "exact");
    fmig::OptimizerConfig cfg =
        fmig::optimizer_config_from_json(ctx.cfg.contains("optimizer") ? ctx.cfg["optimizer"] : json::object());
    cfg.threads = ctx.threads;
    cfg.record_curve = true;
    const fs::path result_path = ctx.output(ctx.cfg, "output", "cotrain.json");
    const fs::path curve_path = ctx.output(ctx.cfg, "curve_output", "curve.csv");

    // Samples come from a CSV file or are drawn from the prior.
    auto load_samples = [&](std::size_t& sa, std::size_t& sb, std::size_t& sy,
                            std::optional<fmig::TripletPrior>& prior) -> fmig::SampleSet {
        if (ctx.cfg.contains("samples")) {
            if (ctx.cfg.contains("prior") || ctx.cfg.contains("generate"))
                throw std::invalid_argument("cotrain: 'samples' excludes a prior");
            const auto sizes = sizes_of(ctx.cfg, "cotrain");
            sa = sizes[0], sb = sizes[1], sy = sizes[2];
            return fmig::read_samples_csv(ctx.resolve(ctx.cfg["samples"].get<std::string>()));
        }
        prior = load_prior(ctx);
        sa = prior->sigma_a(), sb = prior->sigma_b(), sy = prior->sigma_y();
        require(ctx.cfg, "n_samples", "cotrain");
        const auto n = ctx.cfg["n_samples"].get<std::size_t>();
        return fmig::sample_tasks(*prior, n, get_or<std::size_t>(ctx.cfg, "overlap", n),
                                  get_or<std::uint64_t>(ctx.cfg, "sample_seed", cfg.seed));
    };

    if (mode == "exact" || mode == "empirical") {
        const auto spec = spec_of(ctx.cfg);
        if (!spec.derivative_invertible)
            std::cerr << "warning: '" << spec.name
                      << "' has a non-invertible derivative; recovery guarantees do not apply and the ascent has no "
                         "gradient signal\n";
        fmig::CotrainResult res;
        if (mode == "exact") {
            res = fmig::optimize_mig(load_prior(ctx), spec, cfg);
        } else {
            std::size_t sa = 0, sb = 0, sy = 0;
            std::optional<fmig::TripletPrior> prior;
            const auto samples = load_samples(sa, sb, sy, prior);
            std::optional<std::pair<fmig::Hypothesis, fmig::Hypothesis>> ref;
            if (prior)
                ref.emplace(fmig::Hypothesis::posterior_predictor(*prior, fmig::View::A),
                            fmig::Hypothesis::posterior_predictor(*prior, fmig::View::B));
            res = fmig::optimize_mig_empirical(samples, sa, sb, sy, spec, cfg, ref);
        }
        report_restarts(res.restarts);
        json doc = fmig::to_json(res);
        doc["mode"] = mode;
        doc["spec"] = spec.name;
        doc["config_hash"] = ctx.hash;
        doc["version"] = fmig::version();
        fmig::write_json_file(result_path, doc);
        write_curve(ctx, curve_path, res.restarts);
        std::cout << "objective " << fmig::format_double(res.objective) << ", aligned TV "
                  << fmig::format_double(res.aligned_tv_distance) << '\n';
    } else if (mode == "ps-gain") {
        const auto rule = fmig::scoring_rule(get_or<std::string>(ctx.cfg, "scoring_rule", "log"));
        const bool constrained = get_or<bool>(ctx.cfg, "constrained", true);
        fmig::PsGainResult res;
        if (ctx.cfg.contains("samples")) {
            std::size_t sa = 0, sb = 0, sy = 0;
            std::optional<fmig::TripletPrior> none;
            const auto samples = load_samples(sa, sb, sy, none);
            res = fmig::optimize_ps_gain(samples, sa, sb, sy, rule, cfg, constrained);
        } else {
            res = fmig::optimize_ps_gain(load_prior(ctx), rule, cfg, constrained);
        }
        report_restarts(res.restarts);
        json doc = fmig::to_json(res);
        doc["mode"] = mode;
        doc["scoring_rule"] = rule.name;
        doc["constrained"] = constrained;
        doc["constraint_deviation"] = fmig::check_constraint(res.v_b_star);
        doc["config_hash"] = ctx.hash;
        doc["version"] = fmig::version();
        fmig::write_json_file(result_path, doc);
        write_curve(ctx, curve_path, res.restarts);
        std::cout << "objective " << fmig::format_double(res.objective) << ", aligned TV "
                  << fmig::format_double(res.aligned_tv_distance) << '\n';
    } else {
        throw std::invalid_argument("cotrain: mode must be exact, empirical or ps-gain");
    }
    std::cout << "wrote " << result_path.string() << " and " << curve_path.string() << '\n';
    return 0;
}

// mechanism -----------------------------------------------------------------

std::string perm_label(const std::vector<std::size_t>& perm) {
    std::string s;
    for (std::size_t i = 0; i < perm.size(); ++i) s += (i ? " " : "") + std::to_string(perm[i]);
    return s;
}

int cmd_mechanism(const Context& ctx) {
    fmig::reject_unknown_keys(ctx.cfg,
                              {"prior", "generate", "mechanism", "spec", "grid_resolution", "tasks", "budget",
                               "tolerance", "output", "table_output"},
                              "mechanism");
    const auto prior = load_prior(ctx);
    const std::string kind = get_or<std::string>(ctx.cfg, "mechanism", "single");
    const double res = get_or<double>(ctx.cfg, "grid_resolution", 0.05);
    const double tol = get_or<double>(ctx.cfg, "tolerance", 1e-10);
    const auto budget = static_cast<long double>(get_or<double>(ctx.cfg, "budget", 1e11));

    fmig::Mechanism mech;
    if (kind == "single") {
        mech = fmig::Mechanism::single();
    } else if (kind == "mcg") {
        mech = fmig::Mechanism::mcg(spec_of(ctx.cfg), get_or<std::size_t>(ctx.cfg, "tasks", 2));
    } else {
        throw std::invalid_argument("mechanism: 'mechanism' must be single or mcg");
    }

    json doc{{"mechanism", mech.name()}, {"config_hash", ctx.hash}, {"version", fmig::version()}};
    const auto truthful = fmig::verify_truthful(prior, mech, res, tol);
    doc["truthfulness"] = fmig::to_json(truthful);

    std::vector<fmig::ProfileRow> rows;
    if (mech.kind == fmig::Mechanism::Kind::Mcg) {
        try {
            const auto focal = fmig::verify_focal(prior, *mech.spec, res, tol, budget);
            doc["focal"] = fmig::to_json(focal);
            rows = focal.rows;
        } catch (const std::runtime_error& e) {
            std::cerr << "warning: " << e.what() << "; focality not checked\n";
            doc["focal"] = json{{"verdict", "inconclusive"}, {"reason", e.what()}};
        }
    }
    if (rows.empty()) {
        const auto ta = fmig::Strategy::truthful(prior, fmig::View::A);
        const auto tb = fmig::Strategy::truthful(prior, fmig::View::B);
        const double truth = fmig::expected_payment(ta, tb, prior, mech);
        rows.push_back({"truthful", fmig::ProfileClass::Truthful, {}, truth, 0.0});
        std::vector<std::size_t> perm(prior.sigma_y());
        std::iota(perm.begin(), perm.end(), 0);
        while (std::next_permutation(perm.begin(), perm.end())) {
            const double pay = fmig::expected_payment(fmig::Strategy::permuted(prior, fmig::View::A, perm),
                                                      fmig::Strategy::permuted(prior, fmig::View::B, perm), prior, mech);
            rows.push_back({"permutation(" + perm_label(perm) + ")", fmig::ProfileClass::Permutation, perm, pay,
                            truth - pay});
        }
        const double pay = fmig::expected_payment(fmig::Strategy::constant(prior.sigma_a(), prior.prior_y()),
                                                  fmig::Strategy::constant(prior.sigma_b(), prior.prior_y()), prior, mech);
        rows.push_back({"constant report of the label prior", fmig::ProfileClass::Other, {}, pay, truth - pay});
    }

    const fs::path report_path = ctx.output(ctx.cfg, "output", "mechanism.json");
    const fs::path table_path = ctx.output(ctx.cfg, "table_output", "payoffs.csv");
    fmig::write_json_file(report_path, doc);
    std::ofstream out;
    open_csv(out, table_path, ctx, "profile,class,permutation,payoff,gap_to_truthful");
    std::cout << "profile                                   class        payoff        gap\n";
    for (const auto& r : rows) {
        out << '"' << r.label << "\"," << fmig::to_string(r.classification) << ',' << perm_label(r.permutation) << ','
            << fmig::format_double(r.payoff) << ',' << fmig::format_double(r.gap_to_truthful) << '\n';
        std::printf("%-41s %-12s %-13.6g %.6g\n", r.label.c_str(), fmig::to_string(r.classification).c_str(), r.payoff,
                    r.gap_to_truthful);
    }
    std::cout << "equilibrium " << (truthful.is_equilibrium ? "yes" : "no") << ", strict "
              << (truthful.is_strict ? "yes" : "no") << ", margin " << truthful.margin << '\n';
    std::cout << "wrote " << report_path.string() << " and " << table_path.string() << '\n';
    return 0;
}

// verify-prior --------------------------------------------------------------

int cmd_verify_prior(const Context& ctx) {
    fmig::reject_unknown_keys(ctx.cfg, {"prior", "generate", "grid_resolution", "budget", "output"}, "verify-prior");
    const auto prior = load_prior(ctx);
    const double res = get_or<double>(ctx.cfg, "grid_resolution", 0.05);
    const auto budget = get_or<std::size_t>(ctx.cfg, "budget", 5'000'000);
    const auto stab = fmig::check_stable(prior);
    const auto wd = fmig::check_well_defined(prior, res, budget);
    const double ci = fmig::verify_ci_identity(prior);
    const auto residual = fmig::soe_residuals(fmig::SolutionCandidate::desired(prior), fmig::induce_joint(prior));

    json doc{{"stability", fmig::to_json(stab)},
             {"well_defined", fmig::to_json(wd)},
             {"ci_identity_residual", ci},
             {"desired_solution_residual", residual.cwiseAbs().maxCoeff()},
             {"config_hash", ctx.hash},
             {"version", fmig::version()}};
    const fs::path path = ctx.output(ctx.cfg, "output", "verify_prior.json");
    fmig::write_json_file(path, doc);
    std::cout << "stable: " << (stab.stable ? "yes" : "no") << "\nwell-defined: " << fmig::to_string(wd.verdict)
              << "\nwrote " << path.string() << '\n';
    return 0;
}

// Applies --seed to the seed that drives each command.
void apply_seed(json& cfg, const std::string& command, std::uint64_t seed) {
    if (command == "cotrain") {
        if (!cfg.contains("optimizer")) cfg["optimizer"] = json::object();
        cfg["optimizer"]["seed"] = seed;
    } else if ((command == "mechanism" || command == "verify-prior") && cfg.contains("generate")) {
        cfg["generate"]["seed"] = seed;
    } else if (command == "gen-prior" || command == "estimate-mi") {
        cfg["seed"] = seed;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"f-mutual information gain toolkit"};
    app.set_version_flag("--version", fmig::version());
    app.require_subcommand(1);

    Options opt;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"gen-prior", "generate a random prior"},
        {"estimate-mi", "estimate f-mutual information from samples"},
        {"cotrain", "maximize the gain over hypotheses"},
        {"mechanism", "verify truthfulness and focality of a mechanism"},
        {"verify-prior", "stability and well-definedness of a prior"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "JSON config")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--seed", opt.seed, "override the config seed");
        sub->add_option("--threads", opt.threads, "worker threads (0 = auto)");
        sub->add_flag("--deterministic", opt.deterministic, "single-threaded fixed-order execution");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        Context ctx;
        ctx.cfg = fmig::read_json_file(opt.config);
        if (!ctx.cfg.is_object()) throw std::invalid_argument("config: expected a JSON object");
        if (opt.seed) apply_seed(ctx.cfg, command, *opt.seed);
        ctx.config_dir = fs::absolute(opt.config).parent_path();
        ctx.out_dir = opt.out;
        fs::create_directories(ctx.out_dir);
        ctx.threads = opt.deterministic ? 1 : fmig::detail::resolve_threads(opt.threads.value_or(1));
        ctx.hash = fmig::config_hash(ctx.cfg);

        if (command == "gen-prior") return cmd_gen_prior(ctx);
        if (command == "estimate-mi") return cmd_estimate_mi(ctx);
        if (command == "cotrain") return cmd_cotrain(ctx);
        if (command == "mechanism") return cmd_mechanism(ctx);
        return cmd_verify_prior(ctx);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
