// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "fmig/cotrain.hpp"
#include "fmig/detail/softmax.hpp"
#include "fmig/mechanisms.hpp"
#include "fmig/mig.hpp"
#include "fmig/prioranalysis.hpp"
#include "fmig/psgain.hpp"
#include "fmig/random.hpp"

using namespace fmig;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

Hypothesis random_hypothesis(std::mt19937_64& rng, std::size_t n, std::size_t m, double alpha = 1.0) {
    std::vector<Simplex> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(Simplex::normalized(dirichlet(rng, m, alpha)));
    return Hypothesis(rows);
}

Simplex perturbed(const Simplex& s, std::mt19937_64& rng, double scale) {
    auto z = detail::logits_of(s);
    for (auto& x : z) x += scale * (2 * uniform01(rng) - 1);
    return detail::softmax(z);
}

Hypothesis perturbed(const Hypothesis& h, std::mt19937_64& rng, double scale) {
    std::vector<Simplex> rows;
    for (const auto& r : h.rows()) rows.push_back(perturbed(r, rng, scale));
    return Hypothesis(rows);
}

LikelihoodTable perturbed(const LikelihoodTable& v, std::mt19937_64& rng, double scale) {
    std::vector<std::vector<double>> rows(v.signals(), std::vector<double>(v.labels()));
    for (std::size_t y = 0; y < v.labels(); ++y) {
        const auto col = perturbed(Simplex::normalized(v.column(y)), rng, scale);
        for (std::size_t b = 0; b < v.signals(); ++b) rows[b][y] = col[b];
    }
    return LikelihoodTable(rows);
}

JointAB random_joint(std::mt19937_64& rng, std::size_t na, std::size_t nb) {
    const auto w = dirichlet(rng, na * nb, 1.0);
    Eigen::MatrixXd t(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(nb));
    for (std::size_t i = 0; i < na * nb; ++i) t(static_cast<Eigen::Index>(i / nb), static_cast<Eigen::Index>(i % nb)) = w[i];
    return JointAB(t / t.sum());
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// Same-task mean minus the mean over ordered distinct pairs, written out.
double brute_gain(const Hypothesis& ha, const Hypothesis& hb, const Simplex& p, const ConvexSpec& s,
                  const SampleSet& samples) {
    double same = 0, cross = 0;
    int ns = 0, nc = 0;
    auto inner = [&](std::size_t a, std::size_t b) {
        double t = 0;
        for (std::size_t y = 0; y < p.size(); ++y) t += ha[a][y] * hb[b][y] / p[y];
        return t;
    };
    for (const auto& t : samples)
        if (t.x_a && t.x_b) same += s.g(inner(*t.x_a, *t.x_b)), ++ns;
    for (const auto& ta : samples)
        for (const auto& tb : samples)
            if (ta.x_a && tb.x_b && ta.task_id != tb.task_id) cross += s.fstar(s.g(inner(*ta.x_a, *tb.x_b))), ++nc;
    return same / ns - cross / nc;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Outcome c1_worked_example() {
    const Hypothesis ha({Simplex({0.7, 0.3}), Simplex({0.1, 0.9}), Simplex({0.5, 0.5})});
    const Hypothesis hb({Simplex({0.6, 0.4}), Simplex({0.2, 0.8}), Simplex({0.4, 0.6})});
    const SampleSet tasks{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
    const Simplex p({0.5, 0.5});
    const double oracle = brute_gain(ha, hb, p, builtin("kl"), tasks);
    const double got = empirical_mig(ha, hb, p, builtin("kl"), tasks);
    Outcome o;
    o.pass = std::abs(got - oracle) <= 1e-9 && std::abs(got - 0.2097) < 1e-4;
    o.detail = "gain " + fmt("%.12f", got) + " oracle " + fmt("%.12f", oracle);
    return o;
}

Outcome c2_duality() {
    std::mt19937_64 rng(2);
    double worst_eq = 0, worst_excess = -INFINITY;
    for (const auto& name : builtin_names()) {
        const auto s = builtin(name);
        for (int k = 0; k < 100; ++k) {
            const auto j = random_joint(rng, 1 + k % 5, 1 + (k / 5) % 5);
            const double mi = f_mutual_information(j, s);
            const Eigen::MatrixXd u = best_distinguisher(j, s);
            worst_eq = std::max(worst_eq, std::abs(dual_value(j, u, s) - mi));
            for (int r = 0; r < 100; ++r) {
                Eigen::MatrixXd v = u;
                for (Eigen::Index a = 0; a < v.rows(); ++a)
                    for (Eigen::Index b = 0; b < v.cols(); ++b) {
                        double x = v(a, b) + 0.5 * (2 * uniform01(rng) - 1);
                        // keep inside dom(f*)
                        if (name == "tvd") x = std::clamp(x, -0.5, 0.5);
                        if (name == "reverse_kl") x = std::min(x, -1e-3);
                        if (name == "squared_hellinger") x = std::min(x, 1 - 1e-3);
                        v(a, b) = x;
                    }
                worst_excess = std::max(worst_excess, dual_value(j, v, s) - mi);
            }
        }
    }
    Outcome o;
    o.pass = worst_eq <= 1e-10 && worst_excess <= 1e-10;
    o.detail = "max |dual - MI| " + fmt("%.2e", worst_eq) + ", max excess " + fmt("%.2e", worst_excess);
    return o;
}

Outcome c3_optimum_at_posterior() {
    std::mt19937_64 rng(3);
    double worst_eq = 0, worst_excess = -INFINITY;
    for (std::uint64_t k = 0; k < 50; ++k) {
        const auto q = generate_prior(3 + k % 6, 3 + (k / 6) % 6, 2 + k % 2, 300 + k, 1.0, true);
        const auto ha = Hypothesis::posterior_predictor(q, View::A);
        const auto hb = Hypothesis::posterior_predictor(q, View::B);
        const auto joint = induce_joint(q);
        for (const auto& name : builtin_names()) {
            const auto s = builtin(name);
            const double mi = f_mutual_information(joint, s);
            worst_eq = std::max(worst_eq, std::abs(expected_mig(ha, hb, q.prior_y(), s, q) - mi));
            for (int r = 0; r < 200; ++r) {
                const double scale = r % 2 ? 0.1 : 1.0;
                const double v = r % 4 == 3 ? expected_mig(random_hypothesis(rng, q.sigma_a(), q.sigma_y()),
                                                           random_hypothesis(rng, q.sigma_b(), q.sigma_y()),
                                                           perturbed(q.prior_y(), rng, 1.0), s, q)
                                            : expected_mig(perturbed(ha, rng, scale), perturbed(hb, rng, scale),
                                                           perturbed(q.prior_y(), rng, scale), s, q);
                worst_excess = std::max(worst_excess, v - mi);
            }
        }
    }
    Outcome o;
    o.pass = worst_eq <= 1e-10 && worst_excess <= 1e-10;
    o.detail = "max |gain - MI| " + fmt("%.2e", worst_eq) + ", max excess " + fmt("%.2e", worst_excess);
    return o;
}

Outcome c4_unbiased() {
    Outcome o;
    std::ostringstream d;
    for (std::uint64_t k = 0; k < 5; ++k) {
        const auto q = generate_prior(3 + k % 2, 3, 2, 400 + k, 1.0, true);
        const auto ha = Hypothesis::posterior_predictor(q, View::A);
        const auto hb = Hypothesis::posterior_predictor(q, View::B);
        for (const char* name : {"kl", "pearson"}) {
            const auto s = builtin(name);
            const double mi = f_mutual_information(induce_joint(q), s);
            double sum = 0, sum2 = 0;
            const int draws = 1000;
            for (int r = 0; r < draws; ++r) {
                const double v =
                    empirical_mig(ha, hb, q.prior_y(), s, sample_tasks(q, 200, 200, 10000 * k + static_cast<std::uint64_t>(r)));
                sum += v, sum2 += v * v;
            }
            const double mean = sum / draws;
            const double se = std::sqrt((sum2 / draws - mean * mean) / (draws - 1));
            const double z = (mean - mi) / se;
            if (std::abs(z) > 3) o.pass = false;
            d << name << " z=" << fmt("%+.2f", z) << " ";
        }
    }
    o.detail = d.str();
    return o;
}

Outcome c5_recovery() {
    Outcome o;
    int ok = 0;
    double worst_gap = 0, worst_tv = 0;
    for (std::uint64_t k = 0; k < 10; ++k) {
        const auto q = anchor_signals(generate_prior(8, 8, 2, 500 + k, 1.0, true), 0.15);
        if (check_well_defined(q, 0.02).verdict != WellDefinedVerdict::CertifiedOnGrid) {
            o.pass = false;
            o.detail = "prior " + std::to_string(k) + " not certified; ";
            continue;
        }
        OptimizerConfig cfg;
        cfg.restarts = 20;
        cfg.seed = k;
        cfg.threads = 0;
        const auto s = builtin("kl");
        const auto r = optimize_mig(q, s, cfg);
        const double gap = f_mutual_information(induce_joint(q), s) - r.objective;
        worst_gap = std::max(worst_gap, std::abs(gap));
        worst_tv = std::max(worst_tv, r.aligned_tv_distance);
        ok += std::abs(gap) <= 1e-4 && r.aligned_tv_distance <= 0.05;
    }
    o.pass = o.pass && ok >= 9;
    o.detail += std::to_string(ok) + "/10 recovered, max gap " + fmt("%.2e", worst_gap) + ", max TV " + fmt("%.2e", worst_tv);
    return o;
}

Outcome c6_single_task() {
    Outcome o;
    double worst_eq = 0, min_margin = INFINITY, worst_dev = -INFINITY;
    for (std::uint64_t k = 0; k < 20; ++k) {
        const auto q = generate_prior(2 + k % 4, 2 + (k / 4) % 3, 2, 600 + k, 1.0, true);
        const auto r = verify_truthful(q, Mechanism::single(), 0.05);
        worst_eq = std::max(worst_eq, std::abs(r.truthful_payoff - f_mutual_information(induce_joint(q), builtin("kl"))));
        min_margin = std::min(min_margin, r.margin);
        worst_dev = std::max(worst_dev, r.worst_deviation);
        if (!r.is_equilibrium || !r.is_strict) o.pass = false;
    }
    o.pass = o.pass && worst_eq <= 1e-10 && min_margin > 0 && worst_dev <= 0;
    o.detail = "max |payoff - MI| " + fmt("%.2e", worst_eq) + ", min margin " + fmt("%.3e", min_margin);
    return o;
}

Outcome c7_focal() {
    // Binary labels, uniform prior; signals 0 and 1 reveal the label, signal 2 does not.
    std::vector<Simplex> rows{Simplex({0.5, 0, 0.5}), Simplex({0, 0.5, 0.5})};
    const TripletPrior q(Simplex({0.5, 0.5}), rows, rows);
    Outcome o;
    const auto wd = check_well_defined(q, 0.05);
    const auto s = builtin("kl");
    const auto r = verify_focal(q, s, 0.05);
    const double mi = f_mutual_information(induce_joint(q), s);
    double tie = 0;
    for (const auto& row : r.permutation_ties) tie = std::max(tie, std::abs(row.payoff - r.truthful_payoff));
    o.pass = wd.verdict == WellDefinedVerdict::CertifiedOnGrid && r.truthful_is_max &&
             std::abs(r.truthful_payoff - mi) <= 1e-10 && r.permutation_ties.size() == 1 && tie <= 1e-10 &&
             r.margin > 1e-3;
    o.detail = "payoff " + fmt("%.10f", r.truthful_payoff) + ", swap tie " + fmt("%.1e", tie) + ", margin " +
               fmt("%.3e", r.margin) + ", profiles " + fmt("%.3g", static_cast<double>(r.profiles_covered));
    return o;
}

Outcome c8_lsr_ceiling() {
    std::mt19937_64 rng(8);
    double worst_eq = 0, worst_excess = -INFINITY, ones_dev = 0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        const auto q = generate_prior(2 + k % 4, 2 + (k / 4) % 4, 2 + k % 2, 800 + k);
        const auto h = Hypothesis::posterior_predictor(q, View::A);
        const auto v = LikelihoodTable::from_prior(q);
        const auto j = induce_joint(q);
        double oracle = 0;
        for (std::size_t a = 0; a < q.sigma_a(); ++a) {
            double row = 0;
            for (std::size_t b = 0; b < q.sigma_b(); ++b) row += j(a, b);
            for (std::size_t b = 0; b < q.sigma_b(); ++b) oracle += j(a, b) * std::log(j(a, b) / row);
        }
        const double truth = expected_lsr_gain(h, v, q);
        worst_eq = std::max(worst_eq, std::abs(truth - oracle));
        for (int r = 0; r < 200; ++r) {
            const double scale = r % 2 ? 0.1 : 1.0;
            const auto vp = perturbed(v, rng, scale);
            if (check_constraint(vp) > 1e-9) worst_excess = INFINITY;
            worst_excess = std::max(worst_excess, expected_lsr_gain(perturbed(h, rng, scale), vp, q) - oracle);
        }
        const LikelihoodTable ones(std::vector<std::vector<double>>(q.sigma_b(), std::vector<double>(q.sigma_y(), 1.0)));
        ones_dev = std::max(ones_dev, std::abs(check_constraint(ones) - static_cast<double>(q.sigma_b() - 1)));
    }
    Outcome o;
    o.pass = worst_eq <= 1e-10 && worst_excess <= 1e-10 && ones_dev <= 1e-12;
    o.detail = "max |value - oracle| " + fmt("%.2e", worst_eq) + ", max excess " + fmt("%.2e", worst_excess) +
               ", all-ones deviation error " + fmt("%.1e", ones_dev);
    return o;
}

Outcome c9_residuals() {
    double ci = 0, soe = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        const auto q = generate_prior(1 + k % 6, 1 + (k / 6) % 6, 1 + k % 4, 900 + k);
        ci = std::max(ci, verify_ci_identity(q));
        const auto j = induce_joint(q);
        const auto d = SolutionCandidate::desired(q);
        soe = std::max(soe, max_abs(soe_residuals(d, j)));
        std::vector<std::size_t> perm(q.sigma_y());
        for (std::size_t y = 0; y < perm.size(); ++y) perm[y] = perm.size() - 1 - y;
        soe = std::max(soe, max_abs(soe_residuals(d.relabeled(perm), j)));
    }
    Outcome o;
    o.pass = ci <= 1e-12 && soe <= 1e-12;
    o.detail = "max ci residual " + fmt("%.2e", ci) + ", max system residual " + fmt("%.2e", soe);
    return o;
}

Outcome c10_gradients() {
    std::mt19937_64 rng(10);
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        const auto q = generate_prior(3, 4, 3, 1000 + static_cast<std::uint64_t>(k));
        const auto w = exact_weights(q);
        const auto ha = random_hypothesis(rng, 3, 3, 2.0), hb = random_hypothesis(rng, 4, 3, 2.0);
        const auto p = Simplex::normalized(dirichlet(rng, 3, 2.0));
        for (const char* name : {"kl", "pearson"}) {
            const auto s = builtin(name);
            const auto grad = mig_gradient(ha, hb, p, s, w);

            // Every parameter block in logit coordinates; block 0..|A|-1 is h_a, then h_b, then p.
            std::vector<Simplex> blocks = ha.rows();
            blocks.insert(blocks.end(), hb.rows().begin(), hb.rows().end());
            blocks.push_back(p);
            std::vector<std::vector<double>> analytic;
            for (std::size_t i = 0; i < ha.rows().size(); ++i) analytic.push_back(detail::softmax_pullback(ha[i], grad.d_ha[i]));
            for (std::size_t i = 0; i < hb.rows().size(); ++i) analytic.push_back(detail::softmax_pullback(hb[i], grad.d_hb[i]));
            analytic.push_back(detail::softmax_pullback(p, grad.d_p));

            auto value = [&](std::size_t bi, std::size_t ci, double h) {
                auto rows = blocks;
                auto z = detail::logits_of(rows[bi]);
                z[ci] += h;
                rows[bi] = detail::softmax(z);
                const Hypothesis a(std::vector<Simplex>(rows.begin(), rows.begin() + 3));
                const Hypothesis b(std::vector<Simplex>(rows.begin() + 3, rows.begin() + 7));
                return expected_mig(a, b, rows[7], s, q);
            };
            double scale = 0;
            for (const auto& g : analytic)
                for (double x : g) scale = std::max(scale, std::abs(x));
            for (std::size_t bi = 0; bi < blocks.size(); ++bi)
                for (std::size_t ci = 0; ci < 3; ++ci) {
                    const double h = 1e-5;
                    const double fd = (value(bi, ci, h) - value(bi, ci, -h)) / (2 * h);
                    const double rel = std::abs(fd - analytic[bi][ci]) / std::max({std::abs(fd), std::abs(analytic[bi][ci]), 1e-3 * scale});
                    worst = std::max(worst, rel);
                }
        }
    }
    Outcome o;
    o.pass = worst <= 1e-5;
    o.detail = "max relative error " + fmt("%.2e", worst);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"worked example gain", c1_worked_example},
        {"duality equality and bound", c2_duality},
        {"posterior predictors attain MI", c3_optimum_at_posterior},
        {"empirical gain is unbiased", c4_unbiased},
        {"co-training recovery", c5_recovery},
        {"single-task strict truthfulness", c6_single_task},
        {"multi-task focality on grid", c7_focal},
        {"LSR ceiling and constraint", c8_lsr_ceiling},
        {"identity and system residuals", c9_residuals},
        {"gradient check", c10_gradients},
    };
    int failed = 0;
    int idx = 0;
    for (const auto& [name, fn] : criteria) {
        ++idx;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2d %-34s %8.2fs  %s\n", o.pass ? "PASS" : "FAIL", idx, name, secs, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
