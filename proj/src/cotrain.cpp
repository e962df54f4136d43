#include "fmig/cotrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fmig/detail/parallel.hpp"
#include "fmig/detail/softmax.hpp"
#include "fmig/random.hpp"

namespace fmig {

void OptimizerConfig::validate() const {
    if (restarts == 0 || max_iters == 0) throw std::invalid_argument("optimizer: restarts and max_iters must be >= 1");
    if (!(step_size > 0.0) || !(tolerance > 0.0))
        throw std::invalid_argument("optimizer: step_size and tolerance must be positive");
}

namespace {

double max_row_tv(const Hypothesis& h, const Hypothesis& ref) {
    double worst = 0.0;
    for (std::size_t x = 0; x < h.signals(); ++x) worst = std::max(worst, total_variation(h[x], ref[x]));
    return worst;
}

LabelAlignment align_rows(const std::vector<const Hypothesis*>& hs, const std::vector<const Hypothesis*>& refs) {
    const std::size_t ny = hs.front()->labels();
    if (ny > 8) throw std::invalid_argument("permutation search too large");
    for (std::size_t i = 0; i < hs.size(); ++i)
        if (hs[i]->signals() != refs[i]->signals() || hs[i]->labels() != refs[i]->labels())
            throw std::invalid_argument("align_permutation: shape mismatch");
    std::vector<std::size_t> perm(ny);
    std::iota(perm.begin(), perm.end(), 0);
    LabelAlignment best{perm, std::numeric_limits<double>::infinity()};
    do {
        double worst = 0.0;
        for (std::size_t i = 0; i < hs.size() && worst < best.max_row_tv; ++i)
            worst = std::max(worst, max_row_tv(hs[i]->relabeled(perm), *refs[i]));
        if (worst < best.max_row_tv) best = {perm, worst};
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

struct Params {
    std::vector<std::vector<double>> za;
    std::vector<std::vector<double>> zb;
    std::vector<double> zp;
};

struct Point {
    Hypothesis ha;
    Hypothesis hb;
    Simplex p;
};

Point materialize(const Params& z, const std::optional<Simplex>& fixed_p) {
    std::vector<Simplex> ra, rb;
    ra.reserve(z.za.size());
    rb.reserve(z.zb.size());
    for (const auto& r : z.za) ra.push_back(detail::softmax(r));
    for (const auto& r : z.zb) rb.push_back(detail::softmax(r));
    return Point{Hypothesis(std::move(ra)), Hypothesis(std::move(rb)), fixed_p ? *fixed_p : detail::softmax(z.zp)};
}

Params random_start(std::mt19937_64& rng, std::size_t na, std::size_t nb, std::size_t ny) {
    Params z;
    auto row = [&] { return detail::logits_of(Simplex::normalized(dirichlet(rng, ny, 1.0))); };
    for (std::size_t a = 0; a < na; ++a) z.za.push_back(row());
    for (std::size_t b = 0; b < nb; ++b) z.zb.push_back(row());
    z.zp.assign(ny, 0.0);
    return z;
}

struct Evaluated {
    Point pt;
    MigGradient grad;
};

Evaluated evaluate(const Params& z, const std::optional<Simplex>& fixed_p, const ConvexSpec& spec,
                   const PairWeights& w) {
    Point pt = materialize(z, fixed_p);
    MigGradient g = mig_gradient(pt.ha, pt.hb, pt.p, spec, w);
    return Evaluated{std::move(pt), std::move(g)};
}

struct RestartRun {
    RestartOutcome outcome;
    std::optional<Point> point;
};

RestartRun run_restart(std::size_t index, Params z, const PairWeights& w, const ConvexSpec& spec,
                       const OptimizerConfig& cfg, const std::optional<Simplex>& fixed_p) {
    RestartRun run;
    run.outcome.index = index;
    try {
        Evaluated cur = evaluate(z, fixed_p, spec, w);
        if (!std::isfinite(cur.grad.value)) throw std::runtime_error("non-finite objective at start");
        if (cfg.record_curve) run.outcome.curve.push_back(cur.grad.value);
        double step = cfg.step_size;
        std::size_t it = 0;
        bool converged = false;
        for (; it < cfg.max_iters; ++it) {
            Params dz = z;
            double gnorm2 = 0.0;
            // exponentiated-gradient step: does not stall as rows approach a vertex
            auto pull = [&](std::vector<double>& target, const Simplex& s, const std::vector<double>& g) {
                target = detail::mirror_direction(s, g);
                for (std::size_t i = 0; i < s.size(); ++i) gnorm2 += s[i] * target[i] * target[i];
            };
            for (std::size_t a = 0; a < z.za.size(); ++a) pull(dz.za[a], cur.pt.ha[a], cur.grad.d_ha[a]);
            for (std::size_t b = 0; b < z.zb.size(); ++b) pull(dz.zb[b], cur.pt.hb[b], cur.grad.d_hb[b]);
            if (!fixed_p) pull(dz.zp, cur.pt.p, cur.grad.d_p);
            if (gnorm2 == 0.0) break;  // flat: stationary, or a piecewise-constant objective

            bool accepted = false;
            while (step > 1e-14) {
                Params trial = z;
                auto axpy = [&](std::vector<double>& x, const std::vector<double>& d) {
                    for (std::size_t i = 0; i < x.size(); ++i) x[i] += step * d[i];
                };
                for (std::size_t a = 0; a < z.za.size(); ++a) axpy(trial.za[a], dz.za[a]);
                for (std::size_t b = 0; b < z.zb.size(); ++b) axpy(trial.zb[b], dz.zb[b]);
                if (!fixed_p) axpy(trial.zp, dz.zp);
                Evaluated next = evaluate(trial, fixed_p, spec, w);
                if (!std::isfinite(next.grad.value)) throw std::runtime_error("non-finite objective during ascent");
                if (next.grad.value >= cur.grad.value) {
                    const double gain = next.grad.value - cur.grad.value;
                    z = std::move(trial);
                    cur = std::move(next);
                    accepted = true;
                    if (cfg.record_curve) run.outcome.curve.push_back(cur.grad.value);
                    step = std::min(cfg.step_size, step * 2.0);
                    if (gain < cfg.tolerance) converged = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
            if (converged) {
                ++it;
                break;
            }
        }
        run.outcome.iterations = it;
        run.outcome.objective = cur.grad.value;
        run.point = std::move(cur.pt);
    } catch (const std::exception& e) {
        run.outcome.aborted = true;
        run.outcome.abort_reason = e.what();
        run.outcome.objective = -std::numeric_limits<double>::infinity();
    }
    return run;
}

}  // namespace

LabelAlignment align_permutation(const Hypothesis& h, const Hypothesis& reference) {
    return align_rows({&h}, {&reference});
}

LabelAlignment align_permutation(const Hypothesis& h_a, const Hypothesis& h_b, const Hypothesis& ref_a,
                                 const Hypothesis& ref_b) {
    return align_rows({&h_a, &h_b}, {&ref_a, &ref_b});
}

CotrainResult optimize_mig_weighted(const PairWeights& weights, std::size_t sigma_y, const ConvexSpec& spec,
                                    const OptimizerConfig& cfg, const std::optional<WarmStart>& warm,
                                    const std::optional<Simplex>& fixed_p) {
    cfg.validate();
    if (sigma_y == 0) throw std::invalid_argument("optimizer: empty label set");
    if (fixed_p && fixed_p->size() != sigma_y) throw std::invalid_argument("optimizer: fixed p has wrong size");
    const std::optional<Simplex> held = cfg.optimize_p ? std::nullopt : fixed_p;
    if (!cfg.optimize_p && !held) throw std::invalid_argument("optimizer: p is fixed but no value was supplied");
    const auto na = static_cast<std::size_t>(weights.same.rows());
    const auto nb = static_cast<std::size_t>(weights.same.cols());

    // starting points are drawn up front so they do not depend on scheduling
    std::vector<Params> starts;
    std::mt19937_64 rng(cfg.seed);
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        Params z = random_start(rng, na, nb, sigma_y);
        if (warm && (r == 0 || !warm->first_restart_only)) {
            for (std::size_t a = 0; a < na; ++a) z.za[a] = detail::logits_of(warm->h_a[a]);
            for (std::size_t b = 0; b < nb; ++b) z.zb[b] = detail::logits_of(warm->h_b[b]);
            z.zp = detail::logits_of(warm->p);
        }
        starts.push_back(std::move(z));
    }

    std::vector<RestartRun> runs(cfg.restarts);
    detail::parallel_for(cfg.restarts, cfg.threads, [&](std::size_t r) {
        runs[r] = run_restart(r, starts[r], weights, spec, cfg, held);
    });

    CotrainResult result;
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        // strict comparison: the lowest index wins ties
        if (!runs[r].outcome.aborted && (!best || runs[r].outcome.objective > runs[*best].outcome.objective)) best = r;
        result.restarts.push_back(runs[r].outcome);
    }
    if (!best) throw std::runtime_error("optimizer: every restart aborted");
    result.best_restart = *best;
    result.objective = runs[*best].outcome.objective;
    result.h_a_star = runs[*best].point->ha;
    result.h_b_star = runs[*best].point->hb;
    result.p_star = runs[*best].point->p;
    result.permutation.resize(sigma_y);
    std::iota(result.permutation.begin(), result.permutation.end(), 0);
    return result;
}

CotrainResult optimize_mig(const TripletPrior& prior, const ConvexSpec& spec, const OptimizerConfig& cfg,
                           const std::optional<WarmStart>& warm, const std::optional<Simplex>& fixed_p) {
    const Simplex held = fixed_p ? *fixed_p : prior.prior_y();
    CotrainResult result = optimize_mig_weighted(exact_weights(prior), prior.sigma_y(), spec, cfg, warm, held);
    const Hypothesis ref_a = Hypothesis::posterior_predictor(prior, View::A);
    const Hypothesis ref_b = Hypothesis::posterior_predictor(prior, View::B);
    if (prior.sigma_y() <= 8) {
        const LabelAlignment al = align_permutation(result.h_a_star, result.h_b_star, ref_a, ref_b);
        result.permutation = al.permutation;
        result.aligned_tv_distance = al.max_row_tv;
    }
    return result;
}

CotrainResult optimize_mig_empirical(const SampleSet& samples, std::size_t sigma_a, std::size_t sigma_b,
                                     std::size_t sigma_y, const ConvexSpec& spec, const OptimizerConfig& cfg,
                                     const std::optional<std::pair<Hypothesis, Hypothesis>>& reference,
                                     const std::optional<Simplex>& fixed_p) {
    CotrainResult result =
        optimize_mig_weighted(empirical_weights(samples, sigma_a, sigma_b), sigma_y, spec, cfg, std::nullopt, fixed_p);
    if (reference) {
        const LabelAlignment al =
            align_permutation(result.h_a_star, result.h_b_star, reference->first, reference->second);
        result.permutation = al.permutation;
        result.aligned_tv_distance = al.max_row_tv;
    }
    return result;
}

}  // namespace fmig
