#include "fmig/psgain.hpp"

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

LikelihoodTable::LikelihoodTable(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
    if (rows_.empty() || rows_.front().empty()) throw std::invalid_argument("likelihood table: empty");
    for (const auto& r : rows_) {
        if (r.size() != rows_.front().size()) throw std::invalid_argument("likelihood table: ragged rows");
        for (double v : r)
            if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("likelihood table: entry outside [0, 1]");
    }
}

LikelihoodTable LikelihoodTable::from_prior(const TripletPrior& prior) {
    std::vector<std::vector<double>> rows(prior.sigma_b(), std::vector<double>(prior.sigma_y()));
    for (std::size_t b = 0; b < prior.sigma_b(); ++b)
        for (std::size_t y = 0; y < prior.sigma_y(); ++y) rows[b][y] = prior.cond_b()[y][b];
    return LikelihoodTable(std::move(rows));
}

LikelihoodTable LikelihoodTable::scaled(double c) const {
    auto rows = rows_;
    for (auto& r : rows)
        for (double& v : r) v *= c;
    return LikelihoodTable(std::move(rows));
}

LikelihoodTable LikelihoodTable::relabeled(std::span<const std::size_t> perm) const {
    if (perm.size() != labels()) throw std::invalid_argument("likelihood table: permutation size mismatch");
    auto rows = rows_;
    for (std::size_t b = 0; b < rows.size(); ++b)
        for (std::size_t y = 0; y < perm.size(); ++y) rows[b][y] = rows_[b][perm[y]];
    return LikelihoodTable(std::move(rows));
}

std::vector<double> LikelihoodTable::column(std::size_t y) const {
    std::vector<double> c(rows_.size());
    for (std::size_t b = 0; b < rows_.size(); ++b) c[b] = rows_[b][y];
    return c;
}

double check_constraint(const LikelihoodTable& v_b) {
    double worst = 0.0;
    for (std::size_t y = 0; y < v_b.labels(); ++y) {
        double s = 0.0;
        for (std::size_t b = 0; b < v_b.signals(); ++b) s += v_b[b][y];
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

ScoringRule scoring_rule(std::string_view name) {
    ScoringRule r;
    if (name == "log") {
        r.name = "log";
        r.score = [](std::size_t s, std::span<const double> q) { return std::log(std::max(q[s], kProbFloor)); };
        r.gradient = [](std::size_t s, std::span<const double> q, std::span<double> out) {
            std::fill(out.begin(), out.end(), 0.0);
            out[s] = 1.0 / std::max(q[s], kProbFloor);
        };
        return r;
    }
    if (name == "brier") {
        r.name = "brier";
        r.score = [](std::size_t s, std::span<const double> q) {
            double acc = 0.0;
            for (std::size_t j = 0; j < q.size(); ++j) {
                const double d = q[j] - (j == s ? 1.0 : 0.0);
                acc += d * d;
            }
            return -acc;
        };
        r.gradient = [](std::size_t s, std::span<const double> q, std::span<double> out) {
            for (std::size_t j = 0; j < q.size(); ++j) out[j] = -2.0 * (q[j] - (j == s ? 1.0 : 0.0));
        };
        return r;
    }
    throw std::invalid_argument("unknown scoring rule '" + std::string(name) + "'");
}

double induced_likelihood(const Hypothesis& h_a, const LikelihoodTable& v_b, std::size_t x_a, std::size_t x_b) {
    if (h_a.labels() != v_b.labels()) throw std::invalid_argument("psgain: label dimension mismatch");
    double dot = 0.0;
    for (std::size_t y = 0; y < v_b.labels(); ++y) dot += v_b[x_b][y] * h_a[x_a][y];
    return dot;
}

std::vector<double> induced_forecast(const Hypothesis& h_a, const LikelihoodTable& v_b, std::size_t x_a) {
    if (v_b.signals() > kMaxForecastSignals)
        throw std::invalid_argument("psgain: |Sigma_B| too large for the full forecast path");
    std::vector<double> q(v_b.signals());
    for (std::size_t b = 0; b < q.size(); ++b) q[b] = induced_likelihood(h_a, v_b, x_a, b);
    return q;
}

namespace {

void require_paired(const SampleSet& samples) {
    validate_samples(samples);
    for (const auto& s : samples)
        if (!s.x_a || !s.x_b) throw std::invalid_argument("psgain: every task must carry both signals");
}

/// Normalized pair frequencies, rows x_A, columns x_B.
Eigen::MatrixXd pair_weights(const SampleSet& samples, std::size_t na, std::size_t nb) {
    require_paired(samples);
    if (samples.empty()) throw std::invalid_argument("psgain: no tasks");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(nb));
    for (const auto& s : samples) {
        if (*s.x_a >= na || *s.x_b >= nb) throw std::out_of_range("psgain: signal out of range");
        w(static_cast<Eigen::Index>(*s.x_a), static_cast<Eigen::Index>(*s.x_b)) += 1.0;
    }
    return w / static_cast<double>(samples.size());
}

double weighted_value(const Hypothesis& h, const LikelihoodTable& v, const Eigen::MatrixXd& w, const ScoringRule& ps) {
    double acc = 0.0;
    const bool is_log = ps.name == "log";
    for (std::size_t a = 0; a < h.signals(); ++a) {
        std::vector<double> q;
        if (!is_log) q = induced_forecast(h, v, a);
        for (std::size_t b = 0; b < v.signals(); ++b) {
            const double wab = w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            if (wab == 0.0) continue;
            if (is_log)
                acc += wab * std::log(std::max(induced_likelihood(h, v, a, b), kProbFloor));
            else
                acc += wab * ps.score(b, q);
        }
    }
    return acc;
}

struct PsParams {
    std::vector<std::vector<double>> zh;  // per x_A, over y
    std::vector<std::vector<double>> zv;  // per y, over x_B (constrained) or per (x_B, y) flattened
};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct PsPoint {
    Hypothesis h;
    LikelihoodTable v;
};

PsPoint materialize(const PsParams& z, bool constrained, std::size_t nb, std::size_t ny) {
    std::vector<Simplex> rows;
    for (const auto& r : z.zh) rows.push_back(detail::softmax(r));
    std::vector<std::vector<double>> v(nb, std::vector<double>(ny));
    if (constrained) {
        for (std::size_t y = 0; y < ny; ++y) {
            const Simplex col = detail::softmax(z.zv[y]);
            for (std::size_t b = 0; b < nb; ++b) v[b][y] = col[b];
        }
    } else {
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t y = 0; y < ny; ++y) v[b][y] = sigmoid(z.zv[b][y]);
    }
    return PsPoint{Hypothesis(std::move(rows)), LikelihoodTable(std::move(v))};
}

/// Value and an ascent direction in score space: the probability-space
/// gradient preconditioned so it does not vanish near the boundary.
double value_and_grad(const PsParams& z, bool constrained, const Eigen::MatrixXd& w, const ScoringRule& ps,
                      PsParams& grad, PsPoint& pt) {
    const std::size_t na = z.zh.size();
    const std::size_t nb = static_cast<std::size_t>(w.cols());
    const std::size_t ny = z.zh.front().size();
    pt = materialize(z, constrained, nb, ny);
    std::vector<std::vector<double>> dh(na, std::vector<double>(ny, 0.0));
    std::vector<std::vector<double>> dv(nb, std::vector<double>(ny, 0.0));
    double value = 0.0;
    std::vector<double> dq(nb), tmp(nb);
    for (std::size_t a = 0; a < na; ++a) {
        const std::vector<double> q = induced_forecast(pt.h, pt.v, a);
        std::fill(dq.begin(), dq.end(), 0.0);
        for (std::size_t b = 0; b < nb; ++b) {
            const double wab = w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            if (wab == 0.0) continue;
            value += wab * ps.score(b, q);
            ps.gradient(b, q, tmp);
            for (std::size_t j = 0; j < nb; ++j) dq[j] += wab * tmp[j];
        }
        for (std::size_t j = 0; j < nb; ++j) {
            if (dq[j] == 0.0) continue;
            for (std::size_t y = 0; y < ny; ++y) {
                dh[a][y] += dq[j] * pt.v[j][y];
                dv[j][y] += dq[j] * pt.h[a][y];
            }
        }
    }
    grad.zh.resize(na);
    for (std::size_t a = 0; a < na; ++a) grad.zh[a] = detail::mirror_direction(pt.h[a], dh[a]);
    if (constrained) {
        grad.zv.assign(ny, std::vector<double>(nb));
        for (std::size_t y = 0; y < ny; ++y) {
            std::vector<double> g(nb);
            for (std::size_t b = 0; b < nb; ++b) g[b] = dv[b][y];
            grad.zv[y] = detail::mirror_direction(Simplex::normalized(pt.v.column(y)), g);
        }
    } else {
        grad.zv.assign(nb, std::vector<double>(ny));
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t y = 0; y < ny; ++y) grad.zv[b][y] = dv[b][y];
    }
    return value;
}

PsParams params_from(const Hypothesis& h, const LikelihoodTable& v, bool constrained) {
    PsParams z;
    for (const auto& r : h.rows()) z.zh.push_back(detail::logits_of(r));
    if (constrained) {
        for (std::size_t y = 0; y < v.labels(); ++y) z.zv.push_back(detail::logits_of(Simplex::normalized(v.column(y))));
    } else {
        for (std::size_t b = 0; b < v.signals(); ++b) {
            std::vector<double> row(v.labels());
            for (std::size_t y = 0; y < row.size(); ++y) {
                const double p = std::clamp(v[b][y], 1e-12, 1.0 - 1e-12);
                row[y] = std::log(p / (1.0 - p));
            }
            z.zv.push_back(std::move(row));
        }
    }
    return z;
}

struct PsRun {
    RestartOutcome outcome;
    std::optional<PsPoint> point;
};

PsRun ascend(std::size_t index, PsParams z, bool constrained, const Eigen::MatrixXd& w, const ScoringRule& ps,
             const OptimizerConfig& cfg) {
    PsRun run;
    run.outcome.index = index;
    try {
        PsParams grad;
        PsPoint pt;
        double cur = value_and_grad(z, constrained, w, ps, grad, pt);
        if (!std::isfinite(cur)) throw std::runtime_error("non-finite objective at start");
        if (cfg.record_curve) run.outcome.curve.push_back(cur);
        double step = cfg.step_size;
        std::size_t it = 0;
        bool converged = false;
        for (; it < cfg.max_iters; ++it) {
            double g2 = 0.0;
            for (const auto& r : grad.zh)
                for (double v : r) g2 += v * v;
            for (const auto& r : grad.zv)
                for (double v : r) g2 += v * v;
            if (g2 == 0.0) break;
            bool accepted = false;
            while (step > 1e-14) {
                PsParams trial = z;
                for (std::size_t i = 0; i < trial.zh.size(); ++i)
                    for (std::size_t j = 0; j < trial.zh[i].size(); ++j) trial.zh[i][j] += step * grad.zh[i][j];
                for (std::size_t i = 0; i < trial.zv.size(); ++i)
                    for (std::size_t j = 0; j < trial.zv[i].size(); ++j) trial.zv[i][j] += step * grad.zv[i][j];
                PsParams tgrad;
                PsPoint tpt;
                const double next = value_and_grad(trial, constrained, w, ps, tgrad, tpt);
                if (!std::isfinite(next)) throw std::runtime_error("non-finite objective during ascent");
                if (next >= cur) {
                    const double gain = next - cur;
                    z = std::move(trial);
                    grad = std::move(tgrad);
                    pt = std::move(tpt);
                    cur = next;
                    accepted = true;
                    if (cfg.record_curve) run.outcome.curve.push_back(cur);
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
        run.outcome.objective = cur;
        run.point = std::move(pt);
    } catch (const std::exception& e) {
        run.outcome.aborted = true;
        run.outcome.abort_reason = e.what();
        run.outcome.objective = -std::numeric_limits<double>::infinity();
    }
    return run;
}

PsGainResult optimize_weighted(const Eigen::MatrixXd& w, std::size_t ny, const ScoringRule& ps,
                               const OptimizerConfig& cfg, bool constrained, const std::optional<PsWarmStart>& warm) {
    cfg.validate();
    const auto na = static_cast<std::size_t>(w.rows());
    const auto nb = static_cast<std::size_t>(w.cols());
    if (nb > kMaxForecastSignals) throw std::invalid_argument("psgain: |Sigma_B| too large for the full forecast path");
    std::mt19937_64 rng(cfg.seed);
    std::vector<PsParams> starts;
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        std::vector<Simplex> rows;
        for (std::size_t a = 0; a < na; ++a) rows.push_back(Simplex::normalized(dirichlet(rng, ny, 1.0)));
        std::vector<std::vector<double>> v(nb, std::vector<double>(ny));
        for (std::size_t y = 0; y < ny; ++y) {
            const auto col = dirichlet(rng, nb, 1.0);
            for (std::size_t b = 0; b < nb; ++b) v[b][y] = col[b];
        }
        if (r == 0 && warm)
            starts.push_back(params_from(warm->h_a, warm->v_b, constrained));
        else
            starts.push_back(params_from(Hypothesis(std::move(rows)), LikelihoodTable(std::move(v)), constrained));
    }
    std::vector<PsRun> runs(cfg.restarts);
    detail::parallel_for(cfg.restarts, cfg.threads,
                         [&](std::size_t r) { runs[r] = ascend(r, starts[r], constrained, w, ps, cfg); });
    PsGainResult res;
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        if (!runs[r].outcome.aborted && (!best || runs[r].outcome.objective > runs[*best].outcome.objective)) best = r;
        res.restarts.push_back(runs[r].outcome);
    }
    if (!best) throw std::runtime_error("optimizer: every restart aborted");
    res.best_restart = *best;
    res.objective = runs[*best].outcome.objective;
    res.h_a_star = runs[*best].point->h;
    res.v_b_star = runs[*best].point->v;
    res.permutation.resize(ny);
    std::iota(res.permutation.begin(), res.permutation.end(), 0);
    return res;
}

}  // namespace

double lsr_gain(const Hypothesis& h_a, const LikelihoodTable& v_b, const SampleSet& samples) {
    require_paired(samples);
    double acc = 0.0;
    for (const auto& s : samples) {
        const double dot = induced_likelihood(h_a, v_b, *s.x_a, *s.x_b);
        if (dot <= 0.0) throw std::domain_error("impossible observation under model");
        acc += std::log(std::max(dot, kProbFloor));
    }
    return acc;
}

double ps_gain(const Hypothesis& h_a, const LikelihoodTable& v_b, const SampleSet& samples, const ScoringRule& ps) {
    require_paired(samples);
    if (check_constraint(v_b) > 1e-6) throw std::invalid_argument("psgain: likelihood table violates the column constraint");
    double acc = 0.0;
    for (const auto& s : samples) {
        const std::vector<double> q = induced_forecast(h_a, v_b, *s.x_a);
        if (q[*s.x_b] <= 0.0 && ps.name == "log") throw std::domain_error("impossible observation under model");
        acc += ps.score(*s.x_b, q);
    }
    return acc;
}

double expected_lsr_gain(const Hypothesis& h_a, const LikelihoodTable& v_b, const TripletPrior& prior) {
    return weighted_value(h_a, v_b, induce_joint(prior).table(), scoring_rule("log"));
}

double expected_ps_gain(const Hypothesis& h_a, const LikelihoodTable& v_b, const TripletPrior& prior,
                        const ScoringRule& ps) {
    return weighted_value(h_a, v_b, induce_joint(prior).table(), ps);
}

double lsr_truth_value(const TripletPrior& prior) {
    const JointAB j = induce_joint(prior);
    const Eigen::VectorXd pa = j.marginal_a();
    double acc = 0.0;
    for (std::size_t a = 0; a < j.rows(); ++a)
        for (std::size_t b = 0; b < j.cols(); ++b) {
            const double p = j(a, b);
            if (p > 0.0) acc += p * std::log(p / pa(static_cast<Eigen::Index>(a)));
        }
    return acc;
}

LabelAlignment align_ps(const Hypothesis& h_a, const LikelihoodTable& v_b, const Hypothesis& ref_h,
                        const LikelihoodTable& ref_v) {
    const std::size_t ny = h_a.labels();
    if (ny > 8) throw std::invalid_argument("permutation search too large");
    std::vector<std::size_t> perm(ny);
    std::iota(perm.begin(), perm.end(), 0);
    LabelAlignment best{perm, std::numeric_limits<double>::infinity()};
    do {
        double worst = 0.0;
        const Hypothesis h = h_a.relabeled(perm);
        for (std::size_t a = 0; a < h.signals(); ++a) worst = std::max(worst, total_variation(h[a], ref_h[a]));
        const LikelihoodTable v = v_b.relabeled(perm);
        for (std::size_t y = 0; y < ny; ++y) {
            double acc = 0.0;
            for (std::size_t b = 0; b < v.signals(); ++b) acc += std::abs(v[b][y] - ref_v[b][y]);
            worst = std::max(worst, 0.5 * acc);
        }
        if (worst < best.max_row_tv) best = {perm, worst};
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

PsGainResult optimize_ps_gain(const TripletPrior& prior, const ScoringRule& ps, const OptimizerConfig& cfg,
                              bool constrained, const std::optional<PsWarmStart>& warm) {
    PsGainResult res = optimize_weighted(induce_joint(prior).table(), prior.sigma_y(), ps, cfg, constrained, warm);
    if (prior.sigma_y() <= 8) {
        const LabelAlignment al = align_ps(res.h_a_star, res.v_b_star, Hypothesis::posterior_predictor(prior, View::A),
                                           LikelihoodTable::from_prior(prior));
        res.permutation = al.permutation;
        res.aligned_tv_distance = al.max_row_tv;
    }
    return res;
}

PsGainResult optimize_ps_gain(const SampleSet& samples, std::size_t sigma_a, std::size_t sigma_b, std::size_t sigma_y,
                              const ScoringRule& ps, const OptimizerConfig& cfg, bool constrained,
                              const std::optional<PsWarmStart>& reference) {
    PsGainResult res = optimize_weighted(pair_weights(samples, sigma_a, sigma_b), sigma_y, ps, cfg, constrained,
                                         std::nullopt);
    res.objective *= static_cast<double>(samples.size());
    for (auto& r : res.restarts) r.objective *= static_cast<double>(samples.size());
    if (reference && sigma_y <= 8) {
        const LabelAlignment al = align_ps(res.h_a_star, res.v_b_star, reference->h_a, reference->v_b);
        res.permutation = al.permutation;
        res.aligned_tv_distance = al.max_row_tv;
    }
    return res;
}

}  // namespace fmig
