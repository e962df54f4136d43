#include "fmig/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fmig/prioranalysis.hpp"

namespace fmig {

Strategy::Strategy(std::vector<std::vector<MixedReport>> report_map) : map_(std::move(report_map)) {
    if (map_.empty()) throw std::invalid_argument("strategy: no signals");
    const std::size_t ny = map_.front().empty() ? 0 : map_.front().front().report.size();
    for (const auto& mix : map_) {
        if (mix.empty()) throw std::invalid_argument("strategy: empty mixture");
        double total = 0.0;
        for (const auto& c : mix) {
            if (!(c.weight >= 0.0)) throw std::invalid_argument("strategy: negative mixture weight");
            if (c.report.size() != ny) throw std::invalid_argument("strategy: report dimension mismatch");
            total += c.weight;
        }
        if (std::abs(total - 1.0) > kSimplexTol) throw std::invalid_argument("strategy: mixture weights must sum to 1");
    }
}

Strategy Strategy::pure(const std::vector<Simplex>& reports) {
    std::vector<std::vector<MixedReport>> m;
    m.reserve(reports.size());
    for (const auto& r : reports) m.push_back({MixedReport{1.0, r}});
    return Strategy(std::move(m));
}

Strategy Strategy::truthful(const TripletPrior& prior, View view) { return pure(posterior_rows(prior, view)); }

Strategy Strategy::constant(std::size_t n_signals, const Simplex& report) {
    return pure(std::vector<Simplex>(n_signals, report));
}

Strategy Strategy::permuted(const TripletPrior& prior, View view, std::span<const std::size_t> perm) {
    return pure(Hypothesis::posterior_predictor(prior, view).relabeled(perm).rows());
}

bool Strategy::is_pure() const {
    return std::all_of(map_.begin(), map_.end(), [](const auto& mix) { return mix.size() == 1; });
}

std::string to_string(ProfileClass c) {
    switch (c) {
        case ProfileClass::Truthful: return "truthful";
        case ProfileClass::Permutation: return "permutation";
        case ProfileClass::Other: return "other";
    }
    return "other";
}

namespace {

std::vector<std::vector<std::size_t>> all_permutations(std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<std::size_t>> out;
    do out.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

bool close(const Simplex& x, const Simplex& y, double tol) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::abs(x[i] - y[i]) > tol) return false;
    return true;
}

bool is_identity(const std::vector<std::size_t>& perm) {
    for (std::size_t i = 0; i < perm.size(); ++i)
        if (perm[i] != i) return false;
    return true;
}

void require_differentiable(const ConvexSpec& spec) {
    if (!spec.differentiable)
        throw std::invalid_argument("multi-task mechanism requires a differentiable f (got '" + spec.name + "')");
}

}  // namespace

StrategyProfileClass classify_profile(const Strategy& s_a, const Strategy& s_b, const TripletPrior& prior, double tol) {
    if (!s_a.is_pure() || !s_b.is_pure()) return {};
    if (s_a.signals() != prior.sigma_a() || s_b.signals() != prior.sigma_b())
        throw std::invalid_argument("classify_profile: strategy does not match the signal spaces");
    const Hypothesis post_a = Hypothesis::posterior_predictor(prior, View::A);
    const Hypothesis post_b = Hypothesis::posterior_predictor(prior, View::B);
    for (const auto& perm : all_permutations(prior.sigma_y())) {
        const Hypothesis pa = post_a.relabeled(perm);
        const Hypothesis pb = post_b.relabeled(perm);
        bool match = true;
        for (std::size_t a = 0; a < prior.sigma_a() && match; ++a)
            if (prior.marginal(View::A, a) > 0.0) match = close(s_a[a].front().report, pa[a], tol);
        for (std::size_t b = 0; b < prior.sigma_b() && match; ++b)
            if (prior.marginal(View::B, b) > 0.0) match = close(s_b[b].front().report, pb[b], tol);
        if (match)
            return {is_identity(perm) ? ProfileClass::Truthful : ProfileClass::Permutation, perm};
    }
    return {};
}

double single_task_payment(const Simplex& report_a, const Simplex& report_b, const Simplex& prior_y) {
    if (!prior_y.strictly_positive()) throw std::invalid_argument("single_task_payment: prior must be strictly positive");
    const double t = agreement(report_a, report_b, prior_y);
    if (t <= 0.0) throw std::domain_error("zero inner sum: reports share no support");
    return std::log(std::max(t, kProbFloor));
}

double mcg_payment(const std::map<std::int64_t, Simplex>& reports_a, const std::map<std::int64_t, Simplex>& reports_b,
                   const ConvexSpec& spec, const Simplex& prior_y) {
    require_differentiable(spec);
    double same = 0.0;
    double n_same = 0.0;
    for (const auto& [task, ra] : reports_a) {
        const auto it = reports_b.find(task);
        if (it == reports_b.end()) continue;
        same += spec.g(std::max(agreement(ra, it->second, prior_y), kProbFloor));
        n_same += 1.0;
    }
    double cross = 0.0;
    double n_cross = 0.0;
    for (const auto& [ta, ra] : reports_a)
        for (const auto& [tb, rb] : reports_b) {
            if (ta == tb) continue;
            cross += spec.conj_of_g(std::max(agreement(ra, rb, prior_y), kProbFloor));
            n_cross += 1.0;
        }
    if (n_same == 0.0 || n_cross == 0.0) throw std::invalid_argument("insufficient task structure");
    return same / n_same - cross / n_cross;
}

Mechanism Mechanism::mcg(ConvexSpec spec, std::size_t tasks) {
    require_differentiable(spec);
    if (tasks < 2) throw std::invalid_argument("multi-task mechanism needs at least two tasks");
    Mechanism m;
    m.kind = Kind::Mcg;
    m.spec = std::move(spec);
    m.tasks = tasks;
    return m;
}

std::string Mechanism::name() const { return kind == Kind::Single ? "single" : "mcg(" + spec->name + ")"; }

double expected_payment(const Strategy& s_a, const Strategy& s_b, const TripletPrior& prior, const Mechanism& mech) {
    if (s_a.signals() != prior.sigma_a() || s_b.signals() != prior.sigma_b())
        throw std::invalid_argument("expected_payment: strategy does not match the signal spaces");
    const JointAB joint = induce_joint(prior);
    const Eigen::MatrixXd v = joint.product_of_marginals();
    const Simplex& py = prior.prior_y();
    double acc = 0.0;
    for (std::size_t a = 0; a < prior.sigma_a(); ++a)
        for (std::size_t b = 0; b < prior.sigma_b(); ++b) {
            const double u_ab = joint(a, b);
            const double v_ab = v(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            if (u_ab == 0.0 && v_ab == 0.0) continue;
            for (const auto& ca : s_a[a])
                for (const auto& cb : s_b[b]) {
                    const double w = ca.weight * cb.weight;
                    if (w == 0.0) continue;
                    const double t = std::max(agreement(ca.report, cb.report, py), kProbFloor);
                    if (mech.kind == Mechanism::Kind::Single) {
                        if (u_ab != 0.0) acc += w * u_ab * std::log(t);
                    } else {
                        if (u_ab != 0.0) acc += w * u_ab * mech.spec->g(t);
                        if (v_ab != 0.0) acc -= w * v_ab * mech.spec->conj_of_g(t);
                    }
                }
        }
    return acc;
}

TruthfulnessReport verify_truthful(const TripletPrior& prior, const Mechanism& mech, double grid_resolution,
                                   double tol) {
    const auto grid = simplex_grid(prior.sigma_y(), grid_resolution);
    const JointAB joint = induce_joint(prior);
    const Eigen::MatrixXd v = joint.product_of_marginals();
    const Simplex& py = prior.prior_y();

    TruthfulnessReport rep;
    rep.grid_resolution = grid_resolution;
    rep.grid_points = grid.size();
    rep.truthful_payoff =
        expected_payment(Strategy::truthful(prior, View::A), Strategy::truthful(prior, View::B), prior, mech);
    rep.worst_deviation = 0.0;
    rep.margin = std::numeric_limits<double>::infinity();

    for (View deviator : {View::A, View::B}) {
        const View honest = deviator == View::A ? View::B : View::A;
        const auto honest_reports = posterior_rows(prior, honest);
        const auto own_posts = posterior_rows(prior, deviator);
        const std::size_t n_dev = own_posts.size();
        for (std::size_t x = 0; x < n_dev; ++x) {
            if (prior.marginal(deviator, x) <= 0.0) continue;
            // payoff contribution of the deviator's signal x when it reports r
            auto contribution = [&](const Simplex& r) {
                double acc = 0.0;
                for (std::size_t o = 0; o < honest_reports.size(); ++o) {
                    const auto ia = static_cast<Eigen::Index>(deviator == View::A ? x : o);
                    const auto ib = static_cast<Eigen::Index>(deviator == View::A ? o : x);
                    const double u = joint.table()(ia, ib);
                    const double w = v(ia, ib);
                    const double t = std::max(agreement(r, honest_reports[o], py), kProbFloor);
                    if (mech.kind == Mechanism::Kind::Single) {
                        if (u != 0.0) acc += u * std::log(t);
                    } else {
                        if (u != 0.0) acc += u * mech.spec->g(t);
                        if (w != 0.0) acc -= w * mech.spec->conj_of_g(t);
                    }
                }
                return acc;
            };
            const double truth = contribution(own_posts[x]);
            double best_any = -std::numeric_limits<double>::infinity();
            double best_other = -std::numeric_limits<double>::infinity();
            for (const auto& r : grid) {
                const double c = contribution(r);
                best_any = std::max(best_any, c);
                if (!close(r, own_posts[x], 1e-12)) best_other = std::max(best_other, c);
            }
            rep.worst_deviation = std::max(rep.worst_deviation, best_any - truth);
            rep.margin = std::min(rep.margin, truth - best_other);
        }
    }
    rep.worst_deviation = std::max(0.0, rep.worst_deviation);
    if (!std::isfinite(rep.margin)) rep.margin = 0.0;
    rep.is_equilibrium = rep.worst_deviation <= tol;
    rep.is_strict = rep.is_equilibrium && rep.margin > tol;
    return rep;
}

FocalReport verify_focal(const TripletPrior& prior, const ConvexSpec& spec, double grid_resolution, double tol,
                         long double budget) {
    require_differentiable(spec);
    const std::size_t na = prior.sigma_a();
    const std::size_t nb = prior.sigma_b();
    const std::size_t ny = prior.sigma_y();
    const auto grid = simplex_grid(ny, grid_resolution);
    const std::size_t gsize = grid.size();

    FocalReport rep;
    rep.grid_resolution = grid_resolution;
    rep.profiles_covered = std::pow(static_cast<long double>(gsize), static_cast<long double>(na + nb));
    if (rep.profiles_covered > budget) throw std::runtime_error("enumeration budget exceeded");

    const Mechanism mech = Mechanism::mcg(spec);
    const JointAB joint = induce_joint(prior);
    const Eigen::MatrixXd u = joint.table();
    const Eigen::MatrixXd v = joint.product_of_marginals();
    const Simplex& py = prior.prior_y();
    rep.mutual_information = f_mutual_information(joint, spec);

    const Strategy truth_a = Strategy::truthful(prior, View::A);
    const Strategy truth_b = Strategy::truthful(prior, View::B);
    rep.truthful_payoff = expected_payment(truth_a, truth_b, prior, mech);
    rep.rows.push_back({"truthful", ProfileClass::Truthful, {}, rep.truthful_payoff, 0.0});

    // agreement-dependent payoff pieces for every pair of grid reports
    std::vector<double> gt(gsize * gsize), ct(gsize * gsize);
    for (std::size_t i = 0; i < gsize; ++i)
        for (std::size_t j = 0; j < gsize; ++j) {
            const double t = std::max(agreement(grid[i], grid[j], py), kProbFloor);
            gt[i * gsize + j] = spec.g(t);
            ct[i * gsize + j] = spec.conj_of_g(t);
        }

    // grid index of each relabeled posterior, when it lies on the grid
    const auto perms = all_permutations(ny);
    const Hypothesis post_a = Hypothesis::posterior_predictor(prior, View::A);
    const Hypothesis post_b = Hypothesis::posterior_predictor(prior, View::B);
    auto grid_index = [&](const Simplex& s) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < gsize; ++i)
            if (close(grid[i], s, 1e-9)) return static_cast<std::ptrdiff_t>(i);
        return -1;
    };
    std::vector<std::vector<std::ptrdiff_t>> match_a(perms.size()), match_b(perms.size());
    for (std::size_t k = 0; k < perms.size(); ++k) {
        const Hypothesis ra = post_a.relabeled(perms[k]);
        const Hypothesis rb = post_b.relabeled(perms[k]);
        for (std::size_t a = 0; a < na; ++a) match_a[k].push_back(grid_index(ra[a]));
        for (std::size_t b = 0; b < nb; ++b) match_b[k].push_back(grid_index(rb[b]));
    }
    auto matches = [&](const std::vector<std::size_t>& idx, const std::vector<std::ptrdiff_t>& target, View view) {
        for (std::size_t x = 0; x < idx.size(); ++x) {
            if (prior.marginal(view, x) <= 0.0) continue;
            if (target[x] < 0 || static_cast<std::size_t>(target[x]) != idx[x]) return false;
        }
        return true;
    };

    double best_grid = -std::numeric_limits<double>::infinity();
    double best_nonperm = -std::numeric_limits<double>::infinity();

    std::vector<std::size_t> ia(na, 0), ib(nb, 0);
    std::vector<double> partial(nb * gsize);
    for (;;) {
        std::fill(partial.begin(), partial.end(), 0.0);
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t a = 0; a < na; ++a) {
                const double uab = u(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                const double vab = v(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                const double* grow = &gt[ia[a] * gsize];
                const double* crow = &ct[ia[a] * gsize];
                double* out = &partial[b * gsize];
                for (std::size_t j = 0; j < gsize; ++j) out[j] += uab * grow[j] - vab * crow[j];
            }
        // Bob's best response separates over his signals
        double sep = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            const double* row = &partial[b * gsize];
            sep += *std::max_element(row, row + gsize);
        }
        best_grid = std::max(best_grid, sep);

        std::vector<std::size_t> alice_perms;
        for (std::size_t k = 0; k < perms.size(); ++k)
            if (matches(ia, match_a[k], View::A)) alice_perms.push_back(k);

        if (alice_perms.empty()) {
            if (sep > best_nonperm) {
                best_nonperm = sep;
            }
        } else {
            // a handful of Alice profiles are relabeled truth: walk Bob's profiles explicitly
            std::fill(ib.begin(), ib.end(), 0);
            for (;;) {
                bool perm_profile = false;
                for (std::size_t k : alice_perms)
                    if (matches(ib, match_b[k], View::B)) perm_profile = true;
                if (!perm_profile) {
                    double pay = 0.0;
                    for (std::size_t b = 0; b < nb; ++b) pay += partial[b * gsize + ib[b]];
                    if (pay > best_nonperm) {
                        best_nonperm = pay;
                    }
                }
                std::size_t pos = 0;
                while (pos < nb && ++ib[pos] == gsize) ib[pos++] = 0;
                if (pos == nb) break;
            }
        }

        std::size_t pos = 0;
        while (pos < na && ++ia[pos] == gsize) ia[pos++] = 0;
        if (pos == na) break;
    }

    rep.best_grid_payoff = best_grid;
    rep.best_nonpermutation_payoff = best_nonperm;
    rep.margin = rep.truthful_payoff - best_nonperm;

    bool perms_below = true;
    for (std::size_t k = 0; k < perms.size(); ++k) {
        if (is_identity(perms[k])) continue;
        const double pay = expected_payment(Strategy::permuted(prior, View::A, perms[k]),
                                            Strategy::permuted(prior, View::B, perms[k]), prior, mech);
        const double gap = rep.truthful_payoff - pay;
        if (gap < -tol) perms_below = false;
        std::string label = "permutation(";
        for (std::size_t y = 0; y < perms[k].size(); ++y) label += (y ? "," : "") + std::to_string(perms[k][y]);
        label += ")";
        ProfileRow row{label, ProfileClass::Permutation, perms[k], pay, gap};
        rep.permutation_ties.push_back(row);
        rep.rows.push_back(row);
    }

    rep.rows.push_back({"best non-permutation grid profile", ProfileClass::Other, {}, best_nonperm, rep.margin});
    {
        const double pay = expected_payment(Strategy::constant(na, py), Strategy::constant(nb, py), prior, mech);
        rep.rows.push_back({"constant report of the label prior", ProfileClass::Other, {}, pay, rep.truthful_payoff - pay});
        double best_const = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < gsize; ++i)
            for (std::size_t j = 0; j < gsize; ++j) {
                const double pay_ij =
                    expected_payment(Strategy::constant(na, grid[i]), Strategy::constant(nb, grid[j]), prior, mech);
                best_const = std::max(best_const, pay_ij);
            }
        rep.rows.push_back({"best constant grid profile", ProfileClass::Other, {}, best_const,
                            rep.truthful_payoff - best_const});
    }

    rep.truthful_is_max = best_grid <= rep.truthful_payoff + tol && perms_below;
    rep.nonpermutation_strictly_below = rep.margin > tol;
    rep.note = "certificate over pure grid profiles at resolution " + std::to_string(grid_resolution) +
               "; continuous and mixed profiles are not covered";
    return rep;
}

}  // namespace fmig
