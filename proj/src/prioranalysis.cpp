#include "fmig/prioranalysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fmig/cotrain.hpp"
#include "fmig/random.hpp"

namespace fmig {

SolutionCandidate SolutionCandidate::desired(const TripletPrior& prior) {
    return SolutionCandidate{Hypothesis::posterior_predictor(prior, View::A),
                             Hypothesis::posterior_predictor(prior, View::B), prior.prior_y()};
}

SolutionCandidate SolutionCandidate::relabeled(std::span<const std::size_t> perm) const {
    std::vector<double> rr(r.size());
    for (std::size_t y = 0; y < rr.size(); ++y) rr[y] = r[perm[y]];
    return SolutionCandidate{a_table.relabeled(perm), b_table.relabeled(perm), Simplex(std::move(rr))};
}

Eigen::MatrixXd soe_residuals(const SolutionCandidate& cand, const JointAB& joint) {
    if (cand.a_table.signals() != joint.rows() || cand.b_table.signals() != joint.cols())
        throw std::invalid_argument("soe_residuals: candidate shape does not match the joint");
    if (!cand.r.strictly_positive()) throw std::invalid_argument("soe_residuals: r must be strictly positive");
    const Eigen::MatrixXd k = pmi_table(joint);
    Eigen::MatrixXd res(k.rows(), k.cols());
    for (Eigen::Index a = 0; a < k.rows(); ++a)
        for (Eigen::Index b = 0; b < k.cols(); ++b)
            res(a, b) = agreement(cand.a_table[static_cast<std::size_t>(a)], cand.b_table[static_cast<std::size_t>(b)],
                                  cand.r) -
                        k(a, b);
    return res;
}

std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const Eigen::VectorXd& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) return 0;
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++rank;
    return rank;
}

Eigen::MatrixXd pmi_factor(const TripletPrior& prior, View view) {
    const auto rows = posterior_rows(prior, view);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(prior.sigma_y()));
    for (std::size_t x = 0; x < rows.size(); ++x)
        for (std::size_t y = 0; y < prior.sigma_y(); ++y)
            m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = rows[x][y] / prior.prior_y()[y];
    return m;
}

StabilityReport check_stable(const TripletPrior& prior) {
    StabilityReport rep;
    rep.rank_a = numerical_rank(pmi_factor(prior, View::A));
    rep.rank_b = numerical_rank(pmi_factor(prior, View::B));
    rep.stable = rep.rank_a == prior.sigma_y() && rep.rank_b == prior.sigma_y();
    return rep;
}

std::string to_string(WellDefinedVerdict v) {
    switch (v) {
        case WellDefinedVerdict::CertifiedOnGrid: return "certified-on-grid";
        case WellDefinedVerdict::Counterexample: return "counterexample";
        case WellDefinedVerdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

namespace {

std::size_t grid_steps(double resolution) {
    if (!(resolution > 0.0) || resolution > 1.0) throw std::invalid_argument("grid resolution must lie in (0, 1]");
    const double n = 1.0 / resolution;
    const double rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n))
        throw std::invalid_argument("grid resolution must divide 1 evenly");
    return static_cast<std::size_t>(rounded);
}

void compositions(std::size_t parts, std::size_t total, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out) {
    if (parts == 1) {
        cur.push_back(total);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (std::size_t k = 0; k <= total; ++k) {
        cur.push_back(k);
        compositions(parts - 1, total - k, cur, out);
        cur.pop_back();
    }
}

/// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(const std::vector<double>& v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0;
    double theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        css += u[i];
        const double t = (css - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) theta = t;
    }
    std::vector<double> out(v.size());
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::max(v[i] - theta, 0.0);
        total += out[i];
    }
    for (double& x : out) x /= total;
    return out;
}

/// Pivot rows: greedy selection of well-conditioned rows of the factor matrix.
std::vector<std::size_t> pick_pivots(const Eigen::MatrixXd& factor) {
    const Eigen::Index m = factor.cols();
    std::vector<std::size_t> piv;
    Eigen::MatrixXd basis(0, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        double best_norm = -1.0;
        Eigen::Index best = -1;
        for (Eigen::Index x = 0; x < factor.rows(); ++x) {
            if (std::find(piv.begin(), piv.end(), static_cast<std::size_t>(x)) != piv.end()) continue;
            Eigen::RowVectorXd r = factor.row(x);
            for (Eigen::Index j = 0; j < basis.rows(); ++j) r -= r.dot(basis.row(j)) * basis.row(j);
            if (r.norm() > best_norm) {
                best_norm = r.norm();
                best = x;
            }
        }
        if (best < 0 || best_norm <= 1e-9) return {};
        Eigen::RowVectorXd r = factor.row(best);
        for (Eigen::Index j = 0; j < basis.rows(); ++j) r -= r.dot(basis.row(j)) * basis.row(j);
        basis.conservativeResize(basis.rows() + 1, Eigen::NoChange);
        basis.row(basis.rows() - 1) = r / r.norm();
        piv.push_back(static_cast<std::size_t>(best));
    }
    return piv;
}

/// Variables of the system in row-major dense form: rows of a (na x m),
/// rows of b (nb x m), and r.
struct Dense {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
    Eigen::VectorXd r;
};

Eigen::MatrixXd fitted_pmi(const Dense& d) {
    return d.a * d.r.cwiseInverse().asDiagonal() * d.b.transpose();
}

double max_abs_residual(const Dense& d, const Eigen::MatrixXd& k) { return (fitted_pmi(d) - k).cwiseAbs().maxCoeff(); }

/// Least-squares fit of every row of `out` so that out * diag(1/r) * other^T ~ target, then projection.
void fit_rows(Eigen::MatrixXd& out, const Eigen::MatrixXd& other, const Eigen::VectorXd& r,
              const Eigen::MatrixXd& target) {
    const Eigen::MatrixXd design = other * r.cwiseInverse().asDiagonal();  // n_other x m
    const auto qr = design.colPivHouseholderQr();
    for (Eigen::Index x = 0; x < out.rows(); ++x) {
        Eigen::VectorXd sol = qr.solve(target.row(x).transpose());
        std::vector<double> v(sol.data(), sol.data() + sol.size());
        v = project_simplex(v);
        for (Eigen::Index y = 0; y < out.cols(); ++y) out(x, y) = v[static_cast<std::size_t>(y)];
    }
}

/// Alternating projected least squares; r tracks the b-marginal mixture.
bool refine(Dense& d, const Eigen::MatrixXd& k, const Eigen::VectorXd& pb, std::size_t max_iters) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < max_iters; ++it) {
        d.r = d.b.transpose() * pb;
        if (d.r.minCoeff() <= 1e-12) return false;
        d.r /= d.r.sum();
        fit_rows(d.a, d.b, d.r, k);
        fit_rows(d.b, d.a, d.r, k.transpose());
        const double res = max_abs_residual(d, k);
        if (res <= 1e-10) return true;
        if (it > 50 && prev - res < 1e-14 * std::max(1.0, res)) return false;
        prev = res;
    }
    return max_abs_residual(d, k) <= 1e-10;
}

SolutionCandidate to_candidate(const Dense& d) {
    auto rows = [](const Eigen::MatrixXd& m) {
        std::vector<Simplex> out;
        for (Eigen::Index x = 0; x < m.rows(); ++x) {
            std::vector<double> v(m.cols());
            for (Eigen::Index y = 0; y < m.cols(); ++y) v[static_cast<std::size_t>(y)] = std::max(0.0, m(x, y));
            out.push_back(Simplex::normalized(std::move(v)));
        }
        return Hypothesis(std::move(out));
    };
    std::vector<double> r(d.r.data(), d.r.data() + d.r.size());
    return SolutionCandidate{rows(d.a), rows(d.b), Simplex::normalized(std::move(r))};
}

double aligned_distance(const SolutionCandidate& c, const SolutionCandidate& desired) {
    const Hypothesis r_c({c.r});
    const Hypothesis r_d({desired.r});
    const std::size_t ny = c.r.size();
    std::vector<std::size_t> perm(ny);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double worst = 0.0;
        const auto rel = c.relabeled(perm);
        for (std::size_t x = 0; x < rel.a_table.signals(); ++x)
            worst = std::max(worst, total_variation(rel.a_table[x], desired.a_table[x]));
        for (std::size_t x = 0; x < rel.b_table.signals(); ++x)
            worst = std::max(worst, total_variation(rel.b_table[x], desired.b_table[x]));
        worst = std::max(worst, total_variation(rel.r, desired.r));
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

std::size_t simplex_grid_size(std::size_t n, double resolution) {
    const std::size_t steps = grid_steps(resolution);
    // C(steps + n - 1, n - 1)
    long double c = 1.0L;
    for (std::size_t i = 1; i < n; ++i) c = c * static_cast<long double>(steps + i) / static_cast<long double>(i);
    if (c >= static_cast<long double>(std::numeric_limits<std::size_t>::max()))
        return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(std::llround(c));
}

std::vector<Simplex> simplex_grid(std::size_t n, double resolution) {
    if (n == 0) throw std::invalid_argument("simplex_grid: empty label set");
    const std::size_t steps = grid_steps(resolution);
    std::vector<std::vector<std::size_t>> comps;
    std::vector<std::size_t> cur;
    compositions(n, steps, cur, comps);
    std::vector<Simplex> out;
    out.reserve(comps.size());
    for (const auto& c : comps) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(c[i]) / static_cast<double>(steps);
        out.push_back(Simplex::normalized(std::move(v)));
    }
    return out;
}

WellDefinedReport check_well_defined(const TripletPrior& prior, double grid_resolution, std::size_t budget) {
    WellDefinedReport rep;
    rep.grid_resolution = grid_resolution;
    const std::size_t m = prior.sigma_y();
    if (m == 1) {
        rep.verdict = WellDefinedVerdict::CertifiedOnGrid;
        rep.note = "single label: the degenerate solution is unique";
        return rep;
    }
    const JointAB joint = induce_joint(prior);
    const SolutionCandidate desired = SolutionCandidate::desired(prior);

    // Pivot on whichever view has a full-rank factor; the other view is solved for.
    const bool use_a = numerical_rank(pmi_factor(prior, View::A)) == m;
    const bool use_b = numerical_rank(pmi_factor(prior, View::B)) == m;
    if (!use_a && !use_b) {
        rep.verdict = WellDefinedVerdict::Inconclusive;
        rep.note = "both factor matrices are rank deficient; pivot enumeration is not applicable";
        return rep;
    }
    const Eigen::MatrixXd k = use_a ? pmi_table(joint) : Eigen::MatrixXd(pmi_table(joint).transpose());
    const Eigen::VectorXd p_other = use_a ? joint.marginal_b() : joint.marginal_a();
    const std::vector<std::size_t> piv = pick_pivots(pmi_factor(prior, use_a ? View::A : View::B));
    if (piv.size() != m) {
        rep.verdict = WellDefinedVerdict::Inconclusive;
        rep.note = "no well-conditioned pivot rows";
        return rep;
    }
    auto flip = [&](Dense d) {
        if (!use_a) std::swap(d.a, d.b);
        return d;
    };

    const std::size_t grid_pts = simplex_grid_size(m, grid_resolution);
    long double total = static_cast<long double>(grid_pts);
    for (std::size_t i = 0; i < m; ++i) total *= static_cast<long double>(grid_pts);
    if (total > static_cast<long double>(budget)) {
        rep.verdict = WellDefinedVerdict::Inconclusive;
        rep.note = "enumeration budget exceeded";
        return rep;
    }

    const auto grid = simplex_grid(m, grid_resolution);
    std::vector<const Simplex*> r_grid;
    for (const auto& g : grid)
        if (g.strictly_positive()) r_grid.push_back(&g);

    const auto n_rows = static_cast<Eigen::Index>(k.rows());
    const auto n_cols = static_cast<Eigen::Index>(k.cols());
    const auto mi = static_cast<Eigen::Index>(m);
    const double prefilter = grid_resolution * (1.0 + k.maxCoeff());
    const double equiv = 2.0 * grid_resolution;

    std::vector<std::size_t> idx(m, 0);
    for (const Simplex* r : r_grid) {
        Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r->vec().data(), mi);
        std::fill(idx.begin(), idx.end(), 0);
        for (;;) {
            ++rep.candidates_examined;
            Eigen::MatrixXd a_piv(mi, mi);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t y = 0; y < m; ++y) a_piv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(y)) = grid[idx[i]][y];
            const auto lu = a_piv.fullPivLu();
            if (lu.isInvertible() && std::abs(lu.determinant()) > 1e-9) {
                Eigen::MatrixXd k_piv(mi, n_cols);
                for (std::size_t i = 0; i < m; ++i) k_piv.row(static_cast<Eigen::Index>(i)) = k.row(static_cast<Eigen::Index>(piv[i]));
                // a_piv * diag(1/r) * b^T = k_piv  =>  b^T = diag(r) * a_piv^{-1} * k_piv
                Eigen::MatrixXd bt = rv.asDiagonal() * lu.solve(k_piv);
                Dense d{Eigen::MatrixXd(n_rows, mi), bt.transpose(), rv};
                bool feasible = bt.minCoeff() > -prefilter;
                if (feasible) {
                    for (Eigen::Index x = 0; x < d.b.rows(); ++x) {
                        std::vector<double> v(m);
                        for (std::size_t y = 0; y < m; ++y) v[y] = d.b(x, static_cast<Eigen::Index>(y));
                        v = project_simplex(v);
                        for (std::size_t y = 0; y < m; ++y) d.b(x, static_cast<Eigen::Index>(y)) = v[y];
                    }
                    fit_rows(d.a, d.b, d.r, k);
                    if (max_abs_residual(d, k) <= prefilter) {
                        ++rep.survivors;
                        const SolutionCandidate start = to_candidate(flip(d));
                        // near the desired solution already: refining cannot produce a witness there
                        if (aligned_distance(start, desired) > equiv) {
                            if (refine(d, k, p_other, 2000)) {
                                ++rep.refined_solutions;
                                SolutionCandidate exact = to_candidate(flip(d));
                                const double dist = aligned_distance(exact, desired);
                                rep.max_aligned_distance = std::max(rep.max_aligned_distance, dist);
                                if (dist > equiv && rep.witnesses.size() < 8) rep.witnesses.push_back(std::move(exact));
                            }
                        }
                    }
                }
            }
            std::size_t pos = 0;
            while (pos < m && ++idx[pos] == grid.size()) idx[pos++] = 0;
            if (pos == m) break;
        }
    }

    if (!rep.witnesses.empty()) {
        rep.verdict = WellDefinedVerdict::Counterexample;
        rep.note = "exact solutions exist that are not relabelings of the desired solution";
    } else if (rep.survivors == 0) {
        rep.verdict = WellDefinedVerdict::Inconclusive;
        rep.note = "no grid candidate came near any solution; refine the grid";
    } else {
        rep.verdict = WellDefinedVerdict::CertifiedOnGrid;
        rep.note = "every solution found is a relabeling of the desired solution at this resolution";
    }
    return rep;
}

TripletPrior generate_prior(std::size_t sigma_a, std::size_t sigma_b, std::size_t sigma_y, std::uint64_t seed,
                            double concentration, bool require_stable, std::size_t max_retries) {
    if (sigma_a == 0 || sigma_b == 0 || sigma_y == 0) throw std::invalid_argument("generate_prior: sizes must be >= 1");
    if (!(concentration > 0.0)) throw std::invalid_argument("generate_prior: concentration must be positive");
    if (require_stable && (sigma_a < sigma_y || sigma_b < sigma_y))
        throw std::invalid_argument("could not generate stable prior: a factor matrix with " +
                                    std::to_string(std::min(sigma_a, sigma_b)) + " signal rows has rank < |Y| = " +
                                    std::to_string(sigma_y));
    std::mt19937_64 rng(seed);
    const std::size_t attempts = require_stable ? std::max<std::size_t>(1, max_retries) : 1;
    for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
        std::vector<double> py;
        do {
            py = dirichlet(rng, sigma_y, concentration);
        } while (std::any_of(py.begin(), py.end(), [](double v) { return v <= 0.0; }));
        std::vector<Simplex> ca, cb;
        for (std::size_t y = 0; y < sigma_y; ++y) ca.push_back(Simplex::normalized(dirichlet(rng, sigma_a, concentration)));
        for (std::size_t y = 0; y < sigma_y; ++y) cb.push_back(Simplex::normalized(dirichlet(rng, sigma_b, concentration)));
        TripletPrior prior(Simplex::normalized(std::move(py)), std::move(ca), std::move(cb));
        if (!require_stable || check_stable(prior).stable) return prior;
    }
    throw std::runtime_error("could not generate stable prior");
}

TripletPrior anchor_signals(const TripletPrior& prior, double anchor_mass) {
    const std::size_t ny = prior.sigma_y();
    if (prior.sigma_a() < ny || prior.sigma_b() < ny)
        throw std::invalid_argument("anchor_signals: each view needs at least |Y| signals");
    if (!(anchor_mass >= 0.0 && anchor_mass < 1.0))
        throw std::invalid_argument("anchor_signals: anchor_mass must lie in [0, 1)");
    auto anchor = [&](const std::vector<Simplex>& cond) {
        std::vector<Simplex> out;
        for (std::size_t y = 0; y < ny; ++y) {
            std::vector<double> row = cond[y].vec();
            // signal x < |Y| may only be emitted under label x
            for (std::size_t x = 0; x < ny; ++x)
                if (x != y) row[x] = 0.0;
            if (row[y] <= 0.0) row[y] = 1.0 / static_cast<double>(row.size());
            if (anchor_mass > 0.0 && row.size() > 1) {
                double rest = 0.0;
                for (std::size_t x = 0; x < row.size(); ++x)
                    if (x != y) rest += row[x];
                for (std::size_t x = 0; x < row.size(); ++x)
                    row[x] = x == y ? anchor_mass
                                    : (rest > 0.0 ? row[x] * (1.0 - anchor_mass) / rest
                                                  : (1.0 - anchor_mass) / static_cast<double>(row.size() - ny));
            }
            out.push_back(Simplex::normalized(std::move(row)));
        }
        return out;
    };
    return TripletPrior(prior.prior_y(), anchor(prior.cond_a()), anchor(prior.cond_b()));
}

}  // namespace fmig
