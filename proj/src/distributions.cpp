#include "fmig/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "fmig/random.hpp"

namespace fmig {

Simplex::Simplex(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("simplex: empty probability vector");
    double total = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p < 0.0)
            throw std::invalid_argument("simplex: entry " + std::to_string(p) + " is negative or non-finite");
        total += p;
    }
    if (std::abs(total - 1.0) > kSimplexTol)
        throw std::invalid_argument("simplex: entries sum to " + std::to_string(total));
}

Simplex Simplex::normalized(std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("simplex: negative or non-finite weight");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("simplex: weights have zero mass");
    for (double& w : weights) w /= total;
    return Simplex(std::move(weights));
}

Simplex Simplex::uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("simplex: empty probability vector");
    return Simplex(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Simplex Simplex::point_mass(std::size_t n, std::size_t at) {
    if (at >= n) throw std::out_of_range("simplex: point mass index out of range");
    std::vector<double> v(n, 0.0);
    v[at] = 1.0;
    return Simplex(std::move(v));
}

bool Simplex::strictly_positive() const {
    return std::all_of(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; });
}

double total_variation(const Simplex& p, const Simplex& q) {
    if (p.size() != q.size()) throw std::invalid_argument("total_variation: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
    return 0.5 * acc;
}

TripletPrior::TripletPrior(Simplex prior_y, std::vector<Simplex> cond_a, std::vector<Simplex> cond_b)
    : prior_y_(std::move(prior_y)), cond_a_(std::move(cond_a)), cond_b_(std::move(cond_b)) {
    const std::size_t ny = prior_y_.size();
    if (ny == 0) throw std::invalid_argument("prior: empty label set");
    if (!prior_y_.strictly_positive()) throw std::invalid_argument("prior: Pr[Y] must have full support");
    if (cond_a_.size() != ny || cond_b_.size() != ny)
        throw std::invalid_argument("prior: need one conditional row per label");
    auto check_rows = [](const std::vector<Simplex>& rows, const char* name) {
        const std::size_t n = rows.front().size();
        if (n == 0) throw std::invalid_argument(std::string("prior: empty signal set for ") + name);
        for (const auto& r : rows)
            if (r.size() != n) throw std::invalid_argument(std::string("prior: ragged conditional table ") + name);
    };
    check_rows(cond_a_, "cond_a");
    check_rows(cond_b_, "cond_b");
}

double TripletPrior::marginal(View v, std::size_t x) const {
    const auto& rows = cond(v);
    double m = 0.0;
    for (std::size_t y = 0; y < sigma_y(); ++y) m += prior_y_[y] * rows[y][x];
    return m;
}

double TripletPrior::triple(std::size_t a, std::size_t b, std::size_t y) const {
    return prior_y_[y] * cond_a_[y][a] * cond_b_[y][b];
}

TripletPrior TripletPrior::relabeled(std::span<const std::size_t> perm) const {
    const std::size_t ny = sigma_y();
    if (perm.size() != ny) throw std::invalid_argument("relabel: permutation size mismatch");
    std::vector<double> py(ny);
    std::vector<Simplex> ca(ny), cb(ny);
    for (std::size_t y = 0; y < ny; ++y) {
        py[y] = prior_y_[perm[y]];
        ca[y] = cond_a_[perm[y]];
        cb[y] = cond_b_[perm[y]];
    }
    return TripletPrior(Simplex(std::move(py)), std::move(ca), std::move(cb));
}

JointAB::JointAB(Eigen::MatrixXd table) : table_(std::move(table)) {
    if (table_.size() == 0) throw std::invalid_argument("joint: empty table");
    if (!table_.allFinite() || table_.minCoeff() < 0.0) throw std::invalid_argument("joint: negative or non-finite entry");
    if (std::abs(table_.sum() - 1.0) > kSimplexTol) throw std::invalid_argument("joint: entries must sum to 1");
}

Eigen::MatrixXd JointAB::product_of_marginals() const {
    return marginal_a() * marginal_b().transpose();
}

void validate_samples(const SampleSet& samples) {
    std::unordered_set<std::int64_t> seen;
    for (const auto& s : samples) {
        if (!s.x_a && !s.x_b)
            throw std::invalid_argument("samples: task " + std::to_string(s.task_id) + " carries no signal");
        if (!seen.insert(s.task_id).second)
            throw std::invalid_argument("samples: duplicate task id " + std::to_string(s.task_id));
    }
}

JointAB induce_joint(const TripletPrior& prior) {
    const auto na = static_cast<Eigen::Index>(prior.sigma_a());
    const auto nb = static_cast<Eigen::Index>(prior.sigma_b());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(na, nb);
    for (std::size_t y = 0; y < prior.sigma_y(); ++y) {
        Eigen::Map<const Eigen::VectorXd> ca(prior.cond_a()[y].vec().data(), na);
        Eigen::Map<const Eigen::VectorXd> cb(prior.cond_b()[y].vec().data(), nb);
        t.noalias() += prior.prior_y()[y] * ca * cb.transpose();
    }
    // absorb the last ulp of rounding so the joint validates at any size
    t /= t.sum();
    return JointAB(std::move(t));
}

double pmi(const JointAB& joint, std::size_t a, std::size_t b) {
    if (a >= joint.rows() || b >= joint.cols()) throw std::out_of_range("pmi: signal out of range");
    const double pa = joint.table().row(static_cast<Eigen::Index>(a)).sum();
    const double pb = joint.table().col(static_cast<Eigen::Index>(b)).sum();
    if (pa <= 0.0 || pb <= 0.0) throw std::domain_error("undefined PMI: zero-probability signal");
    return joint(a, b) / (pa * pb);
}

Eigen::MatrixXd pmi_table(const JointAB& joint) {
    const Eigen::MatrixXd v = joint.product_of_marginals();
    Eigen::MatrixXd k(v.rows(), v.cols());
    for (Eigen::Index a = 0; a < v.rows(); ++a)
        for (Eigen::Index b = 0; b < v.cols(); ++b) k(a, b) = v(a, b) > 0.0 ? joint.table()(a, b) / v(a, b) : 0.0;
    return k;
}

Simplex posterior(const TripletPrior& prior, View view, std::size_t x) {
    const auto& rows = prior.cond(view);
    if (x >= rows.front().size()) throw std::out_of_range("posterior: signal out of range");
    std::vector<double> w(prior.sigma_y());
    double total = 0.0;
    for (std::size_t y = 0; y < w.size(); ++y) {
        w[y] = prior.prior_y()[y] * rows[y][x];
        total += w[y];
    }
    if (!(total > 0.0)) throw std::domain_error("posterior: zero-probability signal");
    for (double& v : w) v /= total;
    return Simplex(std::move(w));
}

std::vector<Simplex> posterior_rows(const TripletPrior& prior, View view) {
    const std::size_t n = view == View::A ? prior.sigma_a() : prior.sigma_b();
    std::vector<Simplex> out;
    out.reserve(n);
    for (std::size_t x = 0; x < n; ++x) {
        // zero-mass signals never occur; give them the label prior so the row stays a simplex
        if (prior.marginal(view, x) > 0.0)
            out.push_back(posterior(prior, view, x));
        else
            out.push_back(prior.prior_y());
    }
    return out;
}

Simplex joint_posterior(const TripletPrior& prior, std::size_t a, std::size_t b) {
    std::vector<double> w(prior.sigma_y());
    for (std::size_t y = 0; y < w.size(); ++y) w[y] = prior.triple(a, b, y);
    return Simplex::normalized(std::move(w));
}

Simplex aggregate_forecast(const Simplex& p_a, const Simplex& p_b, const Simplex& prior_y) {
    if (p_a.size() != prior_y.size() || p_b.size() != prior_y.size())
        throw std::invalid_argument("aggregate_forecast: dimension mismatch");
    if (!prior_y.strictly_positive()) throw std::invalid_argument("aggregate_forecast: prior must be strictly positive");
    std::vector<double> w(prior_y.size());
    double total = 0.0;
    for (std::size_t y = 0; y < w.size(); ++y) {
        w[y] = p_a[y] * p_b[y] / prior_y[y];
        total += w[y];
    }
    if (!(total > 0.0)) throw std::domain_error("incompatible forecasts");
    for (double& v : w) v /= total;
    return Simplex(std::move(w));
}

double verify_ci_identity(const TripletPrior& prior) {
    const JointAB joint = induce_joint(prior);
    const auto pa = posterior_rows(prior, View::A);
    const auto pb = posterior_rows(prior, View::B);
    double worst = 0.0;
    for (std::size_t a = 0; a < prior.sigma_a(); ++a) {
        if (prior.marginal(View::A, a) <= 0.0) continue;
        for (std::size_t b = 0; b < prior.sigma_b(); ++b) {
            if (prior.marginal(View::B, b) <= 0.0) continue;
            double rhs = 0.0;
            for (std::size_t y = 0; y < prior.sigma_y(); ++y) rhs += pa[a][y] * pb[b][y] / prior.prior_y()[y];
            worst = std::max(worst, std::abs(pmi(joint, a, b) - rhs));
        }
    }
    return worst;
}

double ci_identity_residual(const std::vector<std::vector<std::vector<double>>>& joint3) {
    const std::size_t na = joint3.size();
    if (na == 0 || joint3[0].empty() || joint3[0][0].empty()) throw std::invalid_argument("ci residual: empty joint");
    const std::size_t nb = joint3[0].size();
    const std::size_t ny = joint3[0][0].size();
    std::vector<double> pa(na, 0.0), pb(nb, 0.0), py(ny, 0.0);
    std::vector<std::vector<double>> pab(na, std::vector<double>(nb, 0.0));
    std::vector<std::vector<double>> pay(na, std::vector<double>(ny, 0.0));
    std::vector<std::vector<double>> pby(nb, std::vector<double>(ny, 0.0));
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t y = 0; y < ny; ++y) {
                const double p = joint3.at(a).at(b).at(y);
                pa[a] += p;
                pb[b] += p;
                py[y] += p;
                pab[a][b] += p;
                pay[a][y] += p;
                pby[b][y] += p;
            }
    double worst = 0.0;
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b) {
            if (pa[a] <= 0.0 || pb[b] <= 0.0) continue;
            double rhs = 0.0;
            for (std::size_t y = 0; y < ny; ++y)
                if (py[y] > 0.0) rhs += (pay[a][y] / pa[a]) * (pby[b][y] / pb[b]) / py[y];
            worst = std::max(worst, std::abs(pab[a][b] / (pa[a] * pb[b]) - rhs));
        }
    return worst;
}

SampleSet sample_tasks(const TripletPrior& prior, std::size_t n_total, std::size_t overlap, std::uint64_t seed) {
    if (overlap > n_total) throw std::invalid_argument("sample_tasks: overlap exceeds n_total");
    std::mt19937_64 rng(seed);
    SampleSet out;
    out.reserve(n_total);
    for (std::size_t i = 0; i < n_total; ++i) {
        const std::size_t y = draw_index(rng, prior.prior_y().values());
        const std::size_t a = draw_index(rng, prior.cond_a()[y].values());
        const std::size_t b = draw_index(rng, prior.cond_b()[y].values());
        TaskSample t{static_cast<std::int64_t>(i), a, b};
        if (i >= overlap) {
            if ((i - overlap) % 2 == 0)
                t.x_b.reset();
            else
                t.x_a.reset();
        }
        out.push_back(t);
    }
    return out;
}

}  // namespace fmig
