#include "fmig/mig.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fmig {

Hypothesis::Hypothesis(std::vector<Simplex> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw std::invalid_argument("hypothesis: no rows");
    for (const auto& r : rows_)
        if (r.size() != rows_.front().size()) throw std::invalid_argument("hypothesis: ragged rows");
}

Hypothesis Hypothesis::constant(std::size_t n_signals, const Simplex& row) {
    return Hypothesis(std::vector<Simplex>(n_signals, row));
}

Hypothesis Hypothesis::posterior_predictor(const TripletPrior& prior, View view) {
    return Hypothesis(posterior_rows(prior, view));
}

Hypothesis Hypothesis::relabeled(std::span<const std::size_t> perm) const {
    if (perm.size() != labels()) throw std::invalid_argument("hypothesis: permutation size mismatch");
    std::vector<Simplex> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) {
        std::vector<double> v(r.size());
        for (std::size_t y = 0; y < v.size(); ++y) v[y] = r[perm[y]];
        out.emplace_back(std::move(v));
    }
    return Hypothesis(std::move(out));
}

double agreement(const Simplex& p1, const Simplex& p2, const Simplex& p) {
    if (p1.size() != p.size() || p2.size() != p.size()) throw std::invalid_argument("agreement: dimension mismatch");
    double t = 0.0;
    for (std::size_t y = 0; y < p.size(); ++y) t += p1[y] * p2[y] / std::max(p[y], kProbFloor);
    return t;
}

double reward_rf(const Simplex& p1, const Simplex& p2, const Simplex& p, const ConvexSpec& spec) {
    return spec.g(std::max(agreement(p1, p2, p), kProbFloor));
}

PairWeights exact_weights(const JointAB& joint) {
    return PairWeights{joint.table(), joint.product_of_marginals()};
}

PairWeights exact_weights(const TripletPrior& prior) { return exact_weights(induce_joint(prior)); }

PairWeights empirical_weights(const SampleSet& samples, std::size_t sigma_a, std::size_t sigma_b) {
    validate_samples(samples);
    const auto na = static_cast<Eigen::Index>(sigma_a);
    const auto nb = static_cast<Eigen::Index>(sigma_b);
    Eigen::MatrixXd same = Eigen::MatrixXd::Zero(na, nb);
    Eigen::VectorXd count_a = Eigen::VectorXd::Zero(na);
    Eigen::VectorXd count_b = Eigen::VectorXd::Zero(nb);
    double n_both = 0.0;
    double n_a = 0.0;
    double n_b = 0.0;
    for (const auto& s : samples) {
        if (s.x_a) {
            if (*s.x_a >= sigma_a) throw std::out_of_range("samples: x_a out of range");
            count_a(static_cast<Eigen::Index>(*s.x_a)) += 1.0;
            n_a += 1.0;
        }
        if (s.x_b) {
            if (*s.x_b >= sigma_b) throw std::out_of_range("samples: x_b out of range");
            count_b(static_cast<Eigen::Index>(*s.x_b)) += 1.0;
            n_b += 1.0;
        }
        if (s.x_a && s.x_b) {
            same(static_cast<Eigen::Index>(*s.x_a), static_cast<Eigen::Index>(*s.x_b)) += 1.0;
            n_both += 1.0;
        }
    }
    // ordered pairs (l_A, l_B) with l_A != l_B: all pairs minus the diagonal
    const double n_cross = n_a * n_b - n_both;
    if (n_both == 0.0 || n_cross <= 0.0) throw std::invalid_argument("insufficient task structure");
    Eigen::MatrixXd cross = count_a * count_b.transpose() - same;
    return PairWeights{same / n_both, cross / n_cross};
}

double mig_value(const Hypothesis& h_a, const Hypothesis& h_b, const Simplex& p, const ConvexSpec& spec,
                 const PairWeights& w) {
    if (static_cast<std::size_t>(w.same.rows()) != h_a.signals() ||
        static_cast<std::size_t>(w.same.cols()) != h_b.signals())
        throw std::invalid_argument("mig: hypothesis and weight shapes disagree");
    double acc = 0.0;
    for (std::size_t a = 0; a < h_a.signals(); ++a)
        for (std::size_t b = 0; b < h_b.signals(); ++b) {
            const double ws = w.same(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            const double wc = w.cross(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            if (ws == 0.0 && wc == 0.0) continue;
            const double t = std::max(agreement(h_a[a], h_b[b], p), kProbFloor);
            if (ws != 0.0) acc += ws * spec.g(t);
            if (wc != 0.0) acc -= wc * spec.conj_of_g(t);
        }
    return acc;
}

MigGradient mig_gradient(const Hypothesis& h_a, const Hypothesis& h_b, const Simplex& p, const ConvexSpec& spec,
                         const PairWeights& w) {
    const std::size_t na = h_a.signals();
    const std::size_t nb = h_b.signals();
    const std::size_t ny = p.size();
    MigGradient out;
    out.d_ha.assign(na, std::vector<double>(ny, 0.0));
    out.d_hb.assign(nb, std::vector<double>(ny, 0.0));
    out.d_p.assign(ny, 0.0);
    std::vector<double> inv_p(ny);
    for (std::size_t y = 0; y < ny; ++y) inv_p[y] = 1.0 / std::max(p[y], kProbFloor);

    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b) {
            const double ws = w.same(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            const double wc = w.cross(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            if (ws == 0.0 && wc == 0.0) continue;
            const double raw = agreement(h_a[a], h_b[b], p);
            const double t = std::max(raw, kProbFloor);
            if (ws != 0.0) out.value += ws * spec.g(t);
            if (wc != 0.0) out.value -= wc * spec.conj_of_g(t);
            if (raw < kProbFloor) continue;  // flat under the floor
            const double dt = ws * spec.g_prime(t) - wc * spec.conj_of_g_prime(t);
            if (dt == 0.0) continue;
            for (std::size_t y = 0; y < ny; ++y) {
                out.d_ha[a][y] += dt * h_b[b][y] * inv_p[y];
                out.d_hb[b][y] += dt * h_a[a][y] * inv_p[y];
                out.d_p[y] -= dt * h_a[a][y] * h_b[b][y] * inv_p[y] * inv_p[y];
            }
        }
    return out;
}

double empirical_mig(const Hypothesis& h_a, const Hypothesis& h_b, const Simplex& p, const ConvexSpec& spec,
                     const SampleSet& samples) {
    return mig_value(h_a, h_b, p, spec, empirical_weights(samples, h_a.signals(), h_b.signals()));
}

double empirical_gain(const Hypothesis& h_a, const Hypothesis& h_b, const RewardFn& reward, const ConvexSpec& spec,
                      const SampleSet& samples) {
    const PairWeights w = empirical_weights(samples, h_a.signals(), h_b.signals());
    double acc = 0.0;
    for (std::size_t a = 0; a < h_a.signals(); ++a)
        for (std::size_t b = 0; b < h_b.signals(); ++b) {
            const double ws = w.same(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            const double wc = w.cross(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            if (ws == 0.0 && wc == 0.0) continue;
            const double r = reward(h_a[a], h_b[b]);
            if (ws != 0.0) acc += ws * r;
            if (wc != 0.0) {
                if (!spec.in_fstar_domain(r)) throw std::domain_error("conjugate undefined");
                acc -= wc * spec.fstar(r);
            }
        }
    return acc;
}

double expected_mig(const Hypothesis& h_a, const Hypothesis& h_b, const Simplex& p, const ConvexSpec& spec,
                    const TripletPrior& prior) {
    return mig_value(h_a, h_b, p, spec, exact_weights(prior));
}

}  // namespace fmig
