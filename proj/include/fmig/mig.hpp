#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fmig/distributions.hpp"
#include "fmig/divergence.hpp"

namespace fmig {

/// Tabular predictor: one forecast over Y per input signal.
class Hypothesis {
public:
    Hypothesis() = default;
    explicit Hypothesis(std::vector<Simplex> rows);

    /// Every signal forecasts `row`.
    static Hypothesis constant(std::size_t n_signals, const Simplex& row);
    /// The Bayesian posterior predictor of one view.
    static Hypothesis posterior_predictor(const TripletPrior& prior, View view);

    std::size_t signals() const { return rows_.size(); }
    std::size_t labels() const { return rows_.empty() ? 0 : rows_.front().size(); }
    const Simplex& operator[](std::size_t x) const { return rows_[x]; }
    const std::vector<Simplex>& rows() const { return rows_; }

    /// Row x of the result forecasts label y with the mass this hypothesis puts on perm[y].
    Hypothesis relabeled(std::span<const std::size_t> perm) const;

    friend bool operator==(const Hypothesis&, const Hypothesis&) = default;

private:
    std::vector<Simplex> rows_;
};

/// sum_y p1(y) p2(y) / p(y): the agreement statistic inside R^f.
double agreement(const Simplex& p1, const Simplex& p2, const Simplex& p);

/// R^f(p1, p2, p) = g(agreement(p1, p2, p)).
double reward_rf(const Simplex& p1, const Simplex& p2, const Simplex& p, const ConvexSpec& spec);

/// Weights on the (x_A, x_B) cells for the agreement term and the penalty
/// term of the gain. The exact objective uses (U, V); a sample set induces
/// empirical frequencies of same-task and distinct cross-task pairs.
struct PairWeights {
    Eigen::MatrixXd same;
    Eigen::MatrixXd cross;
};

PairWeights exact_weights(const TripletPrior& prior);
PairWeights exact_weights(const JointAB& joint);

/// Throws std::invalid_argument("insufficient task structure") when the
/// overlap is empty or no distinct cross pair exists.
PairWeights empirical_weights(const SampleSet& samples, std::size_t sigma_a, std::size_t sigma_b);

/// sum same * g(t) - sum cross * f*(g(t)), with t the agreement of the cell.
double mig_value(const Hypothesis& h_a, const Hypothesis& h_b, const Simplex& p, const ConvexSpec& spec,
                 const PairWeights& w);

/// Gradient of mig_value with respect to every probability entry of h_a, h_b
/// and p (not projected onto the simplex tangent space).
struct MigGradient {
    double value = 0.0;
    std::vector<std::vector<double>> d_ha;
    std::vector<std::vector<double>> d_hb;
    std::vector<double> d_p;
};

MigGradient mig_gradient(const Hypothesis& h_a, const Hypothesis& h_b, const Simplex& p, const ConvexSpec& spec,
                         const PairWeights& w);

/// Mean R^f over tasks in both sets minus the mean composed conjugate over
/// ordered distinct cross pairs.
double empirical_mig(const Hypothesis& h_a, const Hypothesis& h_b, const Simplex& p, const ConvexSpec& spec,
                     const SampleSet& samples);

/// Same estimator for an arbitrary reward function; the penalty uses spec.fstar.
using RewardFn = std::function<double(const Simplex&, const Simplex&)>;
double empirical_gain(const Hypothesis& h_a, const Hypothesis& h_b, const RewardFn& reward, const ConvexSpec& spec,
                      const SampleSet& samples);

/// E_U[R^f] - E_V[f*(R^f)] by enumeration over the induced joint.
double expected_mig(const Hypothesis& h_a, const Hypothesis& h_b, const Simplex& p, const ConvexSpec& spec,
                    const TripletPrior& prior);

}  // namespace fmig
