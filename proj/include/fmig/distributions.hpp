#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fmig {

/// Probability floor applied before any division or logarithm on a
/// probability-derived quantity.
inline constexpr double kProbFloor = 1e-12;

/// Tolerance on the total mass of a probability vector.
inline constexpr double kSimplexTol = 1e-9;

enum class View { A, B };

/// A probability vector over a finite signal set.
class Simplex {
public:
    Simplex() = default;

    /// Validates: every entry >= 0 and the total within kSimplexTol of 1.
    explicit Simplex(std::vector<double> probs);

    /// Rescales a nonnegative vector with positive mass onto the simplex.
    static Simplex normalized(std::vector<double> weights);
    static Simplex uniform(std::size_t n);
    static Simplex point_mass(std::size_t n, std::size_t at);

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::span<const double> values() const { return probs_; }
    const std::vector<double>& vec() const { return probs_; }

    bool strictly_positive() const;

    friend bool operator==(const Simplex&, const Simplex&) = default;

private:
    std::vector<double> probs_;
};

/// Total-variation distance (half the L1 gap).
double total_variation(const Simplex& p, const Simplex& q);

/// Prior Q over (X_A, X_B, Y) stored as Pr[Y], Pr[X_A|Y], Pr[X_B|Y]; the
/// factored form makes X_A and X_B conditionally independent given Y.
class TripletPrior {
public:
    TripletPrior(Simplex prior_y, std::vector<Simplex> cond_a, std::vector<Simplex> cond_b);

    std::size_t sigma_a() const { return cond_a_.front().size(); }
    std::size_t sigma_b() const { return cond_b_.front().size(); }
    std::size_t sigma_y() const { return prior_y_.size(); }

    const Simplex& prior_y() const { return prior_y_; }
    const std::vector<Simplex>& cond_a() const { return cond_a_; }
    const std::vector<Simplex>& cond_b() const { return cond_b_; }
    const std::vector<Simplex>& cond(View v) const { return v == View::A ? cond_a_ : cond_b_; }

    /// Pr[X_view = x].
    double marginal(View v, std::size_t x) const;
    /// Pr[X_A=a, X_B=b, Y=y].
    double triple(std::size_t a, std::size_t b, std::size_t y) const;

    /// Applies a relabeling of Y: label y of the result is label perm[y] of this prior.
    TripletPrior relabeled(std::span<const std::size_t> perm) const;

    friend bool operator==(const TripletPrior&, const TripletPrior&) = default;

private:
    Simplex prior_y_;
    std::vector<Simplex> cond_a_;
    std::vector<Simplex> cond_b_;
};

/// Joint distribution of (X_A, X_B).
class JointAB {
public:
    explicit JointAB(Eigen::MatrixXd table);

    const Eigen::MatrixXd& table() const { return table_; }
    std::size_t rows() const { return static_cast<std::size_t>(table_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(table_.cols()); }
    double operator()(std::size_t a, std::size_t b) const {
        return table_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }

    Eigen::VectorXd marginal_a() const { return table_.rowwise().sum(); }
    Eigen::VectorXd marginal_b() const { return table_.colwise().sum().transpose(); }
    /// Product of the marginals, the V measure.
    Eigen::MatrixXd product_of_marginals() const;
    JointAB transposed() const { return JointAB(table_.transpose()); }

private:
    Eigen::MatrixXd table_;
};

struct TaskSample {
    std::int64_t task_id = 0;
    std::optional<std::size_t> x_a;
    std::optional<std::size_t> x_b;

    friend bool operator==(const TaskSample&, const TaskSample&) = default;
};

using SampleSet = std::vector<TaskSample>;

/// Throws unless every task carries a signal and ids are unique.
void validate_samples(const SampleSet& samples);

JointAB induce_joint(const TripletPrior& prior);

/// Pointwise mutual information Pr[a,b] / (Pr[a] Pr[b]).
double pmi(const JointAB& joint, std::size_t a, std::size_t b);

/// Matrix of pmi over all cells; cells whose marginals vanish are set to 0.
Eigen::MatrixXd pmi_table(const JointAB& joint);

Simplex posterior(const TripletPrior& prior, View view, std::size_t x);

/// Posterior forecasts for every signal of one view.
std::vector<Simplex> posterior_rows(const TripletPrior& prior, View view);

/// Pr[Y | X_A=a, X_B=b] computed directly from the triple joint.
Simplex joint_posterior(const TripletPrior& prior, std::size_t a, std::size_t b);

/// Combines two conditionally independent forecasts with the label prior.
Simplex aggregate_forecast(const Simplex& p_a, const Simplex& p_b, const Simplex& prior_y);

/// Max over (a,b) of |pmi(a,b) - sum_y Pr[y|a] Pr[y|b] / Pr[y]|.
double verify_ci_identity(const TripletPrior& prior);

/// Evaluates the same residual for an arbitrary 3-way joint indexed
/// [a][b][y]; nonzero whenever X_A and X_B are not independent given Y.
double ci_identity_residual(const std::vector<std::vector<std::vector<double>>>& joint3);

/// Draws n_total i.i.d. tasks. The first `overlap` carry both signals; the
/// rest alternate A-only, B-only.
SampleSet sample_tasks(const TripletPrior& prior, std::size_t n_total, std::size_t overlap, std::uint64_t seed);

}  // namespace fmig
