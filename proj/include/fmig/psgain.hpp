#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fmig/cotrain.hpp"
#include "fmig/distributions.hpp"
#include "fmig/mig.hpp"

namespace fmig {

/// Rows indexed by x_B, columns by y; entry (x_B, y) plays Pr[X_B=x_B | Y=y].
/// Entries must lie in [0, 1]; the column-sum constraint is checked by
/// check_constraint rather than enforced here, so degenerate tables can be
/// represented.
class LikelihoodTable {
public:
    LikelihoodTable() = default;
    explicit LikelihoodTable(std::vector<std::vector<double>> rows);

    /// Uses Pr[X_B | Y] of the prior.
    static LikelihoodTable from_prior(const TripletPrior& prior);

    std::size_t signals() const { return rows_.size(); }
    std::size_t labels() const { return rows_.empty() ? 0 : rows_.front().size(); }
    const std::vector<double>& operator[](std::size_t x_b) const { return rows_[x_b]; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }

    LikelihoodTable scaled(double c) const;
    /// Column y of the result is column perm[y] of this table.
    LikelihoodTable relabeled(std::span<const std::size_t> perm) const;
    /// Column y as a vector over x_B.
    std::vector<double> column(std::size_t y) const;

private:
    std::vector<std::vector<double>> rows_;
};

/// max_y |sum_{x_B} v(x_B, y) - 1|.
double check_constraint(const LikelihoodTable& v_b);

/// A scoring rule for a forecast over Sigma_B. Forecast vectors are passed
/// as raw spans so that unnormalized vectors can still be scored.
struct ScoringRule {
    std::string name;
    std::function<double(std::size_t, std::span<const double>)> score;
    /// d score(signal, q) / d q, written into `out` (same length as q).
    std::function<void(std::size_t, std::span<const double>, std::span<double>)> gradient;
};

/// "log" or "brier" (negated squared error, so larger is better).
ScoringRule scoring_rule(std::string_view name);

/// Upper bound on |Sigma_B| for the full-forecast scoring path.
inline constexpr std::size_t kMaxForecastSignals = 4096;

/// The dot product v_b(x_B) . h_a(x_A): the induced forecast that X_B = x_B.
double induced_likelihood(const Hypothesis& h_a, const LikelihoodTable& v_b, std::size_t x_a, std::size_t x_b);

/// Full induced forecast over Sigma_B for one x_A.
std::vector<double> induced_forecast(const Hypothesis& h_a, const LikelihoodTable& v_b, std::size_t x_a);

/// Sum over tasks of log(v_b(x_B) . h_a(x_A)). Throws
/// std::domain_error("impossible observation under model") on a zero product.
double lsr_gain(const Hypothesis& h_a, const LikelihoodTable& v_b, const SampleSet& samples);

/// Sum over tasks of ps.score(x_B, induced forecast). Requires the column
/// constraint to hold within 1e-6.
double ps_gain(const Hypothesis& h_a, const LikelihoodTable& v_b, const SampleSet& samples, const ScoringRule& ps);

/// Per-task expectations under the prior.
double expected_lsr_gain(const Hypothesis& h_a, const LikelihoodTable& v_b, const TripletPrior& prior);
double expected_ps_gain(const Hypothesis& h_a, const LikelihoodTable& v_b, const TripletPrior& prior,
                        const ScoringRule& ps);

/// sum_{x_A, x_B} Pr[x_A, x_B] log Pr[x_B | x_A], the value at the truth point.
double lsr_truth_value(const TripletPrior& prior);

struct PsGainResult {
    Hypothesis h_a_star;
    LikelihoodTable v_b_star;
    double objective = 0.0;
    std::size_t best_restart = 0;
    std::vector<std::size_t> permutation;
    double aligned_tv_distance = 0.0;
    std::vector<RestartOutcome> restarts;
};

struct PsWarmStart {
    Hypothesis h_a;
    LikelihoodTable v_b;
};

/// Multi-start gradient ascent of the expected gain under `prior`. With
/// `constrained`, columns of v_b are softmax-parameterized over x_B and so
/// satisfy the column constraint exactly; otherwise every entry is a free
/// sigmoid in (0, 1). The result is aligned to (posterior, Pr[X_B|Y]).
PsGainResult optimize_ps_gain(const TripletPrior& prior, const ScoringRule& ps, const OptimizerConfig& cfg,
                              bool constrained = true, const std::optional<PsWarmStart>& warm = std::nullopt);

/// Same on a sample set; every task must carry both signals. The objective
/// reported is ps_gain on the samples.
PsGainResult optimize_ps_gain(const SampleSet& samples, std::size_t sigma_a, std::size_t sigma_b, std::size_t sigma_y,
                              const ScoringRule& ps, const OptimizerConfig& cfg, bool constrained = true,
                              const std::optional<PsWarmStart>& reference = std::nullopt);

/// Joint label alignment of (h_a, v_b) against a reference pair.
LabelAlignment align_ps(const Hypothesis& h_a, const LikelihoodTable& v_b, const Hypothesis& ref_h,
                        const LikelihoodTable& ref_v);

}  // namespace fmig
