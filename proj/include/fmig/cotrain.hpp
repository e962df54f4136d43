#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fmig/distributions.hpp"
#include "fmig/divergence.hpp"
#include "fmig/mig.hpp"

namespace fmig {

struct OptimizerConfig {
    std::size_t restarts = 20;
    std::size_t max_iters = 20000;
    double step_size = 1.0;
    double tolerance = 1e-12;
    std::uint64_t seed = 0;
    bool optimize_p = true;
    /// Worker threads for independent restarts; 0 picks the hardware count.
    std::size_t threads = 1;
    /// Keep the per-iteration objective trace of every restart.
    bool record_curve = false;

    /// Throws std::invalid_argument on zero counts or non-positive step/tolerance.
    void validate() const;
};

struct LabelAlignment {
    std::vector<std::size_t> permutation;
    double max_row_tv = 0.0;
};

struct RestartOutcome {
    std::size_t index = 0;
    bool aborted = false;
    std::string abort_reason;
    double objective = 0.0;
    std::size_t iterations = 0;
    std::vector<double> curve;
};

struct CotrainResult {
    Hypothesis h_a_star;
    Hypothesis h_b_star;
    Simplex p_star;
    double objective = 0.0;
    std::size_t best_restart = 0;
    /// Filled when a reference predictor pair is known.
    std::vector<std::size_t> permutation;
    double aligned_tv_distance = 0.0;
    std::vector<RestartOutcome> restarts;
};

/// Label permutation minimizing the max row-wise TV gap between the relabeled
/// hypothesis and the reference; exhaustive, |Y| <= 8.
LabelAlignment align_permutation(const Hypothesis& h, const Hypothesis& reference);

/// Joint alignment of both views (and optionally the label prior).
LabelAlignment align_permutation(const Hypothesis& h_a, const Hypothesis& h_b, const Hypothesis& ref_a,
                                 const Hypothesis& ref_b);

/// Optional starting point shared by every restart (restart 0 only when
/// `first_restart_only` is set).
struct WarmStart {
    Hypothesis h_a;
    Hypothesis h_b;
    Simplex p;
    bool first_restart_only = true;
};

/// Maximizes the expected gain over tabular hypotheses by multi-start
/// gradient ascent on softmax scores. With optimize_p off, p is held at
/// `fixed_p` (the label prior when absent). The result is aligned to the
/// true posterior predictors.
CotrainResult optimize_mig(const TripletPrior& prior, const ConvexSpec& spec, const OptimizerConfig& cfg,
                           const std::optional<WarmStart>& warm = std::nullopt,
                           const std::optional<Simplex>& fixed_p = std::nullopt);

/// Maximizes the empirical gain of a sample set. When `reference` is given
/// the result is aligned to it.
CotrainResult optimize_mig_empirical(const SampleSet& samples, std::size_t sigma_a, std::size_t sigma_b,
                                     std::size_t sigma_y, const ConvexSpec& spec, const OptimizerConfig& cfg,
                                     const std::optional<std::pair<Hypothesis, Hypothesis>>& reference = std::nullopt,
                                     const std::optional<Simplex>& fixed_p = std::nullopt);

/// Same ascent against arbitrary cell weights; used by both entry points.
CotrainResult optimize_mig_weighted(const PairWeights& weights, std::size_t sigma_y, const ConvexSpec& spec,
                                    const OptimizerConfig& cfg, const std::optional<WarmStart>& warm,
                                    const std::optional<Simplex>& fixed_p);

}  // namespace fmig
