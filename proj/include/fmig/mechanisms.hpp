#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fmig/distributions.hpp"
#include "fmig/divergence.hpp"
#include "fmig/mig.hpp"

namespace fmig {

struct MixedReport {
    double weight = 1.0;
    Simplex report;
};

/// Maps each private signal to a finite mixture over reported forecasts.
/// Depends on the signal only, never on the task index.
class Strategy {
public:
    Strategy() = default;
    explicit Strategy(std::vector<std::vector<MixedReport>> report_map);

    static Strategy pure(const std::vector<Simplex>& reports);
    static Strategy truthful(const TripletPrior& prior, View view);
    static Strategy constant(std::size_t n_signals, const Simplex& report);
    /// Truthful strategy composed with a label relabeling.
    static Strategy permuted(const TripletPrior& prior, View view, std::span<const std::size_t> perm);

    std::size_t signals() const { return map_.size(); }
    const std::vector<MixedReport>& operator[](std::size_t x) const { return map_[x]; }
    bool is_pure() const;

private:
    std::vector<std::vector<MixedReport>> map_;
};

enum class ProfileClass { Truthful, Permutation, Other };

std::string to_string(ProfileClass c);

struct StrategyProfileClass {
    ProfileClass classification = ProfileClass::Other;
    std::vector<std::size_t> permutation;
};

/// Classifies a pure profile against the posteriors; signals of zero
/// probability are ignored. Reports match when every entry agrees within `tol`.
StrategyProfileClass classify_profile(const Strategy& s_a, const Strategy& s_b, const TripletPrior& prior,
                                      double tol = 1e-9);

/// log sum_y r_a(y) r_b(y) / Pr[y], in nats. Throws std::domain_error when
/// the inner sum is zero.
double single_task_payment(const Simplex& report_a, const Simplex& report_b, const Simplex& prior_y);

/// Realized multi-task payment paid to both agents: the empirical gain of the
/// reports with p fixed to the label prior. Task sets are the key sets of the
/// two report maps. Requires a differentiable f.
double mcg_payment(const std::map<std::int64_t, Simplex>& reports_a, const std::map<std::int64_t, Simplex>& reports_b,
                   const ConvexSpec& spec, const Simplex& prior_y);

struct Mechanism {
    enum class Kind { Single, Mcg };
    Kind kind = Kind::Single;
    std::optional<ConvexSpec> spec;
    /// Tasks per agent, full overlap. The expected payment does not depend on
    /// it once at least two tasks exist.
    std::size_t tasks = 2;

    static Mechanism single() { return Mechanism{}; }
    static Mechanism mcg(ConvexSpec spec, std::size_t tasks = 2);
    std::string name() const;
};

/// Exact expectation over signals, mixture draws and (multi-task) the
/// same-task versus distinct-task pair structure.
double expected_payment(const Strategy& s_a, const Strategy& s_b, const TripletPrior& prior, const Mechanism& mech);

struct TruthfulnessReport {
    bool is_equilibrium = false;
    bool is_strict = false;
    double truthful_payoff = 0.0;
    /// Largest gain of a unilateral grid deviation over truth telling (<= 0 at equilibrium).
    double worst_deviation = 0.0;
    /// Smallest loss of a non-truthful unilateral deviation; 0 when some deviation ties.
    double margin = 0.0;
    double grid_resolution = 0.0;
    std::size_t grid_points = 0;
};

/// Holds one agent truthful and sweeps the other's unilateral deviations,
/// signal by signal, over the report grid (both directions).
TruthfulnessReport verify_truthful(const TripletPrior& prior, const Mechanism& mech, double grid_resolution,
                                   double tol = 1e-12);

struct ProfileRow {
    std::string label;
    ProfileClass classification = ProfileClass::Other;
    std::vector<std::size_t> permutation;
    double payoff = 0.0;
    double gap_to_truthful = 0.0;
};

struct FocalReport {
    bool truthful_is_max = false;
    bool nonpermutation_strictly_below = false;
    double truthful_payoff = 0.0;
    double mutual_information = 0.0;
    double best_grid_payoff = 0.0;
    double best_nonpermutation_payoff = 0.0;
    double margin = 0.0;
    /// One entry per label permutation other than the identity.
    std::vector<ProfileRow> permutation_ties;
    std::vector<ProfileRow> rows;
    long double profiles_covered = 0;
    double grid_resolution = 0.0;
    std::string note;
};

/// Covers every pure profile in which both agents pick a grid report for each
/// signal, under MCG(spec). Throws std::runtime_error("enumeration budget
/// exceeded") when the profile count exceeds `budget`.
FocalReport verify_focal(const TripletPrior& prior, const ConvexSpec& spec, double grid_resolution, double tol = 1e-10,
                         long double budget = 1e11L);

}  // namespace fmig
