#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmig/distributions.hpp"
#include "fmig/mig.hpp"

namespace fmig {

/// A candidate (a^{x_A}, b^{x_B}, r) for the system sum_y a_y b_y / r_y = K.
struct SolutionCandidate {
    Hypothesis a_table;
    Hypothesis b_table;
    Simplex r;

    /// Posteriors of both views and the label prior.
    static SolutionCandidate desired(const TripletPrior& prior);
    SolutionCandidate relabeled(std::span<const std::size_t> perm) const;
};

/// Entry (x_A, x_B) = sum_y a_y b_y / r_y - K(x_A, x_B).
Eigen::MatrixXd soe_residuals(const SolutionCandidate& cand, const JointAB& joint);

struct StabilityReport {
    bool stable = false;
    std::size_t rank_a = 0;
    std::size_t rank_b = 0;
};

/// Numerical rank with singular values below rel_tol * largest treated as zero.
std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-9);

/// M_view[x, y] = Pr[y | x] / Pr[y].
Eigen::MatrixXd pmi_factor(const TripletPrior& prior, View view);

/// Stable iff both factor matrices have full column rank |Y|.
StabilityReport check_stable(const TripletPrior& prior);

enum class WellDefinedVerdict { CertifiedOnGrid, Counterexample, Inconclusive };

std::string to_string(WellDefinedVerdict v);

struct WellDefinedReport {
    WellDefinedVerdict verdict = WellDefinedVerdict::Inconclusive;
    double grid_resolution = 0.0;
    std::size_t candidates_examined = 0;
    std::size_t survivors = 0;
    std::size_t refined_solutions = 0;
    /// Largest aligned distance between an exact refined solution and the desired one.
    double max_aligned_distance = 0.0;
    /// Refined exact solutions that are not permutations of the desired one.
    std::vector<SolutionCandidate> witnesses;
    std::string note;
};

/// Grid search for solutions of the system. Candidate label priors and
/// |Y| pivot rows of a are enumerated on the simplex grid, the remaining
/// variables are fitted by least squares, near-solutions are refined by
/// alternating projected least squares, and the exact solutions found are
/// compared with the desired solution up to relabeling (threshold: two grid
/// steps of max-row TV). Exceeding `budget` candidates yields Inconclusive.
WellDefinedReport check_well_defined(const TripletPrior& prior, double grid_resolution, std::size_t budget = 5'000'000);

/// Symmetric Dirichlet prior and rows. With require_stable, redraws until
/// check_stable passes (bounded retries).
TripletPrior generate_prior(std::size_t sigma_a, std::size_t sigma_b, std::size_t sigma_y, std::uint64_t seed,
                            double concentration = 1.0, bool require_stable = false, std::size_t max_retries = 1000);

/// Makes signal x < |Y| of each view exclusive to label x (its posterior is a
/// point mass) and renormalizes the rows. Anchors of this kind are what pin
/// down a unique solution of the system; strictly positive priors generally
/// admit a continuum of them. A positive `anchor_mass` sets Pr[X = y | Y = y]
/// for each anchor and rescales the rest of the row.
TripletPrior anchor_signals(const TripletPrior& prior, double anchor_mass = 0.0);

/// All points of the simplex over n labels whose entries are multiples of
/// `resolution` (1/resolution must be an integer within 1e-9).
std::vector<Simplex> simplex_grid(std::size_t n, double resolution);

/// Number of points simplex_grid would return, saturating at SIZE_MAX.
std::size_t simplex_grid_size(std::size_t n, double resolution);

}  // namespace fmig
