#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fmig/distributions.hpp"

namespace fmig {

/// One f-divergence: the convex generator f, a chosen subgradient g, the
/// conjugate f*, and the composition f*(g(t)) in closed form.
///
/// `g_prime` and `conj_of_g_prime` are derivatives of g and f*(g(.)) with
/// respect to t; for differentiable f they equal f''(t) and t f''(t). They are
/// zero almost everywhere for the piecewise-constant tvd selection.
struct ConvexSpec {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> g;
    std::function<double(double)> conj_of_g;
    std::function<double(double)> fstar;
    std::function<bool(double)> in_fstar_domain;
    std::function<double(double)> g_prime;
    std::function<double(double)> conj_of_g_prime;
    bool differentiable = true;
    bool derivative_invertible = true;
};

/// Names accepted by builtin().
const std::vector<std::string>& builtin_names();

/// tvd, kl, reverse_kl, pearson, squared_hellinger.
ConvexSpec builtin(std::string_view name);

/// D_f(p, q) = sum_s q(s) f(p(s) / q(s)); q is floored at kProbFloor and so is
/// the ratio before f is applied.
double f_divergence(const Simplex& p, const Simplex& q, const ConvexSpec& spec);

/// D_f between the joint and the product of its marginals.
double f_mutual_information(const JointAB& joint, const ConvexSpec& spec);

/// E_U[u] - E_V[f*(u)]: the variational lower bound on f-mutual information.
/// Throws std::domain_error("conjugate undefined") when an entry of u falls
/// outside dom(f*).
double dual_value(const JointAB& joint, const Eigen::MatrixXd& u, const ConvexSpec& spec);

/// u*(a,b) = g(pmi(a,b)), the distinguisher that attains the bound.
Eigen::MatrixXd best_distinguisher(const JointAB& joint, const ConvexSpec& spec);

}  // namespace fmig
