#include "fmig/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fmig {
namespace {

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

ConvexSpec make_tvd() {
    ConvexSpec s;
    s.name = "tvd";
    s.f = [](double t) { return std::abs(t - 1.0); };
    // sign(log t), with the subgradient 0 picked at t = 1
    s.g = [](double t) { return sign_of(t - 1.0); };
    s.conj_of_g = [](double t) { return sign_of(t - 1.0); };
    s.fstar = [](double u) { return u; };
    s.in_fstar_domain = [](double u) { return u >= -1.0 && u <= 1.0; };
    s.g_prime = [](double) { return 0.0; };
    s.conj_of_g_prime = [](double) { return 0.0; };
    s.differentiable = false;
    s.derivative_invertible = false;
    return s;
}

ConvexSpec make_kl() {
    ConvexSpec s;
    s.name = "kl";
    s.f = [](double t) { return t > 0.0 ? t * std::log(t) : 0.0; };
    s.g = [](double t) { return 1.0 + std::log(t); };
    s.conj_of_g = [](double t) { return t; };
    s.fstar = [](double u) { return std::exp(u - 1.0); };
    s.in_fstar_domain = [](double u) { return std::isfinite(u); };
    s.g_prime = [](double t) { return 1.0 / t; };
    s.conj_of_g_prime = [](double) { return 1.0; };
    return s;
}

ConvexSpec make_reverse_kl() {
    ConvexSpec s;
    s.name = "reverse_kl";
    s.f = [](double t) { return -std::log(t); };
    s.g = [](double t) { return -1.0 / t; };
    s.conj_of_g = [](double t) { return -1.0 + std::log(t); };
    s.fstar = [](double u) { return -1.0 - std::log(-u); };
    s.in_fstar_domain = [](double u) { return u < 0.0; };
    s.g_prime = [](double t) { return 1.0 / (t * t); };
    s.conj_of_g_prime = [](double t) { return 1.0 / t; };
    return s;
}

ConvexSpec make_pearson() {
    ConvexSpec s;
    s.name = "pearson";
    s.f = [](double t) { return (t - 1.0) * (t - 1.0); };
    s.g = [](double t) { return 2.0 * (t - 1.0); };
    s.conj_of_g = [](double t) { return t * t - 1.0; };
    s.fstar = [](double u) { return u + 0.25 * u * u; };
    s.in_fstar_domain = [](double u) { return std::isfinite(u); };
    s.g_prime = [](double) { return 2.0; };
    s.conj_of_g_prime = [](double t) { return 2.0 * t; };
    return s;
}

ConvexSpec make_squared_hellinger() {
    ConvexSpec s;
    s.name = "squared_hellinger";
    s.f = [](double t) {
        const double r = std::sqrt(t) - 1.0;
        return r * r;
    };
    s.g = [](double t) { return 1.0 - std::sqrt(1.0 / t); };
    s.conj_of_g = [](double t) { return std::sqrt(t) - 1.0; };
    s.fstar = [](double u) { return u / (1.0 - u); };
    s.in_fstar_domain = [](double u) { return u < 1.0; };
    s.g_prime = [](double t) { return 0.5 / (t * std::sqrt(t)); };
    s.conj_of_g_prime = [](double t) { return 0.5 / std::sqrt(t); };
    return s;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"tvd", "kl", "reverse_kl", "pearson", "squared_hellinger"};
    return names;
}

ConvexSpec builtin(std::string_view name) {
    if (name == "tvd") return make_tvd();
    if (name == "kl") return make_kl();
    if (name == "reverse_kl") return make_reverse_kl();
    if (name == "pearson") return make_pearson();
    if (name == "squared_hellinger") return make_squared_hellinger();
    throw std::invalid_argument("unknown f-divergence '" + std::string(name) + "'");
}

double f_divergence(const Simplex& p, const Simplex& q, const ConvexSpec& spec) {
    if (p.size() != q.size()) throw std::invalid_argument("f_divergence: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double qi = std::max(q[i], kProbFloor);
        const double ratio = std::max(p[i] / qi, kProbFloor);
        acc += qi * spec.f(ratio);
    }
    return acc;
}

double f_mutual_information(const JointAB& joint, const ConvexSpec& spec) {
    const Eigen::MatrixXd v = joint.product_of_marginals();
    double acc = 0.0;
    for (Eigen::Index a = 0; a < v.rows(); ++a)
        for (Eigen::Index b = 0; b < v.cols(); ++b) {
            if (v(a, b) <= 0.0) continue;  // U vanishes there too
            const double k = std::max(joint.table()(a, b) / v(a, b), kProbFloor);
            acc += v(a, b) * spec.f(k);
        }
    return acc;
}

double dual_value(const JointAB& joint, const Eigen::MatrixXd& u, const ConvexSpec& spec) {
    if (u.rows() != joint.table().rows() || u.cols() != joint.table().cols())
        throw std::invalid_argument("dual_value: distinguisher shape mismatch");
    const Eigen::MatrixXd v = joint.product_of_marginals();
    double eu = 0.0;
    double ev = 0.0;
    for (Eigen::Index a = 0; a < u.rows(); ++a)
        for (Eigen::Index b = 0; b < u.cols(); ++b) {
            if (!spec.in_fstar_domain(u(a, b))) throw std::domain_error("conjugate undefined");
            eu += joint.table()(a, b) * u(a, b);
            ev += v(a, b) * spec.fstar(u(a, b));
        }
    return eu - ev;
}

Eigen::MatrixXd best_distinguisher(const JointAB& joint, const ConvexSpec& spec) {
    const Eigen::MatrixXd k = pmi_table(joint);
    return k.unaryExpr([&](double x) { return spec.g(std::max(x, kProbFloor)); });
}

}  // namespace fmig
