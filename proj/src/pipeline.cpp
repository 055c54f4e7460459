#include "pcw/pipeline.hpp"

#include <cmath>
#include <limits>

#include "pcw/errors.hpp"

namespace pcw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_unit_interval(double v, const char *name) {
    if (!(v >= 0.0 && v <= 1.0))
        throw InvalidSpec(std::string("pipeline: ") + name + " must be in [0,1]");
}

} // namespace

double single_interface_from_two_port(double T_two_port) {
    check_unit_interval(T_two_port, "two-port transmission");
    return std::sqrt(T_two_port);
}

double eta_from_db(double db) { return std::pow(10.0, db / 10.0); }

double required_beta2(double eta, double beta1, double epsilon_target) {
    if (!(eta > 0.0) || !(beta1 > 0.0) || !(epsilon_target > 0.0))
        throw InvalidSpec("required_beta2 needs positive eta, beta1 and target epsilon");
    return eta / (epsilon_target * beta1);
}

SourceBudget compute_budget(SourceBudget b) {
    check_unit_interval(b.T_1in, "T_1in");
    check_unit_interval(b.T_2in, "T_2in");
    check_unit_interval(b.T_1out, "T_1out");
    check_unit_interval(b.T_2out, "T_2out");
    check_unit_interval(b.beta1, "beta1");
    check_unit_interval(b.beta2, "beta2");
    if (!(b.I_l1 >= 0.0) || !(b.I_l2 >= 0.0) || std::abs(b.I_l1 + b.I_l2 - 1.0) > 1e-9)
        throw InvalidSpec("pipeline: pump fractions must be non-negative and sum to 1");

    const double pump_den = b.I_l2 * b.T_2in;
    b.eta = pump_den > 0.0 ? b.I_l1 * b.T_1in / pump_den : kInf;
    b.I_res = b.I_l1 * b.T_1in * b.T_1out;
    b.I_ph = b.I_l2 * b.T_2in * b.beta2 * b.beta1 * b.T_1out;

    const double beta_den = b.beta1 * b.beta2;
    b.epsilon = (std::isfinite(b.eta) && beta_den > 0.0) ? b.eta / beta_den : kInf;
    b.g2 = std::isfinite(b.epsilon) ? 2.0 * b.epsilon - b.epsilon * b.epsilon : kInf;
    b.T_col_estimate = b.beta1 * b.T_1out;
    b.T_exc_estimate = b.I_l2 * b.T_2in * b.beta2;
    return b;
}

} // namespace pcw
