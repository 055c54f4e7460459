#pragma once

namespace pcw {

// Scalar efficiency/impurity ledger of the cascaded source, in the
// weak-excitation limit. Inputs are the pump split, the measured section
// transmissions and the emitter couplings; derived fields are filled by
// compute_budget.
struct SourceBudget {
    // inputs
    double I_l1 = 0.5; // pump power fraction in the even input mode
    double I_l2 = 0.5; // pump power fraction in the odd input mode
    double T_1in = 0.0;
    double T_2in = 0.0;
    double T_1out = 0.0;
    double T_2out = 0.0; // reported only; odd-mode output is fully rejected downstream
    double beta1 = 0.0;
    double beta2 = 0.0;

    // derived
    double eta = 0.0;     // I_l1 T_1in / (I_l2 T_2in)
    double I_res = 0.0;   // I_l1 T_1in T_1out
    double I_ph = 0.0;    // I_l2 T_2in beta2 beta1 T_1out
    double epsilon = 0.0; // eta / (beta1 beta2); +inf when a factor vanishes
    double g2 = 0.0;      // 2 epsilon - epsilon^2
    double T_col_estimate = 0.0; // beta1 T_1out
    double T_exc_estimate = 0.0; // I_l2 T_2in beta2
};

// Two-port transmission -> single-interface estimate, sqrt(T).
double single_interface_from_two_port(double T_two_port);

// Extinction in dB (power ratio) to linear, e.g. -50 dB -> 1e-5.
double eta_from_db(double db);

// beta2 needed to reach a target impurity at given eta and beta1.
double required_beta2(double eta, double beta1, double epsilon_target);

// Fill the derived fields. epsilon is computed in the algebraically
// cancelled form eta/(beta1 beta2), so it is exactly independent of
// T_1out; I_res/I_ph agrees up to rounding. Vanishing denominators
// surface as +inf sentinels.
SourceBudget compute_budget(SourceBudget budget);

} // namespace pcw
