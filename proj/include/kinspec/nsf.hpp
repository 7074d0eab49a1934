#pragma once

#include "kinspec/field.hpp"
#include "kinspec/transport.hpp"

namespace kinspec {

void leray_project(const Lattice& lat, MatC& u);

enum class NSFScheme { IFRK2, RK4 };

struct NSFConfig {
    double kappa_inc = 1.0, kappa_bou = 1.0;
    double theta_inc = 1.0, theta_bou = 1.0;
    double dt = 1e-3;
    NSFScheme scheme = NSFScheme::IFRK2;
    bool dealias = true;
    double s = 2.0;
    double blowup = 1e6;
    int record_every = 1;
};
NSFConfig nsf_config_from(const TransportCoefficients& tc, double dt, NSFScheme scheme = NSFScheme::IFRK2);

struct NSFTrajectory {
    std::vector<MacroField> states;  // every record_every steps, including t = 0 and T_end
    std::vector<double> times;       // every step
    std::vector<double> energy;      // sum_k |u_k|^2 per step
    std::vector<double> dissipation; // sum_k |k|^2 |u_k|^2 per step
    double energy_balance = 0.0;     // |E(T) + 2 kappa int D - E(0)|
    double max_divergence = 0.0;     // max_k |k.u_k| / (|k| max_j |u_j|)
    double max_boussinesq = 0.0;     // max_k |rho_k + theta_k|
    double mean_drift = 0.0;         // change of the k = 0 mode
};

// Throws Blowup when ||u||_{H^s} exceeds cfg.blowup. The initial state must
// be divergence-free and Boussinesq.
NSFTrajectory nsf_integrate(const MacroField& init, const NSFConfig& cfg, double T_end);

// Residual of f(t) = U_ns(t) f(0) + int_0^t div V_ns(t - tau) Q(f, f) dtau for
// the lifted trajectory; states must be equally spaced in time.
std::vector<double> duhamel_residual(const HermiteBasis& basis, const LinearCollisionOperator& L,
                                     const BilinearCollisionOperator& Q, const TransportCoefficients& tc,
                                     const std::vector<MacroField>& states, double s);

}  // namespace kinspec
