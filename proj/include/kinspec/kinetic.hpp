#pragma once

#include <iosfwd>
#include <string>

#include "kinspec/nsf.hpp"
#include "kinspec/semigroup.hpp"

namespace kinspec {

enum class ETDScheme { RK2, Euler };

struct SolverConfig {
    double eps = 0.1;
    double dt = 1e-2;
    ETDScheme scheme = ETDScheme::RK2;
    bool dealias = true;
    bool nonlinear = true;  // false: Q switched off
    double s = 2.0;
    double c0 = 1e3;        // blowup when ||f||_{H^s(H)} > c0 / eps
    int record_every = 1;
};

struct KineticTrajectory {
    std::vector<KineticField> states;  // every record_every steps, first and last included
    std::vector<double> times;         // every step
    std::vector<double> norm;          // ||f||_{H^s_x(H_v)} per step
    double conservation_drift = 0.0;   // max_t |P f_0(t) - P f_0(0)| on the k = 0 mode
};

// Exponential integrator for d_t f = eps^{-2}(L - eps v.grad) f + eps^{-1} Q(f, f).
KineticTrajectory kinetic_integrate(const KineticField& f_ini, const LinearCollisionOperator& L,
                                    const BilinearCollisionOperator& Q, const SolverConfig& cfg, double T_end);

// phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - 1 - z)/z^2, with series near 0.
cplx phi1(cplx z);
cplx phi2(cplx z);

struct DecompositionRow {
    double t = 0.0;
    double norm_total = 0.0, norm_ns_gap = 0.0, norm_disp = 0.0, norm_kin = 0.0, norm_err = 0.0;
    double ssp_ns_gap = 0.0, ssp_disp = 0.0, ssp_kin = 0.0, ssp_err = 0.0;  // H^s_x(Ssp_v)
};
struct Decomposition {
    double eps = 0.0;
    std::vector<DecompositionRow> rows;
    int kinetic_only_modes = 0;  // data modes past the cutoff, carried whole by f_kin
    double sup_err() const;
    double sup_disp() const;
};
struct DecomposeOptions {
    double alpha0 = 0.5;  // eps|k| above this: no hydrodynamic split
    double window = 0.5;
    double s = 2.0;
};
// f_disp and f_kin from closed-form propagation of f_ini, f_ns from the
// lifted NSF states at matching times, f_err the remainder.
Decomposition decompose_solution(const KineticTrajectory& traj, const KineticField& f_ini, const LinearCollisionOperator& L,
                                 const TransportCoefficients& tc, const NSFTrajectory& nsf,
                                 const DecomposeOptions& opt = {});

void write_decomposition_csv(std::ostream& os, const Decomposition& dec, bool header = true);

// Little-endian snapshot: int32 d, int32 N, int32 n (per axis, d entries),
// float64 eps, float64 t, then modes x basis-size pairs of float32 (re, im),
// row-major in (mode, velocity index).
void write_snapshot(const std::string& path, const KineticField& f, int order);
KineticField read_snapshot(const std::string& path, const Lattice& lat, const HermiteBasis& basis);

}  // namespace kinspec
