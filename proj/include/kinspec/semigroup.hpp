#pragma once

#include <functional>
#include <iosfwd>

#include "kinspec/spectral.hpp"
#include "kinspec/transport.hpp"

namespace kinspec {

// Eigen-decomposition of L_{eps xi} used for t -> exp((t/eps^2) L_{eps xi}).
class ModePropagator {
public:
    ModePropagator(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi, double eps);

    const EigenDecomp& decomp() const { return ed_; }
    double eps() const { return eps_; }
    const VecR& xi() const { return xi_; }
    // eigenvalues of eps^{-2} L_{eps xi}
    VecC rates() const { return ed_.lambda / (eps_ * eps_); }

    VecC apply(double t, const VecC& f) const;
    MatC matrix(double t) const;
    // V diag(g(rate)) V^{-1} applied to f
    VecC apply_function(const std::function<cplx(cplx)>& g, const VecC& f) const;
    // Indices of eigenvalues of L_{eps xi} in the hydrodynamic window.
    std::vector<int> hydro_indices(double window) const;
    // exp(t A)(I - P) with P the total hydrodynamic projector (or 0 when
    // eps|xi| > alpha0).
    VecC apply_kinetic(double t, const VecC& f, double alpha0, double window = 0.5) const;

private:
    EigenDecomp ed_;
    VecR xi_;
    double eps_;
};

// Throws Defective when cond(V) > 1e8.
VecC propagate(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi, double eps, double t,
               const VecC& f);

struct SemigroupSplit {
    MatC full, ns, wave, kin;
    std::array<MatC, 4> branch;  // e^{(t/eps^2) L} P_b(eps xi)
    bool hydro_active = false;
    double sum_residual = 0.0;        // ||ns + wave + kin - full||
    double kin_residual = 0.0;        // kin vs full (I - P(eps xi)) from the contour projector
    double commutation = 0.0;         // max_b ||P_b U - U P_b||
};
SemigroupSplit split_semigroup(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi,
                               double eps, double t, double alpha0, double window = 0.5);

struct LimitSemigroups {
    MatC U_ns, V_ns, U_disp;
};
// Closed-form symbols; U_disp uses eps for the oscillation c|xi| t / eps.
LimitSemigroups limit_semigroups(const HermiteBasis& basis, const ProjectorExpansion& pe,
                                 const TransportCoefficients& tc, const VecR& xi, double t, double eps);

// Whole-space radial check of |e^{it|D|} g|_inf ~ t^{-(d-1)/2}.
struct DispersionReport {
    int d = 3;
    std::vector<double> t;
    std::vector<double> sup;
    double exponent = 0.0;
    double r2 = 0.0;
    double value_t0 = 0.0;   // |u(0+, 0)|
    double g0 = 0.0;         // g(0) from the same profile
    double min_points_per_period = 0.0;
};
// Radial Fourier profile: a smooth bump supported in [k_lo, k_hi].
struct RadialProfile {
    double k_lo = 1.0, k_hi = 9.0;
    double operator()(double k) const;
};
DispersionReport dispersive_decay_check(const RadialProfile& g, const std::vector<double>& t_grid, int d,
                                        double points_per_period = 12.0);

// Kinetic decay in the slow time t: envelope sup_k ||U_kin^eps(t; k)|| over
// the given wave vectors, fitted as C exp(-sigma0 t / eps^2).
struct KineticDecay {
    double eps = 0.0;
    double sigma0 = 0.0;
    double C = 0.0;
    std::vector<double> t;
    std::vector<double> envelope;
};
KineticDecay measure_kinetic_decay(const HermiteBasis& basis, const LinearCollisionOperator& L,
                                   const std::vector<VecR>& ks, double eps, const std::vector<double>& tau_grid,
                                   double alpha0, double window = 0.5);

void write_semigroup_csv_header(std::ostream& os);
void write_semigroup_csv_row(std::ostream& os, double t, double xi, double eps, double norm_kin, double norm_hyd_err,
                             double envelope);

}  // namespace kinspec
