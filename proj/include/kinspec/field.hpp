#pragma once

#include "kinspec/collision.hpp"
#include "kinspec/lattice.hpp"

namespace kinspec {

using MatCRow = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Fourier coefficients of (rho, u, theta) on a lattice.
struct MacroField {
    const Lattice* lat = nullptr;
    double t = 0.0;
    VecC rho, theta;  // per mode
    MatC u;           // modes x d
};
MacroField zero_macro(const Lattice& lat);

// Velocity coefficients per lattice mode: data(mode, alpha).
struct KineticField {
    const Lattice* lat = nullptr;
    const HermiteBasis* basis = nullptr;
    double eps = 0.0;
    double t = 0.0;
    MatCRow data;
};
KineticField zero_kinetic(const Lattice& lat, const HermiteBasis& basis);

// sum_k <k>^{2s} ||f_k||^2, square-rooted; the weighted variant uses
// ||f_k||^2 = f_k^H W f_k.
double hs_norm(const KineticField& f, double s);
double hs_norm_weighted(const KineticField& f, const MatR& W, double s);
double hs_norm(const MacroField& m, double s);  // velocity only

KineticField lift_to_kinetic(const HermiteBasis& basis, const MacroField& m);
// Boussinesq/Leray projection of the macroscopic content of f.
MacroField well_prepared_init(const HermiteBasis& basis, const KineticField& f);
MacroField moments_of(const HermiteBasis& basis, const KineticField& f);

// Pseudo-spectral evaluation of sum_ab l_a(f) l_b(f) T_ab over the lattice
// (products on the grid, dealiased), times `scale`.
class NonlinearEvaluator {
public:
    NonlinearEvaluator(const Lattice& lat, const HermiteBasis& basis, const BilinearCollisionOperator& Q);
    MatCRow operator()(const MatCRow& f, double scale) const;

private:
    const Lattice& lat_;
    const BilinearCollisionOperator& Q_;
    int nvel_, r_, npairs_;
    FFT to_grid_, to_modes_;
    MatR pair_tensor_;  // nvel x npairs, symmetric pairs with a != b doubled
};

void dealias(const Lattice& lat, MatCRow& f);
void dealias(const Lattice& lat, VecC& f);
void dealias(const Lattice& lat, MatC& f);

}  // namespace kinspec
