#pragma once

#include <json.hpp>

#include "kinspec/collision.hpp"

namespace kinspec {

struct OrthogonalSolve {
    VecC h;
    double residual = 0.0;   // ||L h - g|| / ||g||
    double kernel_part = 0.0;  // ||P h|| / ||h||
    bool projected_rhs = false;  // warning: g had a kernel component
};

// R0 = L^{-1}(I - P) as a matrix (pseudo-inverse on ker(L)^perp).
MatR reduced_resolvent(const HermiteBasis& basis, const MatR& L);

OrthogonalSolve invert_L_orthogonal(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecC& g);

// Zeroth-order eigenfunctions in the paper's labelling: psi_plus is
// (1 + sqrt(dK/E) w.v + (|v|^2-E)/E) mu / sqrt(2K).
struct HydroEigenfunctions {
    VecR psi_bou, psi_plus, psi_minus;
};
HydroEigenfunctions hydro_eigenfunctions(const HermiteBasis& basis, const VecR& omega);

struct TransportCoefficients {
    double E = 0, K = 0, c = 0;
    // canonical closed forms
    double kappa_inc = 0, kappa_bou = 0, kappa_wave = 0;
    double kappa_inc_spread = 0;  // isotropy: spread over orthonormal pairs
    // alternates, reported side by side
    double kappa_inc_hs_paper = 0;  // HS sum / ((d-1)(d+1))
    double kappa_inc_hs_alt = 0;    // HS sum / ((d-1)(d+2))
    double kappa_wave_combo_paper = 0;  // (d-1)/(2d) k_Inc + E^2 (K-1)/2 k_Bou
    double kappa_wave_combo_alt = 0;    // (d-1)/d k_Inc + (K-1)/2 k_Bou
    // branch-fit slots
    bool has_fit = false;
    double c_fit = 0, kappa_inc_fit = 0, kappa_bou_fit = 0, kappa_wave_fit = 0;
    // nonlinear coefficients
    bool has_thetas = false;
    double theta1 = 0, theta2 = 0, theta3 = 0;
    double theta1_alt = 0;  // 2 <Q(v1 mu, v2 mu), L^{-1} A_12>
    double theta2_alt = 0, theta3_alt = 0;  // from <Q(v_1 mu, .), L^{-1} B_1>
    double theta_inc = 0, theta_bou = 0;
    double theta_inc_paper = 0, theta_bou_paper = 0;
    double structural_A = 0;      // max deviation of the A-tensor identity
    double structural_zero = 0;   // max of the vanishing pairings
    double structural_B = 0;      // max deviation of the B identities

    void attach_fit(double c_fit, double k_inc, double k_bou, double k_wave);
    bool fit_consistent(double* worst = nullptr) const;
    nlohmann::json to_json() const;
};

TransportCoefficients compute_kappas(const HermiteBasis& basis, const LinearCollisionOperator& L);
void compute_thetas(const HermiteBasis& basis, const LinearCollisionOperator& L,
                    const BilinearCollisionOperator& Q, TransportCoefficients& tc);

}  // namespace kinspec
