#pragma once

#include <array>
#include <iosfwd>
#include <optional>

#include "kinspec/collision.hpp"
#include "kinspec/transport.hpp"

namespace kinspec {

struct ModeOperator {
    MatC M;   // L - i v.xi
    VecR xi;
    const LinearCollisionOperator* L = nullptr;
    bool truncated = false;  // v-multiplication leaves the basis for top-degree modes
};
ModeOperator assemble_mode(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi);

struct EigenDecomp {
    VecC lambda;
    MatC V, Vinv;
    double cond = 1.0;
    double reconstruction = 0.0;  // ||V diag V^-1 - A|| / ||A||
};
EigenDecomp eigen_decompose(const MatC& A);

enum class Branch { Inc = 0, Bou = 1, PlusWave = 2, MinusWave = 3 };
constexpr std::array<Branch, 4> kBranches{Branch::Inc, Branch::Bou, Branch::PlusWave, Branch::MinusWave};
const char* branch_name(Branch b);

enum class ProjectorBackend { Contour, Dyad };

// Orthonormal bases of the two reflection sectors for direction omega: the
// transverse reflections v -> v - 2 (s.v) s (s orthogonal to omega) commute
// with L_xi. Inc lives in the odd part, Bou and both waves in the even part.
struct SectorSplit {
    MatR even, odd;
    MatR transverse;  // d x (d-1) orthonormal, orthogonal to omega
};
SectorSplit symmetry_sectors(const HermiteBasis& basis, const VecR& omega);

// Unit direction; an arbitrary fixed axis when xi == 0.
VecR direction_of(const VecR& xi, int d);

struct HydroPoint {
    double r = 0.0;
    int dir = 0;
    VecR xi;
    std::vector<cplx> inc;  // d-1 values
    cplx bou{0.0}, plus{0.0}, minus{0.0};
    double gap = 0.0;         // -max Re of the non-hydrodynamic spectrum
    double separation = 0.0;  // min distance hydro cluster <-> rest
    double max_re = 0.0;      // max Re over the whole spectrum
    int count = 0;            // eigenvalues with Re > -window
    std::string error;        // empty when the point classified cleanly
    cplx lambda(Branch b) const;
};

struct BranchFit {
    cplx a1{0.0}, a2{0.0};
    double remainder_slope = 0.0;
    std::vector<double> remainder;  // |lambda - a1 r - a2 r^2| per radius
};

struct HydroSpectrum {
    std::vector<double> radii;
    std::vector<VecR> directions;
    std::vector<HydroPoint> points;  // sorted by radius then direction
    double window = 0.5;
    double gap_certificate = 0.0;    // min over points of `gap`
    // filled by fit_expansions
    bool fitted = false;
    std::array<BranchFit, 4> fits;
    double c_fit = 0, kappa_inc_fit = 0, kappa_bou_fit = 0, kappa_wave_fit = 0;
};

// Classified hydrodynamic eigenvalues at one xi. Throws BranchCount or
// Degenerate.
HydroPoint analyze_point(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi, double window);

// With `tolerate` the per-point errors are recorded instead of thrown.
HydroSpectrum hydro_branches(const HermiteBasis& basis, const LinearCollisionOperator& L,
                             const std::vector<double>& radii, const std::vector<VecR>& directions,
                             double window, bool tolerate = false);

// Largest radius r in the (sorted) grid such that every grid point up to r
// has exactly d+2 eigenvalues in the window.
double empirical_alpha0(const HermiteBasis& basis, const LinearCollisionOperator& L,
                        const std::vector<double>& radii, const VecR& direction, double window);

// Fits over the first direction's points with r > 0. Throws FitQuality when
// a remainder slope is below 2.5.
void fit_expansions(HydroSpectrum& spec);

// Zeroth- and first-order projector data along omega, P_b(r omega) ~ P0_b + i r G_b.
struct ProjectorExpansion {
    VecR omega;
    std::array<MatR, 4> P0;
    std::array<MatC, 4> G;
    MatR basis_cols;  // n x (d+2): transverse u_i.v mu, psi_Bou, psi_-W, psi_+W
};
ProjectorExpansion projector_expansion(const HermiteBasis& basis, const LinearCollisionOperator& L,
                                       const VecR& omega, const MatR& R0);

struct ProjectorSet {
    std::array<MatC, 4> branch;
    MatC total;
    double backend_gap = 0.0;  // only set by compare_backends
    double newton_applied = 0;  // number of branches that needed the Newton step
};

// An empty target means the total projector.
MatC spectral_projector(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi,
                        std::optional<Branch> target, ProjectorBackend backend = ProjectorBackend::Contour,
                        double window = 0.5, int nodes = 256);
ProjectorSet spectral_projectors(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi,
                                 ProjectorBackend backend = ProjectorBackend::Contour, double window = 0.5,
                                 int nodes = 256);

struct ExpansionCheck {
    VecR omega;
    std::vector<double> radii;
    std::array<std::vector<double>, 4> remainder;  // ||S_b(r omega)||
    std::array<double, 4> order{};                 // fitted exponent p
    std::array<double, 4> zeroth_gap{};            // ||P_b - P0_b|| at smallest r
    double psi_bou_norm = 0.0;
    double inc_moment_residual = 0.0;   // u[P0_Inc f] vs Leray part of u[f]
    double bou_moment_residual = 0.0;   // theta[P0_Bou f] vs (theta - (K-1) rho)/K
    double bou_first_order_factor = 0.0;    // beta in P1_Bou f = beta <f, L^-1 B.omega> psi_Bou
    double bou_first_order_residual = 0.0;  // distance of (I-P)(v.omega)psi_Bou from span(B.omega)
};
ExpansionCheck projector_expansion_check(const HermiteBasis& basis, const LinearCollisionOperator& L,
                                         const VecR& omega, const std::vector<double>& radii,
                                         ProjectorBackend backend = ProjectorBackend::Contour);

struct KatoReport {
    MatC Lhat;
    double off_block = 0.0;       // relative to ||Lhat||
    double inc_identity_dev = 0.0;  // top-left block vs lambda_Inc Id
    double square_norm = 0.0;     // ||(P(xi) - P)^2||
    std::array<double, 3> first_order{};  // Im(diag)/|xi| for Bou, -W, +W slots
};
KatoReport kato_rectified(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi,
                          double window = 0.5);

struct DecayReport {
    double sigma0 = 0.0;
    double C = 0.0;
    double resolvent_sup = 0.0;
    std::vector<double> t_grid;
    std::vector<double> envelope;  // sup over xi of the kinetic norm at each t
    std::vector<std::vector<double>> norms;  // [xi][t]
};
// Points with |xi| <= alpha0 have the hydrodynamic part removed.
DecayReport decay_and_resolvent_scan(const HermiteBasis& basis, const LinearCollisionOperator& L,
                                     const std::vector<VecR>& xis, const std::vector<double>& t_grid,
                                     const std::vector<double>& z_imag, double alpha0, double window = 0.5);

void write_branch_csv(std::ostream& os, const HydroSpectrum& spec);

}  // namespace kinspec
