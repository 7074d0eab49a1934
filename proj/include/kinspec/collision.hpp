#pragma once

#include "kinspec/hermite.hpp"

namespace kinspec {

struct LinearCollisionOperator {
    std::string model;
    double nu = 1.0;
    double gamma = 0.0;
    MatR L;
    MatR A_part, B_part;  // L = A_part + B_part
    MatR W;               // Ssp metric: ||f||_Ssp^2 = f^H W f
    double lambda_L = 0.0;
    double lambda_B = 0.0;

    double ssp_norm(const VecC& f) const;
};

LinearCollisionOperator bgk_linear(const HermiteBasis& basis, double nu);
LinearCollisionOperator variable_frequency_model(const HermiteBasis& basis, double nu, double gamma);

// Q(f, g) = scale * sum_ab l_a(f) l_b(g) T_ab with linear functionals l (rows
// of `functionals`). A dense 3-tensor is the special case l = coordinates.
class BilinearCollisionOperator {
public:
    MatR functionals;      // r x n
    std::vector<VecR> T;   // r*r entries, T[a*r+b] == T[b*r+a]
    double scale = 1.0;
    bool symmetrized = true;

    int rank() const { return static_cast<int>(functionals.rows()); }
    VecC apply(const VecC& f, const VecC& g) const;
    // Same, starting from functional values l(f), l(g).
    VecC apply_reduced(const VecC& lf, const VecC& lg) const;
    const VecR& tensor(int a, int b) const { return T[a * rank() + b]; }
};

// Quadratic Taylor coefficient of the local Maxwellian map around mu, closed
// form in (rho, u, theta). `nu` scales it consistently with bgk_linear(nu).
BilinearCollisionOperator bgk_quadratic(const HermiteBasis& basis, double nu = 1.0);

// Coefficients of the local Maxwellian with the moments of mu + f (used by
// the finite-difference oracle).
VecR maxwellian_of(const HermiteBasis& basis, const VecR& f);

AssumptionReport audit_L1_L4(const HermiteBasis& basis, const LinearCollisionOperator& L,
                             const std::vector<Eigen::Matrix3d>& rotations,
                             const std::vector<VecR>& xi_samples);

AssumptionReport audit_B1_B3(const HermiteBasis& basis, const BilinearCollisionOperator& Q,
                             const LinearCollisionOperator& L,
                             const std::vector<Eigen::Matrix3d>& rotations, int samples,
                             unsigned long seed);

// Kernel dimension by the |lambda| < 1e-9 ||L|| rule.
int kernel_dimension(const MatR& L);

}  // namespace kinspec
