#pragma once

#include <array>
#include <functional>

#include "kinspec/common.hpp"

namespace kinspec {

enum class IndexRule { TotalDegree, MaxDegree };

using MultiIndex = std::array<int, 3>;

struct MacroMoments {
    cplx rho{0.0};
    VecC u;
    cplx theta{0.0};
};

// 1D Gauss-Hermite rule for the standard normal weight (Golub-Welsch).
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Orthonormal probabilists' Hermite values h_0..h_n at x.
void hermite_values(int n, double x, double* out);

// Velocity space discretized by phi_alpha = h_alpha(v) mu(v). In these
// coefficients L^2(mu^{-1} dv) is plain Euclidean space.
class HermiteBasis {
public:
    HermiteBasis(int d, int N, IndexRule rule = IndexRule::TotalDegree);

    int dim() const { return d_; }
    int degree() const { return N_; }
    IndexRule rule() const { return rule_; }
    int size() const { return static_cast<int>(idx_.size()); }
    const MultiIndex& index(int i) const { return idx_[i]; }
    int find(const MultiIndex& a) const;  // -1 if absent
    int total_degree(int i) const { return idx_[i][0] + idx_[i][1] + idx_[i][2]; }

    double E() const { return E_; }
    double K() const { return K_; }
    double sound_speed() const { return c_; }

    // Quadrature: nodes (d x nq) and weights against mu, plus the table
    // H(q, alpha) = h_alpha(v_q).
    const MatR& nodes() const { return nodes_; }
    const VecR& weights() const { return weights_; }
    const MatR& values() const { return H_; }

    const MatR& V(int j) const { return V_[j]; }
    MatR v_dot(const VecR& xi) const;

    // Coefficients of g(v) mu(v) for a callable g (exact for polynomial g of
    // degree <= N+1 under the default quadrature).
    VecC project_function(const std::function<cplx(const double*)>& g) const;
    VecR project_real(const std::function<double(const double*)>& g) const;
    // g = f / mu evaluated at the quadrature nodes.
    VecC evaluate_at_nodes(const VecC& f) const;

    // Canonical vectors.
    VecR mu() const;
    VecR v_mu(int j) const;
    VecR energy_mu() const;  // (|v|^2 - E) mu

    // Orthonormal kernel basis (columns): mu, v_j mu, (|v|^2-E)mu / norm.
    const MatR& kernel_basis() const { return ker_; }
    const MatR& P() const { return P_; }

    MacroMoments moments(const VecC& f) const;
    // Rows give rho, u_1..u_d, theta as linear functionals of coefficients.
    const MatR& moment_functionals() const { return Mfun_; }
    VecC macro(const MacroMoments& m) const;
    VecC project_P(const VecC& f) const { return P_ * f; }

    void burnett(std::vector<std::vector<VecR>>& A, std::vector<VecR>& B) const;

    VecC multiply_by_v(const VecC& f, int j, bool* truncated = nullptr) const;

    // Coefficient-space matrix of f -> f o R^T, i.e. (T f)(v) = f(R^T v).
    MatR rotation_operator(const Eigen::Matrix3d& R) const;
    // Multiplication by w(v) as a symmetric Galerkin matrix, with a finer
    // quadrature when w is not polynomial.
    MatR weight_matrix(const std::function<double(const double*)>& w, int extra_nodes = 0) const;
    // Galerkin matrix of <v>^gamma = (1+|v|^2)^{gamma/2}, built from exactly
    // integrated Gaussian-scaled Gram matrices so rotation invariance survives.
    MatR bracket_weight_matrix(double gamma) const;

private:
    void build_quadrature(int nq, MatR& nodes, VecR& w, MatR& H) const;

    int d_, N_;
    IndexRule rule_;
    std::vector<MultiIndex> idx_;
    std::vector<int> lookup_;
    MatR nodes_;
    VecR weights_;
    MatR H_;
    std::vector<MatR> V_;
    MatR ker_, P_, Mfun_;
    double E_ = 0, K_ = 0, c_ = 0;
};

// Fixed rotation test set: axis swaps, sign flips, one 45 degree turn in the
// (v1, v2) plane (listed last).
std::vector<Eigen::Matrix3d> rotation_test_set(int d);
Eigen::Matrix3d rotation_45(int d);

}  // namespace kinspec
