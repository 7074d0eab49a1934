#include "kinspec/hermite.hpp"

#include <algorithm>
#include <cmath>

namespace kinspec {

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    // Jacobi matrix of the probabilists' Hermite recurrence.
    MatR J = MatR::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(double(k));
    Eigen::SelfAdjointEigenSolver<MatR> es(J);
    nodes.resize(n);
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
        nodes[k] = es.eigenvalues()(k);
        double v0 = es.eigenvectors()(0, k);
        weights[k] = v0 * v0;
    }
    // symmetrize to kill roundoff asymmetry between +x and -x
    for (int k = 0; k < n / 2; ++k) {
        double x = 0.5 * (nodes[n - 1 - k] - nodes[k]);
        double w = 0.5 * (weights[k] + weights[n - 1 - k]);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = weights[n - 1 - k] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
}

void hermite_values(int n, double x, double* out) {
    out[0] = 1.0;
    if (n >= 1) out[1] = x;
    for (int k = 1; k < n; ++k)
        out[k + 1] = (x * out[k] - std::sqrt(double(k)) * out[k - 1]) / std::sqrt(double(k + 1));
}

HermiteBasis::HermiteBasis(int d, int N, IndexRule rule) : d_(d), N_(N), rule_(rule) {
    if (d != 2 && d != 3) throw Error("InvalidBasis", "dimension must be 2 or 3");
    if (N < 4) throw Error("InvalidBasis", "truncation degree must be >= 4");

    const int nz = (d == 3) ? N : 0;
    for (int a2 = 0; a2 <= nz; ++a2)
        for (int a1 = 0; a1 <= N; ++a1)
            for (int a0 = 0; a0 <= N; ++a0) {
                int s = a0 + a1 + a2;
                if (rule == IndexRule::TotalDegree && s > N) continue;
                idx_.push_back({a0, a1, a2});
            }
    std::sort(idx_.begin(), idx_.end(), [](const MultiIndex& a, const MultiIndex& b) {
        int sa = a[0] + a[1] + a[2], sb = b[0] + b[1] + b[2];
        if (sa != sb) return sa < sb;
        return a > b;
    });
    lookup_.assign((N + 1) * (N + 1) * (N + 1), -1);
    for (int i = 0; i < size(); ++i) {
        const auto& a = idx_[i];
        lookup_[a[0] + (N + 1) * (a[1] + (N + 1) * a[2])] = i;
    }

    build_quadrature(N + 2, nodes_, weights_, H_);

    const int n = size();
    V_.assign(d, MatR::Zero(n, n));
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < n; ++i) {
            MultiIndex b = idx_[i];
            b[j] += 1;
            int k = find(b);
            if (k < 0) continue;
            double s = std::sqrt(double(idx_[i][j] + 1));
            V_[j](k, i) = s;
            V_[j](i, k) = s;
        }

    double m2 = 0, m4 = 0;
    for (int q = 0; q < weights_.size(); ++q) {
        double r2 = nodes_.col(q).squaredNorm();
        m2 += weights_(q) * r2;
        m4 += weights_(q) * r2 * r2;
    }
    E_ = m2;
    K_ = m4 / (E_ * E_);
    c_ = std::sqrt(K_ * E_ / d_);

    ker_ = MatR::Zero(n, d + 2);
    ker_.col(0) = mu();
    for (int j = 0; j < d; ++j) ker_.col(1 + j) = v_mu(j);
    VecR e = energy_mu();
    ker_.col(d + 1) = e / e.norm();
    P_ = ker_ * ker_.transpose();

    Mfun_ = MatR::Zero(d + 2, n);
    Mfun_.row(0) = mu().transpose();
    for (int j = 0; j < d; ++j) Mfun_.row(1 + j) = (d / E_) * v_mu(j).transpose();
    Mfun_.row(d + 1) = e.transpose() / E_;
}

int HermiteBasis::find(const MultiIndex& a) const {
    for (int j = 0; j < 3; ++j)
        if (a[j] < 0 || a[j] > N_) return -1;
    if (d_ == 2 && a[2] != 0) return -1;
    return lookup_[a[0] + (N_ + 1) * (a[1] + (N_ + 1) * a[2])];
}

void HermiteBasis::build_quadrature(int nq, MatR& nodes, VecR& w, MatR& H) const {
    std::vector<double> x, wx;
    gauss_hermite(nq, x, wx);
    const int total = (d_ == 3) ? nq * nq * nq : nq * nq;
    nodes.resize(d_, total);
    w.resize(total);
    int q = 0;
    const int nz = (d_ == 3) ? nq : 1;
    for (int k2 = 0; k2 < nz; ++k2)
        for (int k1 = 0; k1 < nq; ++k1)
            for (int k0 = 0; k0 < nq; ++k0, ++q) {
                nodes(0, q) = x[k0];
                nodes(1, q) = x[k1];
                double ww = wx[k0] * wx[k1];
                if (d_ == 3) {
                    nodes(2, q) = x[k2];
                    ww *= wx[k2];
                }
                w(q) = ww;
            }
    H.resize(total, size());
    std::vector<double> h0(N_ + 1), h1(N_ + 1), h2(N_ + 1, 1.0);
    for (int p = 0; p < total; ++p) {
        hermite_values(N_, nodes(0, p), h0.data());
        hermite_values(N_, nodes(1, p), h1.data());
        if (d_ == 3) hermite_values(N_, nodes(2, p), h2.data());
        for (int i = 0; i < size(); ++i) {
            const auto& a = idx_[i];
            H(p, i) = h0[a[0]] * h1[a[1]] * h2[a[2]];
        }
    }
}

MatR HermiteBasis::v_dot(const VecR& xi) const {
    MatR M = MatR::Zero(size(), size());
    for (int j = 0; j < d_; ++j)
        if (xi(j) != 0.0) M += xi(j) * V_[j];
    return M;
}

VecC HermiteBasis::project_function(const std::function<cplx(const double*)>& g) const {
    VecC gw(weights_.size());
    for (int q = 0; q < weights_.size(); ++q) gw(q) = weights_(q) * g(nodes_.col(q).data());
    return H_.transpose() * gw;
}

VecR HermiteBasis::project_real(const std::function<double(const double*)>& g) const {
    VecR gw(weights_.size());
    for (int q = 0; q < weights_.size(); ++q) gw(q) = weights_(q) * g(nodes_.col(q).data());
    return H_.transpose() * gw;
}

VecC HermiteBasis::evaluate_at_nodes(const VecC& f) const { return H_ * f; }

VecR HermiteBasis::mu() const {
    VecR e = VecR::Zero(size());
    e(find({0, 0, 0})) = 1.0;
    return e;
}

VecR HermiteBasis::v_mu(int j) const {
    MultiIndex a{0, 0, 0};
    a[j] = 1;
    VecR e = VecR::Zero(size());
    e(find(a)) = 1.0;
    return e;
}

VecR HermiteBasis::energy_mu() const {
    // v_j^2 - 1 = sqrt(2) h_2(v_j)
    VecR e = VecR::Zero(size());
    for (int j = 0; j < d_; ++j) {
        MultiIndex a{0, 0, 0};
        a[j] = 2;
        e(find(a)) = std::sqrt(2.0);
    }
    return e;
}

MacroMoments HermiteBasis::moments(const VecC& f) const {
    VecC m = Mfun_ * f;
    MacroMoments out;
    out.rho = m(0);
    out.u = m.segment(1, d_);
    out.theta = m(d_ + 1);
    return out;
}

VecC HermiteBasis::macro(const MacroMoments& m) const {
    VecC f = m.rho * mu().cast<cplx>();
    for (int j = 0; j < d_; ++j) f += m.u(j) * v_mu(j).cast<cplx>();
    f += m.theta / (E_ * (K_ - 1.0)) * energy_mu().cast<cplx>();
    return f;
}

void HermiteBasis::burnett(std::vector<std::vector<VecR>>& A, std::vector<VecR>& B) const {
    const double sA = std::sqrt(d_ / E_);
    const double sB = 1.0 / std::sqrt(K_ * (K_ - 1.0));
    const int d = d_;
    const double E = E_, K = K_;
    A.assign(d, std::vector<VecR>(d));
    B.assign(d, VecR());
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j)
            A[i][j] = project_real([&](const double* v) {
                double r2 = 0;
                for (int k = 0; k < d; ++k) r2 += v[k] * v[k];
                return sA * (v[i] * v[j] - (i == j ? r2 / d : 0.0));
            });
        B[i] = project_real([&](const double* v) {
            double r2 = 0;
            for (int k = 0; k < d; ++k) r2 += v[k] * v[k];
            return sB * v[i] * (K - r2 / E);
        });
    }
}

VecC HermiteBasis::multiply_by_v(const VecC& f, int j, bool* truncated) const {
    if (truncated) {
        *truncated = false;
        for (int i = 0; i < size(); ++i) {
            MultiIndex b = idx_[i];
            b[j] += 1;
            if (find(b) < 0 && std::abs(f(i)) > 0.0) *truncated = true;
        }
    }
    return V_[j] * f;
}

MatR HermiteBasis::rotation_operator(const Eigen::Matrix3d& R) const {
    const int nq = static_cast<int>(weights_.size());
    MatR H2(nq, size());
    std::vector<double> h0(N_ + 1), h1(N_ + 1), h2(N_ + 1, 1.0);
    for (int q = 0; q < nq; ++q) {
        Eigen::Vector3d v = Eigen::Vector3d::Zero();
        for (int k = 0; k < d_; ++k) v(k) = nodes_(k, q);
        Eigen::Vector3d w = R.transpose() * v;
        hermite_values(N_, w(0), h0.data());
        hermite_values(N_, w(1), h1.data());
        if (d_ == 3) hermite_values(N_, w(2), h2.data());
        for (int i = 0; i < size(); ++i) {
            const auto& a = idx_[i];
            H2(q, i) = h0[a[0]] * h1[a[1]] * h2[a[2]];
        }
    }
    return H_.transpose() * weights_.asDiagonal() * H2;
}

MatR HermiteBasis::weight_matrix(const std::function<double(const double*)>& w, int extra_nodes) const {
    MatR nodes, H;
    VecR wt;
    build_quadrature(N_ + 2 + extra_nodes, nodes, wt, H);
    VecR ww(wt.size());
    for (int q = 0; q < wt.size(); ++q) ww(q) = wt(q) * w(nodes.col(q).data());
    MatR W = H.transpose() * ww.asDiagonal() * H;
    return 0.5 * (W + W.transpose());
}

namespace {

// Gauss-Jacobi rule on [0,1] for the weight (1-s)^alpha.
void gauss_jacobi01(int n, double alpha, std::vector<double>& x, std::vector<double>& w) {
    const double beta = 0.0, ab = alpha + beta;
    MatR J = MatR::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        double den = (2 * k + ab) * (2 * k + ab + 2);
        J(k, k) = (k == 0) ? (beta - alpha) / (ab + 2) : (beta * beta - alpha * alpha) / den;
        if (k >= 1) {
            double m = k;
            double num = 4 * m * (m + alpha) * (m + beta) * (m + ab);
            double dd = (2 * m + ab) * (2 * m + ab) * (2 * m + ab + 1) * (2 * m + ab - 1);
            J(k, k - 1) = J(k - 1, k) = std::sqrt(num / dd);
        }
    }
    Eigen::SelfAdjointEigenSolver<MatR> es(J);
    double mu0 = std::pow(2.0, ab + 1) * std::tgamma(alpha + 1) * std::tgamma(beta + 1) / std::tgamma(ab + 2);
    x.resize(n);
    w.resize(n);
    for (int k = 0; k < n; ++k) {
        double t = es.eigenvalues()(k);
        double v0 = es.eigenvectors()(0, k);
        // map [-1,1] -> [0,1] with s = (1+t)/2, (1-s)^alpha = ((1-t)/2)^alpha
        x[k] = 0.5 * (1 + t);
        w[k] = mu0 * v0 * v0 * std::pow(0.5, alpha + 1);
    }
}

}  // namespace

MatR HermiteBasis::bracket_weight_matrix(double gamma) const {
    const int n = size();
    if (gamma == 0.0) return MatR::Identity(n, n);
    // G(s) = E[h_a(sqrt(s) X) h_b(sqrt(s) X) (1 + s|X|^2)], polynomial in s.
    auto G = [&](double s) {
        const double rs = std::sqrt(s);
        const int nq = static_cast<int>(weights_.size());
        MatR Hs(nq, n);
        VecR ww(nq);
        std::vector<double> h0(N_ + 1), h1(N_ + 1), h2(N_ + 1, 1.0);
        for (int q = 0; q < nq; ++q) {
            hermite_values(N_, rs * nodes_(0, q), h0.data());
            hermite_values(N_, rs * nodes_(1, q), h1.data());
            if (d_ == 3) hermite_values(N_, rs * nodes_(2, q), h2.data());
            for (int i = 0; i < n; ++i) {
                const auto& a = idx_[i];
                Hs(q, i) = h0[a[0]] * h1[a[1]] * h2[a[2]];
            }
            ww(q) = weights_(q) * (1.0 + s * nodes_.col(q).squaredNorm());
        }
        return MatR(Hs.transpose() * ww.asDiagonal() * Hs);
    };
    const double a = 1.0 - 0.5 * gamma;
    MatR W;
    if (a <= 0.0) {
        W = G(1.0);
    } else {
        // (1+r)^{-a} = Gamma(a)^{-1} int tau^{a-1} e^{-tau(1+r)} dtau, then
        // s = 1/(1+2 tau) turns each Gaussian integral into G(s) s^{d/2}.
        std::vector<double> x, w;
        gauss_jacobi01(80, a - 1.0, x, w);
        W = MatR::Zero(n, n);
        for (size_t k = 0; k < x.size(); ++k) {
            double s = x[k];
            double tau = 0.5 * (1.0 / s - 1.0);
            // tau^{a-1} = ((1-s)/(2s))^{a-1}; the (1-s)^{a-1} part is in w
            double f = std::pow(2.0 * s, 1.0 - a) * std::exp(-tau) * std::pow(s, 0.5 * d_) / (2.0 * s * s);
            if (f == 0.0) continue;
            W += (w[k] * f) * G(s);
        }
        W /= std::tgamma(a);
    }
    return 0.5 * (W + W.transpose());
}

Eigen::Matrix3d rotation_45(int) {
    const double s = std::sqrt(0.5);
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    R(0, 0) = s;
    R(0, 1) = -s;
    R(1, 0) = s;
    R(1, 1) = s;
    return R;
}

std::vector<Eigen::Matrix3d> rotation_test_set(int d) {
    std::vector<Eigen::Matrix3d> out;
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) {
            Eigen::Matrix3d S = Eigen::Matrix3d::Identity();
            S(a, a) = S(b, b) = 0;
            S(a, b) = S(b, a) = 1;
            out.push_back(S);
        }
    for (int a = 0; a < d; ++a) {
        Eigen::Matrix3d F = Eigen::Matrix3d::Identity();
        F(a, a) = -1;
        out.push_back(F);
    }
    out.push_back(rotation_45(d));
    return out;
}

}  // namespace kinspec
