#include "kinspec/collision.hpp"

#include <cmath>
#include <random>

#include "kinspec/parallel.hpp"

namespace kinspec {

double LinearCollisionOperator::ssp_norm(const VecC& f) const {
    return std::sqrt(std::max(0.0, (f.adjoint() * W.cast<cplx>() * f)(0, 0).real()));
}

LinearCollisionOperator bgk_linear(const HermiteBasis& basis, double nu) {
    if (!(nu > 0)) throw Error("InvalidModel", "relaxation rate must be positive");
    const int n = basis.size();
    LinearCollisionOperator op;
    op.model = "bgk";
    op.nu = nu;
    op.gamma = 0.0;
    op.A_part = nu * basis.P();
    op.B_part = -nu * MatR::Identity(n, n);
    op.L = op.A_part + op.B_part;
    op.W = MatR::Identity(n, n);
    op.lambda_L = op.lambda_B = nu;
    return op;
}

LinearCollisionOperator variable_frequency_model(const HermiteBasis& basis, double nu, double gamma) {
    if (!(nu > 0)) throw Error("InvalidModel", "relaxation rate must be positive");
    if (gamma < 0.0 || gamma > 2.0) throw Error("InvalidModel", "gamma must lie in [0, 2]");
    const int n = basis.size();
    MatR W = basis.bracket_weight_matrix(gamma);
    MatR Q = MatR::Identity(n, n) - basis.P();
    LinearCollisionOperator op;
    op.model = "variable-frequency";
    op.nu = nu;
    op.gamma = gamma;
    op.L = -nu * Q * W * Q;
    op.L = 0.5 * (op.L + op.L.transpose());
    op.B_part = -nu * W;
    op.A_part = op.L - op.B_part;
    op.W = W;
    op.lambda_L = nu;
    op.lambda_B = nu;
    return op;
}

VecC BilinearCollisionOperator::apply_reduced(const VecC& lf, const VecC& lg) const {
    const int r = rank();
    VecC out = VecC::Zero(T[0].size());
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
            cplx w = lf(a) * lg(b);
            if (w != cplx(0.0)) out += (scale * w) * T[a * r + b].cast<cplx>();
        }
    return out;
}

VecC BilinearCollisionOperator::apply(const VecC& f, const VecC& g) const {
    VecC lf = functionals.cast<cplx>() * f;
    VecC lg = functionals.cast<cplx>() * g;
    return apply_reduced(lf, lg);
}

namespace {

// X2 + X1^2/2 for the moment vector m = (rho, u, theta), Gaussian mu.
double maxwellian_second_order(int d, const double* v, const double* m) {
    double rho = m[0], theta = m[d + 1];
    double uv = 0, u2 = 0, r2 = 0;
    for (int k = 0; k < d; ++k) {
        uv += m[1 + k] * v[k];
        u2 += m[1 + k] * m[1 + k];
        r2 += v[k] * v[k];
    }
    double X1 = rho + uv + 0.5 * theta * (r2 - d);
    double X2 = -0.5 * rho * rho - 0.5 * rho * theta * (r2 - d) + theta * theta * (0.25 * d - 0.5 * r2) -
                r2 * u2 / (2.0 * d) - (rho + theta) * uv;
    return X2 + 0.5 * X1 * X1;
}

}  // namespace

BilinearCollisionOperator bgk_quadratic(const HermiteBasis& basis, double nu) {
    const int d = basis.dim();
    const int r = d + 2;
    BilinearCollisionOperator Q;
    Q.functionals = basis.moment_functionals();
    Q.scale = nu;
    Q.T.assign(r * r, VecR());
    auto poly = [&](const std::vector<double>& m) {
        return basis.project_real([&](const double* v) { return maxwellian_second_order(d, v, m.data()); });
    };
    std::vector<VecR> diag(r);
    for (int a = 0; a < r; ++a) {
        std::vector<double> m(r, 0.0);
        m[a] = 1.0;
        diag[a] = poly(m);
        Q.T[a * r + a] = diag[a];
    }
    for (int a = 0; a < r; ++a)
        for (int b = a + 1; b < r; ++b) {
            std::vector<double> m(r, 0.0);
            m[a] = m[b] = 1.0;
            VecR t = 0.5 * (poly(m) - diag[a] - diag[b]);
            Q.T[a * r + b] = t;
            Q.T[b * r + a] = t;
        }
    return Q;
}

VecR maxwellian_of(const HermiteBasis& basis, const VecR& f) {
    const int d = basis.dim();
    const double E = basis.E();
    VecR m = basis.moment_functionals() * f;
    double R = 1.0 + m(0);
    Eigen::VectorXd U = (E / d) * m.segment(1, d) / R;
    double T = (E * (1.0 + m(d + 1) + m(0)) / R - U.squaredNorm()) / d;
    return basis.project_real([&](const double* v) {
        double r2 = 0, s = 0;
        for (int k = 0; k < d; ++k) {
            r2 += v[k] * v[k];
            s += (v[k] - U(k)) * (v[k] - U(k));
        }
        return R * std::pow(T, -0.5 * d) * std::exp(-s / (2 * T) + 0.5 * r2);
    });
}

int kernel_dimension(const MatR& L) {
    MatR S = 0.5 * (L + L.transpose());
    Eigen::SelfAdjointEigenSolver<MatR> es(S, Eigen::EigenvaluesOnly);
    double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    int count = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) < 1e-9 * scale) ++count;
    return count;
}

namespace {

bool is_generic_rotation(const Eigen::Matrix3d& R) {
    for (int i = 0; i < 9; ++i) {
        double a = std::abs(R.data()[i]);
        if (a > 1e-14 && std::abs(a - 1.0) > 1e-14) return true;
    }
    return false;
}

MatR complement_basis(const MatR& P) {
    Eigen::SelfAdjointEigenSolver<MatR> es(P);
    int n = P.rows(), m = 0;
    for (int i = 0; i < n; ++i)
        if (es.eigenvalues()(i) < 0.5) ++m;
    MatR Q(n, m);
    int k = 0;
    for (int i = 0; i < n; ++i)
        if (es.eigenvalues()(i) < 0.5) Q.col(k++) = es.eigenvectors().col(i);
    return Q;
}

}  // namespace

AssumptionReport audit_L1_L4(const HermiteBasis& basis, const LinearCollisionOperator& op,
                             const std::vector<Eigen::Matrix3d>& rotations,
                             const std::vector<VecR>& xi_samples) {
    AssumptionReport rep;
    const MatR& L = op.L;
    const int d = basis.dim();
    const double Lnorm = L.cwiseAbs().maxCoeff();

    double asym = (L - L.transpose()).cwiseAbs().maxCoeff();
    rep.checks.push_back({"L1 symmetry", asym <= 1e-12, asym, 1e-12, ""});

    double worst_exact = 0, worst_generic = 0;
    for (const auto& R : rotations) {
        MatR T = basis.rotation_operator(R);
        double r = (T * L - L * T).cwiseAbs().maxCoeff();
        if (is_generic_rotation(R))
            worst_generic = std::max(worst_generic, r);
        else
            worst_exact = std::max(worst_exact, r);
    }
    rep.checks.push_back({"L1 rotation commutation (exact group)", worst_exact <= 1e-10, worst_exact, 1e-10, ""});
    rep.checks.push_back({"L1 rotation commutation (45 deg)", worst_generic <= 1e-8, worst_generic, 1e-8, ""});

    int kd = kernel_dimension(L);
    rep.checks.push_back({"L3 kernel dimension", kd == d + 2, double(kd), double(d + 2), ""});

    MatR S = 0.5 * (L + L.transpose());
    Eigen::SelfAdjointEigenSolver<MatR> es(S);
    double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    MatR Pk = MatR::Zero(L.rows(), L.cols());
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) < 1e-9 * scale)
            Pk += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose();
    double span = (Pk - basis.P()).norm();
    rep.checks.push_back({"L3 kernel span = {mu, v mu, |v|^2 mu}", span <= 1e-10, span, 1e-10, ""});

    MatR Qc = complement_basis(basis.P());
    MatR A = -(Qc.transpose() * S * Qc);
    MatR B = Qc.transpose() * op.W * Qc;
    Eigen::GeneralizedSelfAdjointEigenSolver<MatR> ges(0.5 * (A + A.transpose()), 0.5 * (B + B.transpose()));
    double gap = ges.eigenvalues().minCoeff();
    rep.checks.push_back({"L3 coercivity gap in Ssp", gap >= op.lambda_L * (1 - 1e-10), gap, op.lambda_L,
                          "measured min Rayleigh quotient on ker(L)^perp"});

    double split = (op.A_part + op.B_part - L).cwiseAbs().maxCoeff();
    rep.checks.push_back({"L4 splitting L = A + B", split <= 1e-12 * std::max(1.0, Lnorm), split, 1e-12, ""});

    std::vector<double> re(xi_samples.size(), -1e300);
    parallel_for(static_cast<int>(xi_samples.size()), [&](int s) {
        VecR xi = VecR::Zero(d);
        xi.head(std::min<int>(d, xi_samples[s].size())) = xi_samples[s].head(std::min<int>(d, xi_samples[s].size()));
        MatC Bx = op.B_part.cast<cplx>() - I_UNIT * basis.v_dot(xi).cast<cplx>();
        Eigen::ComplexEigenSolver<MatC> ces(Bx, false);
        re[s] = ces.eigenvalues().real().maxCoeff();
    });
    double maxre = -1e300;
    for (double r : re) maxre = std::max(maxre, r);
    if (xi_samples.empty()) maxre = -op.lambda_B;
    rep.checks.push_back({"L4 dissipativity of B - i v.xi", maxre <= -op.lambda_B + 1e-9, maxre, -op.lambda_B,
                          "max real part over xi samples"});
    rep.checks.push_back({"L4 lambda_B >= lambda_L", op.lambda_B >= op.lambda_L, op.lambda_B, op.lambda_L, ""});
    return rep;
}

AssumptionReport audit_B1_B3(const HermiteBasis& basis, const BilinearCollisionOperator& Q,
                             const LinearCollisionOperator& op,
                             const std::vector<Eigen::Matrix3d>& rotations, int samples,
                             unsigned long seed) {
    AssumptionReport rep;
    const int n = basis.size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N01(0.0, 1.0);
    auto rnd = [&]() {
        VecC f(n);
        for (int i = 0; i < n; ++i) f(i) = N01(rng);
        return VecC(f / f.norm());
    };
    const MatC K = basis.kernel_basis().cast<cplx>();

    double cons = 0, sym = 0, lin = 0, b3 = 0;
    for (int s = 0; s < samples; ++s) {
        VecC f = rnd(), g = rnd(), h = rnd();
        VecC q = Q.apply(f, g);
        cons = std::max(cons, (K.adjoint() * q).cwiseAbs().maxCoeff());
        sym = std::max(sym, (q - Q.apply(g, f)).norm());
        cplx a(0.3, -0.7), b(-1.1, 0.2);
        VecC lhs = Q.apply(a * f + b * h, g);
        VecC rhs = a * q + b * Q.apply(h, g);
        lin = std::max(lin, (lhs - rhs).norm());
        double num = std::abs(q.dot(h));
        double den = op.ssp_norm(h) * (f.norm() * op.ssp_norm(g) + op.ssp_norm(f) * g.norm());
        b3 = std::max(b3, num / den);
    }
    rep.checks.push_back({"B1 conservation", cons <= 1e-12, cons, 1e-12, ""});
    rep.checks.push_back({"Q symmetry", sym <= 1e-12, sym, 1e-12, ""});
    rep.checks.push_back({"Q bilinearity", lin <= 1e-12, lin, 1e-12, ""});

    double worst_exact = 0, worst_generic = 0;
    for (const auto& R : rotations) {
        MatC T = basis.rotation_operator(R).cast<cplx>();
        for (int s = 0; s < std::max(3, samples / 10); ++s) {
            VecC f = rnd(), g = rnd();
            double r = (T * Q.apply(f, g) - Q.apply(T * f, T * g)).norm();
            if (is_generic_rotation(R))
                worst_generic = std::max(worst_generic, r);
            else
                worst_exact = std::max(worst_exact, r);
        }
    }
    rep.checks.push_back({"B2 equivariance (exact group)", worst_exact <= 1e-10, worst_exact, 1e-10, ""});
    rep.checks.push_back({"B2 equivariance (45 deg)", worst_generic <= 1e-8, worst_generic, 1e-8, ""});
    rep.checks.push_back({"B3 empirical dual constant", std::isfinite(b3), b3, 0.0, "reported only"});
    return rep;
}

}  // namespace kinspec
