#include "kinspec/semigroup.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "kinspec/parallel.hpp"

namespace kinspec {

ModePropagator::ModePropagator(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi,
                               double eps)
    : xi_(xi), eps_(eps) {
    if (xi.norm() == 0.0) {
        // L itself is symmetric: orthonormal eigenvectors
        Eigen::SelfAdjointEigenSolver<MatR> es(0.5 * (L.L + L.L.transpose()));
        ed_.lambda = es.eigenvalues().cast<cplx>();
        ed_.V = es.eigenvectors().cast<cplx>();
        ed_.Vinv = ed_.V.adjoint();
        ed_.cond = 1.0;
    } else {
        MatC M = L.L.cast<cplx>() - I_UNIT * (eps * basis.v_dot(xi)).cast<cplx>();
        ed_ = eigen_decompose(M);
    }
    if (!(ed_.cond <= 1e8)) throw Error("Defective", "eigenvector matrix condition " + std::to_string(ed_.cond));
}

VecC ModePropagator::apply_function(const std::function<cplx(cplx)>& g, const VecC& f) const {
    VecC w = ed_.Vinv * f;
    const double s = 1.0 / (eps_ * eps_);
    for (int i = 0; i < w.size(); ++i) w(i) *= g(ed_.lambda(i) * s);
    return ed_.V * w;
}

VecC ModePropagator::apply(double t, const VecC& f) const {
    if (t == 0.0) return f;
    return apply_function([t](cplx z) { return std::exp(t * z); }, f);
}

MatC ModePropagator::matrix(double t) const {
    const double s = t / (eps_ * eps_);
    VecC e = (ed_.lambda * s).array().exp();
    return ed_.V * e.asDiagonal() * ed_.Vinv;
}

std::vector<int> ModePropagator::hydro_indices(double window) const {
    std::vector<int> out;
    for (int i = 0; i < ed_.lambda.size(); ++i)
        if (ed_.lambda(i).real() > -window) out.push_back(i);
    return out;
}

VecC ModePropagator::apply_kinetic(double t, const VecC& f, double alpha0, double window) const {
    VecC w = ed_.Vinv * f;
    if (eps_ * xi_.norm() <= alpha0) {
        auto h = hydro_indices(window);
        const int d = int(xi_.size());
        if (int(h.size()) != d + 2)
            throw Error("BranchCount", "mode with |eps xi| = " + std::to_string(eps_ * xi_.norm()) + " has " +
                                           std::to_string(h.size()) + " hydrodynamic eigenvalues");
        for (int i : h) w(i) = 0.0;
    }
    const double s = t / (eps_ * eps_);
    for (int i = 0; i < w.size(); ++i) w(i) *= std::exp(s * ed_.lambda(i));
    return ed_.V * w;
}

VecC propagate(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi, double eps, double t,
               const VecC& f) {
    return ModePropagator(basis, L, xi, eps).apply(t, f);
}

SemigroupSplit split_semigroup(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi,
                               double eps, double t, double alpha0, double window) {
    const int n = basis.size();
    SemigroupSplit s;
    ModePropagator mp(basis, L, xi, eps);
    s.full = mp.matrix(t);
    const MatC Id = MatC::Identity(n, n);
    const double r = eps * xi.norm();
    for (auto& b : s.branch) b = MatC::Zero(n, n);
    MatC total = MatC::Zero(n, n);
    if (r == 0.0) {
        s.hydro_active = true;
        total = basis.P().cast<cplx>();
        s.ns = s.full * total;
        s.wave = MatC::Zero(n, n);
    } else if (r <= alpha0) {
        s.hydro_active = true;
        ProjectorSet ps = spectral_projectors(basis, L, eps * xi, ProjectorBackend::Contour, window);
        for (Branch b : kBranches) {
            s.branch[int(b)] = s.full * ps.branch[int(b)];
            s.commutation = std::max(s.commutation, (ps.branch[int(b)] * s.full - s.branch[int(b)]).norm());
        }
        total = ps.total;
        s.ns = s.branch[int(Branch::Inc)] + s.branch[int(Branch::Bou)];
        s.wave = s.branch[int(Branch::PlusWave)] + s.branch[int(Branch::MinusWave)];
    } else {
        s.ns = MatC::Zero(n, n);
        s.wave = MatC::Zero(n, n);
    }
    s.kin = s.full - s.ns - s.wave;
    s.sum_residual = (s.ns + s.wave + s.kin - s.full).norm();
    s.kin_residual = (s.kin - s.full * (Id - total)).norm();
    return s;
}

LimitSemigroups limit_semigroups(const HermiteBasis& basis, const ProjectorExpansion& pe,
                                 const TransportCoefficients& tc, const VecR& xi, double t, double eps) {
    const int n = basis.size();
    LimitSemigroups ls;
    const double r2 = xi.squaredNorm(), r = std::sqrt(r2);
    if (r == 0.0) {
        ls.U_ns = basis.P().cast<cplx>();
        ls.V_ns = MatC::Zero(n, n);
        ls.U_disp = MatC::Zero(n, n);
        return ls;
    }
    const double ei = std::exp(-t * tc.kappa_inc * r2), eb = std::exp(-t * tc.kappa_bou * r2);
    ls.U_ns = ei * pe.P0[int(Branch::Inc)].cast<cplx>() + eb * pe.P0[int(Branch::Bou)].cast<cplx>();
    ls.V_ns = ei * pe.G[int(Branch::Inc)] + eb * pe.G[int(Branch::Bou)];
    const double damp = std::exp(-t * tc.kappa_wave * r2);
    const cplx ph = std::exp(I_UNIT * (tc.c * r * t / eps));
    ls.U_disp = damp * (ph * pe.P0[int(Branch::PlusWave)].cast<cplx>() +
                        std::conj(ph) * pe.P0[int(Branch::MinusWave)].cast<cplx>());
    return ls;
}

double RadialProfile::operator()(double k) const {
    double s = (2.0 * k - (k_lo + k_hi)) / (k_hi - k_lo);
    if (std::abs(s) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s * s));
}

namespace {

// e^{it|D|} g at radius x, by trapezoid on [k_lo, k_hi] (integrand vanishes
// to all orders at both ends).
cplx radial_wave(const RadialProfile& g, int d, double t, double x, int m) {
    const double h = (g.k_hi - g.k_lo) / m;
    cplx acc = 0;
    for (int j = 1; j < m; ++j) {
        double k = g.k_lo + j * h;
        double radial;
        if (d == 3)
            radial = k * k * (x == 0.0 ? 1.0 : std::sin(k * x) / (k * x)) / (2.0 * M_PI * M_PI);
        else
            radial = k * std::cyl_bessel_j(0.0, k * x) / (2.0 * M_PI);
        acc += g(k) * radial * std::exp(I_UNIT * (t * k));
    }
    return acc * h;
}

}  // namespace

DispersionReport dispersive_decay_check(const RadialProfile& g, const std::vector<double>& t_grid, int d,
                                        double points_per_period) {
    if (d != 2 && d != 3) throw Error("InvalidDimension", "dispersion check needs d = 2 or 3");
    DispersionReport rep;
    rep.d = d;
    rep.t = t_grid;
    rep.min_points_per_period = std::numeric_limits<double>::infinity();
    const double W = 8.0, dr = 0.05;
    for (double t : t_grid) {
        double rmax = t + W;
        // fastest phase in k: t + r (from e^{itk} and the radial factor)
        double omega = t + rmax;
        int m = int(std::ceil((g.k_hi - g.k_lo) * omega * points_per_period / (2.0 * M_PI))) + 16;
        double ppp = 2.0 * M_PI / (omega * (g.k_hi - g.k_lo) / m);
        rep.min_points_per_period = std::min(rep.min_points_per_period, ppp);
        if (ppp < 10.0) throw Error("QuadratureResolution", "fewer than 10 points per oscillation period");
        std::vector<double> xs{0.0};
        for (double x = std::max(0.0, t - W); x <= rmax; x += dr) xs.push_back(x);
        std::vector<double> vals(xs.size());
        parallel_for(int(xs.size()), [&](int i) { vals[i] = std::abs(radial_wave(g, d, t, xs[i], m)); });
        rep.sup.push_back(*std::max_element(vals.begin(), vals.end()));
    }
    const int n = int(t_grid.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        double x = std::log(t_grid[i]), y = std::log(rep.sup[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double cov = n * sxy - sx * sy, vx = n * sxx - sx * sx, vy = n * syy - sy * sy;
    rep.exponent = cov / vx;
    rep.r2 = vy > 0 ? cov * cov / (vx * vy) : 1.0;
    rep.value_t0 = std::abs(radial_wave(g, d, 1e-9, 0.0, 4096));
    rep.g0 = std::abs(radial_wave(g, d, 0.0, 0.0, 4096));
    return rep;
}

KineticDecay measure_kinetic_decay(const HermiteBasis& basis, const LinearCollisionOperator& L,
                                   const std::vector<VecR>& ks, double eps, const std::vector<double>& tau_grid,
                                   double alpha0, double window) {
    KineticDecay kd;
    kd.eps = eps;
    const int nt = int(tau_grid.size()), nk = int(ks.size());
    for (double tau : tau_grid) kd.t.push_back(tau * eps * eps);
    std::vector<std::vector<double>> norms(nk, std::vector<double>(nt, 0.0));
    parallel_for(nk, [&](int i) {
        ModePropagator mp(basis, L, ks[i], eps);
        const auto& e = mp.decomp();
        std::vector<int> keep;
        bool remove = eps * ks[i].norm() <= alpha0;
        for (int k = 0; k < e.lambda.size(); ++k)
            if (!(remove && e.lambda(k).real() > -window)) keep.push_back(k);
        const int n = int(e.V.rows()), m = int(keep.size());
        for (int j = 0; j < nt; ++j) {
            MatC Vk(n, m), Wk(m, n);
            for (int c = 0; c < m; ++c) {
                Vk.col(c) = e.V.col(keep[c]) * std::exp(tau_grid[j] * e.lambda(keep[c]));
                Wk.row(c) = e.Vinv.row(keep[c]);
            }
            MatC X = Vk * Wk;
            Eigen::SelfAdjointEigenSolver<MatC> es(X.adjoint() * X, Eigen::EigenvaluesOnly);
            norms[i][j] = std::sqrt(std::max(0.0, es.eigenvalues()(n - 1)));
        }
    });
    kd.envelope.assign(nt, 0.0);
    for (int j = 0; j < nt; ++j)
        for (int i = 0; i < nk; ++i) kd.envelope[j] = std::max(kd.envelope[j], norms[i][j]);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int c = 0;
    for (int j = nt / 2; j < nt; ++j) {
        double x = kd.t[j], y = std::log(kd.envelope[j]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++c;
    }
    double slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
    kd.sigma0 = -slope * eps * eps;
    for (int j = 0; j < nt; ++j) kd.C = std::max(kd.C, kd.envelope[j] * std::exp(kd.sigma0 * kd.t[j] / (eps * eps)));
    return kd;
}

void write_semigroup_csv_header(std::ostream& os) { os << "t,|xi|,eps,norm_kin,norm_hyd_err,envelope_fit\n"; }

void write_semigroup_csv_row(std::ostream& os, double t, double xi, double eps, double norm_kin, double norm_hyd_err,
                             double envelope) {
    os << t << ',' << xi << ',' << eps << ',' << norm_kin << ',' << norm_hyd_err << ',' << envelope << '\n';
}

}  // namespace kinspec
