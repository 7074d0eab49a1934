#include "kinspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>

#include "kinspec/parallel.hpp"

namespace kinspec {

const char* branch_name(Branch b) {
    switch (b) {
        case Branch::Inc: return "Inc";
        case Branch::Bou: return "Bou";
        case Branch::PlusWave: return "+Wave";
        case Branch::MinusWave: return "-Wave";
    }
    return "?";
}

cplx HydroPoint::lambda(Branch b) const {
    switch (b) {
        case Branch::Inc: {
            cplx s = 0;
            for (auto v : inc) s += v;
            return inc.empty() ? cplx(0) : s / double(inc.size());
        }
        case Branch::Bou: return bou;
        case Branch::PlusWave: return plus;
        case Branch::MinusWave: return minus;
    }
    return 0;
}

ModeOperator assemble_mode(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi) {
    ModeOperator m;
    m.xi = xi;
    m.L = &L;
    m.M = L.L.cast<cplx>() - I_UNIT * basis.v_dot(xi).cast<cplx>();
    // flag when xi moves mass into the top degree (where v-multiplication truncates)
    if (xi.norm() > 0) {
        for (int i = 0; i < basis.size(); ++i)
            if (basis.total_degree(i) == basis.degree()) {
                m.truncated = true;
                break;
            }
    }
    return m;
}

EigenDecomp eigen_decompose(const MatC& A) {
    EigenDecomp e;
    Eigen::ComplexEigenSolver<MatC> es(A);
    e.lambda = es.eigenvalues();
    e.V = es.eigenvectors();
    Eigen::PartialPivLU<MatC> lu(e.V);
    e.Vinv = lu.inverse();
    Eigen::JacobiSVD<MatC> svd(e.V);
    const auto& s = svd.singularValues();
    e.cond = s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
    double an = A.norm();
    e.reconstruction = an > 0 ? (e.V * e.lambda.asDiagonal() * e.Vinv - A).norm() / an : 0.0;
    return e;
}

VecR direction_of(const VecR& xi, int d) {
    double n = xi.norm();
    if (n > 0) return xi / n;
    VecR w = VecR::Zero(d);
    w(0) = 1.0;
    return w;
}

SectorSplit symmetry_sectors(const HermiteBasis& basis, const VecR& omega) {
    const int d = basis.dim(), n = basis.size();
    // transverse orthonormal frame via Householder completion of omega
    MatR F = MatR::Identity(d, d);
    F.col(0) = omega;
    Eigen::HouseholderQR<MatR> qr(F);
    MatR Qf = qr.householderQ();
    SectorSplit s;
    s.transverse = Qf.rightCols(d - 1);
    MatR Peven = MatR::Identity(n, n);
    for (int j = 0; j < d - 1; ++j) {
        Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
        VecR sj = s.transverse.col(j);
        R.topLeftCorner(d, d) -= 2.0 * sj * sj.transpose();
        MatR T = basis.rotation_operator(R);
        Peven = Peven * (0.5 * (MatR::Identity(n, n) + T));
    }
    Peven = 0.5 * (Peven + Peven.transpose());
    Eigen::SelfAdjointEigenSolver<MatR> es(Peven);
    std::vector<int> ev, od;
    for (int i = 0; i < n; ++i) (es.eigenvalues()(i) > 0.5 ? ev : od).push_back(i);
    s.even.resize(n, ev.size());
    s.odd.resize(n, od.size());
    for (size_t i = 0; i < ev.size(); ++i) s.even.col(i) = es.eigenvectors().col(ev[i]);
    for (size_t i = 0; i < od.size(); ++i) s.odd.col(i) = es.eigenvectors().col(od[i]);
    return s;
}

namespace {

struct Sector {
    MatR Q;
    MatC A;
    EigenDecomp ed;
    std::vector<int> hydro, rest;
};

Sector solve_sector(const MatR& Q, const MatC& M, double window) {
    Sector s;
    s.Q = Q;
    s.A = Q.transpose().cast<cplx>() * M * Q.cast<cplx>();
    s.ed = eigen_decompose(s.A);
    for (int i = 0; i < s.ed.lambda.size(); ++i) (s.ed.lambda(i).real() > -window ? s.hydro : s.rest).push_back(i);
    return s;
}

struct PointData {
    VecR omega;
    double r = 0;
    SectorSplit split;
    Sector even, odd;
    int label[3] = {1, 2, 3};  // even hydro slot -> Branch index (Bou / +W / -W)
};

// Classified sector eigen-data. Throws BranchCount / Degenerate.
PointData point_data(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi, double window) {
    const int d = basis.dim();
    PointData pd;
    pd.r = xi.norm();
    pd.omega = direction_of(xi, d);
    pd.split = symmetry_sectors(basis, pd.omega);
    MatC M = L.L.cast<cplx>() - I_UNIT * basis.v_dot(xi).cast<cplx>();
    pd.even = solve_sector(pd.split.even, M, window);
    pd.odd = solve_sector(pd.split.odd, M, window);
    int count = int(pd.even.hydro.size() + pd.odd.hydro.size());
    if (pd.even.hydro.size() != 3 || pd.odd.hydro.size() != size_t(d - 1))
        throw Error("BranchCount", "found " + std::to_string(count) + " eigenvalues in the window at |xi| = " +
                                       std::to_string(pd.r) + " (expected " + std::to_string(d + 2) + ")");
    if (pd.r == 0.0) return pd;  // triple zero: labels are conventional

    auto psi = hydro_eigenfunctions(basis, pd.omega);
    // +Wave (Im > 0) is carried by psi_minus, -Wave by psi_plus
    const VecR* refs[3] = {&psi.psi_bou, &psi.psi_minus, &psi.psi_plus};
    bool used[3] = {false, false, false};
    for (int k = 0; k < 3; ++k) {
        VecC w = pd.even.Q.cast<cplx>() * pd.even.ed.V.col(pd.even.hydro[k]);
        double wn = w.norm();
        double ov[3];
        for (int j = 0; j < 3; ++j) ov[j] = std::abs(refs[j]->cast<cplx>().dot(w)) / wn;
        int best = int(std::max_element(ov, ov + 3) - ov);
        double second = 0;
        for (int j = 0; j < 3; ++j)
            if (j != best) second = std::max(second, ov[j]);
        if (ov[best] - second < 0.1 * ov[best] || used[best])
            throw Error("Degenerate", "ambiguous branch overlap at |xi| = " + std::to_string(pd.r));
        used[best] = true;
        pd.label[k] = best + 1;
    }
    return pd;
}

int even_slot(const PointData& pd, Branch b) {
    for (int k = 0; k < 3; ++k)
        if (pd.label[k] == int(b)) return pd.even.hydro[k];
    return -1;
}

MatC contour_in_sector(const Sector& s, const std::vector<int>& inside, int nodes) {
    const auto& lam = s.ed.lambda;
    cplx c = 0;
    for (int i : inside) c += lam(i);
    c /= double(inside.size());
    double rin = 0, rout = std::numeric_limits<double>::infinity();
    for (int i = 0; i < lam.size(); ++i) {
        bool in = std::find(inside.begin(), inside.end(), i) != inside.end();
        double dist = std::abs(lam(i) - c);
        if (in)
            rin = std::max(rin, dist);
        else
            rout = std::min(rout, dist);
    }
    if (!(rout > rin * (1 + 1e-6)) || rout - rin < 1e-12)
        throw Error("ContourCrossing", "cluster not separable by a circle");
    const double R = rin + 0.5 * (rout - rin);
    const double tol = 1e-3 * R;
    for (int i = 0; i < lam.size(); ++i)
        if (std::abs(std::abs(lam(i) - c) - R) < tol) throw Error("ContourCrossing", "eigenvalue on the contour");
    const int n = int(lam.size());
    MatC P = MatC::Zero(n, n);
    const MatC& A = s.A;
    const MatC Id = MatC::Identity(n, n);
    for (int m = 0; m < nodes; ++m) {
        cplx e = std::polar(1.0, 2.0 * M_PI * (m + 0.5) / nodes);
        cplx z = c + R * e;
        // (1/2 pi i) int (z - A)^{-1} dz with dz = i R e dtheta
        P += (R * e) * Eigen::PartialPivLU<MatC>(z * Id - A).solve(Id);
    }
    return P / double(nodes);
}

MatC dyad_in_sector(const Sector& s, const std::vector<int>& inside) {
    const int n = int(s.ed.lambda.size());
    MatC P = MatC::Zero(n, n);
    for (int i : inside) P += s.ed.V.col(i) * s.ed.Vinv.row(i);
    return P;
}

MatC sector_projector(const Sector& s, const std::vector<int>& inside, ProjectorBackend be, int nodes) {
    MatC Ps = be == ProjectorBackend::Contour ? contour_in_sector(s, inside, nodes) : dyad_in_sector(s, inside);
    return s.Q.cast<cplx>() * Ps * s.Q.transpose().cast<cplx>();
}

bool newton_idempotent(MatC& P) {
    MatC P2 = P * P;
    if ((P2 - P).norm() <= 1e-10) return false;
    P = 3.0 * P2 - 2.0 * P2 * P;
    return true;
}

double norm2(const MatC& A) {
    Eigen::SelfAdjointEigenSolver<MatC> es(A.adjoint() * A, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues()(es.eigenvalues().size() - 1)));
}

// V_k diag(w) Vinv_k over the index subset k
MatC restricted(const EigenDecomp& e, const std::vector<int>& idx, const std::function<cplx(cplx)>& w) {
    const int n = int(e.V.rows()), m = int(idx.size());
    MatC Vk(n, m), Wk(m, n);
    for (int j = 0; j < m; ++j) {
        Vk.col(j) = e.V.col(idx[j]) * w(e.lambda(idx[j]));
        Wk.row(j) = e.Vinv.row(idx[j]);
    }
    return Vk * Wk;
}

}  // namespace

HydroPoint analyze_point(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi, double window) {
    HydroPoint hp;
    hp.xi = xi;
    hp.r = xi.norm();
    PointData pd = point_data(basis, L, xi, window);
    for (int i : pd.odd.hydro) hp.inc.push_back(pd.odd.ed.lambda(i));
    std::sort(hp.inc.begin(), hp.inc.end(), [](cplx a, cplx b) { return a.real() > b.real(); });
    if (hp.r == 0.0) {
        hp.bou = hp.plus = hp.minus = 0.0;
    } else {
        hp.bou = pd.even.ed.lambda(even_slot(pd, Branch::Bou));
        hp.plus = pd.even.ed.lambda(even_slot(pd, Branch::PlusWave));
        hp.minus = pd.even.ed.lambda(even_slot(pd, Branch::MinusWave));
    }
    hp.count = basis.dim() + 2;
    double maxre_rest = -std::numeric_limits<double>::infinity(), sep = std::numeric_limits<double>::infinity();
    hp.max_re = -std::numeric_limits<double>::infinity();
    std::vector<cplx> hyd, rest;
    for (const Sector* s : {&pd.even, &pd.odd}) {
        for (int i : s->hydro) hyd.push_back(s->ed.lambda(i));
        for (int i : s->rest) rest.push_back(s->ed.lambda(i));
    }
    for (auto z : rest) {
        maxre_rest = std::max(maxre_rest, z.real());
        for (auto h : hyd) sep = std::min(sep, std::abs(z - h));
    }
    for (auto z : hyd) hp.max_re = std::max(hp.max_re, z.real());
    hp.max_re = std::max(hp.max_re, maxre_rest);
    hp.gap = -maxre_rest;
    hp.separation = sep;
    return hp;
}

HydroSpectrum hydro_branches(const HermiteBasis& basis, const LinearCollisionOperator& L,
                             const std::vector<double>& radii, const std::vector<VecR>& directions, double window,
                             bool tolerate) {
    HydroSpectrum hs;
    hs.radii = radii;
    std::sort(hs.radii.begin(), hs.radii.end());
    for (const auto& w : directions) hs.directions.push_back(w / w.norm());
    hs.window = window;
    const int nr = int(hs.radii.size()), nd = int(hs.directions.size());
    hs.points.resize(size_t(nr) * nd);
    parallel_for(nr * nd, [&](int k) {
        int ir = k / nd, id = k % nd;
        VecR xi = hs.radii[ir] * hs.directions[id];
        HydroPoint hp;
        try {
            hp = analyze_point(basis, L, xi, window);
        } catch (const Error& e) {
            if (!tolerate) throw;
            hp.xi = xi;
            hp.r = hs.radii[ir];
            hp.error = e.what();
        }
        hp.dir = id;
        hs.points[k] = hp;
    });
    hs.gap_certificate = std::numeric_limits<double>::infinity();
    for (const auto& p : hs.points)
        if (p.error.empty()) hs.gap_certificate = std::min(hs.gap_certificate, p.gap);
    return hs;
}

double empirical_alpha0(const HermiteBasis& basis, const LinearCollisionOperator& L, const std::vector<double>& radii,
                        const VecR& direction, double window) {
    std::vector<double> r = radii;
    std::sort(r.begin(), r.end());
    double a0 = 0.0;
    VecR w = direction / direction.norm();
    for (double x : r) {
        try {
            analyze_point(basis, L, x * w, window);
        } catch (const Error&) {
            break;
        }
        a0 = x;
    }
    return a0;
}

void fit_expansions(HydroSpectrum& spec) {
    std::vector<const HydroPoint*> pts;
    for (const auto& p : spec.points)
        if (p.dir == 0 && p.r > 0 && p.error.empty()) pts.push_back(&p);
    const int m = int(pts.size());
    if (m < 5) throw Error("FitQuality", "need at least 5 radial points, have " + std::to_string(m));
    MatR D(m, 4);
    for (int i = 0; i < m; ++i) {
        double r = pts[i]->r;
        D.row(i) << 1.0, r, r * r, r * r * r;
    }
    Eigen::ColPivHouseholderQR<MatR> qr(D);
    for (Branch b : kBranches) {
        VecR re(m), im(m);
        for (int i = 0; i < m; ++i) {
            cplx y = pts[i]->lambda(b) / pts[i]->r;
            re(i) = y.real();
            im(i) = y.imag();
        }
        VecR cr = qr.solve(re), ci = qr.solve(im);
        BranchFit& f = spec.fits[int(b)];
        f.a1 = cplx(cr(0), ci(0));
        f.a2 = cplx(cr(1), ci(1));
        f.remainder.clear();
        double sx = 0, sy = 0, sxx = 0, sxy = 0, maxrem = 0;
        for (int i = 0; i < m; ++i) {
            double r = pts[i]->r;
            double rem = std::abs(pts[i]->lambda(b) - f.a1 * r - f.a2 * r * r);
            f.remainder.push_back(rem);
            maxrem = std::max(maxrem, rem);
        }
        if (maxrem < 1e-13) {
            f.remainder_slope = std::numeric_limits<double>::infinity();
        } else {
            int k = 0;
            for (int i = 0; i < m; ++i) {
                if (f.remainder[i] <= 0) continue;
                double x = std::log(pts[i]->r), y = std::log(f.remainder[i]);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                ++k;
            }
            f.remainder_slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        }
        if (f.remainder_slope < 2.5)
            throw Error("FitQuality", std::string("remainder slope ") + std::to_string(f.remainder_slope) +
                                          " for branch " + branch_name(b));
    }
    spec.fitted = true;
    spec.c_fit = spec.fits[int(Branch::PlusWave)].a1.imag();
    spec.kappa_inc_fit = -spec.fits[int(Branch::Inc)].a2.real();
    spec.kappa_bou_fit = -spec.fits[int(Branch::Bou)].a2.real();
    spec.kappa_wave_fit =
        -0.5 * (spec.fits[int(Branch::PlusWave)].a2.real() + spec.fits[int(Branch::MinusWave)].a2.real());
}

ProjectorExpansion projector_expansion(const HermiteBasis& basis, const LinearCollisionOperator& L,
                                       const VecR& omega, const MatR& R0) {
    (void)L;
    const int d = basis.dim(), n = basis.size();
    ProjectorExpansion pe;
    pe.omega = omega / omega.norm();
    SectorSplit ss = symmetry_sectors(basis, pe.omega);
    auto psi = hydro_eigenfunctions(basis, pe.omega);
    pe.basis_cols.resize(n, d + 2);
    for (int i = 0; i < d - 1; ++i) {
        VecR u = VecR::Zero(n);
        for (int j = 0; j < d; ++j) u += ss.transverse(j, i) * basis.v_mu(j);
        pe.basis_cols.col(i) = u;
    }
    pe.basis_cols.col(d - 1) = psi.psi_bou;
    pe.basis_cols.col(d) = psi.psi_minus;
    pe.basis_cols.col(d + 1) = psi.psi_plus;

    MatR Pinc = MatR::Zero(n, n);
    for (int i = 0; i < d - 1; ++i) Pinc += pe.basis_cols.col(i) * pe.basis_cols.col(i).transpose();
    pe.P0[int(Branch::Inc)] = Pinc;
    pe.P0[int(Branch::Bou)] = psi.psi_bou * psi.psi_bou.transpose();
    pe.P0[int(Branch::PlusWave)] = psi.psi_minus * psi.psi_minus.transpose();
    pe.P0[int(Branch::MinusWave)] = psi.psi_plus * psi.psi_plus.transpose();

    const MatR V = basis.v_dot(pe.omega);
    // 3x3 block in (psi_Bou, psi_-W, psi_+W): A0 = diag(0, ic, -ic), A1 = Psi^T V R0 V Psi
    MatR Psi = pe.basis_cols.rightCols(3);
    MatR A1 = Psi.transpose() * V * R0 * V * Psi;
    const double c = basis.sound_speed();
    const cplx mu[3] = {0.0, I_UNIT * c, -I_UNIT * c};
    std::array<MatC, 3> pp;
    for (int j = 0; j < 3; ++j) {
        MatC S = MatC::Zero(3, 3), Pj = MatC::Zero(3, 3);
        Pj(j, j) = 1.0;
        for (int k = 0; k < 3; ++k)
            if (k != j) S(k, k) = 1.0 / (mu[k] - mu[j]);
        MatC A1c = A1.cast<cplx>();
        pp[j] = -(Pj * A1c * S + S * A1c * Pj);
    }
    const MatC Psic = Psi.cast<cplx>();
    for (Branch b : kBranches) {
        MatC G = (pe.P0[int(b)] * V * R0 + R0 * V * pe.P0[int(b)]).cast<cplx>();
        int slot = b == Branch::Bou ? 0 : b == Branch::PlusWave ? 1 : b == Branch::MinusWave ? 2 : -1;
        if (slot >= 0) G -= I_UNIT * (Psic * pp[slot] * Psic.transpose());
        pe.G[int(b)] = G;
    }
    return pe;
}

MatC spectral_projector(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi,
                        std::optional<Branch> target, ProjectorBackend backend, double window, int nodes) {
    PointData pd = point_data(basis, L, xi, window);
    MatC P;
    if (!target) {
        P = sector_projector(pd.odd, pd.odd.hydro, backend, nodes) + sector_projector(pd.even, pd.even.hydro, backend, nodes);
    } else if (*target == Branch::Inc) {
        P = sector_projector(pd.odd, pd.odd.hydro, backend, nodes);
    } else {
        if (pd.r == 0.0) throw Error("Degenerate", "individual branch projectors are undefined at xi = 0");
        P = sector_projector(pd.even, {even_slot(pd, *target)}, backend, nodes);
    }
    newton_idempotent(P);
    return P;
}

ProjectorSet spectral_projectors(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi,
                                 ProjectorBackend backend, double window, int nodes) {
    PointData pd = point_data(basis, L, xi, window);
    if (pd.r == 0.0) throw Error("Degenerate", "individual branch projectors are undefined at xi = 0");
    ProjectorSet ps;
    ps.branch[int(Branch::Inc)] = sector_projector(pd.odd, pd.odd.hydro, backend, nodes);
    for (Branch b : {Branch::Bou, Branch::PlusWave, Branch::MinusWave})
        ps.branch[int(b)] = sector_projector(pd.even, {even_slot(pd, b)}, backend, nodes);
    for (auto& P : ps.branch) ps.newton_applied += newton_idempotent(P) ? 1 : 0;
    ps.total = ps.branch[0] + ps.branch[1] + ps.branch[2] + ps.branch[3];
    return ps;
}

ExpansionCheck projector_expansion_check(const HermiteBasis& basis, const LinearCollisionOperator& L,
                                         const VecR& omega, const std::vector<double>& radii,
                                         ProjectorBackend backend) {
    const int d = basis.dim(), n = basis.size();
    ExpansionCheck ec;
    ec.omega = omega / omega.norm();
    ec.radii = radii;
    std::sort(ec.radii.begin(), ec.radii.end());
    const MatR R0 = reduced_resolvent(basis, L.L);
    ProjectorExpansion pe = projector_expansion(basis, L, ec.omega, R0);
    const int m = int(ec.radii.size());
    for (auto& v : ec.remainder) v.assign(m, 0.0);
    std::vector<ProjectorSet> sets(m);
    parallel_for(m, [&](int i) { sets[i] = spectral_projectors(basis, L, ec.radii[i] * ec.omega, backend); });
    for (int i = 0; i < m; ++i) {
        double r = ec.radii[i];
        for (Branch b : kBranches) {
            const int k = int(b);
            MatC S = sets[i].branch[k] - pe.P0[k].cast<cplx>() - I_UNIT * r * pe.G[k];
            ec.remainder[k][i] = norm2(S);
            if (i == 0) ec.zeroth_gap[k] = norm2(sets[i].branch[k] - pe.P0[k].cast<cplx>());
        }
    }
    for (int k = 0; k < 4; ++k) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < m; ++i) {
            double x = std::log(ec.radii[i]), y = std::log(std::max(ec.remainder[k][i], 1e-300));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        ec.order[k] = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
    }

    // macroscopic characterizations
    ec.psi_bou_norm = hydro_eigenfunctions(basis, ec.omega).psi_bou.norm();
    const double K = basis.K();
    MatR Leray = MatR::Identity(d, d) - ec.omega * ec.omega.transpose();
    double inc_res = 0, bou_res = 0;
    for (int s = 0; s < 4; ++s) {
        VecR f = VecR::Zero(n);
        for (int i = 0; i < n; ++i) f(i) = std::sin(1.3 * i + 0.7 * s + 0.1) / (1.0 + 0.1 * i);
        auto mf = basis.moments(f.cast<cplx>());
        auto mi = basis.moments((pe.P0[0] * f).cast<cplx>());
        inc_res = std::max({inc_res, (mi.u - Leray.cast<cplx>() * mf.u).norm(), std::abs(mi.rho), std::abs(mi.theta)});
        auto mb = basis.moments((pe.P0[1] * f).cast<cplx>());
        cplx th = (mf.theta - (K - 1) * mf.rho) / K;
        bou_res = std::max({bou_res, std::abs(mb.theta - th), std::abs(mb.rho + mb.theta), mb.u.norm()});
    }
    // on ker^perp, P1_Bou f = <f, R0 V psi_Bou> psi_Bou; (I-P) V psi_Bou is a
    // multiple of B.omega, so P1_Bou f = beta <f, L^-1 B.omega> psi_Bou
    std::vector<std::vector<VecR>> A;
    std::vector<VecR> B;
    basis.burnett(A, B);
    VecR Bw = VecR::Zero(n);
    for (int j = 0; j < d; ++j) Bw += ec.omega(j) * B[j];
    VecR g = basis.v_dot(ec.omega) * hydro_eigenfunctions(basis, ec.omega).psi_bou;
    g -= basis.P() * g;
    ec.bou_first_order_factor = g.dot(Bw) / Bw.squaredNorm();
    ec.bou_first_order_residual = (g - ec.bou_first_order_factor * Bw).norm();
    ec.inc_moment_residual = inc_res;
    ec.bou_moment_residual = bou_res;
    return ec;
}

KatoReport kato_rectified(const HermiteBasis& basis, const LinearCollisionOperator& L, const VecR& xi,
                          double window) {
    const int d = basis.dim(), n = basis.size();
    KatoReport kr;
    const double r = xi.norm();
    const VecR omega = direction_of(xi, d);
    const MatR R0 = reduced_resolvent(basis, L.L);
    ProjectorExpansion pe = projector_expansion(basis, L, omega, R0);
    const MatC P = basis.P().cast<cplx>();
    const MatC Id = MatC::Identity(n, n);
    MatC Pxi = r == 0.0 ? P : spectral_projector(basis, L, xi, std::nullopt, ProjectorBackend::Contour, window);
    MatC D = Pxi - P;
    MatC D2 = D * D;
    kr.square_norm = norm2(D2);
    if (kr.square_norm >= 1.0) throw Error("SquareRootDomain", "||(P(xi) - P)^2|| >= 1");
    // (I - D^2)^{-1/2} by its binomial series; D^2 has nilpotent parts so an
    // eigen-decomposition of I - D^2 can be defective
    MatC isq = Id, term = Id;
    for (int k = 1; k < 200; ++k) {
        term = term * D2 * ((k - 0.5) / k);
        isq += term;
        if (term.norm() < 1e-17) break;
    }
    MatC U = isq * (Pxi * P + (Id - Pxi) * (Id - P));
    MatC M = L.L.cast<cplx>() - I_UNIT * basis.v_dot(xi).cast<cplx>();
    const MatC Bc = pe.basis_cols.cast<cplx>();
    Eigen::PartialPivLU<MatC> lu(U);
    kr.Lhat = Bc.adjoint() * lu.solve(M * (U * Bc));
    const double nrm = kr.Lhat.norm();
    double off = 0;
    for (int i = 0; i < d + 2; ++i)
        for (int j = 0; j < d + 2; ++j)
            if ((i < d - 1) != (j < d - 1)) off += std::norm(kr.Lhat(i, j));
    kr.off_block = nrm > 0 ? std::sqrt(off) / nrm : 0.0;
    if (r > 0) {
        HydroPoint hp = analyze_point(basis, L, xi, window);
        MatC blk = kr.Lhat.topLeftCorner(d - 1, d - 1) - hp.lambda(Branch::Inc) * MatC::Identity(d - 1, d - 1);
        kr.inc_identity_dev = blk.norm();
        for (int k = 0; k < 3; ++k) kr.first_order[k] = kr.Lhat(d - 1 + k, d - 1 + k).imag() / r;
    }
    return kr;
}

DecayReport decay_and_resolvent_scan(const HermiteBasis& basis, const LinearCollisionOperator& L,
                                     const std::vector<VecR>& xis, const std::vector<double>& t_grid,
                                     const std::vector<double>& z_imag, double alpha0, double window) {
    DecayReport rep;
    rep.t_grid = t_grid;
    const int nx = int(xis.size()), nt = int(t_grid.size());
    rep.norms.assign(nx, std::vector<double>(nt, 0.0));
    std::vector<EigenDecomp> eds(nx);
    std::vector<std::vector<int>> kin(nx);
    parallel_for(nx, [&](int i) {
        MatC M = L.L.cast<cplx>() - I_UNIT * basis.v_dot(xis[i]).cast<cplx>();
        eds[i] = eigen_decompose(M);
        bool remove = xis[i].norm() <= alpha0;
        for (int k = 0; k < eds[i].lambda.size(); ++k)
            if (!(remove && eds[i].lambda(k).real() > -window)) kin[i].push_back(k);
        const auto& e = eds[i];
        for (int j = 0; j < nt; ++j) {
            const double t = t_grid[j];
            rep.norms[i][j] = norm2(restricted(e, kin[i], [t](cplx l) { return std::exp(t * l); }));
        }
    });
    rep.envelope.assign(nt, 0.0);
    for (int j = 0; j < nt; ++j)
        for (int i = 0; i < nx; ++i) rep.envelope[j] = std::max(rep.envelope[j], rep.norms[i][j]);
    // rate from the late half of the envelope
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (int j = nt / 2; j < nt; ++j) {
        if (rep.envelope[j] <= 0) continue;
        double x = t_grid[j], y = std::log(rep.envelope[j]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++k;
    }
    rep.sigma0 = k >= 2 ? -(k * sxy - sx * sy) / (k * sxx - sx * sx) : 0.0;
    for (int j = 0; j < nt; ++j) rep.C = std::max(rep.C, rep.envelope[j] * std::exp(rep.sigma0 * t_grid[j]));
    // resolvent on the line Re z = -sigma0/2
    std::vector<double> rs(nx, 0.0);
    parallel_for(nx, [&](int i) {
        const auto& e = eds[i];
        for (double y : z_imag) {
            cplx z(-0.5 * rep.sigma0, y);
            rs[i] = std::max(rs[i], norm2(restricted(e, kin[i], [z](cplx l) { return 1.0 / (z - l); })));
        }
    });
    for (double v : rs) rep.resolvent_sup = std::max(rep.resolvent_sup, v);
    return rep;
}

void write_branch_csv(std::ostream& os, const HydroSpectrum& spec) {
    os << "|xi|,dir_index,branch,re_lambda,im_lambda,gap,proj_rank,remainder_norm\n";
    os.precision(12);
    int fit_row = 0;
    for (const auto& p : spec.points) {
        if (!p.error.empty()) continue;
        bool in_fit = spec.fitted && p.dir == 0 && p.r > 0;
        for (Branch b : kBranches) {
            cplx l = p.lambda(b);
            int rank = b == Branch::Inc ? int(p.inc.size()) : 1;
            os << p.r << ',' << p.dir << ',' << branch_name(b) << ',' << l.real() << ',' << l.imag() << ',' << p.gap
               << ',' << rank << ',';
            if (in_fit) os << spec.fits[int(b)].remainder[fit_row];
            os << '\n';
        }
        if (in_fit) ++fit_row;
    }
}

}  // namespace kinspec
