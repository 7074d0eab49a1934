#include "kinspec/kinetic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <ostream>

#include "kinspec/parallel.hpp"

namespace kinspec {

namespace {
// Taylor series is used for |z| < 1: the closed forms lose digits there
// (e^z - 1 - z over z^2 cancels badly well above the usual 1e-6 cutoff).
cplx phi_series(cplx z, int k0) {
    // sum_j z^j / (j + k0)!
    cplx term = 1.0, acc = 0.0;
    double fact = 1.0;
    for (int j = 1; j <= k0; ++j) fact *= j;
    term = 1.0 / fact;
    for (int j = 0; j < 30; ++j) {
        acc += term;
        term *= z / double(j + 1 + k0);
        if (std::abs(term) < 1e-18 * std::abs(acc)) break;
    }
    return acc;
}
}  // namespace

cplx phi1(cplx z) {
    if (std::abs(z) < 1.0) return phi_series(z, 1);
    return (std::exp(z) - 1.0) / z;
}

cplx phi2(cplx z) {
    if (std::abs(z) < 1.0) return phi_series(z, 2);
    return (std::exp(z) - 1.0 - z) / (z * z);
}

namespace {

struct ModeStep {
    MatC E, P1, P2;  // e^{hA}, h phi1(hA), h phi2(hA)
};

ModeStep mode_step(const ModePropagator& mp, double h) {
    const auto& ed = mp.decomp();
    const int n = int(ed.lambda.size());
    const VecC z = mp.rates() * h;
    VecC e(n), p1(n), p2(n);
    for (int i = 0; i < n; ++i) {
        e(i) = std::exp(z(i));
        p1(i) = h * phi1(z(i));
        p2(i) = h * phi2(z(i));
    }
    ModeStep s;
    s.E = ed.V * e.asDiagonal() * ed.Vinv;
    s.P1 = ed.V * p1.asDiagonal() * ed.Vinv;
    s.P2 = ed.V * p2.asDiagonal() * ed.Vinv;
    return s;
}

}  // namespace

KineticTrajectory kinetic_integrate(const KineticField& f_ini, const LinearCollisionOperator& L,
                                    const BilinearCollisionOperator& Q, const SolverConfig& cfg, double T_end) {
    const Lattice& lat = *f_ini.lat;
    const HermiteBasis& basis = *f_ini.basis;
    if (Q.functionals.cols() != basis.size() || L.L.rows() != basis.size())
        throw Error("Mismatch", "operators and field use different velocity bases");
    const int M = lat.size();
    const int steps = std::max(1, int(std::llround(T_end / cfg.dt)));
    const double h = T_end / steps;

    std::vector<int> active;
    for (int i = 0; i < M; ++i)
        if (!cfg.dealias || lat.kept(i)) active.push_back(i);
    std::vector<ModeStep> ops(active.size());
    parallel_for(int(active.size()), [&](int a) {
        ModePropagator mp(basis, L, lat.k(active[a]), cfg.eps);
        ops[a] = mode_step(mp, h);
    });

    NonlinearEvaluator N(lat, basis, Q);
    auto nonlin = [&](const MatCRow& f) -> MatCRow {
        if (!cfg.nonlinear) return MatCRow::Zero(f.rows(), f.cols());
        return N(f, 1.0 / cfg.eps);
    };

    KineticField f = f_ini;
    f.eps = cfg.eps;
    if (cfg.dealias) dealias(lat, f.data);
    const int zero = lat.index({0, 0, 0});
    const VecC P0init = basis.P().cast<cplx>() * VecC(f.data.row(zero).transpose());

    KineticTrajectory tr;
    auto record = [&](int step) {
        tr.times.push_back(f.t);
        tr.norm.push_back(hs_norm(f, cfg.s));
        VecC p0 = basis.P().cast<cplx>() * VecC(f.data.row(zero).transpose());
        tr.conservation_drift = std::max(tr.conservation_drift, (p0 - P0init).norm());
        if (step % cfg.record_every == 0 || step == steps) tr.states.push_back(f);
    };
    record(0);
    const double limit = cfg.c0 / cfg.eps;
    for (int n = 1; n <= steps; ++n) {
        MatCRow Nu = nonlin(f.data);
        MatCRow a(M, basis.size());
        a.setZero();
        parallel_for(int(active.size()), [&](int k) {
            const int i = active[k];
            VecC u = f.data.row(i).transpose();
            a.row(i) = (ops[k].E * u + ops[k].P1 * VecC(Nu.row(i).transpose())).transpose();
        });
        if (cfg.scheme == ETDScheme::RK2) {
            MatCRow Na = nonlin(a);
            parallel_for(int(active.size()), [&](int k) {
                const int i = active[k];
                VecC diff = (Na.row(i) - Nu.row(i)).transpose();
                a.row(i) += (ops[k].P2 * diff).transpose();
            });
        }
        f.data = std::move(a);
        f.t = n * h;
        double nr = hs_norm(f, cfg.s);
        if (!(nr <= limit))
            throw Error("Blowup", "||f|| = " + std::to_string(nr) + " exceeded c0/eps at t = " + std::to_string(f.t));
        record(n);
    }
    return tr;
}

double Decomposition::sup_err() const {
    double m = 0;
    for (const auto& r : rows) m = std::max(m, r.norm_err);
    return m;
}

double Decomposition::sup_disp() const {
    double m = 0;
    for (const auto& r : rows) m = std::max(m, r.norm_disp);
    return m;
}

Decomposition decompose_solution(const KineticTrajectory& traj, const KineticField& f_ini,
                                 const LinearCollisionOperator& L, const TransportCoefficients& tc,
                                 const NSFTrajectory& nsf, const DecomposeOptions& opt) {
    const Lattice& lat = *f_ini.lat;
    const HermiteBasis& basis = *f_ini.basis;
    const int M = lat.size(), n = basis.size();
    if (traj.states.empty() || traj.states.front().lat->size() != M || traj.states.front().data.cols() != n)
        throw Error("Mismatch", "trajectory and initial data use different lattices or bases");
    const double eps = traj.states.front().eps;

    // the NSF states that line up with the kinetic snapshots
    std::vector<const MacroField*> ns(traj.states.size(), nullptr);
    for (size_t j = 0; j < traj.states.size(); ++j) {
        double t = traj.states[j].t;
        for (const auto& st : nsf.states)
            if (std::abs(st.t - t) <= 1e-9 * std::max(1.0, t)) ns[j] = &st;
        if (!ns[j]) throw Error("Mismatch", "no NSF state at t = " + std::to_string(t));
        if (ns[j]->lat->size() != M) throw Error("Mismatch", "NSF lattice differs");
    }

    const MatR R0 = reduced_resolvent(basis, L.L);
    std::vector<ProjectorExpansion> pe(M);
    std::vector<std::unique_ptr<ModePropagator>> mp(M);
    // 1: closed-form hydrodynamic parts, 0: purely kinetic (cutoff or no clean cluster), -1: no data
    std::vector<int> kind(M, -1);
    parallel_for(M, [&](int i) {
        if (f_ini.data.row(i).squaredNorm() == 0.0) return;
        VecR k = lat.k(i);
        double kn = k.norm();
        mp[i] = std::make_unique<ModePropagator>(basis, L, k, eps);
        kind[i] = 0;
        if (eps * kn > opt.alpha0) return;
        try {
            mp[i]->apply_kinetic(0.0, VecC::Zero(n), opt.alpha0, opt.window);
        } catch (const Error& e) {
            if (e.kind() != "BranchCount") throw;
            return;
        }
        if (kn > 0) pe[i] = projector_expansion(basis, L, k / kn, R0);
        kind[i] = 1;
    });

    Decomposition dec;
    dec.eps = eps;
    for (int i = 0; i < M; ++i) dec.kinetic_only_modes += kind[i] == 0;
    const MatR& W = L.W;
    for (size_t j = 0; j < traj.states.size(); ++j) {
        const KineticField& f = traj.states[j];
        const double t = f.t;
        KineticField fns = lift_to_kinetic(basis, *ns[j]);
        KineticField disp = zero_kinetic(lat, basis), kin = zero_kinetic(lat, basis), err = zero_kinetic(lat, basis),
                     gap = zero_kinetic(lat, basis);
        parallel_for(M, [&](int i) {
            VecC f0 = f_ini.data.row(i).transpose();
            VecR k = lat.k(i);
            VecC dd = VecC::Zero(n), kk = VecC::Zero(n);
            if (kind[i] == 1) {
                if (k.norm() > 0) dd = limit_semigroups(basis, pe[i], tc, k, t, eps).U_disp * f0;
                kk = mp[i]->apply_kinetic(t, f0, opt.alpha0, opt.window);
            } else if (kind[i] == 0) {
                kk = mp[i]->apply(t, f0);
            }
            VecC g = (f.data.row(i) - fns.data.row(i)).transpose();
            disp.data.row(i) = dd.transpose();
            kin.data.row(i) = kk.transpose();
            gap.data.row(i) = g.transpose();
            err.data.row(i) = (g - dd - kk).transpose();
        });
        DecompositionRow r;
        r.t = t;
        r.norm_total = hs_norm(f, opt.s);
        r.norm_ns_gap = hs_norm(gap, opt.s);
        r.norm_disp = hs_norm(disp, opt.s);
        r.norm_kin = hs_norm(kin, opt.s);
        r.norm_err = hs_norm(err, opt.s);
        r.ssp_ns_gap = hs_norm_weighted(gap, W, opt.s);
        r.ssp_disp = hs_norm_weighted(disp, W, opt.s);
        r.ssp_kin = hs_norm_weighted(kin, W, opt.s);
        r.ssp_err = hs_norm_weighted(err, W, opt.s);
        dec.rows.push_back(r);
    }
    return dec;
}

void write_decomposition_csv(std::ostream& os, const Decomposition& dec, bool header) {
    if (header) os << "t,eps,norm_total,norm_ns_gap,norm_disp,norm_kin,norm_err\n";
    char buf[256];
    for (const auto& r : dec.rows) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12e,%.12e,%.12e,%.12e,%.12e\n", r.t, dec.eps, r.norm_total,
                      r.norm_ns_gap, r.norm_disp, r.norm_kin, r.norm_err);
        os << buf;
    }
}

namespace {

template <class T>
void put_le(std::ostream& os, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw Error("Snapshot", "truncated file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

}  // namespace

void write_snapshot(const std::string& path, const KineticField& f, int order) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("Snapshot", "cannot open " + path);
    const Lattice& lat = *f.lat;
    put_le<std::int32_t>(os, lat.dim());
    put_le<std::int32_t>(os, order);
    for (int j = 0; j < lat.dim(); ++j) put_le<std::int32_t>(os, lat.n());
    put_le<double>(os, f.eps);
    put_le<double>(os, f.t);
    for (int i = 0; i < f.data.rows(); ++i)
        for (int a = 0; a < f.data.cols(); ++a) {
            put_le<float>(os, float(f.data(i, a).real()));
            put_le<float>(os, float(f.data(i, a).imag()));
        }
}

KineticField read_snapshot(const std::string& path, const Lattice& lat, const HermiteBasis& basis) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("Snapshot", "cannot open " + path);
    int d = get_le<std::int32_t>(is), N = get_le<std::int32_t>(is);
    if (d != lat.dim() || N != basis.degree()) throw Error("Mismatch", "snapshot header does not match basis/lattice");
    for (int j = 0; j < d; ++j)
        if (get_le<std::int32_t>(is) != lat.n()) throw Error("Mismatch", "snapshot lattice size differs");
    KineticField f = zero_kinetic(lat, basis);
    f.eps = get_le<double>(is);
    f.t = get_le<double>(is);
    for (int i = 0; i < f.data.rows(); ++i)
        for (int a = 0; a < f.data.cols(); ++a) {
            float re = get_le<float>(is), im = get_le<float>(is);
            f.data(i, a) = cplx(re, im);
        }
    return f;
}

}  // namespace kinspec
