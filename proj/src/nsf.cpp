#include "kinspec/nsf.hpp"

#include <array>
#include <cmath>

#include "kinspec/parallel.hpp"
#include "kinspec/spectral.hpp"

namespace kinspec {

void leray_project(const Lattice& lat, MatC& u) {
    for (int i = 0; i < lat.size(); ++i) {
        VecR k = lat.k(i);
        double k2 = k.squaredNorm();
        if (k2 == 0.0) continue;
        VecC ui = u.row(i).transpose();
        cplx kd = k.cast<cplx>().dot(ui);
        u.row(i) = (ui - k.cast<cplx>() * (kd / k2)).transpose();
    }
}

NSFConfig nsf_config_from(const TransportCoefficients& tc, double dt, NSFScheme scheme) {
    NSFConfig c;
    c.kappa_inc = tc.kappa_inc;
    c.kappa_bou = tc.kappa_bou;
    c.theta_inc = tc.has_thetas ? tc.theta_inc : 1.0;
    c.theta_bou = tc.has_thetas ? tc.theta_bou : 1.0;
    c.dt = dt;
    c.scheme = scheme;
    return c;
}

namespace {

class NSFRhs {
public:
    NSFRhs(const Lattice& lat, const NSFConfig& cfg)
        : lat_(lat), cfg_(cfg), d_(lat.dim()), grid_(lat, lat.dim() + 1), modes_(lat, lat.dim() * (lat.dim() + 1) / 2 + lat.dim()) {}

    // S: modes x (d+1) = (u_1..u_d, theta)
    MatCRow operator()(const MatCRow& S) const {
        const int M = lat_.size(), d = d_;
        const int np = d * (d + 1) / 2 + d;
        MatCRow g(M, d + 1);
        grid_.to_grid(S.data(), g.data());
        MatCRow prod(M, np);
        for (int i = 0; i < M; ++i) {
            int p = 0;
            for (int a = 0; a < d; ++a)
                for (int b = a; b < d; ++b) prod(i, p++) = g(i, a) * g(i, b);
            for (int a = 0; a < d; ++a) prod(i, p++) = g(i, a) * g(i, d);
        }
        MatCRow hat(M, np);
        modes_.to_modes(prod.data(), hat.data());
        MatCRow out = MatCRow::Zero(M, d + 1);
        auto pair = [d](int a, int b) {
            if (a > b) std::swap(a, b);
            return a * d - a * (a - 1) / 2 + (b - a);
        };
        for (int i = 0; i < M; ++i) {
            if (cfg_.dealias && !lat_.kept(i)) continue;
            VecR k = lat_.k(i);
            double k2 = k.squaredNorm();
            VecC nu = VecC::Zero(d);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) nu(a) += -cfg_.theta_inc * I_UNIT * k(b) * hat(i, pair(a, b));
            if (k2 > 0) nu -= k.cast<cplx>() * (k.cast<cplx>().dot(nu) / k2);
            cplx nt = 0;
            for (int b = 0; b < d; ++b) nt += -cfg_.theta_bou * I_UNIT * k(b) * hat(i, d * (d + 1) / 2 + b);
            out.row(i).head(d) = nu.transpose();
            out(i, d) = nt;
        }
        return out;
    }

private:
    const Lattice& lat_;
    const NSFConfig& cfg_;
    int d_;
    FFT grid_, modes_;
};

MatCRow pack(const MacroField& m) {
    const int d = m.lat->dim();
    MatCRow S(m.lat->size(), d + 1);
    S.leftCols(d) = m.u;
    S.col(d) = m.theta;
    return S;
}

MacroField unpack(const Lattice& lat, const MatCRow& S, double t) {
    const int d = lat.dim();
    MacroField m = zero_macro(lat);
    m.t = t;
    m.u = S.leftCols(d);
    m.theta = S.col(d);
    m.rho = -m.theta;
    return m;
}

// quadrature weights for uniform samples: Simpson, 3/8 on the tail when odd
std::vector<double> simpson_weights(int intervals, double h) {
    std::vector<double> w(intervals + 1, 0.0);
    if (intervals == 1) {
        w[0] = w[1] = h / 2;
        return w;
    }
    int simp = intervals % 2 == 0 ? intervals : intervals - 3;
    for (int i = 0; i < simp; i += 2) {
        w[i] += h / 3;
        w[i + 1] += 4 * h / 3;
        w[i + 2] += h / 3;
    }
    if (simp != intervals) {
        int i = simp;
        w[i] += 3 * h / 8;
        w[i + 1] += 9 * h / 8;
        w[i + 2] += 9 * h / 8;
        w[i + 3] += 3 * h / 8;
    }
    return w;
}

}  // namespace

NSFTrajectory nsf_integrate(const MacroField& init, const NSFConfig& cfg, double T_end) {
    const Lattice& lat = *init.lat;
    const int M = lat.size(), d = lat.dim();
    NSFRhs N(lat, cfg);
    NSFTrajectory tr;
    const int steps = std::max(1, int(std::llround(T_end / cfg.dt)));
    const double h = T_end / steps;

    MatCRow S = pack(init);
    if (cfg.dealias)
        for (int i = 0; i < M; ++i)
            if (!lat.kept(i)) S.row(i).setZero();
    VecR kap(d + 1);
    kap.head(d).setConstant(cfg.kappa_inc);
    kap(d) = cfg.kappa_bou;
    MatCRow E(M, d + 1), Eh(M, d + 1);
    for (int i = 0; i < M; ++i)
        for (int a = 0; a <= d; ++a) {
            E(i, a) = std::exp(-kap(a) * lat.k2(i) * h);
            Eh(i, a) = std::exp(-kap(a) * lat.k2(i) * h / 2);
        }
    auto energy = [&](const MatCRow& X) { return X.leftCols(d).squaredNorm(); };
    auto dissip = [&](const MatCRow& X) {
        double acc = 0;
        for (int i = 0; i < M; ++i) acc += lat.k2(i) * X.row(i).head(d).squaredNorm();
        return acc;
    };
    const int zero = lat.index({0, 0, 0});
    const MatCRow S0 = S;

    auto record = [&](double t, int step) {
        tr.times.push_back(t);
        tr.energy.push_back(energy(S));
        tr.dissipation.push_back(dissip(S));
        if (step % cfg.record_every == 0 || step == steps) tr.states.push_back(unpack(lat, S, t));
    };
    record(0.0, 0);
    for (int n = 1; n <= steps; ++n) {
        if (cfg.scheme == NSFScheme::IFRK2) {
            MatCRow k1 = N(S);
            MatCRow a = E.cwiseProduct(S + h * k1);
            MatCRow k2 = N(a);
            S = E.cwiseProduct(S + (h / 2) * k1) + (h / 2) * k2;
        } else {
            MatCRow a = N(S);
            MatCRow u1 = Eh.cwiseProduct(S + (h / 2) * a);
            MatCRow b = N(u1);
            MatCRow u2 = Eh.cwiseProduct(S) + (h / 2) * b;
            MatCRow c = N(u2);
            MatCRow u3 = E.cwiseProduct(S) + h * Eh.cwiseProduct(c);
            MatCRow dd = N(u3);
            S = E.cwiseProduct(S) + (h / 6) * (E.cwiseProduct(a) + 2.0 * Eh.cwiseProduct(b + c) + dd);
        }
        double hs = 0;
        for (int i = 0; i < M; ++i) hs += lat.bracket(i, cfg.s) * S.row(i).head(d).squaredNorm();
        if (!(std::sqrt(hs) <= cfg.blowup))
            throw Error("Blowup", "||u||_{H^s} exceeded " + std::to_string(cfg.blowup) + " at t = " +
                                      std::to_string(n * h));
        record(n * h, n);
    }
    auto w = simpson_weights(steps, h);
    double integral = 0;
    for (int n = 0; n <= steps; ++n) integral += w[n] * tr.dissipation[n];
    tr.energy_balance = std::abs(tr.energy.back() + 2 * cfg.kappa_inc * integral - tr.energy.front());
    for (const auto& st : tr.states) {
        const double scale = st.u.rowwise().norm().maxCoeff();
        for (int i = 0; i < M; ++i) {
            VecR k = lat.k(i);
            double kn = k.norm();
            if (scale > 0 && kn > 0)
                tr.max_divergence = std::max(
                    tr.max_divergence, std::abs(k.cast<cplx>().dot(st.u.row(i).transpose())) / (kn * scale));
            tr.max_boussinesq = std::max(tr.max_boussinesq, std::abs(st.rho(i) + st.theta(i)));
        }
    }
    if (zero >= 0) tr.mean_drift = (S.row(zero) - S0.row(zero)).norm();
    return tr;
}

std::vector<double> duhamel_residual(const HermiteBasis& basis, const LinearCollisionOperator& L,
                                     const BilinearCollisionOperator& Q, const TransportCoefficients& tc,
                                     const std::vector<MacroField>& states, double s) {
    const Lattice& lat = *states.front().lat;
    const int M = lat.size(), n = basis.size(), J = int(states.size());
    const double h = J > 1 ? states[1].t - states[0].t : 0.0;
    const MatR R0 = reduced_resolvent(basis, L.L);
    NonlinearEvaluator Nq(lat, basis, Q);

    std::vector<MatCRow> qhat(J);
    std::vector<KineticField> lifted;
    for (int j = 0; j < J; ++j) {
        lifted.push_back(lift_to_kinetic(basis, states[j]));
        qhat[j] = Nq(lifted[j].data, 1.0);
    }
    std::vector<std::vector<double>> per_mode(M, std::vector<double>(J, 0.0));
    parallel_for(M, [&](int i) {
        if (!lat.kept(i)) return;
        VecR k = lat.k(i);
        double k2 = k.squaredNorm(), kn = std::sqrt(k2);
        VecC f0 = lifted[0].data.row(i).transpose();
        if (kn == 0.0) {
            VecC rhs = basis.P().cast<cplx>() * f0;
            for (int j = 0; j < J; ++j)
                per_mode[i][j] = (VecC(lifted[j].data.row(i).transpose()) - rhs).squaredNorm();
            return;
        }
        ProjectorExpansion pe = projector_expansion(basis, L, k / kn, R0);
        const Branch br[2] = {Branch::Inc, Branch::Bou};
        const double kap[2] = {tc.kappa_inc, tc.kappa_bou};
        std::vector<std::array<VecC, 2>> a(J);
        for (int j = 0; j < J; ++j)
            for (int b = 0; b < 2; ++b)
                a[j][b] = (I_UNIT * kn) * (pe.G[int(br[b])] * VecC(qhat[j].row(i).transpose()));
        std::array<VecC, 2> p0f;
        for (int b = 0; b < 2; ++b) p0f[b] = pe.P0[int(br[b])].cast<cplx>() * f0;
        for (int m = 0; m < J; ++m) {
            const double t = states[m].t;
            VecC rhs = VecC::Zero(n);
            for (int b = 0; b < 2; ++b) {
                rhs += std::exp(-t * kap[b] * k2) * p0f[b];
                for (int j = 0; j <= m && m > 0; ++j) {
                    double w = (j == 0 || j == m) ? h / 2 : h;
                    rhs += w * std::exp(-(t - states[j].t) * kap[b] * k2) * a[j][b];
                }
            }
            per_mode[i][m] = (VecC(lifted[m].data.row(i).transpose()) - rhs).squaredNorm();
        }
    });
    std::vector<double> out(J, 0.0);
    for (int j = 0; j < J; ++j) {
        double acc = 0;
        for (int i = 0; i < M; ++i) acc += lat.bracket(i, s) * per_mode[i][j];
        out[j] = std::sqrt(acc);
    }
    return out;
}

}  // namespace kinspec
