#include "kinspec/field.hpp"

#include <cmath>

namespace kinspec {

MacroField zero_macro(const Lattice& lat) {
    MacroField m;
    m.lat = &lat;
    m.rho = VecC::Zero(lat.size());
    m.theta = VecC::Zero(lat.size());
    m.u = MatC::Zero(lat.size(), lat.dim());
    return m;
}

KineticField zero_kinetic(const Lattice& lat, const HermiteBasis& basis) {
    KineticField f;
    f.lat = &lat;
    f.basis = &basis;
    f.data = MatCRow::Zero(lat.size(), basis.size());
    return f;
}

double hs_norm(const KineticField& f, double s) {
    double acc = 0;
    for (int i = 0; i < f.lat->size(); ++i) acc += f.lat->bracket(i, s) * f.data.row(i).squaredNorm();
    return std::sqrt(acc);
}

double hs_norm_weighted(const KineticField& f, const MatR& W, double s) {
    double acc = 0;
    const MatC Wc = W.cast<cplx>();
    for (int i = 0; i < f.lat->size(); ++i) {
        VecC r = f.data.row(i).transpose();
        acc += f.lat->bracket(i, s) * std::real(r.dot(Wc * r));
    }
    return std::sqrt(std::max(acc, 0.0));
}

double hs_norm(const MacroField& m, double s) {
    double acc = 0;
    for (int i = 0; i < m.lat->size(); ++i) acc += m.lat->bracket(i, s) * m.u.row(i).squaredNorm();
    return std::sqrt(acc);
}

KineticField lift_to_kinetic(const HermiteBasis& basis, const MacroField& m) {
    KineticField f = zero_kinetic(*m.lat, basis);
    f.t = m.t;
    for (int i = 0; i < m.lat->size(); ++i) {
        MacroMoments mm{m.rho(i), m.u.row(i).transpose(), m.theta(i)};
        f.data.row(i) = basis.macro(mm).transpose();
    }
    return f;
}

MacroField moments_of(const HermiteBasis& basis, const KineticField& f) {
    MacroField m = zero_macro(*f.lat);
    m.t = f.t;
    for (int i = 0; i < f.lat->size(); ++i) {
        auto mm = basis.moments(f.data.row(i).transpose());
        m.rho(i) = mm.rho;
        m.u.row(i) = mm.u.transpose();
        m.theta(i) = mm.theta;
    }
    return m;
}

MacroField well_prepared_init(const HermiteBasis& basis, const KineticField& f) {
    const double K = basis.K();
    MacroField m = moments_of(basis, f);
    for (int i = 0; i < f.lat->size(); ++i) {
        VecR k = f.lat->k(i);
        double k2 = k.squaredNorm();
        if (k2 > 0) {
            VecC u = m.u.row(i).transpose();
            VecC ku = (k.cast<cplx>() * (k.cast<cplx>().dot(u))) / k2;
            m.u.row(i) = (u - ku).transpose();
        }
        cplx th = (m.theta(i) - (K - 1) * m.rho(i)) / K;
        m.theta(i) = th;
        m.rho(i) = -th;
    }
    return m;
}

void dealias(const Lattice& lat, MatCRow& f) {
    for (int i = 0; i < lat.size(); ++i)
        if (!lat.kept(i)) f.row(i).setZero();
}
void dealias(const Lattice& lat, VecC& f) {
    for (int i = 0; i < lat.size(); ++i)
        if (!lat.kept(i)) f(i) = 0.0;
}
void dealias(const Lattice& lat, MatC& f) {
    for (int i = 0; i < lat.size(); ++i)
        if (!lat.kept(i)) f.row(i).setZero();
}

NonlinearEvaluator::NonlinearEvaluator(const Lattice& lat, const HermiteBasis& basis,
                                       const BilinearCollisionOperator& Q)
    : lat_(lat),
      Q_(Q),
      nvel_(basis.size()),
      r_(Q.rank()),
      npairs_(Q.rank() * (Q.rank() + 1) / 2),
      to_grid_(lat, Q.rank()),
      to_modes_(lat, Q.rank() * (Q.rank() + 1) / 2) {
    pair_tensor_.resize(nvel_, npairs_);
    int p = 0;
    for (int a = 0; a < r_; ++a)
        for (int b = a; b < r_; ++b, ++p) pair_tensor_.col(p) = (a == b ? 1.0 : 2.0) * Q.tensor(a, b);
}

MatCRow NonlinearEvaluator::operator()(const MatCRow& f, double scale) const {
    const int M = lat_.size();
    // functionals per mode: (M x nvel) * (nvel x r)
    MatCRow lf = f * Q_.functionals.transpose().cast<cplx>();
    MatCRow grid(M, r_);
    to_grid_.to_grid(lf.data(), grid.data());
    MatCRow prod(M, npairs_);
    for (int i = 0; i < M; ++i) {
        int p = 0;
        for (int a = 0; a < r_; ++a)
            for (int b = a; b < r_; ++b, ++p) prod(i, p) = grid(i, a) * grid(i, b);
    }
    MatCRow phat(M, npairs_);
    to_modes_.to_modes(prod.data(), phat.data());
    MatCRow out = (scale * Q_.scale) * (phat * pair_tensor_.transpose().cast<cplx>());
    dealias(lat_, out);
    return out;
}

}  // namespace kinspec
