#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "doctest.h"
#include "kinspec/kinetic.hpp"

using namespace kinspec;

namespace {

VecC random_vector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    VecC f(n);
    for (int i = 0; i < n; ++i) f(i) = cplx(g(rng), g(rng));
    return f;
}

// smooth real field: low modes, Hermitian symmetric, macroscopic plus a
// microscopic part of relative size `micro`
KineticField smooth_field(const Lattice& lat, const HermiteBasis& b, double amp, double micro, unsigned seed) {
    std::mt19937_64 rng(seed);
    KineticField f = zero_kinetic(lat, b);
    for (int i = 0; i < lat.size(); ++i) {
        auto m = lat.mode(i);
        int mx = 0;
        for (int j = 0; j < lat.dim(); ++j) mx = std::max(mx, std::abs(m[j]));
        if (mx > 1) continue;
        int c = lat.conj_index(i);
        if (c < i) continue;
        VecC x = random_vector(b.size(), rng);
        VecC v = b.project_P(x) + micro * (x - b.project_P(x));
        v *= amp / (1.0 + mx);
        if (c == i) v = v.real().cast<cplx>();
        f.data.row(i) = v.transpose();
        f.data.row(c) = v.conjugate().transpose();
    }
    return f;
}

struct Bgk {
    HermiteBasis basis;
    LinearCollisionOperator L;
    BilinearCollisionOperator Q;
    Bgk(int d, int N) : basis(d, N), L(bgk_linear(basis, 1.0)), Q(bgk_quadratic(basis, 1.0)) {}
};

}  // namespace

TEST_CASE("phi functions") {
    for (cplx z : {cplx(1e-9, 0), cplx(-0.3, 0.2), cplx(0.999, 0), cplx(1.001, 0), cplx(-5, 3), cplx(-80, 0)}) {
        cplx p1 = std::abs(z) > 1e-3 ? (std::exp(z) - 1.0) / z : 1.0 + z / 2.0;
        CHECK(std::abs(phi1(z) - p1) <= 1e-12 * (1 + std::abs(p1)));
        if (std::abs(z) > 0.2) {
            cplx p2 = (std::exp(z) - 1.0 - z) / (z * z);
            CHECK(std::abs(phi2(z) - p2) <= 1e-12 * (1 + std::abs(p2)));
        }
    }
    CHECK(std::abs(phi2(cplx(1e-8, 0)) - 0.5) <= 1e-8);
    CHECK(std::abs(phi1(cplx(0.99999999)) - phi1(cplx(1.00000001))) <= 1e-7);
}

TEST_CASE("linear flow matches propagator") {
    Bgk S(2, 5);
    Lattice lat(2, 8);
    std::mt19937_64 rng(2);
    KineticField f = zero_kinetic(lat, S.basis);
    int i = lat.index({1, -2, 0});
    VecC v = random_vector(S.basis.size(), rng);
    f.data.row(i) = v.transpose();
    SolverConfig cfg;
    cfg.eps = 0.07;
    cfg.nonlinear = false;
    for (double dt : {0.5, 0.013}) {
        cfg.dt = dt;
        auto tr = kinetic_integrate(f, S.L, S.Q, cfg, 1.0);
        VecC ex = propagate(S.basis, S.L, lat.k(i), cfg.eps, 1.0, v);
        VecC got = tr.states.back().data.row(i).transpose();
        CHECK((got - ex).norm() <= 1e-10 * v.norm());
        CHECK(tr.states.back().data.norm() == doctest::Approx(got.norm()).epsilon(1e-14));
    }
}

TEST_CASE("conservation and reality") {
    Bgk S(2, 4);
    Lattice lat(2, 8);
    KineticField f = smooth_field(lat, S.basis, 0.4, 0.5, 3);
    SolverConfig cfg;
    cfg.eps = 0.1;
    cfg.dt = 0.01;
    cfg.record_every = 100;
    auto tr = kinetic_integrate(f, S.L, S.Q, cfg, 1.0);
    CHECK(tr.conservation_drift <= 1e-8);
    const auto& last = tr.states.back();
    for (int i = 0; i < lat.size(); ++i) {
        int c = lat.conj_index(i);
        CHECK((last.data.row(i) - last.data.row(c).conjugate()).norm() <= 1e-12);
    }
}

TEST_CASE("second order in dt") {
    Bgk S(2, 4);
    Lattice lat(2, 8);
    KineticField f = smooth_field(lat, S.basis, 0.5, 1.0, 4);
    SolverConfig cfg;
    cfg.eps = 0.1;
    cfg.dt = 0.05 / 16;
    KineticField ref = kinetic_integrate(f, S.L, S.Q, cfg, 1.0).states.back();
    std::vector<double> err;
    for (double dt : {0.05, 0.025, 0.0125}) {
        cfg.dt = dt;
        KineticField g = kinetic_integrate(f, S.L, S.Q, cfg, 1.0).states.back();
        g.data -= ref.data;
        err.push_back(hs_norm(g, 2.0));
    }
    double o1 = std::log2(err[0] / err[1]), o2 = std::log2(err[1] / err[2]);
    MESSAGE("errors " << err[0] << " " << err[1] << " " << err[2] << " orders " << o1 << " " << o2);
    CHECK(o1 >= 1.8);
    CHECK(o2 >= 1.8);

    cfg.scheme = ETDScheme::Euler;
    std::vector<double> e1;
    for (double dt : {0.025, 0.0125}) {
        cfg.dt = dt;
        KineticField g = kinetic_integrate(f, S.L, S.Q, cfg, 1.0).states.back();
        g.data -= ref.data;
        e1.push_back(hs_norm(g, 2.0));
    }
    CHECK(std::log2(e1[0] / e1[1]) == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("uniform bound and blowup guard") {
    Bgk S(2, 4);
    Lattice lat(2, 8);
    KineticField f = smooth_field(lat, S.basis, 0.4, 0.3, 5);
    std::vector<double> sups;
    for (double eps : {0.1, 0.05, 0.025}) {
        SolverConfig cfg;
        cfg.eps = eps;
        cfg.dt = 0.01;
        cfg.record_every = 1000;
        auto tr = kinetic_integrate(f, S.L, S.Q, cfg, 0.5);
        sups.push_back(*std::max_element(tr.norm.begin(), tr.norm.end()));
    }
    double n0 = hs_norm(f, 2.0);
    for (double s : sups) CHECK(s <= 1.01 * n0);
    SolverConfig bad;
    bad.c0 = 1e-4;
    CHECK_THROWS_AS(kinetic_integrate(f, S.L, S.Q, bad, 0.1), Error);
}

TEST_CASE("decomposition of well prepared data") {
    Bgk S(2, 5);
    Lattice lat(2, 8);
    auto tc = compute_kappas(S.basis, S.L);
    compute_thetas(S.basis, S.L, S.Q, tc);
    KineticField raw = smooth_field(lat, S.basis, 0.3, 0.0, 6);
    MacroField m0 = well_prepared_init(S.basis, raw);
    KineticField f_ini = lift_to_kinetic(S.basis, m0);

    std::vector<double> errs;
    for (double eps : {0.1, 0.05}) {
        SolverConfig cfg;
        cfg.eps = eps;
        cfg.dt = 0.005;
        cfg.record_every = 20;
        auto tr = kinetic_integrate(f_ini, S.L, S.Q, cfg, 0.4);
        NSFConfig nc = nsf_config_from(tc, 0.005);
        nc.record_every = 20;
        auto ns = nsf_integrate(m0, nc, 0.4);
        auto dec = decompose_solution(tr, f_ini, S.L, tc, ns);
        CHECK(dec.rows.size() == tr.states.size());
        CHECK(dec.sup_disp() <= 1e-10);
        errs.push_back(dec.sup_err());
        std::ostringstream os;
        write_decomposition_csv(os, dec);
        CHECK(os.str().rfind("t,eps,norm_total,norm_ns_gap,norm_disp,norm_kin,norm_err\n", 0) == 0);
    }
    MESSAGE("sup err " << errs[0] << " " << errs[1]);
    CHECK(errs[1] < 0.75 * errs[0]);
}

TEST_CASE("snapshot round trip") {
    Bgk S(2, 4);
    Lattice lat(2, 4);
    KineticField f = smooth_field(lat, S.basis, 1.0, 1.0, 7);
    f.eps = 0.05;
    f.t = 0.25;
    const std::string path = "kinspec_snapshot_test.bin";
    write_snapshot(path, f, S.basis.degree());
    KineticField g = read_snapshot(path, lat, S.basis);
    CHECK(g.eps == 0.05);
    CHECK(g.t == 0.25);
    CHECK((g.data - f.data).cwiseAbs().maxCoeff() <= 1e-6 * f.data.cwiseAbs().maxCoeff());
    HermiteBasis other(2, 5);
    CHECK_THROWS_AS(read_snapshot(path, lat, other), Error);
    std::remove(path.c_str());
}
