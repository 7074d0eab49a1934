#include <cmath>
#include <random>

#include "doctest.h"
#include "kinspec/semigroup.hpp"

using namespace kinspec;

namespace {
VecC random_vector(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    VecC f(n);
    for (int i = 0; i < n; ++i) f(i) = cplx(g(rng), g(rng));
    return f;
}
VecR dir3() {
    VecR w(3);
    w << 0.48, -0.6, 0.64;
    return w / w.norm();
}
double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = int(x.size());
    for (int i = 0; i < n; ++i) {
        double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace

TEST_CASE("mode propagator basics") {
    HermiteBasis b(3, 6);
    auto L = variable_frequency_model(b, 1.0, 1.0);
    VecC f = random_vector(b.size(), 5);
    VecR xi = 1.3 * dir3();
    ModePropagator mp(b, L, xi, 0.1);
    CHECK(mp.decomp().reconstruction <= 1e-9);
    CHECK((mp.apply(0.0, f) - f).norm() == 0.0);
    double t1 = 0.004, t2 = 0.007;
    VecC a = mp.apply(t1 + t2, f), c = mp.apply(t1, mp.apply(t2, f));
    CHECK((a - c).norm() <= 1e-9 * f.norm());
    for (double t : {1e-4, 1e-3, 1e-2, 0.1}) CHECK(mp.apply(t, f).norm() <= f.norm() * (1 + 1e-10));

    VecC k = b.kernel_basis().cast<cplx>() * random_vector(5, 9);
    CHECK((propagate(b, L, VecR::Zero(3), 0.05, 3.0, k) - k).norm() < 1e-12);
}

TEST_CASE("semigroup splitting") {
    HermiteBasis b(3, 6);
    auto L = bgk_linear(b, 1.0);
    VecR xi = 2.0 * dir3();
    auto s = split_semigroup(b, L, xi, 0.05, 0.01, 1.0);
    CHECK(s.hydro_active);
    CHECK(s.sum_residual <= 1e-8);
    CHECK(s.kin_residual <= 1e-8);
    CHECK(s.commutation <= 1e-9);

    auto far = split_semigroup(b, L, xi, 0.05, 0.01, 0.05);
    CHECK(!far.hydro_active);
    CHECK(far.ns.norm() == 0.0);
    CHECK(far.wave.norm() == 0.0);
    CHECK((far.kin - far.full).norm() == 0.0);

    // kinetic part decays like exp(-sigma t / eps^2)
    auto late = split_semigroup(b, L, xi, 0.05, 0.05, 1.0);
    CHECK(late.kin.norm() < 1e-6);
}

TEST_CASE("limit semigroups") {
    HermiteBasis b(3, 6);
    auto L = bgk_linear(b, 1.0);
    auto tc = compute_kappas(b, L);
    const MatR R0 = reduced_resolvent(b, L.L);
    VecR w = dir3();
    auto pe = projector_expansion(b, L, w, R0);
    VecR xi = 1.5 * w;
    auto l0 = limit_semigroups(b, pe, tc, xi, 0.0, 0.1);
    CHECK((l0.U_ns - (pe.P0[0] + pe.P0[1]).cast<cplx>()).norm() < 1e-14);

    std::vector<double> eps{0.02, 0.01, 0.005, 0.0025}, dns, dw;
    const double t = 0.3;
    for (double e : eps) {
        auto s = split_semigroup(b, L, xi, e, t, 1.0);
        auto l = limit_semigroups(b, pe, tc, xi, t, e);
        dns.push_back((s.ns - l.U_ns).norm());
        dw.push_back((s.wave - l.U_disp).norm());
    }
    CHECK(slope(eps, dns) == doctest::Approx(1.0).epsilon(0.1));
    CHECK(slope(eps, dw) == doctest::Approx(1.0).epsilon(0.1));
    // first-order symbol: U_ns^eps - U_ns - i eps|xi| V_ns is O(eps^2)
    std::vector<double> d2;
    for (double e : eps) {
        auto s = split_semigroup(b, L, xi, e, t, 1.0);
        auto l = limit_semigroups(b, pe, tc, xi, t, e);
        d2.push_back((s.ns - l.U_ns - I_UNIT * (e * xi.norm()) * l.V_ns).norm());
    }
    CHECK(slope(eps, d2) > 1.8);
}

TEST_CASE("whole-space dispersive decay") {
    RadialProfile g;
    std::vector<double> t{25, 50, 100, 200, 400};
    auto r3 = dispersive_decay_check(g, t, 3);
    CHECK(r3.exponent == doctest::Approx(-1.0).epsilon(0.1));
    CHECK(r3.min_points_per_period >= 10.0);
    CHECK(std::abs(r3.value_t0 - r3.g0) < 1e-6 * r3.g0);
    auto r2 = dispersive_decay_check(g, t, 2);
    CHECK(std::abs(r2.exponent + 0.5) <= 0.1);
    CHECK_THROWS_AS(dispersive_decay_check(g, t, 2, 5.0), Error);
}

TEST_CASE("kinetic decay rate is eps-independent on a small lattice") {
    HermiteBasis b(2, 6);
    auto L = bgk_linear(b, 1.0);
    std::vector<VecR> ks;
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j) {
            VecR k(2);
            k << i, j;
            ks.push_back(k);
        }
    std::vector<double> tau;
    for (int i = 0; i <= 40; ++i) tau.push_back(0.5 * i);
    auto a = measure_kinetic_decay(b, L, ks, 0.1, tau, 1.0);
    auto c = measure_kinetic_decay(b, L, ks, 0.05, tau, 1.0);
    CHECK(a.sigma0 > 0.4);
    CHECK(std::abs(a.sigma0 - c.sigma0) <= 0.05 * c.sigma0);
    CHECK(std::isfinite(a.C));
}
