#include <cmath>

#include "doctest.h"
#include "kinspec/spectral.hpp"

using namespace kinspec;

namespace {
VecR axis(int d, int i) {
    VecR v = VecR::Zero(d);
    v(i) = 1.0;
    return v;
}
VecR oblique3() {
    VecR w(3);
    w << 0.48, -0.6, 0.64;
    return w / w.norm();
}
std::vector<double> geometric(double a, double b, int n) {
    std::vector<double> r;
    for (int i = 0; i < n; ++i) r.push_back(a * std::pow(b / a, double(i) / (n - 1)));
    return r;
}
}  // namespace

TEST_CASE("mode operator assembly") {
    HermiteBasis b(3, 6);
    auto L = bgk_linear(b, 1.0);
    auto m0 = assemble_mode(b, L, VecR::Zero(3));
    CHECK((m0.M - L.L.cast<cplx>()).norm() == 0.0);
    VecR xi = 0.1 * oblique3();
    auto m = assemble_mode(b, L, xi);
    MatC herm = 0.5 * (m.M + m.M.adjoint()), anti = 0.5 * (m.M - m.M.adjoint());
    CHECK((herm - L.L.cast<cplx>()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((anti + I_UNIT * b.v_dot(xi).cast<cplx>()).cwiseAbs().maxCoeff() < 1e-15);
    auto e = eigen_decompose(m.M);
    CHECK(e.lambda.real().maxCoeff() <= 1e-12);
    auto ev = eigen_decompose(-I_UNIT * b.v_dot(xi).cast<cplx>());
    CHECK(ev.lambda.real().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("conjugation symmetry and isotropy of the mode spectrum") {
    HermiteBasis b(3, 6);
    auto L = variable_frequency_model(b, 1.0, 1.0);
    VecR xi = 0.7 * oblique3();
    auto sorted = [](VecC z) {
        std::vector<cplx> v(z.data(), z.data() + z.size());
        std::sort(v.begin(), v.end(), [](cplx a, cplx c) {
            return std::abs(a.real() - c.real()) > 1e-7 ? a.real() < c.real() : a.imag() < c.imag();
        });
        return v;
    };
    auto s1 = sorted(eigen_decompose(assemble_mode(b, L, xi).M).lambda);
    auto s2 = sorted(eigen_decompose(assemble_mode(b, L, -xi).M).lambda.conjugate());
    double dev = 0;
    for (size_t i = 0; i < s1.size(); ++i) dev = std::max(dev, std::abs(s1[i] - s2[i]));
    CHECK(dev < 1e-12);
    // axis swap maps xi to R xi
    VecR x = 0.7 * axis(3, 0);
    VecR y = 0.7 * axis(3, 2);
    auto a = sorted(eigen_decompose(assemble_mode(b, L, x).M).lambda);
    auto c = sorted(eigen_decompose(assemble_mode(b, L, y).M).lambda);
    dev = 0;
    for (size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - c[i]));
    CHECK(dev < 1e-10);
}

TEST_CASE("hydrodynamic branches, BGK d=3") {
    HermiteBasis b(3, 6);
    auto L = bgk_linear(b, 1.0);
    auto hp = analyze_point(b, L, 0.01 * oblique3(), 0.5);
    CHECK(hp.bou.real() == doctest::Approx(-1.0e-4).epsilon(1e-2));
    CHECK(hp.plus.imag() == doctest::Approx(1.2909944487358056e-2).epsilon(1e-3));
    CHECK(std::abs(hp.minus - std::conj(hp.plus)) < 1e-12);
    CHECK(std::abs(hp.bou.imag()) <= 1e-10);
    REQUIRE(hp.inc.size() == 2);
    for (auto z : hp.inc) {
        CHECK(std::abs(z.imag()) <= 1e-10);
        CHECK(z.real() == doctest::Approx(-1.0e-4).epsilon(1e-2));
    }
    CHECK(hp.gap > 0.5);

    auto h0 = analyze_point(b, L, VecR::Zero(3), 0.5);
    for (Branch br : kBranches) CHECK(std::abs(h0.lambda(br)) < 1e-12);

    CHECK_THROWS_AS(analyze_point(b, L, 0.01 * oblique3(), 1.5), Error);
}

TEST_CASE("branch expansions fit, BGK d=3") {
    HermiteBasis b(3, 6);
    auto L = bgk_linear(b, 1.0);
    auto spec = hydro_branches(b, L, geometric(1e-3, 2e-2, 8), {oblique3(), axis(3, 1)}, 0.5);
    CHECK(spec.points.size() == 16);
    fit_expansions(spec);
    CHECK(spec.c_fit == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-5));
    CHECK(std::abs(spec.kappa_inc_fit - 1.0) <= 1e-3);
    CHECK(std::abs(spec.kappa_bou_fit - 1.0) <= 1e-3);
    CHECK(std::abs(spec.kappa_wave_fit - 1.0) <= 1e-3);
    CHECK(std::abs(spec.fits[int(Branch::Inc)].a1) <= 1e-8);
    for (const auto& f : spec.fits) CHECK(f.remainder_slope >= 2.7);
}

TEST_CASE("fit rejects too few points") {
    HermiteBasis b(2, 6);
    auto L = bgk_linear(b, 1.0);
    auto spec = hydro_branches(b, L, {1e-3, 2e-3, 4e-3}, {axis(2, 0)}, 0.5);
    CHECK_THROWS_AS(fit_expansions(spec), Error);
}

TEST_CASE("spectral projectors") {
    HermiteBasis b(3, 6);
    auto L = bgk_linear(b, 1.0);
    MatC P0 = spectral_projector(b, L, VecR::Zero(3), std::nullopt);
    CHECK((P0 - b.P().cast<cplx>()).cwiseAbs().maxCoeff() < 1e-10);

    VecR xi = 0.05 * oblique3();
    auto ps = spectral_projectors(b, L, xi);
    auto rank = [](const MatC& P) { return std::real(P.trace()); };
    CHECK(rank(ps.branch[0]) == doctest::Approx(2.0).epsilon(1e-9));
    for (int k = 1; k < 4; ++k) CHECK(rank(ps.branch[k]) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(ps.total.trace() - cplx(5.0)) < 1e-9);
    for (int i = 0; i < 4; ++i) {
        CHECK((ps.branch[i] * ps.branch[i] - ps.branch[i]).norm() < 1e-9);
        for (int j = 0; j < 4; ++j)
            if (i != j) CHECK((ps.branch[i] * ps.branch[j]).norm() < 1e-9);
    }
    MatC Ptot = spectral_projector(b, L, xi, std::nullopt);
    CHECK((Ptot - ps.total).norm() < 1e-9);
    MatC M = assemble_mode(b, L, xi).M;
    CHECK((Ptot * M - M * Ptot).norm() < 1e-9);

    auto pd = spectral_projectors(b, L, xi, ProjectorBackend::Dyad);
    for (int k = 0; k < 4; ++k) CHECK((pd.branch[k] - ps.branch[k]).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("projector expansion") {
    HermiteBasis b(3, 6);
    auto L = bgk_linear(b, 1.0);
    auto ec = projector_expansion_check(b, L, oblique3(), geometric(2e-3, 4e-2, 6));
    for (int k = 0; k < 4; ++k) CHECK(ec.order[k] >= 1.9);
    CHECK(ec.psi_bou_norm == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ec.inc_moment_residual < 1e-12);
    CHECK(ec.bou_moment_residual < 1e-12);
    CHECK(ec.bou_first_order_residual < 1e-12);

    const MatR R0 = reduced_resolvent(b, L.L);
    auto pe = projector_expansion(b, L, axis(3, 1), R0);
    VecR v1 = b.v_mu(0);
    CHECK((pe.P0[0] * v1 - v1).norm() < 1e-13);
    MatR sumP0 = pe.P0[0] + pe.P0[1] + pe.P0[2] + pe.P0[3];
    CHECK((sumP0 - b.P()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projector expansion, variable-frequency model d=2") {
    HermiteBasis b(2, 8);
    auto L = variable_frequency_model(b, 1.0, 1.0);
    VecR w(2);
    w << 0.6, 0.8;
    auto ec = projector_expansion_check(b, L, w, geometric(2e-3, 4e-2, 6));
    for (int k = 0; k < 4; ++k) CHECK(ec.order[k] >= 1.9);
}

TEST_CASE("Kato rectified operator") {
    HermiteBasis b(3, 6);
    auto L = bgk_linear(b, 1.0);
    auto k0 = kato_rectified(b, L, VecR::Zero(3));
    CHECK(k0.Lhat.norm() < 1e-12);
    auto k = kato_rectified(b, L, 0.05 * oblique3());
    CHECK(k.off_block <= 1e-9);
    CHECK(k.inc_identity_dev <= 1e-9);
    CHECK(k.square_norm < 1.0);
    const double c = b.sound_speed();
    CHECK(std::abs(k.first_order[0]) < 0.05);
    CHECK(std::abs(k.first_order[1] - c) < 0.05);
    CHECK(std::abs(k.first_order[2] + c) < 0.05);
}

TEST_CASE("kinetic decay and resolvent scan, BGK d=3") {
    HermiteBasis b(3, 6);
    auto L = bgk_linear(b, 1.0);
    std::vector<VecR> xis;
    for (double r : {0.0, 0.1, 0.5, 1.0, 2.0, 3.5, 5.0}) xis.push_back(r * oblique3());
    std::vector<double> t;
    for (int i = 0; i <= 16; ++i) t.push_back(0.5 * i);
    auto rep = decay_and_resolvent_scan(b, L, xis, t, {-3.0, -1.0, 0.0, 1.0, 3.0}, 5.0);
    CHECK(rep.sigma0 >= 0.4);
    CHECK(std::isfinite(rep.C));
    CHECK(std::isfinite(rep.resolvent_sup));
    for (size_t j = 0; j < t.size(); ++j) CHECK(rep.norms[0][j] == doctest::Approx(std::exp(-t[j])).epsilon(1e-9));
}
