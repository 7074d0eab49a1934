#include <cmath>
#include <random>

#include "doctest.h"
#include "kinspec/hermite.hpp"

using namespace kinspec;

namespace {
VecC random_vector(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    VecC f(n);
    for (int i = 0; i < n; ++i) f(i) = cplx(g(rng), g(rng));
    return f;
}
}  // namespace

TEST_CASE("moment constants") {
    HermiteBasis b3(3, 6);
    CHECK(b3.E() == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(b3.K() == doctest::Approx(5.0 / 3.0).epsilon(1e-13));
    CHECK(b3.sound_speed() == doctest::Approx(1.2909944487358056).epsilon(1e-12));
    HermiteBasis b2(2, 6);
    CHECK(b2.sound_speed() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(b2.K() == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("rejects low truncation") {
    CHECK_THROWS_AS(HermiteBasis(3, 3), Error);
    CHECK_THROWS_AS(HermiteBasis(4, 6), Error);
}

TEST_CASE("basis sizes and gram matrix") {
    HermiteBasis b(3, 6);
    CHECK(b.size() == 84);
    HermiteBasis m(2, 5, IndexRule::MaxDegree);
    CHECK(m.size() == 36);
    for (const HermiteBasis* B : {&b, &m}) {
        MatR G = B->values().transpose() * B->weights().asDiagonal() * B->values();
        CHECK((G - MatR::Identity(B->size(), B->size())).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("moments of simple distributions") {
    HermiteBasis b(3, 6);
    auto m = b.moments(b.mu().cast<cplx>());
    CHECK(std::abs(m.rho - 1.0) < 1e-14);
    CHECK(m.u.norm() < 1e-14);
    CHECK(std::abs(m.theta) < 1e-14);

    m = b.moments(b.v_mu(0).cast<cplx>());
    CHECK(std::abs(m.u(0) - 1.0) < 1e-14);
    CHECK(std::abs(m.rho) < 1e-14);

    m = b.moments(b.energy_mu().cast<cplx>());
    CHECK(std::abs(m.theta - 2.0) < 1e-13);  // (1/E) * E^2 (K-1) = 2
    CHECK(std::abs(m.rho) < 1e-14);
}

TEST_CASE("projector P") {
    HermiteBasis b(3, 6);
    const MatR& P = b.P();
    CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    VecC v1v2 = b.project_function([](const double* v) { return cplx(v[0] * v[1]); });
    CHECK(b.project_P(v1v2).norm() < 1e-13);

    VecC k = b.macro({cplx(0.3), VecC::Constant(3, cplx(-0.2, 0.1)), cplx(1.7)});
    CHECK((b.project_P(k) - k).norm() < 1e-14);

    VecC f = random_vector(b.size(), 3);
    CHECK(b.project_P(f).norm() <= f.norm());
    auto m1 = b.moments(f), m2 = b.moments(b.project_P(f));
    CHECK(std::abs(m1.rho - m2.rho) < 1e-13);
    CHECK((m1.u - m2.u).norm() < 1e-13);
    CHECK(std::abs(m1.theta - m2.theta) < 1e-13);
}

TEST_CASE("macro round trip") {
    HermiteBasis b(2, 6);
    MacroMoments m{cplx(0.4, 0.1), VecC::Zero(2), cplx(-0.3)};
    m.u << cplx(0.2), cplx(0.0, -0.5);
    auto r = b.moments(b.macro(m));
    CHECK(std::abs(r.rho - m.rho) < 1e-14);
    CHECK((r.u - m.u).norm() < 1e-14);
    CHECK(std::abs(r.theta - m.theta) < 1e-14);
}

TEST_CASE("Burnett functions") {
    HermiteBasis b(3, 6);
    std::vector<std::vector<VecR>> A;
    std::vector<VecR> B;
    b.burnett(A, B);
    CHECK(A[0][1].squaredNorm() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(A[0][0].squaredNorm() == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
    double sB = 0;
    for (int i = 0; i < 3; ++i) sB += B[i].squaredNorm();
    CHECK(sB == doctest::Approx(3.0).epsilon(1e-12));
    VecR trace = VecR::Zero(b.size());
    for (int i = 0; i < 3; ++i) {
        trace += A[i][i];
        CHECK((b.P() * B[i]).norm() < 1e-12);
        for (int j = 0; j < 3; ++j) {
            CHECK((b.P() * A[i][j]).norm() < 1e-12);
            CHECK((A[i][j] - A[j][i]).norm() < 1e-15);
        }
    }
    CHECK(trace.norm() < 1e-12);
}

TEST_CASE("multiplication by v") {
    HermiteBasis b(3, 6);
    bool trunc = true;
    VecC r = b.multiply_by_v(b.mu().cast<cplx>(), 1, &trunc);
    CHECK(!trunc);
    CHECK((r - b.v_mu(1).cast<cplx>()).norm() < 1e-15);
    for (int j = 0; j < 3; ++j) CHECK((b.V(j) - b.V(j).transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(b.v_mu(0).squaredNorm() == doctest::Approx(1.0));

    VecC top = VecC::Zero(b.size());
    top(b.find({6, 0, 0})) = 1.0;
    b.multiply_by_v(top, 0, &trunc);
    CHECK(trunc);

    // against quadrature: v_1 * (v_1 v_2 mu)
    VecC f = b.project_function([](const double* v) { return cplx(v[0] * v[1]); });
    VecC g = b.project_function([](const double* v) { return cplx(v[0] * v[0] * v[1]); });
    CHECK((b.multiply_by_v(f, 0) - g).norm() < 1e-13);
}

TEST_CASE("rotations transform moments") {
    HermiteBasis b(3, 8);
    VecC f = random_vector(b.size(), 11);
    auto m = b.moments(f);
    for (const auto& R : rotation_test_set(3)) {
        MatR T = b.rotation_operator(R);
        CHECK((T.transpose() * T - MatR::Identity(b.size(), b.size())).cwiseAbs().maxCoeff() < 1e-8);
        auto mr = b.moments(T.cast<cplx>() * f);
        VecC Ru = R.topLeftCorner(3, 3).cast<cplx>() * m.u;
        CHECK(std::abs(mr.rho - m.rho) < 1e-8);
        CHECK((mr.u - Ru).norm() < 1e-8);
        CHECK(std::abs(mr.theta - m.theta) < 1e-8);
    }
}

TEST_CASE("Gauss-Hermite exactness") {
    std::vector<double> x, w;
    gauss_hermite(7, x, w);
    double m0 = 0, m4 = 0, m12 = 0;
    for (int i = 0; i < 7; ++i) {
        m0 += w[i];
        m4 += w[i] * std::pow(x[i], 4);
        m12 += w[i] * std::pow(x[i], 12);
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(m12 == doctest::Approx(10395.0).epsilon(1e-12));
}

TEST_CASE("bracket weight matrix") {
    HermiteBasis b(2, 6);
    auto brute = [&](double g, int extra) {
        return b.weight_matrix([g](const double* v) { return std::pow(1.0 + v[0] * v[0] + v[1] * v[1], 0.5 * g); },
                               extra);
    };
    CHECK((b.bracket_weight_matrix(2.0) - brute(2.0, 0)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((b.bracket_weight_matrix(1.0) - brute(1.0, 60)).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((b.bracket_weight_matrix(0.5) - brute(0.5, 60)).cwiseAbs().maxCoeff() < 1e-5);
    MatR W = b.bracket_weight_matrix(1.0);
    MatR T = b.rotation_operator(rotation_45(2));
    CHECK((T * W - W * T).cwiseAbs().maxCoeff() < 1e-11);
    // W dominates the identity since <v>^gamma >= 1
    Eigen::SelfAdjointEigenSolver<MatR> es(W - MatR::Identity(b.size(), b.size()));
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
}
