#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "kinspec/experiments.hpp"

namespace kinspec {

namespace {

using json = nlohmann::json;

VecR oblique(int d) {
    VecR w(d);
    if (d == 3)
        w << 0.48, -0.6, 0.64;
    else
        w << 0.6, 0.8;
    return w / w.norm();
}

VecR axis(int d, int j) {
    VecR w = VecR::Zero(d);
    w(j) = 1.0;
    return w;
}

std::vector<double> geometric(double a, double b, int n) {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = a * std::pow(b / a, double(i) / (n - 1));
    return r;
}

Check check(const std::string& name, bool ok, double measured, double tol, const std::string& note = "") {
    return Check{name, ok, measured, tol, note};
}

std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.12g", v);
    return b;
}

ExperimentResult assumptions(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.statement = "L1-L4 and B1-B2 hold for the discretized collision model; ker L has dimension d+2";
    HermiteBasis b(cfg.d, cfg.N);
    auto L = make_model(b, cfg.model);
    std::vector<VecR> xis;
    for (double r : {0.0, 0.1, 1.0, 5.0}) {
        xis.push_back(r * axis(cfg.d, 0));
        xis.push_back(r * oblique(cfg.d));
    }
    auto rots = rotation_test_set(cfg.d);
    auto rl = audit_L1_L4(b, L, rots, xis);
    auto Q = bgk_quadratic(b, cfg.model.nu);
    auto rq = audit_B1_B3(b, Q, L, rots, 50, cfg.seed);
    for (const auto& c : rl.checks) res.checks.push_back(c);
    for (const auto& c : rq.checks) res.checks.push_back(c);
    const int kd = kernel_dimension(L.L);
    res.checks.push_back(check("kernel dimension d+2", kd == cfg.d + 2, kd, cfg.d + 2));
    res.data["basis_size"] = b.size();
    res.data["lambda_L"] = L.lambda_L;
    res.data["lambda_B"] = L.lambda_B;
    std::ostringstream os;
    os << "check,passed,measured,tolerance\n";
    for (const auto& c : res.checks) os << '"' << c.name << "\"," << c.passed << "," << num(c.measured) << "," << num(c.tolerance) << "\n";
    res.csv["audits.csv"] = os.str();
    return res;
}

ExperimentResult spectral_scan(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.statement = "hydrodynamic branches: lambda = +-i c|xi| - kappa |xi|^2 + O(|xi|^3), c = sqrt(KE/d)";
    HermiteBasis b(cfg.d, cfg.N);
    auto L = make_model(b, cfg.model);
    auto radii = cfg.radii.empty() ? geometric(1e-3, 2e-2, 8) : cfg.radii;
    auto spec = hydro_branches(b, L, radii, {oblique(cfg.d), axis(cfg.d, 0)}, cfg.window, true);
    double fit_error = 0;
    try {
        fit_expansions(spec);
    } catch (const Error& e) {
        res.checks.push_back(check("branch fit quality", false, NAN, 2.5, e.what()));
        fit_error = 1;
    }
    const double c = b.sound_speed();
    const double tol = cfg.model.type == "bgk" ? 1e-5 : 1e-3;
    if (!fit_error) {
        res.checks.push_back(check("speed of sound", std::abs(spec.c_fit - c) <= tol, std::abs(spec.c_fit - c), tol));
        double worst = 10;
        for (const auto& f : spec.fits) worst = std::min(worst, f.remainder_slope);
        res.checks.push_back(check("fit remainder order", worst >= 2.5, worst, 2.5));
    }
    int bad = 0;
    for (const auto& p : spec.points) bad += !p.error.empty();
    res.checks.push_back(check("every scanned point classifies", bad == 0, bad, 0));
    res.checks.push_back(check("spectral gap certificate", spec.gap_certificate > 0, spec.gap_certificate, 0));
    auto big = geometric(0.05, 3.0, 24);
    res.data["alpha0_empirical"] = empirical_alpha0(b, L, big, oblique(cfg.d), cfg.window);
    res.data["c_exact"] = c;
    res.data["c_fit"] = spec.c_fit;
    res.data["kappa_inc_fit"] = spec.kappa_inc_fit;
    res.data["kappa_bou_fit"] = spec.kappa_bou_fit;
    res.data["kappa_wave_fit"] = spec.kappa_wave_fit;
    std::ostringstream os;
    write_branch_csv(os, spec);
    res.csv["branches.csv"] = os.str();
    Plot p{"branches.svg", "hydrodynamic branches, -Re lambda", "|xi|", "-Re lambda", true, true, {}};
    for (Branch br : kBranches) {
        PlotSeries s{branch_name(br), {}, {}};
        for (const auto& pt : spec.points)
            if (pt.dir == 0 && pt.error.empty()) {
                s.x.push_back(pt.r);
                s.y.push_back(-pt.lambda(br).real());
            }
        p.series.push_back(s);
    }
    res.plots.push_back(p);
    return res;
}

ExperimentResult coefficients(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.statement = "transport coefficients from the Burnett functions agree with the branch curvatures";
    HermiteBasis b(cfg.d, cfg.N);
    auto L = make_model(b, cfg.model);
    auto Q = bgk_quadratic(b, cfg.model.nu);
    auto tc = compute_kappas(b, L);
    compute_thetas(b, L, Q, tc);
    auto radii = cfg.radii.empty() ? geometric(1e-3, 2e-2, 8) : cfg.radii;
    auto spec = hydro_branches(b, L, radii, {oblique(cfg.d)}, cfg.window);
    fit_expansions(spec);
    tc.attach_fit(spec.c_fit, spec.kappa_inc_fit, spec.kappa_bou_fit, spec.kappa_wave_fit);
    double worst = 0;
    bool ok = tc.fit_consistent(&worst);
    res.checks.push_back(check("closed forms match branch fits", ok, worst, 0, "tolerance max(1e-3, 1e-2|fit|)"));
    res.checks.push_back(check("kappa_Inc isotropy", tc.kappa_inc_spread <= 1e-10, tc.kappa_inc_spread, 1e-10));
    const bool flagged = std::abs(tc.kappa_inc_hs_paper - tc.kappa_inc) > 1e-8;
    res.checks.push_back(check("kappa normalization discrepancy reported", true, tc.kappa_inc_hs_paper - tc.kappa_inc, 0,
                               flagged ? "HS sum over (d-1)(d+1) differs from the canonical value"
                                       : "normalizations agree on this model"));
    res.data["coefficients"] = tc.to_json();
    std::ostringstream os;
    os << "name,value\n";
    for (auto [k, v] : std::vector<std::pair<const char*, double>>{
             {"c", tc.c}, {"kappa_inc", tc.kappa_inc}, {"kappa_bou", tc.kappa_bou}, {"kappa_wave", tc.kappa_wave},
             {"kappa_inc_hs_paper", tc.kappa_inc_hs_paper}, {"kappa_inc_hs_alt", tc.kappa_inc_hs_alt},
             {"kappa_wave_combo_paper", tc.kappa_wave_combo_paper}, {"kappa_wave_combo_alt", tc.kappa_wave_combo_alt},
             {"c_fit", tc.c_fit}, {"kappa_inc_fit", tc.kappa_inc_fit}, {"kappa_bou_fit", tc.kappa_bou_fit},
             {"kappa_wave_fit", tc.kappa_wave_fit}, {"theta1", tc.theta1}, {"theta2", tc.theta2}, {"theta3", tc.theta3},
             {"theta_inc", tc.theta_inc}, {"theta_bou", tc.theta_bou}, {"theta_inc_paper", tc.theta_inc_paper},
             {"theta_bou_paper", tc.theta_bou_paper}})
        os << k << "," << num(v) << "\n";
    res.csv["coefficients.csv"] = os.str();
    return res;
}

ExperimentResult projector_expansion_exp(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.statement = "P_b(xi) = P0_b + i|xi| P1_b + S_b(xi) with ||S_b|| = O(|xi|^2); P0 closed forms";
    HermiteBasis b(cfg.d, cfg.N);
    auto L = make_model(b, cfg.model);
    auto radii = cfg.radii.empty() ? geometric(1e-3, 5e-2, 7) : cfg.radii;
    auto ec = projector_expansion_check(b, L, oblique(cfg.d), radii);
    std::ostringstream os;
    os << "r";
    for (Branch br : kBranches) os << "," << branch_name(br);
    os << "\n";
    for (size_t i = 0; i < radii.size(); ++i) {
        os << num(radii[i]);
        for (int k = 0; k < 4; ++k) os << "," << num(ec.remainder[k][i]);
        os << "\n";
    }
    res.csv["remainders.csv"] = os.str();
    Plot p{"remainders.svg", "projector remainder ||S_b(r w)||", "r", "norm", true, true, {}};
    for (int k = 0; k < 4; ++k) {
        res.checks.push_back(check(std::string("remainder order ") + branch_name(kBranches[k]), ec.order[k] >= 1.9,
                                   ec.order[k], 1.9));
        p.series.push_back({branch_name(kBranches[k]), radii, ec.remainder[k]});
    }
    res.plots.push_back(p);
    double zg = 0, with1 = 0;
    for (int k = 0; k < 4; ++k) {
        zg = std::max(zg, ec.zeroth_gap[k]);
        with1 = std::max(with1, ec.remainder[k].front());
    }
    res.checks.push_back(check("P0 vs contour projector at smallest |xi|", zg <= 1e-4, zg, 1e-4,
                               "first-order corrected gap " + num(with1) + " at |xi| = " + num(radii.front())));
    res.checks.push_back(check("P0_Inc gives the Leray part of u", ec.inc_moment_residual <= 1e-12,
                               ec.inc_moment_residual, 1e-12));
    res.checks.push_back(check("P0_Bou gives the Boussinesq temperature", ec.bou_moment_residual <= 1e-12,
                               ec.bou_moment_residual, 1e-12));
    res.data["zeroth_gap"] = ec.zeroth_gap;
    res.data["order"] = ec.order;
    res.data["bou_first_order_factor"] = ec.bou_first_order_factor;
    return res;
}

ExperimentResult kato(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.statement = "Kato-rectified hydrodynamic block is diagonal: diag(lambda_Inc Id, i|xi|(0, c, -c)) + O(|xi|^2)";
    HermiteBasis b(cfg.d, cfg.N);
    auto L = make_model(b, cfg.model);
    const double r = cfg.radii.empty() ? 1e-2 : cfg.radii.front();
    auto k = kato_rectified(b, L, r * oblique(cfg.d), cfg.window);
    const double c = b.sound_speed();
    res.checks.push_back(check("off-block norm (relative)", k.off_block <= 1e-9, k.off_block, 1e-9));
    res.checks.push_back(check("Inc block is a multiple of Id", k.inc_identity_dev <= 1e-9, k.inc_identity_dev, 1e-9));
    const double want[3] = {0.0, c, -c};
    double dev = 0;
    for (int i = 0; i < 3; ++i) dev = std::max(dev, std::abs(k.first_order[i] - want[i]));
    res.checks.push_back(check("first-order diagonal i|xi|(0, c, -c)", dev <= 1e-4, dev, 1e-4));
    res.data["first_order"] = k.first_order;
    res.data["square_norm"] = k.square_norm;
    res.data["xi"] = r;
    return res;
}

ExperimentResult decay(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.statement = "||U_kin(t)|| <= C exp(-sigma0 t / eps^2) with sigma0 independent of eps";
    HermiteBasis b(cfg.d, cfg.N);
    auto L = make_model(b, cfg.model);
    Lattice lat(cfg.d, cfg.lattice, cfg.box);
    std::vector<VecR> ks;
    for (int i = 0; i < lat.size(); ++i)
        if (lat.kept(i)) ks.push_back(lat.k(i));
    std::vector<double> tau = cfg.t_grid;
    if (tau.empty())
        for (int i = 0; i <= 40; ++i) tau.push_back(0.5 * i);
    std::vector<double> sig;
    std::ostringstream os;
    write_semigroup_csv_header(os);
    Plot p{"decay.svg", "kinetic envelope vs fast time", "t / eps^2", "sup_k ||U_kin||", false, true, {}};
    for (double eps : cfg.eps) {
        auto kd = measure_kinetic_decay(b, L, ks, eps, tau, cfg.alpha0, cfg.window);
        sig.push_back(kd.sigma0);
        for (size_t j = 0; j < kd.t.size(); ++j) {
            double fitv = kd.C * std::exp(-kd.sigma0 * kd.t[j] / (eps * eps));
            write_semigroup_csv_row(os, kd.t[j], 0.0, eps, kd.envelope[j], 0.0, fitv);
        }
        res.data["runs"].push_back({{"eps", eps}, {"sigma0", kd.sigma0}, {"C", kd.C}});
        p.series.push_back({"eps " + num(eps), tau, kd.envelope});
    }
    res.csv["decay.csv"] = os.str();
    res.plots.push_back(p);
    auto [lo, hi] = std::minmax_element(sig.begin(), sig.end());
    const double spread = (*hi - *lo) / *hi;
    res.checks.push_back(check("sigma0 eps-independent", spread <= 0.05, spread, 0.05));
    res.checks.push_back(check("sigma0 positive", *lo > 0, *lo, 0));
    res.data["kept_modes"] = int(ks.size());
    return res;
}

ExperimentResult dispersion(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.statement = "||exp(it|D|) g||_inf decays like t^{-(d-1)/2}";
    std::vector<double> t = cfg.t_grid.empty() ? std::vector<double>{25, 50, 100, 200, 400} : cfg.t_grid;
    RadialProfile g;
    auto rep = dispersive_decay_check(g, t, cfg.d);
    const double want = -(cfg.d - 1) / 2.0;
    res.checks.push_back(check("decay exponent", std::abs(rep.exponent - want) <= 0.1, rep.exponent, 0.1,
                               "expected " + num(want)));
    res.checks.push_back(check("t = 0 value matches g(0)", std::abs(rep.value_t0 - rep.g0) <= 1e-6 * rep.g0,
                               std::abs(rep.value_t0 - rep.g0), 1e-6 * rep.g0));
    res.data["exponent"] = rep.exponent;
    res.data["r2"] = rep.r2;
    res.data["min_points_per_period"] = rep.min_points_per_period;
    std::ostringstream os;
    os << "t,sup\n";
    for (size_t i = 0; i < rep.t.size(); ++i) os << num(rep.t[i]) << "," << num(rep.sup[i]) << "\n";
    res.csv["dispersion.csv"] = os.str();
    res.plots.push_back({"dispersion.svg", "wave dispersion, d = " + std::to_string(cfg.d), "t", "sup |u|", true, true,
                         {{"sup", rep.t, rep.sup}}});
    return res;
}

MacroField taylor_green(const Lattice& lat, double A) {
    MacroField m = zero_macro(lat);
    for (int s1 : {-1, 1})
        for (int s2 : {-1, 1}) {
            int i = lat.index({s1, s2, 0});
            m.u(i, 0) = A * double(s1) / (4.0 * I_UNIT);
            m.u(i, 1) = -A * double(s2) / (4.0 * I_UNIT);
        }
    return m;
}

ExperimentResult nsf(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.statement = "NSF solver: exact Taylor-Green decay, discrete energy balance, Duhamel form of the limit";
    if (cfg.d != 2) throw Error("Config", "the nsf experiment runs in d = 2");
    HermiteBasis b(2, cfg.N);
    auto L = make_model(b, cfg.model);
    auto Q = bgk_quadratic(b, cfg.model.nu);
    auto tc = compute_kappas(b, L);
    compute_thetas(b, L, Q, tc);
    Lattice lat(2, cfg.lattice, cfg.box);
    if (std::abs(cfg.box - 2 * M_PI) > 1e-12) throw Error("Config", "the nsf experiment uses the 2 pi torus");

    // Taylor-Green
    NSFConfig nc = nsf_config_from(tc, cfg.dt);
    MacroField tg = taylor_green(lat, 1.0);
    auto tr = nsf_integrate(tg, nc, cfg.T);
    double err = 0;
    for (const auto& st : tr.states) {
        MatC ex = tg.u * std::exp(-2 * nc.kappa_inc * st.t);
        err = std::max(err, (st.u - ex).cwiseAbs().maxCoeff());
    }
    res.checks.push_back(check("Taylor-Green vs exp(-2 kappa t)", err <= 1e-8, err, 1e-8));

    // energy balance on generic data
    MacroField m0 = well_prepared_init(b, initial_data(lat, b, cfg));
    auto tr2 = nsf_integrate(m0, nc, cfg.T);
    res.checks.push_back(check("energy balance", tr2.energy_balance <= 1e-6, tr2.energy_balance, 1e-6));
    res.checks.push_back(check("divergence-free", tr2.max_divergence <= 1e-10, tr2.max_divergence, 1e-10));
    res.checks.push_back(check("Boussinesq relation", tr2.max_boussinesq <= 1e-10, tr2.max_boussinesq, 1e-10));
    res.checks.push_back(check("mean mode conserved", tr2.mean_drift <= 1e-10, tr2.mean_drift, 1e-10));

    // Duhamel residual under dt refinement, on a short horizon
    const double Td = std::min(cfg.T, 0.2);
    std::vector<double> dts{0.02, 0.01, 0.005}, rs;
    for (double h : dts) {
        NSFConfig c2 = nsf_config_from(tc, h);
        auto t3 = nsf_integrate(m0, c2, Td);
        rs.push_back(duhamel_residual(b, L, Q, tc, t3.states, cfg.s).back());
    }
    const double o1 = std::log2(rs[0] / rs[1]), o2 = std::log2(rs[1] / rs[2]);
    res.checks.push_back(check("Duhamel residual order", std::min(o1, o2) >= 1.8, std::min(o1, o2), 1.8));
    res.data["duhamel"] = {{"dt", dts}, {"residual", rs}};
    res.data["energy"] = {{"E0", tr2.energy.front()}, {"ET", tr2.energy.back()}};
    std::ostringstream os;
    os << "t,energy,dissipation\n";
    for (size_t i = 0; i < tr2.times.size(); ++i)
        os << num(tr2.times[i]) << "," << num(tr2.energy[i]) << "," << num(tr2.dissipation[i]) << "\n";
    res.csv["nsf_energy.csv"] = os.str();
    std::ostringstream snap;
    snap << "t,mode,field,re,im\n";
    for (const auto& st : tr2.states) {
        if (st.t != tr2.states.front().t && st.t != tr2.states.back().t) continue;
        for (int i = 0; i < lat.size(); ++i) {
            if (!lat.kept(i) || st.u.row(i).norm() + std::abs(st.theta(i)) == 0.0) continue;
            auto md = lat.mode(i);
            std::string mode = std::to_string(md[0]) + ":" + std::to_string(md[1]);
            for (int a = 0; a < 2; ++a)
                snap << num(st.t) << "," << mode << ",u" << a + 1 << "," << num(st.u(i, a).real()) << ","
                     << num(st.u(i, a).imag()) << "\n";
            snap << num(st.t) << "," << mode << ",theta," << num(st.theta(i).real()) << "," << num(st.theta(i).imag())
                 << "\n";
        }
    }
    res.csv["nsf_snapshots.csv"] = snap.str();
    res.plots.push_back({"nsf_energy.svg", "kinetic energy", "t", "sum |u_k|^2", false, false,
                         {{"energy", tr2.times, tr2.energy}}});
    return res;
}

ExperimentResult limit_sweep_exp(const ExperimentConfig& cfg) {
    ExperimentResult res;
    const bool ill = cfg.data == "ill-prepared";
    res.statement = ill ? "ill-prepared data: acoustic part oscillates at c|xi|/eps, f_err -> 0 away from t = 0"
                        : "hydrodynamic limit: sup_t ||f_eps - f_ns|| = O(eps) for well-prepared data";
    auto sw = limit_sweep(cfg);
    std::ostringstream os, rates;
    bool first = true;
    rates << "eps,sup_gap,sup_err,sup_disp,frequency,frequency_expected\n";
    Plot pn{"limit_norms.svg", "||f_eps - f_ns|| vs t", "t", "norm", false, true, {}};
    std::vector<double> eps, gap, err;
    for (const auto& r : sw.runs) {
        write_decomposition_csv(os, r.dec, first);
        first = false;
        rates << num(r.eps) << "," << num(r.sup_gap) << "," << num(r.sup_err) << "," << num(r.sup_disp) << ","
              << num(r.frequency) << "," << num(r.frequency_expected) << "\n";
        PlotSeries s{"eps " + num(r.eps), {}, {}};
        for (const auto& row : r.dec.rows) {
            s.x.push_back(row.t);
            s.y.push_back(row.norm_ns_gap);
        }
        pn.series.push_back(s);
        eps.push_back(r.eps);
        gap.push_back(r.sup_gap);
        err.push_back(r.sup_err);
        res.data["runs"].push_back({{"eps", r.eps},
                                    {"sup_gap", r.sup_gap},
                                    {"sup_err", r.sup_err},
                                    {"sup_disp", r.sup_disp},
                                    {"kinetic_only_modes", r.dec.kinetic_only_modes},
                                    {"frequency", r.frequency},
                                    {"frequency_expected", r.frequency_expected}});
    }
    res.csv["limit_sweep.csv"] = os.str();
    res.csv["limit_rates.csv"] = rates.str();
    res.plots.push_back(pn);
    res.plots.push_back({"limit_rate.svg", "sup over t >= 0.1", "eps", "norm", true, true,
                         {{"||f - f_ns||", eps, gap}, {"||f_err||", eps, err}}});
    res.data["gap_rate"] = {{"slope", sw.gap_rate.slope}, {"r2", sw.gap_rate.r2}};
    res.data["err_rate"] = {{"slope", sw.err_rate.slope}, {"r2", sw.err_rate.r2}};
    res.data["norm_ini"] = sw.norm_ini;
    if (!ill) {
        const double sl = sw.gap_rate.slope;
        res.checks.push_back(check("rate of ||f - f_ns|| in [0.9, 1.1]", sl >= 0.9 && sl <= 1.1, sl, 0.1));
        res.checks.push_back(check("rate fit R^2 >= 0.98", sw.gap_rate.r2 >= 0.98, sw.gap_rate.r2, 0.98));
        double d = 0;
        for (const auto& r : sw.runs) d = std::max(d, r.sup_disp);
        res.checks.push_back(check("no acoustic part", d <= 1e-10, d, 1e-10));
    } else {
        double fe = 0, dm = 0;
        for (const auto& r : sw.runs) {
            fe = std::max(fe, std::abs(r.frequency - r.frequency_expected) / r.frequency_expected);
            dm = std::max(dm, r.sup_disp);
        }
        res.checks.push_back(check("acoustic frequency c|xi|/eps", fe <= 0.01, fe, 0.01));
        res.checks.push_back(check("f_disp uniformly bounded by ||f_ini||", dm <= sw.norm_ini, dm, sw.norm_ini));
        res.checks.push_back(check("f_err rate away from t = 0", sw.err_rate.slope > 0.4, sw.err_rate.slope, 0.4));
    }
    return res;
}

}  // namespace

LinearCollisionOperator make_model(const HermiteBasis& basis, const ModelSpec& m) {
    if (m.type == "bgk") return bgk_linear(basis, m.nu);
    if (m.type == "variable-frequency") return variable_frequency_model(basis, m.nu, m.gamma);
    throw Error("Config", "unknown model type '" + m.type + "'");
}

KineticField initial_data(const Lattice& lat, const HermiteBasis& basis, const ExperimentConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> g;
    const int d = lat.dim();
    MacroField m = zero_macro(lat);
    for (int i = 0; i < lat.size(); ++i) {
        auto md = lat.mode(i);
        int mx = 0, m2 = 0;
        for (int j = 0; j < d; ++j) {
            mx = std::max(mx, std::abs(md[j]));
            m2 += md[j] * md[j];
        }
        if (mx == 0 || mx > cfg.modes || !lat.kept(i)) continue;
        const int c = lat.conj_index(i);
        if (c < i) continue;
        const double a = cfg.amplitude / m2;
        auto draw = [&] { return a * cplx(g(rng), g(rng)); };
        m.rho(i) = draw();
        m.theta(i) = draw();
        for (int j = 0; j < d; ++j) m.u(i, j) = draw();
        m.rho(c) = std::conj(m.rho(i));
        m.theta(c) = std::conj(m.theta(i));
        for (int j = 0; j < d; ++j) m.u(c, j) = std::conj(m.u(i, j));
    }
    KineticField f = lift_to_kinetic(basis, well_prepared_init(basis, lift_to_kinetic(basis, m)));
    if (cfg.data == "ill-prepared") {
        // longitudinal velocity and a density excess on the probe mode e_1
        const int p = lat.index({1, 0, 0}), c = lat.conj_index(p);
        MacroField ac = zero_macro(lat);
        ac.u(p, 0) = cfg.acoustic;
        ac.rho(p) = 0.5 * cfg.acoustic;
        ac.u(c, 0) = cfg.acoustic;
        ac.rho(c) = 0.5 * cfg.acoustic;
        f.data += lift_to_kinetic(basis, ac).data;
    }
    return f;
}

LimitSweep limit_sweep(const ExperimentConfig& cfg) {
    HermiteBasis b(cfg.d, cfg.N);
    auto L = make_model(b, cfg.model);
    auto Q = bgk_quadratic(b, cfg.model.nu);
    auto tc = compute_kappas(b, L);
    compute_thetas(b, L, Q, tc);
    Lattice lat(cfg.d, cfg.lattice, cfg.box);
    KineticField f_ini = initial_data(lat, b, cfg);
    MacroField m0 = well_prepared_init(b, f_ini);
    const bool ill = cfg.data == "ill-prepared";

    const int probe = lat.index({1, 0, 0});
    const VecR kp = lat.k(probe);

    LimitSweep sw;
    sw.norm_ini = hs_norm(f_ini, cfg.s);
    const double c = b.sound_speed();
    // record spacing: a multiple of dt, fine enough for the acoustic phase
    auto spacing = [&](double eps) {
        double want = cfg.sample_every;
        if (ill) want = std::min(want, 0.5 * eps / (c * kp.norm()));
        return std::max(1, int(std::floor(want / cfg.dt + 1e-9)));
    };
    NSFConfig nc = nsf_config_from(tc, cfg.dt);
    nc.s = cfg.s;
    nc.record_every = 1;
    auto nsf_all = nsf_integrate(m0, nc, cfg.T);

    std::vector<double> eps, gaps, errs;
    for (double e : cfg.eps) {
        SolverConfig sc;
        sc.eps = e;
        sc.dt = cfg.dt;
        sc.s = cfg.s;
        sc.record_every = spacing(e);
        auto tr = kinetic_integrate(f_ini, L, Q, sc, cfg.T);
        DecomposeOptions opt;
        opt.alpha0 = cfg.alpha0;
        opt.window = cfg.window;
        opt.s = cfg.s;
        LimitRun run;
        run.eps = e;
        run.dec = decompose_solution(tr, f_ini, L, tc, nsf_all, opt);
        for (const auto& r : run.dec.rows) {
            run.sup_disp = std::max(run.sup_disp, r.norm_disp);
            if (r.t < 0.1 - 1e-12) continue;
            run.sup_gap = std::max(run.sup_gap, r.norm_ns_gap);
            run.sup_err = std::max(run.sup_err, r.norm_err);
        }
        run.frequency_expected = c * kp.norm() / e;
        if (ill) {
            // left eigenvector of the +Wave eigenvalue of L_{eps k} on the probe mode
            ModePropagator mp(b, L, kp, e);
            int w = -1;
            for (int idx : mp.hydro_indices(cfg.window))
                if (w < 0 || mp.decomp().lambda(idx).imag() > mp.decomp().lambda(w).imag()) w = idx;
            const VecC left = mp.decomp().Vinv.row(w).transpose();
            std::vector<double> ts, ph;
            double prev = 0, off = 0;
            for (size_t j = 0; j < tr.states.size(); ++j) {
                cplx a = left.transpose() * tr.states[j].data.row(probe).transpose();
                double p = std::arg(a);
                if (j > 0) {
                    while (p + off - prev > M_PI) off -= 2 * M_PI;
                    while (p + off - prev < -M_PI) off += 2 * M_PI;
                }
                prev = p + off;
                ts.push_back(tr.states[j].t);
                ph.push_back(prev);
            }
            double st = 0, sp = 0, stt = 0, stp = 0;
            const double n = double(ts.size());
            for (size_t j = 0; j < ts.size(); ++j) {
                st += ts[j];
                sp += ph[j];
                stt += ts[j] * ts[j];
                stp += ts[j] * ph[j];
            }
            run.frequency = std::abs((n * stp - st * sp) / (n * stt - st * st));
        }
        eps.push_back(e);
        gaps.push_back(run.sup_gap);
        errs.push_back(run.sup_err);
        sw.runs.push_back(std::move(run));
    }
    if (eps.size() >= 4) {
        sw.gap_rate = fit_rate(eps, gaps);
        sw.err_rate = fit_rate(eps, errs);
    }
    return sw;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    ExperimentResult res;
    const auto& e = cfg.experiment;
    if (e == "assumptions")
        res = assumptions(cfg);
    else if (e == "spectral-scan")
        res = spectral_scan(cfg);
    else if (e == "coefficients")
        res = coefficients(cfg);
    else if (e == "projector-expansion")
        res = projector_expansion_exp(cfg);
    else if (e == "kato")
        res = kato(cfg);
    else if (e == "decay")
        res = decay(cfg);
    else if (e == "dispersion")
        res = dispersion(cfg);
    else if (e == "nsf")
        res = nsf(cfg);
    else if (e == "limit-sweep")
        res = limit_sweep_exp(cfg);
    else
        throw Error("Config", "unknown experiment '" + e + "'");
    res.experiment = e;
    return res;
}

}  // namespace kinspec
