// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <igarad/io.hpp>
#include <igarad/pipeline.hpp>
#include <igarad/studies.hpp>

using namespace igarad;
using std::numbers::pi;

#ifndef IGARAD_CONFIG_DIR
#define IGARAD_CONFIG_DIR "configs"
#endif

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

DomainConfig mhz_domain(double theta)
{
    DomainConfig d;
    d.a = 0.01;
    d.c_sound = 1500;
    d.f = 1.0e6;
    d.r = 2 * near_field_length(d);
    d.theta = theta;
    return d;
}

// Gauss-Legendre by Golub-Welsch, independent of the library rule
void golub_welsch(int n, std::vector<double>& x, std::vector<double>& w)
{
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i)
        T(i, i - 1) = T(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        x[i] = es.eigenvalues()(i);
        w[i] = 2 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    }
}

double naive_b(const std::vector<double>& t, int i, int k, double s)
{
    if (k == 1)
        return (t[i] <= s && s < t[i + 1]) ? 1.0 : 0.0;
    double v = 0;
    if (t[i + k - 1] > t[i])
        v += (s - t[i]) / (t[i + k - 1] - t[i]) * naive_b(t, i, k - 1, s);
    if (t[i + k] > t[i + 1])
        v += (t[i + k] - s) / (t[i + k] - t[i + 1]) * naive_b(t, i + 1, k - 1, s);
    return v;
}

double naive_db(const std::vector<double>& t, int i, int k, double s)
{
    double v = 0;
    if (t[i + k - 1] > t[i])
        v += (k - 1) / (t[i + k - 1] - t[i]) * naive_b(t, i, k - 1, s);
    if (t[i + k] > t[i + 1])
        v -= (k - 1) / (t[i + k] - t[i + 1]) * naive_b(t, i + 1, k - 1, s);
    return v;
}

struct Extremum {
    bool is_max;
    double y, value, prominence;
};

// local extrema of |u| along a profile with their topographic prominence
std::vector<Extremum> extrema(const std::vector<FieldSample>& p)
{
    std::vector<Extremum> out;
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        const double v = p[i].magnitude();
        const bool mx = v > p[i - 1].magnitude() && v >= p[i + 1].magnitude();
        const bool mn = v < p[i - 1].magnitude() && v <= p[i + 1].magnitude();
        if (!mx && !mn)
            continue;
        double L = v, R = v;
        for (std::size_t j = i; j-- > 0;) {
            const double w = p[j].magnitude();
            if (mx ? w > v : w < v)
                break;
            L = mx ? std::min(L, w) : std::max(L, w);
        }
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            const double w = p[j].magnitude();
            if (mx ? w > v : w < v)
                break;
            R = mx ? std::min(R, w) : std::max(R, w);
        }
        out.push_back({mx, p[i].y, v, mx ? v - std::max(L, R) : std::min(L, R) - v});
    }
    return out;
}

// the desk-scale radiation run shared by criteria 4, 7, 8 and 9
struct Desk {
    RunConfig cfg;
    RunResult gmres_run;
    std::vector<cplx> direct;
};

Desk& desk()
{
    static Desk d = [] {
        Desk d;
        d.cfg = parse_run_config(read_json(std::string(IGARAD_CONFIG_DIR) + "/desk.json"));
        RunOptions opt;
        opt.write_outputs = false;
        d.gmres_run = run(d.cfg, opt);
        d.direct = direct_solve(d.gmres_run.system.A, d.gmres_run.system.b);
        return d;
    }();
    return d;
}

// ---------------------------------------------------------------------------

Outcome geometry_exactness()
{
    double worst = 0;
    for (double th : {pi / 20, pi / 4}) {
        const auto d = mhz_domain(th);
        const auto F = make_semicircle_map(d);
        for (int s = 0; s < 1000; ++s) {
            const double t = s / 999.0;
            for (Point2 p : {eval_map(F, 0, t), eval_map(F, 1, t), eval_map(F, t, 1)})
                worst = std::max(worst, std::abs(norm(p) - d.r));
        }
    }
    return {worst <= 1e-12, fmt("max | |F| - r | = %.2e over 3 arcs x 1000 samples x 2 angles", worst)};
}

Outcome parametrization_quality()
{
    const auto q4 = summarize_quality(quality_map(make_semicircle_map(mhz_domain(pi / 4)), 200));
    const auto q20 = summarize_quality(quality_map(make_semicircle_map(mhz_domain(pi / 20)), 200));
    const bool min_ok = q4.min >= 0.35 && q4.min <= 0.55;
    const bool frac_ok = q4.fraction_good >= 0.75;
    const bool mean_ok = q4.mean > q20.mean;
    return {min_ok && frac_ok && mean_ok,
            fmt("theta=pi/4: min J_r %.2e (want [0.35,0.55]) %s, J_r>=0.8 on %.1f%% (want >=75%%) %s; "
                "mean %.4f vs %.4f at pi/20 %s",
                q4.min, min_ok ? "ok" : "MISS", 100 * q4.fraction_good, frac_ok ? "ok" : "MISS", q4.mean, q20.mean,
                mean_ok ? "ok" : "MISS")};
}

Outcome assembly_oracle()
{
    // 2 x 2 bilinear elements on the identity map of the unit square
    const auto F = coons_patch(make_segment({0, 0}, {1, 0}), make_segment({0, 1}, {1, 1}), make_segment({0, 0}, {0, 1}),
                               make_segment({1, 0}, {1, 1}));
    const TensorProductSpace sp{make_uniform_open_knots(2, 3), make_uniform_open_knots(2, 3)};
    const auto G = assemble(sp, F, QuadratureRule::for_order(2));
    const std::vector<double> t(sp.xi.knots().begin(), sp.xi.knots().end());
    std::vector<double> gx, gw;
    golub_welsch(12, gx, gw);
    const int N = sp.size();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(N, N), M = S;
    for (double ya : {0.0, 0.5})
        for (double xa : {0.0, 0.5})
            for (int qy = 0; qy < 12; ++qy)
                for (int qx = 0; qx < 12; ++qx) {
                    const double x = xa + 0.25 * (1 + gx[qx]), y = ya + 0.25 * (1 + gx[qy]);
                    const double w = 0.0625 * gw[qx] * gw[qy];
                    for (int p = 0; p < N; ++p)
                        for (int q = 0; q < N; ++q) {
                            const auto [i, j] = sp.unflatten(p);
                            const auto [i2, j2] = sp.unflatten(q);
                            const double bi = naive_b(t, i, 2, x), bj = naive_b(t, j, 2, y);
                            const double bi2 = naive_b(t, i2, 2, x), bj2 = naive_b(t, j2, 2, y);
                            M(p, q) += w * bi * bj * bi2 * bj2;
                            S(p, q) += w * (naive_db(t, i, 2, x) * bj * naive_db(t, i2, 2, x) * bj2
                                            + bi * naive_db(t, j, 2, y) * bi2 * naive_db(t, j2, 2, y));
                        }
                }
    double ds = 0, dm = 0;
    for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q) {
            ds = std::max(ds, std::abs(G.S.at(p, q) - S(p, q)));
            dm = std::max(dm, std::abs(G.M.at(p, q) - M(p, q)));
        }
    ds /= S.cwiseAbs().maxCoeff();
    dm /= M.cwiseAbs().maxCoeff();

    // totals on the semicircle
    const auto d = mhz_domain(pi / 4);
    const auto Fs = make_semicircle_map(d);
    const auto ss = make_solution_space(4, 4, 20, 20, d, Fs, true);
    const auto Gs = assemble(ss, Fs, QuadratureRule::for_order(4));
    double mass = 0, edge = 0;
    for (double v : Gs.M.values())
        mass += v;
    for (double v : Gs.E.values())
        edge += v;
    const double area = pi * d.r * d.r / 2, arc = pi * d.r;
    const double em = std::abs(mass - area) / area, ee = std::abs(edge - arc) / arc;
    return {ds <= 1e-9 && dm <= 1e-9 && em <= 1e-10 && ee <= 1e-8,
            fmt("S rel %.1e, M rel %.1e vs oracle; sum M vs area %.1e, sum E vs pi r %.1e", ds, dm, em, ee)};
}

Outcome dirichlet_correctness()
{
    const auto& r = desk().gmres_run;
    const double direct_defect = [&] {
        const SolutionField f(r.space, *r.geometry, expand_solution(r.partition, desk().direct, r.system.dirichlet_values),
                              r.k());
        return dirichlet_defect(f, r.domain, 200);
    }();
    return {r.dirichlet_defect <= 1e-10 && direct_defect <= 1e-10,
            fmt("max |u^h - C| on 200 aperture samples: %.1e (gmres), %.1e (direct)", r.dirichlet_defect,
                direct_defect)};
}

Outcome mms_convergence()
{
    const MmsSetup s;
    const auto q = convergence_study(s, 3, 4, 16);
    const auto c = convergence_study(s, 4, 4, 16);
    const double rq = q.observed_order(), rc = c.observed_order();
    std::ostringstream rates;
    for (const auto* t : {&q, &c})
        for (std::size_t i = 1; i < t->rows.size(); ++i)
            rates << (i == 1 ? (t == &q ? " quadratic" : "; cubic") : ",") << ' ' << fmt("%.2f", t->rows[i].rate);
    return {rq >= 2.7 && rq <= 3.3 && rc >= 3.7 && rc <= 4.3 && q.monotone && c.monotone,
            fmt("observed order %.3f (quadratic), %.3f (cubic); rates per level:", rq, rc) + rates.str()};
}

Outcome pollution_trend()
{
    const std::vector<double> ks{20, 40, 80, 160};
    const auto q = pollution_study(MmsSetup{}, 3, ks, 8.0);
    const auto c = pollution_study(MmsSetup{}, 4, ks, 8.0);
    const double ratio = c.growth() / q.growth();
    return {ratio < 1.0, fmt("8 dofs/wavelength, k 20..160: growth quadratic %.3f, cubic %.3f, ratio %.3f", q.growth(),
                             c.growth(), ratio)};
}

Outcome preconditioned_solver()
{
    const auto& d = desk();
    const auto& rep = d.gmres_run.solve;
    const auto& x = d.gmres_run.alpha;
    const auto& part = d.gmres_run.partition;
    double diff = 0, ref = 0;
    for (int p = 0; p < part.n_free(); ++p) {
        diff += std::norm(x[part.free[p]] - d.direct[p]);
        ref += std::norm(d.direct[p]);
    }
    const double rel = std::sqrt(diff / ref);
    const bool ok = rep.converged && rep.preconditioned_residual <= 1e-8 && rep.outer_iterations <= 3
                    && rep.true_residual <= 100 * d.cfg.gmres.tol && rel <= 1e-7;
    return {ok, fmt("k = %.1f, N_free = %d, beta = %.3e: outer %d, inner %d, prec. res %.2e, true res %.2e, "
                    "vs direct %.1e",
                    d.gmres_run.k(), part.n_free(), d.cfg.beta(), rep.outer_iterations, rep.inner_iterations,
                    rep.preconditioned_residual, rep.true_residual, rel)};
}

Outcome physical_sanity()
{
    const auto& r = desk().gmres_run;
    const double Nf = near_field_length(r.domain);
    const auto& ax = r.axis;
    const double peak = ax[argmax_magnitude(ax)].magnitude();
    const double peak_y = ax[argmax_magnitude(ax)].y;
    int near_max = 0, near_min = 0, far_max = 0;
    for (const auto& e : extrema(ax)) {
        if (e.prominence < 0.03 * peak)
            continue; // reflection ripple of the first-order absorbing boundary
        if (e.y < Nf)
            (e.is_max ? near_max : near_min)++;
        else if (e.is_max)
            ++far_max;
    }
    const bool oscillates = near_max >= 1 && near_min >= 1;
    const bool far_ok = far_max <= 1;
    const bool peak_ok = peak_y > Nf;

    const double C = std::abs(r.domain.C);
    double flat = 0, jump = 0, bmax = 0;
    for (std::size_t i = 0; i < r.bottom.size(); ++i) {
        const auto& b = r.bottom[i];
        bmax = std::max(bmax, b.magnitude());
        if (std::abs(b.x) <= r.domain.a)
            flat = std::max(flat, std::abs(b.magnitude() - C));
        if (i > 0)
            jump = std::max(jump, std::abs(b.magnitude() - r.bottom[i - 1].magnitude()));
    }
    // smooth: no sample-to-sample change beyond what a wave of number k can produce
    const double dx = 2 * r.domain.r / (r.bottom.size() - 1);
    const double jump_bound = r.k() * dx * bmax;
    const bool flat_ok = flat <= 1e-10, smooth_ok = jump <= jump_bound;
    return {oscillates && far_ok && peak_ok && flat_ok && smooth_ok,
            fmt("N_f = %.4f: near-field extrema %d max / %d min, far-field maxima %d, peak |u| %.3f at y = %.4f; "
                "bottom ||u|-C| on aperture %.1e, max step %.3f <= %.3f",
                Nf, near_max, near_min, far_max, peak, peak_y, flat, jump, jump_bound)};
}

Outcome structural_invariants()
{
    const auto& sys = desk().gmres_run.system;
    const double sym = symmetry_defect(sys.A), herm = symmetry_defect(sys.A, true);
    const int p = std::max(desk().cfg.order_xi, desk().cfg.order_eta) - 1;
    const double bound = static_cast<double>((2 * p + 1) * (2 * p + 1)) / sys.A.rows();
    const double dens = density(sys.A);

    const auto d = mhz_domain(pi / 4);
    const auto F = make_semicircle_map(d);
    const auto sp = make_solution_space(3, 3, 10, 9, d, F, true);
    const auto G = assemble(sp, F, QuadratureRule::for_order(3));
    Eigen::MatrixXd M(sp.size(), sp.size());
    for (int r = 0; r < sp.size(); ++r)
        for (int c = 0; c < sp.size(); ++c)
            M(r, c) = G.M.at(r, c);
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff();
    return {sym <= 1e-13 && herm > 0 && dens <= bound && lmin > 0,
            fmt("|A-A^T|max %.1e, |A-A^H|max %.2e, density %.2e <= %.2e, lambda_min(M) %.2e (N=%d)", sym, herm, dens,
                bound, lmin, sp.size())};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"geometry exactness", geometry_exactness},
        {"parametrization quality", parametrization_quality},
        {"assembly oracle equivalence", assembly_oracle},
        {"Dirichlet correctness", dirichlet_correctness},
        {"MMS convergence", mms_convergence},
        {"pollution trend", pollution_trend},
        {"preconditioned solver", preconditioned_solver},
        {"physical sanity", physical_sanity},
        {"structural invariants", structural_invariants},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::printf("%s %zu %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                    sec);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
