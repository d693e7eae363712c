#include "flapopt/gcmma.hpp"

#include <cmath>

#include "flapopt/errors.hpp"

namespace flapopt {

namespace {

using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double amax(const ArrayXd& v) { return v.size() ? v.abs().maxCoeff() : 0.0; }

struct Approximation {
    ArrayXd p0, q0;       // n
    MatrixXd P, Q;        // m x n
    VectorXd b;           // m
    double r0 = 0.0;      // constant term so the approximation interpolates f0
    ArrayXd low, upp, alfa, beta;
    double raa0 = 0.0;
    VectorXd raa;

    double f0_at(const ArrayXd& x) const {
        return r0 + (p0 / (upp - x) + q0 / (x - low)).sum();
    }
    VectorXd f_at(const ArrayXd& x) const {
        VectorXd g = P * (1.0 / (upp - x)).matrix() + Q * (1.0 / (x - low)).matrix();
        return g - b;
    }
};

struct SubSolution {
    ArrayXd x;
    VectorXd y, lam, xsi, eta, mu, s;
    double z = 0.0, zet = 0.0;
};

/// Svanberg's primal-dual interior-point solve of the separable subproblem.
SubSolution subsolv(const Approximation& ap, double a0, const VectorXd& a, const VectorXd& c,
                    const VectorXd& d, double epsimin) {
    const Eigen::Index n = ap.p0.size(), m = ap.b.size();
    const ArrayXd &alfa = ap.alfa, &beta = ap.beta, &low = ap.low, &upp = ap.upp;

    ArrayXd x = 0.5 * (alfa + beta);
    ArrayXd y = ArrayXd::Ones(m);
    double z = 1.0, zet = 1.0;
    ArrayXd lam = ArrayXd::Ones(m), s = ArrayXd::Ones(m);
    ArrayXd xsi = (1.0 / (x - alfa)).max(1.0);
    ArrayXd eta = (1.0 / (beta - x)).max(1.0);
    ArrayXd mu = (0.5 * c.array()).max(1.0);
    const ArrayXd ca = c.array(), da = d.array(), aa = a.array();

    double epsi = 1.0;
    while (epsi > epsimin) {
        auto residual = [&](double& rmax) {
            ArrayXd ux1 = upp - x, xl1 = x - low;
            ArrayXd plam = ap.p0 + (ap.P.transpose() * lam.matrix()).array();
            ArrayXd qlam = ap.q0 + (ap.Q.transpose() * lam.matrix()).array();
            ArrayXd gvec = (ap.P * (1.0 / ux1).matrix() + ap.Q * (1.0 / xl1).matrix()).array();
            ArrayXd rex = plam / ux1.square() - qlam / xl1.square() - xsi + eta;
            ArrayXd rey = ca + da * y - mu - lam;
            double rez = a0 - zet - (aa * lam).sum();
            ArrayXd relam = gvec - aa * z - y + s - ap.b.array();
            ArrayXd rexsi = xsi * (x - alfa) - epsi;
            ArrayXd reeta = eta * (beta - x) - epsi;
            ArrayXd remu = mu * y - epsi;
            double rezet = zet * z - epsi;
            ArrayXd res = lam * s - epsi;
            double sq = rex.square().sum() + rey.square().sum() + rez * rez +
                        relam.square().sum() + rexsi.square().sum() + reeta.square().sum() +
                        remu.square().sum() + rezet * rezet + res.square().sum();
            rmax = std::max({amax(rex), amax(rey), std::abs(rez), amax(relam), amax(rexsi),
                             amax(reeta), amax(remu), std::abs(rezet), amax(res)});
            return std::sqrt(sq);
        };

        double residumax = 0.0;
        double residunorm = residual(residumax);
        int ittt = 0;
        while (residumax > 0.9 * epsi && ittt < 200) {
            ++ittt;
            ArrayXd ux1 = upp - x, xl1 = x - low;
            ArrayXd ux2 = ux1.square(), xl2 = xl1.square();
            ArrayXd ux3 = ux1 * ux2, xl3 = xl1 * xl2;
            ArrayXd uxinv2 = 1.0 / ux2, xlinv2 = 1.0 / xl2;
            ArrayXd plam = ap.p0 + (ap.P.transpose() * lam.matrix()).array();
            ArrayXd qlam = ap.q0 + (ap.Q.transpose() * lam.matrix()).array();
            ArrayXd gvec = (ap.P * (1.0 / ux1).matrix() + ap.Q * (1.0 / xl1).matrix()).array();
            MatrixXd GG = ap.P * uxinv2.matrix().asDiagonal() - ap.Q * xlinv2.matrix().asDiagonal();
            ArrayXd dpsidx = plam / ux2 - qlam / xl2;
            ArrayXd delx = dpsidx - epsi / (x - alfa) + epsi / (beta - x);
            ArrayXd dely = ca + da * y - lam - epsi / y;
            double delz = a0 - (aa * lam).sum() - epsi / z;
            ArrayXd dellam = gvec - aa * z - y - ap.b.array() + epsi / lam;
            ArrayXd diagx = 2.0 * (plam / ux3 + qlam / xl3) + xsi / (x - alfa) + eta / (beta - x);
            ArrayXd diagy = da + mu / y;
            ArrayXd diaglamyi = s / lam + 1.0 / diagy;

            // m is small here; solve the (m+1) system
            VectorXd blam = (dellam + dely / diagy).matrix() - GG * (delx / diagx).matrix();
            MatrixXd AA(m + 1, m + 1);
            AA.topLeftCorner(m, m) =
                MatrixXd(diaglamyi.matrix().asDiagonal()) +
                GG * (1.0 / diagx).matrix().asDiagonal() * GG.transpose();
            AA.topRightCorner(m, 1) = a;
            AA.bottomLeftCorner(1, m) = a.transpose();
            AA(m, m) = -zet / z;
            VectorXd bb(m + 1);
            bb.head(m) = blam;
            bb[m] = delz;
            VectorXd solut = AA.partialPivLu().solve(bb);
            ArrayXd dlam = solut.head(m).array();
            const double dz = solut[m];
            ArrayXd dx = -delx / diagx - (GG.transpose() * dlam.matrix()).array() / diagx;
            ArrayXd dy = -dely / diagy + dlam / diagy;
            ArrayXd dxsi = -xsi + epsi / (x - alfa) - (xsi * dx) / (x - alfa);
            ArrayXd deta = -eta + epsi / (beta - x) + (eta * dx) / (beta - x);
            ArrayXd dmu = -mu + epsi / y - (mu * dy) / y;
            const double dzet = -zet + epsi / z - zet * dz / z;
            ArrayXd ds = -s + epsi / lam - (s * dlam) / lam;

            double stm = 1.0;
            auto cap = [&](const ArrayXd& v, const ArrayXd& dv) {
                for (Eigen::Index i = 0; i < v.size(); ++i)
                    stm = std::max(stm, -1.01 * dv[i] / v[i]);
            };
            cap(y, dy);
            cap(lam, dlam);
            cap(xsi, dxsi);
            cap(eta, deta);
            cap(mu, dmu);
            cap(s, ds);
            stm = std::max(stm, -1.01 * dz / z);
            stm = std::max(stm, -1.01 * dzet / zet);
            cap(x - alfa, dx);
            cap(beta - x, -dx);
            double steg = 1.0 / stm;

            const ArrayXd xold = x, yold = y, lamold = lam, xsiold = xsi, etaold = eta,
                          muold = mu, sold = s;
            const double zold = z, zetold = zet;
            double resinew = 2.0 * residunorm;
            int itto = 0;
            while (resinew > residunorm && itto < 50) {
                ++itto;
                x = xold + steg * dx;
                y = yold + steg * dy;
                z = zold + steg * dz;
                lam = lamold + steg * dlam;
                xsi = xsiold + steg * dxsi;
                eta = etaold + steg * deta;
                mu = muold + steg * dmu;
                zet = zetold + steg * dzet;
                s = sold + steg * ds;
                resinew = residual(residumax);
                steg *= 0.5;
            }
            residunorm = resinew;
        }
        epsi *= 0.1;
    }

    SubSolution sol;
    sol.x = x;
    sol.y = y.matrix();
    sol.z = z;
    sol.lam = lam.matrix();
    sol.xsi = xsi.matrix();
    sol.eta = eta.matrix();
    sol.mu = mu.matrix();
    sol.zet = zet;
    sol.s = s.matrix();
    return sol;
}

Approximation build_approximation(const ArrayXd& xval, const ArrayXd& xmin, const ArrayXd& xmax,
                                  const ArrayXd& low, const ArrayXd& upp, double raa0,
                                  const VectorXd& raa, double f0val, const VectorXd& fval,
                                  const VectorXd& df0, const MatrixXd& df,
                                  const GcmmaOptions& o) {
    const Eigen::Index n = xval.size(), m = fval.size();
    Approximation ap;
    ap.low = low;
    ap.upp = upp;
    ap.raa0 = raa0;
    ap.raa = raa;
    ap.alfa = (low + o.albefa * (xval - low)).max(xval - o.move * (xmax - xmin)).max(xmin);
    ap.beta = (upp - o.albefa * (upp - xval)).min(xval + o.move * (xmax - xmin)).min(xmax);

    const ArrayXd xmami = (xmax - xmin).max(1e-5);
    const ArrayXd ux2 = (upp - xval).square(), xl2 = (xval - low).square();

    ArrayXd dp = df0.array().max(0.0), dq = (-df0.array()).max(0.0);
    ArrayXd pq = 0.001 * (dp + dq) + raa0 / xmami;
    ap.p0 = (dp + pq) * ux2;
    ap.q0 = (dq + pq) * xl2;

    ap.P.resize(m, n);
    ap.Q.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        ArrayXd dpi = df.row(i).array().max(0.0), dqi = (-df.row(i).array()).max(0.0);
        ArrayXd pqi = 0.001 * (dpi + dqi) + raa[i] / xmami;
        ap.P.row(i) = ((dpi + pqi) * ux2).matrix();
        ap.Q.row(i) = ((dqi + pqi) * xl2).matrix();
    }
    ap.b = ap.P * (1.0 / (upp - xval)).matrix() + ap.Q * (1.0 / (xval - low)).matrix() - fval;
    ap.r0 = f0val - (ap.p0 / (upp - xval) + ap.q0 / (xval - low)).sum();
    return ap;
}

double kkt_residual(const ArrayXd& x, const SubSolution& sol, const ArrayXd& xmin,
                    const ArrayXd& xmax, const VectorXd& df0, const MatrixXd& df,
                    const VectorXd& fval, double a0, const VectorXd& a, const VectorXd& c,
                    const VectorXd& d) {
    const ArrayXd rex = df0.array() + (df.transpose() * sol.lam).array() - sol.xsi.array() +
                        sol.eta.array();
    const ArrayXd rey = c.array() + d.array() * sol.y.array() - sol.mu.array() - sol.lam.array();
    const double rez = a0 - sol.zet - a.dot(sol.lam);
    const ArrayXd relam = fval.array() - a.array() * sol.z - sol.y.array() + sol.s.array();
    const ArrayXd rexsi = sol.xsi.array() * (x - xmin);
    const ArrayXd reeta = sol.eta.array() * (xmax - x);
    const ArrayXd remu = sol.mu.array() * sol.y.array();
    const double rezet = sol.zet * sol.z;
    const ArrayXd res = sol.lam.array() * sol.s.array();
    return std::max({amax(rex), amax(rey), std::abs(rez), amax(relam), amax(rexsi), amax(reeta),
                     amax(remu), std::abs(rezet), amax(res)});
}

} // namespace

GcmmaResult gcmma_minimize(const GcmmaValueFn& value, const GcmmaGradientFn& gradient,
                           const VectorXd& x0, const VectorXd& xmin_in, const VectorXd& xmax_in,
                           int n_constraints, const GcmmaOptions& o,
                           const std::function<void(const GcmmaIterationInfo&)>& log) {
    const Eigen::Index n = x0.size();
    const Eigen::Index m = n_constraints;
    if (xmin_in.size() != n || xmax_in.size() != n)
        throw ValidationError("gcmma bounds must match the design dimension");
    for (Eigen::Index j = 0; j < n; ++j)
        if (!(xmin_in[j] < xmax_in[j])) throw ValidationError("gcmma needs xmin < xmax");

    const ArrayXd xmin = xmin_in.array(), xmax = xmax_in.array();
    const double a0 = 1.0;
    const VectorXd a = VectorXd::Zero(m);
    const VectorXd c = VectorXd::Constant(m, o.c_penalty);
    const VectorXd d = VectorXd::Ones(m);

    ArrayXd xval = x0.array().min(xmax).max(xmin);
    ArrayXd xold1 = xval, xold2 = xval;
    ArrayXd low = xval - o.asyinit * (xmax - xmin);
    ArrayXd upp = xval + o.asyinit * (xmax - xmin);

    double f0val;
    VectorXd fval(m), df0(n);
    MatrixXd df(m, n);
    gradient(xval.matrix(), f0val, fval, df0, df);

    GcmmaResult result;
    auto consider_best = [&](const VectorXd& x, double f0, const VectorXd& f) {
        const double viol = m > 0 ? f.maxCoeff() : 0.0;
        if (viol <= o.feasibility_tol && (!result.found_feasible || f0 < result.f0_best)) {
            result.found_feasible = true;
            result.x_best = x;
            result.f0_best = f0;
        }
    };
    consider_best(xval.matrix(), f0val, fval);

    int outer = 0;
    double kktres = std::numeric_limits<double>::infinity();
    while (outer < o.max_outer) {
        ++outer;
        // moving asymptotes
        if (outer >= 3) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double zzz = (xval[j] - xold1[j]) * (xold1[j] - xold2[j]);
                const double factor = zzz > 0 ? o.asyincr : (zzz < 0 ? o.asydecr : 1.0);
                low[j] = xval[j] - factor * (xold1[j] - low[j]);
                upp[j] = xval[j] + factor * (upp[j] - xold1[j]);
            }
            low = low.max(xval - 10.0 * (xmax - xmin)).min(xval - 0.01 * (xmax - xmin));
            upp = upp.min(xval + 10.0 * (xmax - xmin)).max(xval + 0.01 * (xmax - xmin));
        } else {
            low = xval - o.asyinit * (xmax - xmin);
            upp = xval + o.asyinit * (xmax - xmin);
        }
        const ArrayXd xmami = (xmax - xmin).max(1e-5);
        double raa0 = std::max(o.raa0eps, 0.1 / double(n) * (df0.array().abs() * xmami).sum());
        VectorXd raa(m);
        for (Eigen::Index i = 0; i < m; ++i)
            raa[i] = std::max(o.raaeps, 0.1 / double(n) * (df.row(i).array().abs() * xmami).sum());

        Approximation ap =
            build_approximation(xval, xmin, xmax, low, upp, raa0, raa, f0val, fval, df0, df, o);
        SubSolution sol = subsolv(ap, a0, a, c, d, o.epsimin);

        double f0new;
        VectorXd fnew(m);
        value(sol.x.matrix(), f0new, fnew);
        double f0app = ap.f0_at(sol.x);
        VectorXd fapp = ap.f_at(sol.x);

        auto conservative = [&]() {
            if (f0app + o.epsimin < f0new) return false;
            for (Eigen::Index i = 0; i < m; ++i)
                if (fapp[i] + o.epsimin < fnew[i]) return false;
            return true;
        };

        int inner = 0;
        while (!conservative() && inner < o.max_inner) {
            ++inner;
            // raise conservatism where the approximation under-estimates
            const ArrayXd xxux = (sol.x - xval) / (upp - sol.x);
            const ArrayXd xxxl = (sol.x - xval) / (sol.x - low);
            const double raacof =
                std::max(1e-12, (xxux * xxxl * ((upp - low) / xmami)).sum());
            if (f0new > f0app + 0.5 * o.epsimin)
                raa0 = std::min(1.1 * (raa0 + (f0new - f0app) / raacof), 10.0 * raa0);
            for (Eigen::Index i = 0; i < m; ++i)
                if (fnew[i] > fapp[i] + 0.5 * o.epsimin)
                    raa[i] = std::min(1.1 * (raa[i] + (fnew[i] - fapp[i]) / raacof),
                                      10.0 * raa[i]);
            ap = build_approximation(xval, xmin, xmax, low, upp, raa0, raa, f0val, fval, df0, df,
                                     o);
            sol = subsolv(ap, a0, a, c, d, o.epsimin);
            value(sol.x.matrix(), f0new, fnew);
            f0app = ap.f0_at(sol.x);
            fapp = ap.f_at(sol.x);
        }

        xold2 = xold1;
        xold1 = xval;
        const double step = (sol.x - xval).abs().maxCoeff();
        xval = sol.x;

        gradient(xval.matrix(), f0val, fval, df0, df);
        consider_best(xval.matrix(), f0val, fval);
        kktres = kkt_residual(xval, sol, xmin, xmax, df0, df, fval, a0, a, c, d);

        if (log) {
            GcmmaIterationInfo info;
            info.outer = outer;
            info.inner = inner;
            info.x = xval.matrix();
            info.f0 = f0val;
            info.f = fval;
            info.f0_approx = f0app;
            info.f_approx = fapp;
            info.kkt_residual = kktres;
            info.asymptote_low = low.matrix();
            info.asymptote_upp = upp.matrix();
            log(info);
        }
        if (kktres < o.kkt_tol) break;
        if (o.step_tol > 0.0 && step < o.step_tol) break;
    }

    result.x = xval.matrix();
    result.f0 = f0val;
    result.f = fval;
    result.outer_iterations = outer;
    result.kkt_residual = kktres;
    if (!result.found_feasible) {
        result.x_best = result.x;
        result.f0_best = f0val;
    }
    return result;
}

} // namespace flapopt
