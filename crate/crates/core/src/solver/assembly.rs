//! Discrete residual and banded Jacobian of the bounded-domain problem.
//!
//! Unknowns are interleaved per node as `[u, v, c, m_1 .. m_J]`. The speed is
//! carried as one copy per node tied together by continuity rows so that the
//! Jacobian stays banded; the pinning row sits at the middle node.
//!
//! Interior rows use exponentially fitted differences and are scaled by `h`.

use crate::banded::BandMatrix;
use crate::model::VaporisationLaw;

use super::march::{first_crossing, march_bin, march_cell};
use super::{Grid, WaveProblem};

const SENSITIVITY_STEP: f64 = 1e-7;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub n: usize,
    pub bins: usize,
}

impl Layout {
    pub fn block(&self) -> usize {
        3 + self.bins
    }
    pub fn len(&self) -> usize {
        self.n * self.block()
    }
    pub fn u(&self, k: usize) -> usize {
        k * self.block()
    }
    pub fn v(&self, k: usize) -> usize {
        k * self.block() + 1
    }
    pub fn c(&self, k: usize) -> usize {
        k * self.block() + 2
    }
    pub fn m(&self, j: usize, k: usize) -> usize {
        k * self.block() + 3 + j
    }
    pub fn kl(&self) -> usize {
        2 * self.block() - 1
    }
    pub fn ku(&self) -> usize {
        2 * self.block()
    }
}

/// `(P coth P, d/dP)`.
pub(crate) fn fitted_sigma(p: f64) -> (f64, f64) {
    if p.abs() < 1e-3 {
        let p2 = p * p;
        (1.0 + p2 / 3.0 - p2 * p2 / 45.0, 2.0 * p / 3.0 - 4.0 * p * p2 / 45.0)
    } else if p.abs() > 300.0 {
        (p.abs(), p.signum())
    } else {
        let coth = 1.0 / p.tanh();
        let sh = p.sinh();
        (p * coth, coth - p / (sh * sh))
    }
}

/// Weights `w` with `w . (y0, y1, y2)` exact for the derivative at the left
/// node of `1`, `x` and `exp(k x)` on nodes spaced `h`.
pub(crate) fn boundary_weights(k: f64, h: f64) -> [f64; 3] {
    let kh = k * h;
    let e1 = kh.exp_m1();
    // k - e1 / h, with cancellation removed for small kh.
    let num =
        if kh.abs() < 1e-3 { -k * kh * (0.5 + kh / 6.0 + kh * kh / 24.0 + kh * kh * kh / 120.0) } else { k - e1 / h };
    let a2 = if kh.abs() < 1e-8 { -0.5 / h * (1.0 - kh / 6.0) } else { num / (e1 * e1) };
    let a1 = 1.0 / h - 2.0 * a2;
    [-a1 - a2, a1, a2]
}

fn boundary_weights_dk(k: f64, h: f64) -> [f64; 3] {
    let dk = 1e-6 * k.abs().max(1.0);
    let p = boundary_weights(k + dk, h);
    let m = boundary_weights(k - dk, h);
    [(p[0] - m[0]) / (2.0 * dk), (p[1] - m[1]) / (2.0 * dk), (p[2] - m[2]) / (2.0 * dk)]
}

/// Fraction of the segment from `p` to `q` (linear) lying above `theta`,
/// with its partial derivatives.
fn segment_above(p: f64, q: f64, theta: f64) -> (f64, f64, f64) {
    match (p > theta, q > theta) {
        (true, true) => (1.0, 0.0, 0.0),
        (false, false) => (0.0, 0.0, 0.0),
        (true, false) => {
            let d = p - q;
            ((p - theta) / d, (theta - q) / (d * d), (p - theta) / (d * d))
        }
        (false, true) => {
            let d = q - p;
            ((q - theta) / d, (q - theta) / (d * d), (theta - p) / (d * d))
        }
    }
}

/// Fraction of the dual cell around node `k` where the piecewise-linear `u`
/// exceeds `theta`, and its derivatives with respect to `u[k-1], u[k], u[k+1]`.
pub(crate) fn ignited_fraction(ul: f64, uc: f64, ur: f64, theta: f64) -> (f64, [f64; 3]) {
    let pl = 0.5 * (ul + uc);
    let pr = 0.5 * (uc + ur);
    let (gl, gl_p, gl_q) = segment_above(pl, uc, theta);
    let (gr, gr_p, gr_q) = segment_above(uc, pr, theta);
    let frac = 0.5 * (gl + gr);
    let d_ul = 0.5 * gl_p * 0.5;
    let d_uc = 0.5 * (gl_p * 0.5 + gl_q + gr_p + gr_q * 0.5);
    let d_ur = 0.5 * gr_q * 0.5;
    (frac, [d_ul, d_uc, d_ur])
}

/// Mass march sensitivities `dS/d(m_prev, u_prev, u_next, c)` by forward
/// differences around the cell map.
#[allow(clippy::too_many_arguments)]
fn cell_sensitivity(law: &VaporisationLaw, m0: f64, u0: f64, u1: f64, c: f64, tau: f64, h: f64, base: f64) -> [f64; 4] {
    let eval = |m0: f64, u0: f64, u1: f64, c: f64| march_cell(law, m0, u0, u1, c, tau, h).0;
    let step = |x: f64| SENSITIVITY_STEP * (1.0 + x.abs());
    let (dm, du0, du1, dc) = (step(m0), step(u0), step(u1), step(c));
    [
        (eval(m0 + dm, u0, u1, c) - base) / dm,
        (eval(m0, u0 + du0, u1, c) - base) / du0,
        (eval(m0, u0, u1 + du1, c) - base) / du1,
        (eval(m0, u0, u1, c + dc) - base) / dc,
    ]
}

/// Residual `F(X)` and, when asked, its Jacobian.
pub(crate) fn assemble(
    problem: &WaveProblem,
    grid: &Grid,
    tau: f64,
    x: &[f64],
    with_jacobian: bool,
) -> (Vec<f64>, Option<BandMatrix>) {
    let bins = problem.config.bins();
    let lay = Layout { n: grid.n, bins: bins.len() };
    let n = grid.n;
    let h = grid.h();
    let lambda = problem.config.lambda();
    let v_u = problem.config.v_u();
    let theta_i = problem.laws.reaction.theta_i();
    let reaction = &problem.laws.reaction;
    let vap = &problem.laws.vaporisation;
    let mid = grid.mid();

    let mut f = vec![0.0; lay.len()];
    let mut jac = with_jacobian.then(|| BandMatrix::zeros(lay.len(), lay.kl(), lay.ku()));
    let put = |jac: &mut Option<BandMatrix>, i: usize, j: usize, val: f64| {
        if let Some(a) = jac.as_mut() {
            if val != 0.0 {
                a.add(i, j, val);
            }
        }
    };

    let u = |k: usize| x[lay.u(k)];
    let v = |k: usize| x[lay.v(k)];
    let c = |k: usize| x[lay.c(k)];
    let m = |j: usize, k: usize| x[lay.m(j, k)];

    // Boundary rows at x = -a.
    {
        let ck = c(0);
        let w = boundary_weights(ck, h);
        let dw = boundary_weights_dk(ck, h);
        let du = w[0] * u(0) + w[1] * u(1) + w[2] * u(2);
        let ddu = dw[0] * u(0) + dw[1] * u(1) + dw[2] * u(2);
        let r = lay.u(0);
        f[r] = -du + ck * u(0);
        put(&mut jac, r, lay.u(0), -w[0] + ck);
        put(&mut jac, r, lay.u(1), -w[1]);
        put(&mut jac, r, lay.u(2), -w[2]);
        put(&mut jac, r, lay.c(0), -ddu + u(0));

        let kv = ck / lambda;
        let w = boundary_weights(kv, h);
        let dw = boundary_weights_dk(kv, h);
        let dv = w[0] * v(0) + w[1] * v(1) + w[2] * v(2);
        let ddv = dw[0] * v(0) + dw[1] * v(1) + dw[2] * v(2);
        let r = lay.v(0);
        f[r] = -lambda * dv + ck * (v(0) - v_u);
        put(&mut jac, r, lay.v(0), -lambda * w[0] + ck);
        put(&mut jac, r, lay.v(1), -lambda * w[1]);
        put(&mut jac, r, lay.v(2), -lambda * w[2]);
        put(&mut jac, r, lay.c(0), -ddv + v(0) - v_u);
    }

    // Boundary rows at x = a.
    {
        let r = lay.u(n - 1);
        f[r] = u(n - 1) - 1.0;
        put(&mut jac, r, lay.u(n - 1), 1.0);
        let r = lay.v(n - 1);
        f[r] = v(n - 1);
        put(&mut jac, r, lay.v(n - 1), 1.0);
    }

    for k in 1..n - 1 {
        let ck = c(k);
        let (sig_u, dsig_u) = fitted_sigma(ck * h / 2.0);
        let (sig_v, dsig_v) = fitted_sigma(ck * h / (2.0 * lambda));
        let d2u = u(k + 1) - 2.0 * u(k) + u(k - 1);
        let d1u = u(k + 1) - u(k - 1);
        let d2v = v(k + 1) - 2.0 * v(k) + v(k - 1);
        let d1v = v(k + 1) - v(k - 1);
        // Reaction averaged over the dual cell so that the ignition cutoff is
        // located inside the cell rather than snapped to a node.
        let (frac, dfrac) = ignited_fraction(u(k - 1), u(k), u(k + 1), theta_i);
        let f_k = tau * reaction.rate_uncut(u(k));
        let df_k = tau * reaction.rate_uncut_derivative(u(k));
        let rate = f_k * frac;
        let drate = df_k * frac + f_k * dfrac[1];
        let src = h * rate * v(k);
        for (node, d) in [(k - 1, dfrac[0]), (k + 1, dfrac[2])] {
            if d != 0.0 {
                put(&mut jac, lay.u(k), lay.u(node), -h * f_k * d * v(k));
                put(&mut jac, lay.v(k), lay.u(node), h * f_k * d * v(k));
            }
        }

        let r = lay.u(k);
        f[r] = -sig_u * d2u / h + 0.5 * ck * d1u - src;
        put(&mut jac, r, lay.u(k - 1), -sig_u / h - 0.5 * ck);
        put(&mut jac, r, lay.u(k + 1), -sig_u / h + 0.5 * ck);
        put(&mut jac, r, lay.u(k), 2.0 * sig_u / h - h * drate * v(k));
        put(&mut jac, r, lay.v(k), -h * rate);
        put(&mut jac, r, lay.c(k), -dsig_u * 0.5 * d2u + 0.5 * d1u);

        let r = lay.v(k);
        let mut liquid = 0.0;
        if !vap.is_instantaneous() {
            for (j, b) in bins.iter().enumerate() {
                let dm = m(j, k + 1) - m(j, k - 1);
                liquid += b.n0 * dm;
                put(&mut jac, r, lay.m(j, k + 1), 0.5 * ck * b.n0);
                put(&mut jac, r, lay.m(j, k - 1), -0.5 * ck * b.n0);
            }
        }
        f[r] = -lambda * sig_v * d2v / h + 0.5 * ck * d1v + src + 0.5 * ck * liquid;
        put(&mut jac, r, lay.v(k - 1), -lambda * sig_v / h - 0.5 * ck);
        put(&mut jac, r, lay.v(k + 1), -lambda * sig_v / h + 0.5 * ck);
        put(&mut jac, r, lay.v(k), 2.0 * lambda * sig_v / h + h * rate);
        put(&mut jac, r, lay.u(k), h * drate * v(k));
        put(&mut jac, r, lay.c(k), -dsig_v * 0.5 * d2v + 0.5 * d1v + 0.5 * liquid);
    }

    // Instantaneous vaporisation: the mass drop at the crossing point is
    // distributed onto the two neighbouring v rows with hat-function weights.
    if vap.is_instantaneous() && tau > 0.0 {
        let load: f64 = bins.iter().map(|b| b.n0 * b.m_u).sum();
        let u_all: Vec<f64> = (0..n).map(u).collect();
        if let Some((k, s)) = first_crossing(&u_all, vap.theta_v()) {
            let span = u(k) - u(k - 1);
            let interior = s > 0.0 && s < 1.0 && span > 0.0;
            let (ds0, ds1) = if interior { ((s - 1.0) / span, -s / span) } else { (0.0, 0.0) };
            for (node, weight, sign) in [(k - 1, 1.0 - s, 1.0), (k, s, -1.0)] {
                if node == 0 || node == n - 1 {
                    continue;
                }
                let r = lay.v(node);
                let cn = c(node);
                let strength = cn * tau * load;
                f[r] -= strength * weight;
                put(&mut jac, r, lay.c(node), -tau * load * weight);
                put(&mut jac, r, lay.u(k - 1), sign * strength * ds0);
                put(&mut jac, r, lay.u(k), sign * strength * ds1);
            }
        }
    }

    // Speed copies and pinning.
    for k in 0..n {
        let r = lay.c(k);
        if k < mid {
            f[r] = c(k) - c(k + 1);
            put(&mut jac, r, lay.c(k), 1.0);
            put(&mut jac, r, lay.c(k + 1), -1.0);
        } else if k > mid {
            f[r] = c(k) - c(k - 1);
            put(&mut jac, r, lay.c(k), 1.0);
            put(&mut jac, r, lay.c(k - 1), -1.0);
        } else {
            f[r] = u(mid) - theta_i;
            put(&mut jac, r, lay.u(mid), 1.0);
        }
    }

    // Mass rows.
    let nodes = grid.nodes();
    let u_all: Vec<f64> = (0..n).map(u).collect();
    let c_all: Vec<f64> = (0..n).map(c).collect();
    for (j, b) in bins.iter().enumerate() {
        let r = lay.m(j, 0);
        f[r] = m(j, 0) - b.m_u;
        put(&mut jac, r, lay.m(j, 0), 1.0);
        if vap.is_instantaneous() {
            // Step profile: no smooth dependence on the other unknowns.
            let step = march_bin(vap, b.m_u, &nodes, &u_all, &c_all, tau);
            for k in 1..n {
                let r = lay.m(j, k);
                f[r] = m(j, k) - step.m[k];
                put(&mut jac, r, lay.m(j, k), 1.0);
            }
            continue;
        }
        for k in 1..n {
            let r = lay.m(j, k);
            put(&mut jac, r, lay.m(j, k), 1.0);
            let base = march_cell(vap, m(j, k - 1), u(k - 1), u(k), c(k), tau, h).0;
            f[r] = m(j, k) - base;
            if with_jacobian {
                let s = cell_sensitivity(vap, m(j, k - 1), u(k - 1), u(k), c(k), tau, h, base);
                put(&mut jac, r, lay.m(j, k - 1), -s[0]);
                put(&mut jac, r, lay.u(k - 1), -s[1]);
                put(&mut jac, r, lay.u(k), -s[2]);
                put(&mut jac, r, lay.c(k), -s[3]);
            }
        }
    }

    (f, jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_weights_are_exact_on_their_basis() {
        for &(k, h) in &[(1.3, 0.01), (0.2, 0.5), (1e-9, 0.1), (3.0, 0.001), (0.7, 2e-4)] {
            let w = boundary_weights(k, h);
            assert!((w[0] + w[1] + w[2]).abs() < 1e-9 / h);
            assert!((w[1] * h + w[2] * 2.0 * h - 1.0).abs() < 1e-10);
            let e = w[0] + w[1] * (k * h).exp() + w[2] * (2.0 * k * h).exp();
            assert!((e - k).abs() < 1e-9 * (1.0 + k), "k={k} h={h}: {e}");
        }
    }

    #[test]
    fn ignited_fraction_derivatives_match_differences() {
        let pts = [(0.45, 0.52, 0.61), (0.3, 0.4, 0.55), (0.488, 0.51, 0.53), (0.6, 0.7, 0.8), (0.1, 0.2, 0.3)];
        for &(a, b, c) in &pts {
            let (f, d) = ignited_fraction(a, b, c, 0.5);
            assert!((0.0..=1.0).contains(&f));
            let e = 1e-7;
            let num = [
                (ignited_fraction(a + e, b, c, 0.5).0 - ignited_fraction(a - e, b, c, 0.5).0) / (2.0 * e),
                (ignited_fraction(a, b + e, c, 0.5).0 - ignited_fraction(a, b - e, c, 0.5).0) / (2.0 * e),
                (ignited_fraction(a, b, c + e, 0.5).0 - ignited_fraction(a, b, c - e, 0.5).0) / (2.0 * e),
            ];
            for i in 0..3 {
                assert!((num[i] - d[i]).abs() < 1e-6, "{a} {b} {c} [{i}]: {} vs {}", num[i], d[i]);
            }
        }
        // Linear u: the fraction is the exact measure of {u > theta}.
        let (f, _) = ignited_fraction(0.4, 0.5 + 1e-3, 0.6 + 2e-3, 0.5);
        assert!((f - (0.5515 - 0.5) / 0.101).abs() < 1e-12);
    }

    #[test]
    fn fitted_sigma_series_and_closed_form_agree() {
        for p in [9.99e-4, 1.001e-3] {
            let (s, d) = fitted_sigma(p);
            let exact = p / p.tanh();
            assert!((s - exact).abs() < 1e-15);
            let sh = p.sinh();
            assert!((d - (1.0 / p.tanh() - p / (sh * sh))).abs() < 1e-9);
        }
    }
}
