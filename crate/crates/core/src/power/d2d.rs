//! Minimum-power D2D transmit powers that meet a common rate target under
//! the linearized interference term.
//!
//! With `c = R ln2 / Bd` and `y_n` the relative interference change at
//! receiver `n`, the linearized rate constraint of pair `n` reads
//! `h_nn p_n >= psi_n * phi(y_n)` where `phi(y) = exp(c + y) - 1 - y`.
//! `phi` is replaced by its non-decreasing lower envelope (constant `c`
//! left of its minimum). The envelope still implies the exact rate
//! constraint and matches it at the expansion point, and it makes the
//! constraint map monotone, so the cheapest powers are its least fixed point.

use nalgebra::{DMatrix, DVector};

use std::f64::consts::LN_2;

use crate::numeric::illinois;

const FP_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub(crate) struct D2dSurrogate {
    n: usize,
    bd: f64,
    tau: f64,
    /// Row k, column n.
    h: Vec<f64>,
    psi: Vec<f64>,
    /// Interference at the expansion point relative to `psi`.
    offset: Vec<f64>,
    cap: Vec<f64>,
    /// Solved points of the curve, sorted by `t`.
    curve: Vec<CurvePoint>,
    top: Option<CurvePoint>,
}

/// A least fixed point together with its tangent along the curve
/// parametrized by `t = sum(p / cap)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CurvePoint {
    pub t: f64,
    pub c: f64,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub dc: f64,
}

/// Cheapest D2D powers for a rate target.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct D2dPoint {
    pub t: f64,
    pub rate: f64,
    pub powers: Vec<f64>,
    /// `tau * sum(powers)`, J.
    pub cost: f64,
    /// Derivative of `cost` with respect to the rate target.
    pub slope: f64,
    pub dcost_dt: f64,
    pub drate_dt: f64,
}

fn phi_hat(c: f64, y: f64) -> (f64, f64, f64) {
    // value, d/dy, d/dc
    if y >= -c {
        let e = (c + y).exp();
        ((c + y).exp_m1() - y, e - 1.0, e)
    } else {
        (c, 0.0, 1.0)
    }
}

impl D2dSurrogate {
    pub fn new(
        bd: f64,
        n0: f64,
        tau: f64,
        gains: impl Fn(usize, usize) -> f64,
        expansion: &[f64],
        cap: &[f64],
    ) -> Self {
        let n = cap.len();
        let mut h = vec![0.0; n * n];
        for k in 0..n {
            for j in 0..n {
                h[k * n + j] = gains(k, j);
            }
        }
        let mut psi = vec![0.0; n];
        let mut offset = vec![0.0; n];
        for j in 0..n {
            let interference: f64 = (0..n).filter(|&k| k != j).map(|k| h[k * n + j] * expansion[k]).sum();
            psi[j] = bd * n0 + interference;
            offset[j] = interference / psi[j];
        }
        let mut s = Self {
            n,
            bd,
            tau,
            h,
            psi,
            offset,
            cap: cap.to_vec(),
            curve: Vec::new(),
            top: None,
        };
        let origin = s.origin();
        s.curve.push(origin);
        s
    }

    fn gain(&self, k: usize, j: usize) -> f64 {
        self.h[k * self.n + j]
    }

    #[cfg(test)]
    fn c_of(&self, rate: f64) -> f64 {
        rate * LN_2 / self.bd
    }

    fn y(&self, p: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| {
                let s: f64 = (0..self.n).filter(|&k| k != j).map(|k| self.gain(k, j) * p[k]).sum();
                s / self.psi[j] - self.offset[j]
            })
            .collect()
    }

    /// Constraint map, its Jacobian in `p`, and its derivative in `c`.
    fn map(&self, c: f64, p: &[f64]) -> (Vec<f64>, DMatrix<f64>, Vec<f64>) {
        let n = self.n;
        let ys = self.y(p);
        let mut t = vec![0.0; n];
        let mut dc = vec![0.0; n];
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let hjj = self.gain(j, j);
            let (v, dy, dcv) = phi_hat(c, ys[j]);
            t[j] = self.psi[j] * v / hjj;
            dc[j] = self.psi[j] * dcv / hjj;
            if dy != 0.0 {
                for k in 0..n {
                    if k != j {
                        jac[(j, k)] = dy * self.gain(k, j) / hjj;
                    }
                }
            }
        }
        (t, jac, dc)
    }

    /// Solves the fixed-point system with `sum(p / cap) = t` for `(p, c)`,
    /// starting from a guess on or near the curve.
    fn corrector(&self, t: f64, mut p: Vec<f64>, mut c: f64) -> Option<CurvePoint> {
        let n = self.n;
        let mut settled = false;
        let mut last = f64::INFINITY;
        for it in 0..40 {
            let (tv, jac, dcv) = self.map(c, &p);
            let mut resid = DVector::zeros(n + 1);
            for j in 0..n {
                resid[j] = tv[j] - p[j];
            }
            resid[n] = p.iter().zip(&self.cap).map(|(a, b)| a / b).sum::<f64>() - t;
            if resid.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let worst = (0..n).map(|j| resid[j].abs() / p[j].max(1e-9 * self.cap[j])).fold(0.0, f64::max);
            // Newton is quadratic near the curve; growth means the guess is off it.
            if it >= 2 && worst > last {
                return None;
            }
            last = worst;
            let lu = self.bordered(&jac, &dcv).lu();
            settled = settled
                || (0..n).all(|j| resid[j].abs() <= FP_TOL * p[j].max(1e-9 * self.cap[j]))
                    && resid[n].abs() <= FP_TOL * t.max(1e-9);
            if settled {
                let mut rhs = DVector::zeros(n + 1);
                rhs[n] = 1.0;
                let d = lu.solve(&rhs)?;
                return Some(CurvePoint {
                    t,
                    c,
                    dp: (0..n).map(|j| d[j]).collect(),
                    dc: d[n],
                    p,
                });
            }
            let step = lu.solve(&resid)?;
            // Residuals can stall at rounding level; a negligible step also ends it.
            settled = (0..n).all(|j| step[j].abs() <= FP_TOL * p[j].max(1e-9 * self.cap[j]))
                && step[n].abs() <= FP_TOL * c.max(1e-9);
            for j in 0..n {
                p[j] = (p[j] - step[j]).max(0.0);
            }
            c = (c - step[n]).max(0.0);
        }
        None
    }

    /// Jacobian of `(T(p, c) - p, sum(p / cap))` in `(p, c)`.
    fn bordered(&self, jac: &DMatrix<f64>, dcv: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(n + 1, n + 1);
        for j in 0..n {
            for k in 0..n {
                m[(j, k)] = jac[(j, k)] - if j == k { 1.0 } else { 0.0 };
            }
            m[(j, n)] = dcv[j];
            m[(n, j)] = 1.0 / self.cap[j];
        }
        m
    }

    /// Point of the solution curve at normalized total power `t`.
    fn curve_at(&mut self, t: f64) -> Option<CurvePoint> {
        if let Some(hit) = self.curve.iter().find(|q| q.t == t) {
            return Some(hit.clone());
        }
        let near = self
            .curve
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("curve holds its origin")
            .clone();
        let mut from = near;
        // Shorten the predictor step until the corrector converges.
        let mut target = t;
        for _ in 0..100 {
            let dt = target - from.t;
            let guess: Vec<f64> = from.p.iter().zip(&from.dp).map(|(p, d)| (p + d * dt).max(0.0)).collect();
            // c grows like the log of the powers near the origin; a linear
            // prediction of it can overflow the exponentials.
            let c = (from.c + from.dc * dt).clamp(0.0, from.c + 2.0);
            match self.corrector(target, guess, c) {
                Some(q) => {
                    self.remember(q.clone());
                    if target == t {
                        return Some(q);
                    }
                    from = q;
                    target = t;
                }
                None => target = from.t + 0.5 * (target - from.t),
            }
        }
        None
    }

    fn remember(&mut self, q: CurvePoint) {
        let pos = self.curve.partition_point(|x| x.t < q.t);
        if self.curve.get(pos).is_none_or(|x| x.t != q.t) {
            self.curve.insert(pos, q);
        }
    }

    fn origin(&self) -> CurvePoint {
        let n = self.n;
        let p = vec![0.0; n];
        let (_, jac, dcv) = self.map(0.0, &p);
        let m = self.bordered(&jac, &dcv);
        let mut rhs = DVector::zeros(n + 1);
        rhs[n] = 1.0;
        let d = m.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(n + 1));
        CurvePoint {
            t: 0.0,
            c: 0.0,
            dp: (0..n).map(|j| d[j]).collect(),
            dc: d[n],
            p,
        }
    }

    fn rate_of(&self, c: f64) -> f64 {
        c * self.bd / LN_2
    }

    /// Cost data of a curve point.
    fn point_of(&self, q: &CurvePoint) -> D2dPoint {
        let dcost_dt = self.tau * q.dp.iter().sum::<f64>();
        let drate_dt = self.rate_of(q.dc);
        D2dPoint {
            t: q.t,
            rate: self.rate_of(q.c),
            cost: self.tau * q.p.iter().sum::<f64>(),
            slope: if drate_dt > 0.0 { dcost_dt / drate_dt } else { f64::INFINITY },
            dcost_dt,
            drate_dt,
            powers: q.p.clone(),
        }
    }

    /// Curve point at parameter `t` (clamped to the feasible part).
    pub fn at(&mut self, t: f64) -> D2dPoint {
        let top = self.top().t;
        let t = t.clamp(0.0, top);
        match self.curve_at(t) {
            Some(q) => self.point_of(&q),
            None => {
                let q = self.top();
                self.point_of(&q)
            }
        }
    }

    /// End of the feasible lower branch: a power cap or a fold of the curve.
    pub fn top(&mut self) -> CurvePoint {
        if let Some(q) = &self.top {
            return q.clone();
        }
        let q = self.find_top();
        self.top = Some(q.clone());
        q
    }

    pub fn max_rate(&mut self) -> f64 {
        let q = self.top();
        self.rate_of(q.c)
    }

    fn load(&self, q: &CurvePoint) -> f64 {
        q.p.iter().zip(&self.cap).map(|(a, b)| a / b).fold(0.0, f64::max)
    }

    fn find_top(&mut self) -> CurvePoint {
        let t_end = self.n as f64;
        let mut prev = self.curve[0].clone();
        if !(prev.dc > 0.0) {
            return prev;
        }
        let mut dt = 0.02;
        loop {
            let t = (prev.t + dt).min(t_end);
            let q = match self.curve_at(t) {
                Some(q) => q,
                None => return prev,
            };
            let over = self.load(&q) > 1.0;
            let folded = !(q.dc > 0.0);
            if over || folded {
                return self.refine_top(prev, q);
            }
            if t >= t_end {
                return q;
            }
            prev = q;
            dt *= 2.0;
        }
    }

    /// Past the branch end: positive once a cap is exceeded or the curve folds.
    fn overrun(&self, q: &CurvePoint) -> f64 {
        (self.load(q) - 1.0).max(-q.dc)
    }

    /// Narrows `[a, b]` (a feasible and rising, b not) to the branch end.
    fn refine_top(&mut self, a: CurvePoint, b: CurvePoint) -> CurvePoint {
        let (ga, gb) = (self.overrun(&a), self.overrun(&b));
        let t = illinois(
            |t| match self.curve_at(t) {
                Some(q) => self.overrun(&q),
                None => 1.0,
            },
            a.t,
            ga,
            b.t,
            gb,
            1e-13 * b.t,
            200,
        );
        // Step back onto the feasible side if the root landed just past it.
        let mut t = t;
        for _ in 0..60 {
            match self.curve_at(t) {
                Some(q) if self.overrun(&q) <= 0.0 => return q,
                _ => t = a.t + 0.999 * (t - a.t),
            }
        }
        a
    }

    /// Curve point reaching `rate`, or `None` above the branch end.
    pub fn solve(&mut self, rate: f64) -> Option<D2dPoint> {
        let top = self.top();
        let r_top = self.rate_of(top.c);
        if rate > r_top * (1.0 + 1e-12) {
            return None;
        }
        if rate >= r_top {
            return Some(self.point_of(&top));
        }
        if rate <= 0.0 {
            let q = self.curve[0].clone();
            return Some(self.point_of(&q));
        }
        let target = rate * LN_2 / self.bd;
        let t = illinois(
            |t| self.curve_at(t).map_or(f64::NAN, |q| q.c) - target,
            0.0,
            -target,
            top.t,
            top.c - target,
            1e-15 * top.t,
            400,
        );
        let q = self.curve_at(t)?;
        Some(self.point_of(&q))
    }

    /// Checks the linearized rate constraint of every pair at `p`.
    #[cfg(test)]
    pub fn satisfies(&self, rate: f64, p: &[f64], rel_tol: f64) -> bool {
        let c = self.c_of(rate);
        let ys = self.y(p);
        (0..self.n).all(|j| {
            let (v, _, _) = phi_hat(c, ys[j]);
            self.gain(j, j) * p[j] >= self.psi[j] * v * (1.0 - rel_tol)
        })
    }
}
