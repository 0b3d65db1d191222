//! Explicit adaptive Dormand-Prince 8(5,3) integrator with PI step control.
//!
//! Follows the structure of Hairer's DOP853: twelve stages, a combined
//! fifth/third order error estimate and the FSAL derivative at the step end.

use super::dop853_tableau::{A, A_EXTRA, B, C, C_EXTRA, D, E3, E5, EXTRA_STAGES, STAGES};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.333;
const MAX_FACTOR: f64 = 6.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 1.0 / 8.0 - BETA * 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepError {
    /// The step size fell below a few ulps of the independent variable.
    Underflow { t: f64, h: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_step: f64,
}

/// Integrator state for `dy/dt = f(t, y)` advancing in `direction` (±1).
pub struct Dop853<F> {
    rhs: F,
    tol: Tolerances,
    direction: f64,
    t: f64,
    y: Vec<f64>,
    f: Vec<f64>,
    t_old: f64,
    y_old: Vec<f64>,
    f_old: Vec<f64>,
    h_abs: f64,
    err_old: f64,
    k: Vec<Vec<f64>>,
    scratch: Vec<f64>,
    /// Continuous-extension polynomial of the last step, built on demand.
    dense: Option<Vec<Vec<f64>>>,
    evaluations: usize,
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl<F> Dop853<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    pub fn new(mut rhs: F, t0: f64, y0: Vec<f64>, direction: f64, tol: Tolerances) -> Self {
        let n = y0.len();
        let mut f0 = vec![0.0; n];
        rhs(t0, &y0, &mut f0);
        let mut s = Self {
            rhs,
            tol,
            direction: direction.signum(),
            t: t0,
            y: y0.clone(),
            f: f0.clone(),
            t_old: t0,
            y_old: y0,
            f_old: f0,
            h_abs: 0.0,
            err_old: 1e-4,
            k: vec![vec![0.0; n]; STAGES + 1 + EXTRA_STAGES],
            scratch: vec![0.0; n],
            dense: None,
            evaluations: 1,
        };
        s.h_abs = s.initial_step();
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Seventh-order continuous extension on the last accepted step,
    /// `theta ∈ [0, 1]`. Returns the interpolated time.
    pub fn interpolate(&mut self, theta: f64, out: &mut [f64]) -> f64 {
        let h = self.t - self.t_old;
        if self.dense.is_none() {
            self.dense = Some(self.build_dense(h));
        }
        let f = self.dense.as_ref().expect("dense output built above");
        out.fill(0.0);
        for (i, row) in f.iter().rev().enumerate() {
            let factor = if i % 2 == 0 { theta } else { 1.0 - theta };
            for (o, r) in out.iter_mut().zip(row) {
                *o = (*o + r) * factor;
            }
        }
        for (o, y) in out.iter_mut().zip(&self.y_old) {
            *o += y;
        }
        self.t_old + theta * h
    }

    fn build_dense(&mut self, h: f64) -> Vec<Vec<f64>> {
        let n = self.y.len();
        for e in 0..EXTRA_STAGES {
            let s = STAGES + 1 + e;
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A_EXTRA[e][j] * self.k[j][i];
                }
                self.scratch[i] = self.y_old[i] + h * acc;
            }
            (self.rhs)(self.t_old + C_EXTRA[e] * h, &self.scratch, &mut self.k[s]);
        }
        self.evaluations += EXTRA_STAGES;
        let mut f = vec![vec![0.0; n]; 3 + D.len()];
        for i in 0..n {
            let dy = self.y[i] - self.y_old[i];
            f[0][i] = dy;
            f[1][i] = h * self.f_old[i] - dy;
            f[2][i] = 2.0 * dy - h * (self.f[i] + self.f_old[i]);
            for (r, d) in D.iter().enumerate() {
                f[3 + r][i] = h * d.iter().zip(&self.k).map(|(c, k)| c * k[i]).sum::<f64>();
            }
        }
        f
    }

    fn scale(&self, i: usize, y_new: f64) -> f64 {
        self.tol.abs + self.tol.rel * self.y[i].abs().max(y_new.abs())
    }

    fn initial_step(&mut self) -> f64 {
        let n = self.y.len() as f64;
        let scale: Vec<f64> = self.y.iter().map(|y| self.tol.abs + self.tol.rel * y.abs()).collect();
        let rms = |v: &[f64]| (v.iter().zip(&scale).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / n).sqrt();
        let d0 = rms(&self.y);
        let d1 = rms(&self.f);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1: Vec<f64> = self.y.iter().zip(&self.f).map(|(y, f)| y + h0 * self.direction * f).collect();
        let mut f1 = vec![0.0; self.y.len()];
        (self.rhs)(self.t + h0 * self.direction, &y1, &mut f1);
        self.evaluations += 1;
        let diff: Vec<f64> = f1.iter().zip(&self.f).map(|(a, b)| a - b).collect();
        let d2 = rms(&diff) / h0;
        let h1 = if !d2.is_finite() {
            h0 * 1e-3
        } else if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(self.tol.max_step)
    }

    /// Attempt the stages with step `h`; returns the error norm (∞ if non-finite).
    fn trial(&mut self, h: f64, y_new: &mut [f64]) -> f64 {
        let n = self.y.len();
        self.k[0].copy_from_slice(&self.f);
        for s in 1..STAGES {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * self.k[j][i];
                }
                self.scratch[i] = self.y[i] + h * acc;
            }
            (self.rhs)(self.t + C[s] * h, &self.scratch, &mut self.k[s]);
        }
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..STAGES {
                acc += B[j] * self.k[j][i];
            }
            y_new[i] = self.y[i] + h * acc;
        }
        (self.rhs)(self.t + h, y_new, &mut self.k[STAGES]);
        self.evaluations += STAGES;
        if !all_finite(y_new) || !all_finite(&self.k[STAGES]) {
            return f64::INFINITY;
        }
        let (mut e5, mut e3) = (0.0, 0.0);
        for i in 0..n {
            let sc = self.scale(i, y_new[i]);
            let (mut a5, mut a3) = (0.0, 0.0);
            for j in 0..=STAGES {
                a5 += E5[j] * self.k[j][i];
                a3 += E3[j] * self.k[j][i];
            }
            e5 += (a5 / sc).powi(2);
            e3 += (a3 / sc).powi(2);
        }
        if e5 == 0.0 && e3 == 0.0 {
            return 0.0;
        }
        let err = h.abs() * e5 / ((e5 + 0.01 * e3) * n as f64).sqrt();
        if err.is_finite() {
            err
        } else {
            f64::INFINITY
        }
    }

    /// Advance by one accepted step.
    pub fn step(&mut self) -> Result<(), StepError> {
        let mut y_new = vec![0.0; self.y.len()];
        let mut rejected = false;
        let mut h_abs = self.h_abs.min(self.tol.max_step);
        loop {
            let min_step = 10.0 * (self.t.abs() * f64::EPSILON).max(f64::MIN_POSITIVE);
            if !(h_abs >= min_step) {
                return Err(StepError::Underflow { t: self.t, h: h_abs });
            }
            let h = h_abs * self.direction;
            let err = self.trial(h, &mut y_new);
            let fac11 = err.powf(EXPO);
            if err <= 1.0 {
                let fac = (fac11 / self.err_old.powf(BETA) / SAFETY).clamp(1.0 / MAX_FACTOR, 1.0 / MIN_FACTOR);
                let mut next = h_abs / fac;
                if rejected {
                    next = next.min(h_abs);
                }
                self.err_old = err.max(1e-4);
                self.t_old = self.t;
                std::mem::swap(&mut self.y_old, &mut self.y);
                std::mem::swap(&mut self.f_old, &mut self.f);
                self.t += h;
                self.y.copy_from_slice(&y_new);
                self.f.copy_from_slice(&self.k[STAGES]);
                self.h_abs = next.min(self.tol.max_step);
                self.dense = None;
                return Ok(());
            }
            rejected = true;
            let shrink = if err.is_finite() { (fac11 / SAFETY).min(1.0 / MIN_FACTOR) } else { 1.0 / MIN_FACTOR };
            h_abs /= shrink;
        }
    }
}
