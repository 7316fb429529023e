//! Adaptive Dormand–Prince 8(5,3) for complex linear systems, following the
//! error norm and step-size control of Hairer's DOP853.

use super::dop853_tableau::{A, B, E3, E5, STAGES};
use crate::error::{Error, Result};
use crate::linalg::c64;

pub(crate) const ATOL: f64 = 1e-10;
pub(crate) const RTOL: f64 = 1e-10;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const MAX_STEPS: usize = 50_000_000;

/// Integrator state for `dy/dt = f(y)` (autonomous).
pub(crate) struct Dop853<F: FnMut(&[c64], &mut [c64])> {
    f: F,
    t: f64,
    y: Vec<c64>,
    fy: Vec<c64>,
    h: Option<f64>,
    k: Vec<Vec<c64>>,
    stage: Vec<c64>,
    y_new: Vec<c64>,
    steps: usize,
}

impl<F: FnMut(&[c64], &mut [c64])> Dop853<F> {
    pub fn new(mut f: F, y0: Vec<c64>) -> Self {
        let n = y0.len();
        let mut fy = vec![c64::new(0.0, 0.0); n];
        f(&y0, &mut fy);
        Self {
            f,
            t: 0.0,
            y: y0,
            fy,
            h: None,
            k: vec![vec![c64::new(0.0, 0.0); n]; STAGES + 1],
            stage: vec![c64::new(0.0, 0.0); n],
            y_new: vec![c64::new(0.0, 0.0); n],
            steps: 0,
        }
    }

    pub fn state(&self) -> &[c64] {
        &self.y
    }

    /// Integrates forward to `t_end`, landing on it exactly.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        if t_end < self.t {
            return Err(Error::invalid("integrator cannot step backwards"));
        }
        if t_end == self.t {
            return Ok(());
        }
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(),
        };
        let mut rejected = false;
        while self.t < t_end {
            if self.steps >= MAX_STEPS {
                return Err(Error::Numerical(format!("ODE integrator exceeded {MAX_STEPS} steps")));
            }
            let remaining = t_end - self.t;
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };
            if h_try <= f64::EPSILON * self.t.abs().max(1.0) * 10.0 {
                return Err(Error::Numerical(format!("ODE step size underflow at t = {}", self.t)));
            }
            let err = self.try_step(h_try);
            if !err.is_finite() {
                return Err(Error::Numerical("non-finite value in ODE integration".into()));
            }
            if err < 1.0 {
                self.t = if last { t_end } else { self.t + h_try };
                std::mem::swap(&mut self.y, &mut self.y_new);
                std::mem::swap(&mut self.fy, &mut self.k[STAGES]);
                self.steps += 1;
                let mut factor = if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-1.0 / 8.0)).min(MAX_FACTOR) };
                if rejected {
                    factor = factor.min(1.0);
                }
                // keep the natural step when the last one was clipped to land on t_end
                if !last || h_try >= h {
                    h = h_try * factor;
                }
                rejected = false;
            } else {
                h = h_try * (SAFETY * err.powf(-1.0 / 8.0)).max(MIN_FACTOR);
                rejected = true;
            }
        }
        self.h = Some(h);
        Ok(())
    }

    /// Computes a trial step into `y_new` and `k[STAGES]`, returning the
    /// scaled error norm.
    fn try_step(&mut self, h: f64) -> f64 {
        let n = self.y.len();
        self.k[0].copy_from_slice(&self.fy);
        for s in 1..STAGES {
            self.stage.copy_from_slice(&self.y);
            for (j, a) in A[s][..s].iter().enumerate() {
                if *a != 0.0 {
                    let ha = h * a;
                    for (x, kj) in self.stage.iter_mut().zip(&self.k[j]) {
                        *x += kj * ha;
                    }
                }
            }
            (self.f)(&self.stage, &mut self.k[s]);
        }
        self.y_new.copy_from_slice(&self.y);
        for (j, b) in B.iter().enumerate() {
            if *b != 0.0 {
                let hb = h * b;
                for (x, kj) in self.y_new.iter_mut().zip(&self.k[j]) {
                    *x += kj * hb;
                }
            }
        }
        (self.f)(&self.y_new, &mut self.k[STAGES]);

        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..n {
            let scale = ATOL + RTOL * self.y[i].norm().max(self.y_new[i].norm());
            let mut e5 = c64::new(0.0, 0.0);
            let mut e3 = c64::new(0.0, 0.0);
            for j in 0..=STAGES {
                let kj = self.k[j][i];
                if E5[j] != 0.0 {
                    e5 += kj * E5[j];
                }
                if E3[j] != 0.0 {
                    e3 += kj * E3[j];
                }
            }
            err5 += (e5 / scale).norm_sqr();
            err3 += (e3 / scale).norm_sqr();
        }
        if err5 == 0.0 && err3 == 0.0 {
            return 0.0;
        }
        let denom = err5 + 0.01 * err3;
        h.abs() * err5 / (denom * n as f64).sqrt()
    }

    /// Hairer's starting-step heuristic for an order-8 method.
    fn initial_step(&mut self) -> f64 {
        let n = self.y.len() as f64;
        let scale = |v: &c64| ATOL + RTOL * v.norm();
        let d0 = (self.y.iter().map(|v| (v / scale(v)).norm_sqr()).sum::<f64>() / n).sqrt();
        let d1 = (self.y.iter().zip(&self.fy).map(|(v, f)| (f / scale(v)).norm_sqr()).sum::<f64>() / n).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let probe: Vec<c64> = self.y.iter().zip(&self.fy).map(|(v, f)| v + f * h0).collect();
        let mut f1 = vec![c64::new(0.0, 0.0); probe.len()];
        (self.f)(&probe, &mut f1);
        let d2 = (self
            .y
            .iter()
            .zip(f1.iter().zip(&self.fy))
            .map(|(v, (a, b))| ((a - b) / scale(v)).norm_sqr())
            .sum::<f64>()
            / n)
            .sqrt()
            / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1)
    }
}
