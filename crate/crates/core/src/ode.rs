//! Dormand-Prince 5(4) with PI step control and continuous output.
//!
//! The stepper is driven one accepted step at a time so callers can check
//! guards, rotate charts or record samples between steps. Each accepted step
//! returns a [`Segment`] that interpolates the solution at 4th order inside the step.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |h|; infinite by default.
    pub h_max: f64,
    /// Initial step; `None` means the automatic estimate.
    pub h_init: Option<f64>,
    pub max_steps: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            rtol: 1e-12,
            atol: 1e-14,
            h_max: f64::INFINITY,
            h_init: None,
            max_steps: 2_000_000,
        }
    }
}

impl StepOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        StepOptions {
            rtol,
            atol: rtol * 1e-2,
            ..Default::default()
        }
    }
}

/// Continuous output over one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    /// Step length the interpolant is parametrized by.
    step: f64,
    rcont: [Vec<f64>; 4],
}

impl Segment {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = if self.t0 <= self.t1 {
            (self.t0, self.t1)
        } else {
            (self.t1, self.t0)
        };
        t >= a && t <= b
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let th = (t - self.t0) / self.step;
        let th1 = 1.0 - th;
        let [r2, r3, r4, r5] = &self.rcont;
        for i in 0..out.len() {
            out[i] = self.y0[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        }
    }

    /// Shortens the validity range to end at `t`.
    pub fn truncated_at(mut self, t: f64) -> Self {
        self.y1 = self.eval(t);
        self.t1 = t;
        self
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.y0.len()];
        self.eval_into(t, &mut out);
        out
    }
}

/// Right-hand side `y' = f(t, y)`; may fail at singular states.
pub trait Rhs {
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

impl<F> Rhs for F
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        self(t, y, dy)
    }
}

pub struct Stepper<F: Rhs> {
    f: F,
    opts: StepOptions,
    dir: f64,
    t: f64,
    y: Vec<f64>,
    k1: Vec<f64>,
    h: f64,
    facold: f64,
    last_rejected: bool,
    steps: usize,
    k: [Vec<f64>; 6],
    ytmp: Vec<f64>,
}

impl<F: Rhs> Stepper<F> {
    /// `direction` is +1 for forward and -1 for backward integration.
    pub fn new(mut f: F, t0: f64, y0: &[f64], direction: f64, opts: StepOptions) -> Result<Self> {
        if !(opts.rtol > 0.0 && opts.atol >= 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        let n = y0.len();
        let mut k1 = vec![0.0; n];
        f.eval(t0, y0, &mut k1)?;
        let dir = if direction < 0.0 { -1.0 } else { 1.0 };
        let mut s = Stepper {
            f,
            opts,
            dir,
            t: t0,
            y: y0.to_vec(),
            k1,
            h: 0.0,
            facold: 1e-4,
            last_rejected: false,
            steps: 0,
            k: std::array::from_fn(|_| vec![0.0; n]),
            ytmp: vec![0.0; n],
        };
        s.h = match opts.h_init {
            Some(h) => dir * h.abs(),
            None => s.initial_step()?,
        };
        Ok(s)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Current derivative at `(t, y)`.
    pub fn dy(&self) -> &[f64] {
        &self.k1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rhs_mut(&mut self) -> &mut F {
        &mut self.f
    }

    /// Replace the state (e.g. after a change of chart), keeping the step size.
    pub fn reset(&mut self, t: f64, y: &[f64]) -> Result<()> {
        self.t = t;
        self.y.copy_from_slice(y);
        self.f.eval(t, &self.y, &mut self.k1)?;
        self.last_rejected = false;
        Ok(())
    }

    fn sk(&self, a: f64, b: f64) -> f64 {
        self.opts.atol + self.opts.rtol * a.abs().max(b.abs())
    }

    fn initial_step(&mut self) -> Result<f64> {
        let n = self.y.len();
        let (mut dnf, mut dny) = (0.0, 0.0);
        for i in 0..n {
            let sk = self.sk(self.y[i], 0.0);
            dnf += (self.k1[i] / sk).powi(2);
            dny += (self.y[i] / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            0.01 * (dny / dnf).sqrt()
        };
        h = h.min(self.opts.h_max) * self.dir;
        for i in 0..n {
            self.ytmp[i] = self.y[i] + h * self.k1[i];
        }
        let mut f1 = vec![0.0; n];
        self.f.eval(self.t + h, &self.ytmp, &mut f1)?;
        let mut der2 = 0.0;
        for i in 0..n {
            let sk = self.sk(self.y[i], 0.0);
            der2 += ((f1[i] - self.k1[i]) / sk).powi(2);
        }
        let der2 = der2.sqrt() / h.abs();
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h.abs() * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(0.2)
        };
        Ok(self.dir * (100.0 * h.abs()).min(h1).min(self.opts.h_max))
    }

    /// Take one accepted step, never passing `t_bound`.
    pub fn step(&mut self, t_bound: f64) -> Result<Segment> {
        let n = self.y.len();
        let remaining = (t_bound - self.t) * self.dir;
        if remaining <= 0.0 {
            return Err(Error::InvalidInput("t_bound is behind the current time".into()));
        }
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(Error::TooManySteps { t: self.t });
            }
            let mut h = self.h;
            if h.abs() > self.opts.h_max {
                h = self.dir * self.opts.h_max;
            }
            let mut last = false;
            if (self.t + 1.01 * h - t_bound) * self.dir >= 0.0 {
                h = t_bound - self.t;
                last = true;
            }
            if h.abs() <= 1e-14 * self.t.abs().max(1e-3) {
                return Err(Error::StepSizeUnderflow {
                    t: self.t,
                    h,
                    state: self.y.clone(),
                });
            }
            self.steps += 1;
            let t = self.t;
            let y = &self.y;
            let k1 = &self.k1;
            let [k2, k3, k4, k5, k6, k7] = &mut self.k;
            let yt = &mut self.ytmp;
            for i in 0..n {
                yt[i] = y[i] + h * A21 * k1[i];
            }
            self.f.eval(t + C2 * h, yt, k2)?;
            for i in 0..n {
                yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            self.f.eval(t + C3 * h, yt, k3)?;
            for i in 0..n {
                yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            self.f.eval(t + C4 * h, yt, k4)?;
            for i in 0..n {
                yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            self.f.eval(t + C5 * h, yt, k5)?;
            for i in 0..n {
                yt[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            self.f.eval(t + h, yt, k6)?;
            let mut y1 = vec![0.0; n];
            for i in 0..n {
                y1[i] = y[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            self.f.eval(t + h, &y1, k7)?;
            let mut err = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sk = self.opts.atol + self.opts.rtol * y[i].abs().max(y1[i].abs());
                err += (e / sk).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                self.h = h * 0.1;
                self.last_rejected = true;
                continue;
            }
            let fac11 = err.powf(0.17);
            let fac = (fac11 / self.facold.powf(0.04) / 0.9).clamp(0.1, 5.0);
            let mut hnew = h / fac;
            if err <= 1.0 {
                self.facold = err.max(1e-4);
                let mut r2 = vec![0.0; n];
                let mut r3 = vec![0.0; n];
                let mut r4 = vec![0.0; n];
                let mut r5 = vec![0.0; n];
                for i in 0..n {
                    let dy = y1[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    r2[i] = dy;
                    r3[i] = bspl;
                    r4[i] = dy - h * k7[i] - bspl;
                    r5[i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                }
                if self.last_rejected {
                    hnew = self.dir * hnew.abs().min(h.abs());
                }
                self.last_rejected = false;
                let seg = Segment {
                    t0: t,
                    t1: if last { t_bound } else { t + h },
                    y0: self.y.clone(),
                    y1: y1.clone(),
                    step: h,
                    rcont: [r2, r3, r4, r5],
                };
                self.t = seg.t1;
                self.y = y1;
                self.k1.copy_from_slice(k7);
                self.h = hnew;
                return Ok(seg);
            }
            hnew = h / (fac11 / 0.9).min(5.0);
            self.last_rejected = true;
            self.h = hnew;
        }
    }
}

/// A piecewise continuous solution assembled from accepted segments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DenseSolution {
    pub segments: Vec<Segment>,
}

impl DenseSolution {
    pub fn push(&mut self, s: Segment) {
        self.segments.push(s);
    }

    pub fn t_start(&self) -> Option<f64> {
        self.segments.first().map(|s| s.t0)
    }

    pub fn t_end(&self) -> Option<f64> {
        self.segments.last().map(|s| s.t1)
    }

    fn find(&self, t: f64) -> Option<&Segment> {
        if self.segments.is_empty() {
            return None;
        }
        let fwd = self.segments[0].t1 >= self.segments[0].t0;
        let idx = self.segments.partition_point(|s| if fwd { s.t1 < t } else { s.t1 > t });
        let idx = idx.min(self.segments.len() - 1);
        let s = &self.segments[idx];
        s.contains(t).then_some(s)
    }

    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        self.find(t).map(|s| s.eval(t))
    }
}

/// Integrate from `t0` to `t1`, returning the continuous solution.
pub fn solve<F: Rhs>(f: F, t0: f64, y0: &[f64], t1: f64, opts: StepOptions) -> Result<DenseSolution> {
    let mut st = Stepper::new(f, t0, y0, t1 - t0, opts)?;
    let mut sol = DenseSolution::default();
    while (t1 - st.t()) * (t1 - t0).signum() > 0.0 {
        sol.push(st.step(t1)?);
    }
    Ok(sol)
}

/// Locate a sign change of `g` inside a segment by bisection on the
/// continuous output. Returns the crossing time.
pub fn locate_crossing<G>(seg: &Segment, mut g: G, t_tol: f64) -> f64
where
    G: FnMut(f64, &[f64]) -> f64,
{
    let mut buf = vec![0.0; seg.y0.len()];
    let (mut a, mut b) = (seg.t0, seg.t1);
    let ga = g(a, &seg.y0);
    let mut sa = ga.signum();
    for _ in 0..200 {
        if (b - a).abs() <= t_tol {
            break;
        }
        let m = 0.5 * (a + b);
        seg.eval_into(m, &mut buf);
        let gm = g(m, &buf);
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == sa {
            a = m;
            sa = gm.signum();
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
