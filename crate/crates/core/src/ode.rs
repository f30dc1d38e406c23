//! Explicit Runge-Kutta integration of complex linear/nonlinear systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Right-hand side of y' = F(t, y) over complex state vectors.
pub trait ComplexSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]);
}

// Dormand-Prince 5(4) tableau
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

// error coefficients: 5th order minus embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive Dormand-Prince 5(4) with FSAL and the standard step controller.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_max: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            max_steps: 10_000_000,
            h_max: f64::INFINITY,
        }
    }
}

struct Stages {
    k: [Vec<Complex64>; 7],
    tmp: Vec<Complex64>,
    y_new: Vec<Complex64>,
}

impl Stages {
    fn new(dim: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); dim];
        Self {
            k: std::array::from_fn(|_| z.clone()),
            tmp: z.clone(),
            y_new: z,
        }
    }
}

impl Dopri5 {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }

    /// Integrates from `grid[0]` with initial state `y0` and returns the state
    /// at every grid point. Steps are clipped so each grid point is hit exactly.
    pub fn integrate<S: ComplexSystem>(
        &self,
        system: &S,
        y0: &[Complex64],
        grid: &[f64],
    ) -> Result<Vec<Vec<Complex64>>> {
        check_grid(grid)?;
        let dim = system.dim();
        if y0.len() != dim {
            return Err(Error::InvalidParams(format!(
                "initial state has length {}, system dimension is {dim}",
                y0.len()
            )));
        }

        let mut out = Vec::with_capacity(grid.len());
        let mut y = y0.to_vec();
        let mut t = grid[0];
        out.push(y.clone());

        let mut st = Stages::new(dim);
        system.rhs(t, &y, &mut st.k[0]);
        let mut h = self.initial_step(system, t, &y, &st.k[0]);
        let mut steps = 0usize;

        for &target in &grid[1..] {
            while t < target {
                if steps >= self.max_steps {
                    return Err(Error::Integration {
                        tau: t,
                        reason: format!("exceeded {} steps", self.max_steps),
                    });
                }
                let mut last = false;
                let mut step = h.min(self.h_max);
                if t + step >= target || target - (t + step) < 1e-12 * step {
                    step = target - t;
                    last = true;
                }
                let err = self.attempt(system, t, step, &y, &mut st);
                if !err.is_finite() {
                    return Err(Error::Integration {
                        tau: t,
                        reason: "non-finite state".into(),
                    });
                }
                steps += 1;
                if err <= 1.0 {
                    t = if last { target } else { t + step };
                    std::mem::swap(&mut y, &mut st.y_new);
                    // FSAL: last stage is the derivative at the new point
                    st.k.swap(0, 6);
                    let fac = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    // a clipped landing step should not shrink the next one
                    h = if last { h.max(step * fac) } else { step * fac };
                } else {
                    h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                    if h < 1e-14 * t.abs().max(1.0) {
                        return Err(Error::Integration {
                            tau: t,
                            reason: "step size underflow".into(),
                        });
                    }
                }
            }
            out.push(y.clone());
        }
        Ok(out)
    }

    fn initial_step<S: ComplexSystem>(
        &self,
        system: &S,
        t: f64,
        y: &[Complex64],
        f0: &[Complex64],
    ) -> f64 {
        let scale = |yi: &Complex64| self.atol + self.rtol * yi.norm();
        let d0 = rms(y.iter().map(|v| v.norm() / scale(v)));
        let d1 = rms(f0.iter().zip(y).map(|(v, yi)| v.norm() / scale(yi)));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1: Vec<Complex64> = y.iter().zip(f0).map(|(a, b)| a + b * h0).collect();
        let mut f1 = vec![Complex64::new(0.0, 0.0); y.len()];
        system.rhs(t + h0, &y1, &mut f1);
        let d2 = rms(
            f1.iter()
                .zip(f0)
                .zip(y)
                .map(|((a, b), yi)| (a - b).norm() / scale(yi)),
        ) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.h_max)
    }

    /// One trial step; fills `st.y_new` and `st.k[6]`, returns the scaled error norm.
    fn attempt<S: ComplexSystem>(
        &self,
        system: &S,
        t: f64,
        h: f64,
        y: &[Complex64],
        st: &mut Stages,
    ) -> f64 {
        let dim = y.len();
        let Stages { k, tmp, y_new } = st;

        macro_rules! stage {
            ($dst:expr, $c:expr, $( ($a:expr, $src:expr) ),+ ) => {{
                for i in 0..dim {
                    let mut acc = Complex64::new(0.0, 0.0);
                    $( acc += k[$src][i] * $a; )+
                    tmp[i] = y[i] + acc * h;
                }
                system.rhs(t + $c * h, tmp, &mut k[$dst]);
            }};
        }

        stage!(1, C2, (A21, 0));
        stage!(2, C3, (A31, 0), (A32, 1));
        stage!(3, C4, (A41, 0), (A42, 1), (A43, 2));
        stage!(4, C5, (A51, 0), (A52, 1), (A53, 2), (A54, 3));
        stage!(5, 1.0, (A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4));
        for i in 0..dim {
            y_new[i] = y[i]
                + (k[0][i] * A71 + k[2][i] * A73 + k[3][i] * A74 + k[4][i] * A75 + k[5][i] * A76)
                    * h;
        }
        let (head, tail) = k.split_at_mut(6);
        system.rhs(t + h, y_new, &mut tail[0]);

        let mut sum = 0.0;
        for i in 0..dim {
            let e = (head[0][i] * E1
                + head[2][i] * E3
                + head[3][i] * E4
                + head[4][i] * E5
                + head[5][i] * E6
                + tail[0][i] * E7)
                * h;
            let sc = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
            let r = e.norm() / sc;
            sum += r * r;
        }
        (sum / dim as f64).sqrt()
    }
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// Grids must start at 0 and be strictly increasing and finite.
pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    let Some(&first) = grid.first() else {
        return Err(Error::InvalidGrid("empty grid".into()));
    };
    if first != 0.0 {
        return Err(Error::InvalidGrid(format!("grid must start at 0, starts at {first}")));
    }
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[1].is_finite() && w[1] > w[0]) {
            return Err(Error::InvalidGrid(format!(
                "grid not strictly increasing at index {}: {} -> {}",
                i + 1,
                w[0],
                w[1]
            )));
        }
    }
    Ok(())
}
