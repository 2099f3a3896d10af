//! Explicit Dormand-Prince 5(4) integrator with step-size control and a
//! continuous (dense) fourth-order interpolant.
//!
//! Only forward integration is supported; callers that need to run backward
//! in time substitute `s = t1 - t` themselves.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("step size {h:e} fell below the minimum at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("right-hand side returned a non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("exceeded {max_steps} steps at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },
    #[error("invalid solver input: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Initial step; `None` selects one from the problem scale.
    pub initial_step: Option<f64>,
    /// Smallest admissible step; `None` means a few ulps of the current time.
    pub min_step: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { rtol: 1e-6, atol: 1e-8, max_steps: 1_000_000, initial_step: None, min_step: None }
    }
}

impl SolverConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    fn validate(&self) -> Result<(), SolverError> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(SolverError::Invalid(format!(
                "tolerances must be positive (rtol = {}, atol = {})",
                self.rtol, self.atol
            )));
        }
        Ok(())
    }
}

// Butcher tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
/// Fifth- minus fourth-order weights.
const E: [f64; 7] = [
    -71.0 / 57600.0,
    0.0,
    71.0 / 16695.0,
    -71.0 / 1920.0,
    17253.0 / 339200.0,
    -22.0 / 525.0,
    1.0 / 40.0,
];
/// Dense-output weights: the interpolant over a step is
/// `y0 + h * sum_i k_i * sum_m P[i][m] * theta^(m+1)`.
const P: [[f64; 4]; 7] = [
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0],
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const PI_BETA: f64 = 0.04;
const PI_ALPHA: f64 = 0.2 - 0.75 * PI_BETA;

/// Piecewise-quartic solution over the accepted step mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    dim: usize,
    mesh: Vec<f64>,
    /// States at mesh points, row-major `mesh.len() x dim`.
    states: Vec<f64>,
    /// Per step and component, the four interpolation coefficients (already
    /// multiplied by the step length).
    coeffs: Vec<f64>,
}

impl DenseSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_span(&self) -> (f64, f64) {
        (self.mesh[0], *self.mesh.last().unwrap())
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    pub fn steps(&self) -> usize {
        self.mesh.len() - 1
    }

    pub fn state_at_mesh(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn final_state(&self) -> &[f64] {
        self.state_at_mesh(self.mesh.len() - 1)
    }

    /// Evaluate all components at `t`, clamped into the span. Mesh points
    /// return the stored state exactly.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let (step, theta) = self.locate(t);
        let d = self.dim;
        let y0 = &self.states[step * d..(step + 1) * d];
        if theta == 0.0 {
            out.copy_from_slice(y0);
            return;
        }
        if theta == 1.0 {
            out.copy_from_slice(&self.states[(step + 1) * d..(step + 2) * d]);
            return;
        }
        let q = &self.coeffs[step * d * 4..(step + 1) * d * 4];
        for j in 0..d {
            let c = &q[j * 4..j * 4 + 4];
            out[j] = y0[j] + theta * (c[0] + theta * (c[1] + theta * (c[2] + theta * c[3])));
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    /// Component `j` at `t`.
    pub fn eval_component(&self, t: f64, j: usize) -> f64 {
        let (step, theta) = self.locate(t);
        let d = self.dim;
        if theta == 0.0 {
            return self.states[step * d + j];
        }
        if theta == 1.0 {
            return self.states[(step + 1) * d + j];
        }
        let c = &self.coeffs[(step * d + j) * 4..(step * d + j) * 4 + 4];
        self.states[step * d + j] + theta * (c[0] + theta * (c[1] + theta * (c[2] + theta * c[3])))
    }

    /// Value of the left piece of a mesh point's interpolant at its right
    /// end, used to check continuity across steps.
    pub fn left_limit(&self, i: usize, j: usize) -> f64 {
        let d = self.dim;
        let c = &self.coeffs[((i - 1) * d + j) * 4..((i - 1) * d + j) * 4 + 4];
        self.states[(i - 1) * d + j] + c[0] + c[1] + c[2] + c[3]
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.mesh.len();
        if n == 1 || t <= self.mesh[0] {
            return (0, 0.0);
        }
        if t >= self.mesh[n - 1] {
            return (n - 2, 1.0);
        }
        // mesh[i] <= t < mesh[i + 1]
        let i = self.mesh.partition_point(|&m| m <= t) - 1;
        let h = self.mesh[i + 1] - self.mesh[i];
        (i, (t - self.mesh[i]) / h)
    }
}

/// Integrate `y' = rhs(t, y)` forward over `t_span` from `y0`.
///
/// `rhs(t, y, dydt)` is never called with `t` outside the span.
pub fn solve_ivp<F>(
    mut rhs: F,
    t_span: (f64, f64),
    y0: &[f64],
    config: &SolverConfig,
) -> Result<DenseSolution, SolverError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    config.validate()?;
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(SolverError::Invalid(format!("t_span ({t0}, {t1}) must be finite and increasing")));
    }
    let d = y0.len();
    if d == 0 {
        return Err(SolverError::Invalid("empty state".into()));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::Invalid("non-finite initial state".into()));
    }

    let mut eval = |t: f64, y: &[f64], out: &mut [f64]| -> Result<(), SolverError> {
        let tc = t.clamp(t0, t1);
        rhs(tc, y, out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { t: tc });
        }
        Ok(())
    };

    let mut mesh = vec![t0];
    let mut states = y0.to_vec();
    let mut coeffs = Vec::new();

    let mut k = vec![vec![0.0; d]; 7];
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; d];
    let mut stage = vec![0.0; d];
    let mut err = vec![0.0; d];

    eval(t0, &y, &mut k[0])?;
    let span = t1 - t0;
    let mut h = match config.initial_step {
        Some(h) if h > 0.0 => h.min(span),
        _ => initial_step(&mut eval, t0, &y, &k[0], config, span)?,
    };

    let mut t = t0;
    let mut prev_err: f64 = 1e-4;
    let mut rejected_last = false;
    let mut steps = 0usize;

    while t < t1 {
        if steps >= config.max_steps {
            return Err(SolverError::TooManySteps { t, max_steps: config.max_steps });
        }
        let min_step = config.min_step.unwrap_or(16.0 * f64::EPSILON * t.abs().max(span));
        if h < min_step {
            return Err(SolverError::StepUnderflow { t, h });
        }
        let mut t_next = t + h;
        if t_next >= t1 || t1 - t_next < min_step {
            t_next = t1;
        }
        let h_step = t_next - t;

        for s in 1..7 {
            for j in 0..d {
                let mut acc = 0.0;
                for (i, a) in A[s][..s].iter().enumerate() {
                    acc += a * k[i][j];
                }
                stage[j] = y[j] + h_step * acc;
            }
            let (_, tail) = k.split_at_mut(s);
            eval(t + C[s] * h_step, &stage, &mut tail[0])?;
            if s == 6 {
                y_new.copy_from_slice(&stage);
            }
        }

        let mut err_norm: f64 = 0.0;
        for j in 0..d {
            let mut e = 0.0;
            for i in 0..7 {
                e += E[i] * k[i][j];
            }
            err[j] = h_step * e;
            let scale = config.atol + config.rtol * y[j].abs().max(y_new[j].abs());
            err_norm = err_norm.max((err[j] / scale).abs());
        }
        if !err_norm.is_finite() {
            return Err(SolverError::NonFinite { t });
        }

        if err_norm <= 1.0 {
            steps += 1;
            // Dense output for the accepted step.
            for j in 0..d {
                for m in 0..4 {
                    let q: f64 = k.iter().zip(&P).map(|(ki, pi)| ki[j] * pi[m]).sum();
                    coeffs.push(h_step * q);
                }
            }
            t = t_next;
            mesh.push(t);
            states.extend_from_slice(&y_new);
            y.copy_from_slice(&y_new);
            let last = k[6].clone();
            k[0].copy_from_slice(&last);

            let e = err_norm.max(1e-10);
            let mut factor = SAFETY * e.powf(-PI_ALPHA) * prev_err.powf(PI_BETA);
            factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
            if rejected_last {
                factor = factor.min(1.0);
            }
            prev_err = err_norm.max(1e-4);
            rejected_last = false;
            h = h_step * factor;
        } else {
            let factor = (SAFETY * err_norm.powf(-0.2)).max(MIN_FACTOR);
            h = h_step * factor;
            rejected_last = true;
        }
    }

    Ok(DenseSolution { dim: d, mesh, states, coeffs })
}

fn initial_step<F>(
    eval: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    config: &SolverConfig,
    span: f64,
) -> Result<f64, SolverError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), SolverError>,
{
    let d = y0.len();
    let rms = |v: &dyn Fn(usize) -> f64| -> f64 {
        ((0..d).map(|j| v(j).powi(2)).sum::<f64>() / d as f64).sqrt()
    };
    let scale: Vec<f64> = y0.iter().map(|y| config.atol + config.rtol * y.abs()).collect();
    let d0 = rms(&|j| y0[j] / scale[j]);
    let d1 = rms(&|j| f0[j] / scale[j]);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<f64> = (0..d).map(|j| y0[j] + h0 * f0[j]).collect();
    let mut f1 = vec![0.0; d];
    eval(t0 + h0, &y1, &mut f1)?;
    let d2 = rms(&|j| (f1[j] - f0[j]) / scale[j]) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Fixed-step Dormand-Prince (fifth-order propagation), returning the final
/// state. Used to check the empirical order of the scheme.
pub fn integrate_fixed<F>(mut rhs: F, t_span: (f64, f64), y0: &[f64], steps: usize) -> Vec<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let d = y0.len();
    let h = (t_span.1 - t_span.0) / steps as f64;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; d]; 7];
    let mut stage = vec![0.0; d];
    for n in 0..steps {
        let t = t_span.0 + n as f64 * h;
        rhs(t, &y, &mut k[0]);
        for s in 1..6 {
            for j in 0..d {
                let acc: f64 = (0..s).map(|i| A[s][i] * k[i][j]).sum();
                stage[j] = y[j] + h * acc;
            }
            let (_, tail) = k.split_at_mut(s);
            rhs(t + C[s] * h, &stage, &mut tail[0]);
        }
        for j in 0..d {
            y[j] += h * (0..6).map(|i| B[i] * k[i][j]).sum::<f64>();
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn tableau_consistency() {
        for s in 0..7 {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-15, "row {s}");
        }
        assert!((B.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(E.iter().sum::<f64>().abs() < 1e-15);
        for i in 0..7 {
            assert!((P[i].iter().sum::<f64>() - B[i]).abs() < 1e-14, "dense row {i}");
        }
    }

    #[test]
    fn linear_decay() {
        let cfg = SolverConfig::default();
        let sol = solve_ivp(|_, y, dy| dy[0] = -y[0], (0.0, 1.0), &[1.0], &cfg).unwrap();
        let y1 = sol.final_state()[0];
        assert!((y1 - (-1f64).exp()).abs() < 10.0 * cfg.rtol, "{y1}");
    }

    #[test]
    fn constant_solution_is_exact() {
        let cfg = SolverConfig::default();
        let sol = solve_ivp(|_, _, dy| dy[0] = 0.0, (0.0, 3.0), &[2.5], &cfg).unwrap();
        for i in 0..=30 {
            assert_eq!(sol.eval(i as f64 * 0.1)[0], 2.5);
        }
    }

    #[test]
    fn quadrature_of_cosine() {
        let cfg = SolverConfig::default();
        let sol = solve_ivp(|t, _, dy| dy[0] = t.cos(), (0.0, PI), &[0.0], &cfg).unwrap();
        assert!(sol.final_state()[0].abs() < 10.0 * cfg.rtol);
        assert!((sol.eval_component(PI / 2.0, 0) - 1.0).abs() < 10.0 * cfg.rtol);
    }

    #[test]
    fn errors() {
        let cfg = SolverConfig::default();
        let r = solve_ivp(|_, _, dy| dy[0] = f64::NAN, (0.0, 1.0), &[0.0], &cfg);
        assert!(matches!(r, Err(SolverError::NonFinite { .. })));
        // Finite-time blow-up of y' = y^2 at t = 1.
        let r = solve_ivp(|_, y, dy| dy[0] = y[0] * y[0], (0.0, 2.0), &[1.0], &cfg);
        assert!(r.is_err());
        let r = solve_ivp(|_, _, dy| dy[0] = 1.0, (1.0, 1.0), &[0.0], &cfg);
        assert!(matches!(r, Err(SolverError::Invalid(_))));
        let bad = SolverConfig { rtol: 0.0, ..cfg };
        assert!(solve_ivp(|_, _, dy| dy[0] = 1.0, (0.0, 1.0), &[0.0], &bad).is_err());
        let capped = SolverConfig { max_steps: 3, ..cfg };
        let r = solve_ivp(|t, _, dy| dy[0] = (50.0 * t).sin(), (0.0, 10.0), &[0.0], &capped);
        assert!(matches!(r, Err(SolverError::TooManySteps { .. })));
    }

    #[test]
    fn rhs_time_stays_in_span() {
        let cfg = SolverConfig::default();
        let mut seen = (f64::INFINITY, f64::NEG_INFINITY);
        solve_ivp(
            |t, y, dy| {
                seen = (seen.0.min(t), seen.1.max(t));
                dy[0] = -2.0 * y[0] + t.sin();
            },
            (0.5, 2.0),
            &[1.0],
            &cfg,
        )
        .unwrap();
        assert!(seen.0 >= 0.5 && seen.1 <= 2.0);
    }
}
