//! Adaptive Dormand–Prince 5(4) integrator for complex first-order systems.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub rtol: f64,
    pub atol: f64,
    pub h_initial: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            h_initial: 1e-3,
            h_min: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

/// Integration stopped at `x`: step size underflow or step budget exhausted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFailure {
    pub x: f64,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = rhs(x, y)` from `x0` through each point of `targets`
/// (monotone in the direction of travel) and returns the states there.
pub fn integrate<const D: usize>(
    rhs: impl Fn(f64, &[Complex64; D]) -> [Complex64; D],
    x0: f64,
    y0: [Complex64; D],
    targets: &[f64],
    policy: &StepPolicy,
) -> Result<Vec<[Complex64; D]>, StepFailure> {
    let mut out = Vec::with_capacity(targets.len());
    let mut x = x0;
    let mut y = y0;
    let mut h_abs = policy.h_initial;
    let mut steps = 0usize;
    for &target in targets {
        while x != target {
            let dir = (target - x).signum();
            let last = h_abs >= (target - x).abs();
            let h = if last { target - x } else { dir * h_abs };
            let mut k = [[Complex64::new(0.0, 0.0); D]; 7];
            for s in 0..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        for d in 0..D {
                            ys[d] += h * a * kj[d];
                        }
                    }
                }
                k[s] = rhs(x + C[s] * h, &ys);
            }
            let mut y5 = y;
            let mut err = 0.0f64;
            for d in 0..D {
                let mut s5 = Complex64::new(0.0, 0.0);
                let mut s4 = Complex64::new(0.0, 0.0);
                for s in 0..7 {
                    s5 += B5[s] * k[s][d];
                    s4 += B4[s] * k[s][d];
                }
                y5[d] += h * s5;
                let scale = policy.atol + policy.rtol * y[d].norm().max(y5[d].norm());
                err = err.max((h * (s5 - s4)).norm() / scale);
            }
            steps += 1;
            if steps > policy.max_steps || !err.is_finite() {
                return Err(StepFailure { x });
            }
            if err <= 1.0 {
                x = if last { target } else { x + h };
                y = y5;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 && last {
                h_abs = h_abs.max(h.abs() * factor.min(1.0));
            } else {
                h_abs = h.abs() * factor;
            }
            if h_abs < policy.h_min {
                return Err(StepFailure { x });
            }
        }
        out.push(y);
    }
    Ok(out)
}
