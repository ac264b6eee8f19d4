//! Dormand–Prince 5(4) integrator with terminal event detection.
//!
//! Events are located in two passes: a cubic Hermite interpolant over the
//! accepted step gives a bracket and first guess, then the crossing is
//! polished with Illinois iterations on exact partial steps taken from the
//! start of the step. The returned event state is therefore a genuine
//! 5th-order RK state, not an interpolated one.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("exceeded {max_steps} steps before t = {t}")]
    MaxSteps { max_steps: usize, t: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h0: 1e-3, h_max: 0.5, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Rising,
    Falling,
    Either,
}

impl Direction {
    fn matches(self, before: f64, after: f64) -> bool {
        let crossed = (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0);
        crossed
            && match self {
                Direction::Rising => after > before,
                Direction::Falling => after < before,
                Direction::Either => true,
            }
    }
}

type EventFn<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> f64 + 'a>;

/// A terminal event: integration stops at the first qualifying zero.
pub struct Event<'a, const N: usize> {
    func: EventFn<'a, N>,
    direction: Direction,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn new(direction: Direction, func: impl Fn(f64, &[f64; N]) -> f64 + 'a) -> Self {
        Self { func: Box::new(func), direction }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop<const N: usize> {
    /// Reached the requested end time.
    Reached,
    /// Event `index` fired at `t` with state `y`.
    Event { index: usize, t: f64, y: [f64; N] },
}

/// Accepted mesh with derivatives for Hermite dense output.
#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub ts: Vec<f64>,
    pub ys: Vec<[f64; N]>,
    pub fs: Vec<[f64; N]>,
    pub stop: Stop<N>,
}

impl<const N: usize> Solution<N> {
    pub fn t_final(&self) -> f64 {
        *self.ts.last().expect("solution always holds the initial point")
    }

    pub fn y_final(&self) -> [f64; N] {
        *self.ys.last().expect("solution always holds the initial point")
    }

    /// Cubic Hermite interpolation on the accepted mesh; clamps outside it.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let n = self.ts.len();
        if n == 1 || t <= self.ts[0] {
            return self.ys[0];
        }
        if t >= self.ts[n - 1] {
            return self.ys[n - 1];
        }
        let k = self.ts.partition_point(|&s| s <= t).clamp(1, n - 1) - 1;
        hermite(self.ts[k], &self.ys[k], &self.fs[k], self.ts[k + 1], &self.ys[k + 1], &self.fs[k + 1], t)
    }
}

fn hermite<const N: usize>(
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    t1: f64,
    y1: &[f64; N],
    f1: &[f64; N],
    t: f64,
) -> [f64; N] {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    std::array::from_fn(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
}

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
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// One Dormand–Prince step. Returns the 5th-order state, its derivative
/// (FSAL stage) and the embedded error vector.
fn dp_step<const N: usize, F>(rhs: &F, t: f64, y: &[f64; N], f0: &[f64; N], h: f64) -> ([f64; N], [f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; 7];
    k[0] = *f0;
    for s in 1..7 {
        let ys: [f64; N] = std::array::from_fn(|i| y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>());
        if s == 6 {
            k[6] = rhs(t + h, &ys);
            let err: [f64; N] = std::array::from_fn(|i| h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>());
            return (ys, k[6], err);
        }
        k[s] = rhs(t + C[s] * h, &ys);
    }
    unreachable!()
}

/// Integrates `y' = rhs(t, y)` forward from `t0` to `t_end` (`t_end > t0`),
/// stopping early at the first qualifying event.
pub fn integrate<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    events: &[Event<'_, N>],
) -> Result<Solution<N>, OdeError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    assert!(t_end > t0, "integrate only runs forward in t");
    let mut t = t0;
    let mut y = y0;
    let mut f = rhs(t, &y);
    let mut sol = Solution { ts: vec![t], ys: vec![y], fs: vec![f], stop: Stop::Reached };
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.func)(t, &y)).collect();
    let mut h = opts.h0.min(t_end - t0).min(opts.h_max);

    for _ in 0..opts.max_steps {
        if t >= t_end {
            return Ok(sol);
        }
        h = h.min(t_end - t).min(opts.h_max);
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t });
        }
        let (y_new, f_new, err) = dp_step(&rhs, t, &y, &f, h);
        let err_norm = (err
            .iter()
            .zip(y.iter().zip(&y_new))
            .map(|(e, (a, b))| {
                let sc = opts.atol + opts.rtol * a.abs().max(b.abs());
                (e / sc) * (e / sc)
            })
            .sum::<f64>()
            / N as f64)
            .sqrt();
        if !err_norm.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(OdeError::NonFinite { t });
            }
            continue;
        }
        if err_norm > 1.0 {
            h *= (0.9 * err_norm.powf(-0.2)).max(0.2);
            continue;
        }

        let t_new = t + h;
        // Check events on the accepted step.
        let mut fired: Option<(usize, f64, [f64; N], [f64; N])> = None;
        for (idx, ev) in events.iter().enumerate() {
            let g_new = (ev.func)(t_new, &y_new);
            if ev.direction.matches(g_prev[idx], g_new) {
                let (te, ye) = locate(&rhs, ev, t, &y, &f, g_prev[idx], h, &y_new, &f_new, g_new);
                if fired.as_ref().is_none_or(|(_, tf, _, _)| te < *tf) {
                    let fe = rhs(te, &ye);
                    fired = Some((idx, te, ye, fe));
                }
            }
        }
        if let Some((index, te, ye, fe)) = fired {
            sol.ts.push(te);
            sol.ys.push(ye);
            sol.fs.push(fe);
            sol.stop = Stop::Event { index, t: te, y: ye };
            return Ok(sol);
        }
        for (idx, ev) in events.iter().enumerate() {
            g_prev[idx] = (ev.func)(t_new, &y_new);
        }

        t = t_new;
        y = y_new;
        f = f_new;
        sol.ts.push(t);
        sol.ys.push(y);
        sol.fs.push(f);
        let factor = if err_norm == 0.0 { 5.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Err(OdeError::MaxSteps { max_steps: opts.max_steps, t })
}

#[allow(clippy::too_many_arguments)]
fn locate<const N: usize, F>(
    rhs: &F,
    ev: &Event<'_, N>,
    t: f64,
    y: &[f64; N],
    f: &[f64; N],
    g0: f64,
    h: f64,
    y1: &[f64; N],
    f1: &[f64; N],
    g1: f64,
) -> (f64, [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    // Hermite bracket refinement.
    let (mut lo, mut hi) = (0.0, h);
    let mut glo = g0;
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        let ym = hermite(t, y, f, t + h, y1, f1, t + mid);
        let gm = (ev.func)(t + mid, &ym);
        if (gm < 0.0) == (glo < 0.0) && gm != 0.0 {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    // Exact partial steps, Illinois on a bracket widened by the Hermite error.
    let exact = |tau: f64| -> ([f64; N], f64) {
        if tau <= 0.0 {
            return (*y, g0);
        }
        let (ys, _, _) = dp_step(rhs, t, y, f, tau);
        let gv = (ev.func)(t + tau, &ys);
        (ys, gv)
    };
    let pad = (hi - lo).max(1e-6 * h);
    let (mut a, mut b) = ((lo - pad).max(0.0), (hi + pad).min(h));
    let (_, mut ga) = exact(a);
    let (mut yb, mut gb) = if b >= h { (*y1, g1) } else { exact(b) };
    if (ga < 0.0) == (gb < 0.0) && ga != 0.0 && gb != 0.0 {
        a = 0.0;
        b = h;
        ga = g0;
        yb = *y1;
        gb = g1;
    }
    let mut side = 0i8;
    for _ in 0..80 {
        if gb == 0.0 {
            return (t + b, yb);
        }
        if (b - a).abs() <= 1e-15 * (t.abs() + h.abs()).max(1.0) {
            break;
        }
        let c = (a * gb - b * ga) / (gb - ga);
        let c = if c > a && c < b { c } else { 0.5 * (a + b) };
        let (yc, gc) = exact(c);
        if gc == 0.0 {
            return (t + c, yc);
        }
        if (gc < 0.0) == (gb < 0.0) {
            b = c;
            yb = yc;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    // The far side of the crossing, so the returned state satisfies the event.
    (t + b, yb)
}
