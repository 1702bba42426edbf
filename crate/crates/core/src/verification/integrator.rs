use serde::{Deserialize, Serialize};

use crate::error::VerifyError;
use crate::fourier_taylor::{DomainParams, Evaluator, FourierTaylor};

/// `2π` as an unevaluated sum of two doubles.
const TWO_PI_HI: f64 = std::f64::consts::TAU;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

/// `(a·b)` split into the rounded product and its exact error.
fn two_product(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    (hi, a.mul_add(b, -hi))
}

/// `q0 + ω t` reduced to `[0, 2π)` with the product and the reduction
/// carried in double-double arithmetic.
pub fn advance_angle(q0: f64, omega: f64, t: f64) -> f64 {
    let (hi, lo) = two_product(omega, t);
    let turns = ((hi + q0) / TWO_PI_HI).floor();
    let (r_hi, r_lo) = two_product(turns, TWO_PI_HI);
    let x = (hi - r_hi) + (lo - r_lo - turns * TWO_PI_LO) + q0;
    wrap_angle(x)
}

pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI_HI);
    if r >= TWO_PI_HI {
        0.0
    } else {
        r
    }
}

/// Difference `a − b` of two angles, mapped into `(−π, π]`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TWO_PI_HI);
    if d > std::f64::consts::PI {
        d - TWO_PI_HI
    } else {
        d
    }
}

/// `ṗ = −∂H/∂q`, `q̇ = ∂H/∂p` for a series Hamiltonian.
#[derive(Clone, Debug)]
pub struct HamiltonianField {
    n: usize,
    /// `−∂H/∂q_1..n`, then `∂H/∂p_1..n`.
    field: Evaluator,
    energy: Evaluator,
    scale: f64,
}

impl HamiltonianField {
    /// `dom` fixes the norm used to make energy drift relative.
    pub fn new(h: &FourierTaylor, dom: &DomainParams) -> Self {
        let n = h.n();
        let parts: Vec<FourierTaylor> = (0..n)
            .map(|j| h.derivative_q(j).scale(-1.0))
            .chain((0..n).map(|j| h.derivative_p(j)))
            .collect();
        let norm = h.without_constant().weighted_norm(dom);
        Self {
            n,
            field: Evaluator::new(&parts),
            energy: Evaluator::new(std::slice::from_ref(h)),
            scale: if norm > 0.0 { norm } else { 1.0 },
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn energy(&self, p: &[f64], q: &[f64]) -> f64 {
        self.energy.eval(p, q)[0]
    }

    fn rhs(&self, y: &[f64], out: &mut [f64]) {
        let (p, q) = y.split_at(self.n);
        self.field.eval_into(p, q, out);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Gragg–Bulirsch–Stoer extrapolation of order 8.
    Extrapolation,
    /// Four-stage Gauss–Legendre collocation, symplectic, order 8.
    GaussLegendre,
}

fn default_dt() -> f64 {
    0.01
}
fn default_tolerance() -> f64 {
    1e-13
}
fn default_sample_every() -> usize {
    10
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Bound on the local error estimate of one step.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Steps between stored samples.
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

fn default_scheme() -> Scheme {
    Scheme::Extrapolation
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            scheme: default_scheme(),
            dt: default_dt(),
            tolerance: default_tolerance(),
            sample_every: default_sample_every(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    /// Angles reduced to `[0, 2π)`.
    pub q: Vec<Vec<f64>>,
    /// `max_t |H(t) − H(0)| / ‖H‖`.
    pub energy_drift: f64,
    pub steps: usize,
    pub max_error_estimate: f64,
}

const SUBSTEPS: [usize; 4] = [2, 4, 6, 8];
const MAX_SPLITS: u32 = 4;

struct Workspace {
    f: Vec<f64>,
    z0: Vec<f64>,
    z1: Vec<f64>,
    arg: Vec<f64>,
    table: Vec<Vec<f64>>,
    stages: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        Self {
            f: vec![0.0; dim],
            z0: vec![0.0; dim],
            z1: vec![0.0; dim],
            arg: vec![0.0; dim],
            table: vec![vec![0.0; dim]; SUBSTEPS.len()],
            stages: vec![vec![0.0; dim]; 4],
        }
    }
}

/// Modified midpoint rule with `m` substeps; returns the increment in `out`.
fn midpoint(field: &HamiltonianField, y: &[f64], h: f64, m: usize, ws: &mut Workspace, out: &mut [f64]) {
    let dim = y.len();
    let hs = h / m as f64;
    // z0, z1 hold deviations from y.
    field.rhs(y, &mut ws.f);
    for i in 0..dim {
        ws.z0[i] = 0.0;
        ws.z1[i] = hs * ws.f[i];
    }
    for _ in 1..m {
        for i in 0..dim {
            ws.arg[i] = y[i] + ws.z1[i];
        }
        field.rhs(&ws.arg, &mut ws.f);
        for i in 0..dim {
            let next = ws.z0[i] + 2.0 * hs * ws.f[i];
            ws.z0[i] = ws.z1[i];
            ws.z1[i] = next;
        }
    }
    for i in 0..dim {
        ws.arg[i] = y[i] + ws.z1[i];
    }
    field.rhs(&ws.arg, &mut ws.f);
    for i in 0..dim {
        out[i] = 0.5 * (ws.z1[i] + ws.z0[i] + hs * ws.f[i]);
    }
}

/// Aitken–Neville extrapolation in `h²`; returns the increment and the
/// difference of the two highest-order estimates.
fn extrapolation_step(field: &HamiltonianField, y: &[f64], h: f64, ws: &mut Workspace, out: &mut [f64]) -> f64 {
    let dim = y.len();
    let mut table = std::mem::take(&mut ws.table);
    let mut err = 0.0;
    for (i, &m) in SUBSTEPS.iter().enumerate() {
        midpoint(field, y, h, m, ws, &mut table[i]);
    }
    // In-place Neville: afterwards table[i] holds the diagonal entry T_{i,i}.
    for j in 1..SUBSTEPS.len() {
        for i in (j..SUBSTEPS.len()).rev() {
            let ratio = (SUBSTEPS[i] as f64 / SUBSTEPS[i - j] as f64).powi(2) - 1.0;
            for c in 0..dim {
                table[i][c] += (table[i][c] - table[i - 1][c]) / ratio;
            }
        }
    }
    let top = SUBSTEPS.len() - 1;
    for c in 0..dim {
        err = f64::max(err, (table[top][c] - table[top - 1][c]).abs());
        out[c] = table[top][c];
    }
    ws.table = table;
    err
}

struct GaussLegendre {
    a: [[f64; 4]; 4],
    b: [f64; 4],
}

impl GaussLegendre {
    /// Nodes are the roots of the shifted Legendre polynomial of degree 4;
    /// `a` integrates the Lagrange basis on those nodes. The weights use
    /// their closed form, which the polynomial integration reproduces only
    /// to a few ulps.
    fn new() -> Self {
        let r = (6.0f64 / 5.0).sqrt();
        let x = [
            -((3.0 + 2.0 * r) / 7.0).sqrt(),
            -((3.0 - 2.0 * r) / 7.0).sqrt(),
            ((3.0 - 2.0 * r) / 7.0).sqrt(),
            ((3.0 + 2.0 * r) / 7.0).sqrt(),
        ];
        let c: Vec<f64> = x.iter().map(|v| 0.5 * (1.0 + v)).collect();
        let mut a = [[0.0; 4]; 4];
        for j in 0..4 {
            // Coefficients of l_j(t), lowest degree first.
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for (m, &cm) in c.iter().enumerate() {
                if m == j {
                    continue;
                }
                let mut next = vec![0.0; poly.len() + 1];
                for (d, &pc) in poly.iter().enumerate() {
                    next[d + 1] += pc;
                    next[d] -= cm * pc;
                }
                poly = next;
                denom *= c[j] - cm;
            }
            let integral = |t: f64| {
                poly.iter()
                    .enumerate()
                    .map(|(d, &pc)| pc * t.powi(d as i32 + 1) / (d as f64 + 1.0))
                    .fold(0.0, |s, v| s + v)
                    / denom
            };
            for i in 0..4 {
                a[i][j] = integral(c[i]);
            }
        }
        let w = 30f64.sqrt() / 72.0;
        let b = [0.25 - w, 0.25 + w, 0.25 + w, 0.25 - w];
        Self { a, b }
    }

    /// Solves the stage equations by fixed-point iteration; the returned
    /// estimate is the last stage correction.
    fn step(&self, field: &HamiltonianField, y: &[f64], h: f64, ws: &mut Workspace, out: &mut [f64]) -> f64 {
        let dim = y.len();
        let mut stages = std::mem::take(&mut ws.stages);
        field.rhs(y, &mut ws.f);
        for s in stages.iter_mut() {
            s.copy_from_slice(&ws.f);
        }
        let scale = h * ws.f.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let mut change = f64::INFINITY;
        let mut previous = f64::INFINITY;
        for _ in 0..60 {
            previous = previous.min(change);
            change = 0.0;
            for i in 0..4 {
                for c in 0..dim {
                    let mut acc = 0.0;
                    for (j, s) in stages.iter().enumerate() {
                        acc += self.a[i][j] * s[c];
                    }
                    ws.arg[c] = y[c] + h * acc;
                }
                field.rhs(&ws.arg, &mut ws.f);
                for c in 0..dim {
                    change = f64::max(change, h * (ws.f[c] - stages[i][c]).abs());
                    stages[i][c] = ws.f[c];
                }
            }
            if change <= f64::EPSILON * scale || change >= previous {
                break;
            }
        }
        // Converged to rounding, or stalled at it.
        let change = if change <= 1e3 * f64::EPSILON * scale {
            0.0
        } else {
            change
        };
        for c in 0..dim {
            let mut acc = 0.0;
            for (j, s) in stages.iter().enumerate() {
                acc += self.b[j] * s[c];
            }
            out[c] = h * acc;
        }
        ws.stages = stages;
        change
    }
}

/// Compensated state: `value + comp` carries the rounding the sum lost.
struct KahanState {
    value: Vec<f64>,
    comp: Vec<f64>,
    n: usize,
}

impl KahanState {
    fn add(&mut self, delta: &[f64]) {
        for i in 0..self.value.len() {
            let y = delta[i] + self.comp[i];
            let t = self.value[i] + y;
            self.comp[i] = y - (t - self.value[i]);
            self.value[i] = t;
        }
        for j in self.n..2 * self.n {
            let turns = (self.value[j] / TWO_PI_HI).floor();
            if turns != 0.0 {
                let (hi, lo) = two_product(turns, TWO_PI_HI);
                let t = self.value[j] - hi;
                self.comp[j] -= lo + turns * TWO_PI_LO;
                self.value[j] = t;
            }
        }
    }
}

/// Integrates Hamilton's equations from `(p0, q0)` over `[0, t_end]` with a
/// fixed step close to `opts.dt`. A step whose error estimate exceeds the
/// tolerance is split in halves; [`VerifyError::StepRejected`] is raised
/// when splitting does not help.
pub fn integrate_orbit(
    field: &HamiltonianField,
    p0: &[f64],
    q0: &[f64],
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory, VerifyError> {
    let n = field.n();
    if p0.len() != n || q0.len() != n {
        return Err(VerifyError::InvalidParams(format!(
            "initial point has dimension ({}, {}), Hamiltonian has {n}",
            p0.len(),
            q0.len()
        )));
    }
    if !(opts.dt > 0.0) || !(t_end >= 0.0) || !t_end.is_finite() || opts.sample_every == 0 {
        return Err(VerifyError::InvalidParams(
            "need dt > 0, a finite horizon >= 0 and sample_every >= 1".to_string(),
        ));
    }
    let steps = (t_end / opts.dt - 1e-9).ceil().max(0.0) as usize;
    let h = if steps > 0 { t_end / steps as f64 } else { 0.0 };
    let mut state = KahanState {
        value: p0.iter().copied().chain(q0.iter().map(|&v| wrap_angle(v))).collect(),
        comp: vec![0.0; 2 * n],
        n,
    };
    let gl = GaussLegendre::new();
    let mut ws = Workspace::new(2 * n);
    let mut delta = vec![0.0; 2 * n];
    let e0 = field.energy(p0, q0);
    let mut drift: f64 = 0.0;
    let mut max_err: f64 = 0.0;
    let mut traj = Trajectory {
        times: vec![0.0],
        p: vec![state.value[..n].to_vec()],
        q: vec![state.value[n..].to_vec()],
        energy_drift: 0.0,
        steps,
        max_error_estimate: 0.0,
    };
    for i in 1..=steps {
        let mut splits = 0;
        loop {
            let pieces = 1usize << splits;
            let hp = h / pieces as f64;
            let mut worst: f64 = 0.0;
            let mut trial = KahanState {
                value: state.value.clone(),
                comp: state.comp.clone(),
                n,
            };
            for _ in 0..pieces {
                let y: Vec<f64> = trial.value.iter().zip(&trial.comp).map(|(v, c)| v + c).collect();
                let est = match opts.scheme {
                    Scheme::Extrapolation => extrapolation_step(field, &y, hp, &mut ws, &mut delta),
                    Scheme::GaussLegendre => gl.step(field, &y, hp, &mut ws, &mut delta),
                };
                worst = worst.max(est);
                trial.add(&delta);
            }
            if worst <= opts.tolerance {
                max_err = max_err.max(worst);
                state = trial;
                break;
            }
            if splits >= MAX_SPLITS || !worst.is_finite() {
                return Err(VerifyError::StepRejected {
                    time: i as f64 * h,
                    estimate: worst,
                    tolerance: opts.tolerance,
                });
            }
            splits += 1;
        }
        if i % opts.sample_every == 0 || i == steps {
            let p: Vec<f64> = (0..n).map(|j| state.value[j] + state.comp[j]).collect();
            let q: Vec<f64> = (n..2 * n).map(|j| wrap_angle(state.value[j] + state.comp[j])).collect();
            drift = drift.max((field.energy(&p, &q) - e0).abs() / field.scale);
            traj.times.push(i as f64 * h);
            traj.p.push(p);
            traj.q.push(q);
        }
    }
    traj.energy_drift = drift;
    traj.max_error_estimate = max_err;
    Ok(traj)
}
