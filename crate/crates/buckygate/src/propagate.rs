//! Time evolution of the two-spin state.
//!
//! Three routes, deliberately independent of each other:
//!
//! 1. [`propagate_rk4`] — the production integrator: classical fixed-step
//!    4th-order Runge–Kutta on the complex amplitudes. Fixed step keeps
//!    output bit-reproducible; the norm is *never* re-imposed, so norm drift
//!    stays visible as an error diagnostic.
//! 2. [`propagate_exponential_oracle`] — piecewise-constant midpoint rule:
//!    each slice applies the exact matrix exponential of H evaluated at the
//!    slice midpoint. Every step is unitary up to roundoff; accuracy is
//!    2nd-order in the slice width for time-dependent H and exact for
//!    time-independent H.
//! 3. [`static_analytic`] — closed form for the drive-off case from the two
//!    independent 2×2 blocks, via the axis–angle formula for
//!    exp(−i(a·I + b⃗·σ⃗)t).
//!
//! Trajectories also carry the four *unwrapped* amplitude phases: each
//! Arg cᵢ is continued by folding successive increments into (−π, π], which
//! is what makes the conditional phase θ a continuous observable later.

use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, schrodinger_rhs, zeeman_diagonals, TwoSpinState};
use crate::linalg::{vec_add_scaled, vec_norm, Mat4, Vec4, C64};
use crate::quantities::{PhysicalParams, RESOLUTION_GUARD_RAD};

/// Maximum tolerated |norm − 1| at any output sample.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Below this magnitude an amplitude's phase is held at its last value and
/// the sample is flagged (Arg is undefined at zero).
pub const AMPLITUDE_FLOOR: f64 = 1e-8;

/// One output sample of a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t_s: f64,
    /// Raw amplitudes; norm is *not* re-imposed.
    pub c: Vec4,
    /// Euclidean norm of `c` at this sample.
    pub norm: f64,
    /// Unwrapped Arg c₁..Arg c₄, radians, continuous in time.
    pub phases: [f64; 4],
    /// True if any |cᵢ| sat below [`AMPLITUDE_FLOOR`] here (its phase track
    /// held its previous value).
    pub floor_flagged: bool,
}

/// An integrated trajectory: ordered samples plus the inputs that produced
/// it, so downstream refinement (gate-time bisection) can re-integrate.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: PhysicalParams,
    /// Integrator step actually used, s.
    pub dt_s: f64,
    /// Output stride actually used, s (a whole multiple of `dt_s`).
    pub stride_s: f64,
    pub samples: Vec<Sample>,
    /// max |norm − 1| observed over all samples.
    pub max_norm_drift: f64,
}

impl Trajectory {
    pub fn t_end_s(&self) -> f64 {
        self.samples.last().map(|s| s.t_s).unwrap_or(0.0)
    }

    pub fn final_state(&self) -> &Vec4 {
        &self.samples.last().expect("trajectory is never empty").c
    }
}

/// Map a phase to its principal value in (−π, π].
fn principal(phi: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut p = (phi + std::f64::consts::PI).rem_euclid(tau) - std::f64::consts::PI;
    if p == -std::f64::consts::PI {
        p = std::f64::consts::PI;
    }
    p
}

/// Continue the four unwrapped phase tracks across one sampling interval:
/// each track advances by the principal-value fold of (Arg cᵢ − previous),
/// i.e. the increment is assumed to lie in (−π, π]. Amplitudes below the
/// floor hold their previous phase and flag the sample.
pub(crate) fn advance_phase_tracks(prev: &[f64; 4], c: &Vec4) -> ([f64; 4], bool) {
    let mut phases = [0.0; 4];
    let mut flagged = false;
    for i in 0..4 {
        if c[i].norm() < AMPLITUDE_FLOOR {
            phases[i] = prev[i];
            flagged = true;
        } else {
            let raw = c[i].arg();
            phases[i] = prev[i] + principal(raw - principal(prev[i]));
        }
    }
    (phases, flagged)
}

/// Initial phase tracks: the plain arguments, with floored amplitudes
/// starting at phase 0 (flagged).
fn initial_phase_tracks(c: &Vec4) -> ([f64; 4], bool) {
    let mut phases = [0.0; 4];
    let mut flagged = false;
    for i in 0..4 {
        if c[i].norm() < AMPLITUDE_FLOOR {
            phases[i] = 0.0;
            flagged = true;
        } else {
            phases[i] = c[i].arg();
        }
    }
    (phases, flagged)
}

/// One classical RK4 step of ċ = −i·H(t)·c from `t` over width `h`.
pub(crate) fn rk4_step(params: &PhysicalParams, t: f64, h: f64, c: &Vec4) -> Result<Vec4> {
    let h1 = build_hamiltonian(params, t)?;
    let h2 = build_hamiltonian(params, t + 0.5 * h)?;
    let h3 = build_hamiltonian(params, t + h)?;
    let half = C64::new(0.5 * h, 0.0);
    let full = C64::new(h, 0.0);

    let k1 = schrodinger_rhs(&h1, c);
    let k2 = schrodinger_rhs(&h2, &vec_add_scaled(c, half, &k1));
    let k3 = schrodinger_rhs(&h2, &vec_add_scaled(c, half, &k2));
    let k4 = schrodinger_rhs(&h3, &vec_add_scaled(c, full, &k3));

    let sixth = C64::new(h / 6.0, 0.0);
    let third = C64::new(h / 3.0, 0.0);
    let mut out = vec_add_scaled(c, sixth, &k1);
    out = vec_add_scaled(&out, third, &k2);
    out = vec_add_scaled(&out, third, &k3);
    out = vec_add_scaled(&out, sixth, &k4);
    Ok(out)
}

fn check_time_args(t_end_s: f64, dt_s: f64) -> Result<()> {
    if !(dt_s > 0.0) || !dt_s.is_finite() {
        return Err(Error::Config(format!(
            "dt_fs: integrator step must be positive and finite, got {dt_s} s"
        )));
    }
    if !(t_end_s >= 0.0) || !t_end_s.is_finite() {
        return Err(Error::Config(format!(
            "t_end_ns: horizon must be non-negative and finite, got {t_end_s} s"
        )));
    }
    Ok(())
}

fn guard_step(params: &PhysicalParams, dt_s: f64) -> Result<()> {
    let phase_per_step = dt_s * params.rate_scale()?;
    if phase_per_step >= RESOLUTION_GUARD_RAD {
        return Err(Error::Config(format!(
            "dt_fs: resolution guard failed; dt × fastest rate = {:.3e} rad per step \
             (limit {}); reduce dt_fs",
            phase_per_step, RESOLUTION_GUARD_RAD
        )));
    }
    Ok(())
}

/// Number of integrator steps to cover `t_end` in steps of `dt`, treating a
/// near-integer quotient as exact so the final step is not a sliver.
fn step_count(t_end_s: f64, dt_s: f64) -> usize {
    let ratio = t_end_s / dt_s;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        rounded as usize
    } else {
        ratio.ceil() as usize
    }
}

fn push_sample(
    samples: &mut Vec<Sample>,
    max_drift: &mut f64,
    t_s: f64,
    c: Vec4,
    prev_phases: &[f64; 4],
) -> Result<[f64; 4]> {
    let norm = vec_norm(&c);
    let drift = (norm - 1.0).abs();
    if drift > NORM_TOLERANCE {
        return Err(Error::Diverged {
            t_s,
            norm_err: drift,
            tolerance: NORM_TOLERANCE,
        });
    }
    *max_drift = max_drift.max(drift);
    let (phases, flagged) = advance_phase_tracks(prev_phases, &c);
    samples.push(Sample {
        t_s,
        c,
        norm,
        phases,
        floor_flagged: flagged,
    });
    Ok(phases)
}

fn seed_trajectory(initial: &TwoSpinState) -> (Vec<Sample>, [f64; 4], f64) {
    let c = initial.c;
    let norm = vec_norm(&c);
    let (phases, flagged) = initial_phase_tracks(&c);
    let samples = vec![Sample {
        t_s: 0.0,
        c,
        norm,
        phases,
        floor_flagged: flagged,
    }];
    (samples, phases, (norm - 1.0).abs())
}

/// Integrate with fixed-step RK4, sampling every `stride_s` (rounded to a
/// whole number of steps) plus a final sample landed exactly on `t_end_s`
/// (the last step is shortened if the horizon is not a step multiple).
pub fn propagate_rk4(
    initial: &TwoSpinState,
    params: &PhysicalParams,
    t_end_s: f64,
    dt_s: f64,
    stride_s: f64,
) -> Result<Trajectory> {
    check_time_args(t_end_s, dt_s)?;
    guard_step(params, dt_s)?;
    let stride_steps = ((stride_s / dt_s).round() as usize).max(1);

    let (mut samples, mut phases, mut max_drift) = seed_trajectory(initial);
    let mut c = initial.c;
    let n_steps = step_count(t_end_s, dt_s);

    for k in 0..n_steps {
        let t = k as f64 * dt_s;
        let last = k + 1 == n_steps;
        let h = if last { t_end_s - t } else { dt_s };
        c = rk4_step(params, t, h, &c)?;
        if last || (k + 1) % stride_steps == 0 {
            let t_next = if last { t_end_s } else { (k + 1) as f64 * dt_s };
            phases = push_sample(&mut samples, &mut max_drift, t_next, c, &phases)?;
        }
    }

    Ok(Trajectory {
        params: *params,
        dt_s,
        stride_s: stride_steps as f64 * dt_s,
        samples,
        max_norm_drift: max_drift,
    })
}

/// Independent oracle: split [0, t_end] into `n_slices` equal slices and
/// apply U = exp(−i·H(t_mid)·h) exactly on each. Samples are emitted every
/// `sample_every` slices (and at the end).
pub fn propagate_exponential_oracle(
    initial: &TwoSpinState,
    params: &PhysicalParams,
    t_end_s: f64,
    n_slices: usize,
    sample_every: usize,
) -> Result<Trajectory> {
    if n_slices == 0 {
        return Err(Error::Config("n_slices: must be at least 1".into()));
    }
    if !(t_end_s >= 0.0) || !t_end_s.is_finite() {
        return Err(Error::Config(format!(
            "t_end_ns: horizon must be non-negative and finite, got {t_end_s} s"
        )));
    }
    let sample_every = sample_every.max(1);
    let (mut samples, mut phases, mut max_drift) = seed_trajectory(initial);
    let mut c = initial.c;

    if t_end_s > 0.0 {
        let h = t_end_s / n_slices as f64;
        let minus_i_h = C64::new(0.0, -h);
        for k in 0..n_slices {
            let t_mid = (k as f64 + 0.5) * h;
            let u: Mat4 = build_hamiltonian(params, t_mid)?.scale(minus_i_h).expm();
            c = u.mul_vec(&c);
            let last = k + 1 == n_slices;
            if last || (k + 1) % sample_every == 0 {
                let t_next = if last { t_end_s } else { (k + 1) as f64 * h };
                phases = push_sample(&mut samples, &mut max_drift, t_next, c, &phases)?;
            }
        }
    }

    Ok(Trajectory {
        params: *params,
        dt_s: t_end_s / n_slices as f64,
        stride_s: t_end_s / n_slices as f64 * sample_every as f64,
        samples,
        max_norm_drift: max_drift,
    })
}

/// Closed-form evolution for the drive-off (static) Hamiltonian.
///
/// The two blocks evolve independently:
/// {|00⟩,|11⟩}: H_A = g·I + m1·σz − 3g·σx, Rabi frequency Ω₁ = √(m1²+9g²);
/// {|01⟩,|10⟩}: H_B = −g·I + m2·σz − g·σx, Rabi frequency Ω₂ = √(m2²+g²);
/// each via exp(−i(a·I + b⃗·σ⃗)t) = e^{−iat}(cos Ωt · I − i sin Ωt · b⃗·σ⃗/Ω).
pub fn static_analytic(initial: &TwoSpinState, params: &PhysicalParams, t_s: f64) -> Result<Vec4> {
    if params.b_t_t != 0.0 {
        return Err(Error::Config(
            "Bt_T: static_analytic is only valid with the drive off (Bt_T = 0)".into(),
        ));
    }
    let g = params.coupling()?;
    let z = zeeman_diagonals(params, 0.0);

    // exp(−i t (a·I + m·σz + x·σx)) applied to the 2-vector (u, v).
    let rotate = |a: f64, m: f64, x: f64, u: C64, v: C64| -> (C64, C64) {
        let omega = (m * m + x * x).sqrt();
        let (cos_t, sinc) = if omega > 0.0 {
            ((omega * t_s).cos(), (omega * t_s).sin() / omega)
        } else {
            (1.0, t_s)
        };
        let phase = C64::new(0.0, -a * t_s).exp();
        let mi = C64::new(0.0, -1.0);
        let u2 = phase * (C64::new(cos_t, 0.0) * u + mi * C64::new(sinc, 0.0) * (m * u + x * v));
        let v2 = phase * (C64::new(cos_t, 0.0) * v + mi * C64::new(sinc, 0.0) * (x * u - m * v));
        (u2, v2)
    };

    let c = initial.c;
    let (c1, c4) = rotate(g, z.m1, -3.0 * g, c[0], c[3]);
    let (c2, c3) = rotate(-g, z.m2, -g, c[1], c[2]);
    Ok([c1, c2, c3, c4])
}
