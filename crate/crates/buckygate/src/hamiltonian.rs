//! The two-spin Hamiltonian in the product basis |00⟩, |01⟩, |10⟩, |11⟩.
//!
//! # Structure
//!
//! Each spin is Zeeman-coupled to the local z field (static `B_z`, per-site
//! gradient offset `B_g1`/`B_g2`, and the shared drive `B_t·cos ωt`), and the
//! two spins interact through their magnetic dipole–dipole coupling
//!
//! ```text
//! H_dd/ħ = g(r) · [ σ⃗₁·σ⃗₂ − 3 (σ⃗₁·n̂)(σ⃗₂·n̂) ],   g(r) = γ₁γ₂μ₀μ_B²/(4πr³ħ)
//! ```
//!
//! with n̂ the unit vector joining the spins. The geometry here has n̂
//! **perpendicular** to the z axis (spins side by side in adjacent cages,
//! field along z). Taking n̂ = x̂,
//!
//! ```text
//! σ⃗₁·σ⃗₂ − 3σ₁ₓσ₂ₓ = σz⊗σz + σy⊗σy − 2·σx⊗σx
//!   = ⎡ 1  0  0 −3⎤
//!     ⎢ 0 −1 −1  0⎥
//!     ⎢ 0 −1 −1  0⎥   (basis |00⟩,|01⟩,|10⟩,|11⟩)
//!     ⎣−3  0  0  1⎦
//! ```
//!
//! which produces the defining −3g coupling between |00⟩ and |11⟩ and the −g
//! coupling between |01⟩ and |10⟩. (With n̂ ∥ ẑ instead, σx⊗σx + σy⊗σy − 2σz⊗σz
//! has a vanishing (|00⟩,|11⟩) element — the side-by-side geometry is what
//! makes the fast conditional-phase mechanism possible at all.)
//!
//! Adding the Zeeman term −(μ_B/ħ)(B₁·σz⊗I + B₂·I⊗σz) with σz|0⟩ = +|0⟩ and
//! B₁ = B_z(t)+B_g1, B₂ = B_z(t)+B_g2 gives the full matrix used throughout:
//!
//! ```text
//! H/ħ = ⎡ g+m1     0     0    −3g ⎤
//!       ⎢   0   −g+m2  −g      0  ⎥      m1 = −μ_B(2B_z(t)+B_g1+B_g2)/ħ
//!       ⎢   0    −g   −g−m2    0  ⎥      m2 = −μ_B(B_g1−B_g2)/ħ
//!       ⎣ −3g     0     0    g−m1 ⎦      B_z(t) = B_z + B_t·cos ωt
//! ```
//!
//! m2 carries no drive: the shared field cancels in the difference, so only
//! the {|00⟩,|11⟩} block is driven. The overall sign convention for (m1, m2)
//! follows σz|0⟩ = +|0⟩; a global sign flip of both leaves |θ| and the
//! concurrence invariant (covered by tests), so the choice is safe but fixed.
//! All entries are angular frequencies (rad/s).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{vec_norm, Mat4, Vec4, C64};
use crate::quantities::{InitialState, PhysicalParams};

/// A normalized two-spin state; amplitudes in basis order |00⟩,|01⟩,|10⟩,|11⟩.
///
/// Only *initial* states are wrapped in this type (unit norm enforced at
/// construction). Along trajectories the integrators keep raw `Vec4`
/// amplitudes so that norm drift remains observable as a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSpinState {
    pub c: Vec4,
}

impl TwoSpinState {
    /// Wrap amplitudes that are already unit-norm (tolerance 1e-12).
    pub fn new(c: Vec4) -> Result<Self> {
        let n = vec_norm(&c);
        if !((n - 1.0).abs() <= 1e-12) {
            return Err(Error::Config(format!(
                "initial_state: amplitudes must be unit-norm, got |c| = {n:.15}"
            )));
        }
        Ok(TwoSpinState { c })
    }

    /// Normalize arbitrary nonzero amplitudes to a valid state.
    pub fn normalized(mut c: Vec4) -> Result<Self> {
        let n = vec_norm(&c);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Config(
                "initial_state: cannot normalize a zero or non-finite amplitude vector".into(),
            ));
        }
        for a in c.iter_mut() {
            *a /= n;
        }
        Ok(TwoSpinState { c })
    }

    pub fn from_initial(spec: &InitialState) -> Self {
        // InitialState guarantees unit norm by construction.
        TwoSpinState {
            c: spec.amplitudes(),
        }
    }
}

/// The two effective Zeeman diagonal rates, rad/s.
///
/// `m1` is the total-field rate of the aligned block {|00⟩,|11⟩} (and the
/// only time-dependent quantity in the problem); `m2` is the gradient
/// *difference* rate of the anti-aligned block {|01⟩,|10⟩}. These symbols
/// are defined by the Zeeman expansion in the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeemanDiagonals {
    pub m1: f64,
    pub m2: f64,
}

/// 4×4 Hermitian matrix of angular frequencies (rad/s). Invariants
/// (enforced by construction in [`build_hamiltonian`], asserted in tests):
/// Hermitian; nonzero pattern = diagonal plus the (1,4) and (2,3)
/// anti-diagonal couplings; trace zero.
pub type HamiltonianMatrix = Mat4;

/// Evaluate m1(t), m2 for the given parameters at time `t_s`.
///
/// m1 uses the full instantaneous field B_z(t) = B_z + B_t·cos(ωt); m2 is
/// time-independent because the homogeneous drive cancels in the difference.
pub fn zeeman_diagonals(params: &PhysicalParams, t_s: f64) -> ZeemanDiagonals {
    let k = params.constants.mu_b / params.constants.hbar;
    let b_z_total = params.b_z_t + params.b_t_t * (params.omega_rad_s * t_s).cos();
    ZeemanDiagonals {
        m1: -k * (2.0 * b_z_total + params.b_g1_t + params.b_g2_t),
        m2: -k * (params.b_g1_t - params.b_g2_t),
    }
}

/// Build H(t)/ħ. The only time dependence enters through m1.
pub fn build_hamiltonian(params: &PhysicalParams, t_s: f64) -> Result<HamiltonianMatrix> {
    let g = params.coupling()?;
    let ZeemanDiagonals { m1, m2 } = zeeman_diagonals(params, t_s);
    let re = |x: f64| C64::new(x, 0.0);
    let mut h = Mat4::zeros();
    h.0[0][0] = re(g + m1);
    h.0[0][3] = re(-3.0 * g);
    h.0[1][1] = re(-g + m2);
    h.0[1][2] = re(-g);
    h.0[2][1] = re(-g);
    h.0[2][2] = re(-g - m2);
    h.0[3][0] = re(-3.0 * g);
    h.0[3][3] = re(g - m1);
    Ok(h)
}

/// Right-hand side of the Schrödinger equation: ċ = −i·(H/ħ)·c.
pub fn schrodinger_rhs(h: &HamiltonianMatrix, c: &Vec4) -> Vec4 {
    let minus_i = C64::new(0.0, -1.0);
    let mut out = h.mul_vec(c);
    for a in out.iter_mut() {
        *a *= minus_i;
    }
    out
}
