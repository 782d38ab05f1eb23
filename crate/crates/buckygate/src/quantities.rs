//! Physical constants, unit bridges, and the validated experiment parameters.
//!
//! Every numeric symbol of the model lives here. Internal unit convention:
//! all Hamiltonian entries are angular frequencies (H/ħ, rad/s) so the
//! equations of motion never divide by ħ per step; time is seconds
//! internally and nanoseconds at user surfaces; magnetic fields are tesla.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{vec_norm, C64, Vec4};

/// Fundamental constants (CODATA 2018) plus the two gyromagnetic factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Bohr magneton, J/T.
    pub mu_b: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Vacuum permeability, T·m/A.
    pub mu_0: f64,
    /// Dimensionless gyromagnetic ratio of spin 1 (electron spin: 2).
    pub gamma_1: f64,
    /// Dimensionless gyromagnetic ratio of spin 2.
    pub gamma_2: f64,
}

impl PhysicalConstants {
    pub const fn codata() -> Self {
        PhysicalConstants {
            mu_b: 9.274_010_078_3e-24,
            hbar: 1.054_571_817e-34,
            mu_0: 1.256_637_062_12e-6,
            gamma_1: 2.0,
            gamma_2: 2.0,
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

/// How a configured drive frequency in "GHz" maps to ω in rad/s.
///
/// The literature value "ω = 15.5 GHz" is ambiguous: read as an angular
/// frequency it is 1.55×10¹⁰ rad/s, read as an ordinary frequency it is
/// 2π·15.5×10⁹ rad/s. Both interpretations are supported; calibration
/// (`explore::calibrate_r`) decides empirically which one reproduces the
/// reference gate time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaConvention {
    /// The GHz number is ω/10⁹ directly: ω = value·10⁹ rad/s.
    Angular,
    /// The GHz number is a cycle frequency: ω = 2π·value·10⁹ rad/s.
    Ordinary,
}

impl OmegaConvention {
    /// Convert a frequency stated in "GHz" to ω in rad/s under this reading.
    pub fn ghz_to_rad_s(self, ghz: f64) -> f64 {
        match self {
            OmegaConvention::Angular => ghz * 1e9,
            OmegaConvention::Ordinary => 2.0 * std::f64::consts::PI * ghz * 1e9,
        }
    }

    /// Invert [`Self::ghz_to_rad_s`].
    pub fn rad_s_to_ghz(self, omega_rad_s: f64) -> f64 {
        match self {
            OmegaConvention::Angular => omega_rad_s / 1e9,
            OmegaConvention::Ordinary => omega_rad_s / (2.0 * std::f64::consts::PI * 1e9),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            OmegaConvention::Angular => "angular",
            OmegaConvention::Ordinary => "ordinary",
        }
    }
}

/// Initial state of the two spins.
///
/// The default |+⟩⊗|+⟩ keeps all four amplitudes equal in magnitude, which
/// keeps the four phase tracks of θ well defined; |00⟩ is the closed-form
/// benchmark state; `Custom` holds eight reals (re, im per amplitude),
/// normalized at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialState {
    PlusPlus,
    Basis00,
    Custom([f64; 8]),
}

impl InitialState {
    /// Construct a custom initial state, normalizing to unit norm.
    pub fn custom(raw: [f64; 8]) -> Result<Self> {
        if raw.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config(
                "initial_state: custom amplitudes must be finite".into(),
            ));
        }
        let norm2: f64 = raw.iter().map(|x| x * x).sum();
        if norm2 <= 0.0 {
            return Err(Error::Config(
                "initial_state: custom amplitudes must not be the zero vector".into(),
            ));
        }
        let inv = 1.0 / norm2.sqrt();
        let mut out = raw;
        for x in out.iter_mut() {
            *x *= inv;
        }
        Ok(InitialState::Custom(out))
    }

    /// The unit-norm amplitude vector in the |00⟩,|01⟩,|10⟩,|11⟩ basis.
    pub fn amplitudes(&self) -> Vec4 {
        match self {
            InitialState::PlusPlus => [C64::new(0.5, 0.0); 4],
            InitialState::Basis00 => [
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
            ],
            InitialState::Custom(raw) => {
                let mut v = [
                    C64::new(raw[0], raw[1]),
                    C64::new(raw[2], raw[3]),
                    C64::new(raw[4], raw[5]),
                    C64::new(raw[6], raw[7]),
                ];
                // Constructed normalized; renormalize defensively so the
                // vector stays unit-norm even after serde round-trips.
                let n = vec_norm(&v);
                if n > 0.0 && (n - 1.0).abs() > 1e-15 {
                    for c in v.iter_mut() {
                        *c /= n;
                    }
                }
                v
            }
        }
    }
}

/// Zeeman angular frequency μ_B·B/ħ of a field B, in rad/s.
///
/// This is the single bridge between tesla and rad/s; every Zeeman diagonal
/// goes through it, so unit errors cannot diverge between code paths.
pub fn field_to_angular(b_tesla: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !b_tesla.is_finite() {
        return Err(Error::Config(format!(
            "field value must be finite, got {b_tesla}"
        )));
    }
    Ok(constants.mu_b * b_tesla / constants.hbar)
}

/// Dipole–dipole coupling strength g(r) as an angular frequency, rad/s:
/// g = γ₁γ₂·μ₀·μ_B² / (4π·r³·ħ), which for γ₁ = γ₂ = 2 reduces to
/// μ₀·μ_B²/(π·r³·ħ). Strictly decreasing in r, scaling as r⁻³.
pub fn dipole_coupling_angular(r_m: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(r_m > 0.0) || !r_m.is_finite() {
        return Err(Error::Config(format!(
            "r_nm: inter-spin distance must be positive and finite, got {} m",
            r_m
        )));
    }
    let prefactor = constants.gamma_1 * constants.gamma_2 / 4.0;
    Ok(prefactor * constants.mu_0 * constants.mu_b * constants.mu_b
        / (std::f64::consts::PI * r_m.powi(3) * constants.hbar))
}

/// Complete, validated parameter set for one simulation.
///
/// Distances in meters, fields in tesla, ω in rad/s, times in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub constants: PhysicalConstants,
    /// Inter-spin distance, m. Not directly measurable in the physical
    /// setup; calibrated against the reference gate time (see `explore`).
    pub r_m: f64,
    /// Static z field, T.
    pub b_z_t: f64,
    /// Gradient-induced field offset at spin 1, T.
    pub b_g1_t: f64,
    /// Gradient-induced field offset at spin 2, T.
    pub b_g2_t: f64,
    /// Microwave drive amplitude, T (0 disables the drive).
    pub b_t_t: f64,
    /// Drive angular frequency, rad/s.
    pub omega_rad_s: f64,
    /// Records how a configured GHz value was interpreted into `omega_rad_s`.
    pub omega_input_convention: OmegaConvention,
    /// Simulation horizon, s.
    pub t_end_s: f64,
    /// Integrator step, s.
    pub dt_s: f64,
    pub initial_state: InitialState,
}

/// Upper bound on the phase any state component can gain per integrator
/// step: dt·(fastest angular rate) must stay below this.
pub const RESOLUTION_GUARD_RAD: f64 = 0.05;

impl PhysicalParams {
    /// The fastest angular rate in the problem: the largest of |m1| (over
    /// the whole drive cycle), |m2|, 4g, μ_B·B_t/ħ, and ω. The resolution
    /// guard multiplies this by dt.
    pub fn rate_scale(&self) -> Result<f64> {
        let f2a = |b| field_to_angular(b, &self.constants);
        let m1_static = -(f2a(2.0 * self.b_z_t)? + f2a(self.b_g1_t)? + f2a(self.b_g2_t)?);
        let m1_swing = 2.0 * f2a(self.b_t_t)?.abs();
        let m1_max = m1_static.abs() + m1_swing;
        let m2 = -(f2a(self.b_g1_t)? - f2a(self.b_g2_t)?);
        let g = dipole_coupling_angular(self.r_m, &self.constants)?;
        Ok([
            m1_max,
            m2.abs(),
            (4.0 * g).abs(),
            f2a(self.b_t_t)?.abs(),
            self.omega_rad_s.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max))
    }

    /// Enforce every structural invariant. Violations name the offending
    /// quantity using its configuration key.
    pub fn validate(&self) -> Result<()> {
        if !(self.r_m > 0.0) || !self.r_m.is_finite() {
            return Err(Error::Config(format!(
                "r_nm: must be positive and finite, got {} m",
                self.r_m
            )));
        }
        for (key, value) in [
            ("Bz_T", self.b_z_t),
            ("Bg1_T", self.b_g1_t),
            ("Bg2_T", self.b_g2_t),
            ("Bt_T", self.b_t_t),
        ] {
            if !value.is_finite() {
                return Err(Error::Config(format!("{key}: must be finite, got {value}")));
            }
        }
        if !self.omega_rad_s.is_finite() || self.omega_rad_s < 0.0 {
            return Err(Error::Config(format!(
                "omega_GHz: drive frequency must be finite and non-negative, got {} rad/s",
                self.omega_rad_s
            )));
        }
        if self.b_t_t != 0.0 && self.omega_rad_s == 0.0 {
            return Err(Error::Config(
                "omega_GHz: must be nonzero when the drive amplitude Bt_T is nonzero".into(),
            ));
        }
        if !(self.dt_s > 0.0) || !self.dt_s.is_finite() {
            return Err(Error::Config(format!(
                "dt_fs: integrator step must be positive and finite, got {} s",
                self.dt_s
            )));
        }
        if !(self.t_end_s >= 0.0) || !self.t_end_s.is_finite() {
            return Err(Error::Config(format!(
                "t_end_ns: horizon must be non-negative and finite, got {} s",
                self.t_end_s
            )));
        }
        if self.t_end_s > 0.0 && self.dt_s > self.t_end_s {
            return Err(Error::Config(format!(
                "dt_fs: step ({} s) exceeds the horizon t_end_ns ({} s)",
                self.dt_s, self.t_end_s
            )));
        }
        let phase_per_step = self.dt_s * self.rate_scale()?;
        if phase_per_step >= RESOLUTION_GUARD_RAD {
            return Err(Error::Config(format!(
                "dt_fs: resolution guard failed; dt × fastest rate = {:.3e} rad per step \
                 (limit {}); reduce dt_fs",
                phase_per_step, RESOLUTION_GUARD_RAD
            )));
        }
        if let InitialState::Custom(raw) = self.initial_state {
            let norm2: f64 = raw.iter().map(|x| x * x).sum();
            if !((norm2 - 1.0).abs() < 1e-9) {
                return Err(Error::Config(
                    "initial_state: custom amplitudes must be unit-norm \
                     (construct via InitialState::custom)"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    /// The drive frequency expressed back in the configured "GHz" unit.
    pub fn omega_ghz_input(&self) -> f64 {
        self.omega_input_convention.rad_s_to_ghz(self.omega_rad_s)
    }

    /// Dipole coupling g(r) for these parameters, rad/s.
    pub fn coupling(&self) -> Result<f64> {
        dipole_coupling_angular(self.r_m, &self.constants)
    }
}

/// Parse a configuration document into validated parameters.
///
/// Thin re-export of the full config pipeline: the flat key-value format
/// (and the scenario presets) are defined in [`crate::config`].
pub fn load_params(config_text: &str) -> Result<PhysicalParams> {
    let cfg = crate::config::RunConfig::from_toml(config_text)?;
    Ok(cfg.resolve()?.params)
}
