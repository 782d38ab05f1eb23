//! Run configuration: a flat key-value document with unit-suffixed keys and
//! scenario presets.
//!
//! Every numeric key carries its unit in the name (`Bz_T`, `omega_GHz`,
//! `dt_fs`, …) so a tesla-vs-millitesla or GHz-vs-rad/s slip is visible at
//! the call site. Unknown keys are rejected, and every rejection names the
//! offending key. Scenario presets pin the reference parameter values and
//! fill only the keys the document leaves unset, so any preset value can be
//! overridden explicitly.

use serde::{Deserialize, Serialize};

use crate::calibration;
use crate::error::{Error, Result};
use crate::quantities::{InitialState, OmegaConvention, PhysicalConstants, PhysicalParams};

/// Named parameter presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// No magnetic fields at all; only the dipole coupling acts.
    Free,
    /// Static fields: B_z = 5×10⁻⁴ T, gradient offsets ±3.73×10⁻⁵ T, no drive.
    Static,
    /// The static fields plus the resonant drive B_t = 0.2 T at the
    /// calibrated frequency — the configuration that realizes the π gate.
    PiGate,
    /// No preset; all field keys must be explicit.
    Custom,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::Free => "free",
            Scenario::Static => "static",
            Scenario::PiGate => "pi_gate",
            Scenario::Custom => "custom",
        }
    }
}

/// How `initial_state` may be written: a named state or eight real numbers
/// (re, im interleaved over the four basis amplitudes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialStateSpec {
    Named(String),
    Amplitudes([f64; 8]),
}

/// The configuration document, exactly as written by the user.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<Scenario>,
    pub r_nm: Option<f64>,
    #[serde(rename = "Bz_T")]
    pub bz_t: Option<f64>,
    #[serde(rename = "Bg1_T")]
    pub bg1_t: Option<f64>,
    #[serde(rename = "Bg2_T")]
    pub bg2_t: Option<f64>,
    #[serde(rename = "Bt_T")]
    pub bt_t: Option<f64>,
    #[serde(rename = "omega_GHz")]
    pub omega_ghz: Option<f64>,
    pub omega_is_angular: Option<bool>,
    pub t_end_ns: Option<f64>,
    pub dt_fs: Option<f64>,
    pub stride_ps: Option<f64>,
    pub initial_state: Option<InitialStateSpec>,
}

/// A configuration after preset expansion, unit conversion, and validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub params: PhysicalParams,
    pub scenario: Scenario,
    /// Output sampling stride, s.
    pub stride_s: f64,
}

/// Reference static-field values: B_z and the gradient offsets ±B_g.
const STATIC_BZ_T: f64 = 5e-4;
const STATIC_BG1_T: f64 = 3.73e-5;
const STATIC_BG2_T: f64 = -3.73e-5;
/// Reference drive amplitude and frequency value for the π gate.
const PI_GATE_BT_T: f64 = 0.2;
const PI_GATE_OMEGA_GHZ: f64 = 15.5;

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("configuration: {e}")))
    }

    /// Expand the scenario preset, apply defaults, convert units, validate.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let scenario = self.scenario.ok_or_else(|| {
            Error::Config(
                "scenario: required; one of \"free\", \"static\", \"pi_gate\", \"custom\"".into(),
            )
        })?;
        let doc = calibration::shipped();

        // Scenarios that pin a field to zero reject contradictory explicit
        // values instead of silently ignoring them.
        let reject_nonzero = |key: &str, value: Option<f64>, why: &str| -> Result<()> {
            match value {
                Some(v) if v != 0.0 => Err(Error::Config(format!("{key}: {why}"))),
                _ => Ok(()),
            }
        };

        let (bz, bg1, bg2, bt, omega_ghz) = match scenario {
            Scenario::Free => {
                for (key, value) in [
                    ("Bz_T", self.bz_t),
                    ("Bg1_T", self.bg1_t),
                    ("Bg2_T", self.bg2_t),
                    ("Bt_T", self.bt_t),
                ] {
                    reject_nonzero(
                        key,
                        value,
                        "the free scenario has no magnetic fields; use \"static\", \
                         \"pi_gate\" or \"custom\"",
                    )?;
                }
                (0.0, 0.0, 0.0, 0.0, self.omega_ghz.unwrap_or(0.0))
            }
            Scenario::Static => {
                reject_nonzero(
                    "Bt_T",
                    self.bt_t,
                    "the static scenario has no drive; use \"pi_gate\" or \"custom\"",
                )?;
                (
                    self.bz_t.unwrap_or(STATIC_BZ_T),
                    self.bg1_t.unwrap_or(STATIC_BG1_T),
                    self.bg2_t.unwrap_or(STATIC_BG2_T),
                    0.0,
                    self.omega_ghz.unwrap_or(0.0),
                )
            }
            Scenario::PiGate => (
                self.bz_t.unwrap_or(STATIC_BZ_T),
                self.bg1_t.unwrap_or(STATIC_BG1_T),
                self.bg2_t.unwrap_or(STATIC_BG2_T),
                self.bt_t.unwrap_or(PI_GATE_BT_T),
                self.omega_ghz.unwrap_or(PI_GATE_OMEGA_GHZ),
            ),
            Scenario::Custom => {
                let mut missing = Vec::new();
                for (key, value) in [
                    ("r_nm", self.r_nm),
                    ("Bz_T", self.bz_t),
                    ("Bg1_T", self.bg1_t),
                    ("Bg2_T", self.bg2_t),
                    ("Bt_T", self.bt_t),
                ] {
                    if value.is_none() {
                        missing.push(key);
                    }
                }
                if !missing.is_empty() {
                    return Err(Error::Config(format!(
                        "custom scenario requires every field key explicit; missing: {}",
                        missing.join(", ")
                    )));
                }
                let bt = self.bt_t.unwrap();
                if bt != 0.0 && self.omega_ghz.is_none() {
                    return Err(Error::Config(
                        "omega_GHz: required when Bt_T is nonzero".into(),
                    ));
                }
                (
                    self.bz_t.unwrap(),
                    self.bg1_t.unwrap(),
                    self.bg2_t.unwrap(),
                    bt,
                    self.omega_ghz.unwrap_or(0.0),
                )
            }
        };

        let convention = match self.omega_is_angular {
            Some(true) => OmegaConvention::Angular,
            Some(false) => OmegaConvention::Ordinary,
            None => doc.omega_convention,
        };
        let initial_state = match &self.initial_state {
            None => InitialState::PlusPlus,
            Some(InitialStateSpec::Named(name)) => match name.as_str() {
                "++" => InitialState::PlusPlus,
                "00" => InitialState::Basis00,
                other => {
                    return Err(Error::Config(format!(
                        "initial_state: unknown name {other:?}; use \"++\", \"00\", \
                         or eight amplitude components"
                    )))
                }
            },
            Some(InitialStateSpec::Amplitudes(raw)) => InitialState::custom(*raw)?,
        };

        let stride_ps = self.stride_ps.unwrap_or(1.0);
        if !(stride_ps > 0.0) || !stride_ps.is_finite() {
            return Err(Error::Config(format!(
                "stride_ps: must be positive and finite, got {stride_ps}"
            )));
        }

        let params = PhysicalParams {
            constants: PhysicalConstants::codata(),
            r_m: self.r_nm.unwrap_or(doc.r_nm) * 1e-9,
            b_z_t: bz,
            b_g1_t: bg1,
            b_g2_t: bg2,
            b_t_t: bt,
            omega_rad_s: convention.ghz_to_rad_s(omega_ghz),
            omega_input_convention: convention,
            t_end_s: self.t_end_ns.unwrap_or(20.0) * 1e-9,
            dt_s: self.dt_fs.unwrap_or(10.0) * 1e-15,
            initial_state,
        };
        params.validate()?;

        Ok(ResolvedConfig {
            params,
            scenario,
            stride_s: stride_ps * 1e-12,
        })
    }
}
