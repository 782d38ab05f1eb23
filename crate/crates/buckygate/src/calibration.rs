//! The calibration document: a small versioned record of the fitted
//! inter-spin distance and frequency convention.
//!
//! The physical setup never pins the inter-spin distance r, and the drive
//! frequency "15.5 GHz" could be angular or ordinary; both are recovered
//! empirically by [`crate::explore::calibrate_r`] against the reference
//! gate time. The winning pair is frozen into `calibration.toml`, shipped
//! with the crate, and read back as the default for every scenario preset —
//! so reproduction tests are honest about where these two numbers came from.

use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantities::OmegaConvention;

/// Frozen calibration record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationDoc {
    /// Calibrated inter-spin distance, nm.
    pub r_nm: f64,
    /// How the configured GHz value is to be interpreted.
    pub omega_convention: OmegaConvention,
    /// Gate time the calibrated parameters actually achieve, ns.
    pub achieved_tau_ns: f64,
    /// Version of the tool that produced the document.
    pub tool_version: String,
}

impl CalibrationDoc {
    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: CalibrationDoc = toml::from_str(text)
            .map_err(|e| Error::Config(format!("calibration document: {e}")))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("calibration document serializes to TOML")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn store(&self, path: &Path) -> Result<()> {
        self.validate()?;
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_nm > 0.0) || !self.r_nm.is_finite() {
            return Err(Error::Config(format!(
                "calibration document: r_nm must be positive and finite, got {}",
                self.r_nm
            )));
        }
        if !(self.achieved_tau_ns > 0.0) || !self.achieved_tau_ns.is_finite() {
            return Err(Error::Config(format!(
                "calibration document: achieved_tau_ns must be positive and finite, got {}",
                self.achieved_tau_ns
            )));
        }
        Ok(())
    }
}

/// The calibration shipped with the crate, embedded at compile time.
pub fn shipped() -> &'static CalibrationDoc {
    static DOC: OnceLock<CalibrationDoc> = OnceLock::new();
    DOC.get_or_init(|| {
        CalibrationDoc::from_toml(include_str!("../calibration.toml"))
            .expect("shipped calibration.toml is valid")
    })
}
