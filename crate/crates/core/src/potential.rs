//! Confining potentials in units where hbar = 1 and 2*mu = 1, so the
//! kinetic operator is `-d^2/dx^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// V = 0 between infinite walls.
    Box,
    /// V = x^2.
    Oscillator,
    /// V = sum_k c_k x^k, coefficients in ascending powers.
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// The physical domain is the grid interval itself.
    Finite,
    /// A whole-line problem cut off at `+-truncation_halfwidth`.
    TruncatedLine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    #[serde(default)]
    pub coefficients: Vec<f64>,
    pub domain_kind: DomainKind,
    #[serde(default)]
    pub truncation_halfwidth: Option<f64>,
}

/// Default cut-off for whole-line problems, in oscillator lengths.
pub const DEFAULT_HALFWIDTH: f64 = 8.0;

impl PotentialSpec {
    pub fn particle_in_box() -> Self {
        Self {
            kind: PotentialKind::Box,
            coefficients: Vec::new(),
            domain_kind: DomainKind::Finite,
            truncation_halfwidth: None,
        }
    }

    pub fn oscillator(halfwidth: f64) -> Self {
        Self {
            kind: PotentialKind::Oscillator,
            coefficients: Vec::new(),
            domain_kind: DomainKind::TruncatedLine,
            truncation_halfwidth: Some(halfwidth),
        }
    }

    pub fn polynomial(coefficients: Vec<f64>, halfwidth: f64) -> Result<Self> {
        let spec = Self {
            kind: PotentialKind::Polynomial,
            coefficients,
            domain_kind: DomainKind::TruncatedLine,
            truncation_halfwidth: Some(halfwidth),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PotentialKind::Box | PotentialKind::Oscillator => {
                if !self.coefficients.is_empty() {
                    return Err(Error::InvalidArgument(format!(
                        "{:?} takes no coefficients",
                        self.kind
                    )));
                }
            }
            PotentialKind::Polynomial => {
                let c = &self.coefficients;
                let degree = c.len().checked_sub(1).ok_or_else(|| {
                    Error::InvalidArgument("polynomial needs coefficients".into())
                })?;
                if degree == 0 || degree % 2 != 0 || c[degree] <= 0.0 {
                    return Err(Error::InvalidArgument(
                        "polynomial must have even degree and a positive leading coefficient"
                            .into(),
                    ));
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument("non-finite coefficient".into()));
                }
            }
        }
        if self.domain_kind == DomainKind::TruncatedLine {
            match self.truncation_halfwidth {
                Some(w) if w > 0.0 && w.is_finite() => {}
                _ => {
                    return Err(Error::InvalidArgument(
                        "truncated line needs a positive halfwidth".into(),
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.kind {
            PotentialKind::Box => 0.0,
            PotentialKind::Oscillator => x * x,
            PotentialKind::Polynomial => self
                .coefficients
                .iter()
                .rev()
                .fold(0.0, |acc, &c| acc * x + c),
        }
    }

    pub fn halfwidth(&self) -> f64 {
        self.truncation_halfwidth.unwrap_or(DEFAULT_HALFWIDTH)
    }
}
