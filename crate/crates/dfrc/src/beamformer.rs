//! The hybrid beamformer result type, its feasibility diagnostics, and the
//! JSON interchange format shared by the solvers and the experiment harness.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{check_finite, frob, CMat};

/// RF-chain-to-antenna mapping of the analog beamformer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    FullyConnected,
    PartiallyConnected,
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::FullyConnected => write!(f, "full"),
            Structure::PartiallyConnected => write!(f, "partial"),
        }
    }
}

impl std::str::FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "fully_connected" => Ok(Structure::FullyConnected),
            "partial" | "partially_connected" => Ok(Structure::PartiallyConnected),
            other => Err(Error::Config(format!(
                "unknown structure '{other}' (expected 'full' or 'partial')"
            ))),
        }
    }
}

/// Tolerances for the feasibility invariants.
pub const UNIT_MODULUS_ATOL: f64 = 1e-10;
pub const POWER_ATOL: f64 = 1e-8;

/// An analog/digital precoder pair `(F_RF, F_BB)`.
///
/// Fully connected: every `F_RF` entry unit modulus and
/// `||F_RF F_BB||_F^2 = N_s`. Partially connected: `F_RF` is zero off the
/// block diagonal, unit-modulus on it, and `||F_BB||_F^2 = N_s N_RF / N_t`
/// (which forces the same product power).
#[derive(Debug, Clone, PartialEq)]
pub struct HybridBeamformer {
    pub structure: Structure,
    pub f_rf: CMat,
    pub f_bb: CMat,
}

/// One violated feasibility invariant, with the worst offender located.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "constraint", rename_all = "snake_case")]
pub enum Violation {
    UnitModulus { row: usize, col: usize, excess: f64 },
    OffBlockNonzero { row: usize, col: usize, magnitude: f64 },
    ProductPower { actual: f64, expected: f64, ratio: f64 },
    DigitalPower { actual: f64, expected: f64, ratio: f64 },
    NonFinite { row: usize, col: usize, which: String },
    BlockLayout { detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnitModulus { row, col, excess } => write!(
                f,
                "F_RF({row}, {col}) deviates from unit modulus by {excess:.3e}"
            ),
            Violation::OffBlockNonzero { row, col, magnitude } => write!(
                f,
                "F_RF({row}, {col}) is off-block but has magnitude {magnitude:.3e}"
            ),
            Violation::ProductPower { actual, expected, ratio } => write!(
                f,
                "||F_RF F_BB||_F^2 = {actual:.6e}, expected {expected:.6e} (ratio {ratio:.6})"
            ),
            Violation::DigitalPower { actual, expected, ratio } => write!(
                f,
                "||F_BB||_F^2 = {actual:.6e}, expected {expected:.6e} (ratio {ratio:.6})"
            ),
            Violation::NonFinite { row, col, which } => {
                write!(f, "{which}({row}, {col}) is not finite")
            }
            Violation::BlockLayout { detail } => write!(f, "{detail}"),
        }
    }
}

/// Outcome of [`HybridBeamformer::validate`]: empty iff feasible.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "feasible")
        } else {
            for (i, v) in self.violations.iter().enumerate() {
                if i > 0 {
                    writeln!(f)?;
                }
                write!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

impl HybridBeamformer {
    pub fn n_tx(&self) -> usize {
        self.f_rf.nrows()
    }

    pub fn n_rf(&self) -> usize {
        self.f_rf.ncols()
    }

    pub fn n_streams(&self) -> usize {
        self.f_bb.ncols()
    }

    /// `F = F_RF F_BB`; errors with the diagnostic report if infeasible.
    pub fn effective_precoder(&self) -> Result<CMat> {
        let report = self.validate();
        if !report.is_feasible() {
            return Err(Error::Infeasible(report.to_string()));
        }
        Ok(&self.f_rf * &self.f_bb)
    }

    /// Lists every violated invariant with magnitudes; advisory, never fails.
    pub fn validate(&self) -> FeasibilityReport {
        let mut violations = Vec::new();

        for (name, m) in [("F_RF", &self.f_rf), ("F_BB", &self.f_bb)] {
            if let Some((row, col)) = crate::numerics::first_nonfinite(m) {
                violations.push(Violation::NonFinite {
                    row,
                    col,
                    which: name.to_string(),
                });
            }
        }
        if !violations.is_empty() {
            return FeasibilityReport { violations };
        }

        let n_tx = self.n_tx();
        let n_rf = self.n_rf();
        let n_s = self.n_streams() as f64;

        match self.structure {
            Structure::FullyConnected => {
                self.check_unit_modulus(|_, _| true, &mut violations);
                let actual = frob(&(&self.f_rf * &self.f_bb)).powi(2);
                push_power(&mut violations, actual, n_s, false);
            }
            Structure::PartiallyConnected => {
                if n_rf == 0 || !n_tx.is_multiple_of(n_rf) {
                    violations.push(Violation::BlockLayout {
                        detail: format!(
                            "partially-connected layout needs n_rf | n_tx, got n_tx={n_tx}, n_rf={n_rf}"
                        ),
                    });
                    return FeasibilityReport { violations };
                }
                let z = n_tx / n_rf;
                self.check_unit_modulus(|r, c| r / z == c, &mut violations);
                for r in 0..n_tx {
                    for c in 0..n_rf {
                        if r / z != c {
                            let magnitude = self.f_rf[(r, c)].norm();
                            if magnitude > 1e-12 {
                                violations.push(Violation::OffBlockNonzero {
                                    row: r,
                                    col: c,
                                    magnitude,
                                });
                            }
                        }
                    }
                }
                let expected = n_s * n_rf as f64 / n_tx as f64;
                let actual = frob(&self.f_bb).powi(2);
                push_power(&mut violations, actual, expected, true);
            }
        }
        FeasibilityReport { violations }
    }

    fn check_unit_modulus(
        &self,
        on_block: impl Fn(usize, usize) -> bool,
        violations: &mut Vec<Violation>,
    ) {
        for r in 0..self.n_tx() {
            for c in 0..self.n_rf() {
                if on_block(r, c) {
                    let excess = (self.f_rf[(r, c)].norm() - 1.0).abs();
                    if excess > UNIT_MODULUS_ATOL {
                        violations.push(Violation::UnitModulus { row: r, col: c, excess });
                    }
                }
            }
        }
    }

    /// Serializes to the interchange JSON document.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&BeamformerJson::from(self))?)
    }

    /// Parses the interchange JSON document; exact round-trip with
    /// [`Self::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BeamformerJson = serde_json::from_str(text)?;
        raw.try_into()
    }
}

fn push_power(violations: &mut Vec<Violation>, actual: f64, expected: f64, digital: bool) {
    if (actual - expected).abs() > POWER_ATOL * expected.max(1.0) {
        let ratio = actual / expected;
        violations.push(if digital {
            Violation::DigitalPower {
                actual,
                expected,
                ratio,
            }
        } else {
            Violation::ProductPower {
                actual,
                expected,
                ratio,
            }
        });
    }
}

/// Wire format: `{structure, n_tx, n_rf, n_streams, f_rf, f_bb}` with both
/// matrices as row-major `[re, im]` pair lists.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BeamformerJson {
    structure: Structure,
    n_tx: usize,
    n_rf: usize,
    n_streams: usize,
    f_rf: Vec<[f64; 2]>,
    f_bb: Vec<[f64; 2]>,
}

fn to_pairs(m: &CMat) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let e = m[(r, c)];
            out.push([e.re, e.im]);
        }
    }
    out
}

fn from_pairs(rows: usize, cols: usize, pairs: &[[f64; 2]], name: &str) -> Result<CMat> {
    if pairs.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            context: format!(
                "{name}: expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                pairs.len()
            ),
        });
    }
    let m = CMat::from_fn(rows, cols, |r, c| {
        let [re, im] = pairs[r * cols + c];
        Complex64::new(re, im)
    });
    check_finite(&m)?;
    Ok(m)
}

impl From<&HybridBeamformer> for BeamformerJson {
    fn from(b: &HybridBeamformer) -> Self {
        BeamformerJson {
            structure: b.structure,
            n_tx: b.n_tx(),
            n_rf: b.n_rf(),
            n_streams: b.n_streams(),
            f_rf: to_pairs(&b.f_rf),
            f_bb: to_pairs(&b.f_bb),
        }
    }
}

impl TryFrom<BeamformerJson> for HybridBeamformer {
    type Error = Error;

    fn try_from(raw: BeamformerJson) -> Result<Self> {
        let f_rf = from_pairs(raw.n_tx, raw.n_rf, &raw.f_rf, "f_rf")?;
        let f_bb = from_pairs(raw.n_rf, raw.n_streams, &raw.f_bb, "f_bb")?;
        Ok(HybridBeamformer {
            structure: raw.structure,
            f_rf,
            f_bb,
        })
    }
}

/// How a solver run terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    /// Stopping tolerance reached.
    Converged,
    /// Iteration cap reached first.
    IterationCap,
    /// Line search could make no further progress.
    Stalled,
}

/// Per-iteration traces and bookkeeping returned alongside a design.
///
/// `iterations` always equals `objective_trace.len()`; the trust-region
/// solver counts the final guard evaluation that stops the loop, so a run
/// that starts at a stationary point still records one entry.
#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub objective_trace: Vec<f64>,
    pub primal_residual_trace: Vec<f64>,
    pub grad_norm_trace: Vec<f64>,
    pub iterations: usize,
    pub wall_time_ms: f64,
    pub status: SolverStatus,
}
