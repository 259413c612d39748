//! Problem-file parsing, validation and conversion with field provenance.
//!
//! A problem is one JSON document with named parts; complex entries are
//! [re, im] pairs, matrices are row-major nested arrays:
//!
//! ```json
//! {
//!   "a":    [[[1,0],[0,0]], [[0,0],[-1,0]]],
//!   "b":    null,
//!   "pre":  [[0.7071,0],[0.7071,0]],
//!   "post": [[0.8944,0],[-0.4472,0]],
//!   "basis": null,
//!   "g": 0.01,
//!   "meter": {"n_grid": 512, "half_width": 10.0, "sigma": 1.0, "k0": 0.0, "x0": 0.0},
//!   "scan": {"post_end": [[1,0],[0,0]], "steps": 41}
//! }
//! ```

use std::path::Path;

use serde::Deserialize;

use weakval::hilbert::{Observable, State};
use weakval::meter::MeterConfig;
use weakval::weakvalue::PpsEnsemble;
use weakval::C64;

use crate::{AppError, AppResult};

type RawState = Vec<[f64; 2]>;
type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
struct RawScan {
    post_end: RawState,
    steps: Option<usize>,
}

#[derive(Deserialize)]
struct RawProblem {
    a: Option<RawMatrix>,
    b: Option<RawMatrix>,
    pre: Option<RawState>,
    post: Option<RawState>,
    basis: Option<Vec<RawState>>,
    g: Option<f64>,
    meter: Option<MeterConfig>,
    scan: Option<RawScan>,
}

pub struct Problem {
    raw: RawProblem,
    path: String,
}

impl Problem {
    pub fn load(path: &Path) -> AppResult<Problem> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Validation(format!("{shown}: cannot read: {e}")))?;
        let raw: RawProblem = serde_json::from_str(&text)
            .map_err(|e| AppError::Validation(format!("{shown}: parse error: {e}")))?;
        Ok(Problem { raw, path: shown })
    }

    fn field_err(&self, field: &str, msg: impl std::fmt::Display) -> AppError {
        AppError::Validation(format!("{}: field '{field}': {msg}", self.path))
    }

    fn state_from_raw(&self, field: &str, raw: &RawState) -> AppResult<State> {
        let amps: Vec<C64> = raw.iter().map(|&[re, im]| C64::new(re, im)).collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            eprintln!(
                "warning: {}: field '{field}': norm {norm} deviates from 1, auto-normalizing",
                self.path
            );
        }
        State::new(amps).map_err(|e| self.field_err(field, e))
    }

    fn observable_from_raw(&self, field: &str, raw: &RawMatrix) -> AppResult<Observable> {
        let dim = raw.len();
        for (i, row) in raw.iter().enumerate() {
            if row.len() != dim {
                return Err(self.field_err(
                    field,
                    format!(
                        "matrix must be square: row {i} has {} entries, expected {dim}",
                        row.len()
                    ),
                ));
            }
        }
        let entries: Vec<C64> = raw
            .iter()
            .flat_map(|row| row.iter().map(|&[re, im]| C64::new(re, im)))
            .collect();
        Observable::from_row_major(dim, entries).map_err(|e| self.field_err(field, e))
    }

    pub fn observable_a(&self) -> AppResult<Observable> {
        let raw = self
            .raw
            .a
            .as_ref()
            .ok_or_else(|| self.field_err("a", "missing"))?;
        self.observable_from_raw("a", raw)
    }

    pub fn observable_b(&self) -> AppResult<Observable> {
        let raw = self
            .raw
            .b
            .as_ref()
            .ok_or_else(|| self.field_err("b", "missing"))?;
        self.observable_from_raw("b", raw)
    }

    pub fn pre_state(&self) -> AppResult<State> {
        let raw = self
            .raw
            .pre
            .as_ref()
            .ok_or_else(|| self.field_err("pre", "missing"))?;
        self.state_from_raw("pre", raw)
    }

    pub fn post_state(&self) -> AppResult<State> {
        let raw = self
            .raw
            .post
            .as_ref()
            .ok_or_else(|| self.field_err("post", "missing"))?;
        self.state_from_raw("post", raw)
    }

    pub fn ensemble(&self, threshold_override: Option<f64>) -> AppResult<PpsEnsemble> {
        let pre = self.pre_state()?;
        let post = self.post_state()?;
        let e = match threshold_override {
            Some(threshold) => PpsEnsemble::with_threshold(pre, post, threshold),
            None => PpsEnsemble::new(pre, post),
        }
        .map_err(|e| self.field_err("pre/post", e))?;
        if e.poorly_conditioned() {
            eprintln!(
                "warning: {}: |<post|pre>| = {:e} is below 1e-6; the anomalous part amplifies \
                 rounding as 1/|overlap|",
                self.path,
                e.overlap().norm()
            );
        }
        Ok(e)
    }

    /// The post-selection basis for resolution-of-identity averages;
    /// defaults to the eigenbasis of `a` when the file names none.
    pub fn basis_or_eigenbasis(&self, a: &Observable) -> AppResult<Vec<State>> {
        match &self.raw.basis {
            Some(raws) => raws
                .iter()
                .enumerate()
                .map(|(k, raw)| self.state_from_raw(&format!("basis[{k}]"), raw))
                .collect(),
            None => Ok((0..a.dim())
                .map(|k| {
                    State::new(a.eigenvectors().column(k).iter().copied().collect())
                        .expect("eigenvector columns are unit norm")
                })
                .collect()),
        }
    }

    pub fn meter_config(&self) -> MeterConfig {
        self.raw.meter.unwrap_or_default()
    }

    pub fn coupling(&self) -> Option<f64> {
        self.raw.g
    }

    /// End state and step count of the post-selection sweep.
    pub fn scan_spec(&self) -> AppResult<(State, usize)> {
        let scan = self
            .raw
            .scan
            .as_ref()
            .ok_or_else(|| self.field_err("scan", "missing"))?;
        let end = self.state_from_raw("scan.post_end", &scan.post_end)?;
        let steps = scan.steps.unwrap_or(41);
        if steps < 2 {
            return Err(self.field_err("scan.steps", "need at least 2 points"));
        }
        Ok((end, steps))
    }
}

/// Maps a computation-stage failure onto the exit-code taxonomy: violated
/// inequalities are their own exit code, everything else is bad input.
pub fn computation_error(e: weakval::Error) -> AppError {
    match e {
        weakval::Error::InequalityViolation { .. } => AppError::Inequality(e.to_string()),
        other => AppError::Validation(other.to_string()),
    }
}
