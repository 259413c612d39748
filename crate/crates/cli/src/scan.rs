//! Post-selection sweeps along a great-circle path.
//!
//! The path runs from the problem's `post` state to `scan.post_end` along
//! the geodesic of the state sphere, which sweeps the overlap |⟨φ|ψ⟩|
//! smoothly — including into the near-orthogonal regime where the anomalous
//! part blows up as 1/|overlap|.

use std::path::Path;

use serde_json::json;

use weakval::hilbert::{inner, State};
use weakval::weakvalue::{anomaly_bounds, decompose_weak_value, PpsEnsemble};
use weakval::C64;

use crate::problem::{computation_error, Problem};
use crate::{AppError, AppResult, OutputFormat};

pub fn run(input: &Path, threshold: Option<f64>, format: OutputFormat) -> AppResult<()> {
    let p = Problem::load(input)?;
    let a = p.observable_a()?;
    let psi = p.pre_state()?;
    let phi_start = p.post_state()?;
    let (phi_end, steps) = p.scan_spec()?;

    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let t = i as f64 / (steps - 1) as f64;
        let phi = great_circle(&phi_start, &phi_end, t)?;
        let ensemble = match threshold {
            Some(limit) => PpsEnsemble::with_threshold(psi.clone(), phi, limit),
            None => PpsEnsemble::new(psi.clone(), phi),
        };
        let e = match ensemble {
            Ok(e) => e,
            Err(err) => {
                eprintln!("warning: t = {t}: point skipped: {err}");
                continue;
            }
        };
        let report = decompose_weak_value(&a, &e).map_err(computation_error)?;
        let bounds = anomaly_bounds(&a, &e).map_err(computation_error)?;
        rows.push((t, e.overlap().norm(), report, bounds));
    }

    match format {
        OutputFormat::Csv => {
            println!("t,overlap_abs,weak_re,weak_im,average,delta_a,anomaly_modulus,lower,upper");
            for (t, overlap_abs, report, bounds) in &rows {
                println!(
                    "{},{},{},{},{},{},{},{},{}",
                    t,
                    overlap_abs,
                    report.weak_value.re,
                    report.weak_value.im,
                    report.average,
                    report.delta_a,
                    bounds.anomaly_modulus,
                    bounds.lower,
                    bounds.upper
                );
            }
        }
        OutputFormat::Json => {
            let docs: Vec<_> = rows
                .iter()
                .map(|(t, overlap_abs, report, bounds)| {
                    json!({
                        "t": t,
                        "overlap_abs": overlap_abs,
                        "weak_value": [report.weak_value.re, report.weak_value.im],
                        "average": report.average,
                        "delta_a": report.delta_a,
                        "anomaly_modulus": bounds.anomaly_modulus,
                        "lower": bounds.lower,
                        "upper": bounds.upper,
                    })
                })
                .collect();
            println!("{}", serde_json::Value::Array(docs));
        }
    }
    Ok(())
}

/// Geodesic interpolation on the state sphere; t = 0 gives `from`, t = 1
/// gives `to` up to the global phase that aligns the pair.
fn great_circle(from: &State, to: &State, t: f64) -> AppResult<State> {
    let overlap =
        inner(from, to).map_err(|e| AppError::Validation(format!("scan endpoints: {e}")))?;
    let cos_omega = overlap.norm().min(1.0);
    let omega = cos_omega.acos();
    if omega < 1e-9 {
        return Ok(from.clone());
    }
    // Align `to` so its overlap with `from` is real positive; for (near-)
    // orthogonal endpoints any alignment phase works.
    let aligned_phase = if overlap.norm() > 1e-14 {
        (overlap / C64::new(overlap.norm(), 0.0)).conj()
    } else {
        C64::new(1.0, 0.0)
    };
    let s = omega.sin();
    let v = from.amplitudes() * C64::new(((1.0 - t) * omega).sin() / s, 0.0)
        + to.amplitudes() * (aligned_phase * ((t * omega).sin() / s));
    State::from_vector(v).map_err(|e| AppError::Validation(format!("scan point t = {t}: {e}")))
}
