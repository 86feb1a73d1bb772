//! Browser bindings: heights of points, Jordan decompositions and whole
//! jobs in the text format.

use pep_core::dsl::{parse_field_text, parse_job, parse_matrix_text, parse_point_text};
use pep_core::heights::{affine_height, projective_height, DEFAULT_TOLERANCE};
use pep_core::jobs;
use pep_core::matrixk::jordan_multiplicative;
use pep_core::{Field, NumberField};
use wasm_bindgen::prelude::*;

fn field(line: &str) -> Result<Field, String> {
    if line.trim().is_empty() {
        return Ok(NumberField::rationals());
    }
    parse_field_text(line).and_then(|f| f.build(pep_core::numfield::DEFAULT_PRECISION_CAP)).map_err(|e| e.to_string())
}

/// Affine and projective logarithmic heights of a tuple, one per line.
pub fn height_text(field_line: &str, point: &str) -> Result<String, String> {
    let k = field(field_line)?;
    let xs = parse_point_text(point, &k).map_err(|e| e.to_string())?;
    let a = affine_height(&xs, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
    let mut out = format!("h_aff = {:.12}", a.value());
    if xs.iter().any(|x| !x.is_zero()) {
        let p = projective_height(&xs, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
        out.push_str(&format!("\nh = {:.12}", p.value()));
    }
    Ok(out)
}

/// Semisimple and unipotent factors of an invertible matrix.
pub fn jordan_text(field_line: &str, matrix: &str) -> Result<String, String> {
    let k = field(field_line)?;
    let m = parse_matrix_text(matrix, &k).map_err(|e| e.to_string())?;
    let jd = jordan_multiplicative(&m).map_err(|e| e.to_string())?;
    Ok(format!("g_s = {}\ng_u = {}", jd.semisimple, jd.unipotent))
}

/// Run a job file and return its TSV report.
pub fn job_text(job: &str) -> Result<String, String> {
    let job = parse_job(job).map_err(|e| e.to_string())?;
    jobs::run(&job).map(|r| r.tsv).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn height(field_line: &str, point: &str) -> Result<String, JsError> {
    height_text(field_line, point).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn jordan(field_line: &str, matrix: &str) -> Result<String, JsError> {
    jordan_text(field_line, matrix).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn run_job(job: &str) -> Result<String, JsError> {
    job_text(job).map_err(|e| JsError::new(&e))
}
