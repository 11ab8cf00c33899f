use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::caratheodory::{extremal_h, ClassParams};
use crate::error::{Error, Result};
use crate::series::{order_for_budget, DEFAULT_GRID, DEFAULT_ORDER};
use crate::transform::{apply_phi, lower_bound_terms, radius_closed_form, transformed_lower_bound, TransformSpec};

pub const SCAN_MAX_RADIUS: f64 = 0.95;
const SCAN_BUDGET: f64 = 1e-10;

/// One radius of a sharpness scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub r: f64,
    /// Lower bound for `Re φ(h)` on `|z| = r` over the class.
    pub bound: f64,
    /// `Re φ(H)(r)` for the extremal function.
    pub value: f64,
    pub gap: f64,
    /// Minimum of `Re φ(H)` over the whole circle `|z| = r`.
    pub min_re: f64,
    /// Whether `r < r(k, β)`.
    pub inside: bool,
}

/// Bound, extremal value, their gap and the circle minimum of `Re φ(H)` at
/// each radius. Series orders are raised so truncation stays below `1e-10`.
pub fn sharpness_scan(params: &ClassParams, spec: &TransformSpec, radii: &[f64]) -> Result<Vec<ScanRow>> {
    if let Some(&bad) = radii.iter().find(|r| !(0.0..=SCAN_MAX_RADIUS).contains(*r)) {
        return Err(Error::InvalidRadius(bad));
    }
    let top = radii.iter().copied().fold(0.0, f64::max);
    let order = order_for_budget(params.coeff_bound(), top, SCAN_BUDGET, DEFAULT_ORDER);
    let g = apply_phi(spec, &extremal_h(params, order))?;
    let radius = radius_closed_form(params);
    radii
        .iter()
        .map(|&r| {
            let bound = transformed_lower_bound(spec, params, r, lower_bound_terms(params, r, 1e-12));
            let value = g.eval(Complex64::new(r, 0.0)).re;
            Ok(ScanRow {
                r,
                bound,
                value,
                gap: (value - bound).abs(),
                min_re: g.min_re_on_circle(r, DEFAULT_GRID)?,
                inside: r < radius,
            })
        })
        .collect()
}
