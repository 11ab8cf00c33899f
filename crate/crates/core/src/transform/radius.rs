//! Numerical positivity radius by bisection.
//!
//! `Re h` is harmonic, so `m(r) = min_{|z|=r} Re h(z)` is non-increasing in
//! `r` and the set where it is positive is an interval `[0, r*)`. Bisection on
//! the sign of `m` brackets `r*`.

use serde::{Deserialize, Serialize};

use super::bounds::radius_closed_form;
use crate::caratheodory::ClassParams;
use crate::error::{Error, Result};
use crate::series::{order_for_budget, TruncatedSeries, DEFAULT_GRID, MAX_ORDER};

/// Largest radius probed; positivity up to here is reported as radius 1.
pub const RADIUS_CAP: f64 = 0.999;
const START_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub closed_form: Option<f64>,
    pub lo: f64,
    pub hi: f64,
    pub discrepancy: Option<f64>,
}

impl RadiusReport {
    fn new(lo: f64, hi: f64, params: Option<&ClassParams>) -> Self {
        let closed_form = params.map(radius_closed_form);
        Self {
            closed_form,
            lo,
            hi,
            discrepancy: closed_form.map(|r| (r - lo).abs().max((r - hi).abs())),
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// One circle probe: grid minimum of `Re h` and the truncation error bound.
struct Probe {
    min_re: f64,
    err: f64,
}

fn bisect(mut probe: impl FnMut(f64) -> Result<Probe>, tol: f64) -> Result<(f64, f64)> {
    let cap = probe(RADIUS_CAP)?;
    if cap.min_re > 0.0 {
        if cap.min_re <= cap.err {
            return Err(Error::TruncationBudget {
                radius: RADIUS_CAP,
                err: cap.err,
                tol: cap.min_re,
            });
        }
        return Ok((1.0, 1.0));
    }
    let (mut lo, mut hi) = (0.0, RADIUS_CAP);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if probe(mid)?.min_re > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let at_hi = probe(hi)?;
    if at_hi.err > tol {
        return Err(Error::TruncationBudget {
            radius: hi,
            err: at_hi.err,
            tol,
        });
    }
    Ok((lo, hi))
}

/// Brackets the positivity radius of a fixed series to width `tol`.
///
/// Errors when the tail bound of `h` cannot certify the answer: at the
/// returned `hi` the truncation error must not exceed `tol`, and a
/// radius-1 verdict needs the minimum at [`RADIUS_CAP`] to dominate the error.
pub fn radius_numeric(h: &TruncatedSeries, params: Option<&ClassParams>, tol: f64) -> Result<RadiusReport> {
    h.require_unit()?;
    let (lo, hi) = bisect(
        |r| {
            Ok(Probe {
                min_re: h.min_re_on_circle(r, DEFAULT_GRID)?,
                err: h.circle_err(r),
            })
        },
        tol,
    )?;
    Ok(RadiusReport::new(lo, hi, params))
}

/// Like [`radius_numeric`], but the series is regenerated by `source` at an
/// order large enough for each probe radius: interior probes get truncation
/// error below `tol / 10`, and the probe at [`RADIUS_CAP`] doubles the order
/// until the sign of the minimum is certified.
pub fn radius_numeric_adaptive(
    source: impl Fn(usize) -> Result<TruncatedSeries>,
    params: Option<&ClassParams>,
    tol: f64,
) -> Result<RadiusReport> {
    let base = source(START_ORDER)?;
    base.require_unit()?;
    let Some(rate) = base.tail_bound() else {
        return Err(Error::InvalidTailBound(f64::INFINITY));
    };
    let probe = |r: f64| -> Result<Probe> {
        if r == RADIUS_CAP {
            let mut order = START_ORDER;
            loop {
                let h = source(order)?;
                let p = Probe {
                    min_re: h.min_re_on_circle(r, DEFAULT_GRID)?,
                    err: h.circle_err(r),
                };
                if p.min_re.abs() > p.err || order >= MAX_ORDER {
                    return Ok(p);
                }
                order *= 2;
            }
        }
        let h = source(order_for_budget(rate, r, 0.1 * tol, START_ORDER))?;
        Ok(Probe {
            min_re: h.min_re_on_circle(r, DEFAULT_GRID)?,
            err: h.circle_err(r),
        })
    };
    let (lo, hi) = bisect(probe, tol)?;
    Ok(RadiusReport::new(lo, hi, params))
}
