//! Direct evaluation of the integral definition of `φ^j_{σ,n}`.
//!
//! This path never touches the coefficient multipliers: each level is an
//! adaptive Gauss–Kronrod integral along the radial segment `[0, z]`, and the
//! innermost level evaluates `h` itself.

use std::cell::Cell;

use num_complex::Complex64;

use super::TransformSpec;
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// Absolute error target for the outermost level; each deeper level is ten
/// times tighter so its noise stays below the outer error estimate.
pub const LEVEL_TOL: f64 = 1e-10;
const MAX_INTERVALS: usize = 400;
/// Lower bound for `q d` in the substitution `u = s^q` used for non-integer exponents.
const SMOOTH_POWER: f64 = 7.0;

// 15-point Kronrod abscissae on [-1, 1] (non-negative half) and weights;
// the odd-indexed abscissae are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub err_est: f64,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

fn kronrod_panel(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        err: ((kronrod - gauss) * half).norm(),
    }
}

/// Globally adaptive G7–K15 integration of a complex integrand over `[a, b]`:
/// the panel with the largest error estimate is bisected until the summed
/// estimate drops below `tol`.
pub fn integrate_adaptive(f: impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    let mut panels = vec![kronrod_panel(&f, a, b)];
    loop {
        let err: f64 = panels.iter().map(|p| p.err).sum();
        if err <= tol {
            return Ok(QuadratureResult {
                value: panels.iter().map(|p| p.value).sum(),
                err_est: err,
            });
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature { achieved: err, target: tol });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let Panel { a, b, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (a + b);
        panels.push(kronrod_panel(&f, a, mid));
        panels.push(kronrod_panel(&f, mid, b));
    }
}

fn level_value(spec: &TransformSpec, h: &TruncatedSeries, m: u32, z: Complex64, tol: f64) -> Result<QuadratureResult> {
    if m == 0 {
        return Ok(QuadratureResult {
            value: h.eval(z),
            err_est: 0.0,
        });
    }
    let d = spec.level_exponent(m);
    let inner_err = Cell::new(0.0f64);
    let failure: Cell<Option<Error>> = Cell::new(None);
    let inner = |w: f64| -> Complex64 {
        match level_value(spec, h, m - 1, z * w, 0.1 * tol) {
            Ok(r) => {
                inner_err.set(inner_err.get().max(r.err_est));
                r.value
            }
            Err(e) => {
                failure.set(Some(e));
                Complex64::new(0.0, 0.0)
            }
        }
    };
    // d u^{d-1} du integrates to 1 on [0, 1]. For integer d the weight is a
    // polynomial. Otherwise substitute u = s^q with integer q and q d - 1 >= 6,
    // so the weight d q s^{qd-1} is smooth enough at 0 for Gauss–Kronrod.
    let outer = if d.fract() == 0.0 {
        integrate_adaptive(|u| inner(u) * (d * u.powi(d as i32 - 1)), 0.0, 1.0, tol)?
    } else {
        let q = (SMOOTH_POWER / d).ceil().max(1.0);
        let qi = q as i32;
        integrate_adaptive(|s| inner(s.powi(qi)) * (d * q * s.powf(q * d - 1.0)), 0.0, 1.0, tol)?
    };
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(QuadratureResult {
        value: outer.value,
        err_est: outer.err_est + inner_err.get(),
    })
}

/// `φ^j_{σ,n}(h)(z)` from the nested integral definition, `n >= 1`.
pub fn phi_by_quadrature(spec: &TransformSpec, h: &TruncatedSeries, z: Complex64) -> Result<QuadratureResult> {
    if spec.n == 0 {
        return Err(Error::LevelZero);
    }
    let modulus = z.norm();
    if !(modulus < 1.0) {
        return Err(Error::OutsideDisk(modulus));
    }
    level_value(spec, h, spec.n, z, LEVEL_TOL)
}
