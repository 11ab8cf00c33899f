//! Truncated complex power series about the origin.
//!
//! A [`TruncatedSeries`] stores `c_0 ..= c_N` and, optionally, a bound `B` on
//! every dropped coefficient (`|c_l| <= B` for `l > N`). The bound turns
//! Horner evaluation inside the unit disk into an enclosure: the discarded
//! tail contributes at most `B |z|^{N+1} / (1 - |z|)`.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 64;
pub const DEFAULT_GRID: usize = 4096;
/// Largest order [`order_for_budget`] will ever ask for.
pub const MAX_ORDER: usize = 1 << 17;
/// Slack allowed on a constant term that must equal 0 or 1.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
    tail_bound: Option<f64>,
}

/// Value of a truncated series at a point together with a bound on the
/// contribution of the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub err: f64,
}

impl TruncatedSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(Self {
            coeffs,
            tail_bound: None,
        })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// The constant `c` padded with zeros up to `order`. Its tail is exactly zero.
    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = c;
        Self {
            coeffs,
            tail_bound: Some(0.0),
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Complex64::new(1.0, 0.0), order)
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(Complex64::new(0.0, 0.0), order)
    }

    /// `sum_l z^l` truncated at `order`, with tail bound 1.
    pub fn geometric(order: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(1.0, 0.0); order + 1],
            tail_bound: Some(1.0),
        }
    }

    pub fn with_tail_bound(mut self, bound: f64) -> Result<Self> {
        if !bound.is_finite() || bound < 0.0 {
            return Err(Error::InvalidTailBound(bound));
        }
        self.tail_bound = Some(bound);
        Ok(self)
    }

    pub fn without_tail_bound(mut self) -> Self {
        self.tail_bound = None;
        self
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, l: usize) -> Complex64 {
        self.coeffs.get(l).copied().unwrap_or_default()
    }

    pub fn tail_bound(&self) -> Option<f64> {
        self.tail_bound
    }

    /// Drops coefficients above `order`. The tail bound, if any, is widened to
    /// cover the dropped coefficients.
    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        let tail_bound = self.tail_bound.map(|b| {
            self.coeffs[order + 1..]
                .iter()
                .map(|c| c.norm())
                .fold(b, f64::max)
        });
        Self {
            coeffs: self.coeffs[..=order].to_vec(),
            tail_bound,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            tail_bound: self.tail_bound.map(|b| b * factor.abs()),
        }
    }

    /// Series of `a(-z)`.
    pub fn reflect(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(l, &c)| if l % 2 == 1 { -c } else { c })
                .collect(),
            tail_bound: self.tail_bound,
        }
    }

    /// Multiplies coefficient `l` by `multiplier(l)`. The tail bound is dropped;
    /// callers that know `|multiplier| <= 1` restore it.
    pub fn map_multipliers(&self, multiplier: impl Fn(usize) -> f64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(l, &c)| c * multiplier(l))
                .collect(),
            tail_bound: None,
        }
    }

    /// Largest coefficient difference over the common order.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn check_constant(&self, expected: f64) -> Result<()> {
        let c0 = self.coeffs[0];
        if (c0 - expected).norm() > UNIT_TOL {
            return Err(Error::ConstantTerm {
                expected,
                found: format!("{c0}"),
            });
        }
        Ok(())
    }

    /// Errors unless the constant term is 1 (within [`UNIT_TOL`]).
    pub fn require_unit(&self) -> Result<()> {
        self.check_constant(1.0)
    }

    /// Logarithm of a series with constant term 1, from `l L_l = l a_l - sum_{m<l} m L_m a_{l-m}`.
    pub fn log_unit(&self) -> Result<Self> {
        self.require_unit()?;
        let a = &self.coeffs;
        let n = self.order();
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        for l in 1..=n {
            let mut acc = a[l] * l as f64;
            for m in 1..l {
                acc -= out[m] * a[l - m] * m as f64;
            }
            out[l] = acc / l as f64;
        }
        Ok(Self {
            coeffs: out,
            tail_bound: None,
        })
    }

    /// Exponential of a series with constant term 0, from `l E_l = sum_{m<=l} m A_m E_{l-m}`.
    pub fn exp_unit(&self) -> Result<Self> {
        self.check_constant(0.0)?;
        let a = &self.coeffs;
        let n = self.order();
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        out[0] = Complex64::new(1.0, 0.0);
        for l in 1..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 1..=l {
                acc += a[m] * out[l - m] * m as f64;
            }
            out[l] = acc / l as f64;
        }
        Ok(Self {
            coeffs: out,
            tail_bound: None,
        })
    }

    /// Principal branch of `a^alpha` for a series with constant term 1.
    pub fn pow_real(&self, alpha: f64) -> Result<Self> {
        self.require_unit()?;
        if alpha == 1.0 {
            return Ok(self.clone());
        }
        if alpha == 0.0 {
            return Ok(Self::one(self.order()));
        }
        self.log_unit()?.scale(alpha).exp_unit()
    }

    /// `z a'(z)`: coefficient `l` becomes `l c_l`.
    pub fn z_derivative(&self) -> Self {
        self.map_multipliers(|l| l as f64)
    }

    /// Horner evaluation of the stored polynomial, ignoring the tail.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    fn tail_err(&self, modulus: f64) -> f64 {
        match self.tail_bound {
            Some(0.0) => 0.0,
            Some(b) => b * modulus.powi(self.order() as i32 + 1) / (1.0 - modulus),
            None => f64::INFINITY,
        }
    }

    /// Value at `z` plus the geometric tail bound `B |z|^{N+1} / (1 - |z|)`;
    /// `err` is infinite when no tail bound is known.
    pub fn eval_with_bound(&self, z: Complex64) -> Result<Evaluation> {
        let modulus = z.norm();
        if !(modulus < 1.0) {
            return Err(Error::OutsideDisk(modulus));
        }
        Ok(Evaluation {
            value: self.eval(z),
            err: self.tail_err(modulus),
        })
    }

    /// Uniform bound on the truncation error over the circle `|z| = r`.
    pub fn circle_err(&self, r: f64) -> f64 {
        self.tail_err(r)
    }

    fn re_at(&self, r: f64, theta: f64) -> f64 {
        self.eval(Complex64::from_polar(r, theta)).re
    }

    /// Minimum of `Re a(r e^{iθ})` over a uniform grid of `grid` angles,
    /// refined by golden-section search between the neighbours of the best
    /// grid point.
    pub fn min_re_on_circle(&self, r: f64, grid: usize) -> Result<f64> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::InvalidRadius(r));
        }
        if grid < 8 {
            return Err(Error::GridTooSmall(grid));
        }
        let step = TAU / grid as f64;
        let (grid_min, best) = (0..grid)
            .into_par_iter()
            .map(|i| (self.re_at(r, step * i as f64), i))
            .reduce(
                || (f64::INFINITY, usize::MAX),
                |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
            );
        if r == 0.0 {
            return Ok(grid_min);
        }
        let centre = step * best as f64;
        let refined = golden_min(|t| self.re_at(r, t), centre - step, centre + step, 1e-9);
        Ok(grid_min.min(refined))
    }

    /// Number of zeros of the full function in `|z| < r`, by the argument
    /// principle on `|z| = r`.
    ///
    /// The count is trusted only when the truncation error on the circle is
    /// below the smallest sampled modulus (so by Rouché the tail cannot move
    /// a zero across the circle); otherwise this returns
    /// [`Error::TruncationBudget`]. The grid is doubled from `grid` until no
    /// two neighbouring samples differ in argument by more than `π/4`.
    pub fn zeros_inside(&self, r: f64, grid: usize) -> Result<usize> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidRadius(r));
        }
        if grid < 8 {
            return Err(Error::GridTooSmall(grid));
        }
        let mut grid = grid;
        loop {
            let step = TAU / grid as f64;
            let values: Vec<Complex64> = (0..grid)
                .into_par_iter()
                .map(|i| self.eval(Complex64::from_polar(r, step * i as f64)))
                .collect();
            let min_modulus = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
            let err = self.circle_err(r);
            if !(err < min_modulus) {
                return Err(Error::TruncationBudget {
                    radius: r,
                    err,
                    tol: min_modulus,
                });
            }
            let mut turn = 0.0;
            let mut resolved = true;
            for i in 0..grid {
                let delta = (values[(i + 1) % grid] / values[i]).arg();
                if delta.abs() > std::f64::consts::FRAC_PI_4 {
                    resolved = false;
                    break;
                }
                turn += delta;
            }
            if resolved {
                return Ok((turn / TAU).round().max(0.0) as usize);
            }
            if grid >= 1 << 22 {
                return Err(Error::GridTooSmall(grid));
            }
            grid *= 2;
        }
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, width: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > width {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// Smallest order `N >= min_order` with `rate r^{N+1} / (1 - r) <= budget`,
/// capped at [`MAX_ORDER`].
pub fn order_for_budget(rate: f64, r: f64, budget: f64, min_order: usize) -> usize {
    if rate == 0.0 || r == 0.0 {
        return min_order;
    }
    let needed = (budget * (1.0 - r) / rate).ln() / r.ln();
    if !needed.is_finite() || needed <= 0.0 {
        return min_order;
    }
    let order = (needed.ceil() as usize).saturating_sub(1);
    order.clamp(min_order, MAX_ORDER)
}

fn combine_tail(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? + b?)
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn add(self, rhs: Self) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..=order).map(|l| self.coeffs[l] + rhs.coeffs[l]).collect(),
            tail_bound: combine_tail(self.tail_bound, rhs.tail_bound),
        }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn sub(self, rhs: Self) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..=order).map(|l| self.coeffs[l] - rhs.coeffs[l]).collect(),
            tail_bound: combine_tail(self.tail_bound, rhs.tail_bound),
        }
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn neg(self) -> TruncatedSeries {
        self.scale(-1.0)
    }
}

/// Cauchy product truncated at the smaller order.
impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn mul(self, rhs: Self) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order)
            .map(|l| {
                (0..=l)
                    .map(|m| self.coeffs[m] * rhs.coeffs[l - m])
                    .sum::<Complex64>()
            })
            .collect();
        TruncatedSeries {
            coeffs,
            tail_bound: None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    order: usize,
    coeffs_re: Vec<f64>,
    coeffs_im: Vec<f64>,
    #[serde(default)]
    tail_bound: Option<f64>,
}

impl TryFrom<SeriesRepr> for TruncatedSeries {
    type Error = Error;

    fn try_from(repr: SeriesRepr) -> Result<Self> {
        if repr.coeffs_re.len() != repr.order + 1 || repr.coeffs_im.len() != repr.order + 1 {
            return Err(Error::Json(format!(
                "order {} needs {} coefficients, got {} real and {} imaginary",
                repr.order,
                repr.order + 1,
                repr.coeffs_re.len(),
                repr.coeffs_im.len()
            )));
        }
        let series = Self::new(
            repr.coeffs_re
                .iter()
                .zip(&repr.coeffs_im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
        )?;
        match repr.tail_bound {
            Some(b) => series.with_tail_bound(b),
            None => Ok(series),
        }
    }
}

impl From<TruncatedSeries> for SeriesRepr {
    fn from(s: TruncatedSeries) -> Self {
        Self {
            order: s.order(),
            coeffs_re: s.coeffs.iter().map(|c| c.re).collect(),
            coeffs_im: s.coeffs.iter().map(|c| c.im).collect(),
            tail_bound: s.tail_bound,
        }
    }
}
