//! The iterated integral transforms `φ^j_{σ,n}`.
//!
//! Level `m` of the transform is the radial average
//! `φ_m(z) = ∫_0^1 d_m u^{d_m - 1} φ_{m-1}(u z) du` with `d_m = σ` for
//! `j = 1` and `d_m = σ - (m - 1)` for `j = 2`. On Taylor coefficients each
//! level multiplies `z^l` by `d_m / (d_m + l)`, so the whole transform is the
//! diagonal multiplier
//!
//! ```text
//! c^1_{l,n} = (σ / (σ + l))^n
//! c^2_{l,n} = σ(σ-1)…(σ-n+1) / ((σ+l)(σ+l-1)…(σ+l-n+1)).
//! ```

mod bounds;
mod quadrature;
mod radius;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

pub use bounds::{lower_bound_terms, omega_bound, radius_closed_form, transformed_lower_bound};
pub use quadrature::{integrate_adaptive, phi_by_quadrature, QuadratureResult};
pub use radius::{radius_numeric, radius_numeric_adaptive, RadiusReport, RADIUS_CAP};

/// Which kernel the transform integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum TransformFamily {
    /// `j = 1`, kernel `σ t^{σ-1} / z^σ` at every level; pairs with the Salagean operator.
    Power,
    /// `j = 2`, kernel `(σ-n+1) t^{σ-n} / z^{σ-n+1}`; pairs with the convolution operator `L^σ_n`.
    Shifted,
}

impl TransformFamily {
    pub fn index(self) -> u8 {
        match self {
            TransformFamily::Power => 1,
            TransformFamily::Shifted => 2,
        }
    }
}

impl TryFrom<u8> for TransformFamily {
    type Error = Error;

    fn try_from(j: u8) -> Result<Self> {
        match j {
            1 => Ok(TransformFamily::Power),
            2 => Ok(TransformFamily::Shifted),
            other => Err(Error::UnknownFamily(other)),
        }
    }
}

impl From<TransformFamily> for u8 {
    fn from(f: TransformFamily) -> u8 {
        f.index()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct TransformSpec {
    pub j: TransformFamily,
    pub sigma: f64,
    pub n: u32,
}

#[derive(Deserialize)]
struct RawSpec {
    j: TransformFamily,
    sigma: f64,
    n: u32,
}

impl TryFrom<RawSpec> for TransformSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        TransformSpec::new(raw.j, raw.sigma, raw.n)
    }
}

impl TransformSpec {
    pub fn new(j: TransformFamily, sigma: f64, n: u32) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::SigmaNotPositive(sigma));
        }
        if j == TransformFamily::Shifted && !(sigma - (n as f64 - 1.0) > 0.0) {
            return Err(Error::ShiftedOrder { sigma, n });
        }
        Ok(Self { j, sigma, n })
    }

    pub fn power(sigma: f64, n: u32) -> Result<Self> {
        Self::new(TransformFamily::Power, sigma, n)
    }

    pub fn shifted(sigma: f64, n: u32) -> Result<Self> {
        Self::new(TransformFamily::Shifted, sigma, n)
    }

    /// The same transform one level shallower. Errors at `n = 0`.
    pub fn lowered(&self) -> Result<Self> {
        if self.n == 0 {
            return Err(Error::LevelZero);
        }
        Ok(Self { n: self.n - 1, ..*self })
    }

    /// The same transform with `n` levels.
    pub fn with_levels(&self, n: u32) -> Result<Self> {
        Self::new(self.j, self.sigma, n)
    }

    /// Exponent `d_m` of the level-`m` kernel (`m` counts from 1).
    pub fn level_exponent(&self, m: u32) -> f64 {
        match self.j {
            TransformFamily::Power => self.sigma,
            TransformFamily::Shifted => self.sigma - (m as f64 - 1.0),
        }
    }

    /// Divisor in `φ_n + z φ_n' / d = φ_{n-1}`, i.e. the top-level exponent.
    pub fn recurrence_divisor(&self) -> f64 {
        self.level_exponent(self.n)
    }

    /// `c^j_{l,n}`, as a running product of the per-level factors `d_m / (d_m + l)`.
    pub fn coeff_multiplier(&self, l: usize) -> f64 {
        let l = l as f64;
        (1..=self.n)
            .map(|m| {
                let d = self.level_exponent(m);
                d / (d + l)
            })
            .product()
    }
}

/// Coefficient `l` of `φ^j_{σ,n}(h)` is `c^j_{l,n} h_l`. Multipliers lie in
/// `(0, 1]`, so the tail bound of `h` carries over.
pub fn apply_phi(spec: &TransformSpec, h: &TruncatedSeries) -> Result<TruncatedSeries> {
    h.require_unit()?;
    if spec.n == 0 {
        return Ok(h.clone());
    }
    let out = h.map_multipliers(|l| if l == 0 { 1.0 } else { spec.coeff_multiplier(l) });
    Ok(match h.tail_bound() {
        Some(b) => out.with_tail_bound(b)?,
        None => out,
    })
}

/// Largest coefficient of `φ_n(h) + z φ_n(h)' / d - φ_{n-1}(h)`.
pub fn recurrence_residual(spec: &TransformSpec, h: &TruncatedSeries) -> Result<f64> {
    let lower = spec.lowered()?;
    let top = apply_phi(spec, h)?;
    let d = spec.recurrence_divisor();
    let lhs = &top + &top.z_derivative().scale(1.0 / d);
    Ok(lhs.max_coeff_diff(&apply_phi(&lower, h)?))
}

/// Largest coefficient difference between `φ_{s1}(φ_{s2}(h))` and `φ_{s2}(φ_{s1}(h))`.
pub fn commutation_residual(s1: &TransformSpec, s2: &TransformSpec, h: &TruncatedSeries) -> Result<f64> {
    if s1.j != s2.j {
        return Err(Error::FamilyMismatch);
    }
    let a = apply_phi(s1, &apply_phi(s2, h)?)?;
    let b = apply_phi(s2, &apply_phi(s1, h)?)?;
    Ok(a.max_coeff_diff(&b))
}

/// The integral operator `F^κ = ((c + κ)/z^c) ∫_0^z t^{c-1} f^κ dt` acting on
/// `g = f^κ / z^κ`: a single power-kernel level with exponent `γ = c + κ`.
pub fn apply_f(c: f64, kappa: f64, g: &TruncatedSeries) -> Result<TruncatedSeries> {
    let gamma = c + kappa;
    if !(gamma > 0.0) {
        return Err(Error::IntegralOrder(gamma));
    }
    apply_phi(&TransformSpec::power(gamma, 1)?, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caratheodory::{extremal_h, half_plane_series, random_pk_member};
    use crate::ClassParams;

    #[test]
    fn spec_validation() {
        assert!(TransformSpec::power(0.0, 1).is_err());
        assert!(TransformSpec::power(-1.0, 0).is_err());
        assert!(TransformSpec::shifted(1.0, 2).is_err());
        assert!(TransformSpec::shifted(1.5, 2).is_ok());
        assert!(TransformSpec::power(0.5, 7).is_ok());
        assert!(TransformFamily::try_from(3).is_err());
        assert!(serde_json::from_str::<TransformSpec>(r#"{"j": 2, "sigma": 1.0, "n": 2}"#).is_err());
        let spec: TransformSpec = serde_json::from_str(r#"{"j": 2, "sigma": 2.5, "n": 2}"#).unwrap();
        assert_eq!(spec, TransformSpec::shifted(2.5, 2).unwrap());
    }

    #[test]
    fn multiplier_examples() {
        assert_eq!(TransformSpec::power(1.0, 1).unwrap().coeff_multiplier(1), 0.5);
        for spec in [TransformSpec::power(2.5, 0).unwrap(), TransformSpec::shifted(0.3, 0).unwrap()] {
            for l in 1..20 {
                assert_eq!(spec.coeff_multiplier(l), 1.0);
            }
        }
        let c = TransformSpec::shifted(2.0, 2).unwrap().coeff_multiplier(1);
        assert!((c - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn multipliers_match_closed_products() {
        let sigma: f64 = 3.7;
        for n in 0..4u32 {
            let p = TransformSpec::power(sigma, n).unwrap();
            let s = TransformSpec::shifted(sigma, n).unwrap();
            for l in 1..=30usize {
                let lf = l as f64;
                assert!((p.coeff_multiplier(l) - (sigma / (sigma + lf)).powi(n as i32)).abs() < 1e-15);
                let num: f64 = (0..n).map(|i| sigma - i as f64).product();
                let den: f64 = (0..n).map(|i| sigma + lf - i as f64).product();
                assert!((s.coeff_multiplier(l) - num / den).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn apply_phi_examples() {
        let l0 = half_plane_series(0.0, 24);
        let spec0 = TransformSpec::power(2.0, 0).unwrap();
        assert_eq!(apply_phi(&spec0, &l0).unwrap(), l0);

        let out = apply_phi(&TransformSpec::power(1.0, 1).unwrap(), &l0).unwrap();
        for l in 1..=24 {
            assert!((out.coeff(l).re - 2.0 / (1.0 + l as f64)).abs() < 1e-15);
        }
        assert_eq!(out.tail_bound(), Some(2.0));

        let params = ClassParams::new(4.0, 0.25).unwrap();
        let spec = TransformSpec::shifted(2.5, 2).unwrap();
        let th = apply_phi(&spec, &extremal_h(&params, 8)).unwrap();
        assert!((th.coeff(1).re + 4.0 * 0.75 * spec.coeff_multiplier(1)).abs() < 1e-15);

        let bad = TruncatedSeries::from_real(&[2.0, 1.0]).unwrap();
        assert!(apply_phi(&spec, &bad).is_err());
    }

    #[test]
    fn recurrence_examples() {
        let params = ClassParams::new(3.0, 0.25).unwrap();
        let (h, _) = random_pk_member(&params, 4, 11, 64).unwrap();
        let r = recurrence_residual(&TransformSpec::power(1.7, 1).unwrap(), &h).unwrap();
        assert!(r < 1e-13, "{r}");
        let one = TruncatedSeries::one(16);
        assert_eq!(recurrence_residual(&TransformSpec::power(3.0, 2).unwrap(), &one).unwrap(), 0.0);
        let r = recurrence_residual(&TransformSpec::shifted(2.5, 2).unwrap(), &h).unwrap();
        assert!(r < 1e-12, "{r}");
        assert!(matches!(
            recurrence_residual(&TransformSpec::power(1.0, 0).unwrap(), &h),
            Err(Error::LevelZero)
        ));
    }

    #[test]
    fn commutation_examples() {
        let params = ClassParams::new(2.5, 0.5).unwrap();
        let (h, _) = random_pk_member(&params, 3, 5, 64).unwrap();
        let a = TransformSpec::power(1.0, 2).unwrap();
        let b = TransformSpec::power(3.0, 1).unwrap();
        assert_eq!(commutation_residual(&a, &a, &h).unwrap(), 0.0);
        assert!(commutation_residual(&a, &b, &h).unwrap() <= 1e-15);
        let c = TransformSpec::shifted(4.0, 2).unwrap();
        let d = TransformSpec::shifted(2.5, 1).unwrap();
        assert!(commutation_residual(&c, &d, &h).unwrap() <= 1e-15);
        assert!(matches!(commutation_residual(&a, &c, &h), Err(Error::FamilyMismatch)));
    }

    #[test]
    fn apply_f_examples() {
        assert_eq!(apply_f(0.5, 0.5, &TruncatedSeries::one(8)).unwrap(), TruncatedSeries::one(8));
        let l0 = half_plane_series(0.0, 16);
        let out = apply_f(0.0, 1.0, &l0).unwrap();
        for l in 1..=16 {
            assert!((out.coeff(l).re - 2.0 / (1.0 + l as f64)).abs() < 1e-15);
        }
        assert!(matches!(apply_f(-1.0, 0.5, &l0), Err(Error::IntegralOrder(_))));

        let params = ClassParams::new(4.0, 0.0).unwrap();
        let (h, _) = random_pk_member(&params, 4, 9, 64).unwrap();
        let spec = TransformSpec::power(2.5, 2).unwrap();
        let a = apply_f(0.3, 2.5, &apply_phi(&spec, &h).unwrap()).unwrap();
        let b = apply_phi(&spec, &apply_f(0.3, 2.5, &h).unwrap()).unwrap();
        assert!(a.max_coeff_diff(&b) <= 1e-15);
    }
}
