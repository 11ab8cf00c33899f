//! Normalized functions `f(z) = z + a_2 z^2 + …` of the classes `T_n^σ(k, β)`
//! and `B_n^σ(k, β)`.
//!
//! A function is stored through the series of `f(z)/z`. Powers `f^σ` only
//! ever appear as `f(z)^σ / z^σ = (f(z)/z)^σ`, the principal branch of a
//! series with constant term 1, so `z^σ` is never materialised. The Salagean
//! operator `D = z d/dz` acts on `z^{σ+l}` as multiplication by `σ + l`, which
//! on the normalized series is the multiplier `(σ + l)/σ` per application.
//!
//! Class members are produced constructively: `f^σ/z^σ = φ^1_{σ,n}(h)` gives
//! `f ∈ T_n^σ(k, β)` and `f/z = φ^2_{σ,n}(h)` gives `f ∈ B_n^σ(k, β)` for
//! `h ∈ P_k(β)`.

use serde::{Deserialize, Serialize};

use crate::caratheodory::{herglotz_series, random_pk_member, AtomicMeasure, ClassParams};
use crate::error::{Error, Result};
use crate::series::{order_for_budget, TruncatedSeries, DEFAULT_ORDER};
use crate::transform::{apply_phi, TransformFamily, TransformSpec};

/// `construct_t` takes a principal `σ`-th root, so `φ^1_{σ,n}(h)` has to be
/// zero-free; it is checked on the disk of this radius.
pub const ROOT_SCAN_RADIUS: f64 = 0.98;
const ROOT_SCAN_BUDGET: f64 = 1e-2;
const ROOT_SCAN_GRID: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFunction {
    unit_series: TruncatedSeries,
    sigma: f64,
}

impl NormalizedFunction {
    pub fn new(unit_series: TruncatedSeries, sigma: f64) -> Result<Self> {
        unit_series.require_unit()?;
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::SigmaNotPositive(sigma));
        }
        Ok(Self { unit_series, sigma })
    }

    /// `f(z) = z`.
    pub fn identity(order: usize, sigma: f64) -> Result<Self> {
        Self::new(TruncatedSeries::one(order), sigma)
    }

    /// Series of `f(z)/z`.
    pub fn unit_series(&self) -> &TruncatedSeries {
        &self.unit_series
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Series of `f'(z) = (z u)' = u + z u'` with `u = f/z`.
    pub fn derivative(&self) -> TruncatedSeries {
        &self.unit_series + &self.unit_series.z_derivative()
    }
}

#[derive(Serialize, Deserialize)]
struct FunctionRepr {
    sigma: f64,
    coeffs_re: Vec<f64>,
    coeffs_im: Vec<f64>,
    order: usize,
}

impl Serialize for NormalizedFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs = self.unit_series.coeffs();
        FunctionRepr {
            sigma: self.sigma,
            coeffs_re: coeffs.iter().map(|c| c.re).collect(),
            coeffs_im: coeffs.iter().map(|c| c.im).collect(),
            order: self.unit_series.order(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NormalizedFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = FunctionRepr::deserialize(deserializer)?;
        if repr.coeffs_re.len() != repr.order + 1 || repr.coeffs_im.len() != repr.order + 1 {
            return Err(D::Error::custom("coefficient arrays must have order + 1 entries"));
        }
        let coeffs = repr
            .coeffs_re
            .iter()
            .zip(&repr.coeffs_im)
            .map(|(&re, &im)| num_complex::Complex64::new(re, im))
            .collect();
        let series = TruncatedSeries::new(coeffs).map_err(D::Error::custom)?;
        NormalizedFunction::new(series, repr.sigma).map_err(D::Error::custom)
    }
}

/// `D^n f^σ / (σ^n z^σ)`: coefficient `l` of `(f/z)^σ` times `((σ + l)/σ)^n`.
pub fn salagean_normalized(f: &NormalizedFunction, sigma: f64, n: u32) -> Result<TruncatedSeries> {
    if !(sigma > 0.0) {
        return Err(Error::SigmaNotPositive(sigma));
    }
    let g = f.unit_series.pow_real(sigma)?;
    if n == 0 {
        return Ok(g);
    }
    Ok(g.map_multipliers(|l| ((sigma + l as f64) / sigma).powi(n as i32)))
}

/// Coefficient of `z^l` in `τ_{σ,n}(z) = z / (1 - z)^{σ-(n-1)}`, i.e.
/// `(a)_{l-1} / (l-1)!` with `a = σ - (n - 1)`.
pub fn tau_coefficient(sigma: f64, n: u32, l: usize) -> Result<f64> {
    let a = sigma - (n as f64 - 1.0);
    if !(a > 0.0) {
        return Err(Error::ShiftedOrder { sigma, n });
    }
    if l == 0 {
        return Ok(0.0);
    }
    Ok((1..l).map(|i| (a + i as f64 - 1.0) / i as f64).product())
}

/// Series of `L_n^σ f(z) / z` with `L_n^σ f = τ_σ * τ_{σ,n}^{(-1)} * f`.
/// Hadamard products act coefficientwise, so coefficient `l` of `f/z`
/// (the coefficient `a_{l+1}` of `f`) is scaled by `τ_{σ,0}(l+1) / τ_{σ,n}(l+1)`.
pub fn l_operator(f: &NormalizedFunction, sigma: f64, n: u32) -> Result<TruncatedSeries> {
    let order = f.unit_series.order();
    let mut ratios = Vec::with_capacity(order + 1);
    for l in 0..=order {
        let num = tau_coefficient(sigma, 0, l + 1)?;
        let den = tau_coefficient(sigma, n, l + 1)?;
        if den == 0.0 {
            return Err(Error::ShiftedOrder { sigma, n });
        }
        ratios.push(num / den);
    }
    Ok(f.unit_series.map_multipliers(|l| ratios[l]))
}

fn require_family(spec: &TransformSpec, family: TransformFamily) -> Result<()> {
    if spec.j != family {
        return Err(Error::FamilyMismatch);
    }
    Ok(())
}

/// The member of `T_n^σ(k, β)` with `f^σ/z^σ = φ^1_{σ,n}(h)`.
pub fn construct_t(h: &TruncatedSeries, spec: &TransformSpec) -> Result<NormalizedFunction> {
    require_family(spec, TransformFamily::Power)?;
    let g = apply_phi(spec, h)?;
    NormalizedFunction::new(g.pow_real(1.0 / spec.sigma)?, spec.sigma)
}

/// Whether `construct_t` applied to the series of `measure` yields a function
/// analytic in `|z| < ROOT_SCAN_RADIUS`, i.e. whether `φ^1_{σ,n}(h)` has no
/// zero there. Always true for `σ = 1`, where no root is taken.
///
/// A `P_k(β)` member with `k > 2` can make `φ^1_{σ,n}(h)` vanish inside the
/// disk; then `(f/z)^σ = φ^1_{σ,n}(h)` has no analytic solution and the
/// formal root series diverges there. An uncertifiable zero count (a zero
/// too close to the scan circle) also answers false.
pub fn admits_t_member(measure: &AtomicMeasure, spec: &TransformSpec) -> Result<bool> {
    require_family(spec, TransformFamily::Power)?;
    if spec.sigma == 1.0 {
        return Ok(true);
    }
    let params = measure.params();
    let order = order_for_budget(params.coeff_bound(), ROOT_SCAN_RADIUS, ROOT_SCAN_BUDGET, DEFAULT_ORDER);
    let g = apply_phi(spec, &herglotz_series(measure, order))?;
    match g.zeros_inside(ROOT_SCAN_RADIUS, ROOT_SCAN_GRID) {
        Ok(count) => Ok(count == 0),
        Err(Error::TruncationBudget { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// First of up to `max_draws` seeded `P_k(β)` members (seeds `seed`,
/// `seed + 1`, …) accepted by [`admits_t_member`], with the seed that produced it.
pub fn random_t_source(
    params: &ClassParams,
    spec: &TransformSpec,
    n_atoms: usize,
    seed: u64,
    order: usize,
    max_draws: u64,
) -> Result<Option<(TruncatedSeries, AtomicMeasure, u64)>> {
    for draw in 0..max_draws {
        let s = seed.wrapping_add(draw);
        let (h, measure) = random_pk_member(params, n_atoms, s, order)?;
        if admits_t_member(&measure, spec)? {
            return Ok(Some((h, measure, s)));
        }
    }
    Ok(None)
}

/// The member of `B_n^σ(k, β)` with `f/z = φ^2_{σ,n}(h)`.
pub fn construct_b(h: &TruncatedSeries, spec: &TransformSpec) -> Result<NormalizedFunction> {
    require_family(spec, TransformFamily::Shifted)?;
    NormalizedFunction::new(apply_phi(spec, h)?, spec.sigma)
}

/// Series of `f^{σ-1} f' / z^{σ-1}`, from `σ f^{σ-1} f' = (f^σ)'`:
/// with `g = (f/z)^σ` it is `g + z g' / σ`.
pub fn t_derivative_quantity(f: &NormalizedFunction, sigma: f64) -> Result<TruncatedSeries> {
    if !(sigma > 0.0) {
        return Err(Error::SigmaNotPositive(sigma));
    }
    let g = f.unit_series.pow_real(sigma)?;
    Ok(&g + &g.z_derivative().scale(1.0 / sigma))
}

/// Series of `((σ - n) f/z + f') / (σ - n + 1)`.
pub fn b_derivative_quantity(f: &NormalizedFunction, sigma: f64, n: u32) -> Result<TruncatedSeries> {
    let d = sigma - (n as f64 - 1.0);
    if !(d > 0.0) {
        return Err(Error::ShiftedOrder { sigma, n });
    }
    let u = &f.unit_series;
    let numerator = &u.scale(sigma - n as f64) + &f.derivative();
    Ok(numerator.scale(1.0 / d))
}
