//! Members of `P(β)` and `P_k(β)` built from finite signed Herglotz measures.
//!
//! A measure `m ∈ M_k` is represented by atoms `(s_i, w_i)` with
//! `Σ w_i = 2` and `Σ |w_i| <= k`. The associated function is
//!
//! ```text
//! h(z) = ½ Σ_i w_i (1 + (1 - 2β) z e^{-i s_i}) / (1 - z e^{-i s_i})
//!      = 1 + (1 - β) Σ_{l>=1} (Σ_i w_i e^{-i l s_i}) z^l.
//! ```

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// Slack on `Σ w = 2` and `Σ |w| <= k`.
pub const MASS_TOL: f64 = 1e-12;

/// Rotation bound `k` and real-part floor `β` of `P_k(β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ClassParams {
    pub k: f64,
    pub beta: f64,
}

#[derive(Deserialize)]
struct RawParams {
    k: f64,
    beta: f64,
}

impl TryFrom<RawParams> for ClassParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ClassParams::new(raw.k, raw.beta)
    }
}

impl ClassParams {
    pub fn new(k: f64, beta: f64) -> Result<Self> {
        if !(k >= 2.0) || !k.is_finite() {
            return Err(Error::RotationBound(k));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::BetaRange(beta));
        }
        Ok(Self { k, beta })
    }

    /// Bound `k (1 - β)` on every non-constant coefficient of a class member.
    pub fn coeff_bound(&self) -> f64 {
        self.k * (1.0 - self.beta)
    }

    /// The same `β` with `k = 2`, i.e. the base class `P(β)`.
    pub fn base(&self) -> Self {
        Self { k: 2.0, beta: self.beta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub s: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    k: f64,
    beta: f64,
}

#[derive(Deserialize)]
struct RawMeasure {
    atoms: Vec<Atom>,
    k: f64,
    beta: f64,
}

impl TryFrom<RawMeasure> for AtomicMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        AtomicMeasure::new(raw.atoms, ClassParams::new(raw.k, raw.beta)?)
    }
}

fn canonical_angle(s: f64) -> f64 {
    let t = s.rem_euclid(TAU);
    // rem_euclid can round up to TAU itself
    if t >= TAU {
        0.0
    } else {
        t
    }
}

impl AtomicMeasure {
    /// Validates `Σ w = 2` and `Σ |w| <= k` and stores angles in `[0, 2π)`.
    pub fn new(atoms: Vec<Atom>, params: ClassParams) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidAtom("measure has no atoms".into()));
        }
        if let Some(bad) = atoms.iter().find(|a| !a.s.is_finite() || !a.w.is_finite()) {
            return Err(Error::InvalidAtom(format!("non-finite atom ({}, {})", bad.s, bad.w)));
        }
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|a| Atom {
                s: canonical_angle(a.s),
                w: a.w,
            })
            .collect();
        let measure = Self {
            atoms,
            k: params.k,
            beta: params.beta,
        };
        let mass = measure.mass();
        if (mass - 2.0).abs() > MASS_TOL {
            return Err(Error::MeasureMass(mass));
        }
        let variation = measure.total_variation();
        if variation > params.k + MASS_TOL {
            return Err(Error::MeasureVariation { variation, k: params.k });
        }
        Ok(measure)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn params(&self) -> ClassParams {
        ClassParams { k: self.k, beta: self.beta }
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.w.abs()).sum()
    }

    /// Total mass of the positive part `a(s)`.
    pub fn positive_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w.max(0.0)).sum()
    }

    /// Total mass of the negative part `b(s)`.
    pub fn negative_mass(&self) -> f64 {
        self.atoms.iter().map(|a| (-a.w).max(0.0)).sum()
    }
}

/// `e^{-i l s}` with the rounding of the product `l s` folded back in.
fn phase(l: usize, s: f64) -> Complex64 {
    let l = l as f64;
    let p = l * s;
    let residual = l.mul_add(s, -p);
    let (sin, cos) = p.sin_cos();
    Complex64::new(cos, -sin) * Complex64::new(1.0, -residual)
}

/// Series of `(1 + (1 - 2β) z e^{-is}) / (1 - z e^{-is}) = 1 + 2(1 - β) Σ e^{-ils} z^l`.
pub fn mobius_kernel(beta: f64, s: f64, order: usize) -> TruncatedSeries {
    let scale = 2.0 * (1.0 - beta);
    let coeffs = (0..=order)
        .map(|l| {
            if l == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                phase(l, s) * scale
            }
        })
        .collect();
    TruncatedSeries::new(coeffs)
        .and_then(|s| s.with_tail_bound(scale))
        .expect("kernel series is nonempty with finite tail")
}

/// `h = ½ Σ w_i K_β(s_i)`; the constant term is exactly 1 because `Σ w_i = 2`.
pub fn herglotz_series(measure: &AtomicMeasure, order: usize) -> TruncatedSeries {
    let scale = 1.0 - measure.beta;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
    coeffs[0] = Complex64::new(1.0, 0.0);
    for atom in &measure.atoms {
        for (l, c) in coeffs.iter_mut().enumerate().skip(1) {
            *c += phase(l, atom.s) * (scale * atom.w);
        }
    }
    TruncatedSeries::new(coeffs)
        .and_then(|s| s.with_tail_bound(measure.params().coeff_bound()))
        .expect("herglotz series is nonempty with finite tail")
}

/// Series of `L_{0,β}(z) = β + (1 - β)(1 + z)/(1 - z)`.
pub fn half_plane_series(beta: f64, order: usize) -> TruncatedSeries {
    mobius_kernel(beta, 0.0, order)
}

/// The extremal function `H = ((k+2)/4) L_{0,β}(-z) - ((k-2)/4) L_{0,β}(z)`:
/// odd coefficients `-k(1-β)`, even ones `2(1-β)`.
pub fn extremal_h(params: &ClassParams, order: usize) -> TruncatedSeries {
    let odd = -params.coeff_bound();
    let even = 2.0 * (1.0 - params.beta);
    let coeffs: Vec<f64> = (0..=order)
        .map(|l| match l {
            0 => 1.0,
            l if l % 2 == 1 => odd,
            _ => even,
        })
        .collect();
    TruncatedSeries::from_real(&coeffs)
        .and_then(|s| s.with_tail_bound(params.coeff_bound()))
        .expect("extremal series is nonempty with finite tail")
}

/// The two-atom measure whose Herglotz series is [`extremal_h`].
pub fn extremal_measure(params: &ClassParams) -> AtomicMeasure {
    AtomicMeasure::new(
        vec![
            Atom { s: PI, w: (params.k + 2.0) / 2.0 },
            Atom { s: 0.0, w: -(params.k - 2.0) / 2.0 },
        ],
        *params,
    )
    .expect("extremal measure satisfies its invariants")
}

/// `((k+2)/4) p - ((k-2)/4) q`.
pub fn compose_pk(p: &TruncatedSeries, q: &TruncatedSeries, params: &ClassParams) -> TruncatedSeries {
    let wp = (params.k + 2.0) / 4.0;
    let wq = (params.k - 2.0) / 4.0;
    if wq == 0.0 {
        return p.clone();
    }
    &p.scale(wp) - &q.scale(wq)
}

/// Seeded random member of `P_k(β)`.
///
/// Atoms sit at uniform angles. A total variation `t ∈ [2, k]` is drawn and
/// split into a positive part of mass `(t + 2)/2` and a negative part of mass
/// `(t - 2)/2`, each spread over its atoms with random proportions. With
/// `k = 2` or a single atom every weight is positive, giving a `P(β)` member.
pub fn random_pk_member(
    params: &ClassParams,
    n_atoms: usize,
    seed: u64,
    order: usize,
) -> Result<(TruncatedSeries, AtomicMeasure)> {
    if n_atoms == 0 {
        return Err(Error::InvalidAtom("need at least one atom".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signed = params.k > 2.0 && n_atoms >= 2;
    let n_pos = if signed { rng.random_range(1..n_atoms) } else { n_atoms };
    let u: f64 = if signed { rng.random() } else { 0.0 };
    let variation = 2.0 + u * (params.k - 2.0);
    let pos_mass = (variation + 2.0) / 2.0;
    let neg_mass = (variation - 2.0) / 2.0;

    let mut spread = |count: usize, mass: f64, sign: f64| -> Vec<Atom> {
        let shares: Vec<f64> = (0..count).map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = shares.iter().sum();
        shares
            .into_iter()
            .map(|share| Atom {
                s: rng.random::<f64>() * TAU,
                w: sign * mass * share / total,
            })
            .collect()
    };
    let mut atoms = spread(n_pos, pos_mass, 1.0);
    atoms.extend(spread(n_atoms - n_pos, neg_mass, -1.0));

    // absorb rounding so that Σ w = 2 holds to the last bit available
    let drift = 2.0 - atoms.iter().map(|a| a.w).sum::<f64>();
    atoms[0].w += drift;

    let measure = AtomicMeasure::new(atoms, *params)?;
    Ok((herglotz_series(&measure, order), measure))
}
