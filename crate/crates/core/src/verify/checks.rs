use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{next_seed, Grid, Status, SuiteConfig, VerificationCase};
use super::{
    B_ROUNDTRIP_TOL, COMMUTATION_TOL, COMPOSE_TOL, LOWER_BOUND_TOL, ORACLE_TOL, QUANTITY_TOL, RADIUS_OFFSET,
    RADIUS_TOL, RECURRENCE_TOL, SHARPNESS_TOL, TAU_TOL, T_ROUNDTRIP_TOL,
};
use crate::caratheodory::{
    compose_pk, extremal_h, extremal_measure, herglotz_series, random_pk_member, Atom, AtomicMeasure, ClassParams,
};
use crate::error::{Error, Result};
use crate::series::{order_for_budget, TruncatedSeries, DEFAULT_GRID};
use crate::transform::{
    apply_f, apply_phi, commutation_residual, lower_bound_terms, omega_bound, phi_by_quadrature, radius_closed_form,
    radius_numeric_adaptive, recurrence_residual, transformed_lower_bound, TransformFamily, TransformSpec,
};
use crate::univalent::{
    admits_t_member, b_derivative_quantity, construct_b, construct_t, l_operator, random_t_source,
    salagean_normalized, t_derivative_quantity, tau_coefficient, NormalizedFunction, ROOT_SCAN_RADIUS,
};

const ORACLE_CASES: usize = 50;
const ORACLE_MAX_LEVEL: u32 = 3;
const ORACLE_MAX_RADIUS: f64 = 0.9;
const MAX_ATOMS: usize = 6;
/// Draws allowed per accepted `T`-class member.
const MAX_DRAWS: u64 = 200;
const SHARP_RADII: [f64; 4] = [0.1, 0.3, 0.5, 0.7];
const POSITIVITY_RADII: [f64; 2] = [0.5, 0.95];
const SAMPLE_RADIUS: f64 = 0.95;
const QUANTITY_RADIUS: f64 = 0.9;
/// Truncation budget used when choosing evaluation orders.
const EVAL_BUDGET: f64 = 1e-10;
const SAMPLE_BUDGET: f64 = 1e-9;
/// Budget for the neglected terms of the lower-bound series.
const BOUND_BUDGET: f64 = 1e-12;
const MONOTONE_MAX_LEVEL: u32 = 4;
const MONOTONE_MAX_L: usize = 128;
/// Roundoff allowance for the closed forms `ω(r)` and the bound series.
const CLOSED_FORM_ROUNDOFF: f64 = 1e-12;

/// Running worst violation and the input that produced it.
struct Worst {
    value: f64,
    witness: Value,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            witness: Value::Null,
        }
    }

    fn update(&mut self, value: f64, witness: impl FnOnce() -> Value) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.witness = witness();
        }
    }
}

enum Outcome {
    Measured(Worst),
    Skipped(String),
}

fn finish(
    name: &str,
    params: Option<ClassParams>,
    spec: Option<TransformSpec>,
    tolerance: f64,
    result: Result<Outcome>,
) -> VerificationCase {
    let mut case = VerificationCase {
        name: name.to_string(),
        params,
        spec,
        tolerance,
        measured: None,
        status: Status::Fail,
        reason: None,
        witness: None,
    };
    match result {
        Ok(Outcome::Measured(worst)) => {
            case.measured = Some(worst.value);
            if worst.value <= tolerance {
                case.status = Status::Pass;
            } else {
                case.witness = Some(worst.witness);
            }
        }
        Ok(Outcome::Skipped(reason)) => {
            case.status = Status::Skipped;
            case.reason = Some(reason);
        }
        Err(e) => {
            case.reason = Some(e.to_string());
            case.witness = Some(json!({ "error": e.to_string() }));
        }
    }
    case
}

/// Forward-error bound for Horner evaluation of `s` at modulus `r`.
fn horner_roundoff(s: &TruncatedSeries, r: f64) -> f64 {
    let mut power = 1.0;
    let mut total = 0.0;
    for c in s.coeffs() {
        total += c.norm() * power;
        power *= r;
    }
    2.0 * (s.order() + 1) as f64 * f64::EPSILON * total
}

/// A coefficient perturbation of size `drift` moves values on `|z| = r` by at most this.
fn drift_on_circle(drift: f64, r: f64) -> f64 {
    drift / (1.0 - r)
}

fn lower_bound_at(spec: &TransformSpec, params: &ClassParams, r: f64) -> f64 {
    transformed_lower_bound(spec, params, r, lower_bound_terms(params, r, BOUND_BUDGET))
}

fn random_point(rng: &mut ChaCha8Rng, max_radius: f64) -> Complex64 {
    let r = max_radius * rng.random::<f64>();
    Complex64::from_polar(r, TAU * rng.random::<f64>())
}

struct Member {
    measure: AtomicMeasure,
    seed: u64,
    atoms: usize,
}

impl Member {
    fn series(&self, order: usize) -> TruncatedSeries {
        herglotz_series(&self.measure, order)
    }

    fn witness(&self) -> Value {
        json!({ "seed": self.seed, "atoms": self.atoms })
    }
}

fn draw_member(params: &ClassParams, rng: &mut ChaCha8Rng) -> Result<Member> {
    let atoms = rng.random_range(1..=MAX_ATOMS);
    let seed = next_seed(rng);
    let (_, measure) = random_pk_member(params, atoms, seed, 0)?;
    Ok(Member { measure, seed, atoms })
}

fn draw_members(params: &ClassParams, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Member>> {
    (0..count).map(|_| draw_member(params, rng)).collect()
}

/// Members whose transformed series admits the principal root taken by
/// `construct_t`, plus the number of draws it took to find them.
struct Population {
    members: Vec<Member>,
    draws: u64,
}

impl Population {
    fn note(&self) -> String {
        format!(
            "{} members accepted from {} draws; the rest make φ^1(h) vanish in |z| < {ROOT_SCAN_RADIUS}",
            self.members.len(),
            self.draws
        )
    }
}

fn t_population(params: &ClassParams, spec: &TransformSpec, count: usize, rng: &mut ChaCha8Rng) -> Result<Population> {
    let mut members = Vec::with_capacity(count);
    let mut draws = 0;
    for _ in 0..count {
        let atoms = rng.random_range(1..=MAX_ATOMS);
        let base = next_seed(rng);
        match random_t_source(params, spec, atoms, base, 0, MAX_DRAWS)? {
            Some((_, measure, seed)) => {
                draws += seed.wrapping_sub(base) + 1;
                members.push(Member { measure, seed, atoms });
            }
            None => draws += MAX_DRAWS,
        }
    }
    Ok(Population { members, draws })
}

/// Class members for `spec`: any `P_k(β)` member for `j = 2`, root-admissible ones for `j = 1`.
fn class_population(
    params: &ClassParams,
    spec: &TransformSpec,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Population> {
    match spec.j {
        TransformFamily::Power => t_population(params, spec, count, rng),
        TransformFamily::Shifted => Ok(Population {
            members: draw_members(params, count, rng)?,
            draws: count as u64,
        }),
    }
}

fn construct(h: &TruncatedSeries, spec: &TransformSpec) -> Result<NormalizedFunction> {
    match spec.j {
        TransformFamily::Power => construct_t(h, spec),
        TransformFamily::Shifted => construct_b(h, spec),
    }
}

/// The operator that undoes `construct` at level `n`: `D^n f^σ / (σ^n z^σ)` or `L^σ_n f / z`.
fn recover(f: &NormalizedFunction, spec: &TransformSpec, n: u32) -> Result<TruncatedSeries> {
    match spec.j {
        TransformFamily::Power => salagean_normalized(f, spec.sigma, n),
        TransformFamily::Shifted => l_operator(f, spec.sigma, n),
    }
}

/// The two quantities bounded below for class members: `f^σ/z^σ` or `f/z`
/// (at level `n`), and the derivative quantity (at level `n - 1`).
fn quantities(f: &NormalizedFunction, spec: &TransformSpec) -> Result<(TruncatedSeries, TruncatedSeries)> {
    match spec.j {
        TransformFamily::Power => Ok((
            f.unit_series().pow_real(spec.sigma)?,
            t_derivative_quantity(f, spec.sigma)?,
        )),
        TransformFamily::Shifted => Ok((
            f.unit_series().clone(),
            b_derivative_quantity(f, spec.sigma, spec.n)?,
        )),
    }
}

fn roundtrip_tol(spec: &TransformSpec) -> f64 {
    match spec.j {
        TransformFamily::Power => T_ROUNDTRIP_TOL,
        TransformFamily::Shifted => B_ROUNDTRIP_TOL,
    }
}

fn extremal_skip_reason(params: &ClassParams, spec: &TransformSpec) -> Result<Option<String>> {
    if spec.j == TransformFamily::Power && !admits_t_member(&extremal_measure(params), spec)? {
        return Ok(Some(format!(
            "φ^1(H) vanishes in |z| < {ROOT_SCAN_RADIUS}: f^σ/z^σ = φ^1(H) has no analytic σ-th root, \
             so the extremal f is not a normalized analytic function"
        )));
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// global

pub(super) fn oracle(cells: &[ClassParams], grid: &Grid, config: &SuiteConfig, rng: &mut ChaCha8Rng) -> VerificationCase {
    let families: Vec<TransformFamily> = grid.j.iter().filter_map(|&j| TransformFamily::try_from(j).ok()).collect();
    let sigmas: Vec<f64> = grid.sigma.iter().copied().filter(|s| *s > 0.0 && s.is_finite()).collect();
    let result = (|| -> Result<Outcome> {
        if families.is_empty() || sigmas.is_empty() {
            return Ok(Outcome::Skipped("no valid transform in the grid".into()));
        }
        let mut worst = Worst::new();
        for _ in 0..ORACLE_CASES {
            let params = cells[rng.random_range(0..cells.len())];
            let spec = loop {
                let j = families[rng.random_range(0..families.len())];
                let sigma = sigmas[rng.random_range(0..sigmas.len())];
                let n = rng.random_range(1..=ORACLE_MAX_LEVEL);
                if let Ok(s) = TransformSpec::new(j, sigma, n) {
                    break s;
                }
            };
            let member = draw_member(&params, rng)?;
            let h = member.series(config.order);
            let z = random_point(rng, ORACLE_MAX_RADIUS);
            let q = phi_by_quadrature(&spec, &h, z)?;
            let m = apply_phi(&spec, &h)?.eval(z);
            let diff = (q.value - m).norm();
            worst.update(diff, || {
                json!({ "params": params, "spec": spec, "member": member.witness(),
                        "z": [z.re, z.im], "quadrature_err_est": q.err_est })
            });
        }
        Ok(Outcome::Measured(worst))
    })();
    finish("oracle", None, None, ORACLE_TOL, result)
}

// ---------------------------------------------------------------------------
// per transform

pub(super) fn spec_checks(spec: &TransformSpec) -> Vec<VerificationCase> {
    let mut out = vec![finish("multiplier_monotone", None, Some(*spec), 0.0, monotone(spec))];
    if spec.j == TransformFamily::Shifted {
        out.push(finish("tau_two_path", None, Some(*spec), TAU_TOL, tau_two_path(spec)));
    }
    out
}

/// Counts `(l, m)` with `m` from `spec.n` to the top level violating
/// `0 < c_{l,m+1} < c_{l,m} <= 1`.
fn monotone(spec: &TransformSpec) -> Result<Outcome> {
    let mut violations = 0usize;
    let mut first = Value::Null;
    for m in spec.n..=MONOTONE_MAX_LEVEL {
        let (Ok(lower), Ok(upper)) = (spec.with_levels(m), spec.with_levels(m + 1)) else {
            break;
        };
        for l in 1..=MONOTONE_MAX_L {
            let (a, b) = (lower.coeff_multiplier(l), upper.coeff_multiplier(l));
            if !(0.0 < b && b < a && a <= 1.0) {
                violations += 1;
                if first.is_null() {
                    first = json!({ "l": l, "level": m, "c_lower": a, "c_upper": b });
                }
            }
        }
    }
    Ok(Outcome::Measured(Worst {
        value: violations as f64,
        witness: first,
    }))
}

/// Relative gap between the `τ`-ratio multiplier of `L^σ_n` and `1 / c^2_{l,n}`.
fn tau_two_path(spec: &TransformSpec) -> Result<Outcome> {
    let mut worst = Worst::new();
    for l in 0..=MONOTONE_MAX_L {
        let ratio = tau_coefficient(spec.sigma, 0, l + 1)? / tau_coefficient(spec.sigma, spec.n, l + 1)?;
        let expected = 1.0 / spec.coeff_multiplier(l);
        let rel = (ratio - expected).abs() / expected;
        worst.update(rel, || json!({ "l": l, "tau_ratio": ratio, "inverse_multiplier": expected }));
    }
    Ok(Outcome::Measured(worst))
}

// ---------------------------------------------------------------------------
// per class cell

pub(super) fn cell_checks(params: &ClassParams, config: &SuiteConfig, rng: &mut ChaCha8Rng) -> Vec<VerificationCase> {
    let p = Some(*params);
    vec![
        finish("radius", p, None, RADIUS_TOL, radius(params)),
        finish("positivity", p, None, 0.0, positivity(params, config, rng)),
        finish(
            "coefficient_bound",
            p,
            None,
            CLOSED_FORM_ROUNDOFF,
            coefficient_bound(params, config, rng),
        ),
        finish("compose", p, None, COMPOSE_TOL, compose(params, config, rng)),
        finish("extremal_closed_form", p, None, CLOSED_FORM_ROUNDOFF, extremal_closed_form(params)),
    ]
}

fn radius(params: &ClassParams) -> Result<Outcome> {
    let report = radius_numeric_adaptive(|n| Ok(extremal_h(params, n)), Some(params), 1e-7)?;
    Ok(Outcome::Measured(Worst {
        value: report.discrepancy.unwrap_or(f64::INFINITY),
        witness: serde_json::to_value(report)?,
    }))
}

/// `min Re h > β` for `P(β)` members, net of truncation and roundoff.
fn positivity(params: &ClassParams, config: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let base = params.base();
    let mut worst = Worst::new();
    for member in draw_members(&base, config.members, rng)? {
        for &r in &POSITIVITY_RADII {
            let order = order_for_budget(base.coeff_bound(), r, SAMPLE_BUDGET, config.order);
            let h = member.series(order);
            let min = h.min_re_on_circle(r, DEFAULT_GRID)?;
            let violation = base.beta - min - h.circle_err(r) - horner_roundoff(&h, r);
            worst.update(violation, || json!({ "member": member.witness(), "r": r, "min_re": min }));
        }
    }
    Ok(Outcome::Measured(worst))
}

fn coefficient_bound(params: &ClassParams, config: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let bound = params.coeff_bound();
    let mut worst = Worst::new();
    for member in draw_members(params, config.members, rng)? {
        let h = member.series(config.order);
        for l in 1..=h.order() {
            let excess = h.coeff(l).norm() - bound;
            worst.update(excess, || json!({ "member": member.witness(), "l": l }));
        }
    }
    Ok(Outcome::Measured(worst))
}

/// `((k+2)/4) p - ((k-2)/4) q` for one-atom `p`, `q` against the two-atom series.
fn compose(params: &ClassParams, config: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let single = |s: f64| AtomicMeasure::new(vec![Atom { s, w: 2.0 }], params.base());
    let mut worst = Worst::new();
    for _ in 0..config.members {
        let (s1, s2) = (TAU * rng.random::<f64>(), TAU * rng.random::<f64>());
        let p = herglotz_series(&single(s1)?, config.order);
        let q = herglotz_series(&single(s2)?, config.order);
        let two = AtomicMeasure::new(
            vec![
                Atom {
                    s: s1,
                    w: (params.k + 2.0) / 2.0,
                },
                Atom {
                    s: s2,
                    w: -(params.k - 2.0) / 2.0,
                },
            ],
            *params,
        )?;
        let diff = compose_pk(&p, &q, params).max_coeff_diff(&herglotz_series(&two, config.order));
        worst.update(diff, || json!({ "s1": s1, "s2": s2 }));
    }
    Ok(Outcome::Measured(worst))
}

/// `Re H(r) = ω(r)` on `[0, 0.95]`, net of truncation and roundoff.
fn extremal_closed_form(params: &ClassParams) -> Result<Outcome> {
    let top = SAMPLE_RADIUS;
    let h = extremal_h(params, order_for_budget(params.coeff_bound(), top, EVAL_BUDGET, 64));
    let mut worst = Worst::new();
    for i in 0..=19 {
        let r = top * i as f64 / 19.0;
        let ev = h.eval_with_bound(Complex64::new(r, 0.0))?;
        let omega = omega_bound(r, params);
        let gap = (ev.value.re - omega).abs() - ev.err - horner_roundoff(&h, r);
        worst.update(gap, || json!({ "r": r, "value": ev.value.re, "omega": omega }));
    }
    Ok(Outcome::Measured(worst))
}

// ---------------------------------------------------------------------------
// per class cell and transform

pub(super) fn cell_spec_checks(
    params: &ClassParams,
    spec: &TransformSpec,
    sigmas: &[f64],
    config: &SuiteConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<VerificationCase> {
    let p = Some(*params);
    let s = Some(*spec);
    let mut out = Vec::new();
    let members = draw_members(params, config.members, rng);
    let members = members.as_ref().map_err(Clone::clone);

    if spec.n >= 1 {
        out.push(finish(
            "recurrence",
            p,
            s,
            RECURRENCE_TOL,
            members.clone().and_then(|m| recurrence(spec, m, config)),
        ));
    }
    out.push(finish(
        "commutation",
        p,
        s,
        COMMUTATION_TOL,
        members.clone().and_then(|m| commutation(spec, sigmas, m, config, rng)),
    ));
    if spec.j == TransformFamily::Power {
        out.push(finish(
            "f_commutation",
            p,
            s,
            COMMUTATION_TOL,
            members.clone().and_then(|m| f_commutation(spec, m, config, rng)),
        ));
    }
    out.push(finish("sharpness", p, s, SHARPNESS_TOL, sharpness(params, spec, config)));
    out.push(finish(
        "lower_bound",
        p,
        s,
        LOWER_BOUND_TOL,
        members.clone().and_then(|m| lower_bound(params, spec, m, config, rng)),
    ));
    let radius_name = if spec.n == 0 { "radius_sign_change" } else { "radius_containment" };
    out.push(finish(radius_name, p, s, 0.0, transformed_radius(params, spec, config)));
    out.push(finish("extremal_radius", p, s, 0.0, extremal_radius(params, spec, config)));
    out.push(finish(
        "class_inclusion",
        p,
        s,
        roundtrip_tol(spec),
        inclusion(params, spec, config, rng),
    ));

    if spec.n >= 1 {
        let population = class_population(params, spec, config.members, rng);
        let population = population.as_ref().map_err(Clone::clone);
        out.push(with_note(
            finish(
                "class_roundtrip",
                p,
                s,
                roundtrip_tol(spec),
                population.clone().and_then(|pop| roundtrip(spec, pop, config)),
            ),
            &population,
            spec,
        ));
        out.push(with_note(
            finish(
                "quantity_identity",
                p,
                s,
                QUANTITY_TOL,
                population.clone().and_then(|pop| quantity_identity(spec, pop, config)),
            ),
            &population,
            spec,
        ));
        out.push(with_note(
            finish(
                "quantity_bound",
                p,
                s,
                LOWER_BOUND_TOL,
                population.clone().and_then(|pop| quantity_bound(params, spec, pop, config, rng)),
            ),
            &population,
            spec,
        ));
        out.push(finish(
            "quantity_extremal",
            p,
            s,
            SHARPNESS_TOL,
            quantity_extremal(params, spec, config),
        ));
    }
    out
}

/// Records how the `T`-class population was filtered on passing cases.
fn with_note(
    mut case: VerificationCase,
    population: &std::result::Result<&Population, Error>,
    spec: &TransformSpec,
) -> VerificationCase {
    if let (Ok(pop), TransformFamily::Power, None) = (population, spec.j, &case.reason) {
        if spec.sigma != 1.0 {
            case.reason = Some(pop.note());
        }
    }
    case
}

fn require_members(members: &[Member]) -> Option<Outcome> {
    members
        .is_empty()
        .then(|| Outcome::Skipped("no admissible member found".into()))
}

fn recurrence(spec: &TransformSpec, members: &[Member], config: &SuiteConfig) -> Result<Outcome> {
    let mut worst = Worst::new();
    for m in members {
        let r = recurrence_residual(spec, &m.series(config.order))?;
        worst.update(r, || m.witness());
    }
    Ok(Outcome::Measured(worst))
}

/// Commutation with a one-level transform of the same family and a random `σ'` from the grid.
fn commutation(
    spec: &TransformSpec,
    sigmas: &[f64],
    members: &[Member],
    config: &SuiteConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome> {
    let valid: Vec<f64> = sigmas.iter().copied().filter(|s| *s > 0.0 && s.is_finite()).collect();
    let mut worst = Worst::new();
    for m in members {
        let sigma = valid[rng.random_range(0..valid.len())];
        let partner = TransformSpec::new(spec.j, sigma, 1)?;
        let r = commutation_residual(spec, &partner, &m.series(config.order))?;
        worst.update(r, || json!({ "member": m.witness(), "partner": partner }));
    }
    Ok(Outcome::Measured(worst))
}

/// `F^κ` with `κ = σ` and random `c ∈ [0, 3)` commutes with `φ^1_{σ,n}`.
fn f_commutation(spec: &TransformSpec, members: &[Member], config: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = Worst::new();
    for m in members {
        let c = 3.0 * rng.random::<f64>();
        let kappa = spec.sigma;
        let h = m.series(config.order);
        let lhs = apply_f(c, kappa, &apply_phi(spec, &h)?)?;
        let rhs = apply_phi(spec, &apply_f(c, kappa, &h)?)?;
        let diff = lhs.max_coeff_diff(&rhs);
        worst.update(diff, || json!({ "member": m.witness(), "c": c, "kappa": kappa }));
    }
    Ok(Outcome::Measured(worst))
}

/// `Re φ(H)(r)` equals the lower bound at the sample radii.
fn sharpness(params: &ClassParams, spec: &TransformSpec, config: &SuiteConfig) -> Result<Outcome> {
    let top = SHARP_RADII[SHARP_RADII.len() - 1];
    let order = order_for_budget(params.coeff_bound(), top, EVAL_BUDGET, config.order);
    let g = apply_phi(spec, &extremal_h(params, order))?;
    let mut worst = Worst::new();
    for &r in &SHARP_RADII {
        let ev = g.eval_with_bound(Complex64::new(r, 0.0))?;
        let bound = lower_bound_at(spec, params, r);
        let gap = (ev.value.re - bound).abs() - ev.err - horner_roundoff(&g, r);
        worst.update(gap, || json!({ "r": r, "value": ev.value.re, "bound": bound }));
    }
    Ok(Outcome::Measured(worst))
}

/// `Re φ(h)(z) >= bound(|z|)` at random points for random members.
fn lower_bound(
    params: &ClassParams,
    spec: &TransformSpec,
    members: &[Member],
    config: &SuiteConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome> {
    let order = order_for_budget(params.coeff_bound(), SAMPLE_RADIUS, SAMPLE_BUDGET, config.order);
    let mut worst = Worst::new();
    for m in members {
        let g = apply_phi(spec, &m.series(order))?;
        // the roundoff bound grows with |z|, so its value at the largest radius covers every sample
        let roundoff = horner_roundoff(&g, SAMPLE_RADIUS);
        for _ in 0..config.samples {
            let z = random_point(rng, SAMPLE_RADIUS);
            let ev = g.eval_with_bound(z)?;
            let r = z.norm();
            let bound = lower_bound_at(spec, params, r);
            let violation = bound - ev.value.re - ev.err - roundoff;
            worst.update(violation, || {
                json!({ "member": m.witness(), "z": [z.re, z.im], "value": ev.value.re, "bound": bound })
            });
        }
    }
    Ok(Outcome::Measured(worst))
}

/// Probe radii around `r(k, β)`: `(inside, Some(outside))`, or `(0.95, None)` when the radius is 1.
fn radius_probes(params: &ClassParams) -> (f64, Option<f64>) {
    let r = radius_closed_form(params);
    if r >= 1.0 {
        (SAMPLE_RADIUS, None)
    } else {
        (r - RADIUS_OFFSET, Some(r + RADIUS_OFFSET))
    }
}

/// Sign test of `min Re g` around `r(k, β)`. `err(r)` bounds how far the
/// stored series can be from the function it represents on `|z| = r`.
/// With `require_outside` the minimum must also be negative just outside.
fn sign_violation(
    g: &TruncatedSeries,
    params: &ClassParams,
    err: impl Fn(f64) -> f64,
    require_outside: bool,
) -> Result<Worst> {
    let (inside, outside) = radius_probes(params);
    let m_in = g.min_re_on_circle(inside, DEFAULT_GRID)?;
    let mut violation = err(inside) + horner_roundoff(g, inside) - m_in;
    let mut m_out = None;
    if let (true, Some(r)) = (require_outside, outside) {
        let m = g.min_re_on_circle(r, DEFAULT_GRID)?;
        violation = violation.max(m + err(r) + horner_roundoff(g, r));
        m_out = Some(m);
    }
    Ok(Worst {
        value: violation,
        witness: json!({ "inside": inside, "min_inside": m_in, "outside": outside, "min_outside": m_out }),
    })
}

fn probe_order(params: &ClassParams, config: &SuiteConfig) -> usize {
    let (inside, outside) = radius_probes(params);
    order_for_budget(params.coeff_bound(), outside.unwrap_or(inside), EVAL_BUDGET, config.order)
}

/// `φ(H)` is positive inside `r(k, β)`. At `n = 0` it must also turn
/// negative just outside; for `n >= 1` the transformed positivity disk is
/// larger, so only containment is tested.
fn transformed_radius(params: &ClassParams, spec: &TransformSpec, config: &SuiteConfig) -> Result<Outcome> {
    let g = apply_phi(spec, &extremal_h(params, probe_order(params, config)))?;
    let worst = sign_violation(&g, params, |r| g.circle_err(r), spec.n == 0)?;
    Ok(Outcome::Measured(worst))
}

/// For the extremal class member built from `H`, the defining quantity
/// (`D^n f^σ/(σ^n z^σ)` or `L^σ_n f/z`) changes sign at `r(k, β)`.
fn extremal_radius(params: &ClassParams, spec: &TransformSpec, config: &SuiteConfig) -> Result<Outcome> {
    if let Some(reason) = extremal_skip_reason(params, spec)? {
        return Ok(Outcome::Skipped(reason));
    }
    let h = extremal_h(params, probe_order(params, config));
    let f = construct(&h, spec)?;
    let d = recover(&f, spec, spec.n)?;
    let drift = d.max_coeff_diff(&h);
    let mut worst = sign_violation(&d, params, |r| h.circle_err(r) + drift_on_circle(drift, r), true)?;
    worst.witness["drift"] = json!(drift);
    Ok(Outcome::Measured(worst))
}

fn roundtrip(spec: &TransformSpec, population: &Population, config: &SuiteConfig) -> Result<Outcome> {
    if let Some(skip) = require_members(&population.members) {
        return Ok(skip);
    }
    let mut worst = Worst::new();
    for m in &population.members {
        let h = m.series(config.order);
        let back = recover(&construct(&h, spec)?, spec, spec.n)?;
        worst.update(back.max_coeff_diff(&h), || m.witness());
    }
    Ok(Outcome::Measured(worst))
}

/// A function built at level `n + 1` is recovered at level `n` as the
/// one-step transform `h'` of its generator, and `h'` still satisfies the
/// class coefficient bound. For `j = 2` the step has exponent `σ - n`.
fn inclusion(params: &ClassParams, spec: &TransformSpec, config: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let upper = match spec.with_levels(spec.n + 1) {
        Ok(u) => u,
        Err(e) => return Ok(Outcome::Skipped(format!("level n + 1 is invalid: {e}"))),
    };
    let step = match spec.j {
        TransformFamily::Power => TransformSpec::power(spec.sigma, 1)?,
        TransformFamily::Shifted => TransformSpec::power(spec.sigma - spec.n as f64, 1)?,
    };
    let population = class_population(params, &upper, config.members, rng)?;
    if let Some(skip) = require_members(&population.members) {
        return Ok(skip);
    }
    let bound = params.coeff_bound();
    let mut worst = Worst::new();
    for m in &population.members {
        let h = m.series(config.order);
        let f = construct(&h, &upper)?;
        let lower_view = recover(&f, spec, spec.n)?;
        let h_step = apply_phi(&step, &h)?;
        let excess = (1..=h_step.order())
            .map(|l| h_step.coeff(l).norm() - bound)
            .fold(f64::NEG_INFINITY, f64::max);
        let diff = lower_view.max_coeff_diff(&h_step).max(excess);
        worst.update(diff, || json!({ "member": m.witness(), "coefficient_excess": excess }));
    }
    Ok(Outcome::Measured(worst))
}

fn quantity_identity(spec: &TransformSpec, population: &Population, config: &SuiteConfig) -> Result<Outcome> {
    if let Some(skip) = require_members(&population.members) {
        return Ok(skip);
    }
    let lowered = spec.lowered()?;
    let mut worst = Worst::new();
    for m in &population.members {
        let h = m.series(config.order);
        let (q_top, q_low) = quantities(&construct(&h, spec)?, spec)?;
        let top = q_top.max_coeff_diff(&apply_phi(spec, &h)?);
        let low = q_low.max_coeff_diff(&apply_phi(&lowered, &h)?);
        worst.update(top.max(low), || json!({ "member": m.witness(), "top": top, "lowered": low }));
    }
    Ok(Outcome::Measured(worst))
}

/// Both quantities obey their lower bounds (levels `n` and `n - 1`) at
/// random points. They equal transforms of `h`, whose coefficients are
/// bounded by `k(1 - β)`, which gives the truncation error.
fn quantity_bound(
    params: &ClassParams,
    spec: &TransformSpec,
    population: &Population,
    config: &SuiteConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome> {
    if let Some(skip) = require_members(&population.members) {
        return Ok(skip);
    }
    let lowered = spec.lowered()?;
    let rate = params.coeff_bound();
    let order = order_for_budget(rate, QUANTITY_RADIUS, SAMPLE_BUDGET, config.order);
    let mut worst = Worst::new();
    for m in &population.members {
        let h = m.series(order);
        let (q_top, q_low) = quantities(&construct(&h, spec)?, spec)?;
        let q_top = q_top.with_tail_bound(rate)?;
        let q_low = q_low.with_tail_bound(rate)?;
        let drift = q_top
            .max_coeff_diff(&apply_phi(spec, &h)?)
            .max(q_low.max_coeff_diff(&apply_phi(&lowered, &h)?));
        let roundoff = horner_roundoff(&q_top, QUANTITY_RADIUS).max(horner_roundoff(&q_low, QUANTITY_RADIUS));
        for _ in 0..config.samples {
            let z = random_point(rng, QUANTITY_RADIUS);
            let r = z.norm();
            for (q, s) in [(&q_top, spec), (&q_low, &lowered)] {
                let ev = q.eval_with_bound(z)?;
                let bound = lower_bound_at(s, params, r);
                let violation = bound - ev.value.re - ev.err - drift_on_circle(drift, r) - roundoff;
                worst.update(violation, || {
                    json!({ "member": m.witness(), "z": [z.re, z.im], "level": s.n, "value": ev.value.re, "bound": bound })
                });
            }
        }
    }
    Ok(Outcome::Measured(worst))
}

/// For `f` built from `H` both quantities attain their bounds on the positive axis.
fn quantity_extremal(params: &ClassParams, spec: &TransformSpec, config: &SuiteConfig) -> Result<Outcome> {
    if let Some(reason) = extremal_skip_reason(params, spec)? {
        return Ok(Outcome::Skipped(reason));
    }
    let lowered = spec.lowered()?;
    let rate = params.coeff_bound();
    let top = SHARP_RADII[SHARP_RADII.len() - 1];
    let h = extremal_h(params, order_for_budget(rate, top, EVAL_BUDGET, config.order));
    let (q_top, q_low) = quantities(&construct(&h, spec)?, spec)?;
    let q_top = q_top.with_tail_bound(rate)?;
    let q_low = q_low.with_tail_bound(rate)?;
    let drift = q_top
        .max_coeff_diff(&apply_phi(spec, &h)?)
        .max(q_low.max_coeff_diff(&apply_phi(&lowered, &h)?));
    let mut worst = Worst::new();
    for &r in &SHARP_RADII {
        for (q, s) in [(&q_top, spec), (&q_low, &lowered)] {
            let ev = q.eval_with_bound(Complex64::new(r, 0.0))?;
            let bound = lower_bound_at(s, params, r);
            let gap = (ev.value.re - bound).abs() - ev.err - drift_on_circle(drift, r) - horner_roundoff(q, r);
            worst.update(gap, || json!({ "r": r, "level": s.n, "value": ev.value.re, "bound": bound, "drift": drift }));
        }
    }
    Ok(Outcome::Measured(worst))
}
