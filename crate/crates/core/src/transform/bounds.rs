use super::TransformSpec;
use crate::caratheodory::ClassParams;

/// Half-width of the band around `β = 1/2` where `r = 2/k` is used directly.
pub const BRANCH_TOL: f64 = 1e-12;

/// Radius `r(k, β)` of the largest disk on which every member of `P_k(β)`
/// has positive real part: the smallest positive root of
/// `(1 - 2β) ρ² - (1 - β) k ρ + 1`.
///
/// Away from `β = 1/2` the root is computed in the rationalised form
/// `2 / ((1-β)k + sqrt((1-β)²k² - 4(1-2β)))`, which equals the textbook
/// quotient but does not cancel as `1 - 2β → 0`.
pub fn radius_closed_form(params: &ClassParams) -> f64 {
    let ClassParams { k, beta } = *params;
    let a = 1.0 - 2.0 * beta;
    let r = if a.abs() < BRANCH_TOL {
        2.0 / k
    } else {
        let b = (1.0 - beta) * k;
        2.0 / (b + (b * b - 4.0 * a).sqrt())
    };
    r.min(1.0)
}

/// Sharp lower bound `((1-2β)ρ² - (1-β)kρ + 1) / (1 - ρ²)` for `Re h` on `|z| = ρ`.
pub fn omega_bound(rho: f64, params: &ClassParams) -> f64 {
    let ClassParams { k, beta } = *params;
    ((1.0 - 2.0 * beta) * rho * rho - (1.0 - beta) * k * rho + 1.0) / (1.0 - rho * rho)
}

fn tail_after(params: &ClassParams, r: f64, terms: usize) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    (1.0 - params.beta) * (params.k + 2.0) * r.powi(2 * terms as i32 + 1) / (1.0 - r * r)
}

/// Fewest pairs of terms for which the neglected part of
/// [`transformed_lower_bound`] is at most `budget`.
pub fn lower_bound_terms(params: &ClassParams, r: f64, budget: f64) -> usize {
    let mut terms = 1;
    while tail_after(params, r, terms) > budget && terms < 1 << 20 {
        terms *= 2;
    }
    let (mut lo, mut hi) = (terms / 2, terms);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if tail_after(params, r, mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.max(1)
}

/// Lower bound for `Re φ^j_{σ,n}(h)` on `|z| = r` over all `h ∈ P_k(β)`:
///
/// ```text
/// 1 + (1 - β) Σ_{l>=1} (2 c_{2l,n} r - k c_{2l-1,n}) r^{2l-1}
/// ```
///
/// summed over `terms` pairs. Every pair is at most `(1-β)(k+2) r^{2l-1}` in
/// size, so subtracting that geometric tail keeps the result a lower bound.
pub fn transformed_lower_bound(spec: &TransformSpec, params: &ClassParams, r: f64, terms: usize) -> f64 {
    let ClassParams { k, beta } = *params;
    let mut sum = 0.0;
    let mut power = r;
    for l in 1..=terms {
        let odd = spec.coeff_multiplier(2 * l - 1);
        let even = spec.coeff_multiplier(2 * l);
        sum += (2.0 * even * r - k * odd) * power;
        power *= r * r;
    }
    1.0 + (1.0 - beta) * sum - tail_after(params, r, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: f64, beta: f64) -> ClassParams {
        ClassParams::new(k, beta).unwrap()
    }

    /// The quotient exactly as usually printed, without rationalising.
    fn printed_radius(k: f64, beta: f64) -> f64 {
        let a = 1.0 - 2.0 * beta;
        ((1.0 - beta) * k - ((1.0 - beta).powi(2) * k * k - 4.0 * a).sqrt()) / (2.0 * a)
    }

    #[test]
    fn radius_anchors() {
        assert_eq!(radius_closed_form(&params(2.0, 0.0)), 1.0);
        assert_eq!(radius_closed_form(&params(4.0, 0.5)), 0.5);
        assert!((radius_closed_form(&params(4.0, 0.0)) - (2.0 - 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn k_two_always_gives_unit_radius() {
        for &beta in &[0.0, 0.25, 0.5, 0.75, 0.99] {
            assert!((radius_closed_form(&params(2.0, beta)) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rationalised_form_matches_printed_quotient() {
        for &k in &[2.5, 3.0, 4.0, 6.0, 10.0] {
            for &beta in &[0.0, 0.1, 0.25, 0.4, 0.6, 0.75, 0.9] {
                let r = radius_closed_form(&params(k, beta));
                assert!((r - printed_radius(k, beta)).abs() < 1e-12, "k {k} beta {beta}");
                assert!(r > 0.0 && r <= 1.0);
            }
        }
    }

    #[test]
    fn branches_agree_near_half() {
        for &k in &[2.5, 4.0, 6.0] {
            for &eps in &[1e-3, 1e-5, 1e-8] {
                for beta in [0.5 - eps, 0.5 + eps] {
                    let r = radius_closed_form(&params(k, beta));
                    assert!((r - 2.0 / k).abs() <= 2.0 * eps, "k {k} beta {beta}");
                }
            }
            // just inside the branch band
            let r = radius_closed_form(&params(k, 0.5 + 1e-13));
            assert_eq!(r, 2.0 / k);
        }
    }

    #[test]
    fn omega_examples() {
        let p = params(4.0, 0.25);
        assert_eq!(omega_bound(0.0, &p), 1.0);
        let classical = params(2.0, 0.0);
        for &rho in &[0.1, 0.5, 0.9] {
            assert!((omega_bound(rho, &classical) - (1.0 - rho) / (1.0 + rho)).abs() < 1e-15);
        }
        for &(k, beta) in &[(2.5, 0.0), (3.0, 0.75), (4.0, 0.5), (6.0, 0.25)] {
            let p = params(k, beta);
            assert!(omega_bound(radius_closed_form(&p), &p).abs() < 1e-12);
        }
        assert!((omega_bound(0.2, &params(4.0, 0.0)) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn lower_bound_collapses_to_omega_at_level_zero() {
        let spec = TransformSpec::power(2.5, 0).unwrap();
        for &(k, beta) in &[(2.0, 0.0), (4.0, 0.0), (3.0, 0.75)] {
            let p = params(k, beta);
            for &r in &[0.0, 0.1, 0.3, 0.5, 0.7] {
                let terms = lower_bound_terms(&p, r, 1e-12);
                let b = transformed_lower_bound(&spec, &p, r, terms);
                assert!((b - omega_bound(r, &p)).abs() < 1e-11, "k {k} beta {beta} r {r}");
                assert!(b <= omega_bound(r, &p) + 1e-14);
            }
        }
    }

    #[test]
    fn terms_meet_budget() {
        let p = params(6.0, 0.0);
        for &r in &[0.1, 0.5, 0.9, 0.95] {
            let t = lower_bound_terms(&p, r, 1e-10);
            assert!(tail_after(&p, r, t) <= 1e-10);
            assert!(t == 1 || tail_after(&p, r, t - 1) > 1e-10);
        }
    }

    #[test]
    fn few_terms_stay_below() {
        let spec = TransformSpec::shifted(2.5, 2).unwrap();
        let p = params(4.0, 0.25);
        let exact = transformed_lower_bound(&spec, &p, 0.6, lower_bound_terms(&p, 0.6, 1e-14));
        for terms in 1..10 {
            assert!(transformed_lower_bound(&spec, &p, 0.6, terms) <= exact + 1e-14);
        }
    }
}
