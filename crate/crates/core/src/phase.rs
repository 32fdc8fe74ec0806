//! Classical phase-space quantities: sublevel volumes `σ(λ) = |{V < λ}|` and
//! the Weyl integral `Φ(λ) = (2π)^{-n} ω_n ∫ (λ − V)₊^{n/2} dvol`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::invariants;
use crate::models::{unit_ball_volume, GeometryModel, PotentialModel};
use crate::quadrature::{integrate_with_breaks, Estimate};

pub use crate::quadrature::QuadratureSettings;

/// Above this radius (and ratio to the inner end) integrals are taken in
/// `u = ln r`, which keeps the exponentially long log-potential domains cheap.
const LOG_SUBSTITUTION_RADIUS: f64 = 64.0;

fn check_level(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "energy must be positive and finite, got {lambda}"
        )));
    }
    Ok(())
}

fn finite_sublevel(v: &PotentialModel, level: f64) -> Result<Vec<(f64, f64)>> {
    let set = v.sublevel(level);
    if set.iter().any(|iv| !iv.1.is_finite()) {
        return Err(Error::Infeasible(format!(
            "sublevel set {{V < {level}}} of {v} has a radius beyond f64 range"
        )));
    }
    Ok(set)
}

/// `σ(λ)`: volume of `{V < λ}` from the closed-form ball volumes.
/// Nondecreasing and left-continuous in `λ`.
pub fn sigma(geometry: &GeometryModel, v: &PotentialModel, lambda: f64) -> Result<f64> {
    check_level(lambda)?;
    let vol: f64 = finite_sublevel(v, lambda)?
        .iter()
        .map(|&(a, b)| geometry.ball_volume(b) - geometry.ball_volume(a))
        .sum();
    if !vol.is_finite() {
        return Err(Error::Infeasible(format!(
            "σ({lambda}) overflows on {geometry}"
        )));
    }
    Ok(vol)
}

/// Integrate `f(r) w(r)` over `[a, b]`, splitting at `breaks` and switching to
/// `u = ln r` on the far part of long domains.
pub(crate) fn radial_integral<F: Fn(f64) -> f64>(
    geometry: &GeometryModel,
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    settings: &QuadratureSettings,
) -> Result<Estimate> {
    if b <= a {
        return Ok(Estimate::ZERO);
    }
    let g = |r: f64| {
        if r > 0.0 {
            f(r) * geometry.volume_weight_unchecked(r)
        } else {
            0.0
        }
    };
    let inner: Vec<f64> = breaks.iter().copied().filter(|&p| p > a && p < b).collect();
    let pivot = a.max(1.0);
    if b <= LOG_SUBSTITUTION_RADIUS || b / pivot <= LOG_SUBSTITUTION_RADIUS {
        let mut pts = vec![a];
        pts.extend(&inner);
        pts.push(b);
        return integrate_with_breaks(g, &pts, settings);
    }
    let mut total = Estimate::ZERO;
    if a < pivot {
        let mut pts = vec![a];
        pts.extend(inner.iter().copied().filter(|&p| p < pivot));
        pts.push(pivot);
        total = total + integrate_with_breaks(g, &pts, settings)?;
    }
    let mut pts = vec![pivot.ln()];
    pts.extend(inner.iter().filter(|&&p| p > pivot).map(|p| p.ln()));
    pts.push(b.ln());
    let h = |u: f64| {
        let r = u.exp();
        g(r) * r
    };
    Ok(total + integrate_with_breaks(h, &pts, settings)?)
}

/// `∫_{V < level} (λ − V)^p dvol` for `level ≤ λ`; with `level = λ` this is
/// the unnormalised Weyl integral.
pub fn classical_integral(
    geometry: &GeometryModel,
    v: &PotentialModel,
    lambda: f64,
    level: f64,
    p: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate> {
    check_level(lambda)?;
    if level > lambda {
        return Err(Error::Domain(format!(
            "region level {level} exceeds λ = {lambda}"
        )));
    }
    let mut total = Estimate::ZERO;
    for (a, b) in finite_sublevel(v, level)? {
        let breaks = v.breakpoints(a, b);
        let f = |r: f64| (lambda - v.eval(r)).max(0.0).powf(p);
        total = total + radial_integral(geometry, f, a, b, &breaks, settings)?;
    }
    Ok(total)
}

/// Prefactor `(2π)^{-n} ω_n` of the Weyl integral.
pub fn weyl_constant(n: usize) -> f64 {
    (2.0 * PI).powi(-(n as i32)) * unit_ball_volume(n)
}

/// `Φ(λ)` with its quadrature error estimate. On the cylinder the S¹ fibre is
/// carried by the volume weight, so this equals `½ ∫_ℝ (λ − V)₊ dx`.
pub fn phi(
    geometry: &GeometryModel,
    v: &PotentialModel,
    lambda: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate> {
    let n = geometry.dim();
    let raw = classical_integral(geometry, v, lambda, lambda, n as f64 / 2.0, settings)?;
    Ok(raw.scale(weyl_constant(n)))
}

/// Outcome of the structural inequalities tying `a(λ)` and `d_δ(λ)` to the
/// sublevel geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthCheck {
    pub a: f64,
    pub d_delta: f64,
    /// `a^{n/2} |Ω_{λ+δa} \ Ω_{λ−δa}|`
    pub shell_lhs: f64,
    /// `2 ∫_{Ω_{λ−a}} (λ − V)₊^{n/2}`
    pub shell_rhs: f64,
    pub shell_ok: bool,
    pub d_below_lambda: bool,
}

/// Slack on the shell inequality: at the supremum defining `a(λ)` it can hold
/// with equality up to quadrature error.
pub const GROWTH_SLACK: f64 = 1e-6;

pub fn check_growth_inequalities(
    geometry: &GeometryModel,
    v: &PotentialModel,
    lambda: f64,
    delta: f64,
    settings: &QuadratureSettings,
) -> Result<GrowthCheck> {
    if !(lambda > 3.0) {
        return Err(Error::Domain(format!(
            "growth inequalities need λ > 3, got {lambda}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("δ must lie in (0, 1), got {delta}")));
    }
    let a = invariants::a_of_lambda(geometry, v, lambda)?;
    let d = invariants::d_delta(geometry, v, lambda, delta, settings)?;
    let half_n = geometry.dim() as f64 / 2.0;
    let sig = |s: f64| {
        if s > 0.0 {
            sigma(geometry, v, s)
        } else {
            Ok(0.0)
        }
    };
    let shell = sig(lambda + delta * a)? - sig(lambda - delta * a)?;
    let shell_lhs = a.powf(half_n) * shell;
    let inner_level = lambda - a;
    let shell_rhs = if inner_level > 0.0 {
        2.0 * classical_integral(geometry, v, lambda, inner_level, half_n, settings)?.value
    } else {
        0.0
    };
    Ok(GrowthCheck {
        a,
        d_delta: d,
        shell_lhs,
        shell_rhs,
        shell_ok: shell_lhs <= shell_rhs * (1.0 + GROWTH_SLACK),
        d_below_lambda: d < lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    #[test]
    fn sigma_examples() {
        let line = GeometryModel::line();
        let x2 = PotentialModel::power(2.0).unwrap();
        assert!((sigma(&line, &x2, 4.0).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(sigma(&line, &x2, 0.5).unwrap(), 0.0);
        let h3 = GeometryModel::hyperbolic3();
        let sq = PotentialModel::power(0.5).unwrap();
        let got = sigma(&h3, &sq, 2.0).unwrap();
        let want = PI * (8f64.sinh() - 8.0);
        assert!(((got - want) / want).abs() < 1e-14);
        assert!((got - 4657.35).abs() < 0.01, "{got}");
        assert!(sigma(&line, &x2, 0.0).is_err());
    }

    #[test]
    fn phi_examples() {
        let line = GeometryModel::line();
        let ho = PotentialModel::harmonic_oscillator();
        let p = phi(&line, &ho, 10.0, &s()).unwrap();
        assert!((p.value - 5.0).abs() < 1e-9, "{p:?}");
        for g in [
            line,
            GeometryModel::cylinder(),
            GeometryModel::hyperbolic3(),
        ] {
            let v = PotentialModel::power(2.0).unwrap();
            assert_eq!(phi(&g, &v, 1.0, &s()).unwrap().value, 0.0);
        }
        for lam in [4.0, 16.0, 64.0] {
            let p = phi(&line, &ho, lam, &s()).unwrap().value;
            assert!((p / lam - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn cylinder_phi_is_half_line_integral() {
        let cyl = GeometryModel::cylinder();
        let v = PotentialModel::log_power(1.0, 0.5).unwrap();
        let lam = 3.0;
        let p = phi(&cyl, &v, lam, &s()).unwrap().value;
        // ∫_0^∞ (λ − V)₊ dr: V = 1 on (0, e), then r = e^{y²}
        let tail = crate::quadrature::integrate(
            |y: f64| (lam - y) * 2.0 * y * (y * y).exp(),
            1.0,
            lam,
            &s(),
        )
        .unwrap()
        .value;
        let oracle_total = (lam - 1.0) * 1f64.exp() + tail;
        assert!(
            ((p - oracle_total) / oracle_total).abs() < 1e-8,
            "{p} vs {oracle_total}"
        );
    }

    #[test]
    fn growth_examples() {
        let line = GeometryModel::line();
        let ho = PotentialModel::harmonic_oscillator();
        let g = check_growth_inequalities(&line, &ho, 10.0, 0.3, &s()).unwrap();
        assert!((g.a - 6.0).abs() < 1e-6);
        assert!(g.shell_ok && g.d_below_lambda);
        let g = check_growth_inequalities(&line, &ho, 10.0, 1e-9, &s()).unwrap();
        assert!(g.shell_ok && g.d_below_lambda && g.shell_lhs < 1e-6);
        let h3 = GeometryModel::hyperbolic3();
        let v = PotentialModel::power(2.0).unwrap();
        let g = check_growth_inequalities(&h3, &v, 9.0, 0.2, &s()).unwrap();
        assert!(g.shell_ok && g.d_below_lambda, "{g:?}");
    }

    #[test]
    fn halving_tolerance_is_self_consistent() {
        let h3 = GeometryModel::hyperbolic3();
        let v = PotentialModel::power(2.0).unwrap();
        let a = phi(&h3, &v, 25.0, &s().with_rel_tol(1e-8)).unwrap();
        let b = phi(&h3, &v, 25.0, &s().with_rel_tol(5e-9)).unwrap();
        assert!((a.value - b.value).abs() <= a.abs_err + b.abs_err);
    }

    #[test]
    fn long_log_domain_uses_substitution() {
        // V = ln r on the line: Φ(λ) = (2/π) ∫_0^{e^λ} (λ − max(1, ln r))^{1/2} dr
        let line = GeometryModel::line();
        let v = PotentialModel::log_power(1.0, 1.0).unwrap();
        let lam = 20.0;
        let p = phi(&line, &v, lam, &s()).unwrap().value;
        let tail = crate::quadrature::integrate(
            |u: f64| (lam - u).max(0.0).sqrt() * u.exp(),
            1.0,
            lam,
            &s(),
        )
        .unwrap()
        .value;
        let oracle = 2.0 * ((lam - 1.0).sqrt() * 1f64.exp() + tail) / PI;
        assert!(((p - oracle) / oracle).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn sigma_and_phi_monotone(l1 in 0.1f64..30.0, l2 in 0.1f64..30.0, which in 0usize..4) {
            let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
            let (g, v) = match which {
                0 => (GeometryModel::line(), PotentialModel::harmonic_oscillator()),
                1 => (GeometryModel::cylinder(), PotentialModel::log_power(1.0, 2.0).unwrap()),
                2 => (GeometryModel::hyperbolic3(), PotentialModel::power(2.0).unwrap()),
                _ => (GeometryModel::euclidean(2).unwrap(), PotentialModel::power(1.0).unwrap()),
            };
            prop_assert!(sigma(&g, &v, lo).unwrap() <= sigma(&g, &v, hi).unwrap());
            let st = QuadratureSettings::default().with_rel_tol(1e-9);
            prop_assert!(phi(&g, &v, lo, &st).unwrap().value <= phi(&g, &v, hi, &st).unwrap().value * (1.0 + 1e-9));
        }
    }
}
