//! Growth and oscillation scales of a potential and the criterion
//! `c_δ(λ) = (1 + K_δ b_δ²) / (a b_δ²)`.
//!
//! * `a(λ) = sup{s : 2σ(λ−s) ≥ σ(λ+s)}`
//! * `d_δ(λ) = sup{s : λ^{n/2} σ(s) ≤ δ ∫ (λ−V)₊^{n/2}}`
//! * `b_δ(λ)`: the largest radius `r` (below the injectivity radius) such that
//!   `osc_{B_r(x)} V ≤ δ² a(λ)` for every `x` in the shell `Ω_{λ+δa} \ Ω_{d_δ}`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{oscillation, CurvatureBounds, GeometryModel, PotentialModel, RadialInterval};
use crate::phase::{self, QuadratureSettings};

/// Search cap for `b_δ` on models with infinite injectivity radius.
pub const B_CAP: f64 = 1e12;

const GRID_POINTS: usize = 65;
const GRID_ROUNDS: usize = 6;

/// Supremum of a predicate that is true on `[lo, s*)` and false above, given
/// `pred(lo)` true and `pred(hi)` false. The returned value satisfies the
/// predicate; anything a relative `1e-12` above it does not.
pub fn sup_of_predicate<P: FnMut(f64) -> Result<bool>>(
    mut lo: f64,
    mut hi: f64,
    mut pred: P,
) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) || hi - lo <= 1e-13 * hi.abs() {
            break;
        }
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `a(λ)` for an arbitrary sublevel-volume function (values at arguments
/// ≤ 0 are taken as 0).
pub fn growth_scale<S: Fn(f64) -> Result<f64>>(sigma: S, lambda: f64) -> Result<f64> {
    let sig = |x: f64| if x > 0.0 { sigma(x) } else { Ok(0.0) };
    if sig(lambda)? <= 0.0 {
        return Err(Error::BelowClassicalSpectrum(lambda));
    }
    // the predicate fails at s = λ because σ(0) = 0 < σ(2λ)
    sup_of_predicate(0.0, lambda, |s| {
        Ok(2.0 * sig(lambda - s)? >= sig(lambda + s)?)
    })
}

pub fn a_of_lambda(geometry: &GeometryModel, v: &PotentialModel, lambda: f64) -> Result<f64> {
    if !(lambda >= 3.0) {
        return Err(Error::Domain(format!(
            "a(λ) is defined for λ ≥ 3, got {lambda}"
        )));
    }
    growth_scale(|x| phase::sigma(geometry, v, x), lambda)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("δ must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

pub fn d_delta(
    geometry: &GeometryModel,
    v: &PotentialModel,
    lambda: f64,
    delta: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    check_delta(delta)?;
    let half_n = geometry.dim() as f64 / 2.0;
    let target =
        delta * phase::classical_integral(geometry, v, lambda, lambda, half_n, settings)?.value;
    if !(target > 0.0) {
        return Err(Error::ZeroWeylIntegral(lambda));
    }
    let scale = lambda.powf(half_n);
    let sig = |x: f64| {
        if x > 0.0 {
            phase::sigma(geometry, v, x)
        } else {
            Ok(0.0)
        }
    };
    // λ^{n/2} σ(λ) > δ ∫ (λ−V)^{n/2} since δ < 1, so the sup lies below λ
    sup_of_predicate(0.0, lambda, |s| Ok(scale * sig(s)? <= target))
}

/// Radial intervals of `{lo_level ≤ V < hi_level}`.
pub fn shell(v: &PotentialModel, lo_level: f64, hi_level: f64) -> Vec<(f64, f64)> {
    let outer = v.sublevel(hi_level);
    let inner = v.sublevel(lo_level);
    let mut out = Vec::new();
    for (a, b) in outer {
        let mut cur = a;
        for &(c, d) in &inner {
            if d <= cur || c >= b {
                continue;
            }
            if c > cur {
                out.push((cur, c));
            }
            cur = cur.max(d);
        }
        if cur < b {
            out.push((cur, b));
        }
    }
    out
}

fn grid(lo: f64, hi: f64) -> Vec<f64> {
    let n = GRID_POINTS - 1;
    if lo > 0.0 && hi / lo > 100.0 {
        let (l0, l1) = (lo.ln(), hi.ln());
        (0..=n)
            .map(|i| (l0 + (l1 - l0) * i as f64 / n as f64).exp())
            .collect()
    } else {
        (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .collect()
    }
}

/// Largest oscillation over balls of radius `r` centred anywhere in `[lo, hi]`,
/// located on a grid that is refined around the running maximum.
fn max_oscillation_on(
    v: &PotentialModel,
    geometry: &GeometryModel,
    lo: f64,
    hi: f64,
    r: f64,
) -> Result<f64> {
    let osc = |x: f64| oscillation(v, geometry, x, r);
    let mut best = osc(lo)?.max(osc(hi)?);
    let (mut a, mut b) = (lo, hi);
    for _ in 0..=GRID_ROUNDS {
        let pts = grid(a, b);
        let mut arg = 0;
        let mut local = f64::NEG_INFINITY;
        for (i, &x) in pts.iter().enumerate() {
            let o = osc(x)?;
            if o > local {
                local = o;
                arg = i;
            }
        }
        best = best.max(local);
        a = pts[arg.saturating_sub(1)];
        b = pts[(arg + 1).min(pts.len() - 1)];
        if !(b > a) {
            break;
        }
    }
    Ok(best)
}

/// `b_δ(λ)` together with how the search ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationRadius {
    pub value: f64,
    /// The search reached [`B_CAP`] on a model with infinite injectivity radius.
    pub effectively_infinite: bool,
    /// The value is the injectivity radius (cylinder) rather than an
    /// oscillation-limited radius.
    pub injectivity_capped: bool,
    pub shell: (f64, f64),
}

pub fn b_delta(
    geometry: &GeometryModel,
    v: &PotentialModel,
    lambda: f64,
    delta: f64,
    a: f64,
    d: f64,
) -> Result<OscillationRadius> {
    check_delta(delta)?;
    let intervals = shell(v, d, lambda + delta * a);
    if intervals.is_empty() {
        return Err(Error::InvariantViolation(format!(
            "empty shell {{{d} ≤ V < {}}} at λ = {lambda}",
            lambda + delta * a
        )));
    }
    if intervals.iter().any(|iv| !iv.1.is_finite()) {
        return Err(Error::Infeasible(format!(
            "shell at λ = {lambda} extends beyond f64 range"
        )));
    }
    let threshold = delta * delta * a;
    let inj = geometry.injectivity_radius();
    let cap = if inj.is_finite() {
        inj * (1.0 - 1e-12)
    } else {
        B_CAP
    };
    let holds = |r: f64| -> Result<bool> {
        for &(lo, hi) in &intervals {
            if max_oscillation_on(v, geometry, lo, hi, r)? > threshold {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let span = (intervals[0].0, intervals.last().unwrap().1);
    if holds(cap)? {
        return Ok(OscillationRadius {
            value: if inj.is_finite() { inj } else { cap },
            effectively_infinite: !inj.is_finite(),
            injectivity_capped: inj.is_finite(),
            shell: span,
        });
    }
    // geometric expansion to bracket the sup, then bisection
    let mut lo = 0.0;
    let mut hi = (span.1 - span.0).max(1e-6).min(cap);
    while holds(hi)? {
        lo = hi;
        hi = (hi * 4.0).min(cap);
    }
    let value = sup_of_predicate(lo, hi, holds)?;
    Ok(OscillationRadius {
        value,
        effectively_infinite: false,
        injectivity_capped: false,
        shell: span,
    })
}

/// `(1 + K b²)/(a b²) = (1/b² + K)/a`, with `1/b² = 0` for an effectively
/// infinite `b`.
pub fn criterion_value(k: f64, a: f64, b: f64, b_infinite: bool) -> f64 {
    let inv_b2 = if b_infinite { 0.0 } else { 1.0 / (b * b) };
    (inv_b2 + k) / a
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub lambda: f64,
    pub delta: f64,
    pub sigma: f64,
    pub phi: f64,
    pub a: f64,
    pub d_delta: f64,
    pub b_delta: f64,
    pub b_effectively_infinite: bool,
    pub b_injectivity_capped: bool,
    pub curvature: CurvatureBounds,
    pub k: f64,
    pub c_delta: f64,
    /// `σ(2λ)/σ(λ)`; `+∞` when `σ(2λ)` is beyond `f64` range.
    pub doubling_ratio: f64,
}

impl InvariantReport {
    /// Structural inequalities every report must satisfy.
    pub fn check(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvariantViolation(m));
        if !(self.d_delta < self.lambda) {
            return fail(format!("d_δ = {} ≥ λ = {}", self.d_delta, self.lambda));
        }
        if !(self.a >= 0.0 && self.a <= self.lambda) {
            return fail(format!("a = {} outside [0, λ = {}]", self.a, self.lambda));
        }
        if self.k != self.curvature.weight() {
            return fail("K is not R + S^{2/3} + T^{1/2}".into());
        }
        let positive_required = !self.b_effectively_infinite || self.k > 0.0;
        if self.c_delta < 0.0 || (positive_required && !(self.c_delta > 0.0)) {
            return fail(format!("c_δ = {} has the wrong sign", self.c_delta));
        }
        Ok(())
    }
}

/// Ratio `σ(2λ)/σ(λ)`, `None` when `σ(λ) = 0`.
fn doubling_ratio(
    geometry: &GeometryModel,
    v: &PotentialModel,
    lambda: f64,
) -> Result<Option<f64>> {
    let base = phase::sigma(geometry, v, lambda)?;
    if base == 0.0 {
        return Ok(None);
    }
    match phase::sigma(geometry, v, 2.0 * lambda) {
        Ok(top) => Ok(Some(top / base)),
        Err(Error::Infeasible(_)) => Ok(Some(f64::INFINITY)),
        Err(e) => Err(e),
    }
}

pub fn c_delta(
    geometry: &GeometryModel,
    v: &PotentialModel,
    lambda: f64,
    delta: f64,
    settings: &QuadratureSettings,
) -> Result<InvariantReport> {
    check_delta(delta)?;
    let sigma = phase::sigma(geometry, v, lambda)?;
    let phi = phase::phi(geometry, v, lambda, settings)?.value;
    let a = a_of_lambda(geometry, v, lambda)?;
    let d = d_delta(geometry, v, lambda, delta, settings)?;
    let b = b_delta(geometry, v, lambda, delta, a, d)?;
    // curvature over the b-neighbourhood of the shell; constant on model spaces
    let region = RadialInterval::new((b.shell.0 - b.value).max(0.0), b.shell.1 + b.value)?;
    let curvature = geometry.curvature_bounds(&region);
    let k = curvature.weight();
    let report = InvariantReport {
        lambda,
        delta,
        sigma,
        phi,
        a,
        d_delta: d,
        b_delta: b.value,
        b_effectively_infinite: b.effectively_infinite,
        b_injectivity_capped: b.injectivity_capped,
        curvature,
        k,
        c_delta: criterion_value(k, a, b.value, b.effectively_infinite),
        doubling_ratio: doubling_ratio(geometry, v, lambda)?.unwrap_or(f64::NAN),
    };
    report.check()?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublingReport {
    pub lambdas: Vec<f64>,
    /// `None` marks a skipped point (`σ(λ) = 0`).
    pub ratios: Vec<Option<f64>>,
    pub bound: f64,
    pub holds: bool,
}

/// `σ(2λ)/σ(λ)` over a grid; doubling holds empirically iff every computed
/// ratio is at most `bound`.
pub fn doubling_check(
    geometry: &GeometryModel,
    v: &PotentialModel,
    lambdas: &[f64],
    bound: f64,
) -> Result<DoublingReport> {
    let ratios = lambdas
        .iter()
        .map(|&l| doubling_ratio(geometry, v, l))
        .collect::<Result<Vec<_>>>()?;
    let holds = ratios.iter().flatten().all(|&r| r <= bound);
    Ok(DoublingReport {
        lambdas: lambdas.to_vec(),
        ratios,
        bound,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendVerdict {
    pub satisfied: bool,
    /// Least-squares slope of `ln c_δ` against `ln λ` over positive values;
    /// `-∞` when `c_δ` vanishes identically.
    pub slope: f64,
    pub decreasing_upper_half: bool,
    pub reports: Vec<InvariantReport>,
}

/// Least-squares slope of `ln y` against `ln x` over pairs with `y > 0`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Verdict from a sequence of criterion values on an increasing grid:
/// satisfied iff strictly decreasing over the upper half (trailing zeros
/// allowed) and the log-log slope is below −0.1.
pub fn trend_from_values(lambdas: &[f64], cs: &[f64]) -> (bool, f64, bool) {
    let upper = &cs[lambdas.len() / 2..];
    let decreasing = upper
        .windows(2)
        .all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0));
    let slope = if cs.iter().all(|&c| c == 0.0) {
        f64::NEG_INFINITY
    } else {
        log_log_slope(lambdas, cs).unwrap_or(f64::NEG_INFINITY)
    };
    (decreasing && slope < -0.1, slope, decreasing)
}

pub fn criterion_trend(
    geometry: &GeometryModel,
    v: &PotentialModel,
    delta: f64,
    lambdas: &[f64],
    settings: &QuadratureSettings,
) -> Result<TrendVerdict> {
    if lambdas.len() < 4 || lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(
            "criterion trend needs an increasing grid of ≥ 4 points".into(),
        ));
    }
    let reports = lambdas
        .par_iter()
        .map(|&l| c_delta(geometry, v, l, delta, settings))
        .collect::<Result<Vec<_>>>()?;
    let cs: Vec<f64> = reports.iter().map(|r| r.c_delta).collect();
    let (satisfied, slope, decreasing) = trend_from_values(lambdas, &cs);
    Ok(TrendVerdict {
        satisfied,
        slope,
        decreasing_upper_half: decreasing,
        reports,
    })
}
