//! Heat kernels: the short-time parametrix, the closed-form kernel of
//! hyperbolic 3-space, kernels reconstructed from eigendecompositions, and the
//! checks that relate them to the counting function.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::invariants::log_log_slope;
use crate::quadrature::{integrate_with_breaks, QuadratureSettings};
use crate::spectral::Eigendecomposition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelSource {
    Parametrix,
    SpectralSum,
    ExactH3,
}

/// A diagonal (or radial, for [`KernelSource::ExactH3`]) kernel value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub t: f64,
    /// Position, or geodesic distance for the H³ kernel.
    pub x: f64,
    pub value: f64,
    pub source: KernelSource,
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "time must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

/// `(4πt)^{-n/2} e^{-tV(x)}`, the parametrix on the diagonal.
pub fn parametrix_diagonal<V: Fn(f64) -> f64>(
    v: V,
    n: usize,
    t: f64,
    x: f64,
) -> Result<KernelSample> {
    check_time(t)?;
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let value = (4.0 * std::f64::consts::PI * t).powf(-(n as f64) / 2.0) * (-t * v(x)).exp();
    Ok(KernelSample {
        t,
        x,
        value,
        source: KernelSource::Parametrix,
    })
}

/// `d / sinh d`, by its Taylor series near zero.
fn d_over_sinh(d: f64) -> f64 {
    if d < 1e-4 {
        let d2 = d * d;
        1.0 - d2 / 6.0 + 7.0 * d2 * d2 / 360.0
    } else {
        d / d.sinh()
    }
}

/// Heat kernel of `Δ + 1` on H³ at geodesic distance `d`:
/// `e^{-t}(4πt)^{-3/2}(d/sinh d)e^{-d²/4t}`.
pub fn exact_h3_kernel(t: f64, d: f64) -> Result<KernelSample> {
    check_time(t)?;
    if !(d >= 0.0) {
        return Err(Error::Domain(format!(
            "distance must be nonnegative, got {d}"
        )));
    }
    let value = (-t).exp()
        * (4.0 * std::f64::consts::PI * t).powf(-1.5)
        * d_over_sinh(d)
        * (-d * d / (4.0 * t)).exp();
    Ok(KernelSample {
        t,
        x: d,
        value,
        source: KernelSource::ExactH3,
    })
}

/// `∫₀^∞ k(t, d)·4π sinh²d dd`; one for the kernel above (the `e^{-t}` factor
/// exactly compensates the bottom of the spectrum of Δ on H³).
pub fn h3_kernel_mass(t: f64) -> Result<f64> {
    check_time(t)?;
    // the integrand is a Gaussian in d centred near 2t with width ~ √t
    let hi = 2.0 * t + 40.0 * t.sqrt() + 1.0;
    let pts: Vec<f64> = (0..=64).map(|i| hi * i as f64 / 64.0).collect();
    let settings = QuadratureSettings {
        rel_tol: 1e-12,
        abs_tol: 1e-15,
        ..Default::default()
    };
    let est = integrate_with_breaks(
        |d| {
            let s = d.sinh();
            exact_h3_kernel(t, d).map_or(f64::NAN, |k| k.value) * 4.0 * std::f64::consts::PI * s * s
        },
        &pts,
        &settings,
    )?;
    Ok(est.value)
}

/// `K(t, x, x) = Σⱼ e^{-tλⱼ} φⱼ(x)²`, dropping terms once `e^{-tλⱼ}` falls below
/// `1e-16` of the leading one.
pub fn spectral_kernel_diagonal(
    eig: &Eigendecomposition,
    t: f64,
    node: usize,
) -> Result<KernelSample> {
    check_time(t)?;
    if node >= eig.nodes.len() {
        return Err(Error::Domain(format!(
            "node {node} out of range ({} nodes)",
            eig.nodes.len()
        )));
    }
    let Some(&first) = eig.values.first() else {
        return Err(Error::Domain("empty eigendecomposition".into()));
    };
    let mut value = 0.0;
    for (lam, f) in eig.values.iter().zip(&eig.functions) {
        if t * (lam - first) > 16.0 * std::f64::consts::LN_10 {
            break;
        }
        value += (-t * lam).exp() * f[node] * f[node];
    }
    Ok(KernelSample {
        t,
        x: eig.nodes[node],
        value,
        source: KernelSource::SpectralSum,
    })
}

/// `Σⱼ e^{-tλⱼ}`.
pub fn heat_trace(eig: &Eigendecomposition, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(eig.values.iter().map(|l| (-t * l).exp()).sum())
}

/// One comparison `e(λ, x, x) ≤ e·K(1/λ, x, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma21Row {
    pub lambda: f64,
    pub node: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// The pointwise counting function against the heat kernel at time `1/λ`,
/// for every positive `λ` on the grid.
pub fn lemma21_check(
    eig: &Eigendecomposition,
    lambdas: &[f64],
    node: usize,
) -> Result<Vec<Lemma21Row>> {
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0) {
                return Err(Error::Domain(format!("λ must be positive, got {lambda}")));
            }
            let lhs = eig.pointwise_counting(lambda, node)?;
            let rhs =
                std::f64::consts::E * spectral_kernel_diagonal(eig, 1.0 / lambda, node)?.value;
            // both sides share the terms λⱼ < λ, so rounding cannot flip a
            // true inequality by more than a few ulps
            let holds = lhs <= rhs * (1.0 + 1e-12);
            Ok(Lemma21Row {
                lambda,
                node,
                lhs,
                rhs,
                holds,
            })
        })
        .collect()
}

/// Eigenpairs of `-d²/dx² + V` on `interval` with Dirichlet ends, by Galerkin
/// projection onto the first `modes` sine functions.
///
/// Eigenfunctions are sampled at the `samples` equally spaced interior points
/// `a + iL/(samples+1)`. With `samples ≥ modes` the discrete sine transform is
/// orthogonal, so `h Σ φⱼ φₖ = δⱼₖ` holds on those nodes and trace identities
/// are exact.
pub fn sine_galerkin<V: Fn(f64) -> f64>(
    v: V,
    interval: (f64, f64),
    modes: usize,
    samples: usize,
) -> Result<Eigendecomposition> {
    let (a, b) = interval;
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "interval [{a}, {b}] is empty or unbounded"
        )));
    }
    if modes == 0 || samples < modes {
        return Err(Error::Domain(format!(
            "need 1 ≤ modes ≤ samples, got {modes} and {samples}"
        )));
    }
    if modes > crate::spectral::DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: modes,
            limit: crate::spectral::DENSE_LIMIT,
            advice: "reduce the number of sine modes",
        });
    }
    let len = b - a;
    let k = std::f64::consts::PI / len;
    // cₘ = (1/L)∫ V cos(mπ(x−a)/L) dx for m ≤ 2·modes; then
    // ⟨sⱼ, V sₖ⟩ = c_{|j−k|} − c_{j+k} for the orthonormal sⱼ = √(2/L) sin(jπ(x−a)/L)
    let pieces = 4 * modes;
    let pts: Vec<f64> = (0..=pieces)
        .map(|i| a + len * i as f64 / pieces as f64)
        .collect();
    let settings = QuadratureSettings {
        rel_tol: 1e-13,
        abs_tol: 1e-12,
        ..Default::default()
    };
    let c: Vec<f64> = (0..=2 * modes)
        .map(|m| {
            let w = m as f64 * k;
            integrate_with_breaks(|x| v(x) * (w * (x - a)).cos(), &pts, &settings)
                .map(|e| e.value / len)
        })
        .collect::<Result<_>>()?;
    let mut mat = DMatrix::zeros(modes, modes);
    for i in 0..modes {
        for j in 0..modes {
            let (p, q) = (i + 1, j + 1);
            mat[(i, j)] = c[p.abs_diff(q)] - c[p + q];
        }
        mat[(i, i)] += ((i + 1) as f64 * k).powi(2);
    }
    let eig = mat.symmetric_eigen();
    let mut order: Vec<usize> = (0..modes).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let h = len / (samples + 1) as f64;
    let nodes: Vec<f64> = (1..=samples).map(|i| a + i as f64 * h).collect();
    let norm = (2.0 / len).sqrt();
    // basis sampled once: basis[p][i] = sₚ(xᵢ)
    let basis: Vec<Vec<f64>> = (1..=modes)
        .map(|p| {
            nodes
                .iter()
                .map(|x| norm * (p as f64 * k * (x - a)).sin())
                .collect()
        })
        .collect();
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let functions = order
        .iter()
        .map(|&j| {
            let coef = eig.eigenvectors.column(j);
            (0..samples)
                .map(|i| (0..modes).map(|p| coef[p] * basis[p][i]).sum())
                .collect()
        })
        .collect();
    Ok(Eigendecomposition {
        values,
        functions,
        nodes,
        h,
    })
}

/// Settings for [`remainder_scaling_fit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderOptions {
    /// Required distance from the evaluation point to the boundary; times must
    /// lie below `min(1, ε₀³)`.
    pub eps0: f64,
    /// Sine modes per unit length.
    pub modes_per_unit: usize,
    /// Differences below `floor·K` are indistinguishable from rounding and
    /// are dropped.
    pub floor: f64,
    pub min_points: usize,
}

impl Default for RemainderOptions {
    fn default() -> Self {
        Self {
            eps0: 0.3,
            modes_per_unit: 300,
            floor: 1e-13,
            min_points: 5,
        }
    }
}

/// `|K(t, x, x) − (4πt)^{-1/2}e^{-tV(x)}|` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderPoint {
    pub t: f64,
    pub kernel: f64,
    pub parametrix: f64,
    pub difference: f64,
    /// Below the rounding floor; excluded from the fit.
    pub dropped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainderFit {
    /// Least-squares slope of `log|difference|` against `log t`.
    pub slope: f64,
    pub points: Vec<RemainderPoint>,
}

/// Differences between the Dirichlet heat kernel of `-d²/dx² + V` on
/// `interval` (from a sine–Galerkin decomposition) and the parametrix, at `x`.
pub fn remainder_differences<V: Fn(f64) -> f64>(
    v: V,
    interval: (f64, f64),
    x: f64,
    ts: &[f64],
    opts: &RemainderOptions,
) -> Result<Vec<RemainderPoint>> {
    let (a, b) = interval;
    if !(x - a >= opts.eps0 && b - x >= opts.eps0) {
        return Err(Error::Precondition(format!(
            "x = {x} is closer than ε₀ = {} to the boundary of [{a}, {b}]",
            opts.eps0
        )));
    }
    let t_max = opts.eps0.powi(3).min(1.0);
    if let Some(t) = ts.iter().find(|&&t| !(t > 0.0 && t < t_max)) {
        return Err(Error::Precondition(format!("t = {t} outside (0, {t_max})")));
    }
    let len = b - a;
    let modes = ((opts.modes_per_unit as f64 * len).ceil() as usize).max(16);
    // place x on a sample node: choose the sample count so that x = a + iL/(M+1)
    let frac = (x - a) / len;
    let mut samples = 2 * modes - 1;
    let node = loop {
        let i = frac * (samples + 1) as f64;
        if (i - i.round()).abs() < 1e-9 {
            break i.round() as usize - 1;
        }
        samples += 1;
        if samples > 64 * modes {
            return Err(Error::Domain(format!(
                "x = {x} is not a rational point of the interval"
            )));
        }
    };
    let eig = sine_galerkin(&v, interval, modes, samples)?;
    let vx = v(x);
    ts.iter()
        .map(|&t| {
            let kernel = spectral_kernel_diagonal(&eig, t, node)?.value;
            let parametrix = parametrix_diagonal(|_| vx, 1, t, x)?.value;
            let difference = (kernel - parametrix).abs();
            Ok(RemainderPoint {
                t,
                kernel,
                parametrix,
                difference,
                dropped: difference <= opts.floor * kernel,
            })
        })
        .collect()
}

/// Scaling exponent of the parametrix remainder on the diagonal.
pub fn remainder_scaling_fit<V: Fn(f64) -> f64>(
    v: V,
    interval: (f64, f64),
    x: f64,
    ts: &[f64],
    opts: &RemainderOptions,
) -> Result<RemainderFit> {
    let points = remainder_differences(v, interval, x, ts, opts)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| !p.dropped)
        .map(|p| (p.t, p.difference))
        .unzip();
    if xs.len() < opts.min_points {
        return Err(Error::Infeasible(format!(
            "only {} of {} remainder differences are above the rounding floor",
            xs.len(),
            points.len()
        )));
    }
    let slope =
        log_log_slope(&xs, &ys).ok_or_else(|| Error::Infeasible("degenerate time grid".into()))?;
    Ok(RemainderFit { slope, points })
}

/// `count` log-spaced times from `10^lo` to `10^hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![10f64.powf(lo)];
    }
    (0..count)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{discretize_1d, BoundaryCondition};
    use std::f64::consts::PI;

    #[test]
    fn parametrix_examples() {
        let p = parametrix_diagonal(|_| 5.0, 1, 0.01, 0.3).unwrap();
        assert!((p.value - 2.68337).abs() < 1e-5, "{}", p.value);
        let q = parametrix_diagonal(|_| 0.0, 3, 1.0, 0.0).unwrap();
        assert!((q.value - 0.0224484).abs() < 1e-7);
        let r = parametrix_diagonal(|x| x * x, 2, 1e-9, 3.0).unwrap();
        assert!((r.value * 1e-9 - 1.0 / (4.0 * PI)).abs() < 1e-9);
        assert!(parametrix_diagonal(|_| 0.0, 1, 0.0, 0.0).is_err());
    }

    #[test]
    fn h3_examples() {
        let k = exact_h3_kernel(1.0, 0.0).unwrap();
        assert!((k.value - 0.0082583).abs() < 1e-7);
        let k = exact_h3_kernel(0.5, 3.0).unwrap().value;
        let direct =
            (-0.5f64).exp() * (2.0 * PI).powf(-1.5) * (3.0 / 3f64.sinh()) * (-4.5f64).exp();
        assert!((k - direct).abs() < 1e-16 && k > 0.0 && k < 1e-3);
        // series and closed form agree across the switch
        let below = exact_h3_kernel(0.2, 0.999_999e-4).unwrap().value;
        let above = exact_h3_kernel(0.2, 1.000_001e-4).unwrap().value;
        assert!((below - above).abs() < 1e-12 * below);
        assert!(exact_h3_kernel(1.0, -1.0).is_err());
    }

    #[test]
    fn h3_mass_is_one() {
        for t in [0.1, 1.0, 10.0] {
            assert!((h3_kernel_mass(t).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    fn ho_eig() -> Eigendecomposition {
        let t = discretize_1d(|x| x * x, (-6.0, 6.0), 0.05, BoundaryCondition::Dirichlet).unwrap();
        Eigendecomposition::of(&t).unwrap()
    }

    #[test]
    fn single_pair_and_trace() {
        let eig = Eigendecomposition::from_pairs(vec![2.0], vec![0.5f64.sqrt()], 1.0).unwrap();
        let k = spectral_kernel_diagonal(&eig, 0.7, 0).unwrap().value;
        assert!((k - 0.5 * (-1.4f64).exp()).abs() < 1e-15);

        let eig = ho_eig();
        for t in [0.05, 0.5, 3.0] {
            let sum: f64 = (0..eig.nodes.len())
                .map(|i| spectral_kernel_diagonal(&eig, t, i).unwrap().value)
                .sum();
            let trace = heat_trace(&eig, t).unwrap();
            assert!((sum * eig.h - trace).abs() < 1e-10 * trace.max(1.0), "{t}");
        }
    }

    #[test]
    fn semigroup_and_positivity() {
        let eig = ho_eig();
        let mid = eig.nodes.len() / 2;
        let t = 0.3;
        let k2 = spectral_kernel_diagonal(&eig, 2.0 * t, mid).unwrap().value;
        // K(2t, x, x) = h Σ_y K(t, x, y)²
        let kxy = |y: usize| -> f64 {
            eig.values
                .iter()
                .zip(&eig.functions)
                .map(|(l, f)| (-t * l).exp() * f[mid] * f[y])
                .sum()
        };
        let composed: f64 = (0..eig.nodes.len()).map(|y| kxy(y).powi(2)).sum::<f64>() * eig.h;
        assert!((k2 - composed).abs() < 1e-10 * k2);
        for i in 1..eig.nodes.len() - 1 {
            assert!(spectral_kernel_diagonal(&eig, 0.1, i).unwrap().value > 0.0);
        }
        let traces: Vec<f64> = [0.01, 0.1, 1.0, 10.0]
            .iter()
            .map(|&t| heat_trace(&eig, t).unwrap())
            .collect();
        assert!(traces.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn lemma21_examples() {
        let eig =
            Eigendecomposition::from_pairs(vec![1.0, 4.0], vec![0.3f64.sqrt(), 0.7f64.sqrt()], 1.0)
                .unwrap();
        let r = lemma21_check(&eig, &[2.0, 0.5], 0).unwrap();
        assert!((r[0].lhs - 0.3).abs() < 1e-15);
        assert!((r[0].rhs - 0.7521).abs() < 1e-4, "{}", r[0].rhs);
        assert!(r[0].holds);
        assert_eq!(r[1].lhs, 0.0);
        assert!(r[1].holds && r[1].rhs > 0.0);

        let eig = ho_eig();
        let mid = eig.nodes.len() / 2;
        assert!(lemma21_check(&eig, &[2.0, 6.0, 10.0], mid)
            .unwrap()
            .iter()
            .all(|r| r.holds));
    }

    #[test]
    fn galerkin_matches_free_spectrum() {
        let eig = sine_galerkin(|_| 3.0, (0.0, 2.0), 40, 40).unwrap();
        for (j, l) in eig.values.iter().enumerate() {
            let exact = ((j + 1) as f64 * PI / 2.0).powi(2) + 3.0;
            assert!((l - exact).abs() < 1e-9 * exact);
        }
        // discrete orthonormality on the sample nodes
        for j in [0, 7, 39] {
            let norm: f64 = eig.functions[j].iter().map(|x| x * x).sum::<f64>() * eig.h;
            assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn galerkin_agrees_with_finite_differences() {
        let v = |x: f64| 5.0 + (2.0 * PI * x).sin();
        let g = sine_galerkin(v, (0.0, 1.0), 120, 120).unwrap();
        let t = discretize_1d(v, (0.0, 1.0), 1e-3, BoundaryCondition::Dirichlet).unwrap();
        let fd = Eigendecomposition::of(&t).unwrap();
        for j in 0..5 {
            assert!(
                (g.values[j] - fd.values[j]).abs() < 1e-3 * g.values[j],
                "{j}"
            );
        }
    }

    #[test]
    fn small_time_limit() {
        let v = |x: f64| 5.0 + (2.0 * PI * x).sin();
        let pts = remainder_differences(v, (0.0, 1.0), 0.5, &[1e-4], &RemainderOptions::default())
            .unwrap();
        let ratio = pts[0].kernel * (4.0 * PI * 1e-4).sqrt();
        assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn remainder_is_within_the_theorem_bound() {
        // |K − k⁰| ≤ C t^{1/2} max(1, sup V); the observed defect is much
        // smaller, so any fixed C that works at the largest t works throughout
        let v = |x: f64| 5.0 + (2.0 * PI * x).sin();
        let ts = log_grid(-4.0, -2.0, 9);
        let pts =
            remainder_differences(v, (0.0, 1.0), 0.5, &ts, &RemainderOptions::default()).unwrap();
        let c = 1.0;
        for p in &pts {
            assert!(p.difference <= c * p.t.sqrt() * 6.0, "{p:?}");
        }
    }

    #[test]
    fn constant_potential_remainder_is_boundary_only() {
        let ts = log_grid(-4.0, -2.0, 9);
        let pts =
            remainder_differences(|_| 5.0, (0.0, 1.0), 0.5, &ts, &RemainderOptions::default())
                .unwrap();
        assert!(pts.iter().all(|p| p.difference < 1e-10), "{pts:?}");
    }

    #[test]
    fn remainder_preconditions() {
        let o = RemainderOptions::default();
        assert!(matches!(
            remainder_differences(|_| 1.0, (0.0, 1.0), 0.5, &[0.05], &o),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            remainder_differences(|_| 1.0, (0.0, 1.0), 0.1, &[0.01], &o),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            remainder_scaling_fit(|_| 1.0, (0.0, 1.0), 0.5, &[1e-3], &o),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(-4.0, -2.0, 5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[4] - 1e-2).abs() < 1e-16);
    }
}
