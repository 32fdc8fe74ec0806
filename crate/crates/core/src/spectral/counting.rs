//! Counting functions on the model spaces.
//!
//! Each count is a bracket `(lower, upper)`: Dirichlet and Neumann conditions
//! at a truncation radius chosen so that an Agmon buffer separates it from the
//! classically allowed region. The mesh is halved until both counts are
//! stable, and counts on the cylinder and on H³ are summed over separated
//! channels.

use rayon::prelude::*;

use super::tridiagonal::{BoundaryCondition, Stencil, UniformGrid};
use crate::error::{Error, Result};
use crate::models::{GeometryKind, GeometryModel, PotentialModel};
use crate::phase::QuadratureSettings;
use crate::quadrature::integrate;

/// Mesh and truncation policy for the counting routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshControl {
    /// Starting mesh width; by default `min(L/256, 0.25/k_max)` with `k_max`
    /// the largest classical wave number.
    pub h_initial: Option<f64>,
    pub max_rounds: usize,
    /// Refuse problems that would need more grid nodes than this.
    pub node_budget: usize,
    pub stencil: Stencil,
    /// Required Agmon distance between the turning point and the truncation
    /// radius.
    pub agmon_buffer: f64,
    /// Preferred potential margin `V(X) ≥ λ + margin` at the truncation radius.
    pub margin: f64,
}

impl Default for MeshControl {
    fn default() -> Self {
        Self {
            h_initial: None,
            max_rounds: 8,
            node_budget: 200_000_000,
            stencil: Stencil::Compact4,
            agmon_buffer: 15.0,
            margin: 2.0,
        }
    }
}

impl MeshControl {
    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.h_initial {
            if !(h > 0.0) {
                return Err(Error::Domain(format!(
                    "initial mesh width must be positive, got {h}"
                )));
            }
        }
        if self.max_rounds == 0 || !(self.agmon_buffer > 0.0) || !(self.margin >= 0.0) {
            return Err(Error::Domain(
                "mesh control needs ≥ 1 round and a positive Agmon buffer".into(),
            ));
        }
        Ok(())
    }
}

/// A bracketed eigenvalue count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lower: u64,
    pub upper: u64,
    /// Finest mesh width used (largest over channels).
    pub h: f64,
    /// Truncation radius.
    pub truncation: f64,
    pub channels: usize,
}

impl Bracket {
    pub const EMPTY: Bracket = Bracket {
        lower: 0,
        upper: 0,
        h: 0.0,
        truncation: 0.0,
        channels: 0,
    };

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountSample {
    pub lambda: f64,
    pub lower: u64,
    pub upper: u64,
}

/// Bracketed counts on a λ-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingFunction {
    pub samples: Vec<CountSample>,
    pub provenance: String,
}

impl CountingFunction {
    /// Brackets are ordered and both sides are nondecreasing in `λ`.
    pub fn check(&self) -> Result<()> {
        for s in &self.samples {
            if s.lower > s.upper {
                return Err(Error::InvariantViolation(format!(
                    "lower > upper at λ = {}",
                    s.lambda
                )));
            }
        }
        for w in self.samples.windows(2) {
            if w[1].lambda > w[0].lambda && (w[1].lower < w[0].lower || w[1].upper < w[0].upper) {
                return Err(Error::InvariantViolation(format!(
                    "count decreases between λ = {} and {}",
                    w[0].lambda, w[1].lambda
                )));
            }
        }
        Ok(())
    }
}

/// `∫_{r₁}^{r₂} √((V(r) − μ)₊) dr` for an arbitrary potential.
pub fn agmon_distance_fn<V: Fn(f64) -> f64>(v: V, mu: f64, r1: f64, r2: f64) -> Result<f64> {
    if !(r1 < r2) {
        return Err(Error::Domain(format!(
            "Agmon distance needs r₁ < r₂, got {r1}, {r2}"
        )));
    }
    let settings = QuadratureSettings::default().with_rel_tol(1e-10);
    Ok(integrate(|r| (v(r) - mu).max(0.0).sqrt(), r1, r2, &settings)?.value)
}

pub fn agmon_distance(v: &PotentialModel, mu: f64, r1: f64, r2: f64) -> Result<f64> {
    agmon_distance_fn(|r| v.eval(r), mu, r1, r2)
}

/// Radial potential `W` with the data the truncation rule needs.
struct Radial<'a> {
    w: &'a (dyn Fn(f64) -> f64 + Sync),
    /// `sup{r : W(r) < level}`
    level_radius: &'a (dyn Fn(f64) -> f64 + Sync),
    infimum: f64,
}

/// Truncation radius: the Agmon distance from the turning point must reach the
/// buffer; the potential margin is honoured up to twice that radius (it is
/// unreachable at sane sizes for logarithmic potentials).
fn truncation_radius(p: &Radial, lambda: f64, mesh: &MeshControl) -> Result<f64> {
    let turning = (p.level_radius)(lambda);
    if !turning.is_finite() {
        return Err(Error::Infeasible(format!(
            "turning point at λ = {lambda} is beyond f64 range"
        )));
    }
    let settings = QuadratureSettings::default().with_rel_tol(1e-8);
    let dist = |x: f64| -> Result<f64> {
        Ok(integrate(
            |r| ((p.w)(r) - lambda).max(0.0).sqrt(),
            turning,
            x,
            &settings,
        )?
        .value)
    };
    let mut step = turning.max(1.0) * 1e-3;
    let mut lo = turning;
    let mut hi = turning + step;
    while dist(hi)? < mesh.agmon_buffer {
        lo = hi;
        step *= 2.0;
        hi = turning + step;
        if !hi.is_finite() {
            return Err(Error::Infeasible("Agmon buffer cannot be reached".into()));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dist(mid)? < mesh.agmon_buffer {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-6 * hi {
            break;
        }
    }
    let agmon = hi;
    let margin = (p.level_radius)(lambda + mesh.margin);
    Ok(agmon.max(margin.min(2.0 * agmon)))
}

#[derive(Debug, Clone, Copy)]
struct IntervalCount {
    lower: u64,
    upper: u64,
    h: f64,
}

/// Eigenvalues within this relative distance of `λ` are treated as equal to
/// it, and so are not counted.
const COINCIDENCE_TOL: f64 = 1e-9;

/// Most eigenvalues near `λ` resolved individually before refining instead.
const MAX_AMBIGUOUS: u64 = 64;

impl Stencil {
    fn order(self) -> i32 {
        match self {
            Stencil::Central2 => 2,
            Stencil::Compact4 => 4,
        }
    }

    /// Leading dispersion error `k²·(kh)^p / C` for wave number `k`.
    fn dispersion_error(self, k: f64, h: f64) -> f64 {
        let c = match self {
            Stencil::Central2 => 12.0,
            Stencil::Compact4 => 240.0,
        };
        k * k * (k * h).powi(self.order()) / c
    }
}

/// Bracket `[lo, hi)` of the `j`-th (0-based) eigenvalue of a grid problem,
/// widening the initial guess as needed.
fn bracket_eigenvalue<W: Fn(f64) -> f64>(
    g: &UniformGrid,
    w: &W,
    stencil: Stencil,
    j: u64,
    mut lo: f64,
    mut hi: f64,
) -> (f64, f64) {
    let mut step = hi - lo;
    while g.count(w, stencil, lo) > j {
        lo -= step;
        step *= 2.0;
    }
    while g.count(w, stencil, hi) <= j {
        hi += step;
        step *= 2.0;
    }
    (lo, hi)
}

/// Count on `fine` with eigenvalues near `λ` decided by Richardson
/// extrapolation against `coarse` (mesh ratio 2). `None` when too many
/// eigenvalues are ambiguous at this resolution.
fn resolved_count<F: Fn(f64) -> f64, C: Fn(f64) -> f64>(
    fine: &UniformGrid,
    wf: &F,
    coarse: &UniformGrid,
    wc: &C,
    stencil: Stencil,
    lambda: f64,
    k_max: f64,
) -> Option<u64> {
    let eps = COINCIDENCE_TOL * lambda.abs().max(1.0);
    let tau = 10.0 * stencil.dispersion_error(k_max, fine.h) + eps;
    let below = fine.count(wf, stencil, lambda - tau);
    let above = fine.count(wf, stencil, lambda + tau);
    if above - below > MAX_AMBIGUOUS {
        return None;
    }
    let q = f64::from(2i32.pow(stencil.order() as u32));
    let target = lambda - eps;
    let mut n = below;
    for j in below..above {
        // bisect both meshes until the extrapolation μ* = (q μ_f − μ_c)/(q − 1)
        // is known to lie on one side of the target
        let (mut fl, mut fh) = bracket_eigenvalue(fine, wf, stencil, j, lambda - tau, lambda + tau);
        let (mut cl, mut ch) =
            bracket_eigenvalue(coarse, wc, stencil, j, lambda - tau, lambda + tau);
        loop {
            let lo_star = (q * fl - ch) / (q - 1.0);
            let hi_star = (q * fh - cl) / (q - 1.0);
            if hi_star < target {
                n += 1;
                break;
            }
            if lo_star >= target || hi_star - lo_star <= 1e-3 * eps {
                break;
            }
            if q * (fh - fl) >= ch - cl {
                let mid = 0.5 * (fl + fh);
                if fine.count(wf, stencil, mid) > j {
                    fh = mid
                } else {
                    fl = mid
                }
            } else {
                let mid = 0.5 * (cl + ch);
                if coarse.count(wc, stencil, mid) > j {
                    ch = mid
                } else {
                    cl = mid
                }
            }
        }
    }
    Some(n)
}

/// Meshes up to this many nodes get `V` tabulated once instead of
/// re-evaluated by every Sturm sweep.
const TABULATE_LIMIT: usize = 1 << 24;

/// `V` on the nodes of a uniform mesh.
struct Tabulated<'a, W> {
    w: &'a W,
    lo: f64,
    h: f64,
    values: Option<Vec<f64>>,
}

impl<'a, W: Fn(f64) -> f64> Tabulated<'a, W> {
    fn new(w: &'a W, g: &UniformGrid) -> Self {
        let values = (g.m < TABULATE_LIMIT).then(|| (0..=g.m).map(|i| w(g.node(i))).collect());
        Self {
            w,
            lo: g.lo,
            h: g.h,
            values,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match &self.values {
            Some(v) => v[((x - self.lo) / self.h).round() as usize],
            None => (self.w)(x),
        }
    }
}

/// Converged (Dirichlet, Neumann) counts on `[lo, hi]`. Truncation ends get
/// the Dirichlet/Neumann pair; `origin_dirichlet` pins `lo` to Dirichlet on
/// both sides (the radial `u(0) = 0` condition).
///
/// The mesh is halved until the raw counts at `h` and `h/2` agree; the
/// reported counts then come from [`resolved_count`], so an eigenvalue lying
/// on `λ` is not counted even though the discrete one approaches it from
/// below.
/// Dirichlet/Neumann meshes, tabulated potential and raw counts of one
/// refinement round.
type Round<'a, W> = ((UniformGrid, UniformGrid), Tabulated<'a, W>, (u64, u64));

fn converge_interval<W: Fn(f64) -> f64>(
    w: &W,
    lo: f64,
    hi: f64,
    origin_dirichlet: bool,
    lambda: f64,
    k_max: f64,
    mesh: &MeshControl,
) -> Result<IntervalCount> {
    use BoundaryCondition::{Dirichlet, Neumann};
    let len = hi - lo;
    let h0 = mesh
        .h_initial
        .unwrap_or_else(|| (len / 256.0).min(0.25 / k_max.max(1e-12)));
    let mut m = ((len / h0).ceil() as usize).max(16);
    let grids = |m: usize| {
        let h = len / m as f64;
        (
            UniformGrid {
                lo,
                h,
                m,
                bc_lo: Dirichlet,
                bc_hi: Dirichlet,
            },
            UniformGrid {
                lo,
                h,
                m,
                bc_lo: if origin_dirichlet { Dirichlet } else { Neumann },
                bc_hi: Neumann,
            },
        )
    };
    let mut prev: Option<Round<W>> = None;
    let mut last = (0, 0);
    for _ in 0..=mesh.max_rounds {
        if m + 1 > mesh.node_budget {
            return Err(Error::TooLarge {
                size: m + 1,
                limit: mesh.node_budget,
                advice: "narrow the λ window or raise the node budget",
            });
        }
        let (gd, gn) = grids(m);
        let tab = Tabulated::new(w, &gd);
        let wf = |x: f64| tab.eval(x);
        let cur = (
            gd.count(&wf, mesh.stencil, lambda),
            gn.count(&wf, mesh.stencil, lambda),
        );
        if let Some(((cd, cn), coarse_tab, raw)) = &prev {
            if *raw == cur {
                let wc = |x: f64| coarse_tab.eval(x);
                let lower = resolved_count(&gd, &wf, cd, &wc, mesh.stencil, lambda, k_max);
                let upper = resolved_count(&gn, &wf, cn, &wc, mesh.stencil, lambda, k_max);
                if let (Some(lower), Some(upper)) = (lower, upper) {
                    return Ok(IntervalCount {
                        lower,
                        upper,
                        h: gd.h,
                    });
                }
            }
        }
        prev = Some(((gd, gn), tab, cur));
        last = cur;
        m *= 2;
    }
    Err(Error::MeshNotConverged {
        rounds: mesh.max_rounds,
        last,
        h: len / (m / 2) as f64,
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "energy must be positive and finite, got {lambda}"
        )));
    }
    Ok(())
}

/// Counts of `-u'' + V(|x|) u` on ℝ below `λ`.
pub fn count_line(v: &PotentialModel, lambda: f64, mesh: &MeshControl) -> Result<Bracket> {
    check_lambda(lambda)?;
    mesh.validate()?;
    let inf = v.infimum();
    if lambda <= inf {
        return Ok(Bracket::EMPTY);
    }
    let w = |r: f64| v.eval(r);
    let level = |l: f64| v.level_radius(l);
    let radial = Radial {
        w: &w,
        level_radius: &level,
        infimum: inf,
    };
    let x = truncation_radius(&radial, lambda, mesh)?;
    let k_max = (lambda - radial.infimum).sqrt();
    let line = |x: f64| v.eval(x.abs());
    let c = converge_interval(&line, -x, x, false, lambda, k_max, mesh)?;
    Ok(Bracket {
        lower: c.lower,
        upper: c.upper,
        h: c.h,
        truncation: x,
        channels: 1,
    })
}

/// Counts on the cylinder ℝ×S¹: Fourier modes `e^{ikθ}` shift the line
/// problem by `k²`, and `±k` contribute equally.
pub fn count_cylinder(v: &PotentialModel, lambda: f64, mesh: &MeshControl) -> Result<Bracket> {
    check_lambda(lambda)?;
    let inf = v.infimum();
    let mut ks = Vec::new();
    let mut k = 0u64;
    while lambda - (k * k) as f64 > inf {
        ks.push(k);
        k += 1;
    }
    let parts = ks
        .par_iter()
        .map(|&k| count_line(v, lambda - (k * k) as f64, mesh).map(|b| (k, b)))
        .collect::<Result<Vec<_>>>()?;
    let mut total = Bracket {
        channels: parts.len(),
        ..Bracket::EMPTY
    };
    for (k, b) in parts {
        let mult = if k == 0 { 1 } else { 2 };
        total.lower += mult * b.lower;
        total.upper += mult * b.upper;
        total.h = total.h.max(b.h);
        total.truncation = total.truncation.max(b.truncation);
    }
    Ok(total)
}

fn centrifugal(l: u64, r: f64) -> f64 {
    if l == 0 {
        0.0
    } else {
        let s = r.sinh();
        (l * (l + 1)) as f64 / (s * s)
    }
}

/// Minimum over `(0, R]` of the channel potential `1 + V + l(l+1)/sinh²r`:
/// a coarse log-spaced scan followed by golden-section refinement.
pub fn channel_minimum(v: &PotentialModel, l: u64, r_max: f64) -> f64 {
    let f = |r: f64| 1.0 + v.eval(r) + centrifugal(l, r);
    if l == 0 {
        return 1.0 + v.infimum();
    }
    let n = 200;
    let (a0, b0) = (1e-4f64.min(r_max * 1e-3).ln(), r_max.ln());
    let pts: Vec<f64> = (0..=n)
        .map(|i| (a0 + (b0 - a0) * i as f64 / n as f64).exp())
        .collect();
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for (i, &r) in pts.iter().enumerate() {
        let val = f(r);
        if val < best {
            best = val;
            best_i = i;
        }
    }
    let mut a = pts[best_i.saturating_sub(1)];
    let mut b = pts[(best_i + 1).min(n)];
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..100 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
        if b - a < 1e-12 * b {
            break;
        }
    }
    best.min(f(0.5 * (a + b)))
}

/// Counts of `Δ + V` on H³ below `λ`: `u = sinh(r) f` in the `l`-th spherical
/// harmonic channel solves `-u'' + (1 + V + l(l+1)/sinh²r) u = μ u` with
/// `u(0) = 0`, and contributes with multiplicity `2l + 1`.
pub fn count_hyperbolic3(v: &PotentialModel, lambda: f64, mesh: &MeshControl) -> Result<Bracket> {
    check_lambda(lambda)?;
    mesh.validate()?;
    let inf = 1.0 + v.infimum();
    if lambda <= inf {
        return Ok(Bracket::EMPTY);
    }
    // V_eff ≥ 1 + V in every channel, so one truncation radius serves all
    let w = |r: f64| 1.0 + v.eval(r);
    let level = |l: f64| v.level_radius(l - 1.0);
    let radial = Radial {
        w: &w,
        level_radius: &level,
        infimum: inf,
    };
    let r_max = truncation_radius(&radial, lambda, mesh)?;
    let turning = level(lambda);
    let mut l_max = 0u64;
    while channel_minimum(v, l_max + 1, turning.max(1e-3)) < lambda {
        l_max += 1;
    }
    let k_max = (lambda - inf).sqrt();
    let parts = (0..=l_max)
        .into_par_iter()
        .map(|l| {
            let veff = |r: f64| 1.0 + v.eval(r) + centrifugal(l, r);
            converge_interval(&veff, 0.0, r_max, true, lambda, k_max, mesh).map(|c| (l, c))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = Bracket {
        truncation: r_max,
        channels: parts.len(),
        ..Bracket::EMPTY
    };
    for (l, c) in parts {
        total.lower += (2 * l + 1) * c.lower;
        total.upper += (2 * l + 1) * c.upper;
        total.h = total.h.max(c.h);
    }
    Ok(total)
}

/// Dispatch on the geometry.
pub fn count(
    geometry: &GeometryModel,
    v: &PotentialModel,
    lambda: f64,
    mesh: &MeshControl,
) -> Result<Bracket> {
    match geometry.kind() {
        GeometryKind::Line => count_line(v, lambda, mesh),
        GeometryKind::EuclideanRadial if geometry.dim() == 1 => count_line(v, lambda, mesh),
        GeometryKind::Cylinder => count_cylinder(v, lambda, mesh),
        GeometryKind::Hyperbolic3 => count_hyperbolic3(v, lambda, mesh),
        GeometryKind::EuclideanRadial => Err(Error::Unsupported(format!(
            "counting on {geometry}; use line, cylinder or hyperbolic3"
        ))),
    }
}

/// Counts on a λ-grid, evaluated in parallel and returned in grid order.
pub fn counting_function(
    geometry: &GeometryModel,
    v: &PotentialModel,
    lambdas: &[f64],
    mesh: &MeshControl,
) -> Result<CountingFunction> {
    let samples = lambdas
        .par_iter()
        .map(|&lambda| {
            count(geometry, v, lambda, mesh).map(|b| CountSample {
                lambda,
                lower: b.lower,
                upper: b.upper,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountingFunction {
        samples,
        provenance: format!("{geometry}, {v}: Dirichlet/Neumann truncation bracket"),
    })
}
