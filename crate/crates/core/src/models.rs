//! Model geometries and confining potential families.
//!
//! Every geometry here is treated through a single radial coordinate
//! `r ≥ 0`: `|x|` on the line, the distance to the origin on ℝⁿ and H³, and
//! `|x|` on the ℝ factor of the cylinder ℝ×S¹. Potentials are functions of that
//! coordinate.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    Line,
    EuclideanRadial,
    Cylinder,
    Hyperbolic3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeometryModel {
    kind: GeometryKind,
    dim: usize,
}

/// Suprema of the curvature operator norm and of its first two covariant
/// derivatives over a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureBounds {
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

impl CurvatureBounds {
    /// `R + S^{2/3} + T^{1/2}`; each term scales like length⁻².
    pub fn weight(&self) -> f64 {
        self.r + self.s.powf(2.0 / 3.0) + self.t.sqrt()
    }
}

/// A closed interval of the radial coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialInterval {
    pub lo: f64,
    pub hi: f64,
}

impl RadialInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi >= lo) {
            return Err(Error::Domain(format!(
                "invalid radial interval [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }
}

/// Volume of the unit ball in ℝⁿ.
pub fn unit_ball_volume(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    PI.powf(half) / gamma(half + 1.0)
}

impl GeometryModel {
    pub fn line() -> Self {
        Self {
            kind: GeometryKind::Line,
            dim: 1,
        }
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("euclidean dimension must be ≥ 1".into()));
        }
        Ok(Self {
            kind: GeometryKind::EuclideanRadial,
            dim: n,
        })
    }

    pub fn cylinder() -> Self {
        Self {
            kind: GeometryKind::Cylinder,
            dim: 2,
        }
    }

    pub fn hyperbolic3() -> Self {
        Self {
            kind: GeometryKind::Hyperbolic3,
            dim: 3,
        }
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Bottom of the spectrum of the Laplacian: `(n-1)²/4 = 1` on H³, 0 on
    /// flat models.
    pub fn spectral_floor(&self) -> f64 {
        match self.kind {
            GeometryKind::Hyperbolic3 => 1.0,
            _ => 0.0,
        }
    }

    /// Injectivity radius; uniform on every model. The cylinder's is half the
    /// circumference of its unit-circle factor.
    pub fn injectivity_radius(&self) -> f64 {
        match self.kind {
            GeometryKind::Cylinder => PI,
            _ => f64::INFINITY,
        }
    }

    /// Radial volume density `w(r)`, so that the volume of `{radius < ρ}` is
    /// `∫₀^ρ w(r) dr`. On the cylinder this is `2 · 2π`: two half-lines, each
    /// carrying a full circle fibre.
    pub fn volume_weight(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("volume weight needs r > 0, got {r}")));
        }
        Ok(self.volume_weight_unchecked(r))
    }

    pub(crate) fn volume_weight_unchecked(&self, r: f64) -> f64 {
        match self.kind {
            GeometryKind::Line => 2.0,
            GeometryKind::Cylinder => 4.0 * PI,
            GeometryKind::EuclideanRadial => {
                let n = self.dim;
                n as f64 * unit_ball_volume(n) * r.powi(n as i32 - 1)
            }
            GeometryKind::Hyperbolic3 => {
                let s = r.sinh();
                4.0 * PI * s * s
            }
        }
    }

    /// Closed-form volume of `{radius < ρ}`.
    pub fn ball_volume(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        match self.kind {
            GeometryKind::Line => 2.0 * rho,
            GeometryKind::Cylinder => 4.0 * PI * rho,
            GeometryKind::EuclideanRadial => unit_ball_volume(self.dim) * rho.powi(self.dim as i32),
            GeometryKind::Hyperbolic3 => {
                // π (sinh 2ρ − 2ρ), with a series where the difference cancels
                let x = 2.0 * rho;
                let diff = if x < 1e-2 {
                    let x3 = x * x * x;
                    x3 / 6.0 + x3 * x * x / 120.0 + x3 * x3 * x / 5040.0
                } else {
                    x.sinh() - x
                };
                PI * diff
            }
        }
    }

    /// Curvature data over a region. Model spaces have constant curvature
    /// data, so the region only needs to be nonempty.
    pub fn curvature_bounds(&self, region: &RadialInterval) -> CurvatureBounds {
        debug_assert!(region.hi >= region.lo);
        match self.kind {
            GeometryKind::Hyperbolic3 => CurvatureBounds {
                r: 1.0,
                s: 0.0,
                t: 0.0,
            },
            _ => CurvatureBounds {
                r: 0.0,
                s: 0.0,
                t: 0.0,
            },
        }
    }

    pub fn spec(&self) -> String {
        match self.kind {
            GeometryKind::Line => "line".into(),
            GeometryKind::EuclideanRadial => format!("euclidean:{}", self.dim),
            GeometryKind::Cylinder => "cylinder".into(),
            GeometryKind::Hyperbolic3 => "hyperbolic3".into(),
        }
    }
}

impl fmt::Display for GeometryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

impl FromStr for GeometryModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "line" => Ok(Self::line()),
            "cylinder" => Ok(Self::cylinder()),
            "hyperbolic3" => Ok(Self::hyperbolic3()),
            _ => {
                if let Some(n) = s.strip_prefix("euclidean:") {
                    let n: usize = n
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad euclidean dimension in {s:?}")))?;
                    Self::euclidean(n)
                } else {
                    Err(Error::Parse(format!("unknown geometry {s:?}")))
                }
            }
        }
    }
}

/// Piecewise-linear radial potential given by a table of `(r, V)` knots,
/// extended past the last knot with the slope of the last segment.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseTable {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseTable {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(Error::Domain(
                "piecewise table needs ≥ 2 matching knots".into(),
            ));
        }
        if radii[0] != 0.0 {
            return Err(Error::Domain("piecewise table must start at r = 0".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "piecewise radii must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("piecewise values must be finite".into()));
        }
        let n = radii.len();
        if !(values[n - 1] > values[n - 2]) {
            // confinement: the linear tail must grow
            return Err(Error::Domain(
                "piecewise potential must increase on its last segment".into(),
            ));
        }
        Ok(Self { radii, values })
    }

    /// Read `r V` pairs (comma or whitespace separated, `#` comments).
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty());
            let parse = |t: Option<&str>| -> Result<f64> {
                t.ok_or_else(|| Error::Parse(format!("line {}: expected two columns", lineno + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            radii.push(parse(it.next())?);
            values.push(parse(it.next())?);
        }
        Self::new(radii, values)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let n = self.radii.len();
        let idx = match self.radii.partition_point(|&x| x <= r) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (r0, r1) = (self.radii[idx], self.radii[idx + 1]);
        let (v0, v1) = (self.values[idx], self.values[idx + 1]);
        v0 + (v1 - v0) * (r - r0) / (r1 - r0)
    }

    pub fn knots(&self) -> &[f64] {
        &self.radii
    }

    fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }

    fn sublevel(&self, level: f64) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        let n = self.radii.len();
        let mut push = |a: f64, b: f64| {
            if b <= a {
                return;
            }
            if let Some(last) = out.last_mut() {
                if last.1 >= a {
                    last.1 = last.1.max(b);
                    return;
                }
            }
            out.push((a, b));
        };
        for i in 0..n - 1 {
            let (r0, r1) = (self.radii[i], self.radii[i + 1]);
            let (v0, v1) = (self.values[i], self.values[i + 1]);
            let cross = |v0: f64, v1: f64| r0 + (level - v0) / (v1 - v0) * (r1 - r0);
            match (v0 < level, v1 < level) {
                (true, true) => push(r0, r1),
                (true, false) => push(r0, cross(v0, v1)),
                (false, true) => push(cross(v0, v1), r1),
                (false, false) => {}
            }
        }
        // linear tail, increasing by construction
        let (r0, r1) = (self.radii[n - 2], self.radii[n - 1]);
        let (v0, v1) = (self.values[n - 2], self.values[n - 1]);
        if v1 < level {
            let end = r1 + (level - v1) / ((v1 - v0) / (r1 - r0));
            push(r1, end);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialFamily {
    /// `r^α`
    Power {
        alpha: f64,
    },
    /// `c (ln r)^α` for `r > 1`, 0 below.
    LogPower {
        c: f64,
        alpha: f64,
    },
    /// `ln ln ⋯ ln r` (`depth` logarithms), 0 where undefined.
    IteratedLog {
        depth: u32,
    },
    Piecewise(PiecewiseTable),
}

/// How the closed form is made admissible near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// `max(1, closed form)`; guarantees `V ≥ 1`.
    Clamped,
    /// The bare closed form, e.g. the harmonic oscillator `x²`.
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialModel {
    family: PotentialFamily,
    normalization: Normalization,
}

fn iterated_exp(mut y: f64, depth: u32) -> f64 {
    for _ in 0..depth {
        y = y.exp();
    }
    y
}

impl PotentialModel {
    pub fn new(family: PotentialFamily, normalization: Normalization) -> Result<Self> {
        match &family {
            PotentialFamily::Power { alpha } if !(*alpha > 0.0) => {
                return Err(Error::Domain("power exponent must be positive".into()))
            }
            PotentialFamily::LogPower { c, alpha } if !(*c > 0.0 && *alpha > 0.0) => {
                return Err(Error::Domain("log-power needs c > 0 and α > 0".into()))
            }
            PotentialFamily::IteratedLog { depth } if *depth == 0 => {
                return Err(Error::Domain("iterated log needs depth ≥ 1".into()))
            }
            _ => {}
        }
        Ok(Self {
            family,
            normalization,
        })
    }

    pub fn power(alpha: f64) -> Result<Self> {
        Self::new(PotentialFamily::Power { alpha }, Normalization::Clamped)
    }

    pub fn log_power(c: f64, alpha: f64) -> Result<Self> {
        Self::new(
            PotentialFamily::LogPower { c, alpha },
            Normalization::Clamped,
        )
    }

    pub fn iterated_log(depth: u32) -> Result<Self> {
        Self::new(
            PotentialFamily::IteratedLog { depth },
            Normalization::Clamped,
        )
    }

    pub fn piecewise(table: PiecewiseTable) -> Result<Self> {
        Self::new(PotentialFamily::Piecewise(table), Normalization::Clamped)
    }

    /// The harmonic oscillator `x²` without the `V ≥ 1` clamp.
    pub fn harmonic_oscillator() -> Self {
        Self {
            family: PotentialFamily::Power { alpha: 2.0 },
            normalization: Normalization::Raw,
        }
    }

    pub fn raw(mut self) -> Self {
        self.normalization = Normalization::Raw;
        self
    }

    pub fn family(&self) -> &PotentialFamily {
        &self.family
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// The family's closed form, before normalisation.
    pub fn closed_form(&self, r: f64) -> f64 {
        match &self.family {
            PotentialFamily::Power { alpha } => r.powf(*alpha),
            PotentialFamily::LogPower { c, alpha } => {
                if r > 1.0 {
                    c * r.ln().powf(*alpha)
                } else {
                    0.0
                }
            }
            PotentialFamily::IteratedLog { depth } => {
                let mut y = r;
                for _ in 0..*depth {
                    if y <= 1.0 {
                        return 0.0;
                    }
                    y = y.ln();
                }
                y
            }
            PotentialFamily::Piecewise(t) => t.eval(r),
        }
    }

    /// `V(r)` for `r ≥ 0`.
    pub fn eval(&self, r: f64) -> f64 {
        let f = self.closed_form(r);
        match self.normalization {
            Normalization::Clamped => f.max(1.0),
            Normalization::Raw => f,
        }
    }

    /// Whether `V` is nondecreasing in `r` everywhere.
    pub fn is_monotone(&self) -> bool {
        match &self.family {
            PotentialFamily::Piecewise(t) => t.is_monotone(),
            _ => true,
        }
    }

    /// Infimum of `V` over `r ≥ 0`.
    pub fn infimum(&self) -> f64 {
        let f_min = match &self.family {
            PotentialFamily::Piecewise(t) => t.values.iter().copied().fold(f64::INFINITY, f64::min),
            _ => self.closed_form(0.0),
        };
        match self.normalization {
            Normalization::Clamped => f_min.max(1.0),
            Normalization::Raw => f_min,
        }
    }

    /// Radial extent of the region where the clamp replaces the closed form,
    /// `None` for raw potentials or when the closed form is already ≥ 1.
    pub fn smoothing_region(&self) -> Option<(f64, f64)> {
        if self.normalization == Normalization::Raw {
            return None;
        }
        match &self.family {
            PotentialFamily::Piecewise(t) => {
                let below: Vec<(f64, f64)> = t.sublevel(1.0);
                below.first().map(|&(a, _)| (a, below.last().unwrap().1))
            }
            _ => {
                let r1 = self.closed_form_level_radius(1.0);
                (r1 > 0.0).then_some((0.0, r1))
            }
        }
    }

    /// `sup{r : f(r) < level}` for the monotone closed forms.
    fn closed_form_level_radius(&self, level: f64) -> f64 {
        match &self.family {
            PotentialFamily::Power { alpha } => {
                if level <= 0.0 {
                    0.0
                } else {
                    level.powf(1.0 / alpha)
                }
            }
            PotentialFamily::LogPower { c, alpha } => {
                if level <= 0.0 {
                    0.0
                } else {
                    (level / c).powf(1.0 / alpha).exp()
                }
            }
            PotentialFamily::IteratedLog { depth } => {
                if level <= 0.0 {
                    0.0
                } else {
                    iterated_exp(level, *depth)
                }
            }
            PotentialFamily::Piecewise(t) => t.sublevel(level).last().map_or(0.0, |iv| iv.1),
        }
    }

    /// The sublevel set `{r : V(r) < level}` as disjoint half-open radial
    /// intervals in increasing order. Upper ends may be `+∞` when the level
    /// radius overflows `f64`.
    pub fn sublevel(&self, level: f64) -> Vec<(f64, f64)> {
        if self.normalization == Normalization::Clamped && level <= 1.0 {
            return Vec::new();
        }
        // for level > 1, max(1, f) < level ⇔ f < level
        match &self.family {
            PotentialFamily::Piecewise(t) => t.sublevel(level),
            _ => {
                let r = self.closed_form_level_radius(level);
                if r > 0.0 {
                    vec![(0.0, r)]
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Outermost radius of the sublevel set; 0 when it is empty.
    pub fn level_radius(&self, level: f64) -> f64 {
        self.sublevel(level).last().map_or(0.0, |iv| iv.1)
    }

    /// Radii in `(lo, hi)` where `V` has a kink.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = Vec::new();
        if let Some((_, end)) = self.smoothing_region() {
            pts.push(end);
        }
        match &self.family {
            PotentialFamily::LogPower { .. } | PotentialFamily::IteratedLog { .. } => pts.push(1.0),
            PotentialFamily::Piecewise(t) => pts.extend_from_slice(t.knots()),
            PotentialFamily::Power { .. } => {}
        }
        pts.retain(|&p| p > lo && p < hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `sup V − inf V` over the radial range `[lo, hi]`; exact for every
    /// family (monotone endpoints, or knots for tables).
    pub fn range_oscillation(&self, lo: f64, hi: f64) -> f64 {
        if self.is_monotone() {
            return self.eval(hi) - self.eval(lo);
        }
        let mut vmin = self.eval(lo).min(self.eval(hi));
        let mut vmax = self.eval(lo).max(self.eval(hi));
        for p in self.breakpoints(lo, hi) {
            let v = self.eval(p);
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
        vmax - vmin
    }

    pub fn spec(&self) -> String {
        let base = match &self.family {
            PotentialFamily::Power { alpha } => format!("power:{alpha}"),
            PotentialFamily::LogPower { c, alpha } => format!("logpow:{c}:{alpha}"),
            PotentialFamily::IteratedLog { depth } => format!("iterlog:{depth}"),
            PotentialFamily::Piecewise(t) => format!("piecewise:<{} knots>", t.radii.len()),
        };
        match self.normalization {
            Normalization::Clamped => base,
            Normalization::Raw => format!("{base}:raw"),
        }
    }

    /// Parse `power:<α>`, `logpow:<c>:<α>`, `iterlog:<depth>` or
    /// `piecewise:<path>`. A trailing `:raw` drops the `V ≥ 1` clamp.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (body, normalization) = match spec.strip_suffix(":raw") {
            Some(b) => (b, Normalization::Raw),
            None => (spec, Normalization::Clamped),
        };
        let num = |t: &str| -> Result<f64> {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {t:?} in potential {spec:?}")))
        };
        let (head, rest) = body
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("malformed potential {spec:?}")))?;
        let family = match head {
            "power" => PotentialFamily::Power { alpha: num(rest)? },
            "logpow" => {
                let (c, a) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("logpow needs c:α, got {rest:?}")))?;
                PotentialFamily::LogPower {
                    c: num(c)?,
                    alpha: num(a)?,
                }
            }
            "iterlog" => PotentialFamily::IteratedLog {
                depth: rest
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad depth {rest:?}")))?,
            },
            "piecewise" => PotentialFamily::Piecewise(PiecewiseTable::from_path(Path::new(rest))?),
            _ => return Err(Error::Parse(format!("unknown potential family {head:?}"))),
        };
        Self::new(family, normalization)
    }
}

impl fmt::Display for PotentialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

/// Radial range `[max(0, c − ρ), c + ρ]` swept by a metric ball of radius `ρ`
/// centred at radial coordinate `c`. Valid on every model below its
/// injectivity radius.
pub fn ball_radial_range(center: f64, ball_radius: f64) -> (f64, f64) {
    ((center - ball_radius).max(0.0), center + ball_radius)
}

/// Oscillation `sup − inf` of `V` over the closed metric ball of radius
/// `ball_radius` around a point at radial coordinate `center`.
pub fn oscillation(
    v: &PotentialModel,
    geometry: &GeometryModel,
    center: f64,
    ball_radius: f64,
) -> Result<f64> {
    if !(ball_radius >= 0.0) || !(center >= 0.0) {
        return Err(Error::Domain(
            "oscillation needs center ≥ 0 and ball radius ≥ 0".into(),
        ));
    }
    if ball_radius >= geometry.injectivity_radius() {
        return Err(Error::Precondition(format!(
            "ball radius {ball_radius} reaches the injectivity radius {}",
            geometry.injectivity_radius()
        )));
    }
    if ball_radius == 0.0 {
        return Ok(0.0);
    }
    let (lo, hi) = ball_radial_range(center, ball_radius);
    Ok(v.range_oscillation(lo, hi))
}
