//! End-to-end experiments: configuration files, CSV tables and declared
//! assertions.
//!
//! Every runner returns an [`ExperimentOutput`]: a table whose CSV form starts
//! with `# config-hash=<sha256>` (the hash of the canonical parameter text, so
//! identical configurations give byte-identical files) plus a list of
//! pass/fail [`Assertion`]s. Per-λ work runs in parallel; rows are always
//! emitted in grid order.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::heatkernel::{self, RemainderOptions};
use crate::invariants::{self, log_log_slope};
use crate::models::{GeometryKind, GeometryModel, PotentialModel};
use crate::phase::{self, QuadratureSettings};
use crate::quadrature::integrate;
use crate::spectral::{
    self, discretize_1d, BoundaryCondition, Eigendecomposition, MeshControl, Stencil,
};
use crate::tauberian::{self, MonotoneMeasure};

/// δ values used by the sweep mode.
pub const DELTA_SWEEP: [f64; 3] = [0.4, 0.2, 0.1];

pub const DEFAULT_DELTA: f64 = 0.2;

/// A strictly increasing λ grid together with the text it was parsed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    spec: String,
    values: Vec<f64>,
}

impl Grid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let spec = values
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        Self::checked(spec, values)
    }

    fn checked(spec: String, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("λ grid is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(format!(
                "λ grid {spec:?} is not strictly increasing"
            )));
        }
        Ok(Self { spec, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

/// `a,b,c`, `arith:<start>:<stop>:<step>` (inclusive) or
/// `geom:<start>:<ratio>:<count>`.
impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {x:?} in grid {s:?}")))
        };
        let fields: Vec<&str> = s.split(':').collect();
        let values = match fields.as_slice() {
            ["arith", a, b, d] => {
                let (a, b, d) = (num(a)?, num(b)?, num(d)?);
                if !(d > 0.0) || b < a {
                    return Err(Error::Parse(format!(
                        "arithmetic grid {s:?} needs step > 0 and stop ≥ start"
                    )));
                }
                let n = ((b - a) / d + 1e-9).floor() as usize;
                (0..=n).map(|i| a + i as f64 * d).collect()
            }
            ["geom", a, q, n] => {
                let (a, q) = (num(a)?, num(q)?);
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad count in grid {s:?}")))?;
                if !(a > 0.0 && q > 1.0) || n == 0 {
                    return Err(Error::Parse(format!(
                        "geometric grid {s:?} needs start > 0, ratio > 1, count ≥ 1"
                    )));
                }
                (0..n).map(|i| a * q.powi(i as i32)).collect()
            }
            [_] => s.split(',').map(num).collect::<Result<Vec<_>>>()?,
            _ => return Err(Error::Parse(format!("unrecognised grid {s:?}"))),
        };
        Self::checked(s.to_string(), values).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Expected verdict of the criterion trend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionExpectation {
    Satisfied,
    Fails,
}

impl FromStr for CriterionExpectation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "satisfied" => Ok(Self::Satisfied),
            "fails" => Ok(Self::Fails),
            other => Err(Error::Parse(format!(
                "expected satisfied|fails, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for CriterionExpectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Satisfied => "satisfied",
            Self::Fails => "fails",
        })
    }
}

/// Distance from 1 below which a Weyl ratio counts as exact.
pub const RATIO_TOL: f64 = 1e-9;

/// Expected behaviour of the measured `N/Φ` over the count grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioTrend {
    /// `|N/Φ − 1|` strictly decreasing over the upper half of the grid (or
    /// within [`RATIO_TOL`] of 0).
    ToOne,
    /// `Φ/N` strictly decreasing over the whole grid (Weyl law fails with
    /// `Φ = o(N)`).
    PhiOverNDecreasing,
    /// `N/Φ` strictly decreasing over the whole grid (`N = o(Φ)`).
    NOverPhiDecreasing,
}

impl RatioTrend {
    /// Check a sequence of `N/Φ` values.
    pub fn holds(self, ratios: &[f64]) -> bool {
        let strictly_down = |xs: &[f64]| xs.len() >= 2 && xs.windows(2).all(|w| w[1] < w[0]);
        match self {
            Self::ToOne => {
                // a ratio already equal to 1 up to rounding has nowhere left to go
                let dist: Vec<f64> = ratios[ratios.len() / 2..]
                    .iter()
                    .map(|r| (r - 1.0).abs())
                    .collect();
                dist.len() >= 2 && dist.windows(2).all(|w| w[1] < w[0] || w[1] <= RATIO_TOL)
            }
            Self::PhiOverNDecreasing => {
                ratios.iter().all(|&r| r > 0.0)
                    && strictly_down(&ratios.iter().map(|r| 1.0 / r).collect::<Vec<_>>())
            }
            Self::NOverPhiDecreasing => strictly_down(ratios),
        }
    }
}

impl FromStr for RatioTrend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "to-one" => Ok(Self::ToOne),
            "phi-over-n-decreasing" => Ok(Self::PhiOverNDecreasing),
            "n-over-phi-decreasing" => Ok(Self::NOverPhiDecreasing),
            other => Err(Error::Parse(format!(
                "expected to-one|phi-over-n-decreasing|n-over-phi-decreasing, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for RatioTrend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ToOne => "to-one",
            Self::PhiOverNDecreasing => "phi-over-n-decreasing",
            Self::NOverPhiDecreasing => "n-over-phi-decreasing",
        })
    }
}

/// Experiment configuration, read from flat `key = value` text.
///
/// | key | meaning | default |
/// |---|---|---|
/// | `geometry` | `line`, `euclidean:<n>`, `cylinder`, `hyperbolic3` | required |
/// | `potential` | `power:<α>`, `logpow:<c>:<α>`, `iterlog:<depth>`, `piecewise:<path>`, optional `:raw` | required |
/// | `lambdas` | λ grid (see [`Grid`]) | required |
/// | `criterion_lambdas` | grid for the criterion trend | the points of `lambdas` ≥ 3 |
/// | `delta` | δ ∈ (0, 1) | 0.2 |
/// | `delta_sweep` | also run δ ∈ {0.4, 0.2, 0.1} | false |
/// | `h_initial` | starting mesh width | automatic |
/// | `refinement_rounds` | mesh halvings allowed | 8 |
/// | `stencil` | `compact4` or `central2` | compact4 |
/// | `expect_criterion` | `satisfied` or `fails` | none |
/// | `expect_ratio` | `to-one`, `phi-over-n-decreasing`, `n-over-phi-decreasing` | none |
/// | `output` | CSV path | stdout |
///
/// Blank lines and lines starting with `#` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: GeometryModel,
    pub potential: PotentialModel,
    /// The potential as written (piecewise paths are not recoverable from
    /// the model).
    pub potential_spec: String,
    pub delta: f64,
    pub delta_sweep: bool,
    pub lambdas: Grid,
    pub criterion_lambdas: Option<Grid>,
    pub mesh: MeshControl,
    pub expect_criterion: Option<CriterionExpectation>,
    pub expect_ratio: Option<RatioTrend>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(geometry: GeometryModel, potential_spec: &str, lambdas: Grid) -> Result<Self> {
        Ok(Self {
            geometry,
            potential: PotentialModel::parse(potential_spec)?,
            potential_spec: potential_spec.to_string(),
            delta: DEFAULT_DELTA,
            delta_sweep: false,
            lambdas,
            criterion_lambdas: None,
            mesh: MeshControl::default(),
            expect_criterion: None,
            expect_ratio: None,
            output: None,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: Vec<(String, String)> = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", no + 1)))?;
            let k = k.trim().to_string();
            if kv.iter().any(|(seen, _)| *seen == k) {
                return Err(Error::Parse(format!(
                    "line {}: duplicate key {k:?}",
                    no + 1
                )));
            }
            kv.push((k, v.trim().to_string()));
        }
        let get = |k: &str| kv.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let require = |k: &str| get(k).ok_or_else(|| Error::Parse(format!("missing key {k:?}")));
        let num = |k: &str, v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Parse(format!("{k}: bad number {v:?}")))
        };

        let geometry: GeometryModel = require("geometry")?.parse()?;
        let mut cfg = Self::new(
            geometry,
            require("potential")?,
            require("lambdas")?.parse()?,
        )?;
        for (k, v) in &kv {
            match k.as_str() {
                "geometry" | "potential" | "lambdas" => {}
                "criterion_lambdas" => cfg.criterion_lambdas = Some(v.parse()?),
                "delta" => cfg.delta = num(k, v)?,
                "delta_sweep" => {
                    cfg.delta_sweep = v.parse().map_err(|_| {
                        Error::Parse(format!("delta_sweep: expected true|false, got {v:?}"))
                    })?
                }
                "h_initial" => cfg.mesh.h_initial = Some(num(k, v)?),
                "refinement_rounds" => {
                    cfg.mesh.max_rounds = v
                        .parse()
                        .map_err(|_| Error::Parse(format!("refinement_rounds: bad count {v:?}")))?
                }
                "stencil" => cfg.mesh.stencil = parse_stencil(v)?,
                "expect_criterion" => cfg.expect_criterion = Some(v.parse()?),
                "expect_ratio" => cfg.expect_ratio = Some(v.parse()?),
                "output" => cfg.output = Some(PathBuf::from(v)),
                other => return Err(Error::Parse(format!("unknown key {other:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        self.mesh.validate()
    }

    /// Canonical text: one `key=value` per line in a fixed order, defaults
    /// written out. Hashing this rather than the file makes the hash
    /// insensitive to comments, spacing and key order.
    pub fn canonical(&self) -> String {
        let opt = |x: Option<String>| x.unwrap_or_else(|| "-".into());
        [
            format!("geometry={}", self.geometry.spec()),
            format!("potential={}", self.potential_spec),
            format!("lambdas={}", self.lambdas),
            format!(
                "criterion_lambdas={}",
                opt(self.criterion_lambdas.as_ref().map(Grid::to_string))
            ),
            format!("delta={}", self.delta),
            format!("delta_sweep={}", self.delta_sweep),
            format!(
                "h_initial={}",
                opt(self.mesh.h_initial.map(|h| h.to_string()))
            ),
            format!("refinement_rounds={}", self.mesh.max_rounds),
            format!("stencil={}", stencil_name(self.mesh.stencil)),
            format!(
                "expect_criterion={}",
                opt(self.expect_criterion.map(|e| e.to_string()))
            ),
            format!(
                "expect_ratio={}",
                opt(self.expect_ratio.map(|e| e.to_string()))
            ),
        ]
        .join("\n")
    }

    pub fn hash(&self) -> String {
        config_hash(&self.canonical())
    }

    fn deltas(&self) -> Vec<f64> {
        if self.delta_sweep {
            DELTA_SWEEP.to_vec()
        } else {
            vec![self.delta]
        }
    }

    fn criterion_grid(&self) -> Vec<f64> {
        match &self.criterion_lambdas {
            Some(g) => g.values().to_vec(),
            None => self
                .lambdas
                .values()
                .iter()
                .copied()
                .filter(|&l| l >= 3.0)
                .collect(),
        }
    }
}

fn parse_stencil(s: &str) -> Result<Stencil> {
    match s {
        "compact4" => Ok(Stencil::Compact4),
        "central2" => Ok(Stencil::Central2),
        other => Err(Error::Parse(format!(
            "stencil: expected compact4|central2, got {other:?}"
        ))),
    }
}

fn stencil_name(s: Stencil) -> &'static str {
    match s {
        Stencil::Compact4 => "compact4",
        Stencil::Central2 => "central2",
    }
}

/// SHA-256 of `canonical`, lowercase hex.
pub fn config_hash(canonical: &str) -> String {
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// A named pass/fail check.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// `ASSERT PASS <name>: <detail>`; one line, for CI logs.
impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "ASSERT {verdict} {}: {}", self.name, self.detail)
    }
}

/// A rectangular table of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Column values by header name.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    /// `# config-hash=<hash>` followed by RFC-4180 CSV; every row also
    /// carries the hash in a trailing `config_hash` column so rows stay
    /// attributable after files are concatenated.
    pub fn write_csv<W: Write>(&self, hash: &str, mut out: W) -> Result<()> {
        writeln!(out, "# config-hash={hash}")?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(out);
        let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(
            self.header
                .iter()
                .map(String::as_str)
                .chain(["config_hash"]),
        )
        .map_err(to_io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(String::as_str).chain([hash]))
                .map_err(to_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self, hash: &str) -> String {
        let mut buf = Vec::new();
        self.write_csv(hash, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub name: String,
    pub config_hash: String,
    pub table: Table,
    pub assertions: Vec<Assertion>,
    /// Informational lines that are not assertions.
    pub notes: Vec<String>,
}

impl ExperimentOutput {
    fn new(name: &str, canonical: &str, table: Table) -> Self {
        Self {
            name: name.to_string(),
            config_hash: config_hash(canonical),
            table,
            assertions: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn csv(&self) -> String {
        self.table.to_csv(&self.config_hash)
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion::new(name, passed, detail));
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// σ, Φ and its quadrature error on the grid.
pub fn run_phi(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let s = QuadratureSettings::default();
    let mut table = Table::new(&["lambda", "sigma", "phi", "phi_abs_err"]);
    let rows = cfg
        .lambdas
        .values()
        .par_iter()
        .map(|&l| -> Result<Vec<String>> {
            let sigma = phase::sigma(&cfg.geometry, &cfg.potential, l)?;
            let phi = phase::phi(&cfg.geometry, &cfg.potential, l, &s)?;
            Ok(vec![
                fmt_f(l),
                fmt_f(sigma),
                fmt_f(phi.value),
                fmt_f(phi.abs_err),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    let mut out = ExperimentOutput::new("phi", &cfg.canonical(), table);
    let phis: Vec<f64> = out
        .table
        .column("phi")
        .unwrap()
        .iter()
        .map(|x| x.parse().unwrap())
        .collect();
    out.check(
        "phi-nondecreasing",
        phis.windows(2).all(|w| w[1] >= w[0]),
        format!("{} grid points", phis.len()),
    );
    Ok(out)
}

/// Full invariant reports, optionally for every δ of the sweep, plus the
/// criterion trend when the grid allows it.
pub fn run_invariants(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let s = QuadratureSettings::default();
    let mut table = Table::new(&[
        "delta",
        "lambda",
        "sigma",
        "phi",
        "a",
        "d_delta",
        "b_delta",
        "b_flag",
        "k",
        "c_delta",
        "doubling_ratio",
        "status",
    ]);
    let mut assertions = Vec::new();
    let mut notes = Vec::new();
    for delta in cfg.deltas() {
        let rows: Vec<(f64, Result<invariants::InvariantReport>)> = cfg
            .lambdas
            .values()
            .par_iter()
            .map(|&l| {
                (
                    l,
                    invariants::c_delta(&cfg.geometry, &cfg.potential, l, delta, &s),
                )
            })
            .collect();
        for (l, r) in rows {
            match r {
                Ok(r) => {
                    let flag = if r.b_effectively_infinite {
                        "infinite"
                    } else if r.b_injectivity_capped {
                        "injectivity"
                    } else {
                        "finite"
                    };
                    table.push(vec![
                        fmt_f(delta),
                        fmt_f(l),
                        fmt_f(r.sigma),
                        fmt_f(r.phi),
                        fmt_f(r.a),
                        fmt_f(r.d_delta),
                        fmt_f(r.b_delta),
                        flag.into(),
                        fmt_f(r.k),
                        fmt_f(r.c_delta),
                        fmt_f(r.doubling_ratio),
                        "ok".into(),
                    ]);
                    assertions.push(Assertion::new(
                        format!("report-inequalities delta={delta} lambda={l}"),
                        true,
                        format!("d_δ = {} < λ, a = {} ≤ λ", r.d_delta, r.a),
                    ));
                }
                Err(e) => {
                    let mut row = vec![fmt_f(delta), fmt_f(l)];
                    row.extend(std::iter::repeat_n(String::new(), 9));
                    row.push(format!("error: {e}"));
                    table.push(row);
                    assertions.push(Assertion::new(
                        format!("report delta={delta} lambda={l}"),
                        false,
                        e.to_string(),
                    ));
                }
            }
        }
        let (note, a) = criterion_check(cfg, delta, &s);
        notes.extend(note);
        assertions.extend(a);
    }
    let mut out = ExperimentOutput::new("invariants", &cfg.canonical(), table);
    out.assertions = assertions;
    out.notes = notes;
    Ok(out)
}

/// Criterion verdict on the configured grid as a note, plus an assertion when
/// a verdict is expected. Grids too short for a trend yield nothing unless a
/// verdict was declared, in which case the assertion fails.
fn criterion_check(
    cfg: &ExperimentConfig,
    delta: f64,
    s: &QuadratureSettings,
) -> (Option<String>, Option<Assertion>) {
    let grid = cfg.criterion_grid();
    let name = format!("criterion delta={delta}");
    let verdict = match invariants::criterion_trend(&cfg.geometry, &cfg.potential, delta, &grid, s)
    {
        Ok(v) => v,
        Err(e) => {
            return (
                None,
                cfg.expect_criterion
                    .map(|_| Assertion::new(name, false, e.to_string())),
            )
        }
    };
    let got = if verdict.satisfied {
        CriterionExpectation::Satisfied
    } else {
        CriterionExpectation::Fails
    };
    let summary = format!(
        "{got} (slope {:.3}, upper half decreasing: {}, λ ∈ {grid:?})",
        verdict.slope, verdict.decreasing_upper_half
    );
    let assertion = cfg.expect_criterion.map(|expect| {
        Assertion::new(
            name,
            got == expect,
            format!("expected {expect}, got {summary}"),
        )
    });
    (
        Some(format!("criterion at δ = {delta}: {summary}")),
        assertion,
    )
}

/// Bracketed counts on the grid.
pub fn run_count(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut table = Table::new(&[
        "lambda",
        "lower",
        "upper",
        "h",
        "truncation",
        "channels",
        "status",
    ]);
    let brackets = count_grid(cfg);
    let mut ok = Vec::new();
    for (l, b) in cfg.lambdas.values().iter().zip(&brackets) {
        match b {
            Ok(b) => {
                table.push(vec![
                    fmt_f(*l),
                    b.lower.to_string(),
                    b.upper.to_string(),
                    fmt_f(b.h),
                    fmt_f(b.truncation),
                    b.channels.to_string(),
                    "ok".into(),
                ]);
                ok.push(spectral::CountSample {
                    lambda: *l,
                    lower: b.lower,
                    upper: b.upper,
                });
            }
            Err(e) => table.push(vec![
                fmt_f(*l),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                format!("error: {e}"),
            ]),
        }
    }
    let mut out = ExperimentOutput::new("count", &cfg.canonical(), table);
    for (l, b) in cfg.lambdas.values().iter().zip(&brackets) {
        if let Err(e) = b {
            out.check(format!("count lambda={l}"), false, e.to_string());
        }
    }
    let cf = spectral::CountingFunction {
        samples: ok,
        provenance: String::new(),
    };
    let check = cf.check();
    out.check(
        "brackets-ordered-and-monotone",
        check.is_ok(),
        check.err().map_or("ok".into(), |e| e.to_string()),
    );
    Ok(out)
}

fn count_grid(cfg: &ExperimentConfig) -> Vec<Result<spectral::Bracket>> {
    cfg.lambdas
        .values()
        .par_iter()
        .map(|&l| spectral::count(&cfg.geometry, &cfg.potential, l, &cfg.mesh))
        .collect()
}

/// Counts against the Weyl integral, with the criterion value per λ (where
/// defined) and the declared trend/verdict assertions.
pub fn run_weyl_ratio(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let s = QuadratureSettings::default();
    let mut table = Table::new(&[
        "lambda",
        "n_lower",
        "n_upper",
        "phi",
        "ratio_lower",
        "ratio_upper",
        "c_delta",
        "status",
    ]);
    let brackets = count_grid(cfg);
    let extras: Vec<(Result<f64>, Option<f64>)> = cfg
        .lambdas
        .values()
        .par_iter()
        .map(|&l| {
            let phi = phase::phi(&cfg.geometry, &cfg.potential, l, &s).map(|e| e.value);
            let c = (l >= 3.0)
                .then(|| {
                    invariants::c_delta(&cfg.geometry, &cfg.potential, l, cfg.delta, &s)
                        .ok()
                        .map(|r| r.c_delta)
                })
                .flatten();
            (phi, c)
        })
        .collect();
    let mut ratios = Vec::new();
    let mut failures = Vec::new();
    for ((l, b), (phi, c)) in cfg.lambdas.values().iter().zip(brackets).zip(extras) {
        let c_cell = c.map(fmt_f).unwrap_or_default();
        match (b, phi) {
            (Ok(b), Ok(phi)) => {
                let (rl, ru) = (b.lower as f64 / phi, b.upper as f64 / phi);
                ratios.push(0.5 * (rl + ru));
                table.push(vec![
                    fmt_f(*l),
                    b.lower.to_string(),
                    b.upper.to_string(),
                    fmt_f(phi),
                    fmt_f(rl),
                    fmt_f(ru),
                    c_cell,
                    "ok".into(),
                ]);
            }
            (b, phi) => {
                let e = b.err().or(phi.err()).expect("one side failed");
                failures.push(format!("count lambda={l}: {e}"));
                let mut row = vec![fmt_f(*l)];
                row.extend(std::iter::repeat_n(String::new(), 5));
                row.push(c_cell);
                row.push(format!("error: {e}"));
                table.push(row);
            }
        }
    }
    let mut out = ExperimentOutput::new("weyl-ratio", &cfg.canonical(), table);
    for f in failures {
        out.check(f, false, "no count at this λ");
    }
    if let Some(trend) = cfg.expect_ratio {
        let complete = ratios.len() == cfg.lambdas.values().len();
        out.check(
            format!("ratio-trend {trend}"),
            complete && trend.holds(&ratios),
            format!("N/Φ = {ratios:?}"),
        );
    }
    let (note, a) = criterion_check(cfg, cfg.delta, &s);
    out.notes.extend(note);
    out.assertions.extend(a);
    Ok(out)
}

/// Normalised quadrature bounds for the product-space counterexample:
/// `I_p(λ) = ∫_1^{exp((λ/c)²)} (λ − c√ln x)^p dx`.
pub fn rxs1_integral(lambda: f64, c: f64, p: f64) -> Result<f64> {
    if !(c > 0.0 && lambda > 0.0) {
        return Err(Error::Domain(format!("need λ, c > 0, got {lambda}, {c}")));
    }
    // x = e^{r²}: I_p = c^p · 2∫₀^Λ (Λ − r)^p r e^{r²} dr, Λ = λ/c; the
    // factor e^{-Λ²} is folded into the integrand and restored at the end
    let big = lambda / c;
    let s = QuadratureSettings::default().with_rel_tol(1e-12);
    let inner = integrate(
        |r| 2.0 * (big - r).max(0.0).powf(p) * r * (r * r - big * big).exp(),
        0.0,
        big,
        &s,
    )?
    .value;
    Ok(c.powf(p) * inner * (big * big).exp())
}

/// Quadrature window for the counterexample (`λ/c`).
pub const RXS1_QUADRATURE_WINDOW: (f64, f64) = (2.0, 6.0);
/// Count window (`λ/c`): the sublevel set reaches `exp((λ/c)²)`.
pub const RXS1_COUNT_WINDOW: (f64, f64) = (2.0, 3.5);
/// Fixed floor for `I_{1/2}(λ)·λ^{1/2}e^{−λ²}` and ceiling for
/// `I_1(λ)·λe^{−λ²}` (about half and twice their limits Γ(3/2)/√2 and ½).
pub const RXS1_FLOOR: f64 = 0.3;
pub const RXS1_CEILING: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Rxs1Params {
    pub c: f64,
    pub quadrature_lambdas: Grid,
    pub count_lambdas: Grid,
    pub mesh: MeshControl,
}

impl Default for Rxs1Params {
    fn default() -> Self {
        Self {
            c: 1.0,
            quadrature_lambdas: "arith:2:4:0.25".parse().expect("valid grid"),
            count_lambdas: "2,2.5,3,3.5".parse().expect("valid grid"),
            mesh: MeshControl::default(),
        }
    }
}

/// `V = c√ln|x|` on ℝ and on ℝ×S¹: the quadrature bounds, both counts, and
/// the trend of `Φ/N` on the product space.
pub fn run_counterexample_rxs1(p: &Rxs1Params) -> Result<ExperimentOutput> {
    let in_window = |g: &Grid, (lo, hi): (f64, f64)| {
        g.values()
            .iter()
            .all(|&l| l / p.c >= lo - 1e-12 && l / p.c <= hi + 1e-12)
    };
    if !in_window(&p.quadrature_lambdas, RXS1_QUADRATURE_WINDOW) {
        return Err(Error::Infeasible(format!(
            "quadrature grid must satisfy λ/c ∈ [{}, {}]; sublevel volumes grow like e^(λ/c)²",
            RXS1_QUADRATURE_WINDOW.0, RXS1_QUADRATURE_WINDOW.1
        )));
    }
    if !in_window(&p.count_lambdas, RXS1_COUNT_WINDOW) {
        return Err(Error::Infeasible(format!(
            "count grid must satisfy λ/c ∈ [{}, {}]; larger λ needs more than 10⁸ grid nodes",
            RXS1_COUNT_WINDOW.0, RXS1_COUNT_WINDOW.1
        )));
    }
    let v = PotentialModel::log_power(p.c, 0.5)?;
    let canonical = format!(
        "example=rxs1\nc={}\nquadrature_lambdas={}\ncount_lambdas={}\nstencil={}",
        p.c,
        p.quadrature_lambdas,
        p.count_lambdas,
        stencil_name(p.mesh.stencil)
    );
    let s = QuadratureSettings::default();
    let mut all: Vec<f64> = p
        .quadrature_lambdas
        .values()
        .iter()
        .chain(p.count_lambdas.values())
        .copied()
        .collect();
    all.sort_by(f64::total_cmp);
    all.dedup();

    let rows: Vec<Result<[Option<f64>; 7]>> = all
        .par_iter()
        .map(|&l| {
            let quad = p.quadrature_lambdas.values().contains(&l);
            let counted = p.count_lambdas.values().contains(&l);
            let (i1, i2) = if quad {
                (
                    Some(rxs1_integral(l, p.c, 0.5)?),
                    Some(rxs1_integral(l, p.c, 1.0)?),
                )
            } else {
                (None, None)
            };
            let (n_line, n_cyl, phi2) = if counted {
                let line = spectral::count_line(&v, l, &p.mesh)?;
                let cyl = spectral::count_cylinder(&v, l, &p.mesh)?;
                let phi2 = phase::phi(&GeometryModel::cylinder(), &v, l, &s)?.value;
                (Some(line.lower as f64), Some(cyl.lower as f64), Some(phi2))
            } else {
                (None, None, None)
            };
            let norm1 = i1.map(|i| i * l.sqrt() * (-l * l).exp());
            let norm2 = i2.map(|i| i * l * (-l * l).exp());
            Ok([i1, i2, norm1, norm2, n_line, n_cyl, phi2])
        })
        .collect();

    let mut table = Table::new(&[
        "lambda",
        "i1",
        "i2",
        "i1_normalized",
        "i2_normalized",
        "n_line",
        "n_cylinder",
        "phi_cylinder",
        "phi_over_n",
    ]);
    let mut norm1 = Vec::new();
    let mut norm2 = Vec::new();
    let mut ratio_i = Vec::new();
    let mut counts = Vec::new();
    for (&l, row) in all.iter().zip(rows) {
        let [i1, i2, n1, n2, nl, nc, phi2] = row?;
        let cell = |x: Option<f64>| x.map(fmt_f).unwrap_or_default();
        let phi_over_n = match (phi2, nc) {
            (Some(phi), Some(n)) if n > 0.0 => Some(phi / n),
            _ => None,
        };
        if let (Some(a), Some(b)) = (n1, n2) {
            norm1.push((l, a));
            norm2.push((l, b));
            ratio_i.push((l, i2.unwrap() / i1.unwrap()));
        }
        if let (Some(nl), Some(nc)) = (nl, nc) {
            counts.push((l, nl, nc, phi_over_n));
        }
        table.push(vec![
            fmt_f(l),
            cell(i1),
            cell(i2),
            cell(n1),
            cell(n2),
            cell(nl),
            cell(nc),
            cell(phi2),
            cell(phi_over_n),
        ]);
    }
    let mut out = ExperimentOutput::new("rxs1", &canonical, table);
    let min1 = norm1.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let max2 = norm2.iter().map(|x| x.1).fold(0.0, f64::max);
    out.check(
        "i1-floor",
        min1 >= RXS1_FLOOR,
        format!("min I₁·λ^½e^(−λ²) = {min1} ≥ {RXS1_FLOOR}"),
    );
    out.check(
        "i2-ceiling",
        max2 <= RXS1_CEILING,
        format!("max I₂·λe^(−λ²) = {max2} ≤ {RXS1_CEILING}"),
    );
    if let (Some(first), Some(last)) = (ratio_i.first(), ratio_i.last()) {
        out.check(
            "i2-over-i1-drops",
            last.1 <= 0.8 * first.1,
            format!(
                "I₂/I₁ = {} at λ = {} vs {} at λ = {}",
                last.1, last.0, first.1, first.0
            ),
        );
    }
    for &(l, nl, nc, _) in &counts {
        out.check(
            format!("product-count-dominates lambda={l}"),
            nc >= nl,
            format!("N(ℝ×S¹) = {nc} ≥ N(ℝ) = {nl}"),
        );
    }
    let pn: Vec<f64> = counts.iter().filter_map(|c| c.3).collect();
    out.check(
        "phi-over-n-decreasing",
        pn.len() == counts.len() && pn.len() >= 2 && strictly_decreasing(&pn),
        format!("Φ/N = {pn:?}"),
    );
    Ok(out)
}

/// The hyperbolic counterexample `V = r^{1/2}` on H³, in its feasibility
/// window: criterion fails and `N/Φ` decreases.
pub fn h3_fail_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        GeometryModel::hyperbolic3(),
        "power:0.5",
        "3,3.25,3.5,3.75,4".parse().unwrap(),
    )
    .expect("valid potential");
    cfg.criterion_lambdas = Some("3,4,5,6".parse().unwrap());
    cfg.expect_criterion = Some(CriterionExpectation::Fails);
    cfg.expect_ratio = Some(RatioTrend::NOverPhiDecreasing);
    cfg
}

pub fn run_h3_fail() -> Result<ExperimentOutput> {
    let mut out = run_weyl_ratio(&h3_fail_config())?;
    out.name = "h3-fail".into();
    Ok(out)
}

/// Grid for the positive families whose sublevel radii stay in `f64` range.
fn positive_families() -> Vec<(&'static str, GeometryModel, PotentialModel, Vec<f64>)> {
    vec![
        (
            "line ln|x|",
            GeometryModel::line(),
            PotentialModel::log_power(1.0, 1.0).unwrap(),
            vec![10.0, 20.0, 30.0, 40.0, 50.0],
        ),
        (
            "line ln ln|x|",
            GeometryModel::line(),
            PotentialModel::iterated_log(2).unwrap(),
            vec![3.0, 3.25, 3.5, 3.75, 4.0],
        ),
        (
            "cylinder (ln|x|)^2",
            GeometryModel::cylinder(),
            PotentialModel::log_power(1.0, 2.0).unwrap(),
            vec![25.0, 50.0, 100.0, 200.0],
        ),
        (
            "hyperbolic3 r^2",
            GeometryModel::hyperbolic3(),
            PotentialModel::power(2.0).unwrap(),
            vec![25.0, 50.0, 100.0, 200.0],
        ),
    ]
}

/// Bounded window for `a(λ)` when `V = ln|x|` (exactly `ln 2 / 2` once the clamp is inactive).
pub const LOG_A_WINDOW: (f64, f64) = (0.25, 1.5);

/// Slow-growing potentials for which the criterion should hold, with the
/// growth-type claims checked as trends.
pub fn run_positive_examples(delta: f64) -> Result<ExperimentOutput> {
    let s = QuadratureSettings::default();
    let canonical = format!("example=positive\ndelta={delta}");
    let mut table = Table::new(&["family", "lambda", "a", "b_delta", "k", "c_delta"]);
    let mut assertions = Vec::new();
    for (name, g, v, grid) in positive_families() {
        let verdict = invariants::criterion_trend(&g, &v, delta, &grid, &s)?;
        for r in &verdict.reports {
            table.push(vec![
                name.into(),
                fmt_f(r.lambda),
                fmt_f(r.a),
                fmt_f(r.b_delta),
                fmt_f(r.k),
                fmt_f(r.c_delta),
            ]);
        }
        assertions.push(Assertion::new(
            format!("criterion-satisfied {name}"),
            verdict.satisfied,
            format!(
                "slope {:.3}, upper half decreasing: {}",
                verdict.slope, verdict.decreasing_upper_half
            ),
        ));
        let lambdas: Vec<f64> = verdict.reports.iter().map(|r| r.lambda).collect();
        let a: Vec<f64> = verdict.reports.iter().map(|r| r.a).collect();
        match (g.kind(), name) {
            (GeometryKind::Line, "line ln|x|") => {
                let ok = a
                    .iter()
                    .all(|&x| x >= LOG_A_WINDOW.0 && x <= LOG_A_WINDOW.1);
                assertions.push(Assertion::new(
                    "a-bounded line ln|x|",
                    ok,
                    format!("a = {a:?} within {LOG_A_WINDOW:?}"),
                ));
            }
            (GeometryKind::Cylinder, _) | (GeometryKind::Hyperbolic3, _) => {
                // a ≈ λ^{(α−1)/α} with α = 2
                let slope = log_log_slope(&lambdas, &a).unwrap_or(f64::NAN);
                assertions.push(Assertion::new(
                    format!("a-growth {name}"),
                    (slope - 0.5).abs() <= 0.15,
                    format!("slope of log a vs log λ = {slope:.3}, expected 0.5 ± 0.15"),
                ));
            }
            _ => {}
        }
        if g.kind() == GeometryKind::Hyperbolic3 {
            assertions.push(Assertion::new(
                format!("c-decay {name}"),
                verdict.slope < -0.1 && verdict.decreasing_upper_half,
                format!("slope of log c_δ = {:.3}", verdict.slope),
            ));
        }
    }
    let mut out = ExperimentOutput::new("positive", &canonical, table);
    out.assertions = assertions;
    Ok(out)
}

/// Doubling ratios above this count as unbounded.
pub const DOUBLING_BOUND: f64 = 1e3;

/// `V = x²` (doubling) against `V = ln|x|` (not doubling).
pub fn run_doubling_survey() -> Result<ExperimentOutput> {
    let s = QuadratureSettings::default();
    let grid = [10.0, 20.0, 40.0, 80.0];
    let line = GeometryModel::line();
    let mut table = Table::new(&[
        "potential",
        "lambda",
        "doubling_ratio",
        "a_over_lambda",
        "c_delta",
    ]);
    let mut out_assertions = Vec::new();
    for (name, v) in [
        ("x^2", PotentialModel::harmonic_oscillator()),
        ("ln|x|", PotentialModel::log_power(1.0, 1.0)?),
    ] {
        let d = invariants::doubling_check(&line, &v, &grid, DOUBLING_BOUND)?;
        let verdict = invariants::criterion_trend(&line, &v, DEFAULT_DELTA, &grid, &s)?;
        for (r, ratio) in verdict.reports.iter().zip(&d.ratios) {
            table.push(vec![
                name.into(),
                fmt_f(r.lambda),
                ratio.map(fmt_f).unwrap_or_default(),
                fmt_f(r.a / r.lambda),
                fmt_f(r.c_delta),
            ]);
        }
        if name == "x^2" {
            let sqrt2 = d
                .ratios
                .iter()
                .flatten()
                .all(|r| (r - 2f64.sqrt()).abs() < 1e-9);
            out_assertions.push(Assertion::new(
                "doubling-constant x^2",
                sqrt2 && d.holds,
                format!("σ(2λ)/σ(λ) = {:?}", d.ratios),
            ));
            let a_ok = verdict
                .reports
                .iter()
                .all(|r| (r.a / r.lambda - 0.6).abs() < 1e-6);
            out_assertions.push(Assertion::new("a-over-lambda x^2", a_ok, "a(λ)/λ = 0.6"));
            out_assertions.push(Assertion::new(
                "criterion-satisfied x^2",
                verdict.satisfied,
                format!("slope {:.3}", verdict.slope),
            ));
        } else {
            out_assertions.push(Assertion::new(
                "doubling-unbounded ln|x|",
                !d.holds,
                format!("σ(2λ)/σ(λ) = {:?} exceeds {DOUBLING_BOUND}", d.ratios),
            ));
        }
    }
    let mut out = ExperimentOutput::new("doubling", "example=doubling", table);
    out.assertions = out_assertions;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatCase {
    Parametrix,
    H3,
    Lemma21,
    Remainder,
}

impl FromStr for HeatCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parametrix" => Ok(Self::Parametrix),
            "h3" => Ok(Self::H3),
            "lemma21" => Ok(Self::Lemma21),
            "remainder" => Ok(Self::Remainder),
            other => Err(Error::Parse(format!(
                "expected parametrix|h3|lemma21|remainder, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for HeatCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Parametrix => "parametrix",
            Self::H3 => "h3",
            Self::Lemma21 => "lemma21",
            Self::Remainder => "remainder",
        })
    }
}

/// Slope window the remainder fit is checked against.
pub const REMAINDER_SLOPE_WINDOW: (f64, f64) = (0.35, 0.65);

fn remainder_potential(x: f64) -> f64 {
    5.0 + (2.0 * std::f64::consts::PI * x).sin()
}

/// Heat-kernel checks as `(x, lhs, rhs, margin, slope)` rows, where `x` is
/// `t` or `λ`.
pub fn run_heat_check(case: HeatCase) -> Result<ExperimentOutput> {
    let mut table = Table::new(&["x", "lhs", "rhs", "margin", "slope"]);
    let canonical = format!("heat-check case={case}");
    let mut assertions = Vec::new();
    match case {
        HeatCase::Parametrix | HeatCase::Remainder => {
            let ts = heatkernel::log_grid(-4.0, -2.0, 9);
            let opts = RemainderOptions::default();
            let pts = heatkernel::remainder_differences(
                remainder_potential,
                (0.0, 1.0),
                0.5,
                &ts,
                &opts,
            )?;
            if case == HeatCase::Parametrix {
                for p in &pts {
                    table.push(vec![
                        fmt_f(p.t),
                        fmt_f(p.kernel),
                        fmt_f(p.parametrix),
                        fmt_f((p.kernel / p.parametrix - 1.0).abs()),
                        String::new(),
                    ]);
                }
                let first = &pts[0];
                let r = first.kernel * (4.0 * std::f64::consts::PI * first.t).sqrt();
                assertions.push(Assertion::new(
                    "small-time-limit",
                    (r - 1.0).abs() <= 0.02,
                    format!("K(t,x,x)(4πt)^½ = {r} at t = {}", first.t),
                ));
            } else {
                let fit = heatkernel::remainder_scaling_fit(
                    remainder_potential,
                    (0.0, 1.0),
                    0.5,
                    &ts,
                    &opts,
                )?;
                for p in &fit.points {
                    table.push(vec![
                        fmt_f(p.t),
                        fmt_f(p.kernel),
                        fmt_f(p.parametrix),
                        fmt_f(p.difference),
                        fmt_f(fit.slope),
                    ]);
                }
                let (lo, hi) = REMAINDER_SLOPE_WINDOW;
                assertions.push(Assertion::new(
                    "remainder-slope",
                    fit.slope >= lo && fit.slope <= hi,
                    format!("fitted slope {:.4}, window [{lo}, {hi}]", fit.slope),
                ));
            }
        }
        HeatCase::H3 => {
            for t in [0.1, 1.0, 10.0] {
                let m = heatkernel::h3_kernel_mass(t)?;
                table.push(vec![
                    fmt_f(t),
                    fmt_f(m),
                    "1".into(),
                    fmt_f((m - 1.0).abs()),
                    String::new(),
                ]);
                assertions.push(Assertion::new(
                    format!("h3-mass t={t}"),
                    (m - 1.0).abs() <= 1e-6,
                    format!("mass {m}"),
                ));
            }
        }
        HeatCase::Lemma21 => {
            let op = discretize_1d(|x| x * x, (-6.0, 6.0), 0.05, BoundaryCondition::Dirichlet)?;
            let eig = Eigendecomposition::of(&op)?;
            let lambdas: Vec<f64> = (1..=50).map(|i| 0.5 * i as f64).collect();
            let mid = eig.nodes.len() / 2;
            for r in heatkernel::lemma21_check(&eig, &lambdas, mid)? {
                table.push(vec![
                    fmt_f(r.lambda),
                    fmt_f(r.lhs),
                    fmt_f(r.rhs),
                    fmt_f(r.rhs - r.lhs),
                    String::new(),
                ]);
            }
            let mut violations = 0usize;
            for node in 0..eig.nodes.len() {
                violations += heatkernel::lemma21_check(&eig, &lambdas, node)?
                    .iter()
                    .filter(|r| !r.holds)
                    .count();
            }
            assertions.push(Assertion::new(
                "lemma21-all-nodes",
                violations == 0,
                format!(
                    "{violations} violations over {} nodes × {} λ",
                    eig.nodes.len(),
                    lambdas.len()
                ),
            ));
        }
    }
    let mut out = ExperimentOutput::new("heat-check", &canonical, table);
    out.assertions = assertions;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauberianParams {
    pub mu: MonotoneMeasure,
    pub nu: MonotoneMeasure,
    pub epsilon: f64,
    pub lambda1: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub s_points: usize,
    pub cap: f64,
}

impl Default for TauberianParams {
    fn default() -> Self {
        Self {
            mu: MonotoneMeasure::harmonic_oscillator(),
            nu: MonotoneMeasure::shifted_power(0.5, 0.0, 1.0).expect("valid measure"),
            epsilon: 0.1,
            lambda1: 1.0,
            s_min: 20.0,
            s_max: 2000.0,
            s_points: 400,
            cap: 1e3,
        }
    }
}

/// Hypothesis checks and the conclusion search, as a CSV of β rows
/// (`series = beta`) and comparison rows (`series = conclusion`).
pub fn run_tauberian(p: &TauberianParams) -> Result<ExperimentOutput> {
    if !(p.s_min > 0.0 && p.s_max > p.s_min && p.s_points >= 2) {
        return Err(Error::Domain(
            "s grid needs 0 < s_min < s_max and ≥ 2 points".into(),
        ));
    }
    let (a, b) = (p.s_min.ln(), p.s_max.ln());
    let ss: Vec<f64> = (0..p.s_points)
        .map(|i| (a + (b - a) * i as f64 / (p.s_points - 1) as f64).exp())
        .collect();
    let verdict = tauberian::verify_conclusion(&p.mu, &p.nu, p.lambda1, p.epsilon, &ss, p.cap)?;
    let quotient = tauberian::check_uniform_quotient(
        &p.nu,
        p.lambda1,
        &tauberian::default_tau_grid(),
        &ss.iter()
            .copied()
            .filter(|&s| s >= p.lambda1)
            .collect::<Vec<_>>(),
    )?;
    let canonical = format!(
        "tauberian\nmu={}\nnu={}\nepsilon={}\nlambda1={}\ns={}:{}:{}\ncap={}",
        p.mu, p.nu, p.epsilon, p.lambda1, p.s_min, p.s_max, p.s_points, p.cap
    );
    let mut table = Table::new(&["series", "x", "beta", "mu", "nu", "bound", "holds"]);
    for &(t, beta) in &verdict.beta_profile {
        table.push(vec![
            "beta".into(),
            fmt_f(t),
            fmt_f(beta),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    for r in &verdict.rows {
        table.push(vec![
            "conclusion".into(),
            fmt_f(r.s),
            String::new(),
            fmt_f(r.mu),
            fmt_f(r.nu),
            fmt_f(r.bound),
            r.holds.to_string(),
        ]);
    }
    let mut out = ExperimentOutput::new("tauberian", &canonical, table);
    out.check(
        "exponential-bound",
        verdict.l_found.is_finite(),
        format!("L = {}", verdict.l_found),
    );
    out.check(
        "uniform-quotient",
        quotient.max_deviation.is_finite(),
        format!(
            "max |ν(τs)/ν(s) − 1| = {} over τ ∈ 1 ± 10^-k",
            quotient.max_deviation
        ),
    );
    match verdict.conclusion_c1 {
        Some(c1) => out.notes.push(format!(
            "C1 = {c1} verifies the conclusion for ε = {}",
            p.epsilon
        )),
        // existential statement: failure at a finite cap is not a refutation
        None => out
            .notes
            .push(format!("C1 not found ≤ {} for ε = {}", p.cap, p.epsilon)),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HO_CONFIG: &str = "\
# harmonic oscillator
geometry = line
potential = power:2:raw
lambdas = 20.5, 60.5, 100.5
expect_ratio = to-one
";

    #[test]
    fn grid_forms() {
        assert_eq!("1,2,3".parse::<Grid>().unwrap().values(), &[1.0, 2.0, 3.0]);
        assert_eq!(
            "arith:2:4:0.5".parse::<Grid>().unwrap().values(),
            &[2.0, 2.5, 3.0, 3.5, 4.0]
        );
        assert_eq!(
            "geom:25:2:4".parse::<Grid>().unwrap().values(),
            &[25.0, 50.0, 100.0, 200.0]
        );
        assert!("3,2".parse::<Grid>().is_err());
        assert!("geom:0:2:3".parse::<Grid>().is_err());
        assert!("".parse::<Grid>().is_err());
    }

    #[test]
    fn config_parsing() {
        let cfg = ExperimentConfig::parse(HO_CONFIG).unwrap();
        assert_eq!(cfg.delta, DEFAULT_DELTA);
        assert_eq!(cfg.expect_ratio, Some(RatioTrend::ToOne));
        assert!(ExperimentConfig::parse("geometry = line\npotential = power:2\n").is_err());
        assert!(ExperimentConfig::parse(&format!("{HO_CONFIG}delta = 1.5\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{HO_CONFIG}colour = blue\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{HO_CONFIG}geometry = line\n")).is_err());
        assert!(ExperimentConfig::parse("geometry line\n").is_err());
    }

    #[test]
    fn hash_ignores_layout() {
        let a = ExperimentConfig::parse(HO_CONFIG).unwrap();
        let reordered = "lambdas=20.5, 60.5, 100.5\n\n  potential=power:2:raw\ngeometry=line\nexpect_ratio=to-one";
        let b = ExperimentConfig::parse(reordered).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let c = ExperimentConfig::parse(&format!("{HO_CONFIG}delta = 0.3\n")).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn csv_is_rfc4180() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x, \"y\"".into()]);
        let csv = t.to_csv("abc");
        assert_eq!(
            csv,
            "# config-hash=abc\na,b,config_hash\r\n1,\"x, \"\"y\"\"\",abc\r\n"
        );
    }

    #[test]
    fn assertion_lines() {
        let a = Assertion::new("x", true, "fine");
        assert_eq!(a.to_string(), "ASSERT PASS x: fine");
        assert!(Assertion::new("y", false, "no")
            .to_string()
            .starts_with("ASSERT FAIL y"));
    }

    #[test]
    fn ratio_trends() {
        assert!(RatioTrend::ToOne.holds(&[0.9, 0.5, 0.98, 0.99]));
        assert!(!RatioTrend::ToOne.holds(&[0.9, 0.98, 0.97, 0.96]));
        assert!(RatioTrend::ToOne.holds(&[0.9, 0.98, 1.0, 1.0 + 1e-13]));
        assert!(RatioTrend::PhiOverNDecreasing.holds(&[1.5, 1.7, 2.0]));
        assert!(!RatioTrend::PhiOverNDecreasing.holds(&[0.0, 1.7, 2.0]));
        assert!(RatioTrend::NOverPhiDecreasing.holds(&[1e-3, 1e-4, 1e-6]));
    }

    #[test]
    fn weyl_ratio_harmonic_oscillator() {
        let cfg = ExperimentConfig::parse(HO_CONFIG).unwrap();
        let out = run_weyl_ratio(&cfg).unwrap();
        assert!(out.all_passed(), "{:?}", out.assertions);
        for (l, r) in out
            .table
            .column("lambda")
            .unwrap()
            .iter()
            .zip(out.table.column("ratio_lower").unwrap())
        {
            let (l, r): (f64, f64) = (l.parse().unwrap(), r.parse().unwrap());
            assert!((r - 1.0).abs() <= 2.0 / l);
        }
        // rerun is byte-identical
        assert_eq!(out.csv(), run_weyl_ratio(&cfg).unwrap().csv());
        assert!(out
            .csv()
            .starts_with(&format!("# config-hash={}\n", cfg.hash())));
    }

    #[test]
    fn invariants_with_sweep() {
        let mut cfg = ExperimentConfig::parse(HO_CONFIG).unwrap();
        cfg.lambdas = "10,16,100,200".parse().unwrap();
        cfg.delta_sweep = true;
        cfg.expect_criterion = Some(CriterionExpectation::Satisfied);
        let out = run_invariants(&cfg).unwrap();
        assert_eq!(out.table.rows.len(), 12);
        assert!(out.all_passed(), "{:?}", out.assertions);
        assert_eq!(
            out.assertions
                .iter()
                .filter(|a| a.name.starts_with("criterion"))
                .count(),
            3
        );
    }

    #[test]
    fn phi_and_count_runners() {
        let cfg = ExperimentConfig::parse(HO_CONFIG).unwrap();
        let out = run_phi(&cfg).unwrap();
        let phi: f64 = out.table.column("phi").unwrap()[0].parse().unwrap();
        assert!((phi - 10.25).abs() < 1e-9);
        let out = run_count(&cfg).unwrap();
        assert_eq!(out.table.column("lower").unwrap(), vec!["10", "30", "50"]);
        assert!(out.all_passed());
    }

    #[test]
    fn count_failures_are_marked() {
        let mut cfg = ExperimentConfig::parse(HO_CONFIG).unwrap();
        cfg.mesh.node_budget = 100;
        let out = run_count(&cfg).unwrap();
        assert!(out
            .table
            .column("status")
            .unwrap()
            .iter()
            .all(|s| s.starts_with("error")));
        assert!(!out.all_passed());
    }

    #[test]
    fn rxs1_windows() {
        let mut p = Rxs1Params {
            count_lambdas: "2,4".parse().unwrap(),
            ..Rxs1Params::default()
        };
        assert!(matches!(
            run_counterexample_rxs1(&p),
            Err(Error::Infeasible(_))
        ));
        p = Rxs1Params::default();
        p.quadrature_lambdas = "2,7".parse().unwrap();
        assert!(matches!(
            run_counterexample_rxs1(&p),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn rxs1_integrals() {
        // limits Γ(3/2)/√2 and ½ of the normalised integrals
        let i1 = rxs1_integral(6.0, 1.0, 0.5).unwrap() * 6f64.sqrt() * (-36f64).exp();
        let i2 = rxs1_integral(6.0, 1.0, 1.0).unwrap() * 6.0 * (-36f64).exp();
        assert!(
            (i1 - 0.63).abs() < 0.01 && (i2 - 0.507).abs() < 0.01,
            "{i1} {i2}"
        );
        // direct quadrature in x at small λ
        let s = QuadratureSettings::default();
        let direct = integrate(|x: f64| (2.0 - x.ln().sqrt()).max(0.0), 1.0, 4f64.exp(), &s)
            .unwrap()
            .value;
        assert!((rxs1_integral(2.0, 1.0, 1.0).unwrap() - direct).abs() < 1e-8 * direct);
    }

    #[test]
    fn heat_checks() {
        let h3 = run_heat_check(HeatCase::H3).unwrap();
        assert!(h3.all_passed());
        let p = run_heat_check(HeatCase::Parametrix).unwrap();
        assert!(p.all_passed(), "{:?}", p.assertions);
        assert_eq!("lemma21".parse::<HeatCase>().unwrap(), HeatCase::Lemma21);
        assert!("heat".parse::<HeatCase>().is_err());
    }

    #[test]
    fn tauberian_runner() {
        let out = run_tauberian(&TauberianParams::default()).unwrap();
        assert!(out.all_passed());
        assert!(out.notes[0].starts_with("C1 = "));
        let beta_rows = out.table.rows.iter().filter(|r| r[0] == "beta").count();
        assert_eq!(beta_rows, 161);
    }
}
