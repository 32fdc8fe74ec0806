//! Laplace–Stieltjes transforms of monotone measures and a numerical form of
//! the quantitative Karamata–Hardy–Littlewood Tauberian theorem.
//!
//! A [`MonotoneMeasure`] is a nondecreasing, left-continuous distribution
//! function built from finitely many atoms, arithmetic lattices of equal
//! atoms (exact spectra such as the harmonic oscillator's) and shifted powers
//! `coef·(r − C)₊^α`. Every piece has a closed-form transform.

use std::fmt;
use std::str::FromStr;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Atoms of weight `weight` at `start + k·step`, `k = 0, 1, 2, …`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomLattice {
    pub start: f64,
    pub step: f64,
    pub weight: f64,
}

/// `coef·(r − shift)₊^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedPower {
    pub coef: f64,
    pub shift: f64,
    pub alpha: f64,
}

impl ShiftedPower {
    pub fn laplace(&self, t: f64) -> f64 {
        self.coef * gamma(self.alpha + 1.0) * t.powf(-self.alpha) * (-t * self.shift).exp()
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coef * (s - self.shift).max(0.0).powf(self.alpha)
    }
}

impl AtomLattice {
    /// Number of lattice points strictly below `s`.
    fn count_below(&self, s: f64) -> f64 {
        if s <= self.start {
            return 0.0;
        }
        let mut n = ((s - self.start) / self.step).floor() + 1.0;
        if self.start + (n - 1.0) * self.step >= s {
            n -= 1.0;
        }
        n
    }

    pub fn laplace(&self, t: f64) -> f64 {
        self.weight * (-t * self.start).exp() / -(-t * self.step).exp_m1()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonotoneMeasure {
    /// `(location, weight)`, strictly increasing in location.
    atoms: Vec<(f64, f64)>,
    lattices: Vec<AtomLattice>,
    powers: Vec<ShiftedPower>,
}

impl MonotoneMeasure {
    pub fn new(
        mut atoms: Vec<(f64, f64)>,
        lattices: Vec<AtomLattice>,
        powers: Vec<ShiftedPower>,
    ) -> Result<Self> {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(r, w) in &atoms {
            if !(r >= 0.0 && r.is_finite() && w > 0.0 && w.is_finite()) {
                return Err(Error::Domain(format!(
                    "atom ({r}, {w}) needs location ≥ 0 and weight > 0"
                )));
            }
        }
        if let Some(w) = atoms.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain(format!("duplicate atom at {}", w[0].0)));
        }
        for l in &lattices {
            if !(l.start >= 0.0 && l.step > 0.0 && l.weight > 0.0)
                || !l.start.is_finite()
                || !l.step.is_finite()
            {
                return Err(Error::Domain(format!(
                    "lattice {l:?} needs start ≥ 0, step > 0, weight > 0"
                )));
            }
        }
        for p in &powers {
            if !(p.coef > 0.0 && p.shift >= 0.0 && p.alpha > 0.0)
                || !p.coef.is_finite()
                || !p.shift.is_finite()
            {
                return Err(Error::Domain(format!(
                    "shifted power {p:?} needs coef > 0, shift ≥ 0, α > 0"
                )));
            }
        }
        Ok(Self {
            atoms,
            lattices,
            powers,
        })
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(atoms, Vec::new(), Vec::new())
    }

    pub fn lattice(start: f64, step: f64, weight: f64) -> Result<Self> {
        Self::new(
            Vec::new(),
            vec![AtomLattice {
                start,
                step,
                weight,
            }],
            Vec::new(),
        )
    }

    pub fn shifted_power(coef: f64, shift: f64, alpha: f64) -> Result<Self> {
        Self::new(
            Vec::new(),
            Vec::new(),
            vec![ShiftedPower { coef, shift, alpha }],
        )
    }

    /// Eigenvalue counting measure of `-d²/dx² + x²`: unit atoms at `2k + 1`.
    pub fn harmonic_oscillator() -> Self {
        Self::lattice(1.0, 2.0, 1.0).expect("valid lattice")
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.lattices.is_empty() && self.powers.is_empty()
    }

    /// `a·self + b·other` for `a, b ≥ 0`.
    pub fn combine(&self, a: f64, other: &MonotoneMeasure, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::Domain(
                "measure combinations need nonnegative coefficients".into(),
            ));
        }
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for (&(r, w), k) in self
            .atoms
            .iter()
            .map(|x| (x, a))
            .chain(other.atoms.iter().map(|x| (x, b)))
        {
            if k * w == 0.0 {
                continue;
            }
            match atoms.iter_mut().find(|x| x.0 == r) {
                Some(x) => x.1 += k * w,
                None => atoms.push((r, k * w)),
            }
        }
        let lattices = self
            .lattices
            .iter()
            .map(|l| (l, a))
            .chain(other.lattices.iter().map(|l| (l, b)))
            .filter(|(_, k)| *k > 0.0)
            .map(|(l, k)| AtomLattice {
                weight: l.weight * k,
                ..*l
            })
            .collect();
        let powers = self
            .powers
            .iter()
            .map(|p| (p, a))
            .chain(other.powers.iter().map(|p| (p, b)))
            .filter(|(_, k)| *k > 0.0)
            .map(|(p, k)| ShiftedPower {
                coef: p.coef * k,
                ..*p
            })
            .collect();
        Self::new(atoms, lattices, powers)
    }

    /// `ν(s)`, left-continuous: atoms at exactly `s` are not included.
    pub fn eval(&self, s: f64) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .take_while(|(r, _)| *r < s)
            .map(|(_, w)| w)
            .sum();
        let lattices: f64 = self
            .lattices
            .iter()
            .map(|l| l.weight * l.count_below(s))
            .sum();
        let powers: f64 = self.powers.iter().map(|p| p.eval(s)).sum();
        atoms + lattices + powers
    }

    /// `∫ e^{-tr} dν(r)`.
    pub fn laplace(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!(
                "Laplace transform needs t > 0, got {t}"
            )));
        }
        let atoms: f64 = self.atoms.iter().map(|(r, w)| w * (-t * r).exp()).sum();
        let lattices: f64 = self.lattices.iter().map(|l| l.laplace(t)).sum();
        let powers: f64 = self.powers.iter().map(|p| p.laplace(t)).sum();
        Ok(atoms + lattices + powers)
    }
}

impl fmt::Display for MonotoneMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        parts.extend(self.atoms.iter().map(|(r, w)| format!("atom:{r}:{w}")));
        parts.extend(
            self.lattices
                .iter()
                .map(|l| format!("lattice:{}:{}:{}", l.start, l.step, l.weight)),
        );
        parts.extend(
            self.powers
                .iter()
                .map(|p| format!("power:{}:{}:{}", p.coef, p.shift, p.alpha)),
        );
        if parts.is_empty() {
            return f.write_str("zero");
        }
        f.write_str(&parts.join("+"))
    }
}

/// `+`-separated terms: `atom:<r>:<w>`, `lattice:<start>:<step>:<weight>`,
/// `power:<coef>:<shift>:<alpha>`, or the shorthand `ho` (= `lattice:1:2:1`).
impl FromStr for MonotoneMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {x:?} in measure {s:?}")))
        };
        let (mut atoms, mut lattices, mut powers) = (Vec::new(), Vec::new(), Vec::new());
        for term in s.split('+').map(str::trim) {
            let fields: Vec<&str> = term.split(':').collect();
            match fields.as_slice() {
                ["ho"] => lattices.push(AtomLattice {
                    start: 1.0,
                    step: 2.0,
                    weight: 1.0,
                }),
                ["zero"] => {}
                ["atom", r, w] => atoms.push((num(r)?, num(w)?)),
                ["lattice", a, d, w] => lattices.push(AtomLattice {
                    start: num(a)?,
                    step: num(d)?,
                    weight: num(w)?,
                }),
                ["power", c, shift, alpha] => powers.push(ShiftedPower {
                    coef: num(c)?,
                    shift: num(shift)?,
                    alpha: num(alpha)?,
                }),
                _ => return Err(Error::Parse(format!("unknown measure term {term:?}"))),
            }
        }
        Self::new(atoms, lattices, powers).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 || lo == hi {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Log grid with 40 points per decade over `[lo, hi]`.
pub fn t_grid(lo: f64, hi: f64) -> Vec<f64> {
    let decades = (hi / lo).log10().max(0.0);
    log_space(lo, hi, (40.0 * decades).ceil() as usize + 1)
}

/// Default τ values `1 ± 10^{-k}`, `k = 1..4`.
pub fn default_tau_grid() -> Vec<f64> {
    (1..=4)
        .flat_map(|k| [1.0 - 10f64.powi(-k), 1.0 + 10f64.powi(-k)])
        .collect()
}

/// Smallest `L` with `∫ e^{-tr} dν ≤ L ν(1/t)` on the grid, which must lie in
/// `(0, 1/λ₁]`.
pub fn check_exponential_bound(nu: &MonotoneMeasure, lambda1: f64, ts: &[f64]) -> Result<f64> {
    if !(lambda1 > 0.0) {
        return Err(Error::Domain(format!("λ₁ must be positive, got {lambda1}")));
    }
    if ts.is_empty() {
        return Err(Error::Domain("empty t grid".into()));
    }
    let mut l = 0.0f64;
    for &t in ts {
        if !(t > 0.0 && t <= 1.0 / lambda1 * (1.0 + 1e-12)) {
            return Err(Error::Precondition(format!(
                "t = {t} outside (0, 1/λ₁ = {}]",
                1.0 / lambda1
            )));
        }
        let denom = nu.eval(1.0 / t);
        if denom <= 0.0 {
            return Err(Error::Precondition(format!(
                "λ₁ too small: ν(1/t) = 0 at t = {t}"
            )));
        }
        l = l.max(nu.laplace(t)? / denom);
    }
    Ok(l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientReport {
    pub max_deviation: f64,
    /// `(|τ − 1|, max over s of |ν(τs)/ν(s) − 1|)`, ascending in `|τ − 1|`.
    pub modulus: Vec<(f64, f64)>,
}

/// `max |ν(τs)/ν(s) − 1|` over `τ` and `s ≥ λ₁`.
pub fn check_uniform_quotient(
    nu: &MonotoneMeasure,
    lambda1: f64,
    taus: &[f64],
    ss: &[f64],
) -> Result<QuotientReport> {
    if let Some(s) = ss.iter().find(|&&s| !(s >= lambda1)) {
        return Err(Error::Precondition(format!(
            "s = {s} is below λ₁ = {lambda1}"
        )));
    }
    if let Some(t) = taus.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::Domain(format!("τ must be positive, got {t}")));
    }
    let mut by_dist: Vec<(f64, f64)> = Vec::new();
    for &tau in taus {
        let mut dev = 0.0f64;
        for &s in ss {
            let base = nu.eval(s);
            if base <= 0.0 {
                return Err(Error::Precondition(format!("ν({s}) = 0")));
            }
            dev = dev.max((nu.eval(tau * s) / base - 1.0).abs());
        }
        let d = (tau - 1.0).abs();
        match by_dist
            .iter_mut()
            .find(|x| (x.0 - d).abs() <= 1e-15 * d.max(1.0))
        {
            Some(x) => x.1 = x.1.max(dev),
            None => by_dist.push((d, dev)),
        }
    }
    by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let max_deviation = by_dist.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(QuotientReport {
        max_deviation,
        modulus: by_dist,
    })
}

/// `β(t) = |Lμ(t) − Lν(t)| / Lν(t)` at each grid point.
pub fn beta_profile(
    mu: &MonotoneMeasure,
    nu: &MonotoneMeasure,
    ts: &[f64],
) -> Result<Vec<(f64, f64)>> {
    ts.iter()
        .map(|&t| {
            let ln = nu.laplace(t)?;
            if !(ln > 0.0) {
                return Err(Error::Domain(format!(
                    "ν has vanishing transform at t = {t}"
                )));
            }
            Ok((t, (mu.laplace(t)? - ln).abs() / ln))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConclusionRow {
    pub s: f64,
    pub mu: f64,
    pub nu: f64,
    /// `(ε + εL + C₁Lβ(C₁/s))·ν(s)`
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauberianVerdict {
    pub l_found: f64,
    pub lambda1: f64,
    pub epsilon: f64,
    pub cap: f64,
    pub beta_profile: Vec<(f64, f64)>,
    /// Smallest `C₁` on the search grid verifying the conclusion; `None` means
    /// "not found up to the cap", which is not a refutation.
    pub conclusion_c1: Option<f64>,
    /// Comparison at the found `C₁`, or at the cap when none was found.
    pub rows: Vec<ConclusionRow>,
}

/// Search `C₁ ∈ [1, cap]` (log grid, 20 points per decade) for the smallest
/// value with `|μ(s) − ν(s)| ≤ (ε + εL + C₁Lβ(C₁/s))ν(s)` at every grid
/// `s ≥ C₁λ₁` (at least one such `s` is required).
///
/// `L` comes from [`check_exponential_bound`] on `t ∈ [10⁻⁴/λ₁, 1/λ₁]`. The
/// theorem assumes `β` nondecreasing, so `β(C₁/s)` is replaced by its running
/// maximum over that grid.
pub fn verify_conclusion(
    mu: &MonotoneMeasure,
    nu: &MonotoneMeasure,
    lambda1: f64,
    epsilon: f64,
    ss: &[f64],
    cap: f64,
) -> Result<TauberianVerdict> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!(
            "ε must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(cap >= 1.0) {
        return Err(Error::Domain(format!(
            "C₁ cap must be at least 1, got {cap}"
        )));
    }
    let ts = t_grid(1e-4 / lambda1, 1.0 / lambda1);
    let l = check_exponential_bound(nu, lambda1, &ts)?;
    let profile = beta_profile(mu, nu, &ts)?;
    let beta = |t: f64| -> Result<f64> {
        let ln = nu.laplace(t)?;
        let here = (mu.laplace(t)? - ln).abs() / ln;
        let below = profile
            .iter()
            .take_while(|p| p.0 <= t)
            .map(|p| p.1)
            .fold(0.0, f64::max);
        Ok(here.max(below))
    };
    let rows_for = |c1: f64| -> Result<Vec<ConclusionRow>> {
        ss.iter()
            .filter(|&&s| s >= c1 * lambda1)
            .map(|&s| {
                let (m, n) = (mu.eval(s), nu.eval(s));
                let bound = (epsilon + epsilon * l + c1 * l * beta(c1 / s)?) * n;
                Ok(ConclusionRow {
                    s,
                    mu: m,
                    nu: n,
                    bound,
                    holds: (m - n).abs() <= bound,
                })
            })
            .collect()
    };
    let decades = cap.log10();
    let grid = log_space(1.0, cap, (20.0 * decades).ceil() as usize + 1);
    let mut found = None;
    for &c1 in &grid {
        let rows = rows_for(c1)?;
        if !rows.is_empty() && rows.iter().all(|r| r.holds) {
            found = Some((c1, rows));
            break;
        }
    }
    let (conclusion_c1, rows) = match found {
        Some((c, rows)) => (Some(c), rows),
        None => (None, rows_for(cap)?),
    };
    Ok(TauberianVerdict {
        l_found: l,
        lambda1,
        epsilon,
        cap,
        beta_profile: profile,
        conclusion_c1,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn laplace_examples() {
        let half = MonotoneMeasure::shifted_power(2.0, 0.0, 0.5).unwrap();
        assert!((half.laplace(1.0).unwrap() - PI.sqrt()).abs() < 1e-12);
        let lin = MonotoneMeasure::shifted_power(1.0, 3.0, 1.0).unwrap();
        assert!((lin.laplace(2.0).unwrap() - 0.00123938).abs() < 1e-8);
        let atom = MonotoneMeasure::atoms(vec![(5.0, 2.0)]).unwrap();
        assert!((atom.laplace(0.1).unwrap() - 1.21306).abs() < 1e-5);
        assert!(atom.laplace(0.0).is_err());
    }

    #[test]
    fn lattice_matches_atoms() {
        let ho = MonotoneMeasure::harmonic_oscillator();
        let explicit =
            MonotoneMeasure::atoms((0..2000).map(|k| (2.0 * k as f64 + 1.0, 1.0)).collect())
                .unwrap();
        for t in [0.05, 0.5, 2.0] {
            let a = ho.laplace(t).unwrap();
            assert!((a - 1.0 / (2.0 * t.sinh())).abs() < 1e-12 * a);
            assert!((a - explicit.laplace(t).unwrap()).abs() < 1e-12 * a);
        }
        for s in [0.5, 1.0, 1.5, 3.0, 3.0000001, 20.0, 20.5, 21.0, 101.3] {
            assert_eq!(ho.eval(s), explicit.eval(s), "{s}");
        }
        // left limits at atoms
        assert_eq!(ho.eval(1.0), 0.0);
        assert_eq!(ho.eval(21.0), 10.0);
    }

    #[test]
    fn exponential_bound_examples() {
        let ts = t_grid(1e-4, 1.0);
        let c = 3.0;
        let nu = MonotoneMeasure::shifted_power(1.0, c, 0.5).unwrap();
        let l = check_exponential_bound(&nu, 2.0 * c, &t_grid(1e-4 / (2.0 * c), 1.0 / (2.0 * c)))
            .unwrap();
        assert!(l <= gamma(1.5) * 2f64.sqrt() + 1e-12, "{l}");
        for alpha in [0.5, 1.0, 2.5] {
            let nu = MonotoneMeasure::shifted_power(1.0, 0.0, alpha).unwrap();
            let l = check_exponential_bound(&nu, 1.0, &ts).unwrap();
            assert!((l - gamma(alpha + 1.0)).abs() < 1e-12 * l);
        }
        let zero_atom = MonotoneMeasure::atoms(vec![(0.0, 3.0)]).unwrap();
        assert!((check_exponential_bound(&zero_atom, 1.0, &ts).unwrap() - 1.0).abs() < 1e-15);
        let late = MonotoneMeasure::shifted_power(1.0, 10.0, 1.0).unwrap();
        let err = check_exponential_bound(&late, 0.5, &t_grid(0.1, 2.0)).unwrap_err();
        assert!(err.to_string().contains("λ₁ too small"));
    }

    #[test]
    fn quotient_examples() {
        let c = 2.0;
        let nu = MonotoneMeasure::shifted_power(1.0, c, 1.0).unwrap();
        let r = check_uniform_quotient(&nu, 2.0 * c, &[1.01], &[2.0 * c]).unwrap();
        // (τ·2C − C)/(2C − C) = 2τ − 1
        assert!((r.max_deviation - 0.02).abs() < 1e-12);
        let nu = MonotoneMeasure::shifted_power(1.0, c, 1.5).unwrap();
        let r = check_uniform_quotient(&nu, 2.0 * c, &[1.01], &[2.0 * c]).unwrap();
        assert!((r.max_deviation - (1.02f64.powf(1.5) - 1.0)).abs() < 1e-12);
        assert_eq!(
            check_uniform_quotient(&nu, 4.0, &[1.0], &[4.0, 8.0])
                .unwrap()
                .max_deviation,
            0.0
        );
        let far = check_uniform_quotient(&nu, 4.0, &[1.01], &[1e12])
            .unwrap()
            .max_deviation;
        assert!((far - (1.01f64.powf(1.5) - 1.0)).abs() < 1e-9);
        let r = check_uniform_quotient(&nu, 4.0, &default_tau_grid(), &[4.0, 40.0, 400.0]).unwrap();
        assert_eq!(r.modulus.len(), 4);
        assert!(r.modulus.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(check_uniform_quotient(&nu, 4.0, &[1.01], &[3.0]).is_err());
    }

    #[test]
    fn beta_examples() {
        let ho = MonotoneMeasure::harmonic_oscillator();
        let nu = MonotoneMeasure::shifted_power(0.5, 0.0, 1.0).unwrap();
        let ts = t_grid(1e-3, 1.0);
        for (t, b) in beta_profile(&ho, &nu, &ts).unwrap() {
            assert!((b - (t / t.sinh() - 1.0).abs()).abs() < 1e-10, "{t}");
        }
        let b = beta_profile(&ho, &nu, &[0.1]).unwrap()[0].1;
        assert!((b - 0.001666).abs() < 1e-5);
        assert!(beta_profile(&nu, &nu, &ts)
            .unwrap()
            .iter()
            .all(|p| p.1 == 0.0));
        let eps = 0.3;
        let bumped = nu
            .combine(1.0, &MonotoneMeasure::atoms(vec![(1e3, eps)]).unwrap(), 1.0)
            .unwrap();
        for (t, b) in beta_profile(&bumped, &nu, &ts).unwrap() {
            assert!(b <= eps / nu.laplace(t).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn conclusion_for_oscillator() {
        let ho = MonotoneMeasure::harmonic_oscillator();
        let nu = MonotoneMeasure::shifted_power(0.5, 0.0, 1.0).unwrap();
        let ss = log_space(20.0, 2000.0, 400);
        let v = verify_conclusion(&ho, &nu, 1.0, 0.1, &ss, 1e3).unwrap();
        assert!(v.l_found <= 2.0);
        let c1 = v.conclusion_c1.expect("C₁ found");
        assert!(c1 <= 1e3);
        assert!(v.rows.iter().all(|r| r.holds));

        let same = verify_conclusion(&nu, &nu, 1.0, 0.1, &ss, 1e3).unwrap();
        assert_eq!(same.conclusion_c1, Some(1.0));
    }

    #[test]
    fn conclusion_not_found_below_cap() {
        // |N(s) − s/2| reaches ½ just before each eigenvalue, while the right
        // side is only about 0.02·s/2 for ε = 0.01 and C₁ ≤ 2
        let ho = MonotoneMeasure::harmonic_oscillator();
        let nu = MonotoneMeasure::shifted_power(0.5, 0.0, 1.0).unwrap();
        let ss: Vec<f64> = (0..=40).map(|i| 20.0 + 0.5 * i as f64).collect();
        let v = verify_conclusion(&ho, &nu, 1.0, 0.01, &ss, 2.0).unwrap();
        assert_eq!(v.conclusion_c1, None);
        assert!(v.rows.iter().any(|r| !r.holds));
        // doubling the measure is absorbed by the C₁Lβ term, which is ≥ 1
        let twice = nu.combine(2.0, &MonotoneMeasure::default(), 0.0).unwrap();
        assert_eq!(
            verify_conclusion(&twice, &nu, 1.0, 0.01, &ss, 2.0)
                .unwrap()
                .conclusion_c1,
            Some(1.0)
        );
    }

    #[test]
    fn parse_roundtrip() {
        let m: MonotoneMeasure = "atom:5:2 + lattice:1:2:1 + power:0.5:0:1".parse().unwrap();
        let again: MonotoneMeasure = m.to_string().parse().unwrap();
        assert_eq!(m, again);
        assert_eq!(
            "ho".parse::<MonotoneMeasure>().unwrap(),
            MonotoneMeasure::harmonic_oscillator()
        );
        assert!("atom:1".parse::<MonotoneMeasure>().is_err());
        assert!("atom:1:-1".parse::<MonotoneMeasure>().is_err());
        assert!("atom:1:1+atom:1:2".parse::<MonotoneMeasure>().is_err());
    }

    fn measure() -> impl Strategy<Value = MonotoneMeasure> {
        (
            prop::collection::vec((0.0..50.0f64, 0.01..5.0f64), 0..6),
            prop::option::of((0.0..5.0f64, 0.1..3.0f64, 0.1..2.0f64)),
            prop::option::of((0.1..3.0f64, 0.0..5.0f64, 0.2..3.0f64)),
        )
            .prop_map(|(mut atoms, lat, pow)| {
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                atoms.dedup_by(|a, b| a.0 == b.0);
                let lattices = lat
                    .map(|(a, d, w)| AtomLattice {
                        start: a,
                        step: d,
                        weight: w,
                    })
                    .into_iter()
                    .collect();
                let powers = pow
                    .map(|(c, s, a)| ShiftedPower {
                        coef: c,
                        shift: s,
                        alpha: a,
                    })
                    .into_iter()
                    .collect();
                MonotoneMeasure::new(atoms, lattices, powers).unwrap()
            })
    }

    proptest! {
        #[test]
        fn linear_and_positive(m in measure(), n in measure(), a in 0.0..3.0f64, b in 0.0..3.0f64, t in 0.05..5.0f64) {
            let combo = m.combine(a, &n, b).unwrap();
            let lhs = combo.laplace(t).unwrap();
            let rhs = a * m.laplace(t).unwrap() + b * n.laplace(t).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
            if !m.is_zero() {
                prop_assert!(m.laplace(t).unwrap() > 0.0);
            }
        }

        #[test]
        fn nondecreasing(m in measure(), s in 0.0..60.0f64, ds in 0.0..10.0f64) {
            prop_assert!(m.eval(0.0) >= 0.0);
            prop_assert!(m.eval(s + ds) >= m.eval(s));
        }
    }
}
