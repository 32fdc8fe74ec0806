//! Tridiagonal discretisations of `-u'' + V u` on an interval and exact
//! eigenvalue counts from the inertia of `A − λB`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

/// Finite-difference stencil.
///
/// `Central2` is the classical three-point Laplacian with identity mass.
/// `Compact4` assembles per-edge stiffness `h⁻²[1 −1; −1 1]`, mass
/// `[5 1; 1 5]/12` and potential `[5Vᵢ, (Vᵢ+Vⱼ)/2; ·, 5Vⱼ]/12` into a
/// tridiagonal pencil; its dispersion error is `O(h⁴)` (Numerov) and its
/// quadratic forms are additive over cells, which makes Dirichlet–Neumann
/// bracketing exact at the discrete level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Stencil {
    Central2,
    #[default]
    Compact4,
}

/// Matrix entries of one active node: diagonal of `A` and `B`, and the
/// coupling to the next node in `A` and `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Row {
    pub a: f64,
    pub b: f64,
    pub e: f64,
    pub f: f64,
}

impl Stencil {
    /// Row for a node with `edges` incident edges (1 at a free end, 2
    /// otherwise); `v_next` is `None` for the last active node.
    pub(crate) fn row(self, v: f64, v_next: Option<f64>, edges: u32, h: f64) -> Row {
        let inv_h2 = 1.0 / (h * h);
        let k = edges as f64;
        match self {
            Stencil::Central2 => Row {
                a: k * inv_h2 + v,
                b: 1.0,
                e: if v_next.is_some() { -inv_h2 } else { 0.0 },
                f: 0.0,
            },
            Stencil::Compact4 => Row {
                a: k * (inv_h2 + 5.0 * v / 12.0),
                b: k * 5.0 / 12.0,
                e: v_next.map_or(0.0, |w| -inv_h2 + (v + w) / 24.0),
                f: if v_next.is_some() { 1.0 / 12.0 } else { 0.0 },
            },
        }
    }
}

/// Negative-pivot count of the `LDLᵀ` recursion of `A − λB` over a stream of
/// rows. By Sylvester's law of inertia (B positive definite) this is the
/// number of generalised eigenvalues strictly below `λ`.
///
/// A zero pivot means `λ` is an eigenvalue of a leading block; it is replaced
/// by `+ε·scale`, so eigenvalues equal to `λ` are not counted.
pub(crate) fn inertia_below<I: IntoIterator<Item = Row>>(rows: I, lambda: f64) -> u64 {
    let mut count = 0u64;
    let mut d = 1.0;
    let mut coupling = 0.0;
    for row in rows {
        let diag = row.a - lambda * row.b;
        let mut p = diag - coupling * coupling / d;
        if p == 0.0 {
            p = f64::EPSILON * (row.a.abs() + (lambda * row.b).abs()).max(f64::MIN_POSITIVE);
        }
        if p < 0.0 {
            count += 1;
        }
        d = p;
        coupling = row.e - lambda * row.f;
    }
    count
}

/// Uniform grid `x_i = lo + i h`, `i = 0..=m`, with boundary conditions at
/// both ends. Dirichlet ends drop their node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct UniformGrid {
    pub lo: f64,
    pub h: f64,
    pub m: usize,
    pub bc_lo: BoundaryCondition,
    pub bc_hi: BoundaryCondition,
}

impl UniformGrid {
    pub fn active(&self) -> std::ops::RangeInclusive<usize> {
        let first = usize::from(self.bc_lo == BoundaryCondition::Dirichlet);
        let last = if self.bc_hi == BoundaryCondition::Dirichlet {
            self.m - 1
        } else {
            self.m
        };
        first..=last
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.h
    }

    pub fn len(&self) -> usize {
        let r = self.active();
        (r.end() + 1).saturating_sub(*r.start())
    }

    /// Rows generated on the fly; `V` is evaluated once per active node.
    pub fn rows<'a, V: Fn(f64) -> f64 + 'a>(
        &'a self,
        v: &'a V,
        stencil: Stencil,
    ) -> impl Iterator<Item = Row> + 'a {
        let range = self.active();
        let last = *range.end();
        let mut v_cur = if range.is_empty() {
            0.0
        } else {
            v(self.node(*range.start()))
        };
        range.map(move |i| {
            let edges = u32::from(i > 0) + u32::from(i < self.m);
            let v_next = (i < last).then(|| v(self.node(i + 1)));
            let row = stencil.row(v_cur, v_next, edges, self.h);
            if let Some(w) = v_next {
                v_cur = w;
            }
            row
        })
    }

    pub fn count<V: Fn(f64) -> f64>(&self, v: &V, stencil: Stencil, lambda: f64) -> u64 {
        inertia_below(self.rows(v, stencil), lambda)
    }
}

/// Symmetric tridiagonal operator (or pencil, for [`Stencil::Compact4`]) with
/// its mesh and boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    /// Tridiagonal mass matrix `(diag, offdiag)`; `None` means the identity.
    pub mass: Option<(Vec<f64>, Vec<f64>)>,
    pub h: f64,
    pub bc: (BoundaryCondition, BoundaryCondition),
    pub interval: (f64, f64),
    pub nodes: Vec<f64>,
    pub stencil: Stencil,
    pub label: String,
}

impl TridiagonalOperator {
    /// Plain symmetric tridiagonal matrix with identity mass.
    pub fn from_parts(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return Err(Error::Domain(
                "offdiag must have exactly one entry fewer than diag".into(),
            ));
        }
        let n = diag.len();
        Ok(Self {
            diag,
            offdiag,
            mass: None,
            h: 1.0,
            bc: (BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet),
            interval: (0.0, (n + 1) as f64),
            nodes: (1..=n).map(|i| i as f64).collect(),
            stencil: Stencil::Central2,
            label: "matrix".into(),
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn rows(&self) -> impl Iterator<Item = Row> + '_ {
        let n = self.diag.len();
        (0..n).map(move |i| {
            let (b, f) = match &self.mass {
                Some((md, mo)) => (md[i], if i + 1 < n { mo[i] } else { 0.0 }),
                None => (1.0, 0.0),
            };
            Row {
                a: self.diag[i],
                b,
                e: if i + 1 < n { self.offdiag[i] } else { 0.0 },
                f,
            }
        })
    }

    /// Gershgorin lower bound for the standard (identity-mass) case.
    pub fn gershgorin_lower(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let left = if i > 0 {
                    self.offdiag[i - 1].abs()
                } else {
                    0.0
                };
                let right = self.offdiag.get(i).map_or(0.0, |x| x.abs());
                self.diag[i] - left - right
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Number of eigenvalues of `T` (of the pencil, with a mass matrix) strictly
/// below `λ`, in `O(n)`.
pub fn sturm_count(t: &TridiagonalOperator, lambda: f64) -> u64 {
    inertia_below(t.rows(), lambda)
}

/// Second-order central-difference operator for `-u'' + V u` on `interval`
/// with the same boundary condition at both ends.
pub fn discretize_1d<V: Fn(f64) -> f64>(
    v: V,
    interval: (f64, f64),
    h: f64,
    bc: BoundaryCondition,
) -> Result<TridiagonalOperator> {
    discretize_with(v, interval, h, (bc, bc), Stencil::Central2)
}

/// General form of [`discretize_1d`]: mixed boundary conditions and a choice
/// of stencil. `h` is adjusted down to divide the interval evenly.
pub fn discretize_with<V: Fn(f64) -> f64>(
    v: V,
    interval: (f64, f64),
    h: f64,
    bc: (BoundaryCondition, BoundaryCondition),
    stencil: Stencil,
) -> Result<TridiagonalOperator> {
    let (lo, hi) = interval;
    if !(h > 0.0) || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!(
            "degenerate interval ({lo}, {hi}) or mesh width {h}"
        )));
    }
    let m = ((hi - lo) / h - 1e-9).ceil().max(1.0) as usize;
    let grid = UniformGrid {
        lo,
        h: (hi - lo) / m as f64,
        m,
        bc_lo: bc.0,
        bc_hi: bc.1,
    };
    if grid.len() == 0 {
        return Err(Error::Domain(format!(
            "mesh width {h} leaves no interior node on ({lo}, {hi})"
        )));
    }
    let nodes: Vec<f64> = grid.active().map(|i| grid.node(i)).collect();
    let rows: Vec<Row> = grid.rows(&v, stencil).collect();
    let n = rows.len();
    let diag = rows.iter().map(|r| r.a).collect();
    let offdiag = rows[..n - 1].iter().map(|r| r.e).collect();
    let mass = match stencil {
        Stencil::Central2 => None,
        Stencil::Compact4 => Some((
            rows.iter().map(|r| r.b).collect(),
            rows[..n - 1].iter().map(|r| r.f).collect(),
        )),
    };
    Ok(TridiagonalOperator {
        diag,
        offdiag,
        mass,
        h: grid.h,
        bc,
        interval,
        nodes,
        stencil,
        label: "V(x)".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn dense_count(t: &TridiagonalOperator, lambda: f64) -> usize {
        let n = t.len();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = t.diag[i];
            if i + 1 < n {
                a[(i, i + 1)] = t.offdiag[i];
                a[(i + 1, i)] = t.offdiag[i];
            }
        }
        let std = match &t.mass {
            None => a,
            Some((md, mo)) => {
                let mut b = DMatrix::zeros(n, n);
                for i in 0..n {
                    b[(i, i)] = md[i];
                    if i + 1 < n {
                        b[(i, i + 1)] = mo[i];
                        b[(i + 1, i)] = mo[i];
                    }
                }
                let l = b.cholesky().unwrap().l();
                let li = l.try_inverse().unwrap();
                &li * a * li.transpose()
            }
        };
        std.symmetric_eigenvalues()
            .iter()
            .filter(|&&x| x < lambda)
            .count()
    }

    #[test]
    fn dirichlet_laplacian_dst_spectrum() {
        let h = PI / 4.0;
        let t = discretize_1d(|_| 0.0, (0.0, PI), h, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(t.len(), 3);
        assert!(t.diag.iter().all(|&d| (d - 2.0 / (h * h)).abs() < 1e-12));
        assert!(t.offdiag.iter().all(|&e| (e + 1.0 / (h * h)).abs() < 1e-12));
        for k in 1..=3 {
            let mu = 2.0 / (h * h) * (1.0 - (k as f64 * PI / 4.0).cos());
            assert_eq!(sturm_count(&t, mu - 1e-9), (k - 1) as u64);
            assert_eq!(sturm_count(&t, mu + 1e-9), k as u64);
        }
    }

    #[test]
    fn constant_potential_shifts_diagonal() {
        let a = discretize_1d(|_| 0.0, (0.0, 2.0), 0.1, BoundaryCondition::Dirichlet).unwrap();
        let b = discretize_1d(|_| 5.0, (0.0, 2.0), 0.1, BoundaryCondition::Dirichlet).unwrap();
        for (x, y) in a.diag.iter().zip(&b.diag) {
            assert_eq!(y - x, 5.0);
        }
    }

    #[test]
    fn neumann_ghost_nodes() {
        let t = discretize_1d(|_| 0.0, (0.0, 1.0), 0.5, BoundaryCondition::Neumann).unwrap();
        assert_eq!(t.diag, vec![4.0, 8.0, 4.0]);
        assert_eq!(t.offdiag, vec![-4.0, -4.0]);
    }

    #[test]
    fn sturm_examples() {
        let t = TridiagonalOperator::from_parts(vec![2.0; 3], vec![-1.0; 2]).unwrap();
        assert_eq!(sturm_count(&t, 2.5), 2);
        // exactly at an eigenvalue: strict count
        assert_eq!(sturm_count(&t, 2.0), 1);
        assert_eq!(sturm_count(&t, t.gershgorin_lower()), 0);
        let t = discretize_1d(
            |_| 0.0,
            (0.0, PI),
            PI / 1024.0,
            BoundaryCondition::Dirichlet,
        )
        .unwrap();
        assert_eq!(sturm_count(&t, 10.5), 3);
    }

    #[test]
    fn degenerate_intervals_rejected() {
        assert!(discretize_1d(|_| 0.0, (1.0, 1.0), 0.1, BoundaryCondition::Dirichlet).is_err());
        assert!(discretize_1d(|_| 0.0, (0.0, 1.0), 0.0, BoundaryCondition::Dirichlet).is_err());
        assert!(discretize_1d(|_| 0.0, (0.0, 1.0), 2.0, BoundaryCondition::Dirichlet).is_err());
    }

    #[test]
    fn compact_stencil_is_fourth_order() {
        // Dirichlet Laplacian on (0, π): eigenvalues k²
        let errs: Vec<f64> = [PI / 40.0, PI / 80.0]
            .iter()
            .map(|&h| {
                let t = discretize_with(
                    |_| 0.0,
                    (0.0, PI),
                    h,
                    (BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet),
                    Stencil::Compact4,
                )
                .unwrap();
                // fifth eigenvalue by bisection on the Sturm count
                let (mut lo, mut hi) = (20.0, 30.0);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if sturm_count(&t, mid) >= 5 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                (lo - 25.0).abs()
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 4.0).abs() < 0.2, "{errs:?}");
    }

    #[test]
    fn streamed_rows_match_stored_operator() {
        let v = |x: f64| x * x;
        for stencil in [Stencil::Central2, Stencil::Compact4] {
            for bc in [
                (BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet),
                (BoundaryCondition::Neumann, BoundaryCondition::Neumann),
                (BoundaryCondition::Dirichlet, BoundaryCondition::Neumann),
            ] {
                let t = discretize_with(v, (-6.0, 6.0), 0.05, bc, stencil).unwrap();
                let g = UniformGrid {
                    lo: -6.0,
                    h: t.h,
                    m: 240,
                    bc_lo: bc.0,
                    bc_hi: bc.1,
                };
                for lam in [3.0, 10.0, 50.0] {
                    assert_eq!(g.count(&v, stencil, lam), sturm_count(&t, lam));
                }
            }
        }
    }

    #[test]
    fn oracle_equivalence_random_matrices() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.random_range(1..=60);
            let diag: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let off: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-3.0..3.0)).collect();
            let t = TridiagonalOperator::from_parts(diag, off).unwrap();
            let lam = rng.random_range(-8.0..8.0);
            assert_eq!(sturm_count(&t, lam) as usize, dense_count(&t, lam));
        }
    }

    #[test]
    fn pencil_counts_match_cholesky_oracle() {
        let v = |x: f64| 1.0 + x.abs().sqrt();
        let t = discretize_with(
            v,
            (0.0, 8.0),
            0.1,
            (BoundaryCondition::Dirichlet, BoundaryCondition::Neumann),
            Stencil::Compact4,
        )
        .unwrap();
        for lam in [1.5, 3.0, 7.7, 40.0, 300.0] {
            assert_eq!(sturm_count(&t, lam) as usize, dense_count(&t, lam));
        }
    }

    proptest! {
        #[test]
        fn count_is_monotone_in_lambda(seed in 0u64..10_000, l1 in -10.0f64..10.0, l2 in -10.0f64..10.0) {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let n = rng.random_range(1..=40);
            let diag: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let off: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-3.0..3.0)).collect();
            let t = TridiagonalOperator::from_parts(diag, off).unwrap();
            let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
            prop_assert!(sturm_count(&t, lo) <= sturm_count(&t, hi));
        }
    }
}
