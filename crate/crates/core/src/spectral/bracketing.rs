//! Dirichlet–Neumann bracketing over a partition of an interval.

use super::tridiagonal::{BoundaryCondition, Stencil, UniformGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DnReport {
    /// Interfaces after snapping to the common grid.
    pub cells: Vec<(f64, f64)>,
    pub dirichlet_sum: u64,
    /// Count on the whole interval with Dirichlet ends.
    pub global: u64,
    pub neumann_sum: u64,
    pub holds: bool,
}

/// `Σ N_D(cell) ≤ N(global) ≤ Σ N_N(cell)` on a common uniform grid of width
/// about `h`.
///
/// Cells must tile `[first.lo, last.hi]` in order. The Dirichlet side is exact
/// for every stencil (cell matrices are principal submatrices). The Neumann
/// side is exact for [`Stencil::Compact4`], whose forms are additive over
/// cells; with [`Stencil::Central2`] it is guaranteed only where `V ≤ λ` at the
/// interfaces.
pub fn dn_bracket<V: Fn(f64) -> f64>(
    cells: &[(f64, f64)],
    v: V,
    lambda: f64,
    h: f64,
    stencil: Stencil,
) -> Result<DnReport> {
    use BoundaryCondition::{Dirichlet, Neumann};
    if cells.is_empty() {
        return Err(Error::Domain("partition is empty".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Domain(format!(
            "mesh width must be positive, got {h}"
        )));
    }
    for &(a, b) in cells {
        if !(b > a) {
            return Err(Error::Domain(format!("degenerate cell [{a}, {b}]")));
        }
    }
    let lo = cells[0].0;
    let hi = cells.last().unwrap().1;
    let tol = 1e-9 * (hi - lo);
    for w in cells.windows(2) {
        if w[1].0 < w[0].1 - tol {
            return Err(Error::Domain(format!(
                "cells [{}, {}] and [{}, {}] overlap",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
        if w[1].0 > w[0].1 + tol {
            return Err(Error::Domain(format!(
                "gap between {} and {}",
                w[0].1, w[1].0
            )));
        }
    }
    let m = ((hi - lo) / h).ceil() as usize;
    let h = (hi - lo) / m as f64;
    // interface node indices, snapped
    let mut idx = vec![0usize];
    for w in cells.windows(2) {
        let i = ((w[0].1 - lo) / h).round() as usize;
        if i <= *idx.last().unwrap() || i >= m {
            return Err(Error::Domain(format!(
                "cell ending at {} is below the mesh resolution",
                w[0].1
            )));
        }
        idx.push(i);
    }
    idx.push(m);

    let grid = |a: usize, b: usize, bc: BoundaryCondition| UniformGrid {
        lo: lo + a as f64 * h,
        h,
        m: b - a,
        bc_lo: bc,
        bc_hi: bc,
    };
    let mut dirichlet_sum = 0;
    let mut neumann_sum = 0;
    let mut snapped = Vec::with_capacity(cells.len());
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        snapped.push((lo + a as f64 * h, lo + b as f64 * h));
        if b - a >= 2 {
            dirichlet_sum += grid(a, b, Dirichlet).count(&v, stencil, lambda);
        }
        neumann_sum += grid(a, b, Neumann).count(&v, stencil, lambda);
    }
    let global = grid(0, m, Dirichlet).count(&v, stencil, lambda);
    Ok(DnReport {
        cells: snapped,
        dirichlet_sum,
        global,
        neumann_sum,
        holds: dirichlet_sum <= global && global <= neumann_sum,
    })
}
