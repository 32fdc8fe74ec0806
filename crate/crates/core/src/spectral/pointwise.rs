//! Dense eigendecompositions of small discretised problems, the pointwise
//! counting function and eigenfunction tail diagnostics.

use nalgebra::DMatrix;

use super::tridiagonal::TridiagonalOperator;
use crate::error::{Error, Result};

/// Largest operator handed to the dense eigensolver.
pub const DENSE_LIMIT: usize = 4000;

/// Eigenpairs of a discretised operator with eigenfunctions normalised in the
/// `h`-weighted inner product: `h Σᵢ φⱼ(xᵢ)² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigendecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Row `j` holds `φⱼ` at every node.
    pub functions: Vec<Vec<f64>>,
    pub nodes: Vec<f64>,
    pub h: f64,
}

impl Eigendecomposition {
    pub fn of(t: &TridiagonalOperator) -> Result<Self> {
        let n = t.len();
        if n > DENSE_LIMIT {
            return Err(Error::TooLarge {
                size: n,
                limit: DENSE_LIMIT,
                advice: "use trace-only mode (Sturm counts) for larger problems",
            });
        }
        if t.mass.is_some() {
            return Err(Error::Unsupported(
                "dense eigendecomposition of a pencil; discretise with Central2".into(),
            ));
        }
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = t.diag[i];
            if i + 1 < n {
                a[(i, i + 1)] = t.offdiag[i];
                a[(i + 1, i)] = t.offdiag[i];
            }
        }
        let eig = a.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let scale = 1.0 / t.h.sqrt();
        let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
        let functions = order
            .iter()
            .map(|&j| {
                eig.eigenvectors
                    .column(j)
                    .iter()
                    .map(|x| x * scale)
                    .collect()
            })
            .collect();
        Ok(Self {
            values,
            functions,
            nodes: t.nodes.clone(),
            h: t.h,
        })
    }

    /// Toy decomposition from explicit pairs (values, weights `φⱼ(x)²` at a
    /// single node).
    pub fn from_pairs(values: Vec<f64>, phi_at_node: Vec<f64>, h: f64) -> Result<Self> {
        if values.len() != phi_at_node.len() {
            return Err(Error::Domain("values and weights differ in length".into()));
        }
        let functions = phi_at_node.iter().map(|w| vec![*w]).collect();
        Ok(Self {
            values,
            functions,
            nodes: vec![0.0],
            h,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.nodes.len() {
            return Err(Error::Domain(format!(
                "node {node} out of range ({} nodes)",
                self.nodes.len()
            )));
        }
        Ok(())
    }

    /// `e(λ, xᵢ, xᵢ) = Σ_{λⱼ < λ} φⱼ(xᵢ)²`.
    pub fn pointwise_counting(&self, lambda: f64, node: usize) -> Result<f64> {
        self.check_node(node)?;
        Ok(self
            .values
            .iter()
            .zip(&self.functions)
            .take_while(|(v, _)| **v < lambda)
            .map(|(_, f)| f[node] * f[node])
            .sum())
    }

    /// Number of eigenvalues below `λ`.
    pub fn count_below(&self, lambda: f64) -> usize {
        self.values.partition_point(|&v| v < lambda)
    }
}

/// Free-function form of [`Eigendecomposition::pointwise_counting`].
pub fn pointwise_counting(eig: &Eigendecomposition, lambda: f64, node: usize) -> Result<f64> {
    eig.pointwise_counting(lambda, node)
}

/// Mass of an eigenfunction in the region `{V > λ + λ^{-c}}` against the
/// Agmon prediction `λ^{1+c} e^{-2βρ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailReport {
    pub eigenvalue: f64,
    pub tail_fraction: f64,
    /// Agmon distance (at the eigenvalue) from the allowed region to the
    /// start of the tail region.
    pub agmon_rho: f64,
    pub shape: f64,
}

/// `potential` gives `V` at each node of the decomposition. The Agmon
/// distance is accumulated with the trapezoidal rule on the same nodes.
pub fn agmon_tail_mass(
    eig: &Eigendecomposition,
    index: usize,
    potential: &[f64],
    lambda: f64,
    c_exponent: f64,
    beta: f64,
) -> Result<TailReport> {
    if index >= eig.len() {
        return Err(Error::Domain(format!("eigenpair {index} does not exist")));
    }
    if potential.len() != eig.nodes.len() {
        return Err(Error::Domain(
            "potential samples do not match the nodes".into(),
        ));
    }
    let mu = eig.values[index];
    if !(mu < lambda) {
        return Err(Error::Precondition(format!(
            "eigenvalue {mu} is not below λ = {lambda}"
        )));
    }
    let phi = &eig.functions[index];
    let cut = lambda + lambda.powf(-c_exponent);
    let total: f64 = phi.iter().map(|x| x * x).sum();
    let tail: f64 = phi
        .iter()
        .zip(potential)
        .filter(|(_, &v)| v > cut)
        .map(|(x, _)| x * x)
        .sum();
    // Agmon distance from {V ≤ μ} to {V > cut}, minimised over both sides
    let rho = agmon_gap(&eig.nodes, potential, mu, cut);
    Ok(TailReport {
        eigenvalue: mu,
        tail_fraction: tail / total,
        agmon_rho: rho,
        shape: lambda.powf(1.0 + c_exponent) * (-2.0 * beta * rho).exp(),
    })
}

fn agmon_gap(nodes: &[f64], v: &[f64], mu: f64, cut: f64) -> f64 {
    let weight: Vec<f64> = v.iter().map(|&x| (x - mu).max(0.0).sqrt()).collect();
    let mut best = f64::INFINITY;
    // walk outward from each classically allowed node in both directions
    let allowed: Vec<usize> = (0..v.len()).filter(|&i| v[i] <= mu).collect();
    let (Some(&first), Some(&last)) = (allowed.first(), allowed.last()) else {
        return 0.0;
    };
    for (start, step) in [(last, 1isize), (first, -1isize)] {
        let mut acc = 0.0;
        let mut i = start as isize;
        loop {
            let j = i + step;
            if j < 0 || j as usize >= v.len() {
                break;
            }
            let (a, b) = (i as usize, j as usize);
            acc += 0.5 * (weight[a] + weight[b]) * (nodes[b] - nodes[a]).abs();
            if v[b] > cut {
                best = best.min(acc);
                break;
            }
            i = j;
        }
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}
