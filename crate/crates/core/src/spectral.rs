//! Closed-form spectrum of the free operator (B ≡ 0) under the
//! ω-boundary condition z_{n+N} = ω z_n.
//!
//! Eigenvalues use the Hessian convention −J(z_{n+1} − z_n)/h = λ z̃_n, so
//! the families are λ_k^± = ±(2/h) sin α_k with α_k = (kπ + α/2)/N.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symplectic::UnitCircleParam;

#[derive(Debug, Clone, Serialize)]
pub struct FreeMode {
    pub k: usize,
    pub alpha_k: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FreeSpectrum {
    pub m: usize,
    pub n: usize,
    pub h: f64,
    pub alpha: f64,
    /// Distinct eigenvalues in ascending order with multiplicities.
    pub entries: Vec<(f64, usize)>,
    pub modes: Vec<FreeMode>,
}

impl FreeSpectrum {
    /// All 2mN eigenvalues, ascending, repeated by multiplicity.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|&(v, k)| std::iter::repeat_n(v, k))
            .collect()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }
}

/// α_k = (kπ + α/2)/N for k = 0..N−1.
pub fn free_angles(n: usize, omega: UnitCircleParam) -> Vec<f64> {
    (0..n)
        .map(|k| (k as f64 * std::f64::consts::PI + omega.angle() / 2.0) / n as f64)
        .collect()
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Input(format!("free spectrum needs N ≥ 2, got {n}")));
    }
    Ok(())
}

pub fn free_spectrum(m: usize, n: usize, h: f64, omega: UnitCircleParam) -> Result<FreeSpectrum> {
    check_n(n)?;
    let modes: Vec<FreeMode> = free_angles(n, omega)
        .into_iter()
        .enumerate()
        .map(|(k, a)| {
            let lam = 2.0 / h * a.sin();
            FreeMode {
                k,
                alpha_k: a,
                lambda_plus: lam,
                lambda_minus: -lam,
                multiplicity: m,
            }
        })
        .collect();
    let mut all: Vec<f64> = modes
        .iter()
        .flat_map(|md| [md.lambda_plus, md.lambda_minus])
        .collect();
    all.sort_by(f64::total_cmp);
    let tol = 1e-12 * (2.0 / h);
    let mut entries: Vec<(f64, usize)> = Vec::new();
    for v in all {
        match entries.last_mut() {
            Some(last) if (v - last.0).abs() <= tol => last.1 += m,
            _ => entries.push((v, m)),
        }
    }
    Ok(FreeSpectrum {
        m,
        n,
        h,
        alpha: omega.angle(),
        entries,
        modes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// Eigenvector of the free operator; `nodes[n]` holds z̃_n = (x_{n+1}, y_n).
#[derive(Debug, Clone)]
pub struct FreeEigenvector {
    pub k: usize,
    pub branch: Branch,
    /// Index of the canonical basis vector a = e_i.
    pub component: usize,
    pub eigenvalue: f64,
    pub nodes: Vec<DVector<Complex64>>,
}

impl FreeEigenvector {
    /// Flattened coordinates in the node-grouped ordering used by the Hessian.
    pub fn flatten(&self) -> DVector<Complex64> {
        let dim: usize = self.nodes.iter().map(|v| v.len()).sum();
        DVector::from_iterator(dim, self.nodes.iter().flat_map(|v| v.iter().copied()))
    }
}

/// Residual of −J(z_{n+1} − z_n) = hλ z̃_n over all nodes, with z_{n+N} = ω z_n.
pub fn recursion_residual(v: &FreeEigenvector, h: f64, omega: UnitCircleParam) -> f64 {
    let n = v.nodes.len();
    let m = v.nodes[0].len() / 2;
    let w = omega.value();
    // x_{k+1} = p_k, y_k = q_k; x_0 = ω̄ p_{N−1}, y_N = ω q_0
    let p = |k: isize| -> DVector<Complex64> {
        if k < 0 {
            v.nodes[n - 1].rows(0, m).into_owned() * w.conj()
        } else {
            v.nodes[k as usize].rows(0, m).into_owned()
        }
    };
    let q = |k: usize| -> DVector<Complex64> {
        if k == n {
            v.nodes[0].rows(m, m).into_owned() * w
        } else {
            v.nodes[k].rows(m, m).into_owned()
        }
    };
    let mut worst = 0.0_f64;
    for k in 0..n {
        // −J(Δx, Δy) = (Δy, −Δx)
        let dy = q(k + 1) - q(k);
        let dx = p(k as isize) - p(k as isize - 1);
        let lam = Complex64::new(h * v.eigenvalue, 0.0);
        let r1 = dy - v.nodes[k].rows(0, m) * lam;
        let r2 = -dx - v.nodes[k].rows(m, m) * lam;
        worst = worst.max(r1.camax()).max(r2.camax());
    }
    worst
}

pub fn free_eigenvectors(
    m: usize,
    n: usize,
    h: f64,
    omega: UnitCircleParam,
) -> Result<Vec<FreeEigenvector>> {
    check_n(n)?;
    let scale = 1.0 / ((2 * n) as f64).sqrt();
    let special = omega.angle() == 0.0 && n.is_multiple_of(2);
    let mut out = Vec::with_capacity(2 * m * n);
    for (k, alpha) in free_angles(n, omega).into_iter().enumerate() {
        let f = Complex64::from_polar(1.0, 2.0 * alpha);
        for branch in [Branch::Plus, Branch::Minus] {
            let sign = if branch == Branch::Plus { 1.0 } else { -1.0 };
            let eigenvalue = sign * 2.0 / h * alpha.sin();
            for i in 0..m {
                let nodes = (0..n)
                    .map(|node| {
                        let mut z = DVector::<Complex64>::zeros(2 * m);
                        if special && 2 * k == n {
                            // (−1)^n (∓a, a)
                            let s = if node % 2 == 0 { scale } else { -scale };
                            z[i] = Complex64::new(-sign * s, 0.0);
                            z[m + i] = Complex64::new(s, 0.0);
                        } else {
                            // f^n (±i e^{iα} a, a)
                            let c = f.powu(node as u32) * scale;
                            z[i] = c * Complex64::new(0.0, sign) * Complex64::from_polar(1.0, alpha);
                            z[m + i] = c;
                        }
                        z
                    })
                    .collect();
                out.push(FreeEigenvector {
                    k,
                    branch,
                    component: i,
                    eigenvalue,
                    nodes,
                });
            }
        }
    }
    orthonormalize_clusters(&mut out, 1e-12 * 2.0 / h);
    Ok(out)
}

/// Modified Gram–Schmidt inside each cluster of equal eigenvalues.
fn orthonormalize_clusters(vs: &mut [FreeEigenvector], tol: f64) {
    let mut order: Vec<usize> = (0..vs.len()).collect();
    order.sort_by(|&a, &b| vs[a].eigenvalue.total_cmp(&vs[b].eigenvalue));
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len()
            && (vs[order[end]].eigenvalue - vs[order[start]].eigenvalue).abs() <= tol
        {
            end += 1;
        }
        let cluster = &order[start..end];
        let mut done: Vec<DVector<Complex64>> = Vec::new();
        for &idx in cluster {
            let mut v = vs[idx].flatten();
            for u in &done {
                let c = u.dotc(&v);
                v -= u * c;
            }
            let norm = v.norm();
            v /= Complex64::new(norm, 0.0);
            let dim = vs[idx].nodes[0].len();
            for (node, z) in vs[idx].nodes.iter_mut().enumerate() {
                z.copy_from(&v.rows(node * dim, dim));
            }
            done.push(v);
        }
        start = end;
    }
}
