//! Continuous coefficient generators B(t) and reference solutions of ż = JB(t)z.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DVector;
use ode_solvers::dop_shared::OutputType;
use ode_solvers::{Dopri5, System};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, j_matrix, Mat};
use crate::path::{PiecewisePath, Segment};
use crate::symplectic::standard_path;

pub const REFERENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrigTerm {
    /// Symmetric amplitude matrix.
    pub amp: Vec<Vec<f64>>,
    pub freq: f64,
    #[serde(default)]
    pub phase: f64,
}

/// B(t) on [0, 1].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Constant(Vec<Vec<f64>>),
    /// base + Σ amp·cos(2π·freq·t + phase)
    Trig {
        base: Vec<Vec<f64>>,
        #[serde(default)]
        terms: Vec<TrigTerm>,
    },
    Standard { j: i64 },
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Mat> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Input(format!("expected a square matrix, got {n} rows")));
    }
    Ok(Mat::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn rows_from_matrix(a: &Mat) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
}

/// Validated generator ready for evaluation.
#[derive(Clone)]
pub struct CoefficientFn {
    m: usize,
    eval: Arc<dyn Fn(f64) -> Mat + Send + Sync>,
}

impl std::fmt::Debug for CoefficientFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientFn").field("m", &self.m).finish()
    }
}

fn checked_symmetric(rows: &[Vec<f64>], m: usize, what: &str) -> Result<Mat> {
    let a = matrix_from_rows(rows)?;
    if a.nrows() != 2 * m {
        return Err(Error::Dimension(format!("{what} is {}×{}, expected {}×{}", a.nrows(), a.nrows(), 2 * m, 2 * m)));
    }
    let r = asymmetry(&a);
    if r > 1e-12 {
        return Err(Error::NotSymmetric { residual: r });
    }
    Ok(crate::linalg::symmetric_part(&a))
}

impl Generator {
    pub fn build(&self, m: usize) -> Result<CoefficientFn> {
        let eval: Arc<dyn Fn(f64) -> Mat + Send + Sync> = match self {
            Generator::Constant(rows) => {
                let b = checked_symmetric(rows, m, "constant coefficient")?;
                Arc::new(move |_| b.clone())
            }
            Generator::Trig { base, terms } => {
                let b0 = checked_symmetric(base, m, "trig base")?;
                let ts = terms
                    .iter()
                    .map(|t| Ok((checked_symmetric(&t.amp, m, "trig amplitude")?, t.freq, t.phase)))
                    .collect::<Result<Vec<_>>>()?;
                Arc::new(move |t| {
                    let mut b = b0.clone();
                    for (a, f, p) in &ts {
                        b += a * (TAU * f * t + p).cos();
                    }
                    b
                })
            }
            Generator::Standard { j } => {
                let p = standard_path(m, *j)?;
                Arc::new(move |t| p.coefficient(t))
            }
        };
        Ok(CoefficientFn { m, eval })
    }
}

impl CoefficientFn {
    pub fn new(m: usize, eval: Arc<dyn Fn(f64) -> Mat + Send + Sync>) -> Self {
        Self { m, eval }
    }

    pub fn dim_half(&self) -> usize {
        self.m
    }

    pub fn at(&self, t: f64) -> Mat {
        (self.eval)(t)
    }

    /// s·B(t).
    pub fn scaled(&self, s: f64) -> Self {
        let f = self.eval.clone();
        Self {
            m: self.m,
            eval: Arc::new(move |t| f(t) * s),
        }
    }
}

struct Flow {
    b: CoefficientFn,
    j: Mat,
    n: usize,
}

impl System<f64, DVector<f64>> for Flow {
    fn system(&self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let g = Mat::from_column_slice(self.n, self.n, y.as_slice());
        let d = &self.j * self.b.at(t) * g;
        dy.copy_from_slice(d.as_slice());
    }
}

/// Solution of ż = JB(t)z from `start` at t0 to t1.
pub fn propagate(b: &CoefficientFn, start: &Mat, t0: f64, t1: f64) -> Result<Mat> {
    if t1 == t0 {
        return Ok(start.clone());
    }
    let n = 2 * b.m;
    let flow = Flow {
        b: b.clone(),
        j: j_matrix(b.m),
        n,
    };
    let y0 = DVector::from_column_slice(start.as_slice());
    // sparse output: the dense interpolant of ode_solvers 0.6 misreports the final state
    let mut solver = Dopri5::from_param(
        flow,
        t0,
        t1,
        t1 - t0,
        y0,
        REFERENCE_TOL,
        REFERENCE_TOL,
        0.9,
        0.04,
        0.2,
        10.0,
        (t1 - t0).abs(),
        0.0,
        100_000,
        u32::MAX,
        OutputType::Sparse,
    );
    solver
        .integrate()
        .map_err(|e| Error::Integration(format!("{e:?}")))?;
    let y = solver
        .y_out()
        .last()
        .ok_or_else(|| Error::Integration("no output".into()))?;
    Ok(Mat::from_column_slice(n, n, y.as_slice()))
}

/// Reference γ(t_k) on a uniform grid of `nodes` intervals, integrated interval by interval.
pub fn reference_nodes(b: &CoefficientFn, nodes: usize) -> Result<Vec<Mat>> {
    let mut out = Vec::with_capacity(nodes + 1);
    let mut g = Mat::identity(2 * b.m, 2 * b.m);
    out.push(g.clone());
    for k in 0..nodes {
        g = propagate(b, &g, k as f64 / nodes as f64, (k + 1) as f64 / nodes as f64)?;
        out.push(g.clone());
    }
    Ok(out)
}

/// The continuous fundamental solution as a path, evaluated by integrating
/// from the nearest cached node to the left.
pub fn reference_path(b: &CoefficientFn, segments: usize) -> Result<PiecewisePath> {
    let nodes = reference_nodes(b, segments)?;
    let j = j_matrix(b.m);
    let segs = (0..segments)
        .map(|k| {
            let t0 = k as f64 / segments as f64;
            let t1 = (k + 1) as f64 / segments as f64;
            let g0 = Arc::new(nodes[k].clone());
            let (bv, bd, g1, jj) = (b.clone(), b.clone(), g0.clone(), j.clone());
            let value = move |s: f64| -> Mat {
                propagate(&bv, &g0, t0, t0 + s * (t1 - t0)).expect("reference integration")
            };
            Segment::new(
                t0,
                t1,
                Arc::new(value),
                Arc::new(move |s: f64| {
                    let t = t0 + s * (t1 - t0);
                    let g = propagate(&bd, &g1, t0, t).expect("reference integration");
                    &jj * bd.at(t) * g * (t1 - t0)
                }),
            )
        })
        .collect();
    PiecewisePath::new(b.m, segs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::symplectic::{k_matrix, rotation};
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn constant_matches_exponential() {
        let b = Generator::Constant(vec![vec![PI, 0.0], vec![0.0, PI]]).build(1).unwrap();
        let g = reference_nodes(&b, 4).unwrap();
        assert!(max_abs(&(&g[4] - rotation(PI))) < 1e-10);
        let b = Generator::Standard { j: 0 }.build(1).unwrap();
        let g = propagate(&b, &Mat::identity(2, 2), 0.0, 0.6).unwrap();
        assert!(max_abs(&(g - (j_matrix(1) * k_matrix() * (0.6 * LN_2)).exp())) < 1e-11);
    }

    #[test]
    fn standard_bump_reference() {
        let b = Generator::Standard { j: 2 }.build(1).unwrap();
        let p = standard_path(1, 2).unwrap();
        let g = reference_nodes(&b, 8).unwrap();
        for (k, gk) in g.iter().enumerate() {
            assert!(max_abs(&(gk - p.value(k as f64 / 8.0))) < 1e-9);
        }
    }

    #[test]
    fn trig_is_evaluated() {
        let gen = Generator::Trig {
            base: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            terms: vec![TrigTerm {
                amp: vec![vec![0.5, 0.0], vec![0.0, 0.0]],
                freq: 1.0,
                phase: 0.0,
            }],
        };
        let b = gen.build(1).unwrap();
        assert!((b.at(0.0)[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((b.at(0.5)[(0, 0)] - 0.5).abs() < 1e-15);
        // B = cos(2πt)·I integrates to R(sin(2πt)/2π)
        let gen = Generator::Trig {
            base: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            terms: vec![TrigTerm {
                amp: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                freq: 1.0,
                phase: 0.0,
            }],
        };
        let g = reference_nodes(&gen.build(1).unwrap(), 8).unwrap();
        for (k, gk) in g.iter().enumerate() {
            let t = k as f64 / 8.0;
            assert!(max_abs(&(gk - rotation((TAU * t).sin() / TAU))) < 1e-11);
        }
        let bad = Generator::Constant(vec![vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(bad.build(1).is_err());
    }

    #[test]
    fn reference_path_is_continuous() {
        let b = Generator::Standard { j: 3 }.build(1).unwrap();
        let p = reference_path(&b, 8).unwrap();
        assert!(p.joint_discontinuity() < 1e-12);
        assert!(max_abs(&(p.value(0.3) - rotation(3.0 * PI * 0.3))) < 1e-9);
    }
}
