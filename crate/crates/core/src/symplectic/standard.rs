use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{j_matrix, Mat};
use crate::path::PiecewisePath;

use super::{hyperbolic, k_matrix, rotation};

/// Reference path β̂_j in Sp(2m) with i₁(β̂_j) = j and its coefficient B̂_j(t).
#[derive(Debug, Clone)]
pub struct StandardPath {
    m: usize,
    j: i64,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    /// β̂(t) = exp(tJB̂) for a constant B̂.
    Constant { b: Mat, jb: Mat },
    /// m = 1, j even and nonzero: rotation by jπ on [0, 1/2], then hyperbolic.
    Bump,
}

fn bump(t: f64) -> f64 {
    0.5 * (1.0 + (2.0 * PI * t).cos())
}

fn bump_dot(t: f64) -> f64 {
    -PI * (2.0 * PI * t).sin()
}

/// (ω₁, ω₂) and their derivatives.
fn bumps(t: f64) -> (f64, f64, f64, f64) {
    if t <= 0.5 {
        (bump(t), 0.0, bump_dot(t), 0.0)
    } else {
        (0.0, bump(t), 0.0, bump_dot(t))
    }
}

pub fn standard_path(m: usize, j: i64) -> Result<StandardPath> {
    if m == 0 {
        return Err(Error::UnsupportedStandardPath {
            m,
            j,
            reason: "half-dimension must be at least 1".into(),
        });
    }
    let pi = PI;
    let kind = if m == 1 {
        if j == 0 {
            constant(k_matrix() * LN_2)
        } else if j % 2 != 0 {
            constant(Mat::identity(2, 2) * (j as f64 * pi))
        } else {
            Kind::Bump
        }
    } else {
        let mut x = vec![pi; m];
        let mut y = vec![0.0; m];
        if (m as i64 + j).rem_euclid(2) == 1 {
            x[0] = 0.0;
            x[1] = (j - m as i64 + 2) as f64 * pi;
            y[0] = LN_2;
            let xm = Mat::from_diagonal(&nalgebra::DVector::from_vec(x));
            let ym = Mat::from_diagonal(&nalgebra::DVector::from_vec(y));
            constant(crate::linalg::from_blocks(&xm, &ym, &ym, &xm))
        } else {
            x[0] = (j - m as i64 + 1) as f64 * pi;
            let z = Mat::from_diagonal(&nalgebra::DVector::from_vec(x));
            constant(crate::linalg::from_blocks(&z, &Mat::zeros(m, m), &Mat::zeros(m, m), &z))
        }
    };
    Ok(StandardPath { m, j, kind })
}

fn constant(b: Mat) -> Kind {
    let jb = j_matrix(b.nrows() / 2) * &b;
    Kind::Constant { b, jb }
}

impl StandardPath {
    pub fn dim_half(&self) -> usize {
        self.m
    }

    pub fn j(&self) -> i64 {
        self.j
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, Kind::Constant { .. })
    }

    /// B̂_j(t).
    pub fn coefficient(&self, t: f64) -> Mat {
        match &self.kind {
            Kind::Constant { b, .. } => b.clone(),
            Kind::Bump => {
                let (_, _, d1, d2) = bumps(t);
                Mat::identity(2, 2) * (-(self.j as f64) * PI * d1) + k_matrix() * (LN_2 * d2)
            }
        }
    }

    /// β̂_j(t).
    pub fn value(&self, t: f64) -> Mat {
        match &self.kind {
            Kind::Constant { jb, .. } => (jb * t).exp(),
            Kind::Bump => {
                let (w1, w2, _, _) = bumps(t);
                hyperbolic(2f64.powf(-w2)) * rotation((1.0 - w1) * self.j as f64 * PI)
            }
        }
    }

    /// dβ̂/dt = J B̂(t) β̂(t).
    pub fn derivative(&self, t: f64) -> Mat {
        j_matrix(self.m) * self.coefficient(t) * self.value(t)
    }

    pub fn to_path(&self) -> PiecewisePath {
        let a = self.clone();
        let b = self.clone();
        PiecewisePath::smooth(
            self.m,
            Arc::new(move |t| a.value(t)),
            Arc::new(move |t| b.derivative(t)),
        )
    }
}
