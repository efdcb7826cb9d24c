//! Piecewise smooth paths of symplectic matrices on [0, 1].

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, Mat};

pub type Eval = Arc<dyn Fn(f64) -> Mat + Send + Sync>;

/// One smooth piece. Evaluators take the local parameter s ∈ [0, 1];
/// `derivative` is d/ds.
#[derive(Clone)]
pub struct Segment {
    t0: f64,
    t1: f64,
    value: Eval,
    derivative: Eval,
}

impl Segment {
    pub fn new(t0: f64, t1: f64, value: Eval, derivative: Eval) -> Self {
        Self {
            t0,
            t1,
            value,
            derivative,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn value_at(&self, s: f64) -> Mat {
        (self.value)(s)
    }

    pub fn derivative_at(&self, s: f64) -> Mat {
        (self.derivative)(s)
    }
}

impl std::fmt::Debug for Segment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Segment")
            .field("t0", &self.t0)
            .field("t1", &self.t1)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub struct PiecewisePath {
    m: usize,
    segments: Vec<Segment>,
}

impl PiecewisePath {
    /// Builds a path from contiguous segments covering [0, 1].
    pub fn new(m: usize, segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Input("path needs at least one segment".into()));
        }
        let mut t = 0.0;
        for seg in &segments {
            if (seg.t0 - t).abs() > 1e-14 || seg.t1 <= seg.t0 {
                return Err(Error::Input(format!(
                    "segments not contiguous at t = {t} (got [{}, {}])",
                    seg.t0, seg.t1
                )));
            }
            t = seg.t1;
        }
        if (t - 1.0).abs() > 1e-14 {
            return Err(Error::Input(format!("segments end at {t}, expected 1")));
        }
        Ok(Self { m, segments })
    }

    /// Single smooth path given by global evaluators t ↦ Γ(t), t ↦ Γ′(t).
    pub fn smooth(m: usize, value: Eval, derivative: Eval) -> Self {
        Self {
            m,
            segments: vec![Segment::new(0.0, 1.0, value, derivative)],
        }
    }

    pub fn constant(value: Mat) -> Self {
        let m = value.nrows() / 2;
        let zero = Mat::zeros(2 * m, 2 * m);
        Self::smooth(
            m,
            Arc::new(move |_| value.clone()),
            Arc::new(move |_| zero.clone()),
        )
    }

    pub fn dim_half(&self) -> usize {
        self.m
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Segment boundaries 0 = t_0 < … < t_k = 1.
    pub fn breaks(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.segments.iter().map(|s| s.t0).collect();
        b.push(1.0);
        b
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let t = t.clamp(0.0, 1.0);
        let idx = self
            .segments
            .iter()
            .position(|s| t < s.t1)
            .unwrap_or(self.segments.len() - 1);
        let seg = &self.segments[idx];
        (idx, ((t - seg.t0) / (seg.t1 - seg.t0)).clamp(0.0, 1.0))
    }

    pub fn value(&self, t: f64) -> Mat {
        let (i, s) = self.locate(t);
        self.segments[i].value_at(s)
    }

    /// dΓ/dt; on a joint the right-hand segment is used.
    pub fn derivative(&self, t: f64) -> Mat {
        let (i, s) = self.locate(t);
        let seg = &self.segments[i];
        seg.derivative_at(s) / (seg.t1 - seg.t0)
    }

    pub fn end(&self) -> Mat {
        self.segments.last().expect("nonempty").value_at(1.0)
    }

    /// Largest jump ‖Γ(t_k⁻) − Γ(t_k⁺)‖_max over interior joints.
    pub fn joint_discontinuity(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| max_abs(&(w[0].value_at(1.0) - w[1].value_at(0.0))))
            .fold(0.0, f64::max)
    }

    /// Pointwise product t ↦ Γ(t)·F(t), where `factor` returns (F(t), F′(t)).
    pub fn right_multiply(&self, factor: Arc<dyn Fn(f64) -> (Mat, Mat) + Send + Sync>) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|seg| {
                let (t0, t1) = (seg.t0, seg.t1);
                let (v, d) = (seg.value.clone(), seg.derivative.clone());
                let f1 = factor.clone();
                let f2 = factor.clone();
                let v1 = v.clone();
                let value: Eval = Arc::new(move |s| v1(s) * f1(t0 + s * (t1 - t0)).0);
                let derivative: Eval = Arc::new(move |s| {
                    let (f, fp) = f2(t0 + s * (t1 - t0));
                    d(s) * &f + v(s) * fp * (t1 - t0)
                });
                Segment::new(t0, t1, value, derivative)
            })
            .collect();
        Self {
            m: self.m,
            segments,
        }
    }

    /// Pointwise ⋄-product of two paths sharing the same breaks.
    pub fn diamond(&self, other: &Self) -> Result<Self> {
        if self.breaks().len() != other.breaks().len()
            || self
                .breaks()
                .iter()
                .zip(other.breaks())
                .any(|(a, b)| (a - b).abs() > 1e-14)
        {
            return Err(Error::Input("diamond of paths needs matching breaks".into()));
        }
        let segments = self
            .segments
            .iter()
            .zip(&other.segments)
            .map(|(a, b)| {
                let (av, bv) = (a.value.clone(), b.value.clone());
                let (ad, bd) = (a.derivative.clone(), b.derivative.clone());
                Segment::new(
                    a.t0,
                    a.t1,
                    Arc::new(move |s| crate::symplectic::diamond(&av(s), &bv(s))),
                    Arc::new(move |s| crate::symplectic::diamond(&ad(s), &bd(s))),
                )
            })
            .collect();
        Ok(Self {
            m: self.m + other.m,
            segments,
        })
    }
}
