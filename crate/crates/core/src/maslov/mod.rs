//! Maslov-type ω-index of symplectic paths starting at I.
//!
//! The path is scanned for crossings of Sp⁰_ω = {M : D_ω(M) = 0}. Isolated
//! transversal crossings with a one-dimensional kernel are classified by
//! the sign of the crossing form; every flagged window is also counted by
//! the local spectral flow, which settles non-regular crossings and the
//! junction with the seed path at t = 0. Degenerate endpoints are handled
//! with the negative-side rotation perturbation.

mod flow;

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{j_matrix, spectral_norm, symplectic_inverse, CMat, Mat};
use crate::path::{PiecewisePath, Segment};
use crate::symplectic::{
    d_omega_with_tol, diamond_power, hyperbolic, kernel_basis, nullity_with_tol, random_symplectic,
    shifted_svd, UnitCircleParam, TOL_SYMPL, TOL_ZERO,
};

use flow::{flow_count, Frame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexPair {
    pub i: i64,
    pub nu: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Resolution {
    /// Simple transversal crossing counted by the sign of its crossing form.
    Regular,
    /// Counted by the local spectral flow over the window.
    SpectralFlow,
    /// Crossing at a degenerate endpoint; not counted.
    Endpoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossingRecord {
    pub t_star: f64,
    pub window: (f64, f64),
    pub kernel_dim: usize,
    /// Signature of the crossing form on the kernel.
    pub signature: i64,
    pub contribution: i64,
    pub resolution: Resolution,
    #[serde(skip)]
    pub crossing_form: CMat,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanConfig {
    pub samples_per_segment: usize,
    pub tol_zero: f64,
    /// Relative distance from Sp⁰_ω required at window ends.
    pub clean_margin: f64,
    pub bisect_tol: f64,
    /// Relative size below which a crossing form value counts as degenerate.
    pub form_tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            samples_per_segment: 64,
            tol_zero: TOL_ZERO,
            clean_margin: 1e-6,
            bisect_tol: 1e-12,
            form_tol: 1e-6,
        }
    }
}

/// ξ_m(t) = D(2 − t)^{⋄m}, from D(2)^{⋄m} to I.
pub fn seed_path(m: usize) -> PiecewisePath {
    PiecewisePath::smooth(
        m,
        Arc::new(move |t| diamond_power(&hyperbolic(2.0 - t), m)),
        Arc::new(move |t| {
            let d = nalgebra::dmatrix![-1.0, 0.0; 0.0, 1.0 / ((2.0 - t) * (2.0 - t))];
            diamond_power(&d, m)
        }),
    )
}

struct Sample {
    t: f64,
    value: Mat,
    sigma: f64,
    scale: f64,
    d: f64,
}

fn sample(path: &PiecewisePath, omega: UnitCircleParam, t: f64) -> Result<Sample> {
    let value = path.value(t);
    let (sv, _) = shifted_svd(&value, omega);
    let sigma = sv.last().copied().unwrap_or(0.0);
    let scale = spectral_norm(&value).max(1.0);
    let d = d_omega_with_tol(&value, omega, TOL_SYMPL)?;
    Ok(Sample {
        t,
        value,
        sigma,
        scale,
        d,
    })
}

/// Effective Hamiltonian −JΓ′Γ⁻¹ at t.
fn generator(path: &PiecewisePath, t: f64) -> Mat {
    let m = path.dim_half();
    let g = path.value(t);
    -(j_matrix(m) * path.derivative(t) * symplectic_inverse(&g))
}

fn crossing_form(path: &PiecewisePath, t: f64, kernel: &CMat) -> CMat {
    let b = crate::linalg::to_complex(&crate::linalg::symmetric_part(&generator(path, t)));
    kernel.adjoint() * b * kernel
}

pub fn crossing_scan(
    path: &PiecewisePath,
    omega: UnitCircleParam,
    cfg: &ScanConfig,
) -> Result<Vec<CrossingRecord>> {
    let m = path.dim_half();
    let frame = Frame::new(m, omega);
    let breaks = path.breaks();
    let s = cfg.samples_per_segment.max(2);
    let mut ts = Vec::with_capacity(s * (breaks.len() - 1) + 1);
    for w in breaks.windows(2) {
        for k in 0..s {
            ts.push(w[0] + (w[1] - w[0]) * k as f64 / s as f64);
        }
    }
    ts.push(1.0);
    let samples = ts
        .iter()
        .map(|&t| sample(path, omega, t))
        .collect::<Result<Vec<_>>>()?;
    let last = samples.len() - 1;
    let clean = |k: usize| samples[k].sigma > cfg.clean_margin * samples[k].scale;

    // speeds on each interval, taken inside the interval's own segment
    let flagged: Vec<bool> = (0..last)
        .map(|k| {
            let (a, b) = (&samples[k], &samples[k + 1]);
            let dt = b.t - a.t;
            let mid = 0.5 * (a.t + b.t);
            let speed = path.derivative(mid).norm().max(
                path.derivative(a.t + 1e-3 * dt)
                    .norm()
                    .max(path.derivative(b.t - 1e-3 * dt).norm()),
            );
            a.d * b.d <= 0.0 || a.sigma.min(b.sigma) <= 2.0 * dt * speed || !clean(k) || !clean(k + 1)
        })
        .collect();

    let mut windows: Vec<(usize, usize)> = Vec::new();
    let mut k = 0;
    while k < last {
        if !flagged[k] {
            k += 1;
            continue;
        }
        let mut a = k;
        let mut b = k + 1;
        while b < last && flagged[b] {
            b += 1;
        }
        while a > 0 && !clean(a) {
            a -= 1;
        }
        while b < last && !clean(b) {
            b += 1;
        }
        match windows.last_mut() {
            Some(prev) if prev.1 >= a => prev.1 = prev.1.max(b),
            _ => windows.push((a, b)),
        }
        k = b;
    }

    let start_degenerate = !clean(0);
    let end_degenerate = nullity_with_tol(&samples[last].value, omega, cfg.tol_zero) > 0;
    let mut records = Vec::new();
    for &(a, b) in &windows {
        let win = (samples[a].t, samples[b].t);
        if b == last && end_degenerate {
            let kernel = kernel_basis(&samples[last].value, omega, cfg.tol_zero);
            let form = crossing_form(path, 1.0, &kernel);
            let (sig, _) = crate::linalg::hermitian_signature(&form, cfg.form_tol);
            records.push(CrossingRecord {
                t_star: 1.0,
                window: win,
                kernel_dim: kernel.ncols(),
                signature: sig,
                contribution: 0,
                resolution: Resolution::Endpoint,
                crossing_form: form,
            });
            continue;
        }
        let grid: Vec<f64> = ts[a..=b].to_vec();
        let count = if a == 0 && start_degenerate {
            junction_count(&frame, path, m, &grid)?
        } else {
            flow_count(&frame, &|t| path.value(t), &grid)?
        };

        let sign_changes: Vec<usize> = (a..b).filter(|&k| samples[k].d * samples[k + 1].d < 0.0).collect();
        let mut regular = None;
        let t_star = if sign_changes.len() == 1 && !(a == 0 && start_degenerate) {
            let k = sign_changes[0];
            let t = bisect(path, omega, samples[k].t, samples[k + 1].t, samples[k].d, cfg.bisect_tol)?;
            let kernel = kernel_basis(&path.value(t), omega, cfg.tol_zero);
            if kernel.ncols() == 1 {
                let q = crossing_form(path, t, &kernel)[(0, 0)].re;
                let norm = spectral_norm(&generator(path, t)).max(1e-300);
                if q.abs() > cfg.form_tol * norm {
                    regular = Some(q.signum() as i64);
                }
            }
            t
        } else if a == 0 && start_degenerate {
            0.0
        } else {
            closest_approach(path, omega, &samples[a..=b])
        };

        let value = path.value(t_star);
        let (sv, _) = shifted_svd(&value, omega);
        let scale = spectral_norm(&value).max(1.0);
        let smin = sv.last().copied().unwrap_or(0.0);
        let cluster_tol = (cfg.tol_zero * scale).max(10.0 * smin);
        let kernel_dim = sv.iter().filter(|&&x| x <= cluster_tol).count();
        let is_crossing = smin <= cfg.clean_margin * scale || count != 0;
        if !is_crossing {
            continue;
        }
        let kernel = {
            let (_, v) = shifted_svd(&value, omega);
            let n = v.ncols();
            v.columns(n - kernel_dim, kernel_dim).into_owned()
        };
        let form = crossing_form(path, t_star, &kernel);
        let (signature, _) = crate::linalg::hermitian_signature(&form, cfg.form_tol);
        let resolution = match regular {
            Some(sgn) if sgn == count => Resolution::Regular,
            _ => Resolution::SpectralFlow,
        };
        records.push(CrossingRecord {
            t_star,
            window: win,
            kernel_dim: kernel_dim.max(count.unsigned_abs() as usize),
            signature,
            contribution: count,
            resolution,
            crossing_form: form,
        });
    }
    Ok(records)
}

/// Flow through the junction ξ_m(1) = I = Γ(0): the seed tail followed by Γ.
fn junction_count(frame: &Frame, path: &PiecewisePath, m: usize, grid: &[f64]) -> Result<i64> {
    let seed = seed_path(m);
    let f = |u: f64| {
        if u < 0.0 {
            seed.value(1.0 + u)
        } else {
            path.value(u)
        }
    };
    let mut ext: Vec<f64> = (0..32).map(|k| -0.5 + 0.5 * k as f64 / 32.0).collect();
    ext.extend_from_slice(grid);
    flow_count(frame, &f, &ext)
}

fn bisect(
    path: &PiecewisePath,
    omega: UnitCircleParam,
    mut lo: f64,
    mut hi: f64,
    d_lo: f64,
    tol: f64,
) -> Result<f64> {
    let mut s_lo = d_lo.signum();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let d = d_omega_with_tol(&path.value(mid), omega, TOL_SYMPL)?;
        if d == 0.0 {
            return Ok(mid);
        }
        if d.signum() == s_lo {
            lo = mid;
            s_lo = d.signum();
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section refinement of the smallest relative distance to Sp⁰_ω.
fn closest_approach(path: &PiecewisePath, omega: UnitCircleParam, samples: &[Sample]) -> f64 {
    let (k, _) = samples
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1.sigma / x.1.scale).total_cmp(&(y.1.sigma / y.1.scale)))
        .expect("nonempty window");
    let lo_t = samples[k.saturating_sub(1)].t;
    let hi_t = samples[(k + 1).min(samples.len() - 1)].t;
    let f = |t: f64| {
        let v = path.value(t);
        let (sv, _) = shifted_svd(&v, omega);
        sv.last().copied().unwrap_or(0.0) / spectral_norm(&v).max(1.0)
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo_t, hi_t);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if b - a < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    if f(t) <= samples[k].sigma / samples[k].scale {
        t
    } else {
        samples[k].t
    }
}

/// Profile ρ with ρ(0) = 0, ρ(1) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Profile {
    Linear,
    Quadratic,
}

impl Profile {
    fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            Profile::Linear => (t, 1.0),
            Profile::Quadratic => (t * t, 2.0 * t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PerturbationSpec {
    pub s: f64,
    pub profile: Profile,
    pub theta0: f64,
    /// Symplectic conjugator P; `None` means I.
    pub conjugator: Option<Mat>,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            s: 1.0,
            profile: Profile::Quadratic,
            theta0: 0.05,
            conjugator: None,
        }
    }
}

impl PerturbationSpec {
    pub fn with_s(&self, s: f64) -> Self {
        Self { s, ..self.clone() }
    }
}

/// Γ_s(t) = Γ(t)·P⁻¹·R(sρ(t)θ₀)^{⋄m}·P, with the endpoint checked to be off Sp⁰_ω.
pub fn perturb_path(
    path: &PiecewisePath,
    spec: &PerturbationSpec,
    omega: UnitCircleParam,
) -> Result<PiecewisePath> {
    if spec.s.abs() > 1.0 {
        return Err(Error::Input(format!("perturbation magnitude |s| = {} exceeds 1", spec.s.abs())));
    }
    if spec.s == 0.0 {
        return Ok(path.clone());
    }
    let m = path.dim_half();
    let j = j_matrix(m);
    let (p, pinv) = match &spec.conjugator {
        Some(p) => (p.clone(), symplectic_inverse(p)),
        None => (Mat::identity(2 * m, 2 * m), Mat::identity(2 * m, 2 * m)),
    };
    let (s, theta0, profile) = (spec.s, spec.theta0, spec.profile);
    let factor = Arc::new(move |t: f64| {
        let (rho, drho) = profile.eval(t);
        let phi = s * rho * theta0;
        // R(φ)^{⋄m} = cos φ·I + sin φ·J
        let r = Mat::identity(2 * m, 2 * m) * phi.cos() + &j * phi.sin();
        let rp = (&j * phi.cos() - Mat::identity(2 * m, 2 * m) * phi.sin()) * (s * drho * theta0);
        (&pinv * r * &p, &pinv * rp * &p)
    });
    let out = path.right_multiply(factor);
    let nullity = nullity_with_tol(&out.end(), omega, TOL_ZERO);
    if nullity > 0 {
        return Err(Error::RetryPerturbation {
            nullity,
            theta0: spec.theta0,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexComputation {
    pub pair: IndexPair,
    pub crossings: Vec<CrossingRecord>,
    /// θ₀ and whether a random conjugator was needed, for degenerate endpoints.
    pub perturbation: Option<(f64, bool)>,
}

fn nondegenerate_index(path: &PiecewisePath, omega: UnitCircleParam, cfg: &ScanConfig) -> Result<(i64, Vec<CrossingRecord>)> {
    let records = crossing_scan(path, omega, cfg)?;
    Ok((records.iter().map(|r| r.contribution).sum(), records))
}

/// Index at a degenerate endpoint: i(Γ_{−s}) with agreement at s and s/8.
fn degenerate_index(
    path: &PiecewisePath,
    omega: UnitCircleParam,
    cfg: &ScanConfig,
    sign: f64,
) -> Result<(i64, Vec<CrossingRecord>, (f64, bool))> {
    let m = path.dim_half();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut conjugators: Vec<Option<Mat>> = vec![None];
    for _ in 0..4 {
        conjugators.push(Some(random_symplectic(m, &mut rng).into_matrix()));
    }
    let mut last_err = None;
    for conj in &conjugators {
        for theta0 in [0.05, 0.02, 0.1] {
            let spec = PerturbationSpec {
                s: sign,
                profile: Profile::Quadratic,
                theta0,
                conjugator: conj.clone(),
            };
            let attempt = || -> Result<(i64, Vec<CrossingRecord>)> {
                let coarse = perturb_path(path, &spec, omega)?;
                let fine = perturb_path(path, &spec.with_s(sign / 8.0), omega)?;
                let (a, rec) = nondegenerate_index(&coarse, omega, cfg)?;
                let (b, _) = nondegenerate_index(&fine, omega, cfg)?;
                if a != b {
                    return Err(Error::UnresolvedDegeneracy(format!(
                        "perturbed indices disagree across scales ({a} vs {b})"
                    )));
                }
                Ok((a, rec))
            };
            match attempt() {
                Ok((i, rec)) => return Ok((i, rec, (theta0, conj.is_some()))),
                Err(e) => last_err = Some(e),
            }
        }
    }
    Err(Error::UnresolvedDegeneracy(format!(
        "perturbation ladder exhausted: {}",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

pub fn maslov_index_detailed(
    path: &PiecewisePath,
    omega: UnitCircleParam,
    cfg: &ScanConfig,
) -> Result<IndexComputation> {
    let nu = nullity_with_tol(&path.end(), omega, cfg.tol_zero);
    if nu == 0 {
        let (i, crossings) = nondegenerate_index(path, omega, cfg)?;
        return Ok(IndexComputation {
            pair: IndexPair { i, nu },
            crossings,
            perturbation: None,
        });
    }
    let (i, crossings, used) = degenerate_index(path, omega, cfg, -1.0)?;
    Ok(IndexComputation {
        pair: IndexPair { i, nu },
        crossings,
        perturbation: Some(used),
    })
}

pub fn maslov_index(path: &PiecewisePath, omega: UnitCircleParam) -> Result<IndexPair> {
    Ok(maslov_index_detailed(path, omega, &ScanConfig::default())?.pair)
}

/// (i(Γ_{+s}), i(Γ_{−s})) at s and s/8, for checking i(Γ_s) − i(Γ_{−s}) = ν.
pub fn perturbation_pair(
    path: &PiecewisePath,
    omega: UnitCircleParam,
    spec: &PerturbationSpec,
    cfg: &ScanConfig,
) -> Result<[(i64, i64); 2]> {
    let mut out = [(0, 0); 2];
    for (slot, s) in [spec.s.abs(), spec.s.abs() / 8.0].into_iter().enumerate() {
        let plus = perturb_path(path, &spec.with_s(s), omega)?;
        let minus = perturb_path(path, &spec.with_s(-s), omega)?;
        out[slot] = (
            nondegenerate_index(&plus, omega, cfg)?.0,
            nondegenerate_index(&minus, omega, cfg)?.0,
        );
    }
    Ok(out)
}

/// Endpoint splitting numbers S^±(ω) = i at ω·e^{±iθ} minus i at ω.
pub fn splitting_endpoint(
    path: &PiecewisePath,
    omega: UnitCircleParam,
    theta_probe: f64,
    cfg: &ScanConfig,
) -> Result<crate::morse::SplittingPair> {
    let base = maslov_index_detailed(path, omega, cfg)?.pair.i;
    crate::morse::stabilized_probe(theta_probe, |theta| {
        Ok((
            maslov_index_detailed(path, omega.rotated(theta), cfg)?.pair.i - base,
            maslov_index_detailed(path, omega.rotated(-theta), cfg)?.pair.i - base,
        ))
    })
}

/// Path t ↦ Γ(t)·L(t) with a loop L at I inserted on [a, b]: L = exp(φ(t)·JS)
/// where φ rises from 0 and returns to 0 (contractible), or a full turn
/// R(2πψ(t))^{⋄m} with ψ from 0 to 1 when `winding` is set.
pub fn with_inserted_loop(path: &PiecewisePath, a: f64, b: f64, s: &Mat, winding: bool) -> PiecewisePath {
    let m = path.dim_half();
    let js = j_matrix(m) * s;
    let j = j_matrix(m);
    let factor = Arc::new(move |t: f64| {
        if t <= a || t >= b {
            return (Mat::identity(2 * m, 2 * m), Mat::zeros(2 * m, 2 * m));
        }
        let u = (t - a) / (b - a);
        if winding {
            // ψ(u) = u − sin(2πu)/(2π), ψ′(0) = ψ′(1) = 0
            let psi = u - (TAU * u).sin() / TAU;
            let dpsi = (1.0 - (TAU * u).cos()) / (b - a);
            let phi = TAU * psi;
            let r = Mat::identity(2 * m, 2 * m) * phi.cos() + &j * phi.sin();
            let rp = (&j * phi.cos() - Mat::identity(2 * m, 2 * m) * phi.sin()) * (TAU * dpsi);
            (r, rp)
        } else {
            let phi = (PI * u).sin().powi(2);
            let dphi = PI * (2.0 * PI * u).sin() / (b - a);
            let e = (&js * phi).exp();
            let ep = &js * &e * dphi;
            (e, ep)
        }
    });
    path.right_multiply(factor)
}

/// Convenience: the index of a path whose segments are given directly.
pub fn index_of_segments(m: usize, segments: Vec<Segment>, omega: UnitCircleParam) -> Result<IndexPair> {
    maslov_index(&PiecewisePath::new(m, segments)?, omega)
}

/// Crossing records as CSV: t_star, kernel_dim, signature, contribution, resolution.
pub fn write_crossings_csv<W: std::io::Write>(records: &[CrossingRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_star", "kernel_dim", "signature", "contribution", "resolution"])?;
    for r in records {
        w.write_record([
            format!("{:.15}", r.t_star),
            r.kernel_dim.to_string(),
            r.signature.to_string(),
            r.contribution.to_string(),
            format!("{:?}", r.resolution),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<crossings>".into(),
        source,
    })
}

#[cfg(test)]
mod tests;
