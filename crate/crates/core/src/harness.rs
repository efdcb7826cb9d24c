//! Verification runs over system definitions and their reports.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuous::{matrix_from_rows, reference_nodes, reference_path, rows_from_matrix, CoefficientFn, Generator};
use crate::discrete::{discretize_continuous, fundamental_solution, joint_path, transfer_matrix, CoefficientSequence};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, spectral_norm, Mat};
use crate::maslov::{maslov_index_detailed, splitting_endpoint, ScanConfig};
use crate::morse::{morse_indices, splitting_discrete, MorseTriple, SplittingPair};
use crate::symplectic::{nullity_with_tol, random_symmetric, shifted_svd, standard_path, UnitCircleParam, TOL_ZERO};

pub const SCHEMA: &str = "shdx-report/1";

fn schema() -> String {
    SCHEMA.to_string()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    /// B_n recovered from the reference solution so that nodes agree exactly.
    #[default]
    Interpolate,
    /// B_n = B(n/N).
    Sample,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OmegaItem {
    Angle(f64),
    Param { angle: f64 },
}

impl OmegaItem {
    pub fn angle(&self) -> f64 {
        match self {
            OmegaItem::Angle(a) | OmegaItem::Param { angle: a } => *a,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OmegaSpec {
    One(OmegaItem),
    Many(Vec<OmegaItem>),
}

impl Default for OmegaSpec {
    fn default() -> Self {
        OmegaSpec::One(OmegaItem::Angle(0.0))
    }
}

impl OmegaSpec {
    pub fn values(&self) -> Vec<UnitCircleParam> {
        match self {
            OmegaSpec::One(o) => vec![UnitCircleParam::new(o.angle())],
            OmegaSpec::Many(v) => v.iter().map(|o| UnitCircleParam::new(o.angle())).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Coefficients {
    Constant(Vec<Vec<f64>>),
    Samples(Vec<Vec<Vec<f64>>>),
    Standard(i64),
    Continuous(Generator),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SystemDefinition {
    pub m: usize,
    #[serde(rename = "N", alias = "n")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default)]
    pub omega: OmegaSpec,
    pub coefficients: Coefficients,
    #[serde(default)]
    pub discretization: Discretization,
}

impl SystemDefinition {
    pub fn from_json(text: &str) -> Result<Self> {
        let def: Self = serde_json::from_str(text)?;
        def.validate()?;
        Ok(def)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Input("m must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::Input("N must be at least 2".into()));
        }
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Input(format!("h must be positive, got {h}")));
            }
        }
        if let Coefficients::Samples(s) = &self.coefficients {
            if s.len() != self.n {
                return Err(Error::Input(format!("{} sample blocks for N = {}", s.len(), self.n)));
            }
        }
        Ok(())
    }

    pub fn omegas(&self) -> Vec<UnitCircleParam> {
        self.omega.values()
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn generator(&self) -> Result<Option<CoefficientFn>> {
        match &self.coefficients {
            Coefficients::Continuous(g) => Ok(Some(g.build(self.m)?)),
            Coefficients::Standard(j) => Ok(Some(Generator::Standard { j: *j }.build(self.m)?)),
            _ => Ok(None),
        }
    }

    /// The discrete system described by this definition.
    pub fn build(&self) -> Result<CoefficientSequence> {
        self.validate()?;
        let (m, n) = (self.m, self.n);
        let check_dim = |b: &Mat| -> Result<()> {
            if b.nrows() != 2 * m {
                return Err(Error::Dimension(format!("block is {}×{}, expected {}×{}", b.nrows(), b.ncols(), 2 * m, 2 * m)));
            }
            Ok(())
        };
        let declared = |rows: &[Vec<f64>]| -> Result<Mat> {
            let b = matrix_from_rows(rows)?;
            check_dim(&b)?;
            let r = crate::linalg::asymmetry(&b);
            if r > 1e-12 {
                return Err(Error::NotSymmetric { residual: r });
            }
            Ok(crate::linalg::symmetric_part(&b))
        };
        match &self.coefficients {
            Coefficients::Constant(rows) => CoefficientSequence::constant(&declared(rows)?, n, self.h),
            Coefficients::Samples(blocks) => {
                let bs = blocks.iter().map(|b| declared(b)).collect::<Result<Vec<_>>>()?;
                CoefficientSequence::new(m, bs, self.h)
            }
            Coefficients::Standard(j) => {
                let p = standard_path(m, *j)?;
                CoefficientSequence::new(m, (0..n).map(|k| p.coefficient(k as f64 / n as f64)).collect(), self.h)
            }
            Coefficients::Continuous(g) => {
                let b = g.build(m)?;
                match self.discretization {
                    Discretization::Sample => CoefficientSequence::new(m, (0..n).map(|k| b.at(k as f64 / n as f64)).collect(), self.h),
                    Discretization::Interpolate => {
                        if self.h.is_some_and(|h| (h - 1.0 / n as f64).abs() > 1e-15) {
                            return Err(Error::Input("interpolating discretization requires h = 1/N".into()));
                        }
                        let nodes = reference_nodes(&b, n)?;
                        Ok(discretize_continuous(&|t| nodes[(t * n as f64).round() as usize].clone(), m, n)?.0)
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub tol_zero: f64,
    pub theta_probe: f64,
    pub timing: bool,
    pub scan: ScanConfig,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            tol_zero: TOL_ZERO,
            theta_probe: 1e-3,
            timing: false,
            scan: ScanConfig::default(),
        }
    }
}

impl RunOptions {
    fn scan(&self) -> ScanConfig {
        ScanConfig {
            tol_zero: self.tol_zero,
            ..self.scan
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
    pub omega_angle: f64,
    pub i_omega: i64,
    pub nu_omega: usize,
    pub m_minus: usize,
    pub m_zero: usize,
    pub m_plus: usize,
    pub signature: i64,
    pub s_plus: i64,
    pub s_minus: i64,
    pub theorem1_residuals: [i64; 3],
    /// Endpoint was degenerate and the index came from the perturbed path.
    pub perturbed: bool,
    pub crossings: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl IndexReport {
    pub fn passed(&self) -> bool {
        self.theorem1_residuals == [0, 0, 0] && self.m_minus + self.m_zero + self.m_plus == 2 * self.m * self.n
    }
}

pub fn theorem1_residuals(triple: &MorseTriple, mn: usize, i: i64, nu: usize) -> [i64; 3] {
    let mn = mn as i64;
    [
        triple.m_minus as i64 - mn - i,
        triple.m_zero as i64 - nu as i64,
        triple.m_plus as i64 - mn + i + nu as i64,
    ]
}

/// Index pair, Morse triple and residuals of one system at one ω.
#[derive(Debug, Clone, Copy)]
pub struct TheoremCheck {
    pub i: i64,
    pub nu: usize,
    pub triple: MorseTriple,
    pub residuals: [i64; 3],
    pub perturbed: bool,
    pub crossings: usize,
}

pub fn theorem_check(sys: &CoefficientSequence, omega: UnitCircleParam, opts: &RunOptions) -> Result<TheoremCheck> {
    let sol = fundamental_solution(sys).map_err(|e| e.in_stage("fundamental solution"))?;
    let path = joint_path(&sol);
    let idx = maslov_index_detailed(&path, omega, &opts.scan()).map_err(|e| e.in_stage("maslov index"))?;
    let triple = morse_indices(sys, omega, opts.tol_zero).map_err(|e| e.in_stage("morse indices"))?;
    let mn = sys.dim_half() * sys.period();
    Ok(TheoremCheck {
        i: idx.pair.i,
        nu: idx.pair.nu,
        triple,
        residuals: theorem1_residuals(&triple, mn, idx.pair.i, idx.pair.nu),
        perturbed: idx.perturbation.is_some(),
        crossings: idx.crossings.len(),
    })
}

pub fn run_index_system(sys: &CoefficientSequence, omega: UnitCircleParam, opts: &RunOptions) -> Result<IndexReport> {
    let start = Instant::now();
    let c = theorem_check(sys, omega, opts)?;
    let sp = splitting_discrete(sys, omega, opts.theta_probe, opts.tol_zero).map_err(|e| e.in_stage("splitting"))?;
    Ok(IndexReport {
        m: sys.dim_half(),
        n: sys.period(),
        h: sys.h(),
        omega_angle: omega.angle(),
        i_omega: c.i,
        nu_omega: c.nu,
        m_minus: c.triple.m_minus,
        m_zero: c.triple.m_zero,
        m_plus: c.triple.m_plus,
        signature: c.triple.signature(),
        s_plus: sp.s_plus,
        s_minus: sp.s_minus,
        theorem1_residuals: c.residuals,
        perturbed: c.perturbed,
        crossings: c.crossings,
        timing_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexRun {
    pub schema: String,
    pub input: SystemDefinition,
    pub reports: Vec<IndexReport>,
    pub passed: bool,
}

pub fn run_index(def: &SystemDefinition, opts: &RunOptions) -> Result<IndexRun> {
    let sys = def.build().map_err(|e| e.in_stage("system construction"))?;
    let reports = def
        .omegas()
        .par_iter()
        .map(|&w| run_index_system(&sys, w, opts))
        .collect::<Result<Vec<_>>>()?;
    let passed = reports.iter().all(IndexReport::passed);
    Ok(IndexRun {
        schema: schema(),
        input: def.clone(),
        reports,
        passed,
    })
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub ms: Vec<usize>,
    pub ns: Vec<usize>,
    pub omegas: Vec<UnitCircleParam>,
    /// Number of additional systems tuned to have ν_ω ≥ 1.
    pub degenerate: usize,
    /// Spectral-norm bound on the random blocks.
    pub norm_bound: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            trials: 50,
            ms: vec![1, 2, 3],
            ns: vec![8, 16, 32],
            omegas: vec![
                UnitCircleParam::one(),
                UnitCircleParam::minus_one(),
                UnitCircleParam::new(std::f64::consts::FRAC_PI_3),
                UnitCircleParam::new(2.0),
            ],
            degenerate: 12,
            norm_bound: 3.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteRow {
    pub system: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub omega_angle: f64,
    pub degenerate: bool,
    pub i_omega: i64,
    pub nu_omega: usize,
    pub m_minus: usize,
    pub m_zero: usize,
    pub m_plus: usize,
    pub signature: i64,
    pub residuals: [i64; 3],
    pub perturbed: bool,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureDump {
    pub system: usize,
    pub omega_angle: f64,
    pub h: f64,
    pub blocks: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub schema: String,
    pub seed: u64,
    pub systems: usize,
    pub checks: usize,
    pub failures: usize,
    pub degenerate_checks: usize,
    pub perturbed: usize,
    pub rows: Vec<SuiteRow>,
    pub failure_dumps: Vec<FailureDump>,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct SuiteCase {
    system: usize,
    sys: CoefficientSequence,
    omegas: Vec<UnitCircleParam>,
    degenerate: bool,
}

/// Random block with spectral norm uniform in (0, bound].
fn random_block<R: Rng>(m: usize, bound: f64, rng: &mut R) -> Mat {
    let b = random_symmetric(2 * m, 1.0, rng);
    let target = bound * rng.gen_range(f64::EPSILON..=1.0);
    let norm = spectral_norm(&b).max(1e-300);
    b * (target / norm)
}

fn monodromy(b: &Mat, n: usize, h: f64) -> Option<Mat> {
    let s = transfer_matrix(b, h).ok()?.into_matrix();
    let mut g = Mat::identity(b.nrows(), b.nrows());
    for _ in 0..n {
        g = &s * g;
    }
    Some(g)
}

/// Relative distance of γ_N(B) from Sp⁰_ω.
fn degeneracy(b: &Mat, n: usize, h: f64, omega: UnitCircleParam) -> f64 {
    match monodromy(b, n, h) {
        Some(g) => {
            let (sv, _) = shifted_svd(&g, omega);
            sv.last().copied().unwrap_or(f64::INFINITY) / spectral_norm(&g).max(1.0)
        }
        None => f64::INFINITY,
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
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
    if fc < fd {
        c
    } else {
        d
    }
}

/// Constant system B⁰ + cE with c tuned so that γ_N has eigenvalue ω: the
/// distance σ_min(γ_N − ωI) is scanned over c and a local minimum refined
/// by golden section. Odd attempts use a positive definite E, which winds
/// the spectrum of γ_N around the circle as c grows.
pub fn tune_degenerate<R: Rng>(m: usize, n: usize, omega: UnitCircleParam, tol_zero: f64, rng: &mut R) -> Option<CoefficientSequence> {
    let h = 1.0 / n as f64;
    for attempt in 0..40 {
        let b0 = random_symmetric(2 * m, 0.5, rng);
        let mut e = random_symmetric(2 * m, 1.0, rng);
        if attempt % 2 == 1 {
            e = &e * e.transpose() + Mat::identity(2 * m, 2 * m) * 0.1;
        }
        let emax = max_abs(&e).max(1e-12);
        let cmax = ((0.45 / h - max_abs(&b0)) / emax).max(0.0);
        let grid = 400;
        let cs: Vec<f64> = (0..=grid).map(|k| -cmax + 2.0 * cmax * k as f64 / grid as f64).collect();
        let f = |c: f64| degeneracy(&(&b0 + &e * c), n, h, omega);
        let vals: Vec<f64> = cs.iter().map(|&c| f(c)).collect();
        for k in 1..grid {
            if !(vals[k] <= vals[k - 1] && vals[k] <= vals[k + 1] && vals[k] < 0.1) {
                continue;
            }
            let c = golden_min(f, cs[k - 1], cs[k + 1]);
            let Ok(sys) = CoefficientSequence::constant(&(&b0 + &e * c), n, None) else { continue };
            let Ok(sol) = fundamental_solution(&sys) else { continue };
            if nullity_with_tol(sol.monodromy().matrix(), omega, tol_zero) >= 1 {
                return Some(sys);
            }
        }
    }
    None
}

fn suite_cases(cfg: &SuiteConfig, tol_zero: f64) -> Result<Vec<SuiteCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut grid = Vec::new();
    for &m in &cfg.ms {
        for &n in &cfg.ns {
            grid.push((m, n));
        }
    }
    let mut cases = Vec::new();
    if grid.is_empty() || cfg.omegas.is_empty() {
        return Ok(cases);
    }
    for t in 0..cfg.trials {
        let (m, n) = grid[t % grid.len()];
        let blocks = (0..n).map(|_| random_block(m, cfg.norm_bound, &mut rng)).collect();
        cases.push(SuiteCase {
            system: t,
            sys: CoefficientSequence::new(m, blocks, None)?,
            omegas: cfg.omegas.clone(),
            degenerate: false,
        });
    }
    for d in 0..cfg.degenerate {
        let (m, n) = grid[d % grid.len()];
        let omega = cfg.omegas[d % cfg.omegas.len()];
        let sys = tune_degenerate(m, n, omega, tol_zero, &mut rng).ok_or_else(|| {
            Error::UnresolvedDegeneracy(format!("could not tune a degenerate system for m = {m}, N = {n}, ω angle {}", omega.angle()))
        })?;
        cases.push(SuiteCase {
            system: cfg.trials + d,
            sys,
            omegas: vec![omega],
            degenerate: true,
        });
    }
    Ok(cases)
}

pub fn run_theorem_suite(cfg: &SuiteConfig, opts: &RunOptions) -> Result<SuiteSummary> {
    let cases = suite_cases(cfg, opts.tol_zero)?;
    let tasks: Vec<(usize, UnitCircleParam)> = cases
        .iter()
        .enumerate()
        .flat_map(|(k, c)| c.omegas.iter().map(move |&w| (k, w)))
        .collect();
    let rows: Vec<SuiteRow> = tasks
        .par_iter()
        .map(|&(k, w)| {
            let case = &cases[k];
            let (m, n) = (case.sys.dim_half(), case.sys.period());
            let mut row = SuiteRow {
                system: case.system,
                m,
                n,
                omega_angle: w.angle(),
                degenerate: case.degenerate,
                i_omega: 0,
                nu_omega: 0,
                m_minus: 0,
                m_zero: 0,
                m_plus: 0,
                signature: 0,
                residuals: [0; 3],
                perturbed: false,
                passed: false,
                error: None,
            };
            match theorem_check(&case.sys, w, opts) {
                Ok(c) => {
                    row.i_omega = c.i;
                    row.nu_omega = c.nu;
                    row.m_minus = c.triple.m_minus;
                    row.m_zero = c.triple.m_zero;
                    row.m_plus = c.triple.m_plus;
                    row.signature = c.triple.signature();
                    row.residuals = c.residuals;
                    row.perturbed = c.perturbed;
                    row.passed = c.residuals == [0, 0, 0] && (!case.degenerate || c.nu >= 1);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();
    let failure_dumps = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| {
            let case = cases.iter().find(|c| c.system == r.system).expect("case exists");
            FailureDump {
                system: r.system,
                omega_angle: r.omega_angle,
                h: case.sys.h(),
                blocks: case.sys.blocks().iter().map(rows_from_matrix).collect(),
            }
        })
        .collect();
    Ok(SuiteSummary {
        schema: schema(),
        seed: cfg.seed,
        systems: cases.len(),
        checks: rows.len(),
        failures: rows.iter().filter(|r| !r.passed).count(),
        degenerate_checks: rows.iter().filter(|r| r.degenerate).count(),
        perturbed: rows.iter().filter(|r| r.perturbed).count(),
        rows,
        failure_dumps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CorollaryCheck {
    pub name: String,
    pub omega_angle: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorollaryReport {
    pub schema: String,
    pub input: SystemDefinition,
    pub checks: Vec<CorollaryCheck>,
    pub passed: bool,
}

fn check(name: &str, omega: UnitCircleParam, n: usize, passed: bool, detail: String) -> CorollaryCheck {
    CorollaryCheck {
        name: name.into(),
        omega_angle: omega.angle(),
        n,
        passed,
        detail,
    }
}

/// Sampling density for paths of continuous solutions, evaluated by integration.
const CONTINUOUS_SEGMENTS: usize = 16;

pub fn run_corollaries(def: &SystemDefinition, ladder_len: usize, opts: &RunOptions) -> Result<CorollaryReport> {
    let sys = def.build().map_err(|e| e.in_stage("system construction"))?;
    let sol = fundamental_solution(&sys)?;
    let path = joint_path(&sol);
    let generator = def.generator()?;
    let continuous = match &generator {
        Some(b) => Some((reference_path(b, CONTINUOUS_SEGMENTS)?, reference_nodes(b, CONTINUOUS_SEGMENTS)?.pop().expect("nodes"))),
        None => None,
    };
    let mut checks = Vec::new();
    for omega in def.omegas() {
        let c = theorem_check(&sys, omega, opts)?;
        let n = sys.period();
        if c.nu == 0 {
            checks.push(check(
                "signature_equals_twice_index",
                omega,
                n,
                c.triple.signature() == 2 * c.i,
                format!("Sign = {}, i = {}", c.triple.signature(), c.i),
            ));
        }
        let morse_side = splitting_discrete(&sys, omega, opts.theta_probe, opts.tol_zero)?;
        let maslov_side = splitting_endpoint(&path, omega, opts.theta_probe, &opts.scan())?;
        checks.push(split_check("splitting_morse_equals_endpoint", omega, n, &morse_side, &maslov_side));
        let bounded = [morse_side.s_plus, morse_side.s_minus].iter().all(|&s| s >= 0 && s as usize <= c.nu);
        checks.push(check(
            "splitting_bounded_by_nullity",
            omega,
            n,
            bounded,
            format!("({}, {}) with ν = {}", morse_side.s_plus, morse_side.s_minus, c.nu),
        ));

        let (Some(b), Some((cpath, end))) = (&generator, &continuous) else { continue };
        let nu_c = nullity_with_tol(end, omega, opts.tol_zero);
        if nu_c != 0 {
            checks.push(check("continuous_nondegenerate", omega, n, true, format!("ν_ω(γ) = {nu_c}; ladder checks not applicable")));
            continue;
        }
        let ic = maslov_index_detailed(cpath, omega, &opts.scan())?.pair;
        let sc = splitting_endpoint(cpath, omega, opts.theta_probe, &opts.scan())?;
        let mut ladder = Vec::new();
        for k in 0..ladder_len {
            let nk = def.n << k;
            let sk = CoefficientSequence::new(def.m, (0..nk).map(|q| b.at(q as f64 / nk as f64)).collect(), None)
                .map_err(|e| e.in_stage(format!("sampled system at N = {nk}")))?;
            let ck = theorem_check(&sk, omega, opts)?;
            let spk = splitting_discrete(&sk, omega, opts.theta_probe, opts.tol_zero)?;
            ladder.push((nk, ck, spk));
        }
        let all_same = ladder.iter().all(|(_, ck, _)| ck.i == ic.i && ck.nu == 0);
        checks.push(check(
            "index_independent_of_h",
            omega,
            n,
            all_same,
            format!(
                "continuous i = {}; discrete (N, i, ν): {}",
                ic.i,
                ladder.iter().map(|(nk, ck, _)| format!("({nk}, {}, {})", ck.i, ck.nu)).collect::<Vec<_>>().join(" ")
            ),
        ));
        let sign_ok = ladder.iter().all(|(_, ck, _)| ck.triple.signature() == 2 * ic.i);
        checks.push(check("signature_equals_twice_continuous_index", omega, n, sign_ok, format!("2i = {}", 2 * ic.i)));
        let split_same = ladder.iter().all(|(_, _, spk)| (spk.s_plus, spk.s_minus) == (sc.s_plus, sc.s_minus));
        checks.push(check(
            "splitting_independent_of_h",
            omega,
            n,
            split_same,
            format!(
                "continuous ({}, {}); discrete {}",
                sc.s_plus,
                sc.s_minus,
                ladder.iter().map(|(nk, _, s)| format!("N={nk}: ({}, {})", s.s_plus, s.s_minus)).collect::<Vec<_>>().join(" ")
            ),
        ));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(CorollaryReport {
        schema: schema(),
        input: def.clone(),
        checks,
        passed,
    })
}

fn split_check(name: &str, omega: UnitCircleParam, n: usize, a: &SplittingPair, b: &SplittingPair) -> CorollaryCheck {
    check(
        name,
        omega,
        n,
        (a.s_plus, a.s_minus) == (b.s_plus, b.s_minus),
        format!("morse ({}, {}), endpoint ({}, {})", a.s_plus, a.s_minus, b.s_plus, b.s_minus),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
    pub eps: f64,
    pub order_estimate: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SUniformity {
    #[serde(rename = "N")]
    pub n: usize,
    pub eps_s1: f64,
    pub max_eps: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub schema: String,
    pub generator: Generator,
    pub m: usize,
    pub rows: Vec<ConvergenceRow>,
    pub monotone: bool,
    pub s_uniformity: Vec<SUniformity>,
    pub passed: bool,
}

/// Errors below this are treated as exact agreement.
pub const EPS_FLOOR: f64 = 1e-13;

/// max_n ‖γ(t_n) − γ_{d,h,N}(t_n)‖_max with node-sampled B_n = B(n/N).
pub fn node_error(b: &CoefficientFn, n: usize) -> Result<f64> {
    let sys = CoefficientSequence::new(b.dim_half(), (0..n).map(|k| b.at(k as f64 / n as f64)).collect(), None)
        .map_err(|e| e.in_stage(format!("sampled system at N = {n}")))?;
    let sol = fundamental_solution(&sys)?;
    let reference = reference_nodes(b, n)?;
    Ok(reference
        .iter()
        .zip(sol.gammas())
        .map(|(r, g)| max_abs(&(r - g)))
        .fold(0.0, f64::max))
}

pub fn run_convergence(generator: &Generator, m: usize, ladder: &[usize]) -> Result<ConvergenceReport> {
    let b = generator.build(m)?;
    let eps = ladder.par_iter().map(|&n| node_error(&b, n)).collect::<Result<Vec<_>>>()?;
    let rows: Vec<ConvergenceRow> = ladder
        .iter()
        .enumerate()
        .map(|(k, &n)| ConvergenceRow {
            n,
            h: 1.0 / n as f64,
            eps: eps[k],
            order_estimate: (k > 0 && eps[k] > EPS_FLOOR && eps[k - 1] > EPS_FLOOR)
                .then(|| (eps[k - 1] / eps[k]).ln() / (ladder[k] as f64 / ladder[k - 1] as f64).ln()),
        })
        .collect();
    let monotone = eps.windows(2).all(|w| w[1] < w[0] || w[0].max(w[1]) <= EPS_FLOOR);
    let s_uniformity = ladder
        .par_iter()
        .zip(eps.par_iter())
        .map(|(&n, &e1)| {
            let es = (1..=8)
                .map(|k| node_error(&b.scaled(k as f64 / 8.0), n))
                .collect::<Result<Vec<_>>>()?;
            let max_eps = es.iter().copied().fold(0.0, f64::max);
            Ok(SUniformity {
                n,
                eps_s1: e1,
                max_eps,
                passed: max_eps <= 2.0 * e1 || max_eps <= EPS_FLOOR,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = monotone && s_uniformity.iter().all(|s| s.passed);
    Ok(ConvergenceReport {
        schema: schema(),
        generator: generator.clone(),
        m,
        rows,
        monotone,
        s_uniformity,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MorseRow {
    pub omega_angle: f64,
    pub m_minus: usize,
    pub m_zero: usize,
    pub m_plus: usize,
    pub signature: i64,
    pub hermitian_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MorseRun {
    pub schema: String,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
    pub rows: Vec<MorseRow>,
}

/// Inertia of the action form at each ω; with `dump`, the Hessian at the
/// first ω is written in the binary dump format.
pub fn run_morse(def: &SystemDefinition, opts: &RunOptions, dump: Option<&Path>) -> Result<MorseRun> {
    let sys = def.build().map_err(|e| e.in_stage("system construction"))?;
    let omegas = def.omegas();
    if let (Some(path), Some(&w)) = (dump, omegas.first()) {
        crate::morse::assemble_hessian(&sys, w)?.write_binary(path)?;
    }
    let rows = omegas
        .par_iter()
        .map(|&w| {
            let form = crate::morse::assemble_hessian(&sys, w)?;
            let t = morse_indices(&sys, w, opts.tol_zero)?;
            Ok(MorseRow {
                omega_angle: w.angle(),
                m_minus: t.m_minus,
                m_zero: t.m_zero,
                m_plus: t.m_plus,
                signature: t.signature(),
                hermitian_residual: form.hermitian_residual(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MorseRun {
        schema: schema(),
        m: sys.dim_half(),
        n: sys.period(),
        h: sys.h(),
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRun {
    pub schema: String,
    pub spectra: Vec<crate::spectral::FreeSpectrum>,
}

pub fn run_spectrum(m: usize, n: usize, h: Option<f64>, omegas: &[UnitCircleParam]) -> Result<SpectrumRun> {
    let h = h.unwrap_or(1.0 / n as f64);
    Ok(SpectrumRun {
        schema: schema(),
        spectra: omegas.iter().map(|&w| crate::spectral::free_spectrum(m, n, h, w)).collect::<Result<Vec<_>>>()?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SplittingRow {
    pub omega_angle: f64,
    pub nu_omega: usize,
    pub morse: (i64, i64),
    pub endpoint: (i64, i64),
    pub agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplittingRun {
    pub schema: String,
    pub theta_probe: f64,
    pub rows: Vec<SplittingRow>,
    pub passed: bool,
}

/// Splitting numbers from the Morse side and from the endpoint of the joint path.
pub fn run_splitting(def: &SystemDefinition, opts: &RunOptions) -> Result<SplittingRun> {
    let sys = def.build().map_err(|e| e.in_stage("system construction"))?;
    let sol = fundamental_solution(&sys)?;
    let path = joint_path(&sol);
    let end = sol.monodromy().into_matrix();
    let rows = def
        .omegas()
        .par_iter()
        .map(|&w| {
            let a = splitting_discrete(&sys, w, opts.theta_probe, opts.tol_zero)?;
            let b = splitting_endpoint(&path, w, opts.theta_probe, &opts.scan())?;
            Ok(SplittingRow {
                omega_angle: w.angle(),
                nu_omega: nullity_with_tol(&end, w, opts.tol_zero),
                morse: (a.s_plus, a.s_minus),
                endpoint: (b.s_plus, b.s_minus),
                agree: (a.s_plus, a.s_minus) == (b.s_plus, b.s_minus),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| r.agree);
    Ok(SplittingRun {
        schema: schema(),
        theta_probe: opts.theta_probe,
        rows,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Input(format!("unknown format {other:?} (json or csv)"))),
        }
    }
}

/// A report with a flat tabular form.
pub trait Report: Serialize {
    fn write_csv<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()>;
}

impl Report for IndexRun {
    fn write_csv<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        w.write_record([
            "m", "N", "h", "omega_angle", "i_omega", "nu_omega", "m_minus", "m_zero", "m_plus", "signature", "s_plus", "s_minus", "r1",
            "r2", "r3", "perturbed", "crossings",
        ])?;
        for r in &self.reports {
            w.write_record([
                r.m.to_string(),
                r.n.to_string(),
                r.h.to_string(),
                r.omega_angle.to_string(),
                r.i_omega.to_string(),
                r.nu_omega.to_string(),
                r.m_minus.to_string(),
                r.m_zero.to_string(),
                r.m_plus.to_string(),
                r.signature.to_string(),
                r.s_plus.to_string(),
                r.s_minus.to_string(),
                r.theorem1_residuals[0].to_string(),
                r.theorem1_residuals[1].to_string(),
                r.theorem1_residuals[2].to_string(),
                r.perturbed.to_string(),
                r.crossings.to_string(),
            ])?;
        }
        Ok(())
    }
}

impl Report for SuiteSummary {
    fn write_csv<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        w.write_record([
            "system", "m", "N", "omega_angle", "degenerate", "i_omega", "nu_omega", "m_minus", "m_zero", "m_plus", "r1", "r2", "r3", "perturbed",
            "passed",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.system.to_string(),
                r.m.to_string(),
                r.n.to_string(),
                r.omega_angle.to_string(),
                r.degenerate.to_string(),
                r.i_omega.to_string(),
                r.nu_omega.to_string(),
                r.m_minus.to_string(),
                r.m_zero.to_string(),
                r.m_plus.to_string(),
                r.residuals[0].to_string(),
                r.residuals[1].to_string(),
                r.residuals[2].to_string(),
                r.perturbed.to_string(),
                r.passed.to_string(),
            ])?;
        }
        Ok(())
    }
}

impl Report for CorollaryReport {
    fn write_csv<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        w.write_record(["name", "omega_angle", "N", "passed", "detail"])?;
        for c in &self.checks {
            w.write_record([c.name.clone(), c.omega_angle.to_string(), c.n.to_string(), c.passed.to_string(), c.detail.clone()])?;
        }
        Ok(())
    }
}

impl Report for ConvergenceReport {
    fn write_csv<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        w.write_record(["N", "h", "eps", "order_estimate"])?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.h.to_string(),
                format!("{:e}", r.eps),
                r.order_estimate.map(|p| p.to_string()).unwrap_or_default(),
            ])?;
        }
        Ok(())
    }
}

impl Report for MorseRun {
    fn write_csv<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        w.write_record(["m", "N", "h", "omega_angle", "m_minus", "m_zero", "m_plus", "signature"])?;
        for r in &self.rows {
            w.write_record([
                self.m.to_string(),
                self.n.to_string(),
                self.h.to_string(),
                r.omega_angle.to_string(),
                r.m_minus.to_string(),
                r.m_zero.to_string(),
                r.m_plus.to_string(),
                r.signature.to_string(),
            ])?;
        }
        Ok(())
    }
}

impl Report for SpectrumRun {
    fn write_csv<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        w.write_record(["k", "alpha_k", "lambda_plus", "lambda_minus", "multiplicity"])?;
        for s in &self.spectra {
            for md in &s.modes {
                w.write_record([
                    md.k.to_string(),
                    md.alpha_k.to_string(),
                    md.lambda_plus.to_string(),
                    md.lambda_minus.to_string(),
                    md.multiplicity.to_string(),
                ])?;
            }
        }
        Ok(())
    }
}

impl Report for SplittingRun {
    fn write_csv<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        w.write_record(["omega_angle", "nu_omega", "s_plus_morse", "s_minus_morse", "s_plus_endpoint", "s_minus_endpoint", "agree"])?;
        for r in &self.rows {
            w.write_record([
                r.omega_angle.to_string(),
                r.nu_omega.to_string(),
                r.morse.0.to_string(),
                r.morse.1.to_string(),
                r.endpoint.0.to_string(),
                r.endpoint.1.to_string(),
                r.agree.to_string(),
            ])?;
        }
        Ok(())
    }
}

pub fn render<R: Report>(report: &R, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            report.write_csv(&mut w)?;
            w.into_inner().map_err(|e| Error::Input(e.to_string()))
        }
    }
}

/// Serializes to `path`, or to stdout when no path is given.
pub fn emit_report<R: Report>(report: &R, format: Format, path: Option<&Path>) -> Result<()> {
    let bytes = render(report, format)?;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout().write_all(&bytes).map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

#[cfg(test)]
mod tests;
