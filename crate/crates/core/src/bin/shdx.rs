use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use shdx::continuous::Generator;
use shdx::harness::{
    emit_report, run_convergence, run_corollaries, run_index, run_morse, run_spectrum, run_splitting, run_theorem_suite, Coefficients,
    Discretization, Format, OmegaItem, OmegaSpec, RunOptions, SuiteConfig, SystemDefinition,
};
use shdx::symplectic::{UnitCircleParam, TOL_ZERO};
use shdx::{Error, Result};

const AFTER_HELP: &str = "\
Exit codes: 0 all checks passed, 1 a check failed, 2 input error, 3 numerical error.

CSV columns:
  index        m,N,h,omega_angle,i_omega,nu_omega,m_minus,m_zero,m_plus,signature,s_plus,s_minus,
               r1,r2,r3,perturbed,crossings
  morse        m,N,h,omega_angle,m_minus,m_zero,m_plus,signature
  spectrum     k,alpha_k,lambda_plus,lambda_minus,multiplicity
  splitting    omega_angle,nu_omega,s_plus_morse,s_minus_morse,s_plus_endpoint,s_minus_endpoint,agree
  theorem1     system,m,N,omega_angle,degenerate,i_omega,nu_omega,m_minus,m_zero,m_plus,r1,r2,r3,
               perturbed,passed
  corollaries  name,omega_angle,N,passed,detail
  converge     N,h,eps,order_estimate";

#[derive(Parser)]
#[command(name = "shdx", version, about = "Morse and Maslov indices of discrete linear Hamiltonian systems", after_help = AFTER_HELP)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Common {
    /// System definition (JSON). Without it, B = 0 (or --standard j) is used.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// ω = e^{i·angle}; repeatable.
    #[arg(long = "omega-angle", global = true, allow_hyphen_values = true)]
    omega_angle: Vec<f64>,
    /// Period; repeatable for theorem1.
    #[arg(long = "N", global = true)]
    n: Vec<usize>,
    /// Half dimension; repeatable for theorem1.
    #[arg(long, global = true)]
    m: Vec<usize>,
    /// Standard-path coefficient of index j instead of B = 0.
    #[arg(long, global = true, allow_hyphen_values = true)]
    standard: Option<i64>,
    #[arg(long = "tol-zero", global = true, default_value_t = TOL_ZERO)]
    tol_zero: f64,
    #[arg(long = "theta-probe", global = true, default_value_t = 1e-3)]
    theta_probe: f64,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[arg(long, global = true, default_value = "json")]
    format: Format,
    /// Output file (stdout by default).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include wall-clock timings in index reports.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// Maslov index i_ω, nullity ν_ω and the Morse triple.
    Index,
    /// Inertia of the discrete action form.
    Morse {
        /// Write the Hessian at the first ω in binary form.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Spectrum of the free (B = 0) action form.
    Spectrum,
    /// Splitting numbers from the Morse side and from the endpoint.
    Splitting,
    /// Randomized check of the index identities.
    Theorem1 {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 12)]
        degenerate: usize,
    },
    /// Signature, splitting and step-size independence checks.
    Corollaries {
        /// Number of refinements N·2^k for continuous inputs.
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Node error of the discretization against a reference integrator.
    Converge {
        /// Periods to test.
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32, 64, 128])]
        ladder: Vec<usize>,
    },
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            tol_zero: self.tol_zero,
            theta_probe: self.theta_probe,
            timing: self.timing,
            ..RunOptions::default()
        }
    }

    fn omegas(&self) -> Vec<UnitCircleParam> {
        if self.omega_angle.is_empty() {
            vec![UnitCircleParam::one()]
        } else {
            self.omega_angle.iter().map(|&a| UnitCircleParam::new(a)).collect()
        }
    }

    fn single(v: &[usize], name: &str, default: usize) -> Result<usize> {
        match v {
            [] => Ok(default),
            [x] => Ok(*x),
            _ => Err(Error::Input(format!("--{name} given more than once"))),
        }
    }

    fn definition(&self) -> Result<SystemDefinition> {
        let mut def = match &self.input {
            Some(path) => SystemDefinition::load(path)?,
            None => {
                let m = Self::single(&self.m, "m", 1)?;
                let n = Self::single(&self.n, "N", 16)?;
                SystemDefinition {
                    m,
                    n,
                    h: None,
                    omega: OmegaSpec::default(),
                    coefficients: match self.standard {
                        Some(j) => Coefficients::Standard(j),
                        None => Coefficients::Constant(vec![vec![0.0; 2 * m]; 2 * m]),
                    },
                    discretization: Discretization::default(),
                }
            }
        };
        if !self.omega_angle.is_empty() {
            def.omega = OmegaSpec::Many(self.omega_angle.iter().map(|&a| OmegaItem::Angle(a)).collect());
        }
        def.validate()?;
        Ok(def)
    }

    fn generator(&self, def: &SystemDefinition) -> Result<Generator> {
        match &def.coefficients {
            Coefficients::Continuous(g) => Ok(g.clone()),
            Coefficients::Standard(j) => Ok(Generator::Standard { j: *j }),
            Coefficients::Constant(rows) => Ok(Generator::Constant(rows.clone())),
            Coefficients::Samples(_) => Err(Error::Input("converge needs a continuous or constant coefficient".into())),
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let c = &cli.common;
    let opts = c.options();
    let out = c.out.as_deref();
    match cli.verb {
        Verb::Index => {
            let r = run_index(&c.definition()?, &opts)?;
            emit_report(&r, c.format, out)?;
            Ok(r.passed)
        }
        Verb::Morse { dump } => {
            let r = run_morse(&c.definition()?, &opts, dump.as_deref())?;
            emit_report(&r, c.format, out)?;
            Ok(true)
        }
        Verb::Spectrum => {
            let (m, n, h) = match &c.input {
                Some(_) => {
                    let d = c.definition()?;
                    (d.m, d.n, d.h)
                }
                None => (Common::single(&c.m, "m", 1)?, Common::single(&c.n, "N", 16)?, None),
            };
            let r = run_spectrum(m, n, h, &c.omegas())?;
            emit_report(&r, c.format, out)?;
            Ok(true)
        }
        Verb::Splitting => {
            let r = run_splitting(&c.definition()?, &opts)?;
            emit_report(&r, c.format, out)?;
            Ok(r.passed)
        }
        Verb::Theorem1 { trials, degenerate } => {
            let mut cfg = SuiteConfig {
                seed: c.seed,
                trials,
                degenerate,
                ..SuiteConfig::default()
            };
            if !c.m.is_empty() {
                cfg.ms = c.m.clone();
            }
            if !c.n.is_empty() {
                cfg.ns = c.n.clone();
            }
            if !c.omega_angle.is_empty() {
                cfg.omegas = c.omegas();
            }
            let r = run_theorem_suite(&cfg, &opts)?;
            emit_report(&r, c.format, out)?;
            Ok(r.passed())
        }
        Verb::Corollaries { levels } => {
            let r = run_corollaries(&c.definition()?, levels, &opts)?;
            emit_report(&r, c.format, out)?;
            Ok(r.passed)
        }
        Verb::Converge { ladder } => {
            let def = c.definition()?;
            let r = run_convergence(&c.generator(&def)?, def.m, &ladder)?;
            emit_report(&r, c.format, out)?;
            Ok(r.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
