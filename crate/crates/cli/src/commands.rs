//! Subcommands, flag overrides and dispatch to toolkit operations.

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

use jacobi_spectral::expansion::{expand_experiment, FunctionPreset};
use jacobi_spectral::kernels::{cz_audit, AuditGrid, AuditKind};
use jacobi_spectral::lemma36::{default_q_grid, lemma36_check, Lemma36Params};
use jacobi_spectral::report::{ExperimentReport, SuiteSettings};
use jacobi_spectral::schrodinger::{extension_experiment, maximal_experiment, strichartz_experiment};
use jacobi_spectral::spaces::{
    embedding_experiment, equivalence_experiment, gfunction_norm_experiment, norms_experiment,
    structural_experiment, PotentialSpace, StructuralCase,
};
use jacobi_spectral::spectral::poisson_experiment;
use jacobi_spectral::suite::{caputo_report, run_suite, SuiteConfig, SuiteKind};
use jacobi_spectral::{Execution, ExpansionSampler, ParameterPair};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{output_root, write_report, write_suite};

#[derive(Debug, Parser)]
#[command(name = "jacobi-lab", version, about = "Experiments on Jacobi trigonometric expansions")]
pub struct Cli {
    /// Output root; defaults to $JACOBI_LAB_OUT, then ./runs.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Disable data parallelism.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct PairArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct SampleArgs {
    /// Random expansions per run.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Modes per random expansion.
    #[arg(long)]
    pub modes: Option<usize>,
    /// Coefficient decay exponent of the sampler.
    #[arg(long)]
    pub decay: Option<f64>,
    /// Base grid resolution; stability runs double it.
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand a named function and check the analysis/synthesis round trip.
    Expand {
        #[command(flatten)]
        pair: PairArgs,
        /// parabola, bump or step.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        modes: Option<usize>,
    },
    /// Poisson semigroup norms and semigroup defect of a random expansion.
    Poisson {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        sample: SampleArgs,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
    },
    /// Square-function norm against the L^p norm.
    Gfunc {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Closed-form Caputo derivatives against quadrature.
    CaputoOracle {
        #[arg(long)]
        cases: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Potential-space norms of random expansions.
    Norms {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long)]
        p: Option<f64>,
        /// Comma-separated smoothness orders.
        #[arg(long, value_delimiter = ',')]
        s_values: Option<Vec<f64>>,
    },
    /// Inclusions, derivatives and Riesz transforms between potential spaces.
    Struct {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        sample: SampleArgs,
        /// inclusion, derivative or riesz.
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        /// Lower order for the inclusion case.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        k: Option<u32>,
    },
    /// Embedding of a potential space into L^q (`--q inf` allowed).
    Embed {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Higher-order square function against the potential norm.
    Equiv {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        k: Option<u32>,
    },
    /// Maximal Schrödinger bound on an interior interval.
    Schrodinger {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long)]
        s: Option<f64>,
        /// Index N of the interval I_N.
        #[arg(long)]
        interval: Option<u32>,
    },
    /// Mixed-norm Strichartz runs; `--q` above 2 selects the extension.
    Strichartz {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Growth or gradient audit of the vertical kernel.
    KernelAudit {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        gamma: Option<f64>,
        /// growth or gradient.
        #[arg(long)]
        kind: Option<String>,
        /// Grid points per axis.
        #[arg(long)]
        points: Option<usize>,
    },
    /// The double integral I(q) against its bound, q = 1 down to 1e-6.
    Lemma36 {
        #[arg(long, allow_hyphen_values = true)]
        eta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Every acceptance check: `smoke` or `full`.
    Suite { name: String },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Expand { .. } => "expand",
            Command::Poisson { .. } => "poisson",
            Command::Gfunc { .. } => "gfunc",
            Command::CaputoOracle { .. } => "caputo-oracle",
            Command::Norms { .. } => "norms",
            Command::Struct { .. } => "struct",
            Command::Embed { .. } => "embed",
            Command::Equiv { .. } => "equiv",
            Command::Schrodinger { .. } => "schrodinger",
            Command::Strichartz { .. } => "strichartz",
            Command::KernelAudit { .. } => "kernel-audit",
            Command::Lemma36 { .. } => "lemma36",
            Command::Suite { .. } => "suite",
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

impl PairArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.alpha, self.alpha);
        set(&mut c.beta, self.beta);
    }
}

impl SampleArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.samples, self.samples);
        set(&mut c.seed, self.seed);
        set(&mut c.modes, self.modes);
        set(&mut c.decay, self.decay);
        set(&mut c.resolution, self.resolution);
    }
}

/// Applies the flags of `cmd` on top of `cfg`.
pub fn merge(cmd: &Command, cfg: &mut RunConfig) {
    match cmd {
        Command::Expand { pair, preset, modes } => {
            pair.apply(cfg);
            set_opt(&mut cfg.preset, preset.clone());
            set(&mut cfg.modes, *modes);
        }
        Command::Poisson { pair, sample, times } => {
            pair.apply(cfg);
            sample.apply(cfg);
            set_opt(&mut cfg.times, times.clone());
        }
        Command::Gfunc { pair, sample, p, gamma } => {
            pair.apply(cfg);
            sample.apply(cfg);
            set(&mut cfg.p, *p);
            set(&mut cfg.gamma, *gamma);
        }
        Command::CaputoOracle { cases, seed } => {
            set_opt(&mut cfg.cases, *cases);
            set(&mut cfg.seed, *seed);
        }
        Command::Norms { pair, sample, p, s_values } => {
            pair.apply(cfg);
            sample.apply(cfg);
            set(&mut cfg.p, *p);
            set_opt(&mut cfg.s_values, s_values.clone());
        }
        Command::Struct { pair, sample, case, p, s, r, k } => {
            pair.apply(cfg);
            sample.apply(cfg);
            set_opt(&mut cfg.case, case.clone());
            set(&mut cfg.p, *p);
            set(&mut cfg.s, *s);
            set_opt(&mut cfg.r, *r);
            set(&mut cfg.k, *k);
        }
        Command::Embed { pair, sample, p, s, q } | Command::Strichartz { pair, sample, p, s, q } => {
            pair.apply(cfg);
            sample.apply(cfg);
            set(&mut cfg.p, *p);
            set(&mut cfg.s, *s);
            set_opt(&mut cfg.q, *q);
        }
        Command::Equiv { pair, sample, p, gamma, k } => {
            pair.apply(cfg);
            sample.apply(cfg);
            set(&mut cfg.p, *p);
            set(&mut cfg.gamma, *gamma);
            set(&mut cfg.k, *k);
        }
        Command::Schrodinger { pair, sample, s, interval } => {
            pair.apply(cfg);
            sample.apply(cfg);
            set(&mut cfg.s, *s);
            set_opt(&mut cfg.interval, *interval);
        }
        Command::KernelAudit { pair, gamma, kind, points } => {
            pair.apply(cfg);
            set(&mut cfg.gamma, *gamma);
            set_opt(&mut cfg.kind, kind.clone());
            set_opt(&mut cfg.points, *points);
        }
        Command::Lemma36 { eta, xi, gamma } => {
            set_opt(&mut cfg.eta, *eta);
            set_opt(&mut cfg.xi, *xi);
            set(&mut cfg.gamma, *gamma);
        }
        Command::Suite { .. } => {}
    }
}

/// Verdict of a finished run.
pub struct Outcome {
    pub pass: Option<bool>,
}

fn exec(cfg: &RunConfig) -> Execution {
    if cfg.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn settings(cfg: &RunConfig) -> SuiteSettings {
    SuiteSettings {
        samples: cfg.samples,
        seed: cfg.seed,
        sampler: ExpansionSampler {
            modes: cfg.modes,
            decay: cfg.decay,
        },
        resolution: cfg.resolution,
        exec: exec(cfg),
    }
}

fn need<T: Copy>(v: Option<T>, what: &str, cmd: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("{cmd} needs --{what}")))
}

/// Executes the module operation behind one experiment subcommand.
fn experiment(cmd: &str, cfg: &RunConfig) -> Result<ExperimentReport, CliError> {
    let params = ParameterPair::new(cfg.alpha, cfg.beta)?;
    let st = settings(cfg);
    let report = match cmd {
        "expand" => {
            let preset: FunctionPreset = cfg.preset.as_deref().unwrap_or("parabola").parse()?;
            expand_experiment(&params, preset, cfg.modes)?
        }
        "poisson" => {
            let times = cfg.times.clone().unwrap_or_else(|| vec![0.0, 0.1, 0.5, 1.0, 2.0, 5.0]);
            let e = st.sampler.sample(&params, cfg.seed, 0);
            poisson_experiment(&e, &times)?
        }
        "gfunc" => gfunction_norm_experiment(&params, cfg.p, cfg.gamma, &st)?,
        "caputo-oracle" => caputo_report(cfg.seed, cfg.cases.unwrap_or(20))?,
        "norms" => {
            let s_values = cfg.s_values.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0, 2.0]);
            norms_experiment(&params, cfg.p, &s_values, &st)?
        }
        "struct" => {
            let case = match cfg.case.as_deref().unwrap_or("inclusion") {
                "inclusion" => StructuralCase::Inclusion {
                    r: need(cfg.r, "r", cmd)?,
                },
                "derivative" => StructuralCase::Derivative { k: cfg.k },
                "riesz" => StructuralCase::RieszTransform { k: cfg.k },
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown case '{other}', expected inclusion, derivative or riesz"
                    )))
                }
            };
            structural_experiment(&PotentialSpace::standard(params, cfg.p, cfg.s)?, case, &st)?
        }
        "embed" => {
            let q = need(cfg.q, "q", cmd)?;
            embedding_experiment(&PotentialSpace::standard(params, cfg.p, cfg.s)?, q, &st)?
        }
        "equiv" => equivalence_experiment(&params, cfg.p, cfg.gamma, cfg.k, &st)?,
        "schrodinger" => maximal_experiment(&params, cfg.s, cfg.interval.unwrap_or(4), &st)?,
        "strichartz" => match cfg.q {
            None => strichartz_experiment(&params, cfg.p, cfg.s, &st)?,
            Some(q) if q == 2.0 => strichartz_experiment(&params, cfg.p, cfg.s, &st)?,
            Some(q) => extension_experiment(&params, cfg.p, q, cfg.s, &st)?,
        },
        "kernel-audit" => {
            let kind = match cfg.kind.as_deref().unwrap_or("growth") {
                "growth" => AuditKind::Growth,
                "gradient" => AuditKind::Gradient,
                other => return Err(CliError::Usage(format!("unknown kind '{other}', expected growth or gradient"))),
            };
            let grid = AuditGrid {
                points: cfg.points.unwrap_or(AuditGrid::default().points),
                ..Default::default()
            };
            cz_audit(params, cfg.gamma, kind, &grid, exec(cfg))?
        }
        "lemma36" => {
            let l = Lemma36Params::new(cfg.eta.unwrap_or(2.0), cfg.xi.unwrap_or(0.0), cfg.gamma)?;
            lemma36_check(l, &default_q_grid())?
        }
        other => return Err(CliError::Usage(format!("no experiment '{other}'"))),
    };
    Ok(report)
}

fn print_report(r: &ExperimentReport, dir: &Path) {
    let verdict = match r.pass {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "EXPLORATORY",
    };
    println!("{} {verdict} ({} ms)", r.experiment, r.runtime_ms);
    for c in &r.checks {
        println!(
            "  {:<32} {:>14.6e}  threshold {:>10.3e}  {}",
            c.name,
            c.value,
            c.threshold,
            if c.pass { "ok" } else { "FAIL" }
        );
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
    println!("wrote {}", dir.display());
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    let name = cli.command.name();
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if !cfg.experiment.is_empty() && cfg.experiment != name {
        return Err(CliError::Usage(format!(
            "config is for experiment '{}' but the subcommand is '{name}'",
            cfg.experiment
        )));
    }
    cfg.experiment = name.to_string();
    merge(&cli.command, &mut cfg);
    if cli.sequential {
        cfg.sequential = true;
    }
    set_opt(&mut cfg.out, cli.out.clone());
    let root = output_root(cfg.out.as_deref());

    if let Command::Suite { name: suite } = &cli.command {
        let kind: SuiteKind = suite.parse()?;
        let suite_cfg = SuiteConfig {
            exec: exec(&cfg),
            ..SuiteConfig::for_kind(kind)
        };
        let report = run_suite(&suite_cfg, |c| println!("{}", c.summary_line()))?;
        let dir = root.join(format!("suite-{kind}"));
        write_suite(&dir, &report)?;
        println!(
            "suite {kind} {} in {} ms; wrote {}",
            if report.pass { "PASS" } else { "FAIL" },
            report.runtime_ms,
            dir.display()
        );
        return Ok(Outcome {
            pass: Some(report.pass),
        });
    }

    let mut report = experiment(name, &cfg)?;
    report.setting("run_config", cfg.for_report());
    let dir = root.join(name);
    write_report(&dir, &report)?;
    // Effective config, reusable via --config; TOML cannot hold seeds above i64::MAX.
    match cfg.for_report().to_toml() {
        Ok(text) => std::fs::write(dir.join("config.toml"), text).map_err(|e| CliError::Io(e.to_string()))?,
        Err(e) => eprintln!("config.toml not written: {e}"),
    }
    print_report(&report, &dir);
    Ok(Outcome { pass: report.pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from(["jacobi-lab", "equiv", "--alpha", "-0.25", "--p", "3", "--samples", "12"]).unwrap();
        let mut cfg = RunConfig {
            alpha: 0.5,
            gamma: 0.7,
            ..Default::default()
        };
        merge(&cli.command, &mut cfg);
        assert_eq!(cfg.alpha, -0.25);
        assert_eq!(cfg.p, 3.0);
        assert_eq!(cfg.samples, 12);
        assert_eq!(cfg.gamma, 0.7);
    }

    #[test]
    fn infinite_exponent_parses() {
        let cli = Cli::try_parse_from(["jacobi-lab", "embed", "--q", "inf"]).unwrap();
        let mut cfg = RunConfig::default();
        merge(&cli.command, &mut cfg);
        assert_eq!(cfg.q, Some(f64::INFINITY));
    }
}
