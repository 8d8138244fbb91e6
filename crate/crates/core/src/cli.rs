//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 bad input (flags, files, data), 2 numeric
//! failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::ModelFile;
use crate::cp_priors::{loss_based_prior, shifted_binomial_prior, UniformLocationPrior};
use crate::distributions::{moment_match, DistributionSpec, Family};
use crate::divergence::{hellinger, kl_with, MethodChoice};
use crate::error::{Error, Result};
use crate::experiments::{
    analyze, coal_mining_analysis, compare_priors, ingest_counts, ingest_prices_to_abs_log_returns, run_scenario,
    sp500_analysis, write_analysis, write_frequency, AnalysisMethod, AnalysisOptions, AnalysisReport,
    FrequencyReport, ModelPriorChoice, Sample, Scenario4Variant, ScenarioConfig, RETURN_FLOOR,
};
use crate::model_priors::{model_prior_probabilities, McConfig};
use crate::rng::DEFAULT_SEED;

/// Environment variable that supplies the output directory when --out is
/// not given.
pub const OUT_DIR_ENV: &str = "LBCP_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "lbcp", version, about = "Objective Bayesian change-point analysis with loss-based priors")]
pub struct Cli {
    /// Worker threads (0 = all cores). Results do not depend on this value.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Print numbers in shortest round-trip form instead of 6 significant digits.
    #[arg(long, global = true)]
    pub full_precision: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kullback-Leibler divergence KL(p‖q).
    Kl {
        /// First distribution, e.g. poisson:1 or weibull:1.5,5.
        #[arg(long)]
        p: DistributionSpec,
        #[arg(long)]
        q: DistributionSpec,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = KlMethodArg::Auto)]
        method: KlMethodArg,
    },
    /// Hellinger distance between two distributions.
    Hellinger {
        #[arg(long)]
        p: DistributionSpec,
        #[arg(long)]
        q: DistributionSpec,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Discrete priors over change-point locations or model indices.
    #[command(subcommand)]
    Prior(PriorCommand),
    /// Loss-based prior over the models of a nested sequence.
    ModelPriors {
        /// TOML model file.
        #[arg(long)]
        config: PathBuf,
        /// Sample size.
        #[arg(long)]
        n: usize,
        /// Parameter draws per segment (overrides the config file).
        #[arg(long)]
        draws: Option<usize>,
        /// Master seed (overrides the config file).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Model posteriors and location posteriors for a data file.
    Analyze(AnalyzeArgs),
    /// Repeated-sampling study of a built-in scenario.
    Simulate(SimulateArgs),
    /// Built-in real-data analyses.
    #[command(subcommand)]
    Real(RealCommand),
    /// Distribution of a family with the given mean and variance.
    MomentMatch {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        mean: f64,
        #[arg(long)]
        variance: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KlMethodArg {
    Auto,
    Closed,
    Numeric,
}

#[derive(Debug, Subcommand)]
pub enum PriorCommand {
    /// Uniform prior over k ordered locations among 1..n−1.
    Locations {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Refuse to print more rows than this.
        #[arg(long, default_value_t = 1_000_000)]
        limit: usize,
    },
    /// Shifted binomial prior on a single location.
    ShiftedBinomial {
        #[arg(long)]
        n: usize,
    },
    /// Loss-based prior over a finite list of distributions.
    LossBased {
        /// One distribution per model index, repeated.
        #[arg(long = "model", required = true, num_args = 1..)]
        models: Vec<DistributionSpec>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Exact,
    Mc,
    Bic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelPriorArg {
    LossBased,
    Uniform,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// CSV with one value per line, optional header and optional label column.
    #[arg(long)]
    pub data: PathBuf,
    /// TOML model file.
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = ModelPriorArg::LossBased)]
    pub model_prior: ModelPriorArg,
    /// Monte Carlo draws per segment for the evidences.
    #[arg(long, default_value_t = 2000)]
    pub draws: usize,
    /// Parameter draws per segment for the model prior.
    #[arg(long, default_value_t = 5000)]
    pub prior_draws: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Shortest segment in the Schwarz location scan.
    #[arg(long, default_value_t = 10)]
    pub min_segment: usize,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub scenario: u8,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Generating model (default: the largest).
    #[arg(long)]
    pub true_model: Option<usize>,
    /// Run loss-based and uniform model priors on the same data sets.
    #[arg(long)]
    pub compare: bool,
    #[arg(long, value_enum, default_value_t = ModelPriorArg::LossBased)]
    pub model_prior: ModelPriorArg,
    /// Scenario 4 priors.
    #[arg(long, value_enum, default_value_t = VariantArg::MomentMatched)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 2000)]
    pub draws: usize,
    #[arg(long, default_value_t = 5000)]
    pub prior_draws: usize,
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    MomentMatched,
    Hyperprior,
}

#[derive(Debug, Subcommand)]
pub enum RealCommand {
    /// Yearly coal-mining disasters: no change vs one change, exact.
    Coal {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, env = OUT_DIR_ENV)]
        out: Option<PathBuf>,
    },
    /// S&P 500 absolute log-returns from a price file.
    Sp500 {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Bic)]
        method: MethodArg,
        #[arg(long, default_value_t = 10)]
        min_segment: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, env = OUT_DIR_ENV)]
        out: Option<PathBuf>,
    },
}

/// Formats a number with 6 significant digits, or exactly.
pub fn fmt_num(x: f64, full: bool) -> String {
    if full || !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..6).contains(&e) {
        let s = format!("{:.*}", (5 - e).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

/// Runs the CLI on `args`, writing to `out`/`err`; returns the exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(out, "{e}");
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 1 } else { 0 }
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
            let _ = out.flush();
            return code;
        }
    };
    let code = match run(&cli, out) {
        Ok(()) => 0,
        Err(Error::Io(m)) if m == BROKEN_PIPE => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numeric() {
                2
            } else {
                1
            }
        }
    };
    let _ = out.flush();
    let _ = err.flush();
    code
}

/// Message for a closed stdout; the run stops quietly, as with `head`.
const BROKEN_PIPE: &str = "broken pipe";

fn io<T>(r: std::io::Result<T>) -> Result<T> {
    r.map_err(|e| match e.kind() {
        std::io::ErrorKind::BrokenPipe => Error::Io(BROKEN_PIPE.into()),
        _ => Error::Io(e.to_string()),
    })
}

fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let full = cli.full_precision;
    let f = |x: f64| fmt_num(x, full);
    match &cli.command {
        Command::Kl { p, q, tol, method } => {
            let m = match method {
                KlMethodArg::Auto => MethodChoice::Auto,
                KlMethodArg::Closed => MethodChoice::Closed,
                KlMethodArg::Numeric => MethodChoice::Numeric,
            };
            let r = kl_with(p, q, *tol, m)?;
            io(writeln!(out, "kl\t{}\nmethod\t{}\nerror_bound\t{}", f(r.value), r.method, f(r.error_bound)))?;
        }
        Command::Hellinger { p, q, tol } => {
            io(writeln!(out, "hellinger\t{}", f(hellinger(p, q, *tol)?)))?;
        }
        Command::Prior(PriorCommand::Locations { n, k, limit }) => {
            let u = UniformLocationPrior::new(*n, *k)?;
            if u.count() > *limit as u128 {
                return Err(Error::Domain(format!(
                    "{} location vectors exceed --limit {limit}",
                    u.count()
                )));
            }
            let mass = f(u.log_mass().exp());
            io(writeln!(out, "locations,mass"))?;
            for m in u.enumerate() {
                let locs: Vec<String> = m.locations().iter().map(|v| v.to_string()).collect();
                io(writeln!(out, "{},{mass}", locs.join(" ")))?;
            }
        }
        Command::Prior(PriorCommand::ShiftedBinomial { n }) => {
            let p = shifted_binomial_prior(*n)?;
            io(writeln!(out, "location,mass"))?;
            for (m, w) in p.iter() {
                io(writeln!(out, "{m},{}", f(w)))?;
            }
        }
        Command::Prior(PriorCommand::LossBased { models, tol }) => {
            let p = loss_based_prior(models, *tol)?;
            io(writeln!(out, "index,model,mass"))?;
            for (i, w) in p.iter() {
                io(writeln!(out, "{i},{},{}", models[*i], f(w)))?;
            }
        }
        Command::ModelPriors { config, n, draws, seed } => {
            let file = ModelFile::load(config)?;
            let seq = file.sequence()?;
            let mc = McConfig {
                draws: draws.or(file.mc.as_ref().and_then(|m| m.draws)).unwrap_or(5000),
                seed: seed.or(file.mc.as_ref().and_then(|m| m.seed)).unwrap_or(DEFAULT_SEED),
                threads: cli.threads,
                ..Default::default()
            };
            let r = model_prior_probabilities(&seq, *n, &mc)?;
            io(writeln!(out, "model\tsegments\traw_score\tlog_score\tse\tprobability"))?;
            for j in 0..r.probs.len() {
                let fams: Vec<String> = seq.segments[..=j].iter().map(|s| s.family.to_string()).collect();
                io(writeln!(
                    out,
                    "M{j}\t{}\t{}\t{}\t{}\t{}",
                    fams.join("->"),
                    f(r.raw_scores[j]),
                    f(r.log_scores[j]),
                    f(r.mc_se[j]),
                    f(r.probs[j])
                ))?;
            }
            if r.converged.iter().any(|c| !c) {
                io(writeln!(out, "warning: some divergence infima did not converge"))?;
            }
            io(writeln!(out, "draws\t{}", r.draws))?;
        }
        Command::Analyze(a) => {
            let file = ModelFile::load(&a.models)?;
            let seq = file.sequence()?;
            let data = ingest_values(&a.data)?;
            let opts = AnalysisOptions {
                method: match a.method {
                    MethodArg::Exact => AnalysisMethod::Exact,
                    MethodArg::Mc => AnalysisMethod::Mc,
                    MethodArg::Bic => AnalysisMethod::Bic,
                },
                model_prior: prior_choice(a.model_prior),
                draws: a.draws,
                prior_draws: a.prior_draws,
                seed: a.seed,
                threads: cli.threads,
                min_segment: a.min_segment,
                location_prior: seq.location_prior,
            };
            let report = analyze("analysis", &seq, &data, &opts)?;
            print_analysis(out, &report, &data, full)?;
            if let Some(dir) = &a.out {
                stage_dir(dir, |d| write_analysis(d, &report, &data))?;
                io(writeln!(out, "wrote\t{}", dir.display()))?;
            }
        }
        Command::Simulate(s) => simulate(cli, s, out)?,
        Command::Real(RealCommand::Coal { data, out: dir }) => {
            let sample = ingest_counts(data)?;
            let report = coal_mining_analysis(&sample)?;
            print_analysis(out, &report, &sample, full)?;
            let lb = report.log_bayes_factors[1][0] / std::f64::consts::LN_10;
            io(writeln!(out, "log10_B10\t{}", f(lb)))?;
            if let Some(dir) = dir {
                stage_dir(dir, |d| write_analysis(d, &report, &sample))?;
                io(writeln!(out, "wrote\t{}", dir.display()))?;
            }
        }
        Command::Real(RealCommand::Sp500 { data, method, min_segment, seed, out: dir }) => {
            if !matches!(method, MethodArg::Bic) {
                return Err(Error::Unsupported("the S&P 500 analysis uses the Schwarz approximation (--method bic)".into()));
            }
            let (sample, floored) = ingest_prices_to_abs_log_returns(data, RETURN_FLOOR)?;
            let opts = AnalysisOptions { min_segment: *min_segment, seed: *seed, threads: cli.threads, ..Default::default() };
            let mut report = sp500_analysis(&sample, &opts)?;
            report.notes.push(format!("{floored} zero return(s) floored at {RETURN_FLOOR:e}"));
            print_analysis(out, &report, &sample, full)?;
            if let Some(dir) = dir {
                stage_dir(dir, |d| write_analysis(d, &report, &sample))?;
                io(writeln!(out, "wrote\t{}", dir.display()))?;
            }
        }
        Command::MomentMatch { family, mean, variance } => {
            let d = moment_match(*family, *mean, *variance)?;
            let params: Vec<String> = d.params().iter().map(|v| f(*v)).collect();
            io(writeln!(out, "{}:{}", d.family(), params.join(",")))?;
            if full {
                io(writeln!(out, "{d}"))?;
            }
        }
    }
    Ok(())
}

fn prior_choice(a: ModelPriorArg) -> ModelPriorChoice {
    match a {
        ModelPriorArg::LossBased => ModelPriorChoice::LossBased,
        ModelPriorArg::Uniform => ModelPriorChoice::Uniform,
    }
}

/// Any finite numbers, one per row.
fn ingest_values(path: &Path) -> Result<Sample> {
    crate::experiments::ingest_values(path)
}

fn simulate(cli: &Cli, s: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let full = cli.full_precision;
    let mut cfg = if s.scenario == 4 {
        if s.true_model.is_some_and(|m| m != 2) {
            return Err(Error::Domain("scenario 4 is generated from M2 only (--true-model 2)".into()));
        }
        ScenarioConfig::scenario4(
            s.n,
            match s.variant {
                VariantArg::MomentMatched => Scenario4Variant::MomentMatched,
                VariantArg::Hyperprior => Scenario4Variant::Hyperprior,
            },
        )?
    } else {
        ScenarioConfig::builtin(s.scenario, s.n, s.true_model)?
    };
    cfg.replicates = s.replicates;
    cfg.seed = s.seed;
    cfg.threads = cli.threads;
    cfg.evidence_draws = s.draws;
    cfg.prior_draws = s.prior_draws;
    cfg.model_prior = prior_choice(s.model_prior);
    cfg.validate()?;
    let first = cfg.simulate(0);
    if s.compare {
        let p = compare_priors(&cfg)?;
        print_frequency(out, &p.loss_based, full)?;
        print_frequency(out, &p.uniform, full)?;
        io(writeln!(out, "same_datasets\t{}", p.same_datasets))?;
        if let Some(dir) = &s.out {
            stage_dir(dir, |d| write_frequency(d, &p, &[&p.loss_based, &p.uniform], &first))?;
            io(writeln!(out, "wrote\t{}", dir.display()))?;
        }
    } else {
        let r = run_scenario(&cfg)?;
        print_frequency(out, &r, full)?;
        if let Some(dir) = &s.out {
            stage_dir(dir, |d| write_frequency(d, &r, &[&r], &first))?;
            io(writeln!(out, "wrote\t{}", dir.display()))?;
        }
    }
    Ok(())
}

fn print_frequency(out: &mut dyn Write, r: &FrequencyReport, full: bool) -> Result<()> {
    let f = |x: f64| fmt_num(x, full);
    let kind = match r.prior_kind {
        ModelPriorChoice::LossBased => "loss_based",
        ModelPriorChoice::Uniform => "uniform",
    };
    io(writeln!(
        out,
        "scenario {} n={} replicates={} seed={} true_model=M{} model_prior={kind}",
        r.scenario, r.n, r.replicates, r.seed, r.true_model
    ))?;
    io(writeln!(out, "model\tprior\tmean_posterior\tvar_posterior\twins"))?;
    for j in 0..r.model_priors.len() {
        io(writeln!(
            out,
            "M{j}\t{}\t{}\t{}\t{}/{}",
            f(r.model_priors[j]),
            f(r.mean_posterior[j]),
            f(r.var_posterior[j]),
            r.wins[j],
            r.replicates
        ))?;
    }
    Ok(())
}

fn print_analysis(out: &mut dyn Write, r: &AnalysisReport, data: &Sample, full: bool) -> Result<()> {
    let f = |x: f64| fmt_num(x, full);
    io(writeln!(out, "{}: n={} method={}", r.name, r.n, r.method))?;
    io(writeln!(out, "model\tsegments\tprior\tlog_evidence\tposterior\tlocations"))?;
    for j in 0..r.models.len() {
        let locs = match &r.best_locations[j] {
            Some(m) => m.iter().map(|&v| data.location_label(v)).collect::<Vec<_>>().join(" "),
            None => "-".into(),
        };
        io(writeln!(
            out,
            "M{j}\t{}\t{}\t{}\t{}\t{locs}",
            r.models[j],
            f(r.model_priors[j]),
            f(r.log_evidences[j]),
            f(r.posteriors[j])
        ))?;
    }
    for (j, row) in r.log_bayes_factors.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            if i != j {
                io(writeln!(out, "log_B{j}{i}\t{}", f(*v)))?;
            }
        }
    }
    for note in &r.notes {
        io(writeln!(out, "note\t{note}"))?;
    }
    Ok(())
}

/// Writes through a staging directory next to `dir` and moves the files into
/// place, so a failed run leaves no partial output.
fn stage_dir(dir: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
    let name = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
    let _ = fs::remove_dir_all(&staging);
    let res = write(&staging).and_then(|_| {
        if !dir.exists() {
            fs::rename(&staging, dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
        } else {
            for entry in fs::read_dir(&staging)? {
                let entry = entry?;
                fs::rename(entry.path(), dir.join(entry.file_name()))
                    .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
            }
            Ok(())
        }
    });
    let _ = fs::remove_dir_all(&staging);
    res
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(1.0 - 2f64.ln(), false), "0.306853");
        assert_eq!(fmt_num(1.0 / 99.0, false), "0.010101");
        assert_eq!(fmt_num(50.0, false), "50");
        assert_eq!(fmt_num(6.2e12, false), "6.20000e12");
        assert_eq!(fmt_num(0.1, true), "0.1");
    }
}
