//! Command-line front end. Every command writes one versioned JSON report.

pub mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::circle::{build_nonneg_from_convex, multiplier_norm_lower_bound, product_pair, uniform_ergodicity_check};
use crate::criteria::{classify_with, ClassifyConfig, SeriesVerdict};
use crate::error::{Error, Result};
use crate::finite::{
    aperiodicity_certificate, communicating_classes, convergence_rate, deterministic_sets, exponent, limit_residuals,
    opnorm_with, period_and_classes, restrict, unimodular_eigencheck, validate, Constraint, FiniteOperator,
    NormOptions, OperatorSpec, DEFAULT_N_LIMIT,
};
use crate::measures::{MeasureSpec, SpectralMeasure};
use crate::ud::{del_series, ud_experiment, SequenceSpec, UdConfig};

pub const THREADS_ENV: &str = "HYPERBOUND_THREADS";

#[derive(Parser, Debug)]
#[command(name = "hyperbound", version, about = "Hyperboundedness diagnostics for measures on the circle and finite Markov operators")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Measures on the circle.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Finite bi-stochastic operators.
    #[command(subcommand)]
    Operator(OperatorCmd),
    /// Uniform distribution mod 1.
    #[command(subcommand)]
    Ud(UdCmd),
}

#[derive(Args, Debug)]
pub struct Output {
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum MeasureCmd {
    /// Classify a measure and report every series verdict.
    Analyze {
        /// Measure spec: a JSON file or inline JSON.
        #[arg(long)]
        spec: String,
        /// Largest coefficient index used by the series tests.
        #[arg(long, default_value_t = crate::criteria::DEFAULT_N_MAX)]
        n_max: usize,
        /// Epsilon for the rearranged-series tests.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Directory for partial-sum CSV tables.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Fourier-Stieltjes coefficients on an index range.
    Coeffs {
        /// Measure spec: a JSON file or inline JSON.
        #[arg(long)]
        spec: String,
        /// First index.
        #[arg(long, allow_hyphen_values = true)]
        from: i64,
        /// Last index (inclusive).
        #[arg(long, allow_hyphen_values = true)]
        to: i64,
        /// CSV file with columns n,re,im,abs.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Lower bound on the convolution operator norm from L^p to L^q.
    NormLb {
        /// Measure spec: a JSON file or inline JSON.
        #[arg(long)]
        spec: String,
        /// Source exponent, 1 <= p < q.
        #[arg(long)]
        p: f64,
        /// Target exponent, finite.
        #[arg(long)]
        q: f64,
        /// Largest test polynomial degree.
        #[arg(long = "N", alias = "n", default_value_t = 256)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Build a density numerically.
    #[command(subcommand)]
    Construct(ConstructCmd),
}

#[derive(Subcommand, Debug)]
pub enum ConstructCmd {
    /// Two singular cosine-series measures whose convolution is Lebesgue.
    ProductPair {
        /// Truncation degree of both cosine series (at least 4).
        #[arg(long)]
        degree: usize,
        /// Coefficient range for the convolution check.
        #[arg(long, default_value_t = 64)]
        check_n: i64,
        /// Directory receiving report.json and density.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Non-negative density from a convex sequence.
    Convex {
        /// A convex_ac measure spec.
        #[arg(long)]
        spec: String,
        /// Index up to which the sequence is taken as given before the convex continuation.
        #[arg(long, default_value_t = 4096)]
        truncation: usize,
        /// Directory receiving report.json and density.csv.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum OperatorCmd {
    /// Validation, cyclic structure, norms, certificate, rates and eigencheck.
    Analyze {
        /// Operator spec: a JSON file or inline JSON.
        #[arg(long)]
        spec: String,
        /// Horizon for the convergence-rate fit.
        #[arg(long, default_value_t = 30)]
        n_max: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Estimate the L^p to L^q norm (`inf` allowed).
    Norm {
        /// Operator spec: a JSON file or inline JSON.
        #[arg(long)]
        spec: String,
        /// Source exponent.
        #[arg(long, value_parser = exponent::parse)]
        p: f64,
        /// Target exponent.
        #[arg(long, value_parser = exponent::parse)]
        q: f64,
        /// Restrict to mean-zero functions.
        #[arg(long)]
        mean_zero: bool,
        /// Seed for the random restarts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Distance of the iterates to their cyclic limits.
    Limits {
        /// Operator spec: a JSON file or inline JSON.
        #[arg(long)]
        spec: String,
        /// Number of full periods; the iterate is P^(n d + j).
        #[arg(long)]
        n: usize,
        /// Offset within the period.
        #[arg(long, default_value_t = 0)]
        j: usize,
        /// Comma-separated function values; the indicator of state 0 when omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        f: Option<Vec<f64>>,
        #[command(flatten)]
        output: Output,
    },
    /// Deterministic sets by subset search.
    Deterministic {
        /// Operator spec: a JSON file or inline JSON.
        #[arg(long)]
        spec: String,
        /// Largest state count for the subset search.
        #[arg(long, default_value_t = DEFAULT_N_LIMIT)]
        n_limit: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand, Debug)]
pub enum UdCmd {
    /// Weyl sums, discrepancy and the double-sum series for a sequence.
    Test {
        /// Measure spec: a JSON file or inline JSON.
        #[arg(long)]
        measure: String,
        /// Sequence spec, e.g. '{"kind":"arith","a":0,"b":1}'.
        #[arg(long)]
        seq: String,
        /// Sequence terms per sample.
        #[arg(long = "N", alias = "n", default_value_t = 100_000)]
        n: usize,
        /// Number of points drawn from the measure.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Sampling seed.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Comma-separated Weyl-sum frequencies.
        #[arg(long, value_delimiter = ',', default_value = "1", allow_hyphen_values = true)]
        freqs: Vec<i64>,
        /// A sample fails when some |S_N| exceeds this.
        #[arg(long, default_value_t = 0.05)]
        weyl_threshold: f64,
        /// A sample fails when the discrepancy exceeds this.
        #[arg(long, default_value_t = 0.02)]
        discrepancy_threshold: f64,
        /// Terms of the double-sum series; 0 skips it.
        #[arg(long, default_value_t = 1000)]
        del_n: usize,
        /// CSV file of per-sample statistics.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
}

/// Parse `arg` as inline JSON when it starts with `{`, otherwise as a file path.
pub fn load_spec<T: DeserializeOwned>(arg: &str) -> Result<T> {
    let (text, origin) = if arg.trim_start().starts_with('{') {
        (arg.to_string(), "<inline>".to_string())
    } else {
        let text = std::fs::read_to_string(arg).map_err(|source| Error::Io {
            path: arg.to_string(),
            source,
        })?;
        (text, arg.to_string())
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: format!("{origin}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })
}

fn emit<C: Serialize, R: Serialize>(command: &str, config: &C, result: &R, out: Option<&Path>) -> Result<()> {
    let text = report::render(command, config, result)?;
    match out {
        Some(path) => report::write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn series_csv(s: &SeriesVerdict) -> String {
    report::csv(
        &["n", "partial_sum"],
        s.checkpoints.iter().map(|c| vec![json!(c.n), json!(c.partial_sum)]),
    )
}

fn measure_command(cmd: &MeasureCmd) -> Result<()> {
    match cmd {
        MeasureCmd::Analyze {
            spec,
            n_max,
            eps,
            csv,
            output,
        } => {
            let spec: MeasureSpec = load_spec(spec)?;
            let m = SpectralMeasure::from_spec(spec.clone())?.memoized();
            let cfg = ClassifyConfig {
                n_max: *n_max,
                eps: *eps,
                ..ClassifyConfig::default()
            };
            let classification = classify_with(&m, &cfg)?;
            let ergodicity = uniform_ergodicity_check(&m, (*n_max).min(10_000))?;
            if let Some(dir) = csv {
                create_dir(dir)?;
                report::write_file(&dir.join("ht.csv"), &series_csv(&classification.ht))?;
                for e in &classification.hr {
                    report::write_file(&dir.join(format!("hr_p{}.csv", e.p)), &series_csv(&e.series))?;
                }
                for (k, s) in classification.harris_power.series.iter().enumerate() {
                    report::write_file(&dir.join(format!("power_k{}.csv", k + 1)), &series_csv(s))?;
                }
            }
            let config = json!({"spec": spec, "classify": cfg});
            let result = json!({"classification": classification, "uniform_ergodicity": ergodicity});
            emit("measure analyze", &config, &result, output.out.as_deref())
        }
        MeasureCmd::Coeffs {
            spec,
            from,
            to,
            csv,
            output,
        } => {
            if from > to {
                return Err(Error::validation(format!("coeffs: --from {from} exceeds --to {to}")));
            }
            let spec: MeasureSpec = load_spec(spec)?;
            let m = SpectralMeasure::from_spec(spec.clone())?;
            let values = m.coefficients(*from, *to)?;
            let rows: Vec<Value> = values
                .iter()
                .zip(*from..)
                .map(|(z, n)| json!({"n": n, "re": z.re, "im": z.im, "abs": z.norm()}))
                .collect();
            if let Some(path) = csv {
                let text = report::csv(
                    &["n", "re", "im", "abs"],
                    rows.iter().map(|r| vec![r["n"].clone(), r["re"].clone(), r["im"].clone(), r["abs"].clone()]),
                );
                report::write_file(path, &text)?;
            }
            let config = json!({"spec": spec, "from": from, "to": to});
            emit("measure coeffs", &config, &json!({"coefficients": rows}), output.out.as_deref())
        }
        MeasureCmd::NormLb { spec, p, q, n, output } => {
            let spec: MeasureSpec = load_spec(spec)?;
            let m = SpectralMeasure::from_spec(spec.clone())?;
            let lb = multiplier_norm_lower_bound(&m, *p, *q, *n)?;
            let config = json!({"spec": spec, "p": p, "q": q, "n": n});
            emit("measure norm-lb", &config, &lb, output.out.as_deref())
        }
        MeasureCmd::Construct(ConstructCmd::ProductPair { degree, check_n, out }) => {
            let pair = product_pair(*degree)?;
            create_dir(out)?;
            let d1 = pair.density1.real_samples();
            let d2 = pair.density2.real_samples();
            let len = d1.len();
            let table = report::csv(
                &["x", "density1", "density2"],
                (0..len).map(|i| vec![json!(i as f64 / len as f64), json!(d1[i]), json!(d2[i])]),
            );
            report::write_file(&out.join("density.csv"), &table)?;
            let config = json!({"degree": degree, "check_n": check_n});
            let result = json!({
                "degree": pair.degree,
                "grid_len": len,
                "side1": pair.side1,
                "side2": pair.side2,
                "convolution_defect": pair.convolution_defect(*check_n)?,
                "grid_convolution_defect": pair.grid_convolution_defect(*check_n),
            });
            emit("measure construct product-pair", &config, &result, Some(&out.join("report.json")))
        }
        MeasureCmd::Construct(ConstructCmd::Convex { spec, truncation, out }) => {
            let spec: MeasureSpec = load_spec(spec)?;
            let MeasureSpec::ConvexAc(seq) = &spec else {
                return Err(Error::validation(format!(
                    "construct convex: expected a convex_ac spec, got {}",
                    spec.kind_name()
                )));
            };
            let dens = build_nonneg_from_convex(seq, *truncation, 0)?;
            create_dir(out)?;
            let samples = dens.grid.real_samples();
            let len = samples.len();
            let table = report::csv(
                &["x", "density"],
                samples.iter().enumerate().map(|(i, v)| vec![json!(i as f64 / len as f64), json!(v)]),
            );
            report::write_file(&out.join("density.csv"), &table)?;
            let config = json!({"spec": spec, "truncation": truncation});
            let result = json!({
                "constant": dens.constant,
                "truncation": dens.truncation,
                "support_end": dens.support_end,
                "grid_len": len,
                "min_sample": dens.min_sample,
            });
            emit("measure construct convex", &config, &result, Some(&out.join("report.json")))
        }
    }
}

/// Full analysis of one ergodic operator.
fn analyze_ergodic(op: &FiniteOperator, n_max: usize) -> Result<Value> {
    let dec = period_and_classes(op)?;
    let opts = NormOptions {
        classes: dec.classes.clone(),
        ..NormOptions::default()
    };
    let norms = json!({
        "l2_l4": opnorm_with(op, 2.0, 4.0, &opts)?,
        "l2_l3": opnorm_with(op, 2.0, 3.0, &opts)?,
        "l2_linf": opnorm_with(op, 2.0, f64::INFINITY, &opts)?,
    });
    Ok(json!({
        "decomposition": dec,
        "norms": norms,
        "certificate": aperiodicity_certificate(op)?,
        "rate": convergence_rate(op, &dec, n_max)?,
        "eigencheck": unimodular_eigencheck(op, &dec)?,
    }))
}

fn operator_command(cmd: &OperatorCmd) -> Result<()> {
    match cmd {
        OperatorCmd::Analyze { spec, n_max, output } => {
            let spec: OperatorSpec = load_spec(spec)?;
            let op = spec.build()?;
            let validation = validate(op.mu(), op.matrix(), op.tolerance());
            let components = if op.is_ergodic() {
                vec![json!({"states": (0..op.n()).collect::<Vec<_>>(), "analysis": analyze_ergodic(&op, *n_max)?})]
            } else {
                communicating_classes(&op)
                    .iter()
                    .map(|states| {
                        let sub = restrict(&op, states)?;
                        Ok(json!({"states": states, "analysis": analyze_ergodic(&sub, *n_max)?}))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            let config = json!({"spec": OperatorSpec::from(&op), "n_max": n_max});
            let result = json!({
                "n": op.n(),
                "validation": validation,
                "ergodic": op.is_ergodic(),
                "components": components,
            });
            emit("operator analyze", &config, &result, output.out.as_deref())
        }
        OperatorCmd::Norm {
            spec,
            p,
            q,
            mean_zero,
            seed,
            output,
        } => {
            let spec: OperatorSpec = load_spec(spec)?;
            let op = spec.build()?;
            let opts = NormOptions {
                constraint: if *mean_zero { Constraint::MeanZero } else { Constraint::None },
                seed: *seed,
                ..NormOptions::default()
            };
            let est = opnorm_with(&op, *p, *q, &opts)?;
            let config = json!({
                "spec": OperatorSpec::from(&op),
                "p": if p.is_infinite() { json!("inf") } else { json!(p) },
                "q": if q.is_infinite() { json!("inf") } else { json!(q) },
                "mean_zero": mean_zero,
                "seed": seed,
            });
            emit("operator norm", &config, &est, output.out.as_deref())
        }
        OperatorCmd::Limits { spec, n, j, f, output } => {
            let spec: OperatorSpec = load_spec(spec)?;
            let op = spec.build()?;
            let dec = period_and_classes(&op)?;
            let f = f.clone().unwrap_or_else(|| {
                let mut v = vec![0.0; op.n()];
                v[0] = 1.0;
                v
            });
            let res = limit_residuals(&op, &dec, &f, *n, *j)?;
            let config = json!({"spec": OperatorSpec::from(&op), "n": n, "j": j, "f": f});
            emit("operator limits", &config, &json!({"period": dec.period, "residuals": res}), output.out.as_deref())
        }
        OperatorCmd::Deterministic { spec, n_limit, output } => {
            let spec: OperatorSpec = load_spec(spec)?;
            let op = spec.build()?;
            let structure = deterministic_sets(&op, *n_limit)?;
            let config = json!({"spec": OperatorSpec::from(&op), "n_limit": n_limit});
            emit("operator deterministic", &config, &structure, output.out.as_deref())
        }
    }
}

fn ud_command(cmd: &UdCmd) -> Result<()> {
    let UdCmd::Test {
        measure,
        seq,
        n,
        samples,
        seed,
        freqs,
        weyl_threshold,
        discrepancy_threshold,
        del_n,
        csv,
        output,
    } = cmd;
    let mspec: MeasureSpec = load_spec(measure)?;
    let seq: SequenceSpec = load_spec(seq)?;
    let m = SpectralMeasure::from_spec(mspec.clone())?;
    let cfg = UdConfig {
        samples: *samples,
        n: *n,
        frequencies: freqs.clone(),
        seed: *seed,
        weyl_threshold: *weyl_threshold,
        discrepancy_threshold: *discrepancy_threshold,
    };
    let experiment = ud_experiment(&m, &seq, &cfg)?;
    let del = if *del_n > 0 {
        freqs
            .iter()
            .map(|&f| del_series(&m, &seq, f, *del_n))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    if let Some(path) = csv {
        let text = report::csv(
            &["index", "x", "weyl_max", "discrepancy", "passes"],
            experiment.rows.iter().map(|r| {
                vec![json!(r.index), json!(r.x), json!(r.weyl_max), json!(r.discrepancy), json!(r.passes)]
            }),
        );
        report::write_file(path, &text)?;
    }
    let config = json!({"measure": mspec, "seq": seq, "experiment": cfg, "del_n": del_n});
    emit("ud test", &config, &json!({"experiment": experiment, "del": del}), output.out.as_deref())
}

pub fn execute(cli: &Cli) -> Result<()> {
    let work = || match &cli.command {
        Command::Measure(c) => measure_command(c),
        Command::Operator(c) => operator_command(c),
        Command::Ud(c) => ud_command(c),
    };
    match cli.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::validation(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvariantBreach(_) => 3,
        _ => 2,
    }
}

/// Parse `args` (program name first), run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main_from_env() -> i32 {
    run(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = load_spec::<MeasureSpec>("{\"kind\": \"dirac\",\n \"x0\": }").unwrap_err();
        match err {
            Error::Parse { location, .. } => assert!(location.starts_with("<inline>:2:"), "{location}"),
            other => panic!("{other}"),
        }
        assert!(matches!(load_spec::<MeasureSpec>("/no/such/file.json"), Err(Error::Io { .. })));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::breach("x")), 3);
        assert_eq!(exit_code(&Error::validation("x")), 2);
        assert_eq!(run(["hyperbound", "measure", "coeffs", "--spec", "{\"kind\":\"cantor\"}", "--from", "3", "--to", "1"]), 2);
        assert_eq!(run(["hyperbound", "bogus"]), 2);
    }
}
