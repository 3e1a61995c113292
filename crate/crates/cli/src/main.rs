//! `idbound`: deviation and risk bounds for infinitely divisible samples.
//!
//! Exit status: 0 on success, 2 on invalid input or a violated
//! precondition, 3 on I/O failure.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use idbound::bounds::{
    deviation_bound_closed, deviation_bound_integral, find_xhat, risk_bound_closed,
    risk_bound_integral, write_reports_csv, write_reports_json, BoundReport, TauContext,
};
use idbound::config::{load_config, parse_config, ConfigDocument};
use idbound::experiments::{
    bound_dominance_report, default_gamma_curves, rate_sweep, risk_dominance_report,
    symmetrization_check, write_csv, write_json, write_series, GammaChoice, LnCovSource,
    RateSweepConfig, DEFAULT_MC_REPLICATES, DEFAULT_TRIALS,
};
use idbound::function_class::{Coordinate, LipschitzRampFamily, COVER_REPLICATES};
use idbound::rng::DEFAULT_SEED;
use idbound::{Atom, Error, GeneratingTriplet};

#[derive(Parser)]
#[command(
    name = "idbound",
    version,
    about = "Deviation and risk bounds for infinitely divisible samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a deviation or risk bound on a grid of radii.
    Bound(BoundArgs),
    /// Locate the maximizer x̂ of the rate exponent γ.
    Xhat(OutputArgs),
    /// Monte-Carlo tail estimates next to the theoretical bounds.
    Tail(TailArgs),
    /// Convergence rate of the risk radius in N.
    Rate(RateArgs),
    /// Curves of γ and γ' over [1.05, 500].
    Figures(FigureArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (directory with --plot-data); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct SourceArgs {
    /// JSON document with `triplet` and/or `family`, or a bare triplet.
    #[arg(long, conflicts_with = "triplet")]
    config: Option<PathBuf>,
    /// Inline JSON triplet (or full document).
    #[arg(long)]
    triplet: Option<String>,
}

impl SourceArgs {
    fn load(&self) -> Result<ConfigDocument, Error> {
        match (&self.config, &self.triplet) {
            (Some(p), _) => load_config(p),
            (None, Some(text)) => parse_config(text),
            (None, None) => Ok(ConfigDocument::default()),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Integral,
    Closed,
    RiskIntegral,
    RiskClosed,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// Radii, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    xi: Vec<f64>,
    /// Second moment of the Lévy measure; taken from the triplet if omitted.
    #[arg(long = "V")]
    v: Option<f64>,
    /// Support radius (`inf` allowed); taken from the triplet if omitted.
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long = "N", default_value_t = 1)]
    n: u64,
    /// Lower end of the function range (risk bounds).
    #[arg(long = "A")]
    a: Option<f64>,
    /// Upper end of the function range (risk bounds).
    #[arg(long = "B")]
    b: Option<f64>,
    /// Log expected covering number (risk bounds).
    #[arg(long = "ln-cov", default_value_t = 0.0)]
    ln_cov: f64,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TailKind {
    /// `|F - EF| > xi` for the coordinate function, against both deviation bounds.
    Deviation,
    /// `sup_f |E_N f - E f| > xi` over the family, against both risk bounds.
    Risk,
    /// Both sides of the symmetrization inequality.
    Symmetrization,
}

#[derive(Args)]
struct TailArgs {
    #[arg(long, value_enum, default_value_t = TailKind::Deviation)]
    kind: TailKind,
    /// Radii, comma separated [default: 1..10 for deviation, 0.5,0.75,1,1.5,2 otherwise].
    #[arg(long, value_delimiter = ',')]
    xi: Vec<f64>,
    /// Sample size [default: 10 for deviation, 2000 otherwise].
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write two-column series per curve into the `--out` directory.
    #[arg(long)]
    plot_data: bool,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct RateArgs {
    /// Sample sizes, comma separated and increasing.
    #[arg(long = "N", value_delimiter = ',', default_values_t = [100u64, 300, 1000, 3000, 10000])]
    n: Vec<u64>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// A positive number, or `adaptive`.
    #[arg(long, default_value = "adaptive")]
    gamma: String,
    /// A number, or `estimated`.
    #[arg(long = "ln-cov", default_value = "estimated")]
    ln_cov: String,
    /// Sup-deviation replicates per N; 0 skips the Monte-Carlo series.
    #[arg(long, default_value_t = DEFAULT_MC_REPLICATES)]
    replicates: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    plot_data: bool,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long)]
    plot_data: bool,
    #[command(flatten)]
    output: OutputArgs,
}

fn standard_triplet() -> GeneratingTriplet {
    GeneratingTriplet::atomic(vec![0.0], vec![Atom::scalar(1.0, 1.0)])
        .expect("valid standard triplet")
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<T: Serialize>(rows: &[T], out: &OutputArgs) -> Result<(), Error> {
    let mut w = sink(out.out.as_deref())?;
    match out.format {
        Format::Csv => write_csv(rows, &mut w)?,
        Format::Json => {
            write_json(rows, &mut w)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn plot_dir(out: &OutputArgs) -> Result<&Path, Error> {
    let dir = out.out.as_deref().ok_or_else(|| Error::Invalid {
        key: "out".into(),
        reason: "--plot-data needs an output directory".into(),
    })?;
    fs::create_dir_all(dir)?;
    Ok(dir)
}

fn series(
    dir: &Path,
    name: &str,
    header: (&str, &str),
    points: Vec<(f64, f64)>,
) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    write_series(header, points, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_bound(args: &BoundArgs) -> Result<(), Error> {
    let doc = args.source.load()?;
    let measure = doc.triplet.as_ref().map(|t| t.measure().clone());
    let v = args.v.or(measure.as_ref().map(|m| m.second_moment()));
    let r = args.r.or(measure.as_ref().map(|m| m.support_radius()));
    let (fa, fb) = doc.family.as_ref().map_or((0.0, 1.0), |f| f.range());
    let (a, b) = (args.a.unwrap_or(fa), args.b.unwrap_or(fb));
    let need = |x: Option<f64>, key: &str| {
        x.ok_or_else(|| Error::Invalid {
            key: key.into(),
            reason: "required (flag or triplet)".into(),
        })
    };
    let ctx = || -> Result<TauContext, Error> {
        let m = measure.clone().ok_or_else(|| Error::Invalid {
            key: "triplet".into(),
            reason: "the integral forms need a Lévy measure (--config or --triplet)".into(),
        })?;
        TauContext::new(m, args.lambda, args.n)
    };
    let reports: Vec<BoundReport> = match args.method {
        Method::Integral => {
            let c = ctx()?;
            args.xi
                .iter()
                .map(|&xi| deviation_bound_integral(&c, xi))
                .collect::<Result<_, _>>()?
        }
        Method::RiskIntegral => {
            let c = ctx()?;
            args.xi
                .iter()
                .map(|&xi| risk_bound_integral(&c, xi, args.ln_cov, a, b))
                .collect::<Result<_, _>>()?
        }
        Method::Closed => {
            let (v, r) = (need(v, "V")?, need(r, "R")?);
            args.xi
                .iter()
                .map(|&xi| deviation_bound_closed(xi, v, r, args.lambda, args.n))
                .collect::<Result<_, _>>()?
        }
        Method::RiskClosed => {
            let (v, r) = (need(v, "V")?, need(r, "R")?);
            args.xi
                .iter()
                .map(|&xi| risk_bound_closed(xi, args.n, args.ln_cov, v, r, args.lambda, a, b))
                .collect::<Result<_, _>>()?
        }
    };
    let mut w = sink(args.output.out.as_deref())?;
    match args.output.format {
        Format::Csv => write_reports_csv(&reports, &mut w)?,
        Format::Json => {
            write_reports_json(&reports, &mut w)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Quantity {
    quantity: &'static str,
    value: f64,
}

fn cmd_xhat(out: &OutputArgs) -> Result<(), Error> {
    let h = find_xhat();
    emit(
        &[
            Quantity {
                quantity: "xhat",
                value: h.x,
            },
            Quantity {
                quantity: "gamma_max",
                value: h.gamma_max,
            },
        ],
        out,
    )
}

fn cmd_tail(args: &TailArgs) -> Result<(), Error> {
    let doc = args.source.load()?;
    let triplet = doc.triplet.unwrap_or_else(standard_triplet);
    let family = doc.family.unwrap_or_else(LipschitzRampFamily::standard);
    let default_xi = match args.kind {
        TailKind::Deviation => (1..=10).map(f64::from).collect(),
        _ => vec![0.5, 0.75, 1.0, 1.5, 2.0],
    };
    let xi = if args.xi.is_empty() {
        default_xi
    } else {
        args.xi.clone()
    };
    let n = args.n.unwrap_or(if args.kind == TailKind::Deviation {
        10
    } else {
        2000
    });
    match args.kind {
        TailKind::Deviation => {
            let rows =
                bound_dominance_report(&triplet, &Coordinate(0), n, &xi, args.trials, args.seed)?;
            for r in rows.iter().filter(|r| r.violation) {
                eprintln!(
                    "violation at xi = {}: ci_low {} exceeds a bound",
                    r.tail.xi, r.tail.ci_low
                );
            }
            if args.plot_data {
                let dir = plot_dir(&args.output)?;
                series(
                    dir,
                    "mc_tail.csv",
                    ("xi", "point"),
                    rows.iter().map(|r| (r.tail.xi, r.tail.point)).collect(),
                )?;
                let int = rows.iter().map(|r| (r.tail.xi, r.integral.value)).collect();
                series(dir, "integral_bound.csv", ("xi", "value"), int)?;
                let closed = rows.iter().map(|r| (r.tail.xi, r.closed.value)).collect();
                series(dir, "closed_bound.csv", ("xi", "value"), closed)
            } else {
                emit(
                    &rows.iter().map(|r| r.record()).collect::<Vec<_>>(),
                    &args.output,
                )
            }
        }
        TailKind::Risk => {
            let rows = risk_dominance_report(&triplet, &family, n, &xi, args.trials, args.seed)?;
            for r in rows.iter().filter(|r| r.violation) {
                eprintln!(
                    "violation at xi = {}: ci_low {} exceeds the risk bound",
                    r.tail.xi, r.tail.ci_low
                );
            }
            if args.plot_data {
                let dir = plot_dir(&args.output)?;
                series(
                    dir,
                    "mc_sup_tail.csv",
                    ("xi", "point"),
                    rows.iter().map(|r| (r.tail.xi, r.tail.point)).collect(),
                )?;
                let closed = rows.iter().map(|r| (r.tail.xi, r.closed.value)).collect();
                series(dir, "risk_closed.csv", ("xi", "value"), closed)
            } else {
                emit(
                    &rows.iter().map(|r| r.record()).collect::<Vec<_>>(),
                    &args.output,
                )
            }
        }
        TailKind::Symmetrization => {
            let rows = xi
                .iter()
                .map(|&x| symmetrization_check(&triplet, &family, n, x, args.trials, args.seed))
                .collect::<Result<Vec<_>, _>>()?;
            let records: Vec<SymmetrizationRecord> = rows
                .iter()
                .map(|s| SymmetrizationRecord {
                    xi: s.lhs.xi,
                    trials: s.lhs.trials,
                    lhs_point: s.lhs.point,
                    lhs_ci_low: s.lhs.ci_low,
                    lhs_ci_high: s.lhs.ci_high,
                    rhs_point: s.rhs.point,
                    rhs_ci_low: s.rhs.ci_low,
                    rhs_ci_high: s.rhs.ci_high,
                    holds: s.holds,
                })
                .collect();
            emit(&records, &args.output)
        }
    }
}

#[derive(Serialize)]
struct SymmetrizationRecord {
    xi: f64,
    trials: u64,
    lhs_point: f64,
    lhs_ci_low: f64,
    lhs_ci_high: f64,
    /// Un-doubled estimate of `Pr{sup|E'_N f - E_N f| > xi/2}`.
    rhs_point: f64,
    rhs_ci_low: f64,
    rhs_ci_high: f64,
    holds: bool,
}

fn parse_choice(text: &str, word: &str, key: &str) -> Result<Option<f64>, Error> {
    if text == word {
        return Ok(None);
    }
    text.parse::<f64>().map(Some).map_err(|_| Error::Invalid {
        key: key.into(),
        reason: format!("expected a number or `{word}`"),
    })
}

fn cmd_rate(args: &RateArgs) -> Result<(), Error> {
    let doc = args.source.load()?;
    let triplet = doc.triplet.unwrap_or_else(standard_triplet);
    let family = doc.family.unwrap_or_else(LipschitzRampFamily::standard);
    let gamma = parse_choice(&args.gamma, "adaptive", "gamma")?
        .map_or(GammaChoice::Adaptive, GammaChoice::Fixed);
    let ln_cov = parse_choice(&args.ln_cov, "estimated", "ln-cov")?.map_or(
        LnCovSource::Estimated {
            replicates: COVER_REPLICATES,
        },
        LnCovSource::Constant,
    );
    let cfg = RateSweepConfig {
        n_grid: args.n.clone(),
        epsilon: args.epsilon,
        gamma,
        ln_cov,
        mc_replicates: args.replicates,
        seed: args.seed,
    };
    let sweep = rate_sweep(&family, &triplet, &cfg)?;
    for note in &sweep.notes {
        eprintln!("note: {note}");
    }
    eprintln!(
        "bound slope {:.9}, reference slope {}{}",
        sweep.bound_slope,
        sweep.reference_slope,
        sweep
            .mc_slope
            .map_or(String::new(), |s| format!(", Monte-Carlo slope {s:.6}"))
    );
    if args.plot_data {
        let dir = plot_dir(&args.output)?;
        series(
            dir,
            "bound_radius.csv",
            ("N", "radius"),
            sweep
                .rows
                .iter()
                .map(|r| (r.n as f64, r.bound_radius))
                .collect(),
        )?;
        let mc: Vec<(f64, f64)> = sweep
            .rows
            .iter()
            .filter_map(|r| r.mc_sup_dev.map(|q| (r.n as f64, q)))
            .collect();
        if !mc.is_empty() {
            series(dir, "mc_sup_dev.csv", ("N", "quantile"), mc)?;
        }
        // -1/2 reference through the first radius
        let (n0, r0) = (sweep.rows[0].n as f64, sweep.rows[0].bound_radius);
        let reference = sweep
            .rows
            .iter()
            .map(|r| {
                (
                    r.n as f64,
                    r0 * (r.n as f64 / n0).powf(sweep.reference_slope),
                )
            })
            .collect();
        return series(dir, "reference.csv", ("N", "radius"), reference);
    }
    match args.output.format {
        Format::Csv => emit(&sweep.rows, &args.output),
        Format::Json => {
            let mut w = sink(args.output.out.as_deref())?;
            write_json(&sweep, &mut w)?;
            writeln!(w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_figures(args: &FigureArgs) -> Result<(), Error> {
    let curves = default_gamma_curves();
    if args.plot_data {
        let dir = plot_dir(&args.output)?;
        series(
            dir,
            "gamma.csv",
            ("x", "gamma"),
            curves.iter().map(|p| (p.x, p.gamma)).collect(),
        )?;
        return series(
            dir,
            "gamma_prime.csv",
            ("x", "gamma_prime"),
            curves.iter().map(|p| (p.x, p.gamma_prime)).collect(),
        );
    }
    emit(&curves, &args.output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bound(a) => cmd_bound(a),
        Command::Xhat(o) => cmd_xhat(o),
        Command::Tail(a) => cmd_tail(a),
        Command::Rate(a) => cmd_rate(a),
        Command::Figures(a) => cmd_figures(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 3 } else { 2 })
        }
    }
}
