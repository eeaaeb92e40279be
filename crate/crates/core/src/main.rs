use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use scenery_lab::harness::montecarlo::{lemma8_trials, summarize_lemma8};
use scenery_lab::harness::trial::summarize;
use scenery_lab::harness::{
    derive_seed, localization_error, marker_demo, mc_observable, mc_straight_prob, run_trial, sweep, threads_from_env,
    verify_lemmas, TrialConfig,
};
use scenery_lab::localization::Decision;
use scenery_lab::walks::{gen_scenery, gen_walk, observe};

#[derive(Parser)]
#[command(name = "scenery-lab", version, about = "Two-color scenery reconstruction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write JSON lines here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a scenery, a walk and the color record for one seed.
    Simulate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = parse_window, default_value = "-100,100")]
        window: (i64, i64),
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo experiments.
    Montecarlo {
        #[command(subcommand)]
        which: MonteCarlo,
    },
    /// One end-to-end trial from a JSON config.
    Trial {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Trials over a range of indices, then a summary record.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        start: u64,
        /// Defaults to the config's trial count.
        #[arg(long)]
        count: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Read the word between the closest 2 and 3 of a four-color record.
    DemoMarkers {
        #[arg(long, default_value = "02010113031111020113")]
        chi: String,
    },
    /// Check crossing decomposition, straightness and first crossings on simulated pairs.
    VerifyLemmas {
        #[arg(long, default_value_t = 1000)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        steps: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    H0,
    H1,
}

impl From<Mode> for Decision {
    fn from(m: Mode) -> Decision {
        match m {
            Mode::H0 => Decision::H0,
            Mode::H1 => Decision::H1,
        }
    }
}

#[derive(Subcommand)]
enum MonteCarlo {
    /// Straight crossings of a length-3 interval.
    E5 {
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exit 2 unless the fraction lies in [0.74, 0.76].
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        output: Output,
    },
    /// The test statistic with oracle-fixed crossing indices.
    Lemma8 {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, value_enum, default_value = "h0")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000_000)]
        horizon: u64,
        /// Only the summary record.
        #[arg(long)]
        summary_only: bool,
        /// Exit 2 unless mean/n is within 0.01 of p and the p-value exceeds 0.001.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Misclassification rates of the localization test on labeled pairs.
    Localization {
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        pairs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exit 2 unless both rates are below 0.05.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        output: Output,
    },
    /// The statistic on observably selected crossings, split by oracle label.
    Observable {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 200_000)]
        steps: usize,
        #[arg(long, default_value_t = 50)]
        max_j: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let hi = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((lo, hi))
}

enum Failure {
    Usage(String),
    Threshold(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

struct Sink(Box<dyn Write>);

impl Sink {
    fn open(o: &Output) -> io::Result<Sink> {
        Ok(Sink(match &o.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        }))
    }

    fn line<T: Serialize>(&mut self, v: &T) -> io::Result<()> {
        serde_json::to_writer(&mut self.0, v)?;
        self.0.write_all(b"\n")
    }

    fn finish(mut self) -> io::Result<()> {
        self.0.flush()
    }
}

fn load_config(path: &PathBuf) -> Result<TrialConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(TrialConfig::from_json(&text)?)
}

fn threshold(ok: bool, what: &str) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::Threshold(what.to_string()))
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Simulate { seed, window, steps, output } => {
            let xi = gen_scenery(derive_seed(seed, "scenery", 0), window.0, window.1)?;
            let s = gen_walk(derive_seed(seed, "walk", 0), steps);
            let chi = observe(&xi, &s)?;
            let mut out = Sink::open(&output)?;
            out.line(&json!({ "seed": seed, "scenery": xi, "walk": s, "chi": chi.bits }))?;
            out.finish()?;
        }
        Command::Montecarlo { which } => run_montecarlo(which)?,
        Command::Trial { config, index, output } => {
            let cfg = load_config(&config)?;
            let rep = run_trial(&cfg, index);
            let mut out = Sink::open(&Output { out: output.out.or(cfg.out.map(PathBuf::from)) })?;
            out.line(&rep)?;
            out.finish()?;
        }
        Command::Sweep { config, start, count, output } => {
            let cfg = load_config(&config)?;
            let end = start + count.unwrap_or(cfg.trials);
            let reports = sweep(&cfg, start..end);
            let mut out = Sink::open(&Output { out: output.out.or(cfg.out.clone().map(PathBuf::from)) })?;
            for r in &reports {
                out.line(r)?;
            }
            out.line(&json!({ "summary": summarize(&reports) }))?;
            out.finish()?;
        }
        Command::DemoMarkers { chi } => {
            let chi4 = chi
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(|| Failure::Usage(format!("bad marker symbol {c:?}"))))
                .collect::<Result<Vec<u8>, _>>()?;
            let word = marker_demo(&chi4)?;
            let mut out = Sink::open(&Output { out: None })?;
            out.line(&json!({ "chi4": chi4, "word": word }))?;
            out.finish()?;
        }
        Command::VerifyLemmas { seeds, seed, steps, output } => {
            let rep = verify_lemmas(seed, seeds, steps)?;
            let mut out = Sink::open(&output)?;
            out.line(&rep)?;
            out.finish()?;
            threshold(rep.passed(), &format!("lemma violations: {:?}", rep.first_violation))?;
        }
    }
    Ok(())
}

fn run_montecarlo(which: MonteCarlo) -> Result<(), Failure> {
    match which {
        MonteCarlo::E5 { n, seed, check, output } => {
            let est = mc_straight_prob(seed, n)?;
            let mut out = Sink::open(&output)?;
            out.line(&est)?;
            out.finish()?;
            if check {
                threshold((0.74..=0.76).contains(&est.fraction), &format!("straight fraction {}", est.fraction))?;
            }
        }
        MonteCarlo::Lemma8 { n, trials, mode, seed, horizon, summary_only, check, output } => {
            if n == 0 || trials == 0 {
                return Err(Failure::Usage("n and trials must be at least 1".into()));
            }
            let h = Decision::from(mode);
            let results = lemma8_trials(seed, n, trials, h, horizon);
            let mut out = Sink::open(&output)?;
            if !summary_only {
                for r in &results {
                    out.line(r)?;
                }
            }
            let summary = summarize_lemma8(n, h, &results);
            match &summary {
                Ok(s) => out.line(s)?,
                Err(e) => out.line(&json!({ "n": n, "hypothesis": h, "error": e.to_string() }))?,
            }
            out.finish()?;
            let s = summary?;
            if check {
                let ok = (s.mean_over_n - s.p).abs() <= 0.01 && s.p_value > 0.001;
                threshold(ok, &format!("mean/n {} (p = {}), p-value {}", s.mean_over_n, s.p, s.p_value))?;
            }
        }
        MonteCarlo::Localization { n, pairs, seed, check, output } => {
            let e = localization_error(seed, n, pairs)?;
            let mut out = Sink::open(&output)?;
            out.line(&e)?;
            out.finish()?;
            if check {
                threshold(e.h0_rate < 0.05 && e.h1_rate < 0.05, &format!("error rates {} / {}", e.h0_rate, e.h1_rate))?;
            }
        }
        MonteCarlo::Observable { n, trials, steps, max_j, seed, output } => {
            let o = mc_observable(seed, n, trials, steps, max_j)?;
            let mut out = Sink::open(&output)?;
            out.line(&o)?;
            out.finish()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads_from_env()).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Threshold(m)) => {
            eprintln!("threshold not met: {m}");
            ExitCode::from(2)
        }
    }
}
