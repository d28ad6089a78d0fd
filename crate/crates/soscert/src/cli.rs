//! Command line entry points.
//!
//! Exit codes: 0 success (or proved), 1 not proved / certificate rejected,
//! 2 usage or input error, 3 timeout.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use soscert_core::conjecture::ConjectureCandidate;
use soscert_core::datagen::{corpus_draw, split_seed, CorpusConfig, GenConfig, Method};
use soscert_core::lean::emit_lean;
use soscert_core::reward::total_reward;
use soscert_core::verify::check_certificate;

use crate::config::{Config, SourceKind};
use crate::io::{self, CorpusEntry};
use crate::pipeline::{self, make_source, solve, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_PROVED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "soscert", version, about = "Exact sum-of-squares certificates for polynomial nonnegativity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Overrides {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Candidates attempted per problem.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Seconds per problem.
    #[arg(long, global = true)]
    timeout: Option<f64>,
    #[arg(long, global = true, value_enum)]
    source: Option<SourceKind>,
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    /// Directory of `<id>.sos` replay files.
    #[arg(long, global = true)]
    replay_dir: Option<PathBuf>,
}

impl Overrides {
    fn config(&self) -> Result<Config, String> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p).map_err(|e| e.to_string())?,
            None => Config::default(),
        };
        let p = &mut cfg.pipeline;
        if let Some(v) = self.seed {
            p.seed = v;
        }
        if let Some(v) = self.budget {
            p.budget = v;
        }
        if let Some(v) = self.timeout {
            p.timeout_s = v;
        }
        if let Some(v) = self.source {
            p.source = v;
        }
        if let Some(v) = self.parallelism {
            p.parallelism = v;
        }
        if let Some(v) = &self.replay_dir {
            p.replay_dir = Some(v.clone());
        }
        if let Some(v) = self.precision_bits {
            cfg.refine.precision_bits = v;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Prove one problem file.
    Solve {
        problem: PathBuf,
        /// Replay file for `--source replay`.
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Directory for the certificate and Lean script.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run every problem in a directory and write a report.
    Bench {
        problems: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Generate a corpus of problems with known decompositions.
    Gen {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        count: u64,
        /// Comma-separated: shift, factored, opt_shift, dd, sdd.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 1)]
        min_nvars: usize,
        #[arg(long, default_value_t = 3)]
        max_nvars: usize,
        #[arg(long, default_value_t = 1)]
        min_half_degree: u32,
        #[arg(long, default_value_t = 2)]
        max_half_degree: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score a model response (or bare SOS expression) against a problem.
    Score {
        problem: PathBuf,
        response: PathBuf,
        /// Treat the file as a bare expression without a delimiter.
        #[arg(long)]
        expression: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Emit the Lean script for a verified certificate.
    EmitLean {
        problem: PathBuf,
        certificate: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check a certificate exactly.
    CheckCert { problem: PathBuf, certificate: PathBuf },
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, String> {
    match cmd {
        Command::Solve { problem, replay, out, overrides } => {
            let mut cfg = overrides.config()?;
            let p = io::read_problem(&problem).map_err(|e| e.to_string())?;
            let src = match replay {
                Some(path) => {
                    cfg.pipeline.source = SourceKind::Replay;
                    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                    Box::new(soscert_core::conjecture::ReplaySource::from_text(&text))
                }
                None => make_source(&cfg, &p, Some(&problem))?,
            };
            let r = solve(&p, src.as_ref(), &cfg, out.as_deref());
            println!("{}", pipeline::REPORT_HEADER);
            println!("{}", pipeline::report_row(&r));
            for f in &r.failures {
                log::info!("{}: {f}", r.id);
            }
            if out.is_none() && r.outcome == Outcome::Proved {
                if let Some(script) = &r.lean_script {
                    print!("{script}");
                }
            }
            Ok(r.outcome.exit_code())
        }
        Command::Bench { problems, out, overrides } => {
            let cfg = overrides.config()?;
            let summary = pipeline::bench(&problems, &cfg, &out).map_err(|e| e.to_string())?;
            print!("{}", summary.summary_text());
            Ok(EXIT_OK)
        }
        Command::Gen { out, count, methods, min_nvars, max_nvars, min_half_degree, max_half_degree, seed } => {
            if min_nvars == 0 || min_nvars > max_nvars || min_half_degree == 0 || min_half_degree > max_half_degree {
                return Err("empty nvars or half-degree range".into());
            }
            let cfg = CorpusConfig {
                base: GenConfig { seed, ..GenConfig::default() },
                methods: if methods.is_empty() { Method::ALL.to_vec() } else { methods },
                nvars: min_nvars..=max_nvars,
                half_degree: min_half_degree..=max_half_degree,
                ..CorpusConfig::default()
            };
            let mut entries = Vec::new();
            for index in 0..count {
                match corpus_draw(&cfg, index) {
                    Ok(pair) => entries.push(CorpusEntry { index, seed: split_seed(seed, index), pair }),
                    Err(e) => log::warn!("draw {index} skipped: {e}"),
                }
            }
            io::write_corpus(&out, &entries).map_err(|e| e.to_string())?;
            println!("wrote {} problems to {}", entries.len(), out.display());
            Ok(EXIT_OK)
        }
        Command::Score { problem, response, expression, overrides } => {
            let cfg = overrides.config()?;
            let p = io::read_problem(&problem).map_err(|e| e.to_string())?;
            let text = std::fs::read_to_string(&response).map_err(|e| format!("{}: {e}", response.display()))?;
            let cand = if expression {
                ConjectureCandidate::from_expression(&p.f, text.trim(), "file")
            } else {
                ConjectureCandidate::from_response(&p.f, &text, "file")
            };
            let b = total_reward(&p.f, &cand, &cfg.reward_config());
            let v = json!({
                "r_acc": b.r_acc,
                "r_fmt": b.r_fmt,
                "sdr": b.sdr,
                "p_soft": b.p_soft,
                "p_hard": b.p_hard,
                "total": b.total,
                "theta": if cand.theta.is_finite() { json!(cand.theta) } else { json!(null) },
                "format_error": cand.format_error.as_ref().map(|e| e.code()),
            });
            println!("{}", serde_json::to_string_pretty(&v).expect("plain JSON values"));
            Ok(EXIT_OK)
        }
        Command::EmitLean { problem, certificate, output, overrides } => {
            let cfg = overrides.config()?;
            let (p, cert) = read_pair(&problem, &certificate)?;
            let script = emit_lean(&p.f, &cert, &cfg.lean_config()).map_err(|e| e.to_string())?;
            match output {
                Some(path) => io::write_file(&path, &script).map_err(|e| e.to_string())?,
                None => print!("{script}"),
            }
            Ok(EXIT_OK)
        }
        Command::CheckCert { problem, certificate } => {
            let (p, cert) = read_pair(&problem, &certificate)?;
            let v = check_certificate(&p.f, &cert);
            if v.ok {
                println!("ok: {} squares", cert.len());
                Ok(EXIT_OK)
            } else {
                if v.nvars_mismatch {
                    println!("rejected: variable count mismatch");
                } else if !v.weight_violations.is_empty() {
                    println!("rejected: negative weights at {:?}", v.weight_violations);
                } else {
                    println!("rejected: residual {}", v.identity_residual);
                }
                Ok(EXIT_NOT_PROVED)
            }
        }
    }
}

fn read_pair(problem: &Path, cert: &Path) -> Result<(io::Problem, soscert_core::verify::SosCertificate), String> {
    let p = io::read_problem(problem).map_err(|e| e.to_string())?;
    let c = io::read_certificate(cert).map_err(|e| e.to_string())?;
    Ok((p, c))
}
