//! Conjecture, correction and verification of problems, one at a time or as
//! a benchmark over a directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use soscert_core::conjecture::{rank, ConjectureRequest, ConjectureSource, ReplaySource};
use soscert_core::datagen::split_seed;
use soscert_core::lean::emit_lean;
use soscert_core::prove::{attempt_candidate, AttemptError};
use soscert_core::recover::RecoveryPath;
use soscert_core::verify::{check_certificate, SosCertificate};

use crate::config::{Config, SourceKind};
use crate::http::HttpSource;
use crate::io::{self, FileError, Problem};
use crate::lean_check::{lean_check, LeanStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Proved,
    RecoveryFailed,
    NoCandidate,
    Timeout,
}

impl Outcome {
    pub fn tag(self) -> &'static str {
        match self {
            Outcome::Proved => "proved",
            Outcome::RecoveryFailed => "recovery_failed",
            Outcome::NoCandidate => "no_candidate",
            Outcome::Timeout => "timeout",
        }
    }

    /// Process exit code for `solve`.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Proved => 0,
            Outcome::RecoveryFailed | Outcome::NoCandidate => 1,
            Outcome::Timeout => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimes {
    pub conjecture_s: f64,
    pub correction_s: f64,
    pub verify_s: f64,
    pub total_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineReport {
    pub id: String,
    pub nvars: usize,
    pub degree: u32,
    pub outcome: Outcome,
    pub proposed: usize,
    pub attempted: usize,
    /// Backward error of the winning candidate as proposed.
    pub theta_candidate: Option<f64>,
    pub theta_refined: Option<f64>,
    pub path: Option<RecoveryPath>,
    /// Relative to the output directory when one was given.
    pub certificate_path: Option<PathBuf>,
    pub certificate: Option<SosCertificate>,
    pub lean_script: Option<String>,
    pub lean_status: Option<LeanStatus>,
    /// One line per failed stage, in attempt order.
    pub failures: Vec<String>,
    pub times: StageTimes,
}

impl PipelineReport {
    fn new(problem: &Problem) -> Self {
        PipelineReport {
            id: problem.id.clone(),
            nvars: problem.nvars(),
            degree: problem.f.total_degree(),
            outcome: Outcome::NoCandidate,
            proposed: 0,
            attempted: 0,
            theta_candidate: None,
            theta_refined: None,
            path: None,
            certificate_path: None,
            certificate: None,
            lean_script: None,
            lean_status: None,
            failures: Vec::new(),
            times: StageTimes::default(),
        }
    }
}

/// Stable per-problem seed.
pub fn problem_seed(seed: u64, id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    split_seed(seed, h)
}

/// Where replay expressions for `id` are looked up.
pub fn replay_path(cfg: &Config, problem_file: Option<&Path>, id: &str) -> Option<PathBuf> {
    let name = format!("{id}.sos");
    if let Some(dir) = &cfg.pipeline.replay_dir {
        return Some(dir.join(name));
    }
    let parent = problem_file?.parent()?;
    let sibling = parent.join(&name);
    if sibling.is_file() {
        return Some(sibling);
    }
    Some(parent.parent().unwrap_or(parent).join("replay").join(name))
}

/// Builds the configured source for one problem.
pub fn make_source(
    cfg: &Config,
    problem: &Problem,
    problem_file: Option<&Path>,
) -> Result<Box<dyn ConjectureSource + Send + Sync>, String> {
    match cfg.pipeline.source {
        SourceKind::Baseline => Ok(Box::new(cfg.baseline(problem_seed(cfg.pipeline.seed, &problem.id)))),
        SourceKind::Http => Ok(Box::new(HttpSource::new(cfg.http.clone(), cfg.pipeline.per_call))),
        SourceKind::Replay => {
            let path = replay_path(cfg, problem_file, &problem.id).ok_or("no replay file location")?;
            match std::fs::read_to_string(&path) {
                Ok(text) => Ok(Box::new(ReplaySource::from_text(&text))),
                Err(e) => Err(format!("{}: {e}", path.display())),
            }
        }
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Runs the full pipeline on one problem. Certificates and scripts are
/// written under `out_dir` and re-verified from disk before `proved` is
/// reported.
pub fn solve(problem: &Problem, source: &dyn ConjectureSource, cfg: &Config, out_dir: Option<&Path>) -> PipelineReport {
    let start = Instant::now();
    let end = start + Duration::from_secs_f64(cfg.pipeline.timeout_s);
    let expired = move || Instant::now() >= end;
    let mut report = PipelineReport::new(problem);
    let f = &problem.f;

    if f.is_zero() || f.total_degree() % 2 == 1 {
        report.failures.push("precondition: target must be nonzero with even degree".into());
        report.times.total_s = secs(start.elapsed());
        return report;
    }

    let prove_cfg = cfg.prove_config();
    let lean_cfg = cfg.lean_config();
    let budget = cfg.pipeline.budget;
    let mut any_well_formed = false;
    let mut timed_out = false;

    // Later rounds ask the source for fresh candidates until the budget is spent.
    let mut round = 0u32;
    'rounds: while report.attempted < budget && report.outcome != Outcome::Proved {
        if expired() {
            timed_out = true;
            break;
        }
        let req =
            ConjectureRequest { f: f.clone(), budget_k: budget - report.attempted, timeout_s: cfg.pipeline.timeout_s, round };
        let t = Instant::now();
        let proposed = source.propose(&req, &expired);
        report.times.conjecture_s += secs(t.elapsed());
        let candidates = match proposed {
            Ok(c) if !c.is_empty() => rank(c),
            Ok(_) => break,
            Err(e) => {
                report.failures.push(format!("conjecture: {e}"));
                break;
            }
        };
        report.proposed += candidates.len();
        round += 1;

        for cand in candidates.iter().take(budget - report.attempted) {
            if expired() {
                timed_out = true;
                break 'rounds;
            }
            if let Some(e) = &cand.format_error {
                report.failures.push(format!("candidate {}: format: {e}", report.attempted));
                report.attempted += 1;
                continue;
            }
            any_well_formed = true;
            let t0 = Instant::now();
            let attempt = attempt_candidate(f, cand, &prove_cfg, &expired);
            report.times.correction_s += secs(t0.elapsed());
            let index = report.attempted;
            report.attempted += 1;
            let attempt = match attempt {
                Ok(a) => a,
                Err(AttemptError::TimedOut) => {
                    timed_out = true;
                    report.failures.push(format!("candidate {index}: deadline reached"));
                    break 'rounds;
                }
                Err(e) => {
                    report.failures.push(format!("candidate {index}: {e}"));
                    continue;
                }
            };

            let t1 = Instant::now();
            let verified = finish(problem, &attempt.certificate, cfg, &lean_cfg, out_dir, &mut report);
            report.times.verify_s += secs(t1.elapsed());
            if let Err(msg) = verified {
                report.failures.push(format!("candidate {index}: {msg}"));
                continue;
            }
            report.outcome = Outcome::Proved;
            report.theta_candidate = Some(cand.theta);
            report.theta_refined = Some(attempt.theta_refined);
            report.path = Some(attempt.path);
            break 'rounds;
        }
    }

    if report.outcome != Outcome::Proved {
        report.outcome = if timed_out || expired() {
            Outcome::Timeout
        } else if any_well_formed {
            Outcome::RecoveryFailed
        } else {
            Outcome::NoCandidate
        };
    }
    report.times.total_s = secs(start.elapsed());
    report
}

/// Writes, re-reads and re-verifies the certificate, then emits and checks
/// the Lean script.
fn finish(
    problem: &Problem,
    cert: &SosCertificate,
    cfg: &Config,
    lean_cfg: &soscert_core::lean::LeanEmitConfig,
    out_dir: Option<&Path>,
    report: &mut PipelineReport,
) -> Result<(), String> {
    let f = &problem.f;
    let on_disk = match out_dir {
        Some(dir) => {
            let rel = PathBuf::from("certs").join(format!("{}.cert", problem.id));
            io::write_certificate(&dir.join(&rel), cert).map_err(|e| e.to_string())?;
            let back = io::read_certificate(&dir.join(&rel)).map_err(|e| e.to_string())?;
            report.certificate_path = Some(rel);
            back
        }
        None => cert.clone(),
    };
    if !check_certificate(f, &on_disk).ok {
        return Err("certificate failed re-verification".into());
    }
    let script = emit_lean(f, &on_disk, lean_cfg).map_err(|e| format!("lean emission: {e}"))?;
    if let Some(dir) = out_dir {
        io::write_file(&dir.join("lean").join(format!("{}.lean", problem.id)), &script).map_err(|e| e.to_string())?;
    }
    let status = lean_check(
        &script,
        cfg.lean.check_command.as_deref(),
        Duration::from_secs_f64(cfg.lean.check_timeout_s.max(0.001)),
    );
    let ok = status.acceptable();
    report.lean_status = Some(status);
    report.lean_script = Some(script);
    report.certificate = Some(on_disk);
    if ok {
        Ok(())
    } else {
        Err("lean check rejected the script".into())
    }
}

fn opt_theta(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |t| format!("{t:.6e}"))
}

pub const REPORT_HEADER: &str = "id\tnvars\tdegree\toutcome\tproposed\tattempted\ttheta_candidate\ttheta_refined\tpath\tcertificate\tlean";

/// One row of `report.tsv`; contains no timings so reruns are byte-identical.
pub fn report_row(r: &PipelineReport) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        r.id,
        r.nvars,
        r.degree,
        r.outcome.tag(),
        r.proposed,
        r.attempted,
        opt_theta(r.theta_candidate),
        opt_theta(r.theta_refined),
        r.path.map_or("-", path_tag),
        r.certificate_path.as_ref().map_or_else(|| "-".into(), |p| p.display().to_string()),
        r.lean_status.as_ref().map_or("-", LeanStatus::tag),
    )
}

pub fn path_tag(p: RecoveryPath) -> &'static str {
    match p {
        RecoveryPath::Interior => "interior",
        RecoveryPath::Boundary => "boundary",
        RecoveryPath::BoundaryFace => "boundary_face",
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroupSummary {
    pub problems: usize,
    pub proved: usize,
    /// Mean total time over proved problems.
    pub mean_time_s: Option<f64>,
}

impl GroupSummary {
    pub fn pass_rate(&self) -> f64 {
        if self.problems == 0 {
            0.0
        } else {
            self.proved as f64 / self.problems as f64
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchSummary {
    pub reports: Vec<PipelineReport>,
    pub by_nvars: BTreeMap<usize, GroupSummary>,
    pub overall: GroupSummary,
    pub skipped: Vec<String>,
}

fn summarize<'a>(reports: impl Iterator<Item = &'a PipelineReport>) -> GroupSummary {
    let mut s = GroupSummary::default();
    let mut time = 0.0;
    for r in reports {
        s.problems += 1;
        if r.outcome == Outcome::Proved {
            s.proved += 1;
            time += r.times.total_s;
        }
    }
    s.mean_time_s = (s.proved > 0).then(|| time / s.proved as f64);
    s
}

impl BenchSummary {
    pub fn report_tsv(&self) -> String {
        let mut s = String::from(REPORT_HEADER);
        s.push('\n');
        for r in &self.reports {
            s.push_str(&report_row(r));
            s.push('\n');
        }
        s
    }

    pub fn timings_tsv(&self) -> String {
        let mut s = String::from("id\tconjecture_s\tcorrection_s\tverify_s\ttotal_s\n");
        for r in &self.reports {
            let t = r.times;
            let _ = writeln!(
                s,
                "{}\t{:.3}\t{:.3}\t{:.3}\t{:.3}",
                r.id, t.conjecture_s, t.correction_s, t.verify_s, t.total_s
            );
        }
        s
    }

    /// Pass rate and mean solved time per variable count.
    pub fn summary_text(&self) -> String {
        let mut s = String::from("nvars\tproblems\tproved\tpass\tt(s)\n");
        let row = |s: &mut String, label: &str, g: &GroupSummary| {
            let t = g.mean_time_s.map_or_else(|| "-".into(), |t| format!("{t:.2}"));
            let _ = writeln!(s, "{label}\t{}\t{}\t{:.1}%\t{t}", g.problems, g.proved, 100.0 * g.pass_rate());
        };
        for (n, g) in &self.by_nvars {
            row(&mut s, &n.to_string(), g);
        }
        row(&mut s, "all", &self.overall);
        s
    }
}

/// Solves every problem in `problem_dir` and writes `report.tsv`,
/// `timings.tsv` and `summary.txt` under `out_dir`.
pub fn bench(problem_dir: &Path, cfg: &Config, out_dir: &Path) -> Result<BenchSummary, FileError> {
    let files = io::list_problems(problem_dir)?;
    let mut skipped = Vec::new();
    let mut problems = Vec::new();
    for path in files {
        match io::read_problem(&path) {
            Ok(p) => problems.push((p, path)),
            Err(e) => {
                log::warn!("skipping {e}");
                skipped.push(e.to_string());
            }
        }
    }
    let run = |(problem, path): &(Problem, PathBuf)| match make_source(cfg, problem, Some(path)) {
        Ok(src) => solve(problem, src.as_ref(), cfg, Some(out_dir)),
        Err(msg) => {
            let mut r = PipelineReport::new(problem);
            r.failures.push(format!("source: {msg}"));
            r
        }
    };
    let mut reports: Vec<PipelineReport> = if cfg.pipeline.parallelism == 1 {
        problems.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.pipeline.parallelism)
            .build()
            .map_err(|e| FileError::Format { path: out_dir.into(), message: e.to_string() })?;
        pool.install(|| problems.par_iter().map(run).collect())
    };
    reports.sort_by(|a, b| a.id.cmp(&b.id));

    let mut groups: BTreeMap<usize, Vec<&PipelineReport>> = BTreeMap::new();
    for r in &reports {
        groups.entry(r.nvars).or_default().push(r);
    }
    let by_nvars = groups.into_iter().map(|(n, rs)| (n, summarize(rs.into_iter()))).collect();
    let overall = summarize(reports.iter());
    let summary = BenchSummary { reports, by_nvars, overall, skipped };
    io::write_file(&out_dir.join("report.tsv"), &summary.report_tsv())?;
    io::write_file(&out_dir.join("timings.tsv"), &summary.timings_tsv())?;
    io::write_file(&out_dir.join("summary.txt"), &summary.summary_text())?;
    Ok(summary)
}

/// Re-reads every certificate claimed in `report.tsv` and checks it against
/// its problem. Returns the ids that fail.
pub fn audit(problem_dir: &Path, out_dir: &Path) -> Result<Vec<String>, FileError> {
    let report_path = out_dir.join("report.tsv");
    let text = std::fs::read_to_string(&report_path).map_err(|source| FileError::Io { path: report_path.clone(), source })?;
    let nested = problem_dir.join("problems");
    let root = if nested.is_dir() { nested } else { problem_dir.to_path_buf() };
    let mut bad = Vec::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 10 || cols[3] != Outcome::Proved.tag() {
            continue;
        }
        let ok = (|| {
            let p = io::read_problem(&root.join(format!("{}.poly", cols[0]))).ok()?;
            let c = io::read_certificate(&out_dir.join(cols[9])).ok()?;
            Some(check_certificate(&p.f, &c).ok)
        })();
        if ok != Some(true) {
            bad.push(cols[0].to_string());
        }
    }
    Ok(bad)
}
