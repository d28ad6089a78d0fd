//! Optional compilation of emitted scripts by an external Lean toolchain.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeanStatus {
    Pass,
    Fail { exit_code: Option<i32>, output: String },
    /// No toolchain configured or the command could not be started.
    Skipped(String),
    TimedOut,
}

impl LeanStatus {
    pub fn tag(&self) -> &'static str {
        match self {
            LeanStatus::Pass => "pass",
            LeanStatus::Fail { .. } => "fail",
            LeanStatus::Skipped(_) => "skipped",
            LeanStatus::TimedOut => "timeout",
        }
    }

    /// Anything other than an outright rejection.
    pub fn acceptable(&self) -> bool {
        matches!(self, LeanStatus::Pass | LeanStatus::Skipped(_))
    }
}

/// The first of `lake env lean`, `lean` that can be started, if any.
pub fn detect_toolchain() -> Option<Vec<String>> {
    let candidates: [&[&str]; 2] = [&["lake", "env", "lean"], &["lean"]];
    candidates.iter().find_map(|cmd| {
        let ok = Command::new(cmd[0])
            .arg("--version")
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .is_ok_and(|s| s.success());
        ok.then(|| cmd.iter().map(|s| s.to_string()).collect())
    })
}

/// Writes `script` to a scratch file and runs `command <file>`.
pub fn lean_check(script: &str, command: Option<&[String]>, timeout: Duration) -> LeanStatus {
    let Some((program, args)) = command.and_then(|c| c.split_first()) else {
        return LeanStatus::Skipped("no lean command configured".into());
    };
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return LeanStatus::Skipped(format!("scratch directory: {e}")),
    };
    let path = dir.path().join("Certificate.lean");
    if let Err(e) = std::fs::write(&path, script) {
        return LeanStatus::Skipped(format!("scratch file: {e}"));
    }
    run(program, args, &path, timeout)
}

fn run(program: &str, args: &[String], path: &Path, timeout: Duration) -> LeanStatus {
    let mut child = match Command::new(program).args(args).arg(path).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn()
    {
        Ok(c) => c,
        Err(e) => return LeanStatus::Skipped(format!("cannot start `{program}`: {e}")),
    };
    let mut stdout = child.stdout.take();
    let mut stderr = child.stderr.take();
    let drain = std::thread::spawn(move || {
        let mut out = String::new();
        if let Some(s) = stdout.as_mut() {
            let _ = s.read_to_string(&mut out);
        }
        if let Some(s) = stderr.as_mut() {
            let _ = s.read_to_string(&mut out);
        }
        out
    });
    let start = Instant::now();
    let status = loop {
        match child.try_wait() {
            Ok(Some(s)) => break s,
            Ok(None) if start.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return LeanStatus::TimedOut;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(20)),
            Err(e) => return LeanStatus::Skipped(format!("wait failed: {e}")),
        }
    };
    let output = drain.join().unwrap_or_default();
    if status.success() {
        LeanStatus::Pass
    } else {
        LeanStatus::Fail { exit_code: status.code(), output }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_command_skips() {
        assert!(matches!(lean_check("x", None, Duration::from_secs(1)), LeanStatus::Skipped(_)));
        let missing = vec!["definitely-not-a-lean-binary".to_string()];
        assert!(matches!(lean_check("x", Some(&missing), Duration::from_secs(1)), LeanStatus::Skipped(_)));
    }

    #[cfg(unix)]
    #[test]
    fn exit_status_is_interpreted() {
        let ok = vec!["true".to_string()];
        assert_eq!(lean_check("x", Some(&ok), Duration::from_secs(5)), LeanStatus::Pass);
        let grep = vec!["grep".to_string(), "-q".to_string(), "needle".to_string()];
        assert_eq!(lean_check("hay needle", Some(&grep), Duration::from_secs(5)), LeanStatus::Pass);
        assert!(matches!(lean_check("hay", Some(&grep), Duration::from_secs(5)), LeanStatus::Fail { .. }));
        let slow: Vec<String> = ["sh", "-c", "sleep 5"].iter().map(|s| s.to_string()).collect();
        assert_eq!(lean_check("", Some(&slow), Duration::from_millis(100)), LeanStatus::TimedOut);
    }
}
