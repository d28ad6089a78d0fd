//! Problem, certificate and corpus files.
//!
//! A problem file holds one polynomial in `x1..xn`, optionally preceded by an
//! `nvars = n` line; `#` starts a comment line:
//!
//! ```text
//! # worked example
//! nvars = 2
//! 2*x1^4 + 2*x1^3*x2 - x1^2*x2^2 + 5*x2^4
//! ```
//!
//! A corpus directory contains `problems/NNNN.poly`, `certs/NNNN.cert`,
//! `replay/NNNN.sos` and a `manifest.tsv` index.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use soscert_core::conjecture::format_sos_expression;
use soscert_core::datagen::TrainingPair;
use soscert_core::poly::{parse_polynomial, ParseError, Polynomial};
use soscert_core::verify::{decode_certificate, encode_certificate, CertFormatError, SosCertificate};

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Polynomial { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Certificate { path: PathBuf, source: CertFormatError },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FileError + '_ {
    move |source| FileError::Io { path: path.into(), source }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub id: String,
    pub f: Polynomial,
}

impl Problem {
    pub fn nvars(&self) -> usize {
        self.f.nvars()
    }
}

/// Highest `xK` index mentioned in `text`, at least 1.
pub fn infer_nvars(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut best = 1;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'x' && (i == 0 || !bytes[i - 1].is_ascii_alphanumeric()) {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > start {
                if let Ok(k) = text[start..j].parse::<usize>() {
                    best = best.max(k);
                }
            }
            i = j.max(i + 1);
        } else {
            i += 1;
        }
    }
    best
}

/// Parses problem text; `id` labels reports.
pub fn parse_problem(text: &str, id: &str, path: &Path) -> Result<Problem, FileError> {
    let mut nvars = None;
    let mut body = String::new();
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if let Some(rest) = t.strip_prefix("nvars") {
            let value = rest.trim_start().trim_start_matches(['=', ':']).trim();
            let n = value
                .parse::<usize>()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| FileError::Format { path: path.into(), message: format!("bad nvars line `{t}`") })?;
            nvars = Some(n);
            continue;
        }
        body.push_str(t);
        body.push(' ');
    }
    if body.trim().is_empty() {
        return Err(FileError::Format { path: path.into(), message: "no polynomial".into() });
    }
    let n = nvars.unwrap_or_else(|| infer_nvars(&body));
    let f = parse_polynomial(body.trim(), n).map_err(|source| FileError::Polynomial { path: path.into(), source })?;
    Ok(Problem { id: id.into(), f })
}

pub fn read_problem(path: &Path) -> Result<Problem, FileError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_problem(&text, &id, path)
}

pub fn problem_text(f: &Polynomial) -> String {
    format!("nvars = {}\n{}\n", f.nvars(), f)
}

pub fn write_problem(path: &Path, f: &Polynomial) -> Result<(), FileError> {
    write_file(path, &problem_text(f))
}

pub fn read_certificate(path: &Path) -> Result<SosCertificate, FileError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    decode_certificate(&text).map_err(|source| FileError::Certificate { path: path.into(), source })
}

pub fn write_certificate(path: &Path, cert: &SosCertificate) -> Result<(), FileError> {
    write_file(path, &encode_certificate(cert))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), FileError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

/// `*.poly` files in `dir` (or in `dir/problems` when present), sorted by name.
pub fn list_problems(dir: &Path) -> Result<Vec<PathBuf>, FileError> {
    let nested = dir.join("problems");
    let root = if nested.is_dir() { nested } else { dir.to_path_buf() };
    let mut out = Vec::new();
    for entry in fs::read_dir(&root).map_err(io_err(&root))? {
        let path = entry.map_err(io_err(&root))?.path();
        if path.extension().is_some_and(|e| e == "poly") && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// One generated corpus entry.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub index: u64,
    pub seed: u64,
    pub pair: TrainingPair,
}

pub fn corpus_id(index: u64) -> String {
    format!("{index:04}")
}

/// Writes problems, decompositions, replay expressions and the manifest.
pub fn write_corpus(dir: &Path, entries: &[CorpusEntry]) -> Result<(), FileError> {
    let mut manifest = String::from("id\tmethod\tnvars\tdegree\tterms\tsquares\tseed\n");
    for e in entries {
        let id = corpus_id(e.index);
        let f = &e.pair.f;
        write_problem(&dir.join("problems").join(format!("{id}.poly")), f)?;
        write_certificate(&dir.join("certs").join(format!("{id}.cert")), &e.pair.decomposition)?;
        let sos = format_sos_expression(&e.pair.decomposition.squares);
        write_file(&dir.join("replay").join(format!("{id}.sos")), &format!("{sos}\n"))?;
        let _ = writeln!(
            manifest,
            "{id}\t{}\t{}\t{}\t{}\t{}\t{}",
            e.pair.method.tag(),
            f.nvars(),
            f.total_degree(),
            f.len(),
            e.pair.decomposition.len(),
            e.seed
        );
    }
    write_file(&dir.join("manifest.tsv"), &manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_text_round_trip() {
        let p = parse_problem("# c\nnvars = 3\n x1^2 +\n 2*x3^2\n", "a", Path::new("a.poly")).unwrap();
        assert_eq!(p.nvars(), 3);
        let again = parse_problem(&problem_text(&p.f), "a", Path::new("a.poly")).unwrap();
        assert_eq!(again, p);
        let q = parse_problem("x1^2 + x4^2", "b", Path::new("b.poly")).unwrap();
        assert_eq!(q.nvars(), 4);
        assert!(parse_problem("# nothing\n", "c", Path::new("c.poly")).is_err());
        assert!(parse_problem("nvars = 0\nx1", "d", Path::new("d.poly")).is_err());
    }

    #[test]
    fn inference() {
        assert_eq!(infer_nvars("3"), 1);
        assert_eq!(infer_nvars("x12*x2 + max"), 12);
    }
}
