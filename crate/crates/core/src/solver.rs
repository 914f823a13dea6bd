//! Dispatch of SMT-LIB2 scripts to external solver processes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::os::unix::process::CommandExt;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

pub const PLACEHOLDER: &str = "{file}";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {0}: expected `solver <name> <command>`")]
    Malformed(usize),
    #[error("line {0}: command has no {{file}} placeholder")]
    NoPlaceholder(usize),
    #[error("timeout must be positive")]
    ZeroTimeout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub name: String,
    pub command: String,
}

impl SolverConfig {
    pub fn new(name: &str, command: &str) -> SolverConfig {
        SolverConfig { name: name.into(), command: command.into() }
    }
}

pub fn default_solvers() -> Vec<SolverConfig> {
    vec![SolverConfig::new("z3", "z3 -smt2 {file}")]
}

/// Parses `solver <name> <command>` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<SolverConfig>, ConfigError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.splitn(3, char::is_whitespace);
        let (Some("solver"), Some(name), Some(cmd)) = (it.next(), it.next(), it.next()) else {
            return Err(ConfigError::Malformed(i + 1));
        };
        if !cmd.contains(PLACEHOLDER) {
            return Err(ConfigError::NoPlaceholder(i + 1));
        }
        out.push(SolverConfig::new(name, cmd.trim()));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Tried in order until one answers Valid.
    pub solvers: Vec<SolverConfig>,
    pub timeout: Duration,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { solvers: default_solvers(), timeout: Duration::from_secs(10), jobs: 1 }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.timeout.is_zero() {
            return Err(ConfigError::ZeroTimeout);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "detail")]
pub enum Status {
    Valid,
    Invalid,
    Unknown,
    Timeout,
    SolverError(String),
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Valid => "valid",
            Status::Invalid => "invalid",
            Status::Unknown => "unknown",
            Status::Timeout => "timeout",
            Status::SolverError(_) => "error",
        }
    }

    // Which failure to report when every solver fails.
    fn rank(&self) -> u8 {
        match self {
            Status::Valid => 4,
            Status::Invalid => 3,
            Status::Timeout => 2,
            Status::Unknown => 1,
            Status::SolverError(_) => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub vc: String,
    #[serde(flatten)]
    pub status: Status,
    pub seconds: f64,
    pub prover: String,
}

/// A VC ready for dispatch. `script: None` marks a VC the simplifier
/// already discharged.
#[derive(Debug, Clone)]
pub struct Job {
    pub name: String,
    pub script: Option<String>,
}

pub fn status_of_output(out: &str) -> Status {
    match out.lines().map(str::trim).find(|l| !l.is_empty()) {
        Some("unsat") => Status::Valid,
        Some("sat") => Status::Invalid,
        Some("unknown") | Some("timeout") => Status::Unknown,
        Some(other) => Status::SolverError(other.to_string()),
        None => Status::SolverError("no output".into()),
    }
}

fn kill_group(pid: u32) {
    unsafe {
        libc::kill(-(pid as libc::pid_t), libc::SIGKILL);
    }
}

/// Runs one solver on one script file.
pub fn run_one(solver: &SolverConfig, file: &std::path::Path, timeout: Duration) -> Status {
    let path = file.to_string_lossy();
    let mut words = solver.command.split_whitespace().map(|w| w.replace(PLACEHOLDER, &path));
    let Some(prog) = words.next() else {
        return Status::SolverError("empty command".into());
    };
    let child = Command::new(&prog)
        .args(words)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0)
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) => return Status::SolverError(format!("{prog}: {e}")),
    };
    let mut stdout = child.stdout.take().expect("piped");
    let mut stderr = child.stderr.take().expect("piped");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let ereader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let deadline = Instant::now() + timeout;
    let mut timed_out = false;
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if Instant::now() >= deadline => {
                kill_group(child.id());
                let _ = child.wait();
                timed_out = true;
                break;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => return Status::SolverError(e.to_string()),
        }
    }
    // Reap anything the solver left behind in its group.
    kill_group(child.id());
    let out = reader.join().unwrap_or_default();
    let err = ereader.join().unwrap_or_default();
    if timed_out {
        return Status::Timeout;
    }
    match status_of_output(&out) {
        Status::SolverError(msg) if out.trim().is_empty() && !err.trim().is_empty() => {
            Status::SolverError(err.lines().next().unwrap_or(&msg).to_string())
        }
        s => s,
    }
}

fn run_job(job: &Job, cfg: &RunConfig, dir: &std::path::Path, idx: usize) -> Verdict {
    let Some(script) = &job.script else {
        return Verdict { vc: job.name.clone(), status: Status::Valid, seconds: 0.0, prover: "simplifier".into() };
    };
    let start = Instant::now();
    let file = dir.join(format!("vc{idx}.smt2"));
    if let Err(e) = std::fs::write(&file, script) {
        return Verdict {
            vc: job.name.clone(),
            status: Status::SolverError(e.to_string()),
            seconds: 0.0,
            prover: String::new(),
        };
    }
    let mut best: Option<(Status, String)> = None;
    for s in &cfg.solvers {
        let st = run_one(s, &file, cfg.timeout);
        let better = best.as_ref().map_or(true, |(b, _)| st.rank() > b.rank());
        let done = st == Status::Valid;
        if better {
            best = Some((st, s.name.clone()));
        }
        if done {
            break;
        }
    }
    let (status, prover) = best.unwrap_or((Status::SolverError("no solver configured".into()), String::new()));
    Verdict { vc: job.name.clone(), status, seconds: start.elapsed().as_secs_f64(), prover }
}

/// Runs every job on a pool of `cfg.jobs` workers; results are sorted by
/// VC name.
pub fn run_all(jobs: &[Job], cfg: &RunConfig) -> std::io::Result<Vec<Verdict>> {
    let dir = tempfile::tempdir()?;
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|sc| {
        for _ in 0..cfg.jobs.max(1).min(jobs.len().max(1)) {
            sc.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                let v = run_job(job, cfg, dir.path(), i);
                results.lock().expect("poisoned").push(v);
            });
        }
    });
    let mut out = results.into_inner().expect("poisoned");
    out.sort_by(|a, b| a.vc.cmp(&b.vc));
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub by_status: BTreeMap<String, usize>,
    pub by_prover: BTreeMap<String, usize>,
}

pub fn summarize(vs: &[Verdict]) -> Summary {
    let mut s = Summary { total: vs.len(), ..Default::default() };
    for v in vs {
        *s.by_status.entry(v.status.label().into()).or_default() += 1;
        let p = if v.prover.is_empty() { "none" } else { &v.prover };
        *s.by_prover.entry(p.into()).or_default() += 1;
    }
    s
}

/// Verdict table plus summary; the exit status is 0 iff every VC is Valid,
/// 7 otherwise.
pub fn report(vs: &[Verdict], times: bool) -> (String, i32) {
    let mut out = String::new();
    let w = vs.iter().map(|v| v.vc.len()).max().unwrap_or(2).max(2);
    for v in vs {
        let _ = write!(out, "{:<w$}  {:<8}", v.vc, v.status.label());
        if times {
            let _ = write!(out, "  {:>7.3}s", v.seconds);
        }
        let _ = write!(out, "  {}", v.prover);
        if let Status::SolverError(e) = &v.status {
            let _ = write!(out, "  ({e})");
        }
        out = out.trim_end().to_string() + "\n";
    }
    let s = summarize(vs);
    let statuses: Vec<String> = s.by_status.iter().map(|(k, n)| format!("{n} {k}")).collect();
    let provers: Vec<String> = s.by_prover.iter().map(|(k, n)| format!("{k}: {n}")).collect();
    let _ = writeln!(out, "{} VCs: {}", s.total, statuses.join(", "));
    if !provers.is_empty() {
        let _ = writeln!(out, "by prover: {}", provers.join(", "));
    }
    for v in vs.iter().filter(|v| v.status != Status::Valid) {
        let _ = writeln!(out, "not proved: {} ({})", v.vc, v.status.label());
    }
    let ok = vs.iter().all(|v| v.status == Status::Valid);
    (out, if ok { 0 } else { 7 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str, status: Status, prover: &str) -> Verdict {
        Verdict { vc: name.into(), status, seconds: 0.0, prover: prover.into() }
    }

    #[test]
    fn config_lines() {
        let c = parse_config("# provers\nsolver z3 z3 -smt2 {file}\n\nsolver cvc5 cvc5 {file} # second\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].command, "cvc5 {file}");
        assert_eq!(parse_config("solver z3 z3 -smt2"), Err(ConfigError::NoPlaceholder(1)));
        assert_eq!(parse_config("prover z3 {file}"), Err(ConfigError::Malformed(1)));
    }

    #[test]
    fn output_mapping() {
        assert_eq!(status_of_output("unsat\n"), Status::Valid);
        assert_eq!(status_of_output("\nsat\n"), Status::Invalid);
        assert_eq!(status_of_output("unknown"), Status::Unknown);
        assert!(matches!(status_of_output("(error \"x\")"), Status::SolverError(_)));
    }

    #[test]
    fn empty_and_trivial() {
        let cfg = RunConfig::default();
        assert!(run_all(&[], &cfg).unwrap().is_empty());
        let r = run_all(&[Job { name: "t".into(), script: None }], &cfg).unwrap();
        assert_eq!(r[0].status, Status::Valid);
        assert_eq!(r[0].prover, "simplifier");
    }

    #[test]
    fn missing_executable_is_an_error() {
        let cfg = RunConfig {
            solvers: vec![SolverConfig::new("nope", "/nonexistent/solver {file}")],
            ..Default::default()
        };
        let jobs = vec![
            Job { name: "a".into(), script: Some("(check-sat)".into()) },
            Job { name: "b".into(), script: None },
        ];
        let r = run_all(&jobs, &cfg).unwrap();
        assert!(matches!(r[0].status, Status::SolverError(_)));
        assert_eq!(r[1].status, Status::Valid);
    }

    #[test]
    fn timeout_kills_the_group() {
        let cfg = RunConfig {
            solvers: vec![SolverConfig::new("sleepy", "sh -c sleep${IFS}30;echo${IFS}unsat {file}")],
            timeout: Duration::from_millis(200),
            jobs: 1,
        };
        let t = Instant::now();
        let r = run_all(&[Job { name: "a".into(), script: Some(String::new()) }], &cfg).unwrap();
        assert_eq!(r[0].status, Status::Timeout);
        assert!(t.elapsed() < Duration::from_secs(5));
    }

    #[test]
    fn report_counts() {
        let vs = vec![
            v("a", Status::Valid, "z3"),
            v("b", Status::Timeout, "z3"),
            v("c", Status::Valid, "simplifier"),
        ];
        let (text, code) = report(&vs, false);
        assert_eq!(code, 7);
        assert!(text.contains("not proved: b (timeout)"));
        let s = summarize(&vs);
        assert_eq!(s.by_prover.values().sum::<usize>(), s.total);
        assert_eq!(s.by_status.values().sum::<usize>(), s.total);
        assert_eq!(report(&vs[..1], false).1, 0);
    }
}
