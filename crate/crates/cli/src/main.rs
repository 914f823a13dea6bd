//! `michelson-vc`: parse, typecheck, run, and verify Michelson contracts.

use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use michelson_vc::contracts::contract_of;
use michelson_vc::interp::{run_contract, ExecConfig, ExecError, Outcome};
use michelson_vc::model::value_of_data;
use michelson_vc::solver::{self, parse_config, report, run_all, RunConfig};
use michelson_vc::syntax::{expand_contract, parse_data, parse_instrs, parse_source, pretty_print, Contract, Instr, Path};
use michelson_vc::typecheck::{derive_safety_spec, typecheck, TypedProgram};
use michelson_vc::vcgen::{
    generate_mono, parse_sidecar, smt_jobs, translate_faithful_with, FaithfulOptions, SidecarError, SpecSidecar, VcError,
};

const OK: u8 = 0;
const PARSE: u8 = 2;
const TYPE: u8 = 3;
const FAILED: u8 = 4;
const FUEL: u8 = 5;
const VIOLATION: u8 = 6;
const NOT_PROVED: u8 = 7;
const USAGE: u8 = 8;

#[derive(Parser)]
#[command(name = "michelson-vc", version, about = "Verification toolchain for Michelson contracts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Faithful,
    Mono,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a contract and print it in canonical form.
    Parse { file: PathBuf },
    /// Typecheck a contract and print its safety specification.
    Typecheck {
        file: PathBuf,
        /// Also print the stack type at every program point.
        #[arg(long)]
        stacks: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a contract on a parameter and storage.
    Run {
        file: PathBuf,
        #[arg(long)]
        parameter: String,
        #[arg(long)]
        storage: String,
        #[arg(long, default_value_t = 10_000)]
        fuel: u64,
        #[arg(long, default_value_t = 0)]
        amount: i64,
        #[arg(long, default_value_t = 0)]
        balance: i64,
        /// Check every executed opcode against its contract.
        #[arg(long)]
        check_contracts: bool,
    },
    /// Print opcode contracts. Each argument is an instruction, e.g. `ADD` or `DIG 2`.
    Contracts { instrs: Vec<String> },
    /// Generate verification conditions.
    Vcgen {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "mono")]
        mode: Mode,
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Output directory; faithful output goes to stdout without it.
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
        /// Faithful mode: declare the opcode contracts before the function.
        #[arg(long)]
        prelude: bool,
        /// Faithful mode: function name.
        #[arg(long, default_value = "test")]
        name: String,
    },
    /// Generate VCs and discharge them with external solvers.
    Prove {
        file: PathBuf,
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Solver configuration file (`solver <name> <command with {file}>` lines).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Restrict to these configured solvers, in this order.
        #[arg(long = "solver")]
        solvers: Vec<String>,
        #[arg(long, default_value_t = 10.0)]
        timeout: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Send trivial VCs to the solvers too.
        #[arg(long)]
        no_simplify: bool,
        #[arg(long)]
        no_times: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn diag(file: &FsPath, at: Option<(usize, usize)>, msg: impl std::fmt::Display) {
    let (line, col) = at.unwrap_or((1, 1));
    eprintln!("{}:{line}:{col}: error: {msg}", file.display());
}

fn read(file: &FsPath) -> Result<String, u8> {
    fs::read_to_string(file).map_err(|e| {
        eprintln!("{}: error: {e}", file.display());
        USAGE
    })
}

fn load(file: &FsPath) -> Result<(String, Contract), u8> {
    let src = read(file)?;
    match parse_source(&src) {
        Ok(c) => Ok((src, c)),
        Err(e) => {
            diag(file, e.span().map(|s| s.line_col(&src)), &e);
            Err(PARSE)
        }
    }
}

fn location(code: &Instr, src: &str, p: &Path) -> Option<(usize, usize)> {
    code.span_at(p).map(|s| s.line_col(src))
}

fn check(file: &FsPath, src: &str, c: &Contract) -> Result<TypedProgram, u8> {
    typecheck(c).map_err(|e| {
        let code = expand_contract(c).code;
        diag(file, e.path().and_then(|p| location(&code, src, p)), &e);
        TYPE
    })
}

fn load_typed(file: &FsPath) -> Result<(String, TypedProgram), u8> {
    let (src, c) = load(file)?;
    let tp = check(file, &src, &c)?;
    Ok((src, tp))
}

fn load_spec(spec: Option<&FsPath>, tp: &TypedProgram) -> Result<SpecSidecar, u8> {
    let Some(file) = spec else {
        return Ok(SpecSidecar::default());
    };
    let text = read(file)?;
    let report = |e: SidecarError| {
        let code = if e.is_syntax() { PARSE } else { TYPE };
        let msg = match &e {
            SidecarError::Syntax { message, .. } | SidecarError::Semantic { message, .. } => message.clone(),
        };
        diag(file, Some(e.line_col()), msg);
        code
    };
    let sc = parse_sidecar(&text).map_err(report)?;
    sc.check_paths(tp).map_err(report)?;
    Ok(sc)
}

fn cmd_typecheck(file: &FsPath, stacks: bool, format: Format) -> Result<u8, u8> {
    let (_, tp) = load_typed(file)?;
    let spec = derive_safety_spec(&tp);
    match format {
        Format::Text => {
            print!("{spec}");
            if stacks {
                for (p, pt) in &tp.at {
                    let after = pt.after.as_ref().map_or("failed".to_string(), |s| fmt_stack(s));
                    println!("{p}: {} -> {after}", fmt_stack(&pt.before));
                }
            }
        }
        Format::Json => {
            let mut doc = json!({
                "file": file.display().to_string(),
                "parameter": tp.contract.parameter.to_string(),
                "storage": tp.contract.storage.to_string(),
                "safety": {
                    "input_len": spec.input_len,
                    "input_type": spec.input_ty.to_string(),
                    "fuel_positive": spec.fuel_positive,
                    "output_len": spec.output_len,
                    "output_type": spec.output_ty.to_string(),
                },
            });
            if stacks {
                let pts: Vec<_> = tp
                    .at
                    .iter()
                    .map(|(p, pt)| {
                        json!({
                            "path": p.to_string(),
                            "before": pt.before.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                            "after": pt.after.as_ref().map(|s| s.iter().map(|t| t.to_string()).collect::<Vec<_>>()),
                        })
                    })
                    .collect();
                doc["stacks"] = json!(pts);
            }
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
    }
    Ok(OK)
}

fn fmt_stack(s: &[michelson_vc::Ty]) -> String {
    let parts: Vec<String> = s.iter().map(|t| t.to_string()).collect();
    format!("[{}]", parts.join(" : "))
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    file: &FsPath,
    parameter: &str,
    storage: &str,
    fuel: u64,
    amount: i64,
    balance: i64,
    check_contracts: bool,
) -> Result<u8, u8> {
    let (src, c) = load(file)?;
    check(file, &src, &c)?;
    let value = |what: &str, text: &str, ty| {
        let d = parse_data(text).map_err(|e| {
            eprintln!("{what}: error: {e}");
            USAGE
        })?;
        value_of_data(&d, ty).map_err(|e| {
            eprintln!("{what}: error: {e}");
            USAGE
        })
    };
    let p = value("--parameter", parameter, &c.parameter)?;
    let s = value("--storage", storage, &c.storage)?;
    let cfg = ExecConfig { fuel, amount, balance, check_contracts, ..ExecConfig::default() };
    match run_contract(&c, p, s, &cfg, None) {
        Ok(Outcome::Success(st)) => {
            println!("{}", st.at(0).expect("result slot"));
            Ok(OK)
        }
        Ok(Outcome::Failed(v)) => {
            eprintln!("{}: failed with {v}", file.display());
            Ok(FAILED)
        }
        Ok(Outcome::FuelExhausted) => {
            eprintln!("{}: fuel exhausted", file.display());
            Ok(FUEL)
        }
        Ok(Outcome::ContractViolation { path, opcode, clause }) => {
            let code = expand_contract(&c).code;
            diag(file, location(&code, &src, &path), format!("{opcode} at {path} violates {clause}"));
            Ok(VIOLATION)
        }
        Err(e @ ExecError::InputType { .. }) => {
            eprintln!("{}: error: {e}", file.display());
            Err(USAGE)
        }
        Err(e) => {
            eprintln!("{}: error: {e}", file.display());
            Err(TYPE)
        }
    }
}

const DEFAULT_OPCODES: &[&str] = &[
    "DROP", "DUP", "SWAP", "DIG 2", "DUG 2", "PUSH nat 1", "UNIT", "CAR", "CDR", "PAIR", "SOME", "NONE nat",
    "LEFT nat", "RIGHT nat", "NIL operation", "CONS", "SIZE", "MEM", "GET", "UPDATE", "CONCAT", "ADD", "SUB", "MUL",
    "EDIV", "ABS", "ISNAT", "INT", "NEG", "OR", "AND", "XOR", "NOT", "COMPARE", "EQ", "NEQ", "LT", "GT", "LE", "GE",
    "PACK", "UNPACK nat", "SHA256", "HASH_KEY", "CHECK_SIGNATURE", "TRANSFER_TOKENS", "SET_DELEGATE", "AMOUNT",
    "BALANCE", "NOW", "SENDER", "SOURCE", "CHAIN_ID", "FAILWITH",
];

fn cmd_contracts(instrs: &[String]) -> Result<u8, u8> {
    let list: Vec<String> = if instrs.is_empty() {
        DEFAULT_OPCODES.iter().map(|s| s.to_string()).collect()
    } else {
        instrs.to_vec()
    };
    for text in &list {
        let i = parse_instrs(text).map_err(|e| {
            eprintln!("{text}: error: {e}");
            USAGE
        })?;
        match contract_of(&i.node) {
            Ok(c) => println!("{c}"),
            Err(e) => {
                eprintln!("{text}: error: {}", e.0);
                return Err(USAGE);
            }
        }
    }
    Ok(OK)
}

fn vc_error(file: &FsPath, src: &str, tp: &TypedProgram, e: &VcError) -> u8 {
    let at = match e {
        VcError::MissingInvariant(p) | VcError::Unsupported { path: p, .. } => location(tp.code(), src, p),
        VcError::PathExplosion => None,
    };
    diag(file, at, e);
    TYPE
}

fn write(path: &FsPath, text: &str) -> Result<(), u8> {
    fs::write(path, text).map_err(|e| {
        eprintln!("{}: error: {e}", path.display());
        USAGE
    })
}

fn cmd_vcgen(
    file: &FsPath,
    mode: Mode,
    spec: Option<&FsPath>,
    out: Option<&FsPath>,
    prelude: bool,
    name: &str,
) -> Result<u8, u8> {
    let (src, tp) = load_typed(file)?;
    let sc = load_spec(spec, &tp)?;
    let stem = file.file_stem().map_or("contract".into(), |s| s.to_string_lossy().to_string());
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| {
            eprintln!("{}: error: {e}", dir.display());
            USAGE
        })?;
    }
    match mode {
        Mode::Faithful => {
            let opts = FaithfulOptions { name: name.into(), prelude, ..FaithfulOptions::default() };
            let text = translate_faithful_with(&tp, &sc, &opts);
            match out {
                Some(dir) => write(&dir.join(format!("{stem}.mlw")), &text)?,
                None => print!("{text}"),
            }
        }
        Mode::Mono => {
            let mono = generate_mono(&tp, &sc).map_err(|e| vc_error(file, &src, &tp, &e))?;
            let jobs = smt_jobs(&mono.vcs, &sc.logic, false).map_err(|e| {
                diag(file, None, &e);
                TYPE
            })?;
            let Some(dir) = out else {
                for vc in &mono.vcs {
                    println!("{}", vc.name);
                }
                return Ok(OK);
            };
            let mut index = Vec::new();
            for (k, (vc, job)) in mono.vcs.iter().zip(&jobs).enumerate() {
                let fname = format!("vc{k:04}.smt2");
                write(&dir.join(&fname), job.script.as_deref().unwrap_or_default())?;
                index.push(json!({
                    "name": vc.name,
                    "file": fname,
                    "path": vc.path.as_ref().map(|p| p.to_string()),
                    "trivial": vc.is_trivial(),
                }));
            }
            let applied: Vec<_> = mono
                .applied
                .iter()
                .map(|a| json!({"path": a.path.to_string(), "opcode": a.opcode, "requires": a.requires, "ensures": a.ensures}))
                .collect();
            let doc = json!({"contract": stem, "vcs": index, "applied": applied});
            write(&dir.join("index.json"), &serde_json::to_string_pretty(&doc).expect("json"))?;
            eprintln!("{} VCs written to {}", mono.vcs.len(), dir.display());
        }
    }
    Ok(OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_prove(
    file: &FsPath,
    spec: Option<&FsPath>,
    config: Option<&FsPath>,
    only: &[String],
    timeout: f64,
    jobs: usize,
    no_simplify: bool,
    no_times: bool,
    format: Format,
) -> Result<u8, u8> {
    let (src, tp) = load_typed(file)?;
    let sc = load_spec(spec, &tp)?;
    let mut solvers = match config {
        Some(c) => parse_config(&read(c)?).map_err(|e| {
            eprintln!("{}: error: {e}", c.display());
            USAGE
        })?,
        None => solver::default_solvers(),
    };
    if !only.is_empty() {
        let mut picked = Vec::new();
        for name in only {
            match solvers.iter().find(|s| &s.name == name) {
                Some(s) => picked.push(s.clone()),
                None => {
                    eprintln!("error: no solver named `{name}` is configured");
                    return Err(USAGE);
                }
            }
        }
        solvers = picked;
    }
    if !(timeout > 0.0) || jobs == 0 {
        eprintln!("error: --timeout and --jobs must be positive");
        return Err(USAGE);
    }
    let cfg = RunConfig { solvers, timeout: Duration::from_secs_f64(timeout), jobs };
    let mono = generate_mono(&tp, &sc).map_err(|e| vc_error(file, &src, &tp, &e))?;
    let vc_jobs = smt_jobs(&mono.vcs, &sc.logic, !no_simplify).map_err(|e| {
        diag(file, None, &e);
        TYPE
    })?;
    let verdicts = run_all(&vc_jobs, &cfg).map_err(|e| {
        eprintln!("error: {e}");
        USAGE
    })?;
    let (text, code) = report(&verdicts, !no_times);
    match format {
        Format::Text => print!("{text}"),
        Format::Json => {
            let mut vs = serde_json::to_value(&verdicts).expect("json");
            if no_times {
                if let Some(arr) = vs.as_array_mut() {
                    for v in arr {
                        v.as_object_mut().map(|o| o.remove("seconds"));
                    }
                }
            }
            let doc = json!({"verdicts": vs, "summary": solver::summarize(&verdicts)});
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
    }
    Ok(if code == 0 { OK } else { NOT_PROVED })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    let r = match &cli.cmd {
        Cmd::Parse { file } => load(file).map(|(_, c)| {
            print!("{}", pretty_print(&c));
            OK
        }),
        Cmd::Typecheck { file, stacks, format } => cmd_typecheck(file, *stacks, *format),
        Cmd::Run { file, parameter, storage, fuel, amount, balance, check_contracts } => {
            cmd_run(file, parameter, storage, *fuel, *amount, *balance, *check_contracts)
        }
        Cmd::Contracts { instrs } => cmd_contracts(instrs),
        Cmd::Vcgen { file, mode, spec, out, prelude, name } => {
            cmd_vcgen(file, *mode, spec.as_deref(), out.as_deref(), *prelude, name)
        }
        Cmd::Prove { file, spec, config, solvers, timeout, jobs, no_simplify, no_times, format } => cmd_prove(
            file,
            spec.as_deref(),
            config.as_deref(),
            solvers,
            *timeout,
            *jobs,
            *no_simplify,
            *no_times,
            *format,
        ),
    };
    ExitCode::from(r.unwrap_or_else(|c| c))
}
