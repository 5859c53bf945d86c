use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alpred::alp::{self, render_alphabet, AlpInstance};
use alpred::analyzer::{decide, gadget_identity_check, uniqueness_check};
use alpred::instance::{generate_planted, generate_random, parse_system, BinaryLinearSystem};
use alpred::kfield::parse_rational;
use alpred::normalizer::{normalize_with_depth, size_bound, Depth};
use alpred::reducer::reduce;
use alpred::simplex::{eval_lp_at, phase1_feasible};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use num_rational::BigRational;
use serde_json::{json, Value};

/// Binary linear systems reduced to asymptotic linear programs.
#[derive(Parser)]
#[command(name = "alpred", version)]
struct Cli {
    /// Print a single JSON object on standard output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a system file to an ALP and print its size profile.
    Reduce {
        system: PathBuf,
        /// Where to write the ALP JSON; `-` for standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rewrite an ALP down to the {0, 1, -1, K, -K} alphabet.
    Normalize {
        alp: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also report which input constraint each auxiliary came from.
        #[arg(long)]
        provenance: bool,
        /// Only lift, lower and clear; leave small integers in place.
        #[arg(long)]
        structural: bool,
    },
    /// Decide a system with both oracles. Exit 0 if TRUE, 1 if FALSE.
    Decide { system: PathBuf },
    /// Check the gadget identity and representation uniqueness suites.
    VerifyGadgets {
        #[arg(long, default_value_t = 50)]
        max_i: usize,
        #[arg(long, default_value_t = 50)]
        max_n: usize,
    },
    /// Steady-state feasibility with finite-K agreement checks.
    AlpFeasible {
        alp: PathBuf,
        /// Comma-separated values of K; K0 + 1 is always added.
        #[arg(long, value_delimiter = ',', value_parser = parse_k)]
        check_at: Vec<BigRational>,
    },
    /// Generate a system file.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Plant a binary solution and record it in a comment.
        #[arg(long)]
        planted: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn parse_k(s: &str) -> Result<BigRational, String> {
    parse_rational(s.trim()).ok_or_else(|| format!("`{s}` is not a rational"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_system(path: &Path) -> Result<BinaryLinearSystem> {
    parse_system(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_alp(path: &Path) -> Result<AlpInstance> {
    let inst = alp::deserialize(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let violations = inst.validate();
    if let Some(v) = violations.first() {
        bail!("{}: {v}", path.display());
    }
    Ok(inst)
}

/// Writes to standard output; a closed pipe is not an error.
fn emit(json_mode: bool, value: Value, text: impl FnOnce() -> String) {
    let out = if json_mode { format!("{value}\n") } else { text() };
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
}

fn ratio(after: usize, before: usize) -> f64 {
    if before == 0 {
        f64::NAN
    } else {
        after as f64 / before as f64
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let json_mode = cli.json;
    match cli.command {
        Command::Reduce { system, output } => {
            let inst = reduce(&load_system(&system)?);
            let p = inst.profile();
            let line = format!("vars={} constraints={} objective_terms={}", p.vars, p.constraints, p.objective_terms);
            let doc = alp::serialize(&inst);
            match output.as_deref() {
                Some(o) if o == Path::new("-") => {
                    eprintln!("{line}");
                    println!("{doc}");
                }
                Some(o) => {
                    write(o, &doc)?;
                    emit(json_mode, json!({ "profile": p, "output": o.display().to_string() }), || format!("{line}\n"));
                }
                None => {
                    let inst_json: Value = serde_json::from_str(&doc)?;
                    emit(json_mode, json!({ "profile": p, "instance": inst_json }), || format!("{line}\n"));
                }
            }
        }
        Command::Normalize { alp: path, output, provenance, structural } => {
            let inst = load_alp(&path)?;
            let depth = if structural { Depth::Structural } else { Depth::Full };
            let n = normalize_with_depth(&inst, depth)?;
            if let Some(o) = &output {
                write(o, &alp::serialize(&n.instance))?;
            }
            let before = inst.profile();
            let after = n.instance.profile();
            let alpha_before = render_alphabet(&inst.coefficient_alphabet());
            let alpha_after = render_alphabet(&n.instance.coefficient_alphabet());
            let bound = size_bound(&inst);
            let mut value = json!({
                "alphabet_before": alpha_before,
                "alphabet_after": alpha_after,
                "vars": [before.vars, after.vars],
                "relations": [before.relations, after.relations],
                "var_blowup": ratio(after.vars, before.vars),
                "relation_blowup": ratio(after.relations, before.relations),
                "size_bound": bound.to_string(),
                "threshold": n.threshold.to_string(),
            });
            if provenance {
                value["provenance"] = n.provenance_json();
            }
            emit(json_mode, value, || {
                let mut s = format!(
                    "alphabet_before = {alpha_before}\nalphabet_after = {alpha_after}\n\
                     vars: {} -> {} (x{:.2})\nrelations: {} -> {} (x{:.2}, bound {bound})\nthreshold = {}\n",
                    before.vars,
                    after.vars,
                    ratio(after.vars, before.vars),
                    before.relations,
                    after.relations,
                    ratio(after.relations, before.relations),
                    n.threshold,
                );
                if provenance {
                    for (v, i) in &n.provenance {
                        s.push_str(&format!("{v} <- constraint {i}\n"));
                    }
                }
                s
            });
        }
        Command::Decide { system } => {
            let r = decide(&load_system(&system)?)?;
            emit(json_mode, serde_json::to_value(&r)?, || {
                format!(
                    "verdict={} binary_feasible={} witness={} polytope_min={} vertex_count={} oracles_agree={}\n",
                    if r.verdict { "TRUE" } else { "FALSE" },
                    r.binary_feasible,
                    r.witness.as_ref().map_or("none".into(), ToString::to_string),
                    r.polytope_min.as_deref().unwrap_or("empty"),
                    r.vertex_count,
                    r.oracles_agree,
                )
            });
            if !r.oracles_agree {
                eprintln!("warning: the two oracles disagree");
            }
            return Ok(if r.verdict { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::VerifyGadgets { max_i, max_n } => {
            let samples: Vec<BigRational> = [(0, 1), (1, 1), (1, 2), (1, 3), (2, 7), (5, 6)]
                .iter()
                .map(|&(a, b)| BigRational::new(a.into(), b.into()))
                .collect();
            let mut failures = Vec::new();
            for i in 1..=max_i {
                if !gadget_identity_check(i, &samples)? {
                    failures.push(format!("gadget identity at i={i}"));
                }
            }
            for n in 1..=max_n {
                let ks: Vec<BigRational> = (1..=n).map(|s| BigRational::from_integer(s.into())).collect();
                if !uniqueness_check(n, &ks)? {
                    failures.push(format!("uniqueness at N={n}"));
                }
            }
            let ok = failures.is_empty();
            emit(
                json_mode,
                json!({ "gadget_indices": max_i, "uniqueness_sizes": max_n, "failures": failures }),
                || {
                    let mut s = format!("gadget identity: i = 1..={max_i}\nuniqueness: N = 1..={max_n}\n");
                    for f in &failures {
                        s.push_str(&format!("FAILED {f}\n"));
                    }
                    s.push_str(if ok { "all checks passed\n" } else { "some checks failed\n" });
                    s
                },
            );
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::AlpFeasible { alp: path, check_at } => {
            let inst = load_alp(&path)?;
            let s = phase1_feasible(&inst)?;
            let certified = s.verify(&inst);
            let mut ks = check_at;
            ks.push(&s.k0 + BigRational::from_integer(1.into()));
            let mut checks = Vec::new();
            let mut agree = certified;
            for k in &ks {
                let f = eval_lp_at(&inst, k)?;
                agree &= f.feasible == s.feasible;
                checks.push(json!({ "k": k.to_string(), "feasible": f.feasible, "agrees": f.feasible == s.feasible }));
            }
            let mut value = s.to_json();
            value["certificate_verified"] = json!(certified);
            value["checks"] = Value::Array(checks.clone());
            emit(json_mode, value, || {
                let basis: Vec<String> = s.basis.iter().map(ToString::to_string).collect();
                let mut out = format!(
                    "feasible={} K0={} pivots={} certificate_verified={certified}\nbasis: {}\n",
                    s.feasible,
                    s.k0,
                    s.pivots,
                    basis.join(" ")
                );
                for c in &checks {
                    out.push_str(&format!(
                        "k={} feasible={} agrees={}\n",
                        c["k"].as_str().unwrap_or(""),
                        c["feasible"],
                        c["agrees"]
                    ));
                }
                out
            });
            if !agree {
                eprintln!("error: finite-K checks or certificate disagree with the steady-state verdict");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Gen { n, m, seed, planted, output } => {
            let text = if planted {
                let (sys, b) = generate_planted(n, m, seed)?;
                format!("# planted {b}\n{sys}")
            } else {
                generate_random(n, m, seed)?.to_string()
            };
            match output {
                Some(o) => write(&o, &text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
