mod expr;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ptykes::extend::{dilator_probe, extend, ClassPredilator};
use ptykes::fix::fixpoint_iso;
use ptykes::morph::{check_morphism, identity};
use ptykes::orders::{dump_prefix, finite, DescentReport};
use ptykes::pi12::branch_witness;
use ptykes::predil::{check_predilator_laws, constant_predilator, decode_fragment, empty_predilator, encode_fragment, omega_dilator, step_cap, Report};
use ptykes::ptyx::{check_preptyx_laws, pi};
use ptykes::Result;

use expr::{parse_arg, parse_obj, parse_pred, parse_ptyx, Arg, Obj};

/// Bounded computations with predilators, preptykes and their fixpoints.
#[derive(Parser)]
#[command(name = "ptykes", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Audit the laws of a predilator, preptyx or morphism expression.
    Audit {
        expr: String,
        #[arg(long, default_value_t = 3)]
        arity: usize,
        #[arg(long, default_value_t = 40)]
        budget: usize,
    },
    /// Search for a descending chain in the value of a predilator.
    Probe {
        expr: String,
        #[arg(long)]
        arg: String,
        #[arg(long, default_value_t = 20)]
        len: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
    },
    /// Print the least enumerated elements of the value at an order.
    Dump {
        expr: String,
        #[arg(long)]
        arg: String,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Enumeration steps; defaults to a small multiple of the count.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Write a finite fragment of a predilator.
    Encode {
        expr: String,
        #[arg(long, default_value_t = 3)]
        arity: usize,
        #[arg(long, default_value_t = 40)]
        budget: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Read a fragment file and write it back out.
    Decode {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Build the fixpoint of a preptyx and check its isomorphism on a prefix.
    Fixpoint {
        expr: String,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        #[arg(long, default_value_t = 10)]
        dump: usize,
        #[arg(long, default_value_t = 10)]
        window: usize,
    },
}

/// Ran to completion with nothing to report.
const OK: u8 = 0;
/// A violation or descending chain was found.
const FOUND: u8 = 1;

fn print_report(rep: &Report) -> u8 {
    print!("{rep}");
    if rep.is_clean() { OK } else { FOUND }
}

fn print_descent(rep: &DescentReport, stages: Option<&[usize]>) -> u8 {
    if !rep.found {
        println!("no descending chain within budget ({} steps)", rep.budget_spent);
        return OK;
    }
    println!("descending chain of length {} ({} steps)", rep.chain.len(), rep.budget_spent);
    for (i, e) in rep.chain.iter().enumerate() {
        match stages {
            Some(s) => println!("{i}\tstage {}\t{e}", s[i]),
            None => println!("{i}\t{e}"),
        }
    }
    FOUND
}

fn audit(src: &str, arity: usize, budget: usize) -> Result<u8> {
    let rep = match parse_obj(src)? {
        Obj::Pred(d) => check_predilator_laws(&d.predilator, arity, budget),
        Obj::Mor(m) => check_morphism(&m, arity, budget),
        Obj::Ptyx(p) => {
            let (zero, one) = (empty_predilator(), constant_predilator(finite(1)));
            let two = constant_predilator(finite(2));
            let om = omega_dilator();
            let morphisms = [
                identity(&one),
                pi(&one),
                ptykes::morph::empty_morphism(&zero, &om),
                pi(&om),
            ];
            check_preptyx_laws(&p, &[zero, one, two, om], &morphisms, arity, budget)
        }
    };
    Ok(print_report(&rep))
}

fn probe(src: &str, arg: &str, len: usize, budget: usize) -> Result<u8> {
    let d = parse_pred(src)?;
    let arg = parse_arg(arg)?;
    if let (Arg::Witness { theta, n, z, .. }, Some((t, m))) = (&arg, &d.dpsi) {
        if theta.label() == t.label() && n == m {
            match branch_witness(theta, *n, z, len) {
                Ok(w) => {
                    println!("branch of length {} in {}", w.chain.len(), w.order.label());
                    for (i, e) in w.chain.iter().enumerate() {
                        println!("{i}\t{e}");
                    }
                    return Ok(FOUND);
                }
                Err(e) => println!("no branch witness ({e}); probing directly"),
            }
        }
    }
    let x = arg.order();
    if let Some(f) = &d.fixpoint {
        let wf = f.analyze_wf(&x, len, budget)?;
        let code = print_descent(&wf.report, Some(&wf.stages));
        if wf.report.found {
            match wf.localized_at {
                Some(n) => println!("chain lies in stage {n}"),
                None => println!("chain escapes every stage"),
            }
        }
        return Ok(code);
    }
    Ok(print_descent(&dilator_probe(&d.predilator, &x, len, budget)?, None))
}

/// Enumerations of empty values tick forever, so the default is kept short.
fn dump_budget(count: usize) -> usize {
    4 * step_cap(count)
}

fn dump(src: &str, arg: &str, count: usize, budget: Option<usize>) -> Result<u8> {
    let budget = budget.unwrap_or_else(|| dump_budget(count));
    let d = parse_pred(src)?.predilator;
    let value = match parse_arg(arg)? {
        Arg::Fin(k) => d.value(k),
        other => extend(&d).value(&other.order()),
    };
    print!("{}", dump_prefix(&value, count, budget)?);
    Ok(OK)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| ptykes::Error::Parse(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn encode(src: &str, arity: usize, budget: usize, out: Option<&PathBuf>) -> Result<u8> {
    let d = parse_pred(src)?.predilator;
    emit(&encode_fragment(&d, arity, budget), out)?;
    Ok(OK)
}

fn decode(file: &PathBuf, out: Option<&PathBuf>) -> Result<u8> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| ptykes::Error::Parse(format!("{}: {e}", file.display())))?;
    let frag = decode_fragment(&text)?;
    eprintln!(
        "{}: arity ≤ {}, at most {} elements per arity",
        frag.predilator.label(),
        frag.arity_bound,
        frag.max_elems
    );
    emit(&encode_fragment(&frag.predilator, frag.arity_bound, frag.max_elems), out)?;
    Ok(OK)
}

fn fixpoint_cmd(src: &str, arity: usize, count: usize, window: usize) -> Result<u8> {
    let p = parse_ptyx(src)?;
    let (f, fwd, bwd) = fixpoint_iso(&p, window)?;
    let d = &f.predilator;
    print!("{}", dump_prefix(&d.value(arity), count, dump_budget(count))?);
    let mut bad = 0;
    for x in d.window(arity, count) {
        let y = fwd.component(arity, &x);
        let back = bwd.component(arity, &y);
        if back != x {
            println!("round trip fails: {x} ↦ {y} ↦ {back}");
            bad += 1;
        }
    }
    if bad == 0 {
        println!("isomorphism round trip holds on the prefix");
        Ok(OK)
    } else {
        Ok(FOUND)
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Audit { expr, arity, budget } => audit(&expr, arity, budget),
        Cmd::Probe { expr, arg, len, budget } => probe(&expr, &arg, len, budget),
        Cmd::Dump { expr, arg, count, budget } => dump(&expr, &arg, count, budget),
        Cmd::Encode { expr, arity, budget, out } => encode(&expr, arity, budget, out.as_ref()),
        Cmd::Decode { file, out } => decode(&file, out.as_ref()),
        Cmd::Fixpoint { expr, arity, dump, window } => fixpoint_cmd(&expr, arity, dump, window),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
