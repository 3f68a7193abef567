//! qcurv: analyze radially symmetric conformal metrics, verify their
//! asymptotic laws, and dump profile tables.
//!
//! Exit codes: 0 success / all checks passed, 1 check failures,
//! 2 invalid input, 3 numerical failure.

use qcurv::error::Error;
use qcurv::report::{self, MetricSpec, TableQuantity};
use qcurv::verify::{run_suite, SuiteConfig};
use std::process::ExitCode;

const USAGE: &str = "\
usage: qcurv <command> [options]

commands:
  analyze   full pipeline: curvature, entropies, decomposition, checks
  verify    run the verification suite over the builtin family matrix
  table     dump one quantity along the grid

options:
  --spec <path>        metric spec file (analyze, table); defaults to stdin
  --out <path>         output file; defaults to stdout
  --format <fmt>       analyze output: report (default) | table
  --quantity <q>       table quantity: u | potential | q_density | scalar | volume
  --dims <list>        verify: comma-separated dimensions (default 2,3,4,5)
  --tau-tol <x>        verify: tolerance for the tau formula (default 0.05)
  --jobs <count>       worker threads (default: all cores)
";

struct Options {
    spec_path: Option<String>,
    out: Option<String>,
    format: String,
    quantity: Option<String>,
    dims: Option<String>,
    tau_tol: Option<f64>,
    jobs: Option<usize>,
}

fn parse_options(args: &[String]) -> Result<Options, String> {
    let mut o = Options {
        spec_path: None,
        out: None,
        format: "report".into(),
        quantity: None,
        dims: None,
        tau_tol: None,
        jobs: None,
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut take = || it.next().cloned().ok_or(format!("{arg} needs a value"));
        match arg.as_str() {
            "--spec" => o.spec_path = Some(take()?),
            "--out" => o.out = Some(take()?),
            "--format" => o.format = take()?,
            "--quantity" => o.quantity = Some(take()?),
            "--dims" => o.dims = Some(take()?),
            "--tau-tol" => {
                let v = take()?;
                o.tau_tol = Some(v.parse().map_err(|_| format!("bad --tau-tol {v:?}"))?)
            }
            "--jobs" => {
                let v = take()?;
                o.jobs = Some(v.parse().map_err(|_| format!("bad --jobs {v:?}"))?)
            }
            other => return Err(format!("unknown option {other:?}")),
        }
    }
    Ok(o)
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidSpec(_) | Error::InvalidDimension(_) => 2,
        _ => 3,
    }
}

fn read_spec(opts: &Options) -> Result<MetricSpec, Error> {
    let text = match &opts.spec_path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::InvalidSpec(format!("cannot read {p}: {e}")))?,
        None => {
            use std::io::Read;
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Error::InvalidSpec(format!("cannot read stdin: {e}")))?;
            s
        }
    };
    report::parse_spec(&text)
}

fn emit(opts: &Options, text: &str) -> Result<(), Error> {
    match &opts.out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::InvalidSpec(format!("cannot write {p}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run() -> Result<u8, (u8, String)> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprint!("{USAGE}");
        return Ok(2);
    };
    let opts = parse_options(&args[1..]).map_err(|m| (2, m))?;
    if let Some(jobs) = opts.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let fail = |e: Error| (exit_code_for(&e), format!("{e}"));
    match command.as_str() {
        "analyze" => {
            let spec = read_spec(&opts).map_err(fail)?;
            let rep = report::cmd_analyze(&spec).map_err(fail)?;
            match opts.format.as_str() {
                "report" => {
                    emit(&opts, &rep.render()).map_err(fail)?;
                    // The profile dump goes next to the report when a path is given.
                    if let Some(p) = &opts.out {
                        let table_path = format!("{p}.profile.tsv");
                        std::fs::write(&table_path, rep.profile_table())
                            .map_err(|e| (2, format!("cannot write {table_path}: {e}")))?;
                    }
                }
                "table" => emit(&opts, &rep.profile_table()).map_err(fail)?,
                other => return Err((2, format!("unknown --format {other:?}"))),
            }
            let failed = rep.checks.iter().any(|c| c.skipped.is_none() && !c.pass);
            Ok(if failed { 1 } else { 0 })
        }
        "verify" => {
            let mut config = SuiteConfig::default();
            if let Some(d) = &opts.dims {
                let dims: Result<Vec<usize>, _> = d.split(',').map(|s| s.trim().parse()).collect();
                config.dims = dims.map_err(|_| (2, format!("bad --dims {d:?}")))?;
                if config.dims.iter().any(|&n| n < 2) {
                    return Err((2, format!("bad --dims {d:?}: dimensions must be >= 2")));
                }
            }
            if let Some(t) = opts.tau_tol {
                if !(t > 0.0) {
                    return Err((2, format!("bad --tau-tol {t}")));
                }
                config.tau_tolerance = t;
            }
            let rep = run_suite(&config).map_err(fail)?;
            emit(&opts, &report::render_suite(&rep)).map_err(fail)?;
            Ok(if rep.all_passed() { 0 } else { 1 })
        }
        "table" => {
            let spec = read_spec(&opts).map_err(fail)?;
            let q = opts
                .quantity
                .as_deref()
                .ok_or((2u8, "table needs --quantity".to_string()))?;
            let quantity = TableQuantity::parse(q).map_err(fail)?;
            let text = report::cmd_table(&spec, quantity).map_err(fail)?;
            emit(&opts, &text).map_err(fail)?;
            Ok(0)
        }
        other => {
            eprint!("{USAGE}");
            Err((2, format!("unknown command {other:?}")))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("qcurv: {msg}");
            ExitCode::from(code)
        }
    }
}
