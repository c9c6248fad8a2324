use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use core_entropy::entropy::{EntropyRecord, Method, DEFAULT_MAX_ITER, DEFAULT_TOL};
use core_entropy::hubbard::{build_tree, HubbardTree};
use core_entropy::lamination::root_pair;
use core_entropy::scan::{entropy_by, run_scan, scan_angles, write_csv, Config};
use core_entropy::survivor::{survivor_dimension_with, HoleKind, DEFAULT_DEPTH};
use core_entropy::tuning::tuned_entropy_check_with;
use core_entropy::verify::{self, Suite, VerifyConfig, DEFAULT_SAMPLES, ORACLE_TOL};
use core_entropy::{Angle, Error};

#[derive(Parser)]
#[command(name = "core-entropy", version, about = "Core entropy of quadratic polynomials from rational external angles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Pairs,
    Tree,
    Both,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Pairs => vec![Method::Pairs],
            MethodArg::Tree => vec![Method::Tree],
            MethodArg::Both => vec![Method::Pairs, Method::Tree],
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TreeFormat {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Core entropy of an angle p/q.
    Entropy {
        angle: String,
        #[arg(long, value_enum, default_value = "pairs")]
        method: MethodArg,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Hubbard tree of an angle.
    Tree {
        angle: String,
        #[arg(long, value_enum, default_value = "text")]
        format: TreeFormat,
    },
    /// Tune a root angle's component by an angle and check the entropy formula.
    Tune {
        #[arg(long)]
        root: String,
        angle: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Entropy table over families of angles, as CSV.
    Scan {
        #[arg(long)]
        period_max: Option<usize>,
        #[arg(long)]
        preperiodic_denominator_max: Option<u64>,
        #[arg(long, value_enum, default_value = "pairs")]
        method: MethodArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Biaccessibility dimension from the survivor set.
    Dimension {
        angle: String,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Run a property suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    Usage(String),
    Compute(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::InvalidInput(_) | Error::InvalidDegree(_) | Error::InvalidArc(_) | Error::NotARoot(_) | Error::Precondition(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Usage(format!("I/O error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn parse_angle(s: &str) -> Result<Angle, Failure> {
    s.parse::<Angle>().map_err(Failure::from)
}

fn config(tol: f64, jobs: usize, seed: u64) -> Result<Config, Failure> {
    let c = Config {
        tol,
        max_iter: DEFAULT_MAX_ITER,
        jobs,
        seed,
    };
    c.validate()?;
    Ok(c)
}

fn print_json<T: Serialize>(v: &T) -> Outcome {
    let s = serde_json::to_string_pretty(v).map_err(|e| Failure::Compute(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn cmd_entropy(angle: &str, method: MethodArg, tol: f64, json: bool) -> Outcome {
    let theta = parse_angle(angle)?;
    let cfg = config(tol, 1, 0)?.spectral();
    let mut records = Vec::new();
    for m in method.methods() {
        records.push(EntropyRecord::new(&theta, &entropy_by(&theta, m, &cfg)?));
    }
    if json {
        if records.len() == 1 {
            print_json(&records[0])?;
        } else {
            print_json(&records)?;
        }
    } else if records.len() == 1 {
        let r = &records[0];
        println!("h={:.6}", r.h);
        println!("rho={:.9} method={} matrix_size={} residual={:.3e}", r.rho, r.method, r.matrix_size, r.residual);
    } else {
        for r in &records {
            println!("{} {:.6}", r.method, r.h);
        }
    }
    if let [a, b] = records.as_slice() {
        let d = (a.h - b.h).abs();
        if d > ORACLE_TOL {
            return Err(Failure::Verification(format!("methods disagree by {d:.3e}")));
        }
    }
    Ok(())
}

fn print_tree(t: &HubbardTree) {
    println!("tree of {}: {} vertices, {} edges", t.theta, t.vertices.len(), t.edges.len());
    for (i, v) in t.vertices.iter().enumerate() {
        let angles: Vec<String> = v.angles.iter().map(|a| a.to_string()).collect();
        let kind = if v.is_marked() { "marked" } else { "steiner" };
        let mut tags = Vec::new();
        if i == t.marked_critical {
            tags.push("critical");
        }
        if i == t.critical_value {
            tags.push("critical value");
        }
        let tags = if tags.is_empty() { String::new() } else { format!(" [{}]", tags.join(", ")) };
        println!("  v{i} {kind} {{{}}} -> v{}{tags}", angles.join(", "), t.vertex_map[i]);
    }
    for (a, b) in &t.edges {
        println!("  v{a} -- v{b}");
    }
}

fn cmd_tree(angle: &str, format: TreeFormat) -> Outcome {
    let theta = parse_angle(angle)?;
    let t = build_tree(&theta)?;
    match format {
        TreeFormat::Text => print_tree(&t),
        TreeFormat::Json => print_json(&t)?,
        TreeFormat::Dot => print!("{}", t.to_dot()),
    }
    Ok(())
}

fn cmd_tune(root: &str, angle: &str, tol: f64, json: bool) -> Outcome {
    let root_angle = parse_angle(root)?;
    let theta = parse_angle(angle)?;
    let cfg = config(tol, 1, 0)?.spectral();
    let r = root_pair(&root_angle)?;
    let rep = tuned_entropy_check_with(&r, &theta, ORACLE_TOL, &cfg)?;
    if json {
        print_json(&rep)?;
    } else {
        let tuned: Vec<String> = rep.tuned.iter().map(|t| t.to_string()).collect();
        println!("root {r}");
        println!("tuned {}", tuned.join(", "));
        for (t, h) in rep.tuned.iter().zip(&rep.h_tuned) {
            println!("h({t})={h:.6}");
        }
        println!("h={:.6}", rep.h_tuned[0]);
        println!(
            "expected={:.6} (h_root={:.6}, h_angle={:.6}) residual={:.3e}",
            rep.expected, rep.h_root, rep.h_angle, rep.residual
        );
        println!("formula {}", if rep.pass { "PASS" } else { "FAIL" });
    }
    if !rep.pass {
        return Err(Failure::Verification("tuning formula violated".into()));
    }
    Ok(())
}

fn cmd_scan(
    period_max: Option<usize>,
    den_max: Option<u64>,
    method: MethodArg,
    out: Option<PathBuf>,
    jobs: usize,
    tol: f64,
) -> Outcome {
    if period_max.is_none() && den_max.is_none() {
        return Err(Failure::Usage(
            "scan needs --period-max and/or --preperiodic-denominator-max".into(),
        ));
    }
    if period_max == Some(0) || den_max == Some(0) {
        return Err(Failure::Usage("scan bounds must be at least 1".into()));
    }
    let cfg = config(tol, jobs, 0)?;
    // Open the output before computing so an unwritable path fails fast.
    let sink: Box<dyn Write> = match &out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::Usage(format!("cannot write {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    };
    let rows = run_scan(&scan_angles(period_max, den_max), &method.methods(), &cfg)?;
    write_csv(&rows, sink)?;
    Ok(())
}

fn cmd_dimension(angle: &str, depth: usize, tol: f64, json: bool) -> Outcome {
    let theta = parse_angle(angle)?;
    let cfg = config(tol, 1, 0)?.spectral();
    let d = survivor_dimension_with(&theta, depth, HoleKind::Biaccessible, &cfg)?;
    if json {
        print_json(&d)?;
    } else {
        println!("dim={:.6}", d.transfer);
        println!("h=log2*dim={:.6}", d.transfer * std::f64::consts::LN_2);
        println!(
            "transfer: rho={:.9} matrix_size={} residual={:.3e}",
            d.rho, d.matrix_size, d.residual
        );
        println!("count: depth={} cylinders={} dim~{:.6}", d.depth, d.cylinders, d.count);
    }
    Ok(())
}

fn cmd_verify(suite: &str, samples: usize, seed: u64, tol: f64, json: bool) -> Outcome {
    let suite: Suite = suite.parse()?;
    let cfg = VerifyConfig::from_config(&config(tol, 1, seed)?, samples);
    let cases = verify::run(suite, &cfg)?;
    let failed = cases.iter().filter(|c| !c.pass).count();
    if json {
        print_json(&cases)?;
    } else {
        for c in &cases {
            println!("{c}");
        }
        println!("{suite}: {} cases, {failed} failed", cases.len());
    }
    if failed > 0 {
        return Err(Failure::Verification(format!("{failed} case(s) failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Entropy { angle, method, tol, json } => cmd_entropy(&angle, method, tol, json),
        Command::Tree { angle, format } => cmd_tree(&angle, format),
        Command::Tune { root, angle, tol, json } => cmd_tune(&root, &angle, tol, json),
        Command::Scan {
            period_max,
            preperiodic_denominator_max,
            method,
            out,
            jobs,
            tol,
        } => cmd_scan(period_max, preperiodic_denominator_max, method, out, jobs, tol),
        Command::Dimension { angle, depth, tol, json } => cmd_dimension(&angle, depth, tol, json),
        Command::Verify { suite, samples, seed, tol, json } => cmd_verify(&suite, samples, seed, tol, json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(3)
        }
    }
}
