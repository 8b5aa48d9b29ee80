use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use tconvex::archimedean::{archimedean_tstrat_check, exponential_demo, implication_suite, whitney_check};
use tconvex::cells::{cell_decompose, centres_for, normal_form, CellOptions};
use tconvex::config::RunConfig;
use tconvex::cone::{cone_of_region, ConeOptions};
use tconvex::corpus::run_corpus_jobs;
use tconvex::formula::{parse_formula_vars, parse_union, DefinablePiece};
use tconvex::jacobian::{jp_run, Verdict};
use tconvex::parse::{parse_poly_tuple, parse_series};
use tconvex::rv::{res, rvo};
use tconvex::tstrat::{risometry_check, tstrat_verify, Candidate, Region};
use tconvex::Q;

#[derive(Parser)]
#[command(name = "tconvex", version, about = "Exact checks over real Puiseux series")]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Truncation order for solved coordinates and roots.
    #[arg(long, global = true, default_value = "8", value_parser = parse_q)]
    truncation: Q,
    #[arg(long, global = true, default_value_t = 200)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 10_000)]
    pairs: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 64)]
    max_exp_denominator: u64,
    /// Search budget for curve and cone searches.
    #[arg(long, global = true, default_value_t = 1000)]
    budget: usize,
    /// Compact single-line JSON instead of pretty-printed.
    #[arg(long, global = true)]
    json: bool,
    /// No human summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a series expression: value, valuation, leading term, residue.
    Eval { expr: String },
    /// Cell decomposition of a one-variable formula.
    Cells { formula: String },
    /// Normal form of a one-variable formula.
    NormalForm { formula: String },
    /// Finite centre set of a one-variable formula.
    Centres { formula: String },
    /// Jacobian property on the pieces of the partition built for `f`.
    JpCheck { file: PathBuf },
    /// Risometry test of a polynomial map on a domain ("O" for the valuation ring).
    Risometry {
        /// Components separated by ';'.
        map: String,
        domain: String,
    },
    /// Verify a candidate t-stratification.
    TstratVerify {
        file: PathBuf,
        #[arg(long)]
        balls: Option<usize>,
    },
    /// Tangent cone of a set at a rational point.
    TangentCone {
        formula: String,
        /// Comma-separated rational coordinates.
        #[arg(long, value_parser = parse_point)]
        at: Point,
        #[arg(long, default_value = "3", value_parser = parse_q)]
        gamma: Q,
    },
    /// Whitney (a) and (b) for one pair of strata at a point of the lower one.
    Whitney {
        file: PathBuf,
        #[arg(long)]
        upper: usize,
        #[arg(long)]
        lower: usize,
        #[arg(long, value_parser = parse_point)]
        at: Point,
        #[arg(long, default_value_t = 30)]
        curves: usize,
    },
    /// Archimedean t-stratification check plus Whitney checks over incident strata.
    ArchCheck {
        file: PathBuf,
        #[arg(long)]
        balls: Option<usize>,
        #[arg(long, default_value_t = 30)]
        curves: usize,
        #[arg(long, default_value_t = 3)]
        points: usize,
    },
    /// Floating-point probe of the first-order inequality for exponentials.
    ExpDemo {
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = 3.0)]
        b: f64,
        /// Comma-separated scales.
        #[arg(long, default_value = "1000,1000000", value_delimiter = ',')]
        ns: Vec<f64>,
    },
    /// Run every corpus scenario whose name contains the filter.
    Corpus {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn parse_q(s: &str) -> Result<Q, String> {
    Q::from_str(s.trim()).map_err(|_| format!("not a rational: {s:?}"))
}

/// Comma-separated rational coordinates.
#[derive(Clone)]
struct Point(Vec<Q>);

fn parse_point(s: &str) -> Result<Point, String> {
    s.split(',').map(parse_q).collect::<Result<_, _>>().map(Point)
}

/// Error with the input it came from: an argument name or a file path.
struct Failure(String);

fn at<E: Display>(origin: impl Display) -> impl FnOnce(E) -> Failure {
    move |e| Failure(format!("{origin}: {e}"))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(at(path.display()))
}

/// Command outcome: JSON body, whether the verdict holds, one summary line.
struct Outcome {
    body: Json,
    holds: bool,
    summary: String,
}

fn to_json<T: Serialize>(x: &T) -> Json {
    serde_json::to_value(x).expect("reports serialize")
}

fn cell_options(cfg: &RunConfig) -> CellOptions {
    CellOptions { precision: cfg.truncation.clone(), max_denominator: cfg.max_exp_denominator }
}

fn one_var(text: &str) -> Result<Vec<DefinablePiece>, Failure> {
    parse_union(text, None).map_err(at("formula"))
}

fn candidate(path: &Path) -> Result<Candidate, Failure> {
    Candidate::from_json(&read(path)?).map_err(at(path.display()))
}

#[derive(Deserialize)]
struct JpFile {
    f: String,
    #[serde(default)]
    domain: Option<String>,
}

/// `val(v) >= 0` for every variable.
fn ring_domain(vars: &[String]) -> String {
    vars.iter().map(|v| format!("val({v}) >= 0")).collect::<Vec<_>>().join(" & ")
}

fn domain_piece(text: &str, vars: &[String]) -> Result<DefinablePiece, Failure> {
    let text = if text.trim() == "O" { ring_domain(vars) } else { text.to_string() };
    parse_formula_vars(&text, Some(vars)).map_err(at("domain"))
}

fn run(cmd: &Command, cfg: &RunConfig) -> Result<Outcome, Failure> {
    Ok(match cmd {
        Command::Eval { expr } => {
            let x = parse_series(expr, cfg.max_exp_denominator).map_err(at("expression"))?;
            let rv = if x.is_zero() { None } else { Some(rvo(&x).map_err(at("expression"))?) };
            let residue = res(&x).ok();
            Outcome {
                summary: format!("{x}"),
                body: json!({ "value": x, "val": x.val(), "rv": rv, "res": residue.map(|r| r.to_string()) }),
                holds: true,
            }
        }
        Command::Cells { formula } => {
            let cells = cell_decompose(&one_var(formula)?, &cell_options(cfg)).map_err(at("formula"))?;
            Outcome { summary: format!("{} cell(s)", cells.len()), body: json!({ "cells": cells }), holds: true }
        }
        Command::NormalForm { formula } => {
            let nf = normal_form(&one_var(formula)?, &cell_options(cfg)).map_err(at("formula"))?;
            Outcome { summary: format!("{} centre(s), {} table row(s)", nf.centers.len(), nf.table.len()), body: to_json(&nf), holds: true }
        }
        Command::Centres { formula } => {
            let cs = centres_for(&one_var(formula)?, &cell_options(cfg)).map_err(at("formula"))?;
            Outcome { summary: format!("{} centre(s)", cs.len()), body: json!({ "centres": cs }), holds: true }
        }
        Command::JpCheck { file } => {
            let input: JpFile = serde_json::from_str(&read(file)?)
                .map_err(at(file.display()))?;
            let (vars, f) = parse_poly_tuple(std::slice::from_ref(&input.f)).map_err(at(format!("{}: f", file.display())))?;
            let dom = domain_piece(input.domain.as_deref().unwrap_or("O"), &vars).map_err(|e| Failure(format!("{}: {}", file.display(), e.0)))?;
            let reports = jp_run(&f[0], &dom, cfg.samples, cfg.pairs, cfg.seed, &cfg.sample_config()).map_err(at(file.display()))?;
            let violated = reports.iter().filter(|r| r.verdict == Verdict::Violated).count();
            let checked = reports.iter().filter(|r| r.verdict == Verdict::Holds).count() + violated;
            Outcome {
                summary: format!("{checked} piece(s) checked, {violated} violated"),
                holds: violated == 0,
                body: json!({ "f": input.f, "pieces": reports }),
            }
        }
        Command::Risometry { map, domain } => {
            let comps: Vec<String> = map.split(';').map(|s| s.trim().to_string()).collect();
            let (vars, phi) = parse_poly_tuple(&comps).map_err(at("map"))?;
            let dom = domain_piece(domain, &vars)?;
            let r = risometry_check(&phi, &dom, cfg.pairs, cfg.seed, &cfg.sample_config()).map_err(at("map"))?;
            Outcome { summary: format!("{} pair(s), holds: {}", r.pairs, r.holds), holds: r.holds, body: to_json(&r) }
        }
        Command::TstratVerify { file, balls } => {
            let c = candidate(file)?;
            let mut vc = cfg.verify_config();
            vc.balls = balls.unwrap_or(vc.balls);
            let r = tstrat_verify(&c, &vc).map_err(at(file.display()))?;
            Outcome { summary: format!("{} ball(s), {} pair(s), {}", r.balls_checked, r.pairs_checked, r.verdict), holds: r.passed(), body: to_json(&r) }
        }
        Command::TangentCone { formula, at: Point(p), gamma } => {
            let f = parse_union(formula, None).map_err(at("formula"))?;
            let vars = f.first().map(|piece| piece.vars.clone()).unwrap_or_default();
            if vars.len() != p.len() {
                return Err(Failure(format!("point has {} coordinates, the set lives in {} variables", p.len(), vars.len())));
            }
            let opts = ConeOptions { gamma: gamma.clone(), budget: cfg.budget };
            let cone = cone_of_region(&Region::new(f), &vars, p, &opts).map_err(at("formula"))?;
            let pieces: Vec<String> = cone.iter().map(|c| c.to_string()).collect();
            Outcome { summary: pieces.join(" | "), holds: true, body: json!({ "vars": vars, "point": show(p), "cone": pieces }) }
        }
        Command::Whitney { file, upper, lower, at: Point(p), curves } => {
            let c = candidate(file)?;
            let r = whitney_check(&c, *upper, *lower, p, *curves, cfg.seed).map_err(at(file.display()))?;
            Outcome { summary: format!("(a) {}, (b) {} on {} arc(s)", r.a_holds, r.b_holds, r.curves_tested), holds: r.a_holds && r.b_holds, body: to_json(&r) }
        }
        Command::ArchCheck { file, balls, curves, points } => {
            let c = candidate(file)?;
            let mut vc = cfg.verify_config();
            vc.balls = balls.unwrap_or(vc.balls);
            let r = if *curves == 0 {
                let ts = archimedean_tstrat_check(&c, &vc).map_err(at(file.display()))?;
                json!({ "tstrat": ts, "tstrat_pass": ts.passed() })
            } else {
                to_json(&implication_suite(&c, &vc, *curves, *points).map_err(at(file.display()))?)
            };
            let ok = !r["implication_violated"].as_bool().unwrap_or(false);
            Outcome {
                summary: format!("t-stratification: {}, whitney: {}", r["tstrat_pass"], r.get("whitney_pass").unwrap_or(&Json::Null)),
                holds: ok,
                body: r,
            }
        }
        Command::ExpDemo { a, b, ns } => {
            let r = exponential_demo(*a, *b, ns, cfg.seed).map_err(at("exp-demo"))?;
            let ok = r.violations_everywhere && r.margins_grow && r.controls_clean;
            Outcome { summary: r.label.clone(), holds: ok, body: to_json(&r) }
        }
        Command::Corpus { filter, jobs } => {
            let rows = run_corpus_jobs(cfg, filter.as_deref(), *jobs);
            let mut lines = Vec::new();
            for (row, took) in &rows {
                lines.push(format!("{:<4} {:>2} {:<20} {:>8.2} s  {}", if row.pass { "pass" } else { "FAIL" }, row.criterion, row.name, took.as_secs_f64(), row.detail));
            }
            let ok = rows.iter().all(|(r, _)| r.pass);
            let table: Vec<_> = rows.into_iter().map(|(r, _)| r).collect();
            Outcome { summary: lines.join("\n"), holds: ok, body: json!({ "rows": table }) }
        }
    })
}

fn show(p: &[Q]) -> Vec<String> {
    p.iter().map(|c| c.to_string()).collect()
}

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Eval { .. } => "eval",
        Command::Cells { .. } => "cells",
        Command::NormalForm { .. } => "normal-form",
        Command::Centres { .. } => "centres",
        Command::JpCheck { .. } => "jp-check",
        Command::Risometry { .. } => "risometry",
        Command::TstratVerify { .. } => "tstrat-verify",
        Command::TangentCone { .. } => "tangent-cone",
        Command::Whitney { .. } => "whitney",
        Command::ArchCheck { .. } => "arch-check",
        Command::ExpDemo { .. } => "exp-demo",
        Command::Corpus { .. } => "corpus",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let o = &cli.opts;
    let cfg = RunConfig {
        truncation: o.truncation.clone(),
        samples: o.samples,
        pairs: o.pairs,
        seed: o.seed,
        max_exp_denominator: o.max_exp_denominator,
        budget: o.budget,
    };
    if let Some(bad) = [("samples", cfg.samples), ("pairs", cfg.pairs), ("max-exp-denominator", cfg.max_exp_denominator as usize), ("budget", cfg.budget)]
        .iter()
        .find(|(_, v)| *v == 0)
    {
        eprintln!("error: --{} must be positive", bad.0);
        return ExitCode::from(2);
    }
    if cfg.truncation <= Q::from_integer(0.into()) {
        eprintln!("error: --truncation must be positive");
        return ExitCode::from(2);
    }
    let start = Instant::now();
    let command = name(&cli.command);
    let (report, code) = match run(&cli.command, &cfg) {
        Ok(out) => {
            if !o.quiet {
                eprintln!("{}", out.summary);
            }
            let verdict = if out.holds { "pass" } else { "violation" };
            (json!({ "command": command, "config": cfg, "verdict": verdict, "result": out.body }), if out.holds { 0 } else { 1 })
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            (json!({ "command": command, "config": cfg, "verdict": "error", "error": msg }), 2)
        }
    };
    let text = if o.json { serde_json::to_string(&report) } else { serde_json::to_string_pretty(&report) };
    // a closed pipe (`| head`) is not an error worth a panic
    let _ = writeln!(std::io::stdout().lock(), "{}", text.expect("reports serialize"));
    if !o.quiet {
        eprintln!("{command}: {:.2} s", start.elapsed().as_secs_f64());
    }
    ExitCode::from(code)
}
