//! Command-line front door: list and build gallery examples, classify
//! user-supplied projections, and run the verification suite.
//!
//! Exit codes: 0 on success (for `verify`: every assertion PASS or SKIPPED),
//! 1 when any assertion FAILs, 2 on usage errors (unknown example,
//! unreadable files, schema violations).

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use opalg::gallery::{build_example, list_examples, ExampleBundle};
use opalg::map::OpMap;
use opalg::mat::Tolerances;
use opalg::norms::SearchParams;
use opalg::projlab::{classify_projection, ClassifyCerts, ProjectionReport};
use opalg::space::OpSpace;
use opalg::verify::{run_bundle, sig9, AssertionResult, Outcome};

#[derive(Parser)]
#[command(name = "opalg", version, about = "operator-algebra projection laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct CommonOpts {
    /// Amplification level cap; defaults to the codomain dimension clipped
    /// by the runtime size guard.
    #[arg(long)]
    level: Option<usize>,
    /// Random restarts for the norm searches.
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// RNG seed; the OPALG_SEED environment variable overrides the default.
    #[arg(long)]
    seed: Option<u64>,
    /// Entrywise equality tolerance.
    #[arg(long)]
    eps_eq: Option<f64>,
    /// PSD eigenvalue floor.
    #[arg(long)]
    eps_psd: Option<f64>,
    /// Norm convergence tolerance.
    #[arg(long)]
    eps_norm: Option<f64>,
    /// Inner iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Print the example registry.
    List {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Build a named example bundle and write it out.
    Build {
        name: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Classify a projection: either a named example or a space/map pair
    /// from JSON files.
    Classify {
        #[arg(long)]
        example: Option<String>,
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        map: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the expected assertions of one example (or --all) and print one
    /// PASS/FAIL/SKIPPED line per assertion.
    Verify {
        name: Option<String>,
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Pretty-print a previously written classification report.
    Report {
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn env_seed() -> u64 {
    std::env::var("OPALG_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn tolerances_from(common: &CommonOpts) -> Tolerances {
    let mut tol = Tolerances::default();
    tol.seed = common.seed.unwrap_or_else(env_seed);
    if let Some(v) = common.eps_eq {
        tol.eps_eq = v;
    }
    if let Some(v) = common.eps_psd {
        tol.eps_psd = v;
    }
    if let Some(v) = common.eps_norm {
        tol.eps_norm = v;
    }
    if let Some(v) = common.max_iter {
        tol.max_iter = v;
    }
    tol
}

fn params_from(common: &CommonOpts) -> SearchParams {
    SearchParams { restarts: common.restarts, ..SearchParams::default() }
}

fn emit(out: &Option<String>, content: &str) -> opalg::Result<()> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(content.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> opalg::Result<ExitCode> {
    match cli.command {
        Command::List { format } => {
            let entries = list_examples();
            match format {
                Format::Json => {
                    let rows: Vec<serde_json::Value> = entries
                        .iter()
                        .map(|(n, d, g, exp)| {
                            serde_json::json!({
                                "name": n, "description": d, "group": g, "experimental": exp
                            })
                        })
                        .collect();
                    println!("{}", serde_json::to_string_pretty(&rows)?);
                }
                Format::Text => {
                    for (n, d, g, exp) in entries {
                        let tag = if exp { " [EXPERIMENTAL]" } else { "" };
                        println!("{n:<36} ({g}){tag}\n    {d}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Build { name, common } => {
            let bundle = build_example(&name)?;
            let content = match common.format {
                Format::Json => serde_json::to_string_pretty(&bundle)? + "\n",
                Format::Text => bundle_summary(&bundle),
            };
            emit(&common.out, &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { example, space, map, common } => {
            let tol = tolerances_from(&common);
            let params = params_from(&common);
            let (target, certs): (OpMap, ClassifyCerts) = match (&example, &space, &map) {
                (Some(name), None, None) => {
                    let bundle = build_example(name)?;
                    let certs = ClassifyCerts {
                        map: bundle.certificate("map").cloned(),
                        complement: bundle.certificate("complement").cloned(),
                        reflection: bundle.certificate("reflection").cloned(),
                    };
                    (bundle.map.clone(), certs)
                }
                (None, Some(spath), Some(mpath)) => {
                    let sjson = std::fs::read_to_string(spath)?;
                    let _space: OpSpace = serde_json::from_str(&sjson)?;
                    let mjson = std::fs::read_to_string(mpath)?;
                    let map: OpMap = serde_json::from_str(&mjson)?;
                    (map, ClassifyCerts::default())
                }
                _ => {
                    return Err(opalg::Error::Precondition(
                        "classify needs --example NAME or both --space and --map".into(),
                    ))
                }
            };
            let report = classify_projection(&target, common.level, &tol, &params, &certs)?;
            let content = match common.format {
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                Format::Text => report_text(&report),
            };
            emit(&common.out, &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { name, all, common } => {
            let tol = tolerances_from(&common);
            let params = params_from(&common);
            let names: Vec<String> = if all {
                opalg::gallery::EXAMPLE_NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                vec![name.ok_or_else(|| {
                    opalg::Error::Precondition("verify needs an example name or --all".into())
                })?]
            };
            let mut buffer = String::new();
            let mut rows = Vec::new();
            let mut any_fail = false;
            for n in &names {
                let bundle = build_example(n)?;
                let results = run_bundle(&bundle, &tol, &params)?;
                buffer.push_str(&format!("== {n}\n"));
                for r in &results {
                    buffer.push_str(&assertion_line(r));
                    if r.outcome == Outcome::Fail {
                        any_fail = true;
                    }
                }
                rows.push(serde_json::json!({ "example": n, "results": results }));
            }
            match common.format {
                Format::Json => emit(&common.out, &(serde_json::to_string_pretty(&rows)? + "\n"))?,
                Format::Text => emit(&common.out, &buffer)?,
            }
            Ok(if any_fail { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::Report { input, format } => {
            let content = std::fs::read_to_string(&input)?;
            let report: ProjectionReport = serde_json::from_str(&content)?;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
                Format::Text => print!("{}", report_text(&report)),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn assertion_line(r: &AssertionResult) -> String {
    let tag = match r.outcome {
        Outcome::Pass => "PASS",
        Outcome::Fail => "FAIL",
        Outcome::Skipped => "SKIPPED",
    };
    format!("[{tag}] {} :: {}\n", r.label, r.detail)
}

fn bundle_summary(b: &ExampleBundle) -> String {
    let mut s = String::new();
    s.push_str(&format!("name:        {}\n", b.name));
    s.push_str(&format!("group:       {}\n", b.group));
    s.push_str(&format!("description: {}\n", b.description));
    s.push_str(&format!(
        "space:       dim {} in M_{}\n",
        b.space.dim(),
        b.space.ambient_dim()
    ));
    s.push_str(&format!("map:         {}\n", b.map.name()));
    s.push_str(&format!(
        "certificates: {}\n",
        b.certificates.iter().map(|(t, _)| t.as_str()).collect::<Vec<_>>().join(", ")
    ));
    s.push_str(&format!("assertions:  {}\n", b.expected.len()));
    s
}

fn report_text(r: &ProjectionReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("idempotent residual: {}\n", sig9(r.idempotent_residual)));
    s.push_str(&format!("unital:              {}\n", r.unital));
    let rows = |name: &str, v: &[opalg::norms::NormReport], out: &mut String| {
        for rep in v {
            let upper = rep
                .certified_upper
                .map(|u| format!("  certified upper {}", sig9(u)))
                .unwrap_or_default();
            out.push_str(&format!(
                "  {name} level {}: lower {}{}\n",
                rep.level,
                sig9(rep.lower_bound),
                upper
            ));
        }
    };
    s.push_str("norm lower bounds:\n");
    rows("P     ", &r.p_levels, &mut s);
    rows("I-P   ", &r.complement_levels, &mut s);
    rows("2P-I  ", &r.reflection_levels, &mut s);
    s.push_str(&format!("hermitian grid sup:  {}\n", sig9(r.hermitian_sup)));
    s.push_str(&format!("q is a projection:   {}\n", r.q_is_projection));
    if let Some(sr) = r.split_residual {
        s.push_str(&format!("splitting residual:  {}\n", sig9(sr)));
    }
    if let Some(f) = &r.range_flags {
        s.push_str(&format!(
            "range flags:         subalgebra {}, jordan {}, unital {}, selfadjoint {}, square-zero {}\n",
            f.is_subalgebra, f.is_jordan_subalgebra, f.is_unital, f.is_selfadjoint, f.square_zero
        ));
    }
    if let Some(c) = r.condexp_residual {
        s.push_str(&format!("condexp residual:    {}\n", sig9(c)));
    }
    if let Some(k) = &r.kernel_of_d {
        s.push_str(&format!("kernel ideal dim:    {}\n", k.dim()));
    }
    if let Some(m) = &r.mac {
        s.push_str(&format!(
            "support conditions:  left {}, right {} (orth residual {})\n",
            m.left_condition,
            m.right_condition,
            sig9(m.orth_residual)
        ));
    }
    if let Some(s5) = &r.section5 {
        s.push_str(&format!(
            "nilpotency suite:    {} element(s), hypothesis sampled {} (worst ratio {})\n",
            s5.elements.len(),
            s5.re_contractive_sampled,
            sig9(s5.re_contractive_worst_ratio)
        ));
        for (i, e) in s5.elements.iter().enumerate() {
            s.push_str(&format!(
                "  element {i}: ||Re x|| {}, ||u(x)^2|| {}, nilpotent {}, quasi-regular {}\n",
                sig9(e.re_norm),
                sig9(e.u_sq_norm),
                e.nilpotent,
                e.quasi_regular
            ));
        }
    }
    if let Some(rcp) = &r.rcp {
        s.push_str(&format!(
            "rcp verdict:         unital route {}, sampled accretive {}\n",
            rcp.unital_route, rcp.sampled_accretive
        ));
    }
    for sk in &r.skipped {
        s.push_str(&format!("skipped:             {}\n", sk.hypothesis));
    }
    s
}
