//! Command-line front end over the pipeline.
//!
//! Exit codes: 0 on success, 2 on unusable arguments, 3 when a problem is
//! not securely feasible or a checked code fails, 4 when a computation
//! diverges from its golden reference.

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::{
    certify_capacity_with, classify_sweep, region_json, table1_divergences, verify_linear_code,
    CapacityStatus, ConfigPolicy, KeyMode, LinearCode,
};
use crate::inner_bounds::{
    apply_zero_forcing, build_composite_system, detect_conflict, inner_region,
    CompositeSystemSpec, DecodingConfiguration,
};
use crate::model::{enumerate_instances, is_securely_feasible, parse_instance, ProblemInstance};
use crate::outer_bounds::{
    check_gh_equivalence, h_outer_region, nonsecure_outer_region, secure_outer_region,
};
use crate::polyhedra::{render_rational, RateRegion};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum)]
enum BoundKind {
    #[default]
    Secure,
    Nonsecure,
    H,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum)]
enum Toggle {
    On,
    #[default]
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum)]
enum KeyArg {
    #[default]
    Auto,
    On,
    Off,
}

#[derive(Parser)]
#[command(name = "secidx", version, about = "Secure index coding bounds and capacity certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List problem classes of a given size, one representative each
    Enumerate {
        /// Number of messages, 2 to 5
        n: usize,
        /// Keep only securely feasible classes
        #[arg(long)]
        feasible: bool,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Project an outer bound onto the rate coordinates
    Outer {
        /// Problem in "(1|-),(2|3),(3|2);(e|1)" notation
        problem: String,
        #[arg(long, value_enum, default_value_t)]
        bound: BoundKind,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Project a composite-coding inner bound for one decoding configuration
    Inner {
        problem: String,
        /// "full" or an explicit choice like "1:1;2:1,2;3:1,3"
        #[arg(long, default_value = "full")]
        config: String,
        /// Grant the sender a key shared with the receivers
        #[arg(long, value_enum, default_value_t)]
        key: Toggle,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Certify one problem's capacity region, or census a whole size
    Capacity {
        problem: Option<String>,
        /// Certify every feasible class of this size (sweeps always search
        /// configurations with the key on automatic)
        #[arg(long, conflicts_with = "problem")]
        sweep: Option<usize>,
        /// With --sweep 3, diff the recomputed outer bounds against the
        /// golden catalogue instead of certifying
        #[arg(long, requires = "sweep")]
        table: bool,
        /// "search", "full", or an explicit configuration
        #[arg(long, default_value = "search")]
        config: String,
        #[arg(long, value_enum, default_value_t)]
        key: KeyArg,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Exhaustively check a binary linear code against a problem
    VerifyCode {
        problem: String,
        /// One bit per message; each occurrence is an output bit XORing the
        /// listed messages, e.g. --xor 1 --xor 2,3
        #[arg(long)]
        xor: Vec<String>,
        /// Bits per message for general codes, e.g. --lengths 2,2,2
        #[arg(long)]
        lengths: Option<String>,
        /// Output bit as one-based positions into the concatenated message
        /// word, e.g. --row 1,4; repeat per output bit
        #[arg(long)]
        row: Vec<String>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Check that the two outer-bound formulations shadow identically
    GhCheck {
        problem: Option<String>,
        /// Check every feasible class of this size
        #[arg(long, conflicts_with = "problem")]
        sweep: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
}

pub fn run() -> u8 {
    match Cli::parse().command {
        Command::Enumerate { n, feasible, format } => cmd_enumerate(n, feasible, format),
        Command::Outer { problem, bound, format } => cmd_outer(&problem, bound, format),
        Command::Inner { problem, config, key, format } => cmd_inner(&problem, &config, key, format),
        Command::Capacity { problem, sweep, table, config, key, format } => {
            cmd_capacity(problem.as_deref(), sweep, table, &config, key, format)
        }
        Command::VerifyCode { problem, xor, lengths, row, format } => {
            cmd_verify_code(&problem, &xor, lengths.as_deref(), &row, format)
        }
        Command::GhCheck { problem, sweep, format } => {
            cmd_gh_check(problem.as_deref(), sweep, format)
        }
    }
}

fn parse_problem(text: &str) -> Result<ProblemInstance, u8> {
    parse_instance(text).map_err(|e| {
        eprintln!("unreadable problem: {e}");
        2
    })
}

fn region_text(region: &RateRegion) -> String {
    if region.empty {
        return "(empty)".to_string();
    }
    let rows = region.display_constraints();
    if rows.is_empty() {
        "(only nonnegativity)".to_string()
    } else {
        rows.join("; ")
    }
}

fn cmd_enumerate(n: usize, feasible: bool, format: OutputFormat) -> u8 {
    if !(2..=5).contains(&n) {
        eprintln!("enumeration covers 2 <= n <= 5");
        return 2;
    }
    let classes = enumerate_instances(n, feasible);
    match format {
        OutputFormat::Text => {
            for p in &classes {
                println!("{}", p.render());
            }
        }
        OutputFormat::Json => {
            let body: Vec<serde_json::Value> = classes.iter().map(|p| p.to_json()).collect();
            println!("{}", serde_json::Value::Array(body));
        }
    }
    0
}

fn cmd_outer(problem: &str, bound: BoundKind, format: OutputFormat) -> u8 {
    let p = match parse_problem(problem) {
        Ok(p) => p,
        Err(code) => return code,
    };
    if bound == BoundKind::Secure && !is_securely_feasible(&p) {
        eprintln!("{} is not securely feasible", p.render());
        return 3;
    }
    let (region, label) = match bound {
        BoundKind::Secure => (secure_outer_region(&p), "secure-g"),
        BoundKind::Nonsecure => (nonsecure_outer_region(&p), "nonsecure-g"),
        BoundKind::H => (h_outer_region(&p), "h"),
    };
    match format {
        OutputFormat::Text => println!("{}", region_text(&region)),
        OutputFormat::Json => {
            let body = region_json(&region);
            let out = serde_json::json!({
                "problem": p.render(),
                "bound": label,
                "constraints": body["constraints"],
                "vertices": body["vertices"],
            });
            println!("{out}");
        }
    }
    0
}

fn cmd_inner(problem: &str, config: &str, key: Toggle, format: OutputFormat) -> u8 {
    let p = match parse_problem(problem) {
        Ok(p) => p,
        Err(code) => return code,
    };
    if !is_securely_feasible(&p) {
        eprintln!("{} is not securely feasible", p.render());
        return 3;
    }
    let cfg = if config == "full" {
        DecodingConfiguration::full_decoding(&p)
    } else {
        match DecodingConfiguration::parse(&p, config) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("bad configuration: {e}");
                return 2;
            }
        }
    };
    let with_key = key == Toggle::On;
    let spec = CompositeSystemSpec::single(p.clone(), cfg.clone(), true, with_key);
    let (forced_sys, forced) = apply_zero_forcing(&build_composite_system(&spec));
    let conflict = if with_key { None } else { detect_conflict(&forced_sys) };
    let region = inner_region(&spec);
    match format {
        OutputFormat::Text => {
            println!("{}", region_text(&region));
            if !forced.is_empty() {
                println!("forced to zero: {}", forced.join(", "));
            }
            if let Some(report) = &conflict {
                println!("conflict: {}", report.render().join("; "));
            }
        }
        OutputFormat::Json => {
            let body = region_json(&region);
            let out = serde_json::json!({
                "problem": p.render(),
                "config": cfg.render(),
                "key": with_key,
                "empty": body["empty"],
                "constraints": body["constraints"],
                "vertices": body["vertices"],
                "forced": forced,
                "conflict_witness": conflict.as_ref().map(|c| c.render()),
            });
            println!("{out}");
        }
    }
    0
}

fn cmd_capacity(
    problem: Option<&str>,
    sweep: Option<usize>,
    table: bool,
    config: &str,
    key: KeyArg,
    format: OutputFormat,
) -> u8 {
    if let Some(n) = sweep {
        if !(2..=4).contains(&n) {
            eprintln!("sweeps cover 2 <= n <= 4");
            return 2;
        }
        if table {
            if n != 3 {
                eprintln!("--table compares the three-message catalogue; use --sweep 3");
                return 2;
            }
            let diverging = table1_divergences();
            match format {
                OutputFormat::Text => {
                    if diverging.is_empty() {
                        println!("20/20 rows match");
                    } else {
                        for label in &diverging {
                            println!("diverges: {label}");
                        }
                    }
                }
                OutputFormat::Json => {
                    println!("{}", serde_json::json!({ "rows": 20, "diverging": diverging }));
                }
            }
            return if diverging.is_empty() { 0 } else { 4 };
        }
        let s = classify_sweep(n);
        match format {
            OutputFormat::Text => println!(
                "n={}: feasible {}, conflict-free {}, matched without key {}, matched with key {}, unmatched {}",
                s.n, s.feasible, s.conflict_free, s.matched_no_key, s.matched_with_key, s.unmatched
            ),
            OutputFormat::Json => println!(
                "{}",
                serde_json::json!({
                    "n": s.n,
                    "feasible": s.feasible,
                    "conflict_free": s.conflict_free,
                    "matched_no_key": s.matched_no_key,
                    "matched_with_key": s.matched_with_key,
                    "unmatched": s.unmatched,
                })
            ),
        }
        return 0;
    }

    let Some(text) = problem else {
        eprintln!("give a problem or --sweep <n>");
        return 2;
    };
    let p = match parse_problem(text) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let policy = match config {
        "search" => ConfigPolicy::Search,
        "full" => ConfigPolicy::Full,
        other => match DecodingConfiguration::parse(&p, other) {
            Ok(cfg) => ConfigPolicy::Fixed(cfg),
            Err(e) => {
                eprintln!("bad configuration: {e}");
                return 2;
            }
        },
    };
    let mode = match key {
        KeyArg::Auto => KeyMode::Auto,
        KeyArg::On => KeyMode::On,
        KeyArg::Off => KeyMode::Off,
    };
    let report = certify_capacity_with(&p, &policy, mode);
    match format {
        OutputFormat::Text => {
            println!("problem: {}", report.problem.render());
            println!("status: {}", report.status.label());
            println!("outer: {}", region_text(&report.outer));
            println!("inner: {}", region_text(report.inner()));
            println!("config: {}", report.config_used.render());
            if let Some(c) = &report.conflict {
                println!("conflict: {}", c.render().join("; "));
            }
        }
        OutputFormat::Json => println!("{}", report.to_json()),
    }
    if report.status == CapacityStatus::Infeasible {
        3
    } else {
        0
    }
}

fn parse_list(text: &str) -> Result<Vec<usize>, u8> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|part| {
            part.trim().parse::<usize>().map_err(|_| {
                eprintln!("unreadable number {part:?}");
                2
            })
        })
        .collect()
}

fn cmd_verify_code(
    problem: &str,
    xor: &[String],
    lengths: Option<&str>,
    row: &[String],
    format: OutputFormat,
) -> u8 {
    let p = match parse_problem(problem) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let code = if !xor.is_empty() {
        if lengths.is_some() || !row.is_empty() {
            eprintln!("give --xor rows or --lengths with --row, not both");
            return 2;
        }
        let mut rows = Vec::with_capacity(xor.len());
        for taps in xor {
            match parse_list(taps) {
                Ok(list) => rows.push(list),
                Err(code) => return code,
            }
        }
        match LinearCode::from_message_xor(p.n(), &rows) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("bad code: {e}");
                return 2;
            }
        }
    } else {
        let Some(lengths_text) = lengths else {
            eprintln!("give --xor rows or --lengths with --row");
            return 2;
        };
        let lengths = match parse_list(lengths_text) {
            Ok(list) => list,
            Err(code) => return code,
        };
        if lengths.len() != p.n() {
            eprintln!("expected {} message lengths", p.n());
            return 2;
        }
        if lengths.iter().sum::<usize>() > 20 {
            eprintln!("exhaustive verification is capped at 20 message bits");
            return 2;
        }
        let mut rows = Vec::with_capacity(row.len());
        for taps in row {
            let positions = match parse_list(taps) {
                Ok(list) => list,
                Err(code) => return code,
            };
            if positions.contains(&0) {
                eprintln!("bit positions are one-based");
                return 2;
            }
            rows.push(positions.iter().map(|&b| b - 1).collect());
        }
        match LinearCode::new(lengths, &rows) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("bad code: {e}");
                return 2;
            }
        }
    };
    let report = match verify_linear_code(&p, &code) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    match format {
        OutputFormat::Text => {
            let rates: Vec<String> = report.rates.iter().map(render_rational).collect();
            println!("rates: {}", rates.join(" "));
            if report.decodes() {
                println!("decoding: every receiver recovers its message");
            } else {
                let failing: Vec<String> =
                    report.decoding_failures.iter().map(|i| i.to_string()).collect();
                println!("decoding failures: receivers {}", failing.join(", "));
            }
            if report.secure() {
                println!("security: the output tells the eavesdropper nothing new");
            } else {
                for (m, bits) in &report.leakage {
                    let unit = if *bits == 1 { "bit" } else { "bits" };
                    println!("leakage: message {m} leaks {bits} {unit}");
                }
            }
            println!("verdict: {}", if report.passes() { "pass" } else { "fail" });
        }
        OutputFormat::Json => {
            let rates: Vec<String> = report.rates.iter().map(render_rational).collect();
            let out = serde_json::json!({
                "problem": p.render(),
                "rates": rates,
                "decoding_failures": report.decoding_failures,
                "leakage": report.leakage,
                "passes": report.passes(),
            });
            println!("{out}");
        }
    }
    if report.passes() {
        0
    } else {
        3
    }
}

fn cmd_gh_check(problem: Option<&str>, sweep: Option<usize>, format: OutputFormat) -> u8 {
    match (problem, sweep) {
        (Some(text), None) => {
            let p = match parse_problem(text) {
                Ok(p) => p,
                Err(code) => return code,
            };
            let (equivalent, certificate) = check_gh_equivalence(&p);
            let point = certificate.map(|c| {
                c.point.iter().map(render_rational).collect::<Vec<_>>().join(", ")
            });
            match format {
                OutputFormat::Text => {
                    if equivalent {
                        println!("the two formulations shadow identically");
                    } else {
                        println!(
                            "the shadows differ at ({})",
                            point.as_deref().unwrap_or("unknown")
                        );
                    }
                }
                OutputFormat::Json => {
                    println!(
                        "{}",
                        serde_json::json!({
                            "problem": p.render(),
                            "equivalent": equivalent,
                            "point": point,
                        })
                    );
                }
            }
            if equivalent {
                0
            } else {
                4
            }
        }
        (None, Some(n)) => {
            if !(2..=4).contains(&n) {
                eprintln!("sweeps cover 2 <= n <= 4");
                return 2;
            }
            let classes = enumerate_instances(n, true);
            let diverging: Vec<String> = classes
                .iter()
                .filter(|p| !check_gh_equivalence(p).0)
                .map(|p| p.render())
                .collect();
            match format {
                OutputFormat::Text => {
                    if diverging.is_empty() {
                        let unit = if classes.len() == 1 { "class" } else { "classes" };
                        println!("checked {} {unit}, all shadows agree", classes.len());
                    } else {
                        for label in &diverging {
                            println!("diverges: {label}");
                        }
                    }
                }
                OutputFormat::Json => {
                    println!(
                        "{}",
                        serde_json::json!({
                            "n": n,
                            "checked": classes.len(),
                            "diverging": diverging,
                        })
                    );
                }
            }
            if diverging.is_empty() {
                0
            } else {
                4
            }
        }
        _ => {
            eprintln!("give a problem or --sweep <n>");
            2
        }
    }
}
