//! Command-line front end: configuration, dispatch and artifact emission.
//!
//! Exit codes: 0 all checks passed, 1 a check failed (the report is still
//! written), 2 usage or configuration error, 3 numerical failure.

mod config;
mod output;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::components::{classify_singularity, component_ladder, disconnectedness_check, Classification, Verdict};
use crate::error::{Error, Result};
use crate::fnmodel::SignedLogReal;
use crate::lifting::{lift_curve, line_sweep, LineFamily};
use crate::paperexample::{
    build_tree, count_sublevel_arcs, level_geometry, render_svg, verify_arg_monotonic, verify_inequalities,
};
use crate::poisson::{divergence_scan, dyadic_ladder};

pub use config::{
    parse_complex, parse_config, parse_document, parse_function, parse_levels, CommandName, ConfigDoc, Outputs,
    Rational, RunConfig, DEFAULT_EPSILON, DEFAULT_LEVELS, DEFAULT_RADII, DEFAULT_RESOLUTION, DEFAULT_SAMPLES,
    DEFAULT_TOL_TRACK, DEFAULT_WINDOW_HALF,
};
pub use output::{write_atomic, Csv};

pub const SCHEMA_VERSION: u32 = 1;
/// Relative tolerance on the total argument increase per circuit.
pub const ARG_TOTAL_TOL: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "invbranch", version, about = "Inverse-branch singularities of entire functions")]
struct Cli {
    /// Command to run; may instead come from the config file.
    #[arg(value_enum)]
    command: Option<CommandName>,
    /// TOML file whose keys override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    doc: ConfigDoc,
}

/// Result of a command before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub result: Value,
    pub csv: Option<String>,
    pub svg: Option<String>,
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    command: String,
    status: &'static str,
    config: &'a RunConfig,
    result: &'a Value,
}

#[derive(Serialize)]
struct ErrorReport {
    schema_version: u32,
    command: Option<String>,
    status: &'static str,
    exit_code: i32,
    kind: &'static str,
    message: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Precondition(_) | Error::EpsilonRange(_) | Error::ZeroMass | Error::NotClosed => 2,
        _ => 3,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Precondition(_) => "precondition",
        Error::Degenerate { .. } => "degenerate",
        Error::DivisionDegenerate { .. } => "division_degenerate",
        Error::Overflow { .. } => "overflow",
        Error::OnCurve { .. } => "on_curve",
        Error::NotClosed => "not_closed",
        Error::NoSeeds => "no_seeds",
        Error::ResolutionTooCoarse { .. } => "resolution_too_coarse",
        Error::TouchesBoundary { .. } => "touches_boundary",
        Error::EpsilonRange(_) => "epsilon_range",
        Error::Undersampled { .. } => "undersampled",
        Error::ZeroMass => "zero_mass",
        Error::Parse(_) => "parse_error",
        Error::Io(_) => "io",
    }
}

fn error_json(command: Option<CommandName>, e: &Error) -> String {
    let report = ErrorReport {
        schema_version: SCHEMA_VERSION,
        command: command.map(|c| c.to_string()),
        status: "error",
        exit_code: exit_code(e),
        kind: error_kind(e),
        message: e.to_string(),
    };
    serde_json::to_string_pretty(&report).expect("error report serializes") + "\n"
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn complex_fields(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn verify_example(cfg: &RunConfig) -> Result<Outcome> {
    let eps = cfg.epsilon.value();
    let (lo, hi) = cfg.levels;
    let inequalities = verify_inequalities(eps, lo..=hi, cfg.samples)?;
    let mut arcs = Vec::new();
    let mut monotonicity = Vec::new();
    let (mut arcs_ok, mut mono_ok) = (true, true);
    for n in lo..=hi {
        let (a, b) = level_geometry(n, eps)?.monotone_annulus();
        let r = cfg.arc_radius.unwrap_or(0.5 * (a + b));
        let threshold = cfg.threshold.unwrap_or(SignedLogReal::double_power_of_two(-1, n));
        let n_theta = cfg.n_theta.unwrap_or(1 << (n + 6));
        let arc = count_sublevel_arcs(eps, n, r, threshold, n_theta)?;
        arcs_ok &= arc.arc_count == 1 << n && arc.midpoints_covered && arc.ray_angles_excluded;
        let mono = verify_arg_monotonic(eps, n, r, n_theta)?;
        mono_ok &= mono.min_derivative > 0.0
            && (mono.total_increase - mono.expected_increase).abs() <= ARG_TOTAL_TOL * mono.expected_increase;
        arcs.push(arc);
        monotonicity.push(mono);
    }
    let mut csv = Csv::new(&["kind", "j", "n", "index", "re", "im", "re_g_sign", "re_g_log_abs", "pass"]);
    for s in &inequalities.records {
        let (sign, log_abs) = match s.re_g {
            Some(v) => (v.sign.to_string(), num(v.log_abs)),
            None => (String::new(), String::new()),
        };
        let [re, im] = complex_fields(s.z);
        csv.row([
            s.kind.label().to_string(),
            s.j.to_string(),
            s.n.to_string(),
            s.index.to_string(),
            re,
            im,
            sign,
            log_abs,
            s.pass.to_string(),
        ]);
    }
    Ok(Outcome {
        passed: inequalities.all_pass && arcs_ok && mono_ok,
        result: json!({
            "checks": { "inequalities": inequalities.all_pass, "arc_counts": arcs_ok, "monotonicity": mono_ok },
            "inequalities": to_value(&inequalities),
            "arcs": to_value(&arcs),
            "monotonicity": to_value(&monotonicity),
        }),
        csv: Some(csv.into_string()),
        svg: None,
    })
}

fn render_tree(cfg: &RunConfig) -> Result<Outcome> {
    let tree = build_tree(cfg.epsilon.value(), cfg.levels.1, cfg.window)?;
    let svg = render_svg(&tree, &cfg.style);
    let mut csv = Csv::new(&["role", "kind", "j", "n", "fully_visible"]);
    let mut levels = Vec::new();
    for n in 1..=tree.n_max {
        let b: Vec<_> = tree.nodes.iter().filter(|s| s.n == n).collect();
        levels.push(json!({
            "n": n,
            "b_sets": b.len(),
            "b_fully_visible": b.iter().filter(|s| tree.fully_visible(s)).count(),
            "c_sets": tree.edges.iter().filter(|e| e.set.n == n).count(),
            "rays": tree.rays.iter().filter(|s| s.n == n).count(),
        }));
    }
    let rows = tree
        .nodes
        .iter()
        .map(|s| ("node", s))
        .chain(tree.edges.iter().map(|e| ("edge", &e.set)))
        .chain(tree.rays.iter().map(|s| ("ray", s)));
    for (role, s) in rows {
        csv.row([
            role.to_string(),
            s.kind.label().to_string(),
            s.j.to_string(),
            s.n.to_string(),
            tree.fully_visible(s).to_string(),
        ]);
    }
    Ok(Outcome {
        passed: true,
        result: json!({ "n_max": tree.n_max, "levels": levels, "style_version": cfg.style.version }),
        csv: Some(csv.into_string()),
        svg: Some(svg),
    })
}

fn classify(cfg: &RunConfig) -> Result<Outcome> {
    let ladder = component_ladder(&cfg.function, cfg.a, &cfg.radii, cfg.window)?;
    let chains = ladder.chains();
    let reports = chains
        .iter()
        .map(|c| classify_singularity(&ladder, c))
        .collect::<Result<Vec<_>>>()?;
    let classification = match reports.first() {
        Some(first) if reports.iter().all(|r| r.classification == first.classification) => first.classification,
        _ => Classification::Inconclusive,
    };
    let level_counts: Vec<usize> = (0..ladder.radii.len()).map(|l| ladder.level(l).len()).collect();
    let mut csv = Csv::new(&["node", "level", "component_id", "re", "im"]);
    for (i, node) in ladder.nodes.iter().enumerate() {
        for &cell in &node.component.cells {
            let [re, im] = complex_fields(ladder.window.cell_center(cell));
            csv.row([i.to_string(), node.level.to_string(), node.component.id.to_string(), re, im]);
        }
    }
    Ok(Outcome {
        passed: classification != Classification::Inconclusive,
        result: json!({
            "classification": classification,
            "splitting_detected": reports.iter().any(|r| r.splitting_detected),
            "level_counts": level_counts,
            "chains": to_value(&reports),
            "ladder": to_value(&ladder),
        }),
        csv: Some(csv.into_string()),
        svg: None,
    })
}

fn check_disconnected(cfg: &RunConfig) -> Result<Outcome> {
    let report = disconnectedness_check(&cfg.function, cfg.a, cfg.disc_center, cfg.disc_radius, cfg.window)?;
    let mut csv = Csv::new(&["component_id", "re", "im"]);
    for comp in &report.components {
        for &cell in &comp.cells {
            let [re, im] = complex_fields(cfg.window.cell_center(cell));
            csv.row([comp.id.to_string(), re, im]);
        }
    }
    Ok(Outcome {
        passed: report.verdict == Verdict::Disconnected,
        result: to_value(&report),
        csv: Some(csv.into_string()),
        svg: None,
    })
}

fn lift(cfg: &RunConfig) -> Result<Outcome> {
    let curve = cfg.curve.as_ref().expect("validated");
    let seed = cfg.seed.expect("validated");
    let lift = lift_curve(&cfg.function, curve, seed, cfg.window_radius, cfg.tol_track)?;
    let mut csv = Csv::new(&["parameter", "re", "im"]);
    for p in &lift.path {
        let [re, im] = complex_fields(p.z);
        csv.row([num(p.parameter), re, im]);
    }
    Ok(Outcome {
        passed: lift.completed(),
        result: json!({ "endpoint": lift.endpoint(), "lift": to_value(&lift) }),
        csv: Some(csv.into_string()),
        svg: None,
    })
}

fn sweep(cfg: &RunConfig) -> Result<Outcome> {
    let family = LineFamily {
        disc_center: cfg.disc_center,
        disc_radius: cfg.disc_radius,
        direction: cfg.direction,
        n_lines: cfg.n_lines,
        max_length: cfg.max_length,
    };
    let report = line_sweep(&cfg.function, &family, cfg.seed.expect("validated"), cfg.window_radius, cfg.tol_track)?;
    let mut csv = Csv::new(&["re", "im"]);
    for &z in &report.singular_endpoints {
        csv.row(complex_fields(z));
    }
    Ok(Outcome {
        passed: report.failed_line_indices.len() < report.n_lines,
        result: to_value(&report),
        csv: Some(csv.into_string()),
        svg: None,
    })
}

fn poisson(cfg: &RunConfig) -> Result<Outcome> {
    let measure = cfg.measure.as_ref().expect("validated");
    let report = divergence_scan(measure, cfg.arc, &dyadic_ladder(cfg.k_max))?;
    let mut csv = Csv::new(&["r", "theta", "u"]);
    for v in &report.values {
        csv.row([num(v.r), num(v.theta), num(v.value)]);
    }
    Ok(Outcome {
        passed: report.lower_bound_holds && report.strictly_increasing,
        result: to_value(&report),
        csv: Some(csv.into_string()),
        svg: None,
    })
}

/// Run the command without touching the file system.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        CommandName::VerifyExample => verify_example(cfg),
        CommandName::RenderTree => render_tree(cfg),
        CommandName::Classify => classify(cfg),
        CommandName::CheckDisconnected => check_disconnected(cfg),
        CommandName::Lift => lift(cfg),
        CommandName::Sweep => sweep(cfg),
        CommandName::Poisson => poisson(cfg),
    }
}

/// JSON report for a finished command; identical configs give identical bytes.
pub fn report_json(cfg: &RunConfig, outcome: &Outcome) -> String {
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: cfg.command.to_string(),
        status: if outcome.passed { "pass" } else { "fail" },
        config: cfg,
        result: &outcome.result,
    };
    serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"
}

fn write_log(cfg: &RunConfig, code: i32) -> Result<()> {
    let Some(log) = cfg.outputs.log_path() else {
        return Ok(());
    };
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut text = format!("unix_time {stamp}\ncommand {}\nexit_code {code}\n", cfg.command);
    for p in cfg.outputs.paths() {
        text.push_str(&format!("artifact {}\n", p.display()));
    }
    write_atomic(&log, text.as_bytes())
}

fn emit(cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
    let json = report_json(cfg, outcome);
    let out = &cfg.outputs;
    if out.paths().next().is_none() {
        let primary = match cfg.command {
            CommandName::RenderTree => outcome.svg.as_deref().unwrap_or(&json),
            CommandName::Poisson => outcome.csv.as_deref().unwrap_or(&json),
            _ => &json,
        };
        std::io::stdout().write_all(primary.as_bytes())?;
        return Ok(());
    }
    if let Some(p) = &out.json {
        write_atomic(p, json.as_bytes())?;
    }
    if let (Some(p), Some(csv)) = (&out.csv, &outcome.csv) {
        write_atomic(p, csv.as_bytes())?;
    }
    if let (Some(p), Some(svg)) = (&out.svg, &outcome.svg) {
        write_atomic(p, svg.as_bytes())?;
    }
    Ok(())
}

fn fail(command: Option<CommandName>, e: &Error) -> i32 {
    let _ = std::io::stderr().write_all(error_json(command, e).as_bytes());
    exit_code(e)
}

/// Execute a validated configuration and write its artifacts; returns the exit code.
pub fn run_command(cfg: &RunConfig) -> i32 {
    let code = match execute(cfg) {
        Ok(outcome) => match emit(cfg, &outcome) {
            Ok(()) => i32::from(!outcome.passed),
            Err(e) => return fail(Some(cfg.command), &e),
        },
        Err(e) => {
            if let Some(p) = &cfg.outputs.json {
                let _ = write_atomic(p, error_json(Some(cfg.command), &e).as_bytes());
            }
            fail(Some(cfg.command), &e)
        }
    };
    match write_log(cfg, code) {
        Ok(()) => code,
        Err(e) => fail(Some(cfg.command), &e),
    }
}

/// Entry point of the binary.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let text = text.trim_end();
            return fail(None, &Error::Parse(text.strip_prefix("error: ").unwrap_or(text).to_string()));
        }
    };
    let mut flags = cli.doc;
    flags.command = cli.command;
    let doc = match &cli.config {
        Some(path) => {
            let file = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))
                .and_then(|text| parse_document(&text));
            match file {
                Ok(file) => flags.overlay(file),
                Err(e) => return fail(flags.command, &e),
            }
        }
        None => flags,
    };
    let command = doc.command;
    match RunConfig::from_doc(doc) {
        Ok(cfg) => run_command(&cfg),
        Err(e) => fail(command, &e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        parse_config(text).unwrap()
    }

    #[test]
    fn sinc_classifies_indirect() {
        let c = cfg("command = \"classify\"\nfunction = \"sinc\"\nhalf_width = 20\nresolution = 0.05\nradii = [0.3, 0.1, 0.03]\n");
        let out = execute(&c).unwrap();
        assert!(out.passed);
        assert_eq!(out.result["classification"], "indirect_candidate");
    }

    #[test]
    fn small_window_is_inconclusive() {
        let c = cfg("command = \"check-disconnected\"\nfunction = \"exp\"\nhalf_width = 2\nresolution = 0.05\n");
        let out = execute(&c).unwrap();
        assert!(!out.passed);
        assert_eq!(out.result["verdict"], "inconclusive");
    }

    #[test]
    fn poisson_csv() {
        let c = cfg("command = \"poisson\"\natoms = [\"0:1\"]\nk_max = 3\n");
        let out = execute(&c).unwrap();
        assert!(out.passed);
        let csv = out.csv.unwrap();
        assert!(csv.starts_with("r,theta,u\n0.5,0,"));
        assert_eq!(csv.lines().count(), 4);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::ZeroMass), 2);
        assert_eq!(exit_code(&Error::Degenerate { re: 0.0, im: 0.0 }), 3);
        assert_eq!(exit_code(&Error::ResolutionTooCoarse { id: 0, cells: 1 }), 3);
        assert_eq!(run(["invbranch", "classify", "--epsilon", "1/4"]), 2);
        assert_eq!(run(["invbranch", "--bogus"]), 2);
        assert_eq!(run(["invbranch"]), 2);
    }

    #[test]
    fn zero_mass_arc_is_a_config_error() {
        let c = cfg("command = \"poisson\"\natoms = [\"0:1\"]\narc = [1.0, 2.0]\n");
        assert_eq!(execute(&c), Err(Error::ZeroMass));
    }
}
