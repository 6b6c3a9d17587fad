mod args;

use std::path::Path;
use std::process::ExitCode;
use std::time::{Instant, SystemTime};

use clap::{CommandFactory, FromArgMatches};

use args::{BetaArgs, Cli, Command, ConservationArgs, DefectArg, FormatArg, ScanArgs, ValidateArgs};
use backflow_core::conservation::{self, Status};
use backflow_core::scan::{self, OutputFormat, RunManifest, SweepOptions, SweepPlan, SweepRow};
use backflow_core::validate::{self, ValidateOptions};
use backflow_core::{backflow_constant, DefectKind, Error, Execution, GridSpec};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn preset_help() -> String {
    let mut s = String::from("Presets:\n");
    for p in scan::PRESETS {
        s.push_str(&format!("  {:<16} {}\n", p.name, p.figure));
    }
    s.push_str("\nCurve presets run on n = 2000, p = 200; landscapes and delta-peak on n = 500, p = 100.");
    s
}

fn main() -> ExitCode {
    let help = preset_help();
    let cmd = Cli::command()
        .after_help(help.clone())
        .mut_subcommand("scan", |c| c.after_help(help));
    let cli = match Cli::from_arg_matches(&cmd.get_matches()) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let exec = match configure_threads(cli.threads) {
        Ok(e) => e,
        Err(e) => return fail(&e),
    };
    let outcome = match &cli.command {
        Command::Beta(a) => cmd_beta(a, exec),
        Command::Scan(a) => cmd_scan(a, exec),
        Command::Validate(a) => cmd_validate(a, exec),
        Command::Conservation(a) => cmd_conservation(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_NUMERIC })
}

fn configure_threads(threads: Option<usize>) -> Result<Execution, Error> {
    match threads {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(1) => Ok(Execution::Serial),
        #[cfg(feature = "parallel")]
        Some(t) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(Execution::Parallel)
        }
        _ if Execution::parallel_available() => Ok(Execution::Parallel),
        _ => Ok(Execution::Serial),
    }
}

fn cmd_beta(a: &BetaArgs, exec: Execution) -> Result<u8, Error> {
    let defect = a.defect.spec()?;
    let test = a.test.spec()?;
    let grid = a.grid.spec()?;
    let start = Instant::now();
    let r = backflow_constant(&defect, &test, &grid, exec)?;
    let row = SweepRow {
        defect: defect.kind(),
        strength: defect.strength_or_zero(),
        conserved: defect.conserved(),
        x0: test.x0(),
        sigma: test.sigma(),
        n: grid.n(),
        p_cutoff: grid.p_cutoff(),
        beta: r.beta,
        residual: r.residual_norm,
        wall_s: start.elapsed().as_secs_f64(),
        error: None,
    };
    let rows = [row];
    match a.format {
        FormatArg::Csv => print!("{}", scan::to_csv(&rows)),
        FormatArg::Json => print!("{}", scan::to_json(&rows)?),
    }
    Ok(0)
}

fn scan_plans(a: &ScanArgs) -> Result<(Option<&'static str>, Vec<SweepPlan>), Error> {
    let grid_override = |default: GridSpec| GridSpec::new(a.n.unwrap_or(default.n()), a.pcut.unwrap_or(default.p_cutoff()));
    let mut plans = match (&a.preset, a.defect) {
        (Some(_), Some(_)) => return Err(Error::Config("give either --preset or --defect, not both".into())),
        (None, None) => return Err(Error::Config("scan needs --preset or --defect".into())),
        (Some(name), None) => {
            let p = scan::preset(name)?;
            let plans = p.plans(grid_override(p.default_grid(a.full_resolution))?);
            return Ok((Some(p.name), plans));
        }
        (None, Some(d)) => {
            let family: DefectKind = d.into();
            let strengths = match (&a.strengths, d) {
                (Some(s), _) => s.clone(),
                (None, DefectArg::Free) => vec![0.0],
                (None, _) => return Err(Error::Config("--strengths is required for delta and jump sweeps".into())),
            };
            vec![SweepPlan::new(family, a.conserved, strengths, a.x0.clone(), grid_override(GridSpec::paper())?)?]
        }
    };
    for p in &mut plans {
        p.sigma = a.sigma;
        p.support_factor = a.support_factor;
        p.validate()?;
    }
    Ok((None, plans))
}

fn output_format(a: &ScanArgs) -> OutputFormat {
    match a.format {
        Some(FormatArg::Json) => OutputFormat::Json,
        Some(FormatArg::Csv) => OutputFormat::Csv,
        None if a.out.extension().is_some_and(|e| e == "json") => OutputFormat::Json,
        None => OutputFormat::Csv,
    }
}

fn cmd_scan(a: &ScanArgs, exec: Execution) -> Result<u8, Error> {
    let (preset, plans) = scan_plans(a)?;
    let started = SystemTime::now();
    let opts = SweepOptions { exec, record_timing: !a.no_timing };
    let rows = scan::run_plans(&plans, &opts)?;
    let manifest = RunManifest::new(preset, &plans, started, &rows, &a.out);
    scan::write_results(&a.out, output_format(a), &rows, &manifest)?;
    let failed: Vec<&SweepRow> = rows.iter().filter(|r| r.failed()).collect();
    for r in &failed {
        eprintln!("point {} strength={} x0={} failed: {}", r.defect, r.strength, r.x0, r.error.as_deref().unwrap_or(""));
    }
    println!("wrote {} rows to {} ({} failed)", rows.len(), display(&a.out), failed.len());
    Ok(if failed.is_empty() { 0 } else { EXIT_NUMERIC })
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn cmd_validate(a: &ValidateArgs, exec: Execution) -> Result<u8, Error> {
    let reports = validate::run(&ValidateOptions {
        suites: a.suites.clone(),
        seed: a.seed,
        inject_hermiticity_fault: a.inject_hermiticity_fault,
        exec,
    })?;
    let mut all = true;
    for r in &reports {
        let ok = r.passed();
        all &= ok;
        println!("{} {}", if ok { "PASS" } else { "FAIL" }, r.suite);
        for c in &r.checks {
            println!("    {} {}: {:.3e} (tol {:.0e})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.value, c.tolerance);
        }
    }
    println!("{} of {} suites passed", reports.iter().filter(|r| r.passed()).count(), reports.len());
    Ok(if all { 0 } else { EXIT_VALIDATION })
}

fn cmd_conservation(a: &ConservationArgs) -> Result<u8, Error> {
    let defect = a.defect.spec()?;
    let report = conservation::survey(&defect, a.states, a.seed)?;
    println!("{} defect, {} random superpositions, seed {}", defect.kind(), report.states, report.seed);
    for q in &report.quantities {
        let verdict = if q.passed { "ok" } else { "FAIL" };
        match q.status {
            Status::Conserved { max_residual } => {
                println!("  {:<12} conserved, max residual {:.3e} (tol {:.0e}) {verdict}", q.quantity.as_str(), max_residual, q.tolerance)
            }
            Status::NotConserved { max_mismatch } => println!(
                "  {:<12} non-conserved, residual matches closed form: max mismatch {:.3e} (tol {:.0e}) {verdict}",
                q.quantity.as_str(),
                max_mismatch,
                q.tolerance
            ),
        }
    }
    if let Some(d) = report.fixing_term_deviation {
        println!("  fixing term vs mode algebra: {:.3e} (tol {:.0e})", d, conservation::FIXING_TOL);
    }
    Ok(if report.passed() { 0 } else { EXIT_VALIDATION })
}
