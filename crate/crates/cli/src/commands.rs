use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kmlqg::bench::{
    hessian_signature_check, random_suite, run_experiment, BenchmarkSystem, CellOutcome,
    ExperimentConfig, DEFAULT_HESSIAN_STEP,
};
use kmlqg::lqg::{is_admissible, lqg_riccati_optimum, Plant};
use kmlqg::matlin::DEFAULT_RANK_TOL;
use kmlqg::optimizer::{random_minimal_init, run, Termination};

use crate::config::{parse_method, ControllerDoc, RunConfigDocument};
use crate::csvio::{format_real, trace_to_string, write_summary};
use crate::{format_significant, Cli, CliError, Command, CommonArgs};

/// Runs one subcommand, printing to `out`. `Ok(false)` means the command ran
/// but its check failed (exit 1).
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    let args = cli.command.args();
    let doc = RunConfigDocument::load(&args.config)?;
    let mut sink = io::sink();
    let out: &mut dyn Write = if args.quiet { &mut sink } else { out };
    match &cli.command {
        Command::Check(_) => cmd_check(&doc, out),
        Command::Solve(_) => cmd_solve(&doc, args, out),
        Command::Compare(_) => cmd_compare(&doc, args, out),
        Command::Oracle(_) => cmd_oracle(&doc, args, out),
        Command::HessCheck(_) => cmd_hess_check(&doc, out),
    }
}

fn io_err(e: io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn resolve(out_dir: &Path, path: Option<&PathBuf>, default: &str) -> PathBuf {
    let path = path.map_or_else(|| PathBuf::from(default), Clone::clone);
    if path.is_absolute() {
        path
    } else {
        out_dir.join(path)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok  "
    } else {
        "FAIL"
    }
}

pub fn cmd_check(doc: &RunConfigDocument, out: &mut dyn Write) -> Result<bool, CliError> {
    let parts = doc.plant_doc()?.parts()?;
    let checks = parts
        .assumptions()
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let mut all = true;
    for c in &checks {
        writeln!(out, "[{}] {}", mark(c.holds), c.name).map_err(io_err)?;
        all &= c.holds;
    }
    if let Some(kdoc) = &doc.controller {
        let k = kdoc.controller()?;
        if !all {
            writeln!(out, "controller not checked: plant assumptions fail").map_err(io_err)?;
            return Ok(false);
        }
        let plant = Plant::new(parts).map_err(CliError::domain)?;
        let report = is_admissible(&plant, &k, DEFAULT_RANK_TOL).map_err(CliError::domain)?;
        writeln!(
            out,
            "[{}] closed loop stabilizing (spectral abscissa {:.6e})",
            mark(report.stabilizing),
            report.spectral_abscissa
        )
        .map_err(io_err)?;
        writeln!(
            out,
            "[{}] controller minimal (min singular values: controllability {:.3e}, observability {:.3e})",
            mark(report.minimal),
            report.min_sv_ctrb,
            report.min_sv_obsv
        )
        .map_err(io_err)?;
        all &= report.is_admissible();
    }
    Ok(all)
}

fn optimal_cost(plant: &Plant, out: &mut dyn Write) -> Result<Option<f64>, CliError> {
    match lqg_riccati_optimum(plant) {
        Ok(opt) => Ok(Some(opt.cost)),
        Err(e) => {
            writeln!(out, "oracle unavailable ({e}); gaps left empty").map_err(io_err)?;
            Ok(None)
        }
    }
}

pub fn cmd_solve(
    doc: &RunConfigDocument,
    args: &CommonArgs,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let plant = doc.plant_doc()?.plant()?;
    let config = doc.optimizer_config(args.seed)?;
    let k0 = match &doc.controller {
        Some(kdoc) => kdoc.controller()?,
        None => random_minimal_init(&plant, &mut ChaCha8Rng::seed_from_u64(config.seed))
            .map_err(CliError::domain)?,
    };
    let j_star = optimal_cost(&plant, out)?;
    let trace = run(&plant, &k0, &config, j_star).map_err(CliError::domain)?;

    let trace_path = resolve(&args.out_dir, doc.output.trace_path.as_ref(), "trace.csv");
    let controller_path = resolve(
        &args.out_dir,
        doc.output.controller_path.as_ref(),
        "controller.toml",
    );
    write_file(&trace_path, &trace_to_string(&trace.records))?;
    write_file(
        &controller_path,
        &ControllerDoc::from_controller(&trace.final_controller).to_toml(),
    )?;

    let last = trace.last();
    writeln!(out, "algorithm: {}", config.algorithm.name()).map_err(io_err)?;
    writeln!(out, "termination: {}", trace.termination).map_err(io_err)?;
    writeln!(out, "iterations: {}", trace.iterations()).map_err(io_err)?;
    writeln!(out, "final cost: {}", format_real(last.cost)).map_err(io_err)?;
    if let Some(gap) = last.gap {
        writeln!(out, "final gap: {}", format_real(gap)).map_err(io_err)?;
    }
    writeln!(out, "trace: {}", trace_path.display()).map_err(io_err)?;
    writeln!(out, "controller: {}", controller_path.display()).map_err(io_err)?;
    Ok(!matches!(trace.termination, Termination::Error(_)))
}

/// File-name fragment for a method label: `RGD(1,0,0)` becomes `rgd_1_0_0`.
pub fn label_slug(label: &str) -> String {
    let mut slug = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            slug.push(c.to_ascii_lowercase());
        } else if !slug.ends_with('_') {
            slug.push('_');
        }
    }
    slug.trim_end_matches('_').to_string()
}

fn compare_suite(doc: &RunConfigDocument) -> Result<Vec<BenchmarkSystem>, CliError> {
    let mut suite = doc
        .systems
        .iter()
        .map(|s| s.system())
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(fam) = &doc.random {
        suite.extend(
            random_suite(fam.n, fam.m, fam.p, fam.density, fam.seeds.iter().copied()).map_err(
                |e| match e {
                    kmlqg::Error::InvalidConfig(msg) => CliError::Parse(msg),
                    other => CliError::domain(other),
                },
            )?,
        );
    }
    if suite.is_empty() {
        if let Some(plant) = &doc.plant {
            suite.push(BenchmarkSystem::new(
                "plant",
                plant.plant()?,
                "[plant] section",
            ));
        }
    }
    if suite.is_empty() {
        return Err(CliError::Parse(
            "no systems: give [[systems]], [random] or [plant]".into(),
        ));
    }
    let mut names: Vec<&str> = suite.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Parse(format!("duplicate system name '{}'", w[0])));
    }
    Ok(suite)
}

pub fn cmd_compare(
    doc: &RunConfigDocument,
    args: &CommonArgs,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let suite = compare_suite(doc)?;
    let base = doc.optimizer_config(args.seed)?;
    let mut config = ExperimentConfig {
        seed: base.seed,
        base,
        ..Default::default()
    };
    if let Some(labels) = doc.compare.as_ref().and_then(|c| c.methods.as_ref()) {
        config.methods = labels
            .iter()
            .map(|l| parse_method(l))
            .collect::<Result<_, _>>()?;
    }
    let result = run_experiment(&suite, &config).map_err(CliError::domain)?;

    let mut all_ok = true;
    let mut files = Vec::new();
    for cell in &result.cells {
        let label = cell.method.label();
        match &cell.outcome {
            CellOutcome::Finished(trace) => {
                let path = args
                    .out_dir
                    .join(format!("{}_{}.csv", cell.system, label_slug(&label)));
                files.push((path, trace_to_string(&trace.records)));
                writeln!(
                    out,
                    "{} {}: {} after {} iterations",
                    cell.system,
                    label,
                    trace.termination,
                    trace.iterations()
                )
                .map_err(io_err)?;
                all_ok &= !matches!(trace.termination, Termination::Error(_));
            }
            CellOutcome::Failed(e) => {
                writeln!(out, "{} {}: failed: {e}", cell.system, label).map_err(io_err)?;
                all_ok = false;
            }
        }
    }
    for sys in &suite {
        let k0 = result
            .cells
            .iter()
            .find(|c| c.system == sys.name)
            .and_then(|c| c.initial.as_ref());
        if let Some(k0) = k0 {
            let path = args.out_dir.join(format!("{}_k0.toml", sys.name));
            files.push((path, ControllerDoc::from_controller(k0).to_toml()));
        }
    }
    let mut summary = Vec::new();
    write_summary(&result.summary(), &mut summary)?;
    let summary_path = resolve(
        &args.out_dir,
        doc.output.summary_path.as_ref(),
        "summary.csv",
    );
    files.push((
        summary_path.clone(),
        String::from_utf8(summary).expect("CSV output is ASCII"),
    ));

    for (path, contents) in &files {
        write_file(path, contents)?;
    }
    writeln!(out, "summary: {}", summary_path.display()).map_err(io_err)?;
    Ok(all_ok)
}

pub fn cmd_oracle(
    doc: &RunConfigDocument,
    args: &CommonArgs,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let plant = doc.plant_doc()?.plant()?;
    let opt = lqg_riccati_optimum(&plant).map_err(CliError::domain)?;
    let path = resolve(
        &args.out_dir,
        doc.output.controller_path.as_ref(),
        "oracle_controller.toml",
    );
    write_file(
        &path,
        &ControllerDoc::from_controller(&opt.controller).to_toml(),
    )?;
    writeln!(out, "J* = {}", format_significant(opt.cost, 12)).map_err(io_err)?;
    writeln!(out, "controller: {}", path.display()).map_err(io_err)?;
    Ok(true)
}

pub fn cmd_hess_check(doc: &RunConfigDocument, out: &mut dyn Write) -> Result<bool, CliError> {
    let plant = doc.plant_doc()?.plant()?;
    let step = doc
        .hessian
        .as_ref()
        .and_then(|h| h.step)
        .unwrap_or(DEFAULT_HESSIAN_STEP);
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Parse(format!(
            "hessian step must be positive, got {step}"
        )));
    }
    let report = hessian_signature_check(&plant, step).map_err(CliError::domain)?;
    writeln!(out, "{report}").map_err(io_err)?;
    Ok(report.is_expected())
}
