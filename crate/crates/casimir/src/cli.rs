//! Command-line front end: `sweep`, `validate` and `materials`.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical-convergence
//! failures. Progress goes to standard error; data goes to the CSV file and
//! standard output only, and identical inputs produce byte-identical CSV
//! regardless of worker count.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{ConfigError, RunConfig};
use crate::materials::{eval_permittivity, Prescription};
use crate::pfa::{self, SweepResult};
use crate::validation::{self, LimitSuiteConfig};

pub const SWEEP_CSV_HEADER: &str = "a_um,deltaF_fN_drude,deltaF_fN_plasma,\
deltaFprime_1e8Npm_drude,deltaFprime_1e8Npm_plasma,\
F_si_N_drude,F_au_N_drude,F_si_N_plasma,F_au_N_plasma,err_flag";

#[derive(Debug, Parser)]
#[command(
    name = "casimir",
    version,
    about = "Thermal Casimir force differences for a sphere over a split slab"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep separations; write dF and dF' curves for both prescriptions.
    Sweep {
        /// Run configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (overrides the config's [output] path).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for sweep points (default: one per core).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=512))]
        workers: Option<u64>,
    },
    /// Check the engine against closed-form limits.
    Validate {
        /// Multiply every case tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Also write the report to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Tabulate permittivities along the imaginary frequency axis.
    Materials {
        /// Run configuration file naming the materials.
        #[arg(long)]
        config: PathBuf,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Sweep { config, out, workers } => cmd_sweep(&config, out.as_deref(), workers),
        Command::Validate { tol_scale, csv } => cmd_validate(tol_scale, csv.as_deref()),
        Command::Materials { config, out } => cmd_materials(&config, out.as_deref()),
    }
}

fn load_config(path: &Path) -> Result<RunConfig, i32> {
    RunConfig::load(path).map_err(|err| {
        eprintln!("config error in {}: {err}", path.display());
        report_cause_chain(&err);
        1
    })
}

fn report_cause_chain(err: &ConfigError) {
    let mut source = std::error::Error::source(err);
    while let Some(cause) = source {
        eprintln!("  caused by: {cause}");
        source = cause.source();
    }
}

fn cmd_sweep(config_path: &Path, out: Option<&Path>, workers: Option<u64>) -> i32 {
    let config = match load_config(config_path) {
        Ok(config) => config,
        Err(code) => return code,
    };
    let out_path = out.unwrap_or(&config.output_path);

    let separations = config.sweep.separations();
    let total = separations.len();
    let done = AtomicUsize::new(0);

    let evaluate = |a: f64| -> (SweepResult, SweepResult) {
        let drude = pfa::sweep_point(
            a,
            &config.geometry,
            &config.thermal_spec(Prescription::Drude),
            &config.quadrature,
        );
        let plasma = pfa::sweep_point(
            a,
            &config.geometry,
            &config.thermal_spec(Prescription::Plasma),
            &config.quadrature,
        );
        let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
        eprintln!("swept a = {:.4} um ({finished}/{total})", a * 1e6);
        (drude, plasma)
    };

    // Results collect in grid order whatever the execution order.
    let results: Vec<(SweepResult, SweepResult)> = match workers {
        Some(n) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(n as usize).build() {
                Ok(pool) => pool,
                Err(err) => {
                    eprintln!("cannot build a {n}-thread pool: {err}");
                    return 1;
                }
            };
            pool.install(|| separations.par_iter().map(|&a| evaluate(a)).collect())
        }
        None => separations.par_iter().map(|&a| evaluate(a)).collect(),
    };

    let csv = render_sweep_csv(&results);
    if let Err(err) = std::fs::write(out_path, csv) {
        eprintln!("cannot write {}: {err}", out_path.display());
        return 1;
    }

    print!("{}", render_sweep_summary(&config, &results));
    println!("wrote {}", out_path.display());

    let failures = results.iter().filter(|(d, p)| !d.converged || !p.converged).count();
    if failures > 0 {
        eprintln!("{failures} of {total} sweep points did not converge (err_flag = 1)");
        2
    } else {
        0
    }
}

fn render_sweep_csv(results: &[(SweepResult, SweepResult)]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for (drude, plasma) in results {
        let err_flag = u8::from(!drude.converged || !plasma.converged);
        out.push_str(&format!(
            "{:.6},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{err_flag}\n",
            drude.separation * 1e6,
            drude.delta_f * 1e15,
            plasma.delta_f * 1e15,
            drude.delta_f_prime * 1e8,
            plasma.delta_f_prime * 1e8,
            drude.f_si,
            drude.f_au,
            plasma.f_si,
            plasma.f_au,
        ));
    }
    out
}

fn render_sweep_summary(config: &RunConfig, results: &[(SweepResult, SweepResult)]) -> String {
    let geometry = &config.geometry;
    let mut out = format!(
        "apparatus: R = {:.1} um, w_si = {:.0} nm, w_au = {:.0} nm, step = {:.0} nm, T = {:.1} K\n",
        geometry.sphere_radius * 1e6,
        geometry.overlayer_thickness_si_side * 1e9,
        geometry.overlayer_thickness_au_side * 1e9,
        geometry.step_height * 1e9,
        config.temperature,
    );
    out.push_str(&format!(
        "{:>8}  {:>7}  {:>13}  {:>13}  {:>8}  {:>14}  {:>14}  {:>3}\n",
        "a_um", "rho_um", "|dF|dr_fN", "|dF|pl_fN", "ratio", "|dF'|dr_e-8", "|dF'|pl_e-8", "err"
    ));
    for (drude, plasma) in results {
        let rho = pfa::interaction_radius(drude.separation, geometry.sphere_radius);
        out.push_str(&format!(
            "{:>8.4}  {:>7.2}  {:>13.6e}  {:>13.6e}  {:>8.2}  {:>14.6e}  {:>14.6e}  {:>3}\n",
            drude.separation * 1e6,
            rho * 1e6,
            drude.delta_f.abs() * 1e15,
            plasma.delta_f.abs() * 1e15,
            (plasma.delta_f / drude.delta_f).abs(),
            drude.delta_f_prime.abs() * 1e8,
            plasma.delta_f_prime.abs() * 1e8,
            if drude.converged && plasma.converged { 0 } else { 1 },
        ));
    }
    out
}

fn cmd_validate(tol_scale: f64, csv: Option<&Path>) -> i32 {
    if !(tol_scale.is_finite() && tol_scale > 0.0) {
        eprintln!("--tol-scale must be positive, got {tol_scale}");
        return 1;
    }
    let config = LimitSuiteConfig { tolerance_scale: tol_scale, ..LimitSuiteConfig::default() };
    let reports = validation::run_limit_suite(&config);
    print!("{}", validation::format_report_table(&reports));
    if let Some(path) = csv {
        if let Err(err) = std::fs::write(path, validation::report_csv(&reports)) {
            eprintln!("cannot write {}: {err}", path.display());
            return 1;
        }
    }
    if reports.iter().all(|report| report.passed) {
        0
    } else {
        2
    }
}

/// Frequency grid for `materials`: 20 points per decade over 1e12..1e18 rad/s.
fn materials_grid() -> Vec<f64> {
    let decades = 6;
    let per_decade = 20;
    (0..=decades * per_decade)
        .map(|i| 1.0e12 * 10f64.powf(i as f64 / per_decade as f64))
        .collect()
}

fn cmd_materials(config_path: &Path, out: Option<&Path>) -> i32 {
    let config = match load_config(config_path) {
        Ok(config) => config,
        Err(code) => return code,
    };

    let mut failures = 0usize;
    let mut csv = String::from("xi_rad_s");
    for name in config.materials.keys() {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    for xi in materials_grid() {
        csv.push_str(&format!("{xi:.6e}"));
        for (name, model) in &config.materials {
            match eval_permittivity(model, xi) {
                Ok(eps) => csv.push_str(&format!(",{eps:.9e}")),
                Err(err) => {
                    eprintln!("material '{name}' failed at xi = {xi:.3e} rad/s: {err}");
                    csv.push_str(",NaN");
                    failures += 1;
                }
            }
        }
        csv.push('\n');
    }

    match out {
        Some(path) => {
            if let Err(err) = std::fs::write(path, csv) {
                eprintln!("cannot write {}: {err}", path.display());
                return 1;
            }
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }

    if failures > 0 {
        2
    } else {
        0
    }
}
