//! Closed-form limits of the dispersion interaction and a self-check suite
//! that runs the full engine against them.

use std::sync::Arc;

use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT, ZETA_3};
use crate::lifshitz::{self, GapConfiguration, QuadratureSpec, ThermalSpec};
use crate::materials::{gold, DispersionModel, Prescription};
use crate::strata::LayerStack;

/// Zero-temperature pressure magnitude between perfectly reflecting plates,
/// pi^2 hbar c / (240 a^4).
pub fn ideal_mirror_pressure(separation: f64) -> f64 {
    let a2 = separation * separation;
    std::f64::consts::PI.powi(2) * HBAR * SPEED_OF_LIGHT / (240.0 * a2 * a2)
}

/// Large-separation pressure magnitude between ohmic conductors,
/// zeta(3) k_B T / (8 pi a^3); the dissipationless prescription doubles it.
pub fn classical_limit_pressure(separation: f64, temperature: f64, prescription: Prescription) -> f64 {
    let base = ZETA_3 * BOLTZMANN * temperature
        / (8.0 * std::f64::consts::PI * separation.powi(3));
    match prescription {
        Prescription::Drude => base,
        Prescription::Plasma => 2.0 * base,
    }
}

/// Crossover scale between zero-point and thermal regimes, hbar c / (2 pi k_B T).
pub fn thermal_length(temperature: f64) -> f64 {
    HBAR * SPEED_OF_LIGHT / (2.0 * std::f64::consts::PI * BOLTZMANN * temperature)
}

/// One limit check: an engine run compared to its closed-form oracle.
#[derive(Debug, Clone)]
pub struct LimitReport {
    pub name: &'static str,
    pub computed: f64,
    pub oracle: f64,
    pub relative_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Controls for the limit suite; tolerances scale with `tolerance_scale`.
#[derive(Debug, Clone)]
pub struct LimitSuiteConfig {
    pub quadrature: QuadratureSpec,
    pub matsubara_rel_tol: f64,
    pub matsubara_min_terms: usize,
    pub matsubara_max_terms: usize,
    pub tolerance_scale: f64,
}

impl Default for LimitSuiteConfig {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default(),
            matsubara_rel_tol: 1e-10,
            matsubara_min_terms: 10,
            matsubara_max_terms: 100_000,
            tolerance_scale: 1.0,
        }
    }
}

impl LimitSuiteConfig {
    fn thermal(&self, temperature: f64, prescription: Prescription) -> ThermalSpec {
        let mut spec = ThermalSpec::new(temperature, prescription);
        spec.matsubara_rel_tol = self.matsubara_rel_tol;
        spec.matsubara_min_terms = self.matsubara_min_terms;
        spec.matsubara_max_terms = self.matsubara_max_terms;
        spec
    }
}

/// Run every registered limit case against the engine. Individual failures
/// (numerical or out-of-tolerance) are reported, never fatal.
pub fn run_limit_suite(config: &LimitSuiteConfig) -> Vec<LimitReport> {
    let mut reports = Vec::new();

    // Near-perfect mirrors: reflective far beyond the gap scale
    // (plasma wavelength < a/1000) and cold enough that the thermal length
    // exceeds 1000 a, so the zero-temperature formula applies.
    {
        let a = 1.0e-6;
        let mirror = match DispersionModel::plasma(3.0e18) {
            Ok(model) => Arc::new(model),
            Err(_) => unreachable!("fixed positive plasma frequency"),
        };
        let gap = GapConfiguration::new(
            LayerStack::half_space(mirror.clone()),
            LayerStack::half_space(mirror),
            a,
        );
        let computed = lifshitz::pressure(&gap, &config.thermal(0.3, Prescription::Plasma), &config.quadrature)
            .map(|eval| -eval.value)
            .unwrap_or(f64::NAN);
        reports.push(grade("ideal-mirror pressure, a = 1 um", computed, ideal_mirror_pressure(a), 5e-3, config));
    }

    // Classical limit: ohmic metal half-spaces at ten thermal lengths.
    {
        let t = 300.0;
        let a = 10.0 * thermal_length(t);
        let gap = GapConfiguration::new(
            LayerStack::half_space(Arc::new(gold())),
            LayerStack::half_space(Arc::new(gold())),
            a,
        );
        for (name, prescription, tol) in [
            ("classical pressure, ohmic", Prescription::Drude, 2e-2),
            ("classical pressure, dissipationless", Prescription::Plasma, 5e-2),
        ] {
            let computed = lifshitz::pressure(&gap, &config.thermal(t, prescription), &config.quadrature)
                .map(|eval| -eval.value)
                .unwrap_or(f64::NAN);
            reports.push(grade(name, computed, classical_limit_pressure(a, t, prescription), tol, config));
        }
    }

    // Thermal length against its commonly quoted rounded value.
    reports.push(grade("thermal length at 300 K", thermal_length(300.0), 1.2e-6, 2e-2, config));

    reports
}

fn grade(
    name: &'static str,
    computed: f64,
    oracle: f64,
    base_tolerance: f64,
    config: &LimitSuiteConfig,
) -> LimitReport {
    let relative_deviation = ((computed - oracle) / oracle).abs();
    let tolerance = base_tolerance * config.tolerance_scale;
    LimitReport {
        name,
        computed,
        oracle,
        relative_deviation,
        tolerance,
        passed: relative_deviation.is_finite() && relative_deviation < tolerance,
    }
}

/// Aligned text table of suite results.
pub fn format_report_table(reports: &[LimitReport]) -> String {
    let name_width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut out = format!(
        "{:<name_width$}  {:>13}  {:>13}  {:>9}  {:>9}  result\n",
        "case", "computed", "oracle", "rel dev", "tol"
    );
    for report in reports {
        out.push_str(&format!(
            "{:<name_width$}  {:>13.6e}  {:>13.6e}  {:>9.2e}  {:>9.2e}  {}\n",
            report.name,
            report.computed,
            report.oracle,
            report.relative_deviation,
            report.tolerance,
            if report.passed { "pass" } else { "FAIL" },
        ));
    }
    out
}

/// Machine-readable CSV of suite results.
pub fn report_csv(reports: &[LimitReport]) -> String {
    let mut out = String::from("case,computed,oracle,relative_deviation,tolerance,pass\n");
    for report in reports {
        out.push_str(&format!(
            "{},{:.9e},{:.9e},{:.3e},{:.3e},{}\n",
            report.name,
            report.computed,
            report.oracle,
            report.relative_deviation,
            report.tolerance,
            report.passed,
        ));
    }
    out
}
