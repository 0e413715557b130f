//! Finite-temperature dispersion interaction between two layered bodies
//! separated by a vacuum gap.
//!
//! The free energy per unit area is a sum over Matsubara frequencies
//! xi_l = 2 pi l k_B T / hbar (the l = 0 term at half weight) of a
//! transverse-wavenumber integral over log(1 - e^{-2 a q} R1 R2) for both
//! polarizations. Pressure and its gradient use the analytic separation
//! derivatives of the same integrand, never finite differences.
//!
//! Numerics: the substitution y = 2 a q_l turns every integral into one over
//! [2 a xi_l / c, infinity) with an explicit e^{-y} envelope; the domain is
//! truncated where that envelope is below 1e-18 relative to the start and
//! handed to the adaptive panel rule. Matsubara terms are accumulated in
//! increasing l and truncated once three consecutive terms fall below
//! `matsubara_rel_tol` relative to the running sum. Evaluations are
//! deterministic: same inputs, same bits.

use thiserror::Error;

use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT};
use crate::materials::Prescription;
use crate::quad::{self, QuadOutcome};
use crate::strata::{LayerStack, Polarization, StackAtFrequency, StackAtZero, StrataError};

/// Envelope cut: e^{-48} ~ 1.4e-21 leaves the truncated tail far below any
/// attainable relative tolerance even against the cubic integrand weight.
const ENVELOPE_SPAN: f64 = 48.0;

/// Seed panel edges (offsets from the lower limit). The integrand rises from
/// the endpoint, peaks within a few units and decays exponentially.
const SEED_OFFSETS: [f64; 6] = [0.0, 0.5, 2.0, 6.0, 16.0, ENVELOPE_SPAN];

/// How many consecutive negligible Matsubara terms end the sum.
const TRUNCATION_STREAK: u32 = 3;

#[derive(Debug, Error)]
pub enum LifshitzError {
    #[error(transparent)]
    Strata(#[from] StrataError),
    #[error("invalid evaluation parameters: {0}")]
    InvalidSpec(String),
    #[error(
        "transverse integral did not converge at Matsubara order {order} \
         (partial value {partial_value:e}, error estimate {error_estimate:e})"
    )]
    QuadratureNotConverged { order: usize, partial_value: f64, error_estimate: f64 },
    #[error(
        "Matsubara sum still changing after {max_terms} terms \
         (partial value {partial_value:e}, last term {last_term:e})"
    )]
    MatsubaraNotConverged { max_terms: usize, partial_value: f64, last_term: f64 },
}

impl LifshitzError {
    /// Best value available despite the failure, in the units of the
    /// requested quantity. Sweeps report it alongside an error flag.
    pub fn partial_value(&self) -> Option<f64> {
        match self {
            LifshitzError::QuadratureNotConverged { partial_value, .. }
            | LifshitzError::MatsubaraNotConverged { partial_value, .. } => Some(*partial_value),
            _ => None,
        }
    }
}

/// Temperature and the handling of the Matsubara sum.
#[derive(Debug, Clone, Copy)]
pub struct ThermalSpec {
    /// Kelvin.
    pub temperature: f64,
    /// Treatment of the zero-frequency TE term.
    pub prescription: Prescription,
    /// Relative threshold under which a term counts as negligible.
    pub matsubara_rel_tol: f64,
    /// Terms always summed before truncation is considered.
    pub matsubara_min_terms: usize,
    /// Hard cap on summed terms.
    pub matsubara_max_terms: usize,
}

impl ThermalSpec {
    pub fn new(temperature: f64, prescription: Prescription) -> Self {
        Self {
            temperature,
            prescription,
            matsubara_rel_tol: 1e-10,
            matsubara_min_terms: 10,
            matsubara_max_terms: 100_000,
        }
    }

    fn validate(&self) -> Result<(), LifshitzError> {
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(LifshitzError::InvalidSpec(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !(self.matsubara_rel_tol > 0.0 && self.matsubara_rel_tol < 1.0) {
            return Err(LifshitzError::InvalidSpec(format!(
                "matsubara_rel_tol must lie in (0, 1), got {}",
                self.matsubara_rel_tol
            )));
        }
        if self.matsubara_min_terms < 2 || self.matsubara_min_terms > self.matsubara_max_terms {
            return Err(LifshitzError::InvalidSpec(format!(
                "need 2 <= matsubara_min_terms <= matsubara_max_terms, got {} and {}",
                self.matsubara_min_terms, self.matsubara_max_terms
            )));
        }
        Ok(())
    }
}

/// Transverse-integral control.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Relative tolerance per Matsubara-term integral.
    pub rel_tol: f64,
    /// Absolute floor on the result, J/m^2 for free energy (scaled by 1/a
    /// per separation derivative for pressure and gradient). Zero disables.
    pub abs_tol: f64,
    /// Panel-bisection budget per integral.
    pub max_subdivisions: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 0.0, max_subdivisions: 200 }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<(), LifshitzError> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(LifshitzError::InvalidSpec(format!(
                "quadrature rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= 0.0 && self.abs_tol.is_finite()) {
            return Err(LifshitzError::InvalidSpec(format!(
                "quadrature abs_tol must be non-negative, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions < 8 {
            return Err(LifshitzError::InvalidSpec(format!(
                "max_subdivisions must be at least 8, got {}",
                self.max_subdivisions
            )));
        }
        Ok(())
    }
}

/// Two stacks facing each other across a vacuum gap of width `separation`.
#[derive(Debug, Clone)]
pub struct GapConfiguration {
    pub stack_left: LayerStack,
    pub stack_right: LayerStack,
    /// Meters, > 0.
    pub separation: f64,
}

impl GapConfiguration {
    pub fn new(left: LayerStack, right: LayerStack, separation: f64) -> Self {
        Self { stack_left: left, stack_right: right, separation }
    }

    fn validate(&self) -> Result<(), LifshitzError> {
        if !(self.separation.is_finite() && self.separation > 0.0) {
            return Err(LifshitzError::InvalidSpec(format!(
                "separation must be positive, got {:e}",
                self.separation
            )));
        }
        Ok(())
    }
}

/// A converged evaluation: the value plus its numerical diagnostics
/// (accumulated quadrature error estimate and a bound on the truncated
/// Matsubara tail, both in the value's units).
#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub value: f64,
    pub quadrature_error: f64,
    pub matsubara_tail: f64,
    pub terms_used: usize,
}

impl Evaluation {
    /// Combined absolute uncertainty.
    pub fn error_estimate(&self) -> f64 {
        self.quadrature_error + self.matsubara_tail
    }
}

/// Matsubara frequency xi_l = 2 pi l k_B T / hbar, rad/s.
pub fn matsubara_frequency(order: usize, temperature: f64) -> f64 {
    2.0 * std::f64::consts::PI * order as f64 * BOLTZMANN * temperature / HBAR
}

/// Free energy per unit area of the gap, J/m^2 (non-positive).
pub fn free_energy_per_area(
    gap: &GapConfiguration,
    thermal: &ThermalSpec,
    quad_spec: &QuadratureSpec,
) -> Result<Evaluation, LifshitzError> {
    evaluate(Observable::FreeEnergy, gap, thermal, quad_spec)
}

/// Pressure on the bodies, N/m^2; negative values attract. Computed from the
/// analytic first separation derivative of the free energy integrand.
pub fn pressure(
    gap: &GapConfiguration,
    thermal: &ThermalSpec,
    quad_spec: &QuadratureSpec,
) -> Result<Evaluation, LifshitzError> {
    evaluate(Observable::Pressure, gap, thermal, quad_spec)
}

/// Separation derivative of the pressure, N/m^3 (positive for attractive
/// configurations). Analytic second derivative of the free energy integrand.
pub fn pressure_gradient(
    gap: &GapConfiguration,
    thermal: &ThermalSpec,
    quad_spec: &QuadratureSpec,
) -> Result<Evaluation, LifshitzError> {
    evaluate(Observable::PressureGradient, gap, thermal, quad_spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Observable {
    FreeEnergy,
    Pressure,
    PressureGradient,
}

impl Observable {
    /// Maps the raw y-integral sum to the physical quantity. The integrand
    /// weights are y, y^2, y^3; each separation derivative contributes a
    /// factor -1/(2a) absorbed here.
    fn result_factor(self, separation: f64, temperature: f64) -> f64 {
        let thermal_weight = BOLTZMANN * temperature / (2.0 * std::f64::consts::PI);
        let a2 = separation * separation;
        match self {
            Observable::FreeEnergy => thermal_weight / (4.0 * a2),
            Observable::Pressure => -thermal_weight / (4.0 * a2 * separation),
            Observable::PressureGradient => thermal_weight / (4.0 * a2 * a2),
        }
    }

    /// Absolute tolerance floor in result units.
    fn abs_floor(self, abs_tol: f64, separation: f64) -> f64 {
        match self {
            Observable::FreeEnergy => abs_tol,
            Observable::Pressure => abs_tol / separation,
            Observable::PressureGradient => abs_tol / (separation * separation),
        }
    }
}

/// Reflection sources for one Matsubara term.
enum Reflector {
    Dynamic { left: StackAtFrequency, right: StackAtFrequency },
    /// The zero-frequency term: the TM part always uses the declared
    /// material response; the prescription only redefines the TE part.
    Static {
        te_left: StackAtZero,
        te_right: StackAtZero,
        tm_left: StackAtZero,
        tm_right: StackAtZero,
    },
}

impl Reflector {
    #[inline]
    fn product(&self, pol: Polarization, kperp: f64) -> f64 {
        match self {
            Reflector::Dynamic { left, right } => {
                left.reflection(pol, kperp) * right.reflection(pol, kperp)
            }
            Reflector::Static { te_left, te_right, tm_left, tm_right } => match pol {
                Polarization::Te => {
                    te_left.reflection(pol, kperp) * te_right.reflection(pol, kperp)
                }
                Polarization::Tm => {
                    tm_left.reflection(pol, kperp) * tm_right.reflection(pol, kperp)
                }
            },
        }
    }
}

fn evaluate(
    observable: Observable,
    gap: &GapConfiguration,
    thermal: &ThermalSpec,
    quad_spec: &QuadratureSpec,
) -> Result<Evaluation, LifshitzError> {
    gap.validate()?;
    thermal.validate()?;
    quad_spec.validate()?;

    let a = gap.separation;
    let factor = observable.result_factor(a, thermal.temperature);
    // Budget for the abs_tol floor, distributed geometrically over terms.
    let floor_total = observable.abs_floor(quad_spec.abs_tol, a) / factor.abs();

    let mut sum = 0.0;
    let mut quad_error = 0.0;
    let mut magnitudes = (0.0f64, 0.0f64); // (previous, last) term magnitudes
    let mut streak = 0u32;
    let mut outcome_tail = f64::NAN;

    let mut terms_used = 0usize;
    for order in 0..thermal.matsubara_max_terms {
        let xi = matsubara_frequency(order, thermal.temperature);
        let reflector = if order == 0 {
            Reflector::Static {
                te_left: gap.stack_left.at_zero_frequency(thermal.prescription),
                te_right: gap.stack_right.at_zero_frequency(thermal.prescription),
                tm_left: gap.stack_left.at_zero_frequency(Prescription::Drude),
                tm_right: gap.stack_right.at_zero_frequency(Prescription::Drude),
            }
        } else {
            Reflector::Dynamic {
                left: gap.stack_left.at_frequency(xi)?,
                right: gap.stack_right.at_frequency(xi)?,
            }
        };

        let weight = if order == 0 { 0.5 } else { 1.0 };
        let floor = floor_total * 0.125 * 0.5f64.powi((order as i32).min(57));
        let outcome = term_integral(observable, &reflector, a, xi, quad_spec, floor);
        let term = weight * outcome.value;

        if !outcome.converged {
            return Err(LifshitzError::QuadratureNotConverged {
                order,
                partial_value: factor * (sum + term),
                error_estimate: factor.abs() * (quad_error + weight * outcome.error),
            });
        }

        sum += term;
        quad_error += weight * outcome.error;
        magnitudes = (magnitudes.1, term.abs());
        terms_used = order + 1;

        if term.abs() <= thermal.matsubara_rel_tol * sum.abs() {
            streak += 1;
        } else {
            streak = 0;
        }
        if streak >= TRUNCATION_STREAK && terms_used >= thermal.matsubara_min_terms {
            outcome_tail = tail_bound(magnitudes);
            break;
        }
    }

    if outcome_tail.is_nan() {
        return Err(LifshitzError::MatsubaraNotConverged {
            max_terms: thermal.matsubara_max_terms,
            partial_value: factor * sum,
            last_term: factor.abs() * magnitudes.1,
        });
    }

    Ok(Evaluation {
        value: factor * sum,
        quadrature_error: factor.abs() * quad_error,
        matsubara_tail: factor.abs() * outcome_tail,
        terms_used,
    })
}

/// Bound the dropped tail by geometric extrapolation of the last two term
/// magnitudes. Past the truncation point terms decay at least exponentially
/// in l, so the observed ratio is a safe overestimate of the tail ratio.
fn tail_bound((previous, last): (f64, f64)) -> f64 {
    if last == 0.0 {
        return 0.0;
    }
    if previous > last {
        let ratio = last / previous;
        last * ratio / (1.0 - ratio)
    } else {
        // Non-decreasing magnitudes at the truncation point: be pessimistic.
        last * TRUNCATION_STREAK as f64
    }
}

/// The y-integral of one Matsubara term, in raw units (multiply by the
/// observable's result factor and the l = 0 half-weight outside).
fn term_integral(
    observable: Observable,
    reflector: &Reflector,
    separation: f64,
    xi: f64,
    quad_spec: &QuadratureSpec,
    abs_floor: f64,
) -> QuadOutcome {
    let y_min = 2.0 * separation * xi / SPEED_OF_LIGHT;
    let breakpoints: Vec<f64> = SEED_OFFSETS.iter().map(|o| y_min + o).collect();
    let inv_2a = 1.0 / (2.0 * separation);
    let xi_over_c = xi / SPEED_OF_LIGHT;

    quad::integrate(
        |y| {
            let q = y * inv_2a;
            let kperp = (q * q - xi_over_c * xi_over_c).max(0.0).sqrt();
            let damp = (-y).exp();
            let mut acc = 0.0;
            for pol in [Polarization::Te, Polarization::Tm] {
                let x = damp * reflector.product(pol, kperp);
                acc += match observable {
                    Observable::FreeEnergy => (-x).ln_1p(),
                    Observable::Pressure => x / (1.0 - x),
                    Observable::PressureGradient => x / ((1.0 - x) * (1.0 - x)),
                };
            }
            let weight = match observable {
                Observable::FreeEnergy => y,
                Observable::Pressure => y * y,
                Observable::PressureGradient => y * y * y,
            };
            weight * acc
        },
        &breakpoints,
        quad_spec.rel_tol,
        abs_floor,
        quad_spec.max_subdivisions,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT, ZETA_3};
    use crate::materials::{gold, DispersionModel};
    use crate::strata::LayerStack;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn gold_gap(separation: f64) -> GapConfiguration {
        GapConfiguration::new(
            LayerStack::half_space(Arc::new(gold())),
            LayerStack::half_space(Arc::new(gold())),
            separation,
        )
    }

    #[test]
    fn matsubara_frequencies() {
        assert_eq!(matsubara_frequency(0, 300.0), 0.0);
        let xi_1 = matsubara_frequency(1, 300.0);
        let direct = 2.0 * std::f64::consts::PI * 1.380649e-23 * 300.0 / 1.054571817e-34;
        assert_relative_eq!(xi_1, direct, max_relative = 1e-15);
        assert_relative_eq!(xi_1, 2.47e14, max_relative = 2e-3);
        assert_relative_eq!(matsubara_frequency(7, 300.0), 7.0 * xi_1, max_relative = 1e-15);
    }

    #[test]
    fn vacuum_gap_has_no_interaction() {
        let gap = GapConfiguration::new(
            LayerStack::half_space(Arc::new(DispersionModel::vacuum())),
            LayerStack::half_space(Arc::new(DispersionModel::vacuum())),
            1.0e-6,
        );
        let thermal = ThermalSpec::new(300.0, Prescription::Drude);
        let quad_spec = QuadratureSpec::default();
        for op in [free_energy_per_area, pressure, pressure_gradient] {
            let eval = op(&gap, &thermal, &quad_spec).unwrap();
            assert_eq!(eval.value, 0.0);
            assert_eq!(eval.matsubara_tail, 0.0);
        }
    }

    #[test]
    fn near_perfect_mirrors_approach_the_zero_point_pressure() {
        // Reflective far beyond the gap scale, cold enough that thermal
        // corrections are negligible: |P| -> pi^2 hbar c / (240 a^4).
        let a = 1.0e-6;
        let wp = 1.0e4 * SPEED_OF_LIGHT / a;
        let mirror = Arc::new(DispersionModel::plasma(wp).unwrap());
        let gap = GapConfiguration::new(
            LayerStack::half_space(mirror.clone()),
            LayerStack::half_space(mirror),
            a,
        );
        let thermal = ThermalSpec::new(1.0, Prescription::Plasma);
        let eval = pressure(&gap, &thermal, &QuadratureSpec::default()).unwrap();

        let ideal = std::f64::consts::PI.powi(2) * HBAR * SPEED_OF_LIGHT / (240.0 * a.powi(4));
        assert!(eval.value < 0.0);
        assert_relative_eq!(-eval.value, ideal, max_relative = 5e-3);
    }

    #[test]
    fn classical_limit_of_ohmic_mirrors() {
        // At a >> thermal length only the l = 0 TM term survives; for Drude
        // conductors it gives zeta(3) k_B T / (8 pi a^3).
        let a = 10.0e-6;
        let t = 300.0;
        let gap = gold_gap(a);
        let classical = ZETA_3 * BOLTZMANN * t / (8.0 * std::f64::consts::PI * a.powi(3));

        let drude = pressure(&gap, &ThermalSpec::new(t, Prescription::Drude), &QuadratureSpec::default())
            .unwrap();
        assert_relative_eq!(-drude.value, classical, max_relative = 2e-2);

        let plasma =
            pressure(&gap, &ThermalSpec::new(t, Prescription::Plasma), &QuadratureSpec::default())
                .unwrap();
        assert_relative_eq!(-plasma.value, 2.0 * classical, max_relative = 5e-2);

        // Slope of the universal limit: d/da of zeta(3) k_B T / (8 pi a^3).
        let slope = 3.0 * classical / a;
        let gradient =
            pressure_gradient(&gap, &ThermalSpec::new(t, Prescription::Drude), &QuadratureSpec::default())
                .unwrap();
        assert_relative_eq!(gradient.value, slope, max_relative = 3e-2);
    }

    #[test]
    fn swapping_the_stacks_changes_nothing() {
        let si = Arc::new(crate::materials::silicon());
        let au = Arc::new(gold());
        let forward = GapConfiguration::new(
            LayerStack::half_space(au.clone()),
            LayerStack::half_space(si.clone()),
            2.0e-6,
        );
        let backward = GapConfiguration::new(
            LayerStack::half_space(si),
            LayerStack::half_space(au),
            2.0e-6,
        );
        let thermal = ThermalSpec::new(300.0, Prescription::Drude);
        let quad_spec = QuadratureSpec::default();
        let f = free_energy_per_area(&forward, &thermal, &quad_spec).unwrap();
        let b = free_energy_per_area(&backward, &thermal, &quad_spec).unwrap();
        assert_eq!(f.value, b.value);
    }

    #[test]
    fn signs_and_monotonic_decay() {
        let thermal = ThermalSpec::new(300.0, Prescription::Drude);
        let quad_spec = QuadratureSpec::default();
        let mut previous_energy = f64::NEG_INFINITY;
        for a in [0.5e-6, 1.0e-6, 2.0e-6, 4.0e-6] {
            let gap = gold_gap(a);
            let energy = free_energy_per_area(&gap, &thermal, &quad_spec).unwrap().value;
            let p = pressure(&gap, &thermal, &quad_spec).unwrap().value;
            let g = pressure_gradient(&gap, &thermal, &quad_spec).unwrap().value;
            assert!(energy < 0.0 && p < 0.0 && g > 0.0, "a = {a}");
            assert!(energy > previous_energy, "|free energy| must shrink with a");
            previous_energy = energy;
        }
    }

    #[test]
    fn plasma_prescription_binds_at_least_as_strongly() {
        let quad_spec = QuadratureSpec::default();
        for a in [0.5e-6, 2.0e-6, 6.0e-6] {
            let gap = gold_gap(a);
            let drude =
                free_energy_per_area(&gap, &ThermalSpec::new(300.0, Prescription::Drude), &quad_spec)
                    .unwrap();
            let plasma =
                free_energy_per_area(&gap, &ThermalSpec::new(300.0, Prescription::Plasma), &quad_spec)
                    .unwrap();
            assert!(plasma.value <= drude.value, "a = {a}");
        }
    }

    #[test]
    fn pressure_matches_finite_difference_of_free_energy() {
        let thermal = ThermalSpec::new(300.0, Prescription::Drude);
        let quad_spec = QuadratureSpec { rel_tol: 1e-11, ..QuadratureSpec::default() };
        let a = 1.0e-6;
        let h = a * 1e-4;
        let up = free_energy_per_area(&gold_gap(a + h), &thermal, &quad_spec).unwrap().value;
        let down = free_energy_per_area(&gold_gap(a - h), &thermal, &quad_spec).unwrap().value;
        let fd = -(up - down) / (2.0 * h);
        let p = pressure(&gold_gap(a), &thermal, &quad_spec).unwrap().value;
        assert_relative_eq!(p, fd, max_relative = 1e-5);
    }

    #[test]
    fn gradient_matches_finite_difference_of_pressure() {
        let thermal = ThermalSpec::new(300.0, Prescription::Plasma);
        let quad_spec = QuadratureSpec { rel_tol: 1e-11, ..QuadratureSpec::default() };
        let a = 2.0e-6;
        let h = a * 1e-4;
        let up = pressure(&gold_gap(a + h), &thermal, &quad_spec).unwrap().value;
        let down = pressure(&gold_gap(a - h), &thermal, &quad_spec).unwrap().value;
        let fd = (up - down) / (2.0 * h);
        let g = pressure_gradient(&gold_gap(a), &thermal, &quad_spec).unwrap().value;
        assert_relative_eq!(g, fd, max_relative = 1e-4);
    }

    #[test]
    fn tightening_quadrature_moves_the_result_within_the_looser_tolerance() {
        let gap = gold_gap(1.0e-6);
        let thermal = ThermalSpec::new(300.0, Prescription::Drude);
        let at_tol = |rel_tol| {
            free_energy_per_area(
                &gap,
                &thermal,
                &QuadratureSpec { rel_tol, ..QuadratureSpec::default() },
            )
            .unwrap()
        };
        let loose = at_tol(1e-6);
        let tighter = at_tol(1e-7);
        let tight = at_tol(1e-9);
        assert!((loose.value - tighter.value).abs() <= 1e-6 * loose.value.abs());
        assert!((loose.value - tight.value).abs() <= loose.quadrature_error.max(1e-30));
    }

    #[test]
    fn reported_tail_bounds_longer_summation() {
        let gap = gold_gap(1.0e-6);
        let quad_spec = QuadratureSpec::default();
        let thermal = ThermalSpec::new(300.0, Prescription::Drude);
        let short = free_energy_per_area(&gap, &thermal, &quad_spec).unwrap();

        let mut extended = thermal;
        extended.matsubara_min_terms = 2 * short.terms_used;
        let long = free_energy_per_area(&gap, &extended, &quad_spec).unwrap();
        assert!(long.terms_used >= 2 * short.terms_used);

        let shift = (long.value - short.value).abs();
        // The doubled sum must sit within the reported tail, up to
        // quadrature noise on the extra terms.
        assert!(
            shift <= short.matsubara_tail + long.quadrature_error + short.quadrature_error,
            "shift {shift:e} exceeds tail bound {:e}",
            short.matsubara_tail
        );
    }

    #[test]
    fn exhausted_matsubara_budget_reports_partial_value() {
        let gap = gold_gap(0.5e-6);
        let mut thermal = ThermalSpec::new(300.0, Prescription::Drude);
        thermal.matsubara_min_terms = 2;
        thermal.matsubara_max_terms = 2;
        let err = free_energy_per_area(&gap, &thermal, &QuadratureSpec::default()).unwrap_err();
        match err {
            LifshitzError::MatsubaraNotConverged { partial_value, max_terms, .. } => {
                assert_eq!(max_terms, 2);
                assert!(partial_value < 0.0);
            }
            other => panic!("expected Matsubara failure, got {other}"),
        }
    }

    #[test]
    fn unreachable_quadrature_tolerance_reports_partial_value() {
        let gap = gold_gap(1.0e-6);
        let thermal = ThermalSpec::new(300.0, Prescription::Drude);
        let quad_spec = QuadratureSpec { rel_tol: 1e-18, ..QuadratureSpec::default() };
        let err = free_energy_per_area(&gap, &thermal, &quad_spec).unwrap_err();
        match err {
            LifshitzError::QuadratureNotConverged { order, partial_value, .. } => {
                assert_eq!(order, 0);
                assert!(partial_value.is_finite());
            }
            other => panic!("expected quadrature failure, got {other}"),
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let gap = gold_gap(1.0e-6);
        let quad_spec = QuadratureSpec::default();

        let mut bad_temp = ThermalSpec::new(300.0, Prescription::Drude);
        bad_temp.temperature = 0.0;
        assert!(matches!(
            free_energy_per_area(&gap, &bad_temp, &quad_spec),
            Err(LifshitzError::InvalidSpec(_))
        ));

        let mut bad_min = ThermalSpec::new(300.0, Prescription::Drude);
        bad_min.matsubara_min_terms = 1;
        assert!(free_energy_per_area(&gap, &bad_min, &quad_spec).is_err());

        let bad_gap = GapConfiguration::new(
            LayerStack::half_space(Arc::new(gold())),
            LayerStack::half_space(Arc::new(gold())),
            -1.0e-6,
        );
        let thermal = ThermalSpec::new(300.0, Prescription::Drude);
        assert!(free_energy_per_area(&bad_gap, &thermal, &quad_spec).is_err());

        let bad_quad = QuadratureSpec { max_subdivisions: 4, ..QuadratureSpec::default() };
        assert!(free_energy_per_area(&gap, &thermal, &bad_quad).is_err());
    }
}
