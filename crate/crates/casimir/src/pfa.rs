//! Sphere-over-split-slab observables in the proximity force approximation.
//!
//! A metal-coated sphere hangs above a slab whose two halves carry different
//! substrates (intrinsic and metallic) under a common conductive overlayer.
//! The measurable signals are the difference of the sphere-plate force over
//! the two regions, dF = F_si - F_au, and the difference of its gradient.
//! PFA maps plate-plate quantities to the sphere: F = 2 pi R * (free energy
//! per area), F' = -2 pi R * pressure.

use std::sync::Arc;

use thiserror::Error;

use crate::lifshitz::{
    self, Evaluation, GapConfiguration, LifshitzError, QuadratureSpec, ThermalSpec,
};
use crate::materials::{conductive_silicon, gold, silicon, DispersionModel, Prescription};
use crate::strata::{Layer, LayerStack, StrataError};

#[derive(Debug, Error)]
pub enum PfaError {
    #[error("invalid apparatus geometry: {0}")]
    InvalidGeometry(String),
    #[error(transparent)]
    Lifshitz(#[from] LifshitzError),
}

impl From<StrataError> for PfaError {
    fn from(err: StrataError) -> Self {
        PfaError::Lifshitz(LifshitzError::Strata(err))
    }
}

/// Which slab region sits farther from the sphere when a step is present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepSide {
    Si,
    Au,
}

/// The sphere-over-split-slab apparatus.
///
/// Each slab region is an overlayer film on a substrate half-space; the
/// sphere coating is treated as opaque, so the sphere side is a bare
/// half-space of the coating material. A nonzero `step_height` recesses the
/// exposed surface of the `step_side` region by that amount, so the gap
/// there is `a + step_height`.
#[derive(Debug, Clone)]
pub struct ApparatusGeometry {
    pub sphere_radius: f64,
    pub sphere_coating: Arc<DispersionModel>,
    pub substrate_si: Arc<DispersionModel>,
    pub substrate_au: Arc<DispersionModel>,
    pub overlayer_material: Arc<DispersionModel>,
    pub overlayer_thickness_si_side: f64,
    pub overlayer_thickness_au_side: f64,
    pub step_height: f64,
    pub step_side: StepSide,
}

impl Default for ApparatusGeometry {
    /// Reference apparatus: R = 150 um Au-coated sphere over intrinsic-Si
    /// and Au regions, both under a 100 nm conductive-Si overlayer, no step.
    fn default() -> Self {
        Self {
            sphere_radius: 150.0e-6,
            sphere_coating: Arc::new(gold()),
            substrate_si: Arc::new(silicon()),
            substrate_au: Arc::new(gold()),
            overlayer_material: Arc::new(conductive_silicon()),
            overlayer_thickness_si_side: 100.0e-9,
            overlayer_thickness_au_side: 100.0e-9,
            step_height: 0.0,
            step_side: StepSide::Si,
        }
    }
}

impl ApparatusGeometry {
    fn validate(&self) -> Result<(), PfaError> {
        let positive = [
            ("sphere_radius", self.sphere_radius),
            ("overlayer_thickness_si_side", self.overlayer_thickness_si_side),
            ("overlayer_thickness_au_side", self.overlayer_thickness_au_side),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(PfaError::InvalidGeometry(format!(
                    "{name} must be positive, got {value:e}"
                )));
            }
        }
        if !(self.step_height.is_finite() && self.step_height >= 0.0) {
            return Err(PfaError::InvalidGeometry(format!(
                "step_height must be non-negative, got {:e}",
                self.step_height
            )));
        }
        Ok(())
    }

    fn slab_stack(&self, side: StepSide) -> Result<LayerStack, PfaError> {
        let (substrate, thickness) = match side {
            StepSide::Si => (&self.substrate_si, self.overlayer_thickness_si_side),
            StepSide::Au => (&self.substrate_au, self.overlayer_thickness_au_side),
        };
        let film = Layer::new(self.overlayer_material.clone(), thickness)?;
        Ok(LayerStack::new(vec![film], substrate.clone()))
    }

    fn gap(&self, separation: f64, side: StepSide) -> Result<GapConfiguration, PfaError> {
        let offset = if side == self.step_side { self.step_height } else { 0.0 };
        Ok(GapConfiguration::new(
            LayerStack::half_space(self.sphere_coating.clone()),
            self.slab_stack(side)?,
            separation + offset,
        ))
    }
}

/// PFA sphere-plate force, N: 2 pi R times the plate-plate free energy per
/// area. Attractive (negative) when the free energy is negative.
pub fn sphere_plate_force(sphere_radius: f64, free_energy_per_area: f64) -> f64 {
    2.0 * std::f64::consts::PI * sphere_radius * free_energy_per_area
}

/// PFA sphere-plate force gradient, N/m: -2 pi R times the plate-plate
/// pressure. Positive for attractive configurations.
pub fn sphere_plate_force_gradient(sphere_radius: f64, pressure: f64) -> f64 {
    -2.0 * std::f64::consts::PI * sphere_radius * pressure
}

/// Lateral scale of the slab patch the sphere actually probes, sqrt(a R).
pub fn interaction_radius(separation: f64, sphere_radius: f64) -> f64 {
    (separation * sphere_radius).sqrt()
}

/// A sphere-plate observable over each slab region and the difference
/// `si_side - au_side` (computed literally from the two rounded values).
/// `error` combines both sides' quadrature and truncation estimates.
#[derive(Debug, Clone, Copy)]
pub struct Differential {
    pub si_side: f64,
    pub au_side: f64,
    pub delta: f64,
    pub error: f64,
}

/// Difference of the sphere-plate force between the regions, N.
pub fn delta_force(
    separation: f64,
    geometry: &ApparatusGeometry,
    thermal: &ThermalSpec,
    quad: &QuadratureSpec,
) -> Result<Differential, PfaError> {
    differential(lifshitz::free_energy_per_area, sphere_plate_force, separation, geometry, thermal, quad)
}

/// Difference of the sphere-plate force gradient between the regions, N/m.
pub fn delta_force_gradient(
    separation: f64,
    geometry: &ApparatusGeometry,
    thermal: &ThermalSpec,
    quad: &QuadratureSpec,
) -> Result<Differential, PfaError> {
    differential(lifshitz::pressure, sphere_plate_force_gradient, separation, geometry, thermal, quad)
}

fn differential(
    evaluate: fn(&GapConfiguration, &ThermalSpec, &QuadratureSpec) -> Result<Evaluation, LifshitzError>,
    to_sphere: fn(f64, f64) -> f64,
    separation: f64,
    geometry: &ApparatusGeometry,
    thermal: &ThermalSpec,
    quad: &QuadratureSpec,
) -> Result<Differential, PfaError> {
    geometry.validate()?;
    let si = evaluate(&geometry.gap(separation, StepSide::Si)?, thermal, quad)?;
    let au = evaluate(&geometry.gap(separation, StepSide::Au)?, thermal, quad)?;
    let si_side = to_sphere(geometry.sphere_radius, si.value);
    let au_side = to_sphere(geometry.sphere_radius, au.value);
    let scale = 2.0 * std::f64::consts::PI * geometry.sphere_radius;
    Ok(Differential {
        si_side,
        au_side,
        delta: si_side - au_side,
        error: scale * (si.error_estimate() + au.error_estimate()),
    })
}

/// Both differential observables for one prescription at one separation.
/// Numerical failures do not abort: partial values are recorded and
/// `converged` is cleared, so sweeps can flag the row and continue.
#[derive(Debug, Clone, Copy)]
pub struct SweepResult {
    pub separation: f64,
    pub prescription: Prescription,
    pub f_si: f64,
    pub f_au: f64,
    pub delta_f: f64,
    pub delta_f_prime: f64,
    pub delta_f_error: f64,
    pub delta_f_prime_error: f64,
    pub converged: bool,
}

pub fn sweep_point(
    separation: f64,
    geometry: &ApparatusGeometry,
    thermal: &ThermalSpec,
    quad: &QuadratureSpec,
) -> SweepResult {
    let salvage = |res: Result<Differential, PfaError>| match res {
        Ok(diff) => (diff, true),
        Err(err) => {
            let partial = match &err {
                PfaError::Lifshitz(inner) => inner.partial_value().unwrap_or(f64::NAN),
                PfaError::InvalidGeometry(_) => f64::NAN,
            };
            // Partial values surface on the failing side's delta only; the
            // per-side split is unknown at this point.
            let scale = 2.0 * std::f64::consts::PI * geometry.sphere_radius;
            (
                Differential {
                    si_side: scale * partial,
                    au_side: f64::NAN,
                    delta: f64::NAN,
                    error: f64::NAN,
                },
                false,
            )
        }
    };

    let (force, force_ok) = salvage(delta_force(separation, geometry, thermal, quad));
    let (gradient, gradient_ok) = salvage(delta_force_gradient(separation, geometry, thermal, quad));

    SweepResult {
        separation,
        prescription: thermal.prescription,
        f_si: force.si_side,
        f_au: force.au_side,
        delta_f: force.delta,
        delta_f_prime: gradient.delta,
        delta_f_error: force.error,
        delta_f_prime_error: gradient.error,
        converged: force_ok && gradient_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tight_quad() -> QuadratureSpec {
        QuadratureSpec { rel_tol: 1e-11, ..QuadratureSpec::default() }
    }

    #[test]
    fn sphere_plate_mappings_are_plain_arithmetic() {
        assert_eq!(sphere_plate_force(150.0e-6, 0.0), 0.0);
        assert_eq!(sphere_plate_force_gradient(150.0e-6, 0.0), 0.0);

        let energy = -3.7e-9;
        let single = sphere_plate_force(1.0e-4, energy);
        assert_eq!(sphere_plate_force(2.0e-4, energy), 2.0 * single);
        assert_eq!(
            sphere_plate_force(150.0e-6, energy),
            2.0 * std::f64::consts::PI * 1.5e-4 * energy
        );
        assert!(single < 0.0);

        let pressure = -2.0e-3;
        assert!(sphere_plate_force_gradient(150.0e-6, pressure) > 0.0);
        assert_eq!(
            sphere_plate_force_gradient(150.0e-6, pressure),
            -2.0 * std::f64::consts::PI * 1.5e-4 * pressure
        );
    }

    #[test]
    fn interaction_radius_examples() {
        let rho = interaction_radius(3.0e-6, 150.0e-6);
        assert_relative_eq!(rho, 2.12132e-5, max_relative = 1e-5);
    }

    #[test]
    fn identical_regions_give_exactly_zero_difference() {
        let mut geometry = ApparatusGeometry::default();
        geometry.substrate_au = geometry.substrate_si.clone();
        let quad = QuadratureSpec::default();
        for prescription in [Prescription::Drude, Prescription::Plasma] {
            let thermal = ThermalSpec::new(300.0, prescription);
            let force = delta_force(3.0e-6, &geometry, &thermal, &quad).unwrap();
            assert_eq!(force.delta, 0.0);
            let gradient = delta_force_gradient(3.0e-6, &geometry, &thermal, &quad).unwrap();
            assert_eq!(gradient.delta, 0.0);
        }
    }

    #[test]
    fn swapping_regions_flips_the_sign_exactly() {
        let geometry = ApparatusGeometry {
            overlayer_thickness_si_side: 80.0e-9,
            overlayer_thickness_au_side: 120.0e-9,
            step_height: 20.0e-9,
            step_side: StepSide::Si,
            ..ApparatusGeometry::default()
        };
        let swapped = ApparatusGeometry {
            substrate_si: geometry.substrate_au.clone(),
            substrate_au: geometry.substrate_si.clone(),
            overlayer_thickness_si_side: geometry.overlayer_thickness_au_side,
            overlayer_thickness_au_side: geometry.overlayer_thickness_si_side,
            step_side: StepSide::Au,
            ..geometry.clone()
        };
        let thermal = ThermalSpec::new(300.0, Prescription::Drude);
        let quad = QuadratureSpec::default();
        let forward = delta_force(3.0e-6, &geometry, &thermal, &quad).unwrap();
        let backward = delta_force(3.0e-6, &swapped, &thermal, &quad).unwrap();
        assert_eq!(backward.delta, -forward.delta);
        assert_eq!(backward.si_side, forward.au_side);
    }

    #[test]
    fn difference_scales_linearly_with_sphere_radius() {
        let geometry = ApparatusGeometry::default();
        let doubled = ApparatusGeometry { sphere_radius: 300.0e-6, ..geometry.clone() };
        let thermal = ThermalSpec::new(300.0, Prescription::Plasma);
        let quad = QuadratureSpec::default();
        let base = delta_force(2.0e-6, &geometry, &thermal, &quad).unwrap();
        let twice = delta_force(2.0e-6, &doubled, &thermal, &quad).unwrap();
        assert_eq!(twice.delta, 2.0 * base.delta);
    }

    #[test]
    fn gradient_difference_matches_finite_difference_of_force_difference() {
        let geometry = ApparatusGeometry::default();
        let thermal = ThermalSpec::new(300.0, Prescription::Drude);
        let quad = tight_quad();
        let a = 3.0e-6;
        let h = a * 1e-4;
        let up = delta_force(a + h, &geometry, &thermal, &quad).unwrap().delta;
        let down = delta_force(a - h, &geometry, &thermal, &quad).unwrap().delta;
        // F' = -2 pi R P = d(2 pi R FE)/da, so the gradient difference is the
        // plain derivative of the force difference.
        let fd = (up - down) / (2.0 * h);
        let direct = delta_force_gradient(a, &geometry, &thermal, &quad).unwrap().delta;
        assert_relative_eq!(direct, fd, max_relative = 1e-4);
    }

    #[test]
    fn prescriptions_separate_and_diverge_with_distance() {
        let geometry = ApparatusGeometry::default();
        let quad = QuadratureSpec::default();
        let ratio_at = |a: f64| {
            let drude =
                delta_force(a, &geometry, &ThermalSpec::new(300.0, Prescription::Drude), &quad)
                    .unwrap()
                    .delta;
            let plasma =
                delta_force(a, &geometry, &ThermalSpec::new(300.0, Prescription::Plasma), &quad)
                    .unwrap()
                    .delta;
            (plasma / drude).abs()
        };
        let at_3um = ratio_at(3.0e-6);
        let at_4um = ratio_at(4.0e-6);
        assert!(at_3um > 5.0, "ratio at 3 um: {at_3um}");
        assert!(at_4um > at_3um, "ratio must grow with separation: {at_3um} vs {at_4um}");

        let gradient_ratio = {
            let thermal = |p| ThermalSpec::new(300.0, p);
            let d = delta_force_gradient(3.0e-6, &geometry, &thermal(Prescription::Drude), &quad)
                .unwrap()
                .delta;
            let p = delta_force_gradient(3.0e-6, &geometry, &thermal(Prescription::Plasma), &quad)
                .unwrap()
                .delta;
            (p / d).abs()
        };
        assert!(gradient_ratio > 5.0, "gradient ratio at 3 um: {gradient_ratio}");
    }

    #[test]
    fn overlayer_thickness_imperfection_perturbs_the_signal_mildly() {
        let flat = ApparatusGeometry::default();
        let uneven = ApparatusGeometry {
            overlayer_thickness_si_side: 120.0e-9,
            ..flat.clone()
        };
        let quad = QuadratureSpec::default();
        for prescription in [Prescription::Drude, Prescription::Plasma] {
            let thermal = ThermalSpec::new(300.0, prescription);
            let base = delta_force(3.0e-6, &flat, &thermal, &quad).unwrap().delta;
            let perturbed = delta_force(3.0e-6, &uneven, &thermal, &quad).unwrap().delta;
            let change = ((perturbed - base) / base).abs();
            assert!(change < 0.10, "{prescription:?}: 20 nm extra film moved dF by {change:.3}");
        }
    }

    #[test]
    fn step_shift_is_first_order_in_the_step_height() {
        // Recessing one region by h adds h * dF/da of that region to dF; at
        // h = 20 nm the quadratic remainder is below a percent. For the
        // plasma signal this stays under 10% of dF; the Drude signal at 3 um
        // is itself only a few times larger than the shift.
        let flat = ApparatusGeometry::default();
        let stepped = ApparatusGeometry { step_height: 20.0e-9, ..flat.clone() };
        let quad = QuadratureSpec::default();
        let a = 3.0e-6;
        for prescription in [Prescription::Drude, Prescription::Plasma] {
            let thermal = ThermalSpec::new(300.0, prescription);
            let base = delta_force(a, &flat, &thermal, &quad).unwrap().delta;
            let perturbed = delta_force(a, &stepped, &thermal, &quad).unwrap().delta;
            let slope = delta_force_gradient(a, &flat, &thermal, &quad).unwrap().si_side;
            let predicted = 20.0e-9 * slope;
            assert_relative_eq!(perturbed - base, predicted, max_relative = 3e-2);
        }

        let plasma = ThermalSpec::new(300.0, Prescription::Plasma);
        let base = delta_force(a, &flat, &plasma, &quad).unwrap().delta;
        let perturbed = delta_force(a, &stepped, &plasma, &quad).unwrap().delta;
        assert!(((perturbed - base) / base).abs() < 0.10);
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        let thermal = ThermalSpec::new(300.0, Prescription::Drude);
        let quad = QuadratureSpec::default();

        let bad_radius = ApparatusGeometry { sphere_radius: 0.0, ..ApparatusGeometry::default() };
        assert!(matches!(
            delta_force(3.0e-6, &bad_radius, &thermal, &quad),
            Err(PfaError::InvalidGeometry(_))
        ));

        let bad_film = ApparatusGeometry {
            overlayer_thickness_au_side: -1.0e-9,
            ..ApparatusGeometry::default()
        };
        assert!(delta_force(3.0e-6, &bad_film, &thermal, &quad).is_err());

        let bad_step = ApparatusGeometry { step_height: -5.0e-9, ..ApparatusGeometry::default() };
        assert!(delta_force(3.0e-6, &bad_step, &thermal, &quad).is_err());
    }

    #[test]
    fn sweep_point_collects_both_observables() {
        let geometry = ApparatusGeometry::default();
        let thermal = ThermalSpec::new(300.0, Prescription::Drude);
        let result = sweep_point(3.0e-6, &geometry, &thermal, &QuadratureSpec::default());
        assert!(result.converged);
        assert_eq!(result.delta_f, result.f_si - result.f_au);
        assert!(result.delta_f_error.is_finite() && result.delta_f_error >= 0.0);
        assert_eq!(result.prescription, Prescription::Drude);
    }

    #[test]
    fn sweep_point_flags_convergence_failures_instead_of_panicking() {
        let geometry = ApparatusGeometry::default();
        let mut thermal = ThermalSpec::new(300.0, Prescription::Drude);
        thermal.matsubara_min_terms = 2;
        thermal.matsubara_max_terms = 2;
        let result = sweep_point(3.0e-6, &geometry, &thermal, &QuadratureSpec::default());
        assert!(!result.converged);
        assert!(result.delta_f.is_nan());
    }
}
