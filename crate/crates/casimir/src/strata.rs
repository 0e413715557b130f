//! Reflection coefficients of layered planar media at imaginary frequency.
//!
//! A [`LayerStack`] is a finite sequence of homogeneous films on a
//! half-space substrate, probed from vacuum. Reflections compose by the
//! recursive two-interface rule applied from the substrate outward; on the
//! imaginary axis every quantity is real and every exponential argument is
//! non-positive, so the recursion is numerically benign.
//!
//! Zero frequency is special: permittivities of conductors diverge there, so
//! instead of evaluating eps at a small xi the stack is reclassified through
//! [`StaticBehavior`] and the reflection limits are taken in closed form.

use std::sync::Arc;

use thiserror::Error;

use crate::constants::SPEED_OF_LIGHT;
use crate::materials::{
    eval_permittivity, eval_static_limit, DispersionModel, MaterialError, Prescription,
    StaticBehavior,
};

#[derive(Debug, Error)]
pub enum StrataError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("layer thickness must be non-negative and finite, got {0:e}")]
    InvalidThickness(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Te,
    Tm,
}

/// One transverse field component: imaginary frequency xi (rad/s),
/// transverse wavenumber kperp (1/m) and polarization. xi and kperp must not
/// both vanish.
#[derive(Debug, Clone, Copy)]
pub struct TransverseMode {
    pub xi: f64,
    pub kperp: f64,
    pub polarization: Polarization,
}

/// Homogeneous film. Zero thickness is permitted and composes to identity.
#[derive(Debug, Clone)]
pub struct Layer {
    pub material: Arc<DispersionModel>,
    pub thickness: f64,
}

impl Layer {
    pub fn new(material: Arc<DispersionModel>, thickness: f64) -> Result<Self, StrataError> {
        if !thickness.is_finite() || thickness < 0.0 {
            return Err(StrataError::InvalidThickness(thickness));
        }
        Ok(Self { material, thickness })
    }
}

/// Films in vacuum-to-substrate order on a half-space substrate.
#[derive(Debug, Clone)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub substrate: Arc<DispersionModel>,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>, substrate: Arc<DispersionModel>) -> Self {
        Self { layers, substrate }
    }

    pub fn half_space(substrate: Arc<DispersionModel>) -> Self {
        Self { layers: Vec::new(), substrate }
    }

    /// Evaluate every material at one imaginary frequency. The result is the
    /// cheap-to-query snapshot the integration loops work with.
    pub fn at_frequency(&self, xi: f64) -> Result<StackAtFrequency, StrataError> {
        let mut films = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            films.push((eval_permittivity(&layer.material, xi)?, layer.thickness));
        }
        let substrate = eval_permittivity(&self.substrate, xi)?;
        Ok(StackAtFrequency { xi, films, substrate })
    }

    /// Classify every material's zero-frequency behaviour under the given
    /// prescription.
    pub fn at_zero_frequency(&self, prescription: Prescription) -> StackAtZero {
        let films = self
            .layers
            .iter()
            .map(|layer| (eval_static_limit(&layer.material, prescription), layer.thickness))
            .collect();
        let substrate = eval_static_limit(&self.substrate, prescription);
        StackAtZero { films, substrate }
    }
}

/// Normal-component wavenumber sqrt(eps xi^2/c^2 + kperp^2) inside a medium
/// of permittivity `eps`.
pub fn kz(eps: f64, mode: &TransverseMode) -> f64 {
    let ratio = mode.xi / SPEED_OF_LIGHT;
    (eps * ratio * ratio + mode.kperp * mode.kperp).sqrt()
}

/// Fresnel reflection coefficient of the interface from medium `a` into
/// medium `b`, both given by their permittivities at `mode.xi`.
pub fn fresnel(mode: &TransverseMode, eps_a: f64, eps_b: f64) -> f64 {
    let k_a = kz(eps_a, mode);
    let k_b = kz(eps_b, mode);
    interface_reflection(mode.polarization, eps_a, k_a, eps_b, k_b)
}

fn interface_reflection(pol: Polarization, eps_a: f64, k_a: f64, eps_b: f64, k_b: f64) -> f64 {
    match pol {
        Polarization::Te => (k_a - k_b) / (k_a + k_b),
        Polarization::Tm => (eps_b * k_a - eps_a * k_b) / (eps_b * k_a + eps_a * k_b),
    }
}

/// Reflection of the whole stack seen from vacuum.
///
/// At xi = 0 the materials are reclassified by their static behaviour with
/// the Drude prescription, under which ohmic conductors take their exact
/// TE limit of zero. Callers wanting the plasma-prescription static term
/// use [`stack_reflection_static`] directly.
pub fn stack_reflection(mode: &TransverseMode, stack: &LayerStack) -> Result<f64, StrataError> {
    if mode.xi == 0.0 {
        let snapshot = stack.at_zero_frequency(Prescription::Drude);
        return Ok(snapshot.reflection(mode.polarization, mode.kperp));
    }
    Ok(stack.at_frequency(mode.xi)?.reflection(mode.polarization, mode.kperp))
}

/// Zero-frequency stack reflection under an explicit prescription.
pub fn stack_reflection_static(
    polarization: Polarization,
    stack: &LayerStack,
    prescription: Prescription,
    kperp: f64,
) -> f64 {
    stack.at_zero_frequency(prescription).reflection(polarization, kperp)
}

/// TE reflection of a half-space at xi = 0, given the material's static
/// classification. Finite permittivities and ohmic (1/xi) conductors do not
/// reflect; only an inverse-square divergence leaves a finite limit.
pub fn zero_frequency_te_reflection(behavior: StaticBehavior, kperp: f64) -> f64 {
    static_interface_reflection(
        Polarization::Te,
        StaticBehavior::Finite(1.0),
        behavior,
        kperp,
    )
}

/// Recursive two-interface composition over `n_films` films, innermost
/// interface first. `reflection_at(i)` is the bare reflection of interface i
/// (between media i and i+1, medium 0 being vacuum); `attenuation_at(j)` the
/// round-trip decay through film j (media index j, 1-based).
fn compose<R, A>(n_films: usize, reflection_at: R, attenuation_at: A) -> f64
where
    R: Fn(usize) -> f64,
    A: Fn(usize) -> f64,
{
    let mut r = reflection_at(n_films);
    for j in (1..=n_films).rev() {
        let up = reflection_at(j - 1);
        let a = attenuation_at(j);
        r = (up + a * r) / (1.0 + up * a * r);
    }
    r
}

/// A stack with every permittivity evaluated at one positive xi.
#[derive(Debug, Clone)]
pub struct StackAtFrequency {
    xi: f64,
    /// (permittivity, thickness) per film, vacuum side first.
    films: Vec<(f64, f64)>,
    substrate: f64,
}

impl StackAtFrequency {
    pub fn reflection(&self, pol: Polarization, kperp: f64) -> f64 {
        let mode = TransverseMode { xi: self.xi, kperp, polarization: pol };
        // media: vacuum, films..., substrate
        let n = self.films.len();
        let eps_of = |i: usize| -> f64 {
            if i == 0 {
                1.0
            } else if i <= n {
                self.films[i - 1].0
            } else {
                self.substrate
            }
        };
        compose(
            n,
            |i| {
                let (ea, eb) = (eps_of(i), eps_of(i + 1));
                interface_reflection(pol, ea, kz(ea, &mode), eb, kz(eb, &mode))
            },
            |j| {
                let (eps, w) = self.films[j - 1];
                (-2.0 * w * kz(eps, &mode)).exp()
            },
        )
    }
}

/// A stack classified at xi = 0.
#[derive(Debug, Clone)]
pub struct StackAtZero {
    films: Vec<(StaticBehavior, f64)>,
    substrate: StaticBehavior,
}

impl StackAtZero {
    pub fn reflection(&self, pol: Polarization, kperp: f64) -> f64 {
        let n = self.films.len();
        let behavior_of = |i: usize| -> StaticBehavior {
            if i == 0 {
                StaticBehavior::Finite(1.0)
            } else if i <= n {
                self.films[i - 1].0
            } else {
                self.substrate
            }
        };
        compose(
            n,
            |i| static_interface_reflection(pol, behavior_of(i), behavior_of(i + 1), kperp),
            |j| {
                let (b, w) = self.films[j - 1];
                (-2.0 * w * static_kz(b, kperp)).exp()
            },
        )
    }
}

/// kz at xi = 0. eps xi^2 tends to zero unless eps diverges as 1/xi^2, in
/// which case it tends to the squared plasma frequency.
fn static_kz(behavior: StaticBehavior, kperp: f64) -> f64 {
    match behavior {
        StaticBehavior::Finite(_) | StaticBehavior::InverseXi { .. } => kperp,
        StaticBehavior::InverseXiSquared { coefficient } => {
            let scaled = coefficient / (SPEED_OF_LIGHT * SPEED_OF_LIGHT);
            (kperp * kperp + scaled).sqrt()
        }
    }
}

/// Interface reflection in the xi -> 0 limit. For TM the divergence rank
/// decides: the more divergent side acts as a perfect conductor; between
/// equal ranks the divergence coefficients take the role of permittivities.
fn static_interface_reflection(
    pol: Polarization,
    a: StaticBehavior,
    b: StaticBehavior,
    kperp: f64,
) -> f64 {
    use StaticBehavior::*;
    let (k_a, k_b) = (static_kz(a, kperp), static_kz(b, kperp));
    match pol {
        Polarization::Te => {
            if k_a == k_b {
                0.0
            } else {
                (k_a - k_b) / (k_a + k_b)
            }
        }
        Polarization::Tm => match (a, b) {
            (Finite(ea), Finite(eb)) => (eb - ea) / (eb + ea),
            (InverseXi { coefficient: ca }, InverseXi { coefficient: cb }) => {
                (cb - ca) / (cb + ca)
            }
            (InverseXiSquared { coefficient: wa }, InverseXiSquared { coefficient: wb }) => {
                (wb * k_a - wa * k_b) / (wb * k_a + wa * k_b)
            }
            (a, b) => {
                if a.rank() < b.rank() {
                    1.0
                } else {
                    -1.0
                }
            }
        },
    }
}
