//! Dielectric response models evaluated on the imaginary frequency axis.
//!
//! Every model yields the permittivity eps(i xi) for xi > 0, which is real
//! and >= 1 for passive media. The zero-frequency behaviour is classified
//! separately (see [`StaticBehavior`]): evaluating a conductor at a tiny xi
//! and hoping the limit comes out right invites catastrophic cancellation in
//! the l = 0 term, so callers ask for the limit explicitly instead.
//!
//! | Model      | eps(i xi)                                        |
//! |------------|--------------------------------------------------|
//! | Vacuum     | 1                                                |
//! | Drude      | 1 + wp^2 / (xi (xi + gamma))                     |
//! | Plasma     | 1 + wp^2 / xi^2                                  |
//! | Oscillator | e_inf + (e_s - e_inf) w0^2 / (w0^2 + xi^2)       |
//! | Tabulated  | Kramers-Kronig transform of measured Im eps(w)   |
//! | Composite  | base + (addition - 1), summed susceptibilities   |
//!
//! All frequencies are angular, in rad/s.

use std::sync::Arc;

use thiserror::Error;

use crate::constants::ev_to_rad_s;
use crate::quad;

/// Relative tolerance for the tabulated-data transform; interpolation error
/// dominates well before quadrature error at this setting.
const KK_REL_TOL: f64 = 1e-10;
const KK_MAX_BISECTIONS: u32 = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("imaginary frequency must be positive and finite, got {0:e}")]
    NonPositiveFrequency(f64),
    #[error("optical table needs at least two rows")]
    TableTooShort,
    #[error("optical table frequencies must be positive and strictly increasing (row {row})")]
    TableNotIncreasing { row: usize },
    #[error("imaginary permittivity must be non-negative (table row {row})")]
    NegativeAbsorption { row: usize },
    #[error("high-frequency tail exponent must be between 2 and 12, got {0}")]
    TailExponentOutOfRange(u32),
    #[error("{name} must be positive and finite, got {value:e}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("oscillator needs eps_static >= eps_infinity >= 1, got {eps_static} and {eps_infinity}")]
    OscillatorOrdering { eps_static: f64, eps_infinity: f64 },
    #[error("optical table csv, line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// How the zero-frequency transverse-electric term is handled.
///
/// The choice only affects materials with free carriers: `Drude` keeps the
/// measured relaxation, under which their static reflection contribution in
/// TE vanishes; `Plasma` drops every relaxation frequency in the static term,
/// leaving an inverse-square divergence that reflects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prescription {
    Drude,
    Plasma,
}

/// Leading behaviour of eps(i xi) as xi -> 0.
///
/// The coefficient of `InverseXi` is lim xi * eps, that of `InverseXiSquared`
/// is lim xi^2 * eps (the squared plasma frequency).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StaticBehavior {
    Finite(f64),
    InverseXi { coefficient: f64 },
    InverseXiSquared { coefficient: f64 },
}

impl StaticBehavior {
    /// Divergence rank: 0 finite, 1 ~ 1/xi, 2 ~ 1/xi^2.
    pub(crate) fn rank(&self) -> u8 {
        match self {
            StaticBehavior::Finite(_) => 0,
            StaticBehavior::InverseXi { .. } => 1,
            StaticBehavior::InverseXiSquared { .. } => 2,
        }
    }
}

/// Low-frequency continuation of a tabulated spectrum, below its first row.
#[derive(Debug, Clone, PartialEq)]
pub enum LowFreqTail {
    /// Im eps -> 0 below the table; appropriate for dielectrics.
    Zero,
    /// Full Drude absorption wp^2 gamma / (w (w^2 + gamma^2)).
    Drude {
        plasma_frequency: f64,
        relaxation_frequency: f64,
    },
}

/// Measured absorption spectrum: rows of (omega, Im eps(omega)) with declared
/// continuations on both ends. Interpolation between rows is linear in
/// log-log space wherever both endpoints are positive, linear otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalTable {
    rows: Vec<(f64, f64)>,
    low_tail: LowFreqTail,
    high_exponent: u32,
}

impl OpticalTable {
    pub fn new(
        rows: Vec<(f64, f64)>,
        low_tail: LowFreqTail,
        high_exponent: u32,
    ) -> Result<Self, MaterialError> {
        if rows.len() < 2 {
            return Err(MaterialError::TableTooShort);
        }
        let mut prev = 0.0;
        for (i, &(omega, im_eps)) in rows.iter().enumerate() {
            if !omega.is_finite() || omega <= prev {
                return Err(MaterialError::TableNotIncreasing { row: i });
            }
            if !im_eps.is_finite() || im_eps < 0.0 {
                return Err(MaterialError::NegativeAbsorption { row: i });
            }
            prev = omega;
        }
        if let LowFreqTail::Drude { plasma_frequency, relaxation_frequency } = low_tail {
            require_positive("tail plasma_frequency", plasma_frequency)?;
            require_positive("tail relaxation_frequency", relaxation_frequency)?;
        }
        if !(2..=12).contains(&high_exponent) {
            return Err(MaterialError::TailExponentOutOfRange(high_exponent));
        }
        Ok(Self { rows, low_tail, high_exponent })
    }

    /// Parse the two-column interchange format: a header line
    /// `omega_rad_s,im_eps` followed by one row per line. Blank lines and
    /// `#` comments are ignored.
    pub fn parse_csv(
        text: &str,
        low_tail: LowFreqTail,
        high_exponent: u32,
    ) -> Result<Self, MaterialError> {
        let mut rows = Vec::new();
        let mut saw_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if !saw_header {
                let normalized: String = trimmed.chars().filter(|c| !c.is_whitespace()).collect();
                if normalized != "omega_rad_s,im_eps" {
                    return Err(MaterialError::Csv {
                        line,
                        message: format!("expected header 'omega_rad_s,im_eps', got '{trimmed}'"),
                    });
                }
                saw_header = true;
                continue;
            }
            let mut fields = trimmed.split(',');
            let omega = parse_field(fields.next(), "omega_rad_s", line)?;
            let im_eps = parse_field(fields.next(), "im_eps", line)?;
            if fields.next().is_some() {
                return Err(MaterialError::Csv { line, message: "expected exactly two fields".into() });
            }
            rows.push((omega, im_eps));
        }
        if !saw_header {
            return Err(MaterialError::Csv { line: 1, message: "missing header line".into() });
        }
        Self::new(rows, low_tail, high_exponent)
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    fn omega_min(&self) -> f64 {
        self.rows[0].0
    }

    fn omega_max(&self) -> f64 {
        self.rows[self.rows.len() - 1].0
    }

    /// Interpolated Im eps within the tabulated range.
    fn absorption(&self, omega: f64) -> f64 {
        let rows = &self.rows;
        let j = match rows.partition_point(|r| r.0 <= omega) {
            0 => 0,
            p if p >= rows.len() => rows.len() - 2,
            p => p - 1,
        };
        let (w0, g0) = rows[j];
        let (w1, g1) = rows[j + 1];
        if g0 > 0.0 && g1 > 0.0 {
            let slope = (g1 / g0).ln() / (w1 / w0).ln();
            g0 * (omega / w0).powf(slope)
        } else {
            g0 + (g1 - g0) * (omega - w0) / (w1 - w0)
        }
    }
}

fn parse_field(field: Option<&str>, name: &str, line: usize) -> Result<f64, MaterialError> {
    let text = field
        .ok_or_else(|| MaterialError::Csv { line, message: format!("missing {name} field") })?
        .trim();
    text.parse::<f64>()
        .map_err(|_| MaterialError::Csv { line, message: format!("cannot parse {name}: '{text}'") })
}

fn require_positive(name: &'static str, value: f64) -> Result<(), MaterialError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(MaterialError::NonPositiveParameter { name, value })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ModelKind {
    Vacuum,
    Drude { plasma_frequency: f64, relaxation_frequency: f64 },
    Plasma { plasma_frequency: f64 },
    Oscillator { eps_static: f64, eps_infinity: f64, resonance_frequency: f64 },
    Tabulated(OpticalTable),
    Composite { base: Arc<DispersionModel>, addition: Arc<DispersionModel> },
}

/// A validated dielectric model. Construct through the named constructors;
/// parameter invariants (positive frequencies, oscillator ordering) are
/// enforced there so evaluation never has to re-check them.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionModel {
    kind: ModelKind,
}

impl DispersionModel {
    pub fn vacuum() -> Self {
        Self { kind: ModelKind::Vacuum }
    }

    pub fn drude(plasma_frequency: f64, relaxation_frequency: f64) -> Result<Self, MaterialError> {
        require_positive("plasma_frequency", plasma_frequency)?;
        require_positive("relaxation_frequency", relaxation_frequency)?;
        Ok(Self { kind: ModelKind::Drude { plasma_frequency, relaxation_frequency } })
    }

    pub fn plasma(plasma_frequency: f64) -> Result<Self, MaterialError> {
        require_positive("plasma_frequency", plasma_frequency)?;
        Ok(Self { kind: ModelKind::Plasma { plasma_frequency } })
    }

    pub fn oscillator(
        eps_static: f64,
        eps_infinity: f64,
        resonance_frequency: f64,
    ) -> Result<Self, MaterialError> {
        require_positive("resonance_frequency", resonance_frequency)?;
        if !(eps_static.is_finite() && eps_infinity.is_finite())
            || eps_static < eps_infinity
            || eps_infinity < 1.0
        {
            return Err(MaterialError::OscillatorOrdering { eps_static, eps_infinity });
        }
        Ok(Self { kind: ModelKind::Oscillator { eps_static, eps_infinity, resonance_frequency } })
    }

    pub fn tabulated(table: OpticalTable) -> Self {
        Self { kind: ModelKind::Tabulated(table) }
    }

    /// Susceptibility sum: the combined response is base + (addition - 1).
    pub fn composite(base: Arc<DispersionModel>, addition: Arc<DispersionModel>) -> Self {
        Self { kind: ModelKind::Composite { base, addition } }
    }
}

/// Permittivity eps(i xi) at imaginary frequency xi > 0 (rad/s).
pub fn eval_permittivity(model: &DispersionModel, xi: f64) -> Result<f64, MaterialError> {
    if !xi.is_finite() || xi <= 0.0 {
        return Err(MaterialError::NonPositiveFrequency(xi));
    }
    Ok(eval_checked(model, xi))
}

fn eval_checked(model: &DispersionModel, xi: f64) -> f64 {
    match &model.kind {
        ModelKind::Vacuum => 1.0,
        ModelKind::Drude { plasma_frequency: wp, relaxation_frequency: gamma } => {
            1.0 + wp * wp / (xi * (xi + gamma))
        }
        ModelKind::Plasma { plasma_frequency: wp } => 1.0 + (wp / xi) * (wp / xi),
        ModelKind::Oscillator { eps_static, eps_infinity, resonance_frequency: w0 } => {
            eps_infinity + (eps_static - eps_infinity) * w0 * w0 / (w0 * w0 + xi * xi)
        }
        ModelKind::Tabulated(table) => kk_transform(table, xi),
        ModelKind::Composite { base, addition } => {
            eval_checked(base, xi) + (eval_checked(addition, xi) - 1.0)
        }
    }
}

/// Leading zero-frequency behaviour of the model under a prescription.
///
/// The plasma prescription zeroes every relaxation frequency, so any ohmic
/// term (explicit Drude, Drude low-frequency tail, or such a term inside a
/// composite) is promoted from a 1/xi to a 1/xi^2 divergence.
pub fn eval_static_limit(model: &DispersionModel, prescription: Prescription) -> StaticBehavior {
    match &model.kind {
        ModelKind::Vacuum => StaticBehavior::Finite(1.0),
        ModelKind::Drude { plasma_frequency: wp, relaxation_frequency: gamma } => {
            carrier_behavior(*wp, *gamma, prescription)
        }
        ModelKind::Plasma { plasma_frequency: wp } => {
            StaticBehavior::InverseXiSquared { coefficient: wp * wp }
        }
        ModelKind::Oscillator { eps_static, .. } => StaticBehavior::Finite(*eps_static),
        ModelKind::Tabulated(table) => match table.low_tail {
            LowFreqTail::Zero => StaticBehavior::Finite(kk_transform_static(table)),
            LowFreqTail::Drude { plasma_frequency, relaxation_frequency } => {
                carrier_behavior(plasma_frequency, relaxation_frequency, prescription)
            }
        },
        ModelKind::Composite { base, addition } => combine_static(
            eval_static_limit(base, prescription),
            eval_static_limit(addition, prescription),
        ),
    }
}

fn carrier_behavior(wp: f64, gamma: f64, prescription: Prescription) -> StaticBehavior {
    match prescription {
        Prescription::Drude => StaticBehavior::InverseXi { coefficient: wp * wp / gamma },
        Prescription::Plasma => StaticBehavior::InverseXiSquared { coefficient: wp * wp },
    }
}

fn combine_static(base: StaticBehavior, addition: StaticBehavior) -> StaticBehavior {
    use StaticBehavior::*;
    match (base, addition) {
        (Finite(a), Finite(b)) => Finite(a + b - 1.0),
        (InverseXi { coefficient: a }, InverseXi { coefficient: b }) => {
            InverseXi { coefficient: a + b }
        }
        (InverseXiSquared { coefficient: a }, InverseXiSquared { coefficient: b }) => {
            InverseXiSquared { coefficient: a + b }
        }
        (a, b) => {
            if a.rank() >= b.rank() {
                a
            } else {
                b
            }
        }
    }
}

/// Kramers-Kronig transform of a tabulated absorption spectrum:
///
///   eps(i xi) = 1 + (2/pi) Int_0^inf  w Im eps(w) / (w^2 + xi^2) dw
///
/// evaluated in three pieces: the declared low-frequency tail in closed form,
/// the tabulated range by quadrature with panel edges on the rows, and the
/// high-frequency power-law tail in closed form.
pub fn kramers_kronig(table: &OpticalTable, xi: f64) -> Result<f64, MaterialError> {
    if !xi.is_finite() || xi <= 0.0 {
        return Err(MaterialError::NonPositiveFrequency(xi));
    }
    Ok(kk_transform(table, xi))
}

fn kk_transform(table: &OpticalTable, xi: f64) -> f64 {
    let low = match table.low_tail {
        LowFreqTail::Zero => 0.0,
        LowFreqTail::Drude { plasma_frequency, relaxation_frequency } => {
            drude_tail_moment(plasma_frequency, relaxation_frequency, table.omega_min(), xi)
        }
    };
    1.0 + std::f64::consts::FRAC_2_PI * (low + table_moment(table, xi) + tail_moment(table, xi))
}

/// Static limit for a dielectric table (Im eps -> 0 below omega_min): the
/// same three-piece transform with the kernel taken at xi = 0.
fn kk_transform_static(table: &OpticalTable) -> f64 {
    debug_assert!(matches!(table.low_tail, LowFreqTail::Zero));
    1.0 + std::f64::consts::FRAC_2_PI * (table_moment(table, 0.0) + tail_moment(table, 0.0))
}

/// Closed form of Int_0^W  w ImD(w) / (w^2 + xi^2) dw for the full Drude
/// absorption ImD = wp^2 g / (w (w^2 + g^2)).
fn drude_tail_moment(wp: f64, gamma: f64, upper: f64, xi: f64) -> f64 {
    let num = wp * wp * gamma;
    if (xi - gamma).abs() > 1e-6 * gamma.max(xi) {
        // Partial fractions over (w^2 + g^2)(w^2 + xi^2).
        num / (xi * xi - gamma * gamma)
            * ((upper / gamma).atan() / gamma - (upper / xi).atan() / xi)
    } else {
        // Degenerate xi ~ gamma: Int dw / (w^2 + g^2)^2.
        num * (upper / (2.0 * gamma * gamma * (upper * upper + gamma * gamma))
            + (upper / gamma).atan() / (2.0 * gamma.powi(3)))
    }
}

fn table_moment(table: &OpticalTable, xi: f64) -> f64 {
    let breakpoints: Vec<f64> = table.rows.iter().map(|r| r.0).collect();
    let out = quad::integrate(
        |omega| omega * table.absorption(omega) / (omega * omega + xi * xi),
        &breakpoints,
        KK_REL_TOL,
        0.0,
        KK_MAX_BISECTIONS,
    );
    out.value
}

/// Closed form of Int_W^inf  A w^{1-p} / (w^2 + xi^2) dw with the amplitude A
/// matched to the last table row.
fn tail_moment(table: &OpticalTable, xi: f64) -> f64 {
    let upper = table.omega_max();
    let p = table.high_exponent;
    let amplitude = table.rows[table.rows.len() - 1].1 * upper.powi(p as i32);
    if amplitude == 0.0 {
        return 0.0;
    }
    amplitude * inverse_moment(p - 1, upper, xi)
}

/// J_m = Int_W^inf dw / (w^m (w^2 + xi^2)) for m >= 1.
fn inverse_moment(m: u32, lower: f64, xi: f64) -> f64 {
    if xi < 0.5 * lower {
        // Geometric expansion of the kernel in (xi/w)^2; immune to the
        // cancellation the recurrence suffers at small xi.
        let ratio = (xi / lower) * (xi / lower);
        let mut power = 1.0;
        let mut sum = 0.0;
        for k in 0..200 {
            let order = m + 1 + 2 * k;
            let term = power / (order as f64 * lower.powi(order as i32));
            sum += if k % 2 == 0 { term } else { -term };
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            power *= ratio;
        }
        sum
    } else {
        let j0 = (std::f64::consts::FRAC_PI_2 - (lower / xi).atan()) / xi;
        let j1 = (xi * xi / (lower * lower)).ln_1p() / (2.0 * xi * xi);
        let mut pair = (j0, j1);
        for k in 2..=m {
            let next = (lower.powi(1 - k as i32) / (k as f64 - 1.0) - pair.0) / (xi * xi);
            pair = (pair.1, next);
        }
        if m == 0 {
            pair.0
        } else {
            pair.1
        }
    }
}

/// Gold: Drude parameters wp = 9 eV, gamma = 35 meV (as angular frequencies).
pub fn gold() -> DispersionModel {
    DispersionModel::drude(ev_to_rad_s(9.0), ev_to_rad_s(0.035))
        .expect("gold parameters are positive")
}

/// Intrinsic silicon: single-oscillator fit with eps(0) = 11.87,
/// eps(inf) = 1.035 and resonance at 6.6e15 rad/s.
pub fn silicon() -> DispersionModel {
    DispersionModel::oscillator(11.87, 1.035, 6.6e15).expect("silicon fit parameters are valid")
}

/// Heavily doped silicon: the intrinsic response plus a free-carrier Drude
/// term with wp = 7e14 rad/s and gamma = 1.5e14 rad/s.
pub fn conductive_silicon() -> DispersionModel {
    let carriers = DispersionModel::drude(7.0e14, 1.5e14).expect("carrier parameters are positive");
    DispersionModel::composite(Arc::new(silicon()), Arc::new(carriers))
}
