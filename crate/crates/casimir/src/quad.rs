//! Adaptive one-dimensional quadrature on a fixed-order nested rule.
//!
//! Each panel is integrated with a 15-point Kronrod extension of 7-point
//! Gauss; the embedded difference drives a worst-panel-first bisection loop.
//! Callers pass explicit breakpoints, so integrands with known structure
//! (interpolation kinks, exponential envelopes) start from panels that
//! respect it. All nodes are interior: integrable endpoint singularities
//! are never sampled at the endpoint itself.

/// Kronrod abscissae on [-1, 1]; the even-indexed entries are the Gauss-7 nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_7,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_84,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

/// Result of an adaptive integration. `value` and `error` are always usable;
/// `converged` records whether the requested tolerance was met within the
/// bisection budget.
#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome {
    pub value: f64,
    pub error: f64,
    pub bisections: u32,
    pub converged: bool,
}

/// One Gauss-Kronrod 15(7) pass over [lo, hi].
fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (lo + hi);

    let f_mid = f(mid);
    let mut kronrod = WGK[7] * f_mid;
    let mut gauss = WG[3] * f_mid;
    let mut resabs = WGK[7] * f_mid.abs();

    let mut samples = [0.0f64; 15];
    samples[7] = f_mid;

    for j in 0..7 {
        let dx = half * XGK[j];
        let f_lo = f(mid - dx);
        let f_hi = f(mid + dx);
        samples[j] = f_lo;
        samples[14 - j] = f_hi;
        kronrod += WGK[j] * (f_lo + f_hi);
        resabs += WGK[j] * (f_lo.abs() + f_hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f_lo + f_hi);
        }
    }

    // Deviation of |f| from its panel mean, used to rescale the raw
    // Gauss/Kronrod difference into a realistic error estimate.
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (samples[7] - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((samples[j] - mean).abs() + (samples[14 - j] - mean).abs());
    }

    let value = kronrod * half;
    let raw = ((kronrod - gauss) * half).abs();
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();

    let mut error = raw;
    if resasc != 0.0 && raw != 0.0 {
        error = resasc * (200.0 * raw / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }

    Panel { lo, hi, value, error }
}

/// Integrate `f` over the union of `[breakpoints[i], breakpoints[i+1]]`,
/// refining until the summed error estimate drops below
/// `max(rel_tol * |integral|, abs_tol)` or `max_bisections` splits are spent.
///
/// Breakpoints must be finite and non-decreasing. The returned value is the
/// panel sum accumulated in ascending interval order, so it does not depend
/// on the refinement history.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_bisections: u32,
) -> QuadOutcome {
    debug_assert!(breakpoints.len() >= 2);
    debug_assert!(breakpoints.windows(2).all(|w| w[0] <= w[1]));

    let mut panels: Vec<Panel> = breakpoints
        .windows(2)
        .filter(|w| w[0] < w[1])
        .map(|w| kronrod_panel(&f, w[0], w[1]))
        .collect();

    if panels.is_empty() {
        return QuadOutcome { value: 0.0, error: 0.0, bisections: 0, converged: true };
    }

    let mut bisections = 0;
    let converged = loop {
        let total: f64 = sorted_sum(&panels, |p| p.value);
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        if !total.is_finite() {
            break false;
        }
        if total_err <= (rel_tol * total.abs()).max(abs_tol) {
            break true;
        }
        if bisections >= max_bisections {
            break false;
        }

        // Split the panel with the largest error; ties resolved by the left
        // endpoint so refinement order is reproducible.
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| {
                p.error
                    .partial_cmp(&q.error)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(q.lo.partial_cmp(&p.lo).unwrap_or(std::cmp::Ordering::Equal))
            })
            .map(|(i, _)| i)
            .expect("panel list is non-empty");

        let Panel { lo, hi, .. } = panels[worst];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval no longer splittable in f64; tolerance unreachable.
            break false;
        }
        panels[worst] = kronrod_panel(&f, lo, mid);
        panels.push(kronrod_panel(&f, mid, hi));
        bisections += 1;
    };

    let value = sorted_sum(&panels, |p| p.value);
    let error = panels.iter().map(|p| p.error).sum();
    QuadOutcome { value, error, bisections, converged }
}

/// Compensated sum of a panel quantity in ascending interval order.
fn sorted_sum<F: Fn(&Panel) -> f64>(panels: &[Panel], get: F) -> f64 {
    let mut order: Vec<usize> = (0..panels.len()).collect();
    order.sort_by(|&i, &j| {
        panels[i]
            .lo
            .partial_cmp(&panels[j].lo)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut sum = 0.0;
    let mut comp = 0.0;
    for i in order {
        let y = get(&panels[i]) - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}
