//! Statistical layer: writhe quantization sweep, residual-writhe values,
//! Pearson correlations, linear and power-law scaling fits, and
//! distribution moments over collections of measured knots.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::RecordTable;

/// Signed fractional part: distance from the nearest integer, in [-1/2, 1/2).
fn signed_frac(x: f64) -> f64 {
    (x + 0.5).rem_euclid(1.0) - 0.5
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// One knot's measured quantities plus optional externally supplied
/// invariant columns; the unit of the analysis pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantRecord {
    pub label: String,
    pub crossing_number: u32,
    pub alternating: bool,
    pub ropelength: f64,
    pub space_writhe: f64,
    pub acn: f64,
    pub vertex_count: usize,
    pub hyperbolic_volume: Option<f64>,
    pub alexander_at_minus1: Option<f64>,
    pub rasmussen_s: Option<f64>,
    pub tau: Option<f64>,
}

const REQUIRED_COLUMNS: [&str; 7] = [
    "label",
    "crossing_number",
    "alternating",
    "ropelength",
    "space_writhe",
    "acn",
    "vertex_count",
];
const OPTIONAL_COLUMNS: [&str; 4] = [
    "hyperbolic_volume",
    "alexander_at_minus1",
    "rasmussen_s",
    "tau",
];

fn parse_flag(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "a" | "alternating" => Some(true),
        "0" | "false" | "no" | "n" | "nonalternating" | "non-alternating" => Some(false),
        _ => None,
    }
}

fn blank(s: &str) -> bool {
    s.is_empty() || s == "-" || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("nan")
}

impl InvariantRecord {
    /// Decode a tabular record set. Required columns: label,
    /// crossing_number, alternating, ropelength, space_writhe, acn,
    /// vertex_count. Optional: hyperbolic_volume, alexander_at_minus1,
    /// rasmussen_s, tau (blank, "-", or "na" cells stay unset).
    pub fn from_table(table: &RecordTable) -> Result<Vec<InvariantRecord>> {
        let col = |name: &str| -> Result<usize> {
            table
                .column_index(name)
                .ok_or_else(|| Error::DegenerateSample(format!("no column {name:?}")))
        };
        let req: Vec<usize> = REQUIRED_COLUMNS
            .iter()
            .map(|n| col(n))
            .collect::<Result<_>>()?;
        let opt: Vec<Option<usize>> = OPTIONAL_COLUMNS
            .iter()
            .map(|n| table.column_index(n))
            .collect();
        let mut out = Vec::with_capacity(table.rows.len());
        for (r, row) in table.rows.iter().enumerate() {
            let line = r + 2; // 1-based, after the header
            let bad = |msg: String| Error::Parse { line, msg };
            let num = |i: usize| -> Result<f64> {
                row[req[i]]
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad number {:?}", row[req[i]])))
            };
            let crossing_number: u32 = row[req[1]]
                .parse()
                .map_err(|_| bad(format!("bad crossing number {:?}", row[req[1]])))?;
            if crossing_number < 3 {
                return Err(bad(format!("crossing number {crossing_number} < 3")));
            }
            let alternating = parse_flag(&row[req[2]])
                .ok_or_else(|| bad(format!("bad alternating flag {:?}", row[req[2]])))?;
            let ropelength = num(3)?;
            if !(ropelength > 0.0) {
                return Err(bad(format!("ropelength {ropelength} must be positive")));
            }
            let ext = |slot: usize| -> Result<Option<f64>> {
                match opt[slot] {
                    Some(c) if !blank(&row[c]) => row[c]
                        .parse::<f64>()
                        .map(Some)
                        .map_err(|_| bad(format!("bad number {:?}", row[c]))),
                    _ => Ok(None),
                }
            };
            out.push(InvariantRecord {
                label: row[req[0]].clone(),
                crossing_number,
                alternating,
                ropelength,
                space_writhe: num(4)?,
                acn: num(5)?,
                vertex_count: row[req[6]]
                    .parse()
                    .map_err(|_| bad(format!("bad vertex count {:?}", row[req[6]])))?,
                hyperbolic_volume: ext(0)?,
                alexander_at_minus1: ext(1)?,
                rasmussen_s: ext(2)?,
                tau: ext(3)?,
            });
        }
        Ok(out)
    }

    /// Encode records back into the tabular format `from_table` reads.
    pub fn to_table(records: &[InvariantRecord]) -> RecordTable {
        let mut columns: Vec<String> =
            REQUIRED_COLUMNS.iter().map(|s| s.to_string()).collect();
        columns.extend(OPTIONAL_COLUMNS.iter().map(|s| s.to_string()));
        let mut table = RecordTable::new(columns);
        for rec in records {
            let ext = |v: Option<f64>| match v {
                Some(v) => format!("{v:.17e}"),
                None => "-".to_string(),
            };
            table.rows.push(vec![
                rec.label.clone(),
                rec.crossing_number.to_string(),
                if rec.alternating { "1" } else { "0" }.to_string(),
                format!("{:.17e}", rec.ropelength),
                format!("{:.17e}", rec.space_writhe),
                format!("{:.17e}", rec.acn),
                rec.vertex_count.to_string(),
                ext(rec.hyperbolic_volume),
                ext(rec.alexander_at_minus1),
                ext(rec.rasmussen_s),
                ext(rec.tau),
            ]);
        }
        table
    }
}

// ---------------------------------------------------------------------------
// Quantization
// ---------------------------------------------------------------------------

/// Best (quantum, offset) from the sweep, with the objective value at the
/// optimum and the final grid resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationResult {
    pub a: f64,
    pub b: f64,
    /// Mean squared deviation of Wr/A + B from the nearest integer; always
    /// in [0, 1/4].
    pub variance: f64,
    pub a_resolution: f64,
    pub b_resolution: f64,
}

/// Default grid spacing for `quantization_sweep`: (A step, B step). One
/// refinement pass divides both by 10, so A is resolved to 1e-4.
pub const DEFAULT_SWEEP_RESOLUTION: (f64, f64) = (1e-3, 1e-2);

/// Sweep objective: the mean squared deviation of writhe/a + b from the
/// nearest integer. Plain variance of the fractional part is blind to b
/// wherever no sample straddles a wrap point, so the deviation is measured
/// about the lattice itself; the result is periodic in b with period 1 and
/// bounded by 1/4.
pub fn quantization_objective(writhes: &[f64], a: f64, b: f64) -> f64 {
    let sum: f64 = writhes
        .iter()
        .map(|&w| {
            let f = signed_frac(w / a + b);
            f * f
        })
        .sum();
    sum / writhes.len() as f64
}

/// Grid search for the quantum A and offset B that make the writhes sit
/// closest to the lattice {(k - B)·A : k integer}, refined once on a 10x
/// finer grid around the best coarse cell. Ties break toward the smallest
/// A, then the smallest B.
pub fn quantization_sweep(
    writhes: &[f64],
    a_range: (f64, f64),
    b_range: (f64, f64),
    resolution: (f64, f64),
) -> Result<QuantizationResult> {
    if writhes.len() < 3 {
        return Err(Error::DegenerateSample(format!(
            "need at least 3 writhes, got {}",
            writhes.len()
        )));
    }
    if writhes.iter().any(|w| !w.is_finite()) {
        return Err(Error::DegenerateSample("non-finite writhe".into()));
    }
    if !(a_range.0 > 0.0) || !(a_range.1 >= a_range.0) {
        return Err(Error::DegenerateSample(format!(
            "quantum range must be positive, got {a_range:?}"
        )));
    }
    if !(b_range.1 >= b_range.0) {
        return Err(Error::DegenerateSample(format!("bad offset range {b_range:?}")));
    }
    if !(resolution.0 > 0.0) || !(resolution.1 > 0.0) {
        return Err(Error::DegenerateSample(format!("bad resolution {resolution:?}")));
    }

    let coarse = best_cell(writhes, a_range, b_range, resolution);
    // One refinement pass: 10x finer grid over the +-1-cell neighborhood of
    // the coarse optimum.
    let fine_res = (resolution.0 / 10.0, resolution.1 / 10.0);
    let fine_a = (
        (coarse.0 - resolution.0).max(a_range.0),
        (coarse.0 + resolution.0).min(a_range.1),
    );
    let fine_b = (
        (coarse.1 - resolution.1).max(b_range.0),
        (coarse.1 + resolution.1).min(b_range.1),
    );
    let fine = best_cell(writhes, fine_a, fine_b, fine_res);
    Ok(QuantizationResult {
        a: fine.0,
        b: fine.1,
        variance: fine.2,
        a_resolution: fine_res.0,
        b_resolution: fine_res.1,
    })
}

/// Exhaustive objective minimum over a uniform grid; A rows in parallel,
/// deterministic lexicographic tie-break on (objective, A index, B index).
fn best_cell(
    writhes: &[f64],
    a_range: (f64, f64),
    b_range: (f64, f64),
    res: (f64, f64),
) -> (f64, f64, f64) {
    let na = ((a_range.1 - a_range.0) / res.0 + 1e-9).floor() as usize + 1;
    let nb = ((b_range.1 - b_range.0) / res.1 + 1e-9).floor() as usize + 1;
    let best = (0..na)
        .into_par_iter()
        .map(|ai| {
            let a = a_range.0 + ai as f64 * res.0;
            let scaled: Vec<f64> = writhes.iter().map(|&w| w / a).collect();
            let mut local = (f64::INFINITY, ai, 0usize);
            for bi in 0..nb {
                let b = b_range.0 + bi as f64 * res.1;
                let obj = scaled
                    .iter()
                    .map(|&x| {
                        let f = signed_frac(x + b);
                        f * f
                    })
                    .sum::<f64>()
                    / writhes.len() as f64;
                if obj < local.0 {
                    local = (obj, ai, bi);
                }
            }
            local
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, usize::MAX),
            |x, y| {
                if (y.0, y.1, y.2) < (x.0, x.1, x.2) {
                    y
                } else {
                    x
                }
            },
        );
    (
        a_range.0 + best.1 as f64 * res.0,
        b_range.0 + best.2 as f64 * res.1,
        best.0,
    )
}

/// Signed deviation of a writhe from its nearest allowed value: integer
/// multiples of `quantum`, or half-integer multiples (odd multiples of
/// quantum/2) when `offset_half` is set. Always in [-quantum/2, quantum/2).
pub fn residual_writhe(wr: f64, quantum: f64, offset_half: bool) -> f64 {
    let shift = if offset_half { 0.5 } else { 0.0 };
    quantum * signed_frac(wr / quantum - shift)
}

// ---------------------------------------------------------------------------
// Correlation and fits
// ---------------------------------------------------------------------------

/// Sample Pearson correlation coefficient, in [-1, 1].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "need two equal-length samples of size >= 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateSample("zero variance in correlation input".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// y = a + b x
    Linear,
    /// y = a x^b
    Power,
}

/// Least-squares fit with parameter standard errors.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: FitModel,
    /// (intercept | prefactor, standard error)
    pub a: (f64, f64),
    /// (slope | exponent, standard error)
    pub b: (f64, f64),
    /// Residual sum of squares in original units.
    pub rss: f64,
}

/// Ordinary least squares y = a + b x with textbook standard errors.
/// Returns ((a, se_a), (b, se_b), rss).
#[allow(clippy::type_complexity)]
fn ols(x: &[f64], y: &[f64]) -> Result<((f64, f64), (f64, f64), f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateSample("no spread in the fit abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let dof = (x.len() as f64 - 2.0).max(1.0);
    let s2 = rss / dof;
    let se_slope = (s2 / sxx).sqrt();
    let se_intercept = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
    Ok(((intercept, se_intercept), (slope, se_slope), rss))
}

/// Unweighted least squares of y against x over the given points. The power
/// model is fit on log-log axes; its standard errors come from the
/// linearized covariance (prefactor error by the delta method) and its
/// residual sum of squares is reported in original units.
pub fn fit_points(points: &[(f64, f64)], model: FitModel) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::DegenerateSample(format!(
            "need at least 3 points to fit, got {}",
            points.len()
        )));
    }
    match model {
        FitModel::Linear => {
            let x: Vec<f64> = points.iter().map(|p| p.0).collect();
            let y: Vec<f64> = points.iter().map(|p| p.1).collect();
            let (a, b, rss) = ols(&x, &y)?;
            Ok(FitResult { model, a, b, rss })
        }
        FitModel::Power => {
            if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
                return Err(Error::DegenerateSample(
                    "power-law fit needs positive coordinates".into(),
                ));
            }
            let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
            let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
            let ((lna, se_lna), b, _) = ols(&lx, &ly)?;
            let a = lna.exp();
            let rss = points
                .iter()
                .map(|&(x, y)| {
                    let r = y - a * x.powf(b.0);
                    r * r
                })
                .sum();
            Ok(FitResult { model, a: (a, a * se_lna), b, rss })
        }
    }
}

/// Mean ropelength per crossing number, sorted by crossing number; one
/// point per group so crossing numbers with more knots carry no extra
/// weight.
pub fn group_mean_ropelength(records: &[InvariantRecord]) -> Vec<(f64, f64)> {
    let mut groups: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for r in records {
        let e = groups.entry(r.crossing_number).or_insert((0.0, 0));
        e.0 += r.ropelength;
        e.1 += 1;
    }
    groups
        .into_iter()
        .map(|(c, (sum, n))| (c as f64, sum / n as f64))
        .collect()
}

/// Scaling of ropelength with crossing number: records are collapsed to one
/// mean per crossing number, then fit unweighted.
pub fn fit_scaling(records: &[InvariantRecord], model: FitModel) -> Result<FitResult> {
    let points = group_mean_ropelength(records);
    if points.len() < 3 {
        return Err(Error::DegenerateSample(format!(
            "need at least 3 distinct crossing numbers, got {}",
            points.len()
        )));
    }
    fit_points(&points, model)
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionStats {
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator).
    pub sd: f64,
    /// Coefficient of variation sd/mean.
    pub sd_over_mean: f64,
    /// Standardized third moment (biased, n denominator).
    pub skewness: f64,
    /// Standardized fourth moment, non-excess: a normal sample tends to 3.
    pub kurtosis: f64,
}

pub fn distribution_stats(values: &[f64]) -> Result<DistributionStats> {
    let n = values.len();
    if n < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 values, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    if m2 == 0.0 {
        return Err(Error::DegenerateSample("zero variance sample".into()));
    }
    let sd = (m2 / (nf - 1.0)).sqrt();
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    Ok(DistributionStats {
        mean,
        sd,
        sd_over_mean: sd / mean,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

/// Standard deviation of the uniform distribution on [0, 1): 1/sqrt(12),
/// the null against which residual-writhe spreads are compared.
pub fn uniform_null_sd() -> f64 {
    (1.0_f64 / 12.0).sqrt()
}

// ---------------------------------------------------------------------------
// Histograms (plot-ready output for the CLI)
// ---------------------------------------------------------------------------

/// Uniform-bin histogram over [lo, hi); values outside are dropped. Returns
/// (bin center, count, density) with density = count / (kept * width), so
/// densities integrate to 1 over the kept mass.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Vec<(f64, usize, f64)>> {
    if bins == 0 || !(hi > lo) {
        return Err(Error::DegenerateSample(format!(
            "bad histogram spec: {bins} bins over [{lo}, {hi})"
        )));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut kept = 0usize;
    for &v in values {
        if v >= lo && v < hi {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
            kept += 1;
        }
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let center = lo + (i as f64 + 0.5) * width;
            let density = if kept == 0 { 0.0 } else { c as f64 / (kept as f64 * width) };
            (center, c, density)
        })
        .collect())
}
