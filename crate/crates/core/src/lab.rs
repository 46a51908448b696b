//! Certified brackets for the subadditivity ratio
//! `R = γ(E∪F)/(γ(E) + γ(F))` and interval verdicts on how it moves with `r`.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::Schedule;
use crate::discrete::predicted_slope;
use crate::error::{Error, Result};
use crate::geometry::{Label, Point, Scene, Shape};
use crate::integrals::QuadratureSettings;
use crate::solver::{gamma_bounds, BoundsResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRecord {
    pub r: f64,
    pub ratio_low: f64,
    pub ratio_high: f64,
    pub ef_bounds: BoundsResult,
    pub e_bounds: BoundsResult,
    pub f_bounds: BoundsResult,
}

impl SweepRecord {
    pub fn from_bounds(r: f64, ef: BoundsResult, e: BoundsResult, f: BoundsResult) -> Self {
        SweepRecord {
            r,
            ratio_low: ef.lower / (e.upper + f.upper),
            ratio_high: ef.upper / (e.lower + f.lower),
            ef_bounds: ef,
            e_bounds: e,
            f_bounds: f,
        }
    }

    pub fn gap(&self) -> f64 {
        self.ratio_high - self.ratio_low
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.ratio_low + self.ratio_high)
    }

    /// `γ(E∪F) < γ(E) + γ(F)` is certified.
    pub fn certified_subadditive(&self) -> bool {
        self.ratio_high < 1.0
    }
}

/// Keeps the overrides of the shapes in `indices`, renumbered.
fn restrict(schedule: &Schedule, indices: &[usize]) -> Schedule {
    let overrides: BTreeMap<usize, _> = indices
        .iter()
        .enumerate()
        .filter_map(|(new, old)| schedule.overrides.get(old).map(|&m| (new, m)))
        .collect();
    Schedule {
        default: schedule.default,
        overrides,
    }
}

/// Ratio bracket for a labelled scene; `r` is only recorded.
pub fn scene_ratio(
    scene: &Scene,
    r: f64,
    schedule: &Schedule,
    s: &QuadratureSettings,
) -> Result<SweepRecord> {
    let indices = |label: Label| -> Vec<usize> {
        (0..scene.labels.len())
            .filter(|&i| scene.labels[i] == label)
            .collect()
    };
    let (ie, if_) = (indices(Label::E), indices(Label::F));
    if ie.is_empty() || if_.is_empty() {
        return Err(Error::Config("both labels E and F must be present".into()));
    }
    let ef = gamma_bounds(scene, schedule, s)?;
    let e = gamma_bounds(&scene.labelled(Label::E), &restrict(schedule, &ie), s)?;
    let f = gamma_bounds(&scene.labelled(Label::F), &restrict(schedule, &if_), s)?;
    Ok(SweepRecord::from_bounds(r, ef, e, f))
}

/// Disks of radius `r` at `centers`, the first `m` labelled E and the rest F.
pub fn split_scene(centers: &[Point], m: usize, r: f64) -> Result<Scene> {
    let n = centers.len();
    if n < 2 || !(1..n).contains(&m) {
        return Err(Error::Split {
            m,
            max: n.saturating_sub(1),
        });
    }
    let shapes = centers
        .iter()
        .map(|&center| Shape::Disk { center, radius: r })
        .collect();
    let labels = (0..n)
        .map(|i| if i < m { Label::E } else { Label::F })
        .collect();
    Scene::with_labels(shapes, labels)
}

pub fn ratio_bounds(
    centers: &[Point],
    m: usize,
    r: f64,
    schedule: &Schedule,
    s: &QuadratureSettings,
) -> Result<SweepRecord> {
    scene_ratio(&split_scene(centers, m, r)?, r, schedule, s)
}

/// Half the smallest center distance: radii must stay below it.
pub fn disjointness_limit(centers: &[Point]) -> f64 {
    let mut d = f64::INFINITY;
    for j in 0..centers.len() {
        for k in (j + 1)..centers.len() {
            d = d.min((centers[j] - centers[k]).norm());
        }
    }
    0.5 * d
}

/// `steps` radii evenly spaced from `r_min` to `r_max` inclusive.
/// Without `r_min` the grid is `r_max·i/steps`, `i = 1..=steps`.
pub fn radius_grid(r_min: Option<f64>, r_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::Config(format!(
            "bad radius grid: r_max={r_max}, steps={steps}"
        )));
    }
    match r_min {
        None => Ok((1..=steps)
            .map(|i| r_max * i as f64 / steps as f64)
            .collect()),
        Some(lo) if lo > 0.0 && lo <= r_max => {
            if steps == 1 {
                return Ok(vec![r_max]);
            }
            Ok((0..steps)
                .map(|i| lo + (r_max - lo) * i as f64 / (steps - 1) as f64)
                .collect())
        }
        Some(lo) => Err(Error::Config(format!("r_min={lo} must lie in (0, r_max]"))),
    }
}

/// One ratio bracket per radius; a failed radius keeps its slot as an error.
/// Results do not depend on the number of worker threads.
pub fn sweep(
    centers: &[Point],
    m: usize,
    grid: &[f64],
    schedule: &Schedule,
    s: &QuadratureSettings,
) -> Vec<(f64, Result<SweepRecord>)> {
    grid.par_iter()
        .map(|&r| (r, ratio_bounds(centers, m, r, schedule, s)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Trend {
    CertifiedDecrease,
    CertifiedIncrease,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    /// Trend between records `i` and `i+1`.
    pub pairs: Vec<Trend>,
    pub subadditive: Vec<bool>,
    pub decreases: usize,
    pub increases: usize,
    pub undecided: usize,
}

impl Verdict {
    pub fn all_decreasing(&self) -> bool {
        self.decreases == self.pairs.len()
    }

    pub fn violated(&self) -> bool {
        self.increases > 0
    }
}

/// Interval comparison of neighbouring records; records must be sorted by `r`.
pub fn monotonicity_verdict(records: &[SweepRecord]) -> Verdict {
    let pairs: Vec<Trend> = records
        .windows(2)
        .map(|w| {
            if w[1].ratio_high < w[0].ratio_low {
                Trend::CertifiedDecrease
            } else if w[1].ratio_low > w[0].ratio_high {
                Trend::CertifiedIncrease
            } else {
                Trend::Undecided
            }
        })
        .collect();
    let count = |t: Trend| pairs.iter().filter(|&&p| p == t).count();
    Verdict {
        decreases: count(Trend::CertifiedDecrease),
        increases: count(Trend::CertifiedIncrease),
        undecided: count(Trend::Undecided),
        subadditive: records
            .iter()
            .map(SweepRecord::certified_subadditive)
            .collect(),
        pairs,
    }
}

/// Widest ratio bracket; 0 for no records.
pub fn gap_report(records: &[SweepRecord]) -> f64 {
    records.iter().map(SweepRecord::gap).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub radii: Vec<f64>,
    pub ratio_mid: Vec<f64>,
    /// Intercept `C` of the fit `(1 − R)/r² ≈ C + D·r`.
    pub fitted_slope: f64,
    pub fitted_correction: f64,
    pub predicted_slope: f64,
    pub relative_deviation: f64,
}

/// Least-squares line through `(x, y)`, returned as `(intercept, slope)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Fits `(1 − R)/r²` at `r_k = r0·2^−k`, `k = 0..=5`, and compares the intercept with `δ/n`.
pub fn asymptotic_check(
    centers: &[Point],
    m: usize,
    r0: f64,
    schedule: &Schedule,
    s: &QuadratureSettings,
) -> Result<AsymptoticReport> {
    let predicted = predicted_slope(centers, m)?;
    let radii: Vec<f64> = (0..6).map(|k| r0 * 0.5f64.powi(k)).collect();
    let ratio_mid = radii
        .par_iter()
        .map(|&r| ratio_bounds(centers, m, r, schedule, s).map(|rec| rec.midpoint()))
        .collect::<Result<Vec<f64>>>()?;
    let y: Vec<f64> = radii
        .iter()
        .zip(&ratio_mid)
        .map(|(r, q)| (1.0 - q) / (r * r))
        .collect();
    let (c, d) = fit_line(&radii, &y);
    Ok(AsymptoticReport {
        fitted_slope: c,
        fitted_correction: d,
        predicted_slope: predicted,
        relative_deviation: (c - predicted).abs() / predicted,
        radii,
        ratio_mid,
    })
}

pub const CSV_HEADER: &str =
    "r,ratio_low,ratio_high,gamma_ef_low,gamma_ef_high,gamma_e_low,gamma_e_high,gamma_f_low,gamma_f_high,n_basis,wall_time_s";

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the sweep as CSV. Failed radii get `NaN` in every numeric column
/// and `n_basis` 0. With `timing` off the time column is 0 so that output is reproducible.
pub fn write_csv<W: Write>(
    w: W,
    rows: &[(f64, Result<SweepRecord>)],
    timing: bool,
) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER.split(','))?;
    for (r, row) in rows {
        let line: Vec<String> = match row {
            Ok(rec) => {
                let time = if timing {
                    rec.ef_bounds.wall_time_s + rec.e_bounds.wall_time_s + rec.f_bounds.wall_time_s
                } else {
                    0.0
                };
                let mut line: Vec<String> = [
                    rec.r,
                    rec.ratio_low,
                    rec.ratio_high,
                    rec.ef_bounds.lower,
                    rec.ef_bounds.upper,
                    rec.e_bounds.lower,
                    rec.e_bounds.upper,
                    rec.f_bounds.lower,
                    rec.f_bounds.upper,
                ]
                .iter()
                .map(|&x| fmt17(x))
                .collect();
                line.push(rec.ef_bounds.n_basis.to_string());
                line.push(fmt17(time));
                line
            }
            Err(_) => {
                let mut line = vec![fmt17(*r)];
                line.extend(std::iter::repeat_n("NaN".to_string(), 8));
                line.push("0".into());
                line.push("NaN".into());
                line
            }
        };
        out.write_record(&line)?;
    }
    out.flush()?;
    Ok(())
}

/// `n` centers uniform in `[−half_width, half_width]²`, pairwise at least `min_separation` apart.
pub fn random_centers(
    seed: u64,
    n: usize,
    half_width: f64,
    min_separation: f64,
) -> Result<Vec<Point>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Point> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::Config(format!(
                "could not place {n} centers {min_separation} apart in a box of half-width {half_width}"
            )));
        }
        let z = Complex64::new(
            rng.gen_range(-half_width..=half_width),
            rng.gen_range(-half_width..=half_width),
        );
        if out.iter().all(|p| (p - z).norm() >= min_separation) {
            out.push(z);
        }
    }
    Ok(out)
}

/// `n` centers on the real axis, `spacing` apart and symmetric about 0.
pub fn collinear_centers(n: usize, spacing: f64) -> Vec<Point> {
    let shift = 0.5 * (n as f64 - 1.0);
    (0..n)
        .map(|i| Complex64::new(spacing * (i as f64 - shift), 0.0))
        .collect()
}
