use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelVariant, RunSummary};
use crate::error::{Error, Result};

pub const BOOTSTRAP_RESAMPLES: usize = 1000;
const BOOTSTRAP_SEED: u64 = 0xb007_5eed;
const MIN_UNCENSORED: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub median_tau: f64,
    pub runs: usize,
    pub uncensored: usize,
    /// The median is a censored value, hence only a lower bound.
    pub censored_median: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Some cell's median is censored; the slope is then not an estimate.
    pub lower_bound: bool,
    pub points: Vec<ScalingPoint>,
}

/// `(tau, censored)` pairs; censored runs sort after uncensored ones at
/// equal `tau` since their true value is larger.
fn cell_median(sample: &mut [(u64, bool)]) -> (f64, bool) {
    sample.sort_unstable();
    let k = sample.len();
    if k % 2 == 1 {
        let (t, c) = sample[k / 2];
        (t as f64, c)
    } else {
        let (a, ca) = sample[k / 2 - 1];
        let (b, cb) = sample[k / 2];
        ((a as f64 + b as f64) / 2.0, ca || cb)
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn slope_of(cells: &[(usize, Vec<(u64, bool)>)]) -> f64 {
    let pts: Vec<(f64, f64)> = cells
        .iter()
        .map(|(n, s)| {
            let mut s = s.clone();
            ((*n as f64).ln(), cell_median(&mut s).0.max(1.0).ln())
        })
        .collect();
    least_squares_slope(&pts)
}

/// Least-squares slope of `ln median(tau)` against `ln n` over the runs
/// matching `beta` and `variant`, with a percentile bootstrap 95% interval
/// from resampling runs within each `n`.
///
/// A cell enters the fit when it has at least 10 uncensored runs or is
/// entirely censored; at least two such values of `n` are required.
pub fn scaling_exponent(runs: &[RunSummary], beta: f64, variant: ModelVariant) -> Result<ScalingFit> {
    let mut ns: Vec<usize> = runs
        .iter()
        .filter(|r| r.beta == beta && r.variant == variant)
        .map(|r| r.n)
        .collect();
    ns.sort_unstable();
    ns.dedup();

    let mut cells = Vec::new();
    let mut points = Vec::new();
    for n in ns {
        let mut sample: Vec<(u64, bool)> = runs
            .iter()
            .filter(|r| r.beta == beta && r.variant == variant && r.n == n)
            .map(|r| (r.tau, r.censored))
            .collect();
        let uncensored = sample.iter().filter(|s| !s.1).count();
        if uncensored < MIN_UNCENSORED && uncensored != 0 {
            continue;
        }
        let (median_tau, censored_median) = cell_median(&mut sample);
        points.push(ScalingPoint {
            n,
            median_tau,
            runs: sample.len(),
            uncensored,
            censored_median,
        });
        cells.push((n, sample));
    }
    if cells.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need two values of n with >= {MIN_UNCENSORED} uncensored runs, found {}",
            cells.len()
        )));
    }

    let slope = slope_of(&cells);
    let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED);
    let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let resampled: Vec<(usize, Vec<(u64, bool)>)> = cells
                .iter()
                .map(|(n, s)| (*n, (0..s.len()).map(|_| s[rng.random_range(0..s.len())]).collect()))
                .collect();
            slope_of(&resampled)
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let at = |q: f64| boot[((q * (boot.len() - 1) as f64).round() as usize).min(boot.len() - 1)];
    Ok(ScalingFit {
        slope,
        ci_low: at(0.025),
        ci_high: at(0.975),
        lower_bound: points.iter().any(|p| p.censored_median),
        points,
    })
}
