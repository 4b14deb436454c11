use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default number of shuffles per distribution.
pub const SHUFFLE_SAMPLES: usize = 10_000;

/// Boxplot-style summary of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of an ascending slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("cannot summarise an empty sample"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            median: quantile(&sorted, 0.5),
            q1: quantile(&sorted, 0.25),
            q3: quantile(&sorted, 0.75),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditioningResult {
    /// Distance between the true pairing of lyrics and generated melodies.
    pub d: f64,
    /// Rows of the reference shuffled (songs swapped).
    pub rs: Summary,
    /// Columns of the reference shuffled (positions swapped, same for all rows).
    pub rn: Summary,
    /// Both shuffles.
    pub rns: Summary,
    pub samples: usize,
}

/// `‖D − G‖_F / (N·M)` for row-major `N × M` matrices.
pub fn matrix_distance(d: &[Vec<f64>], g: &[Vec<f64>]) -> Result<f64> {
    check_shapes(d, g)?;
    let n = d.len();
    let m = d[0].len();
    let ss: f64 = d
        .iter()
        .zip(g)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)))
        .sum();
    Ok(ss.sqrt() / (n * m) as f64)
}

fn check_shapes(d: &[Vec<f64>], g: &[Vec<f64>]) -> Result<()> {
    if d.is_empty() || d[0].is_empty() {
        return Err(invalid("distance matrices must be non-empty"));
    }
    let m = d[0].len();
    if d.len() != g.len() || d.iter().chain(g).any(|r| r.len() != m) {
        return Err(invalid("distance matrices must share one rectangular shape"));
    }
    Ok(())
}

fn shuffled_distance(d: &[Vec<f64>], g: &[Vec<f64>], rows: bool, cols: bool, rng: &mut ChaCha8Rng) -> f64 {
    let n = d.len();
    let m = d[0].len();
    let mut row_order: Vec<usize> = (0..n).collect();
    let mut col_order: Vec<usize> = (0..m).collect();
    if rows {
        row_order.shuffle(rng);
    }
    if cols {
        col_order.shuffle(rng);
    }
    let mut ss = 0.0;
    for (i, &ri) in row_order.iter().enumerate() {
        for (j, &cj) in col_order.iter().enumerate() {
            let diff = d[ri][cj] - g[i][j];
            ss += diff * diff;
        }
    }
    ss.sqrt() / (n * m) as f64
}

/// Distance of the true pairing plus its distribution under three shuffles of
/// the reference matrix. Shuffle `k` of each kind draws from its own ChaCha
/// stream, so results do not depend on scheduling.
pub fn conditioning_distance(d: &[Vec<f64>], g: &[Vec<f64>], samples: usize, seed: u64) -> Result<ConditioningResult> {
    let base = matrix_distance(d, g)?;
    if samples == 0 {
        return Err(invalid("shuffle experiment needs at least one sample"));
    }
    let run = |kind: u64, rows: bool, cols: bool| -> Result<Summary> {
        let values: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(kind * samples as u64 + k as u64);
                shuffled_distance(d, g, rows, cols, &mut rng)
            })
            .collect();
        Summary::of(&values)
    };
    Ok(ConditioningResult {
        d: base,
        rs: run(0, true, false)?,
        rn: run(1, false, true)?,
        rns: run(2, true, true)?,
        samples,
    })
}
