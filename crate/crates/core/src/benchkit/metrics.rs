use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::inverse::TargetProfile;
use super::reference::{PropertyRanges, TargetType, TargetValue};
use super::tasks::UNDERSTANDING_KEYS;
use super::BenchError;
use crate::discretize::VoxelGrid;
use crate::homogenize::PropertyVector;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionScore {
    pub iou: f64,
    pub chamfer: f64,
}

/// Half a unit in the second significant digit of `v`: how far a value may
/// sit from its two-significant-figure rounding.
pub fn value_tolerance(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return 1e-12;
    }
    0.5 * 10f64.powi(v.abs().log10().floor() as i32 - 1) * (1.0 + 1e-9)
}

/// Exact squared Euclidean distance transform of one line (lower envelope of
/// parabolas rooted at the finite samples).
fn edt_line(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let mut k: Option<usize> = None;
    for q in 0..f.len() {
        if !f[q].is_finite() {
            continue;
        }
        let Some(mut top) = k else {
            k = Some(0);
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            continue;
        };
        loop {
            let p = v[top];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[top] {
                top -= 1;
                continue;
            }
            top += 1;
            v[top] = q;
            z[top] = s;
            z[top + 1] = f64::INFINITY;
            break;
        }
        k = Some(top);
    }
    if k.is_none() {
        out.fill(f64::INFINITY);
        return;
    }
    let mut j = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[j + 1] < q as f64 {
            j += 1;
        }
        let d = q as f64 - v[j] as f64;
        *o = d * d + f[v[j]];
    }
}

/// Squared distance (in voxels) from every voxel center to the nearest occupied one.
fn squared_distance_field(grid: &VoxelGrid) -> Vec<f64> {
    let r = grid.resolution;
    let mut d: Vec<f64> = grid.occupancy.iter().map(|&o| if o { 0.0 } else { f64::INFINITY }).collect();
    let (mut line, mut out) = (vec![0.0; r], vec![0.0; r]);
    let (mut v, mut z) = (vec![0usize; r], vec![0.0; r + 1]);
    for axis in 0..3 {
        for a in 0..r {
            for b in 0..r {
                let idx = |t: usize| match axis {
                    0 => grid.index(t, a, b),
                    1 => grid.index(a, t, b),
                    _ => grid.index(a, b, t),
                };
                for t in 0..r {
                    line[t] = d[idx(t)];
                }
                edt_line(&line, &mut out, &mut v, &mut z);
                for t in 0..r {
                    d[idx(t)] = out[t];
                }
            }
        }
    }
    d
}

fn mean_distance(from: &VoxelGrid, field: &[f64]) -> f64 {
    let (sum, count) = from
        .occupancy
        .iter()
        .zip(field)
        .filter(|(o, _)| **o)
        .fold((0.0, 0usize), |(s, c), (_, d)| (s + d.sqrt(), c + 1));
    sum / count as f64 / from.resolution as f64
}

/// IoU of occupied voxels and symmetric chamfer distance between voxel centers, in cell lengths.
///
/// When exactly one grid is empty the chamfer distance is reported as the cell diagonal.
pub fn eval_reconstruction(pred: &VoxelGrid, truth: &VoxelGrid) -> Result<ReconstructionScore, BenchError> {
    if pred.resolution != truth.resolution {
        return Err(BenchError::ResolutionMismatch(pred.resolution, truth.resolution));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (a, b) in pred.occupancy.iter().zip(&truth.occupancy) {
        inter += (*a && *b) as usize;
        union += (*a || *b) as usize;
    }
    if union == 0 {
        return Err(BenchError::BothEmpty);
    }
    let iou = inter as f64 / union as f64;
    let chamfer = if pred.count() == 0 || truth.count() == 0 {
        3f64.sqrt()
    } else {
        let to_truth = squared_distance_field(truth);
        let to_pred = squared_distance_field(pred);
        0.5 * (mean_distance(pred, &to_truth) + mean_distance(truth, &to_pred))
    };
    Ok(ReconstructionScore { iou, chamfer })
}

/// Mean range-normalized absolute error over the six global properties.
pub fn eval_understanding(
    pred: &BTreeMap<String, f64>,
    truth: &BTreeMap<String, f64>,
    ranges: &PropertyRanges,
) -> Result<f64, BenchError> {
    let mut total = 0.0;
    for key in UNDERSTANDING_KEYS {
        let p = pred.get(key).ok_or_else(|| BenchError::MissingKey(key.to_string()))?;
        let t = truth.get(key).ok_or_else(|| BenchError::MissingKey(key.to_string()))?;
        total += (p - t).abs() / ranges.get(key)?.span();
    }
    Ok(total / UNDERSTANDING_KEYS.len() as f64)
}

/// Mean normalized violation of a target profile by simulated properties, clipped to [0, 1].
pub fn eval_inverse(profile: &TargetProfile, simulated: &PropertyVector, ranges: &PropertyRanges) -> Result<f64, BenchError> {
    if profile.targets.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for t in &profile.targets {
        let x = simulated.get(&t.property).ok_or_else(|| BenchError::UnknownProperty(t.property.clone()))?;
        let miss = match (t.target_type, t.target_value) {
            (_, TargetValue::Range([lo, hi])) => (lo - x).max(x - hi).max(0.0),
            (TargetType::UpperBound, TargetValue::Scalar(v)) => (x - v).max(0.0),
            (TargetType::LowerBound, TargetValue::Scalar(v)) => (v - x).max(0.0),
            (_, TargetValue::Scalar(v)) => ((x - v).abs() - value_tolerance(v)).max(0.0),
        };
        total += miss / ranges.get(&t.property)?.span();
    }
    Ok((total / profile.targets.len() as f64).clamp(0.0, 1.0))
}
