use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::homogenize::{PropertyVector, PROPERTY_KEYS};

const DEFAULT_REFERENCE: &str = include_str!("../../assets/reference/properties.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetType {
    Value,
    UpperBound,
    LowerBound,
    Range,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetValue {
    Scalar(f64),
    Range([f64; 2]),
}

impl TargetValue {
    /// Scalar value, or the range midpoint.
    pub fn center(&self) -> f64 {
        match self {
            TargetValue::Scalar(v) => *v,
            TargetValue::Range([lo, hi]) => 0.5 * (lo + hi),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartOfSpeech {
    Adjective,
    Noun,
    Verb,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub description: String,
    pub target_type: TargetType,
    pub target_value: TargetValue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyGenerality {
    Overall,
    Directional,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeStats {
    pub min: f64,
    pub max: f64,
    pub q1: f64,
    pub q3: f64,
    pub densely_populated_ranges: Vec<[f64; 2]>,
}

impl RangeStats {
    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    /// Coarse coverage density at `x`: 4 in a dense band, 2 inside the quartiles, 1 elsewhere.
    pub fn density(&self, x: f64) -> f64 {
        if self.densely_populated_ranges.iter().any(|[lo, hi]| (*lo..=*hi).contains(&x)) {
            4.0
        } else if (self.q1..=self.q3).contains(&x) {
            2.0
        } else {
            1.0
        }
    }

    /// Distance outside `[q1, q3]`, relative to the full span.
    pub fn extremity(&self, x: f64) -> f64 {
        let d = if x < self.q1 {
            self.q1 - x
        } else if x > self.q3 {
            x - self.q3
        } else {
            0.0
        };
        d / self.span()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReference {
    pub full_prop_name: String,
    #[serde(default)]
    pub alternate_symbols: Vec<String>,
    pub property_generality: PropertyGenerality,
    pub property_type: String,
    pub dataset_coverage: RangeStats,
    pub smallest_meaningful_quantization: f64,
    #[serde(default)]
    pub adjective_descriptors: Vec<Descriptor>,
    #[serde(default)]
    pub property_descriptors: Vec<Descriptor>,
    #[serde(default)]
    pub verb_descriptors: Vec<Descriptor>,
}

impl PropertyReference {
    /// All descriptors tagged with their part of speech.
    pub fn descriptors(&self) -> impl Iterator<Item = (PartOfSpeech, &Descriptor)> {
        let adj = self.adjective_descriptors.iter().map(|d| (PartOfSpeech::Adjective, d));
        let noun = self.property_descriptors.iter().map(|d| (PartOfSpeech::Noun, d));
        let verb = self.verb_descriptors.iter().map(|d| (PartOfSpeech::Verb, d));
        adj.chain(noun).chain(verb)
    }
}

/// Per-property names, coverage statistics and request phrases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReferenceDictionary {
    pub entries: BTreeMap<String, PropertyReference>,
}

impl Default for ReferenceDictionary {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_REFERENCE).expect("bundled reference dictionary is valid")
    }
}

impl ReferenceDictionary {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn get(&self, key: &str) -> Result<&PropertyReference, BenchError> {
        self.entries.get(key).ok_or_else(|| BenchError::UnknownProperty(key.to_string()))
    }

    pub fn ranges(&self) -> PropertyRanges {
        PropertyRanges {
            stats: self.entries.iter().map(|(k, r)| (k.clone(), r.dataset_coverage.clone())).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PropertyRanges {
    pub stats: BTreeMap<String, RangeStats>,
}

impl Default for PropertyRanges {
    fn default() -> Self {
        ReferenceDictionary::default().ranges()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

const DENSITY_BINS: usize = 10;

impl PropertyRanges {
    pub fn get(&self, key: &str) -> Result<&RangeStats, BenchError> {
        self.stats.get(key).ok_or_else(|| BenchError::UnknownProperty(key.to_string()))
    }

    /// Statistics over a set of simulated materials. Dense ranges are merged
    /// histogram bins holding at least 1.5 times the average bin count.
    pub fn from_samples(samples: &[PropertyVector]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut stats = BTreeMap::new();
        for key in PROPERTY_KEYS {
            let mut values: Vec<f64> = samples.iter().filter_map(|p| p.get(key)).filter(|v| v.is_finite()).collect();
            if values.is_empty() {
                continue;
            }
            values.sort_by(f64::total_cmp);
            let (mut min, mut max) = (values[0], values[values.len() - 1]);
            if max - min <= 0.0 {
                let pad = 0.5 * min.abs().max(1e-3);
                min -= pad;
                max += pad;
            }
            let width = (max - min) / DENSITY_BINS as f64;
            let mut counts = [0usize; DENSITY_BINS];
            for v in &values {
                counts[(((v - min) / width) as usize).min(DENSITY_BINS - 1)] += 1;
            }
            let threshold = 1.5 * values.len() as f64 / DENSITY_BINS as f64;
            let mut dense: Vec<[f64; 2]> = Vec::new();
            for (b, &c) in counts.iter().enumerate() {
                if (c as f64) < threshold {
                    continue;
                }
                let (lo, hi) = (min + b as f64 * width, min + (b + 1) as f64 * width);
                match dense.last_mut() {
                    Some(last) if (last[1] - lo).abs() < 1e-12 => last[1] = hi,
                    _ => dense.push([lo, hi]),
                }
            }
            stats.insert(
                key.to_string(),
                RangeStats {
                    min,
                    max,
                    q1: quantile(&values, 0.25),
                    q3: quantile(&values, 0.75),
                    densely_populated_ranges: dense,
                },
            );
        }
        Some(PropertyRanges { stats })
    }
}
