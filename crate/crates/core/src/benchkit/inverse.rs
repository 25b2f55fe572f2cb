use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::value_tolerance;
use super::reference::{PartOfSpeech, PropertyRanges, ReferenceDictionary, TargetType, TargetValue};
use super::BenchError;
use crate::homogenize::{round_2sf, PropertyVector, PROPERTY_KEYS};

/// Below this anisotropy index a material counts as isotropic.
pub const ANISOTROPY_THRESHOLD: f64 = 0.0025;
/// Chance of switching to random picks after each ranked pick.
pub const RANDOM_FILL_PROBABILITY: f64 = 0.10;
pub const QUERY_PREFIX: &str = "Write a metagen program that creates";

/// Rewards of the property salience heuristic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub isotropy: f64,
    pub directional_gap: f64,
    pub stiffness_per_volume: f64,
    pub stiffness_per_volume_threshold: f64,
    pub extremity: f64,
    pub rarity: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            isotropy: 10.0,
            directional_gap: 5.0,
            stiffness_per_volume: 3.0,
            stiffness_per_volume_threshold: 0.5,
            extremity: 2.0,
            rarity: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetDescription {
    pub description: String,
    pub description_type: PartOfSpeech,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub property: String,
    pub target_type: TargetType,
    pub target_value: TargetValue,
    pub target_descriptions: Vec<TargetDescription>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TargetProfile {
    pub targets: Vec<Target>,
}

/// Property family shared by overall and directional variants.
fn family(key: &str) -> &str {
    key.split('_').next().unwrap_or(key)
}

fn is_directional(key: &str) -> bool {
    key.contains('_')
}

fn value(props: &PropertyVector, key: &str) -> f64 {
    props.get(key).expect("key from PROPERTY_KEYS")
}

/// Salience score of every property, in output key order.
pub(super) fn score_properties(
    props: &PropertyVector,
    ranges: &PropertyRanges,
    w: &ScoreWeights,
) -> Result<Vec<(&'static str, f64)>, BenchError> {
    let isotropic = props.a < ANISOTROPY_THRESHOLD;
    let mut scores: BTreeMap<&str, f64> = PROPERTY_KEYS.iter().map(|k| (*k, 0.0)).collect();
    if isotropic {
        *scores.get_mut("A").unwrap() += w.isotropy;
    } else {
        for key in PROPERTY_KEYS.iter().copied().filter(|k| is_directional(k)) {
            let x = value(props, key);
            let gap = PROPERTY_KEYS
                .iter()
                .filter(|k| is_directional(k) && family(k) == family(key))
                .map(|k| (x - value(props, k)).abs())
                .fold(0.0, f64::max);
            *scores.get_mut(key).unwrap() += w.directional_gap * gap / ranges.get(key)?.span();
        }
    }
    if props.v > 0.0 && props.e / props.v > w.stiffness_per_volume_threshold {
        *scores.get_mut("E").unwrap() += w.stiffness_per_volume;
        *scores.get_mut("V").unwrap() += w.stiffness_per_volume;
    }
    for key in PROPERTY_KEYS {
        let stats = ranges.get(key)?;
        let x = value(props, key);
        *scores.get_mut(key).unwrap() += w.extremity * stats.extremity(x) + w.rarity / stats.density(x);
    }
    Ok(PROPERTY_KEYS.iter().map(|k| (*k, scores[k])).collect())
}

fn allowed(key: &str, chosen: &[&str], isotropic: bool) -> bool {
    if chosen.contains(&key) || (isotropic && is_directional(key)) {
        return false;
    }
    !chosen.iter().any(|c| family(c) == family(key) && is_directional(c) != is_directional(key))
}

/// Pick `n` salient properties: overall and directional variants of one
/// family never mix, and directional ones need a measurably anisotropic material.
pub fn select_active_properties(
    props: &PropertyVector,
    ranges: &PropertyRanges,
    n: usize,
    seed: u64,
) -> Result<Vec<String>, BenchError> {
    if !(1..=6).contains(&n) {
        return Err(BenchError::TargetCount(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let isotropic = props.a < ANISOTROPY_THRESHOLD;
    let mut ranked = score_properties(props, ranges, &ScoreWeights::default())?;
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut chosen: Vec<&str> = Vec::new();
    let mut random_fill = false;
    while chosen.len() < n {
        let pick = if random_fill {
            let options: Vec<&str> =
                PROPERTY_KEYS.iter().copied().filter(|k| allowed(k, &chosen, isotropic)).collect();
            options.choose(&mut rng).copied()
        } else {
            ranked.iter().map(|r| r.0).find(|k| allowed(k, &chosen, isotropic))
        };
        let Some(pick) = pick else { break };
        chosen.push(pick);
        if !random_fill && rng.gen::<f64>() < RANDOM_FILL_PROBABILITY {
            random_fill = true;
        }
    }
    Ok(chosen.into_iter().map(str::to_string).collect())
}

fn satisfied(t: TargetType, v: &TargetValue, x: f64) -> bool {
    match (t, v) {
        (TargetType::UpperBound, TargetValue::Scalar(b)) => x <= *b,
        (TargetType::LowerBound, TargetValue::Scalar(b)) => x >= *b,
        (TargetType::Value, TargetValue::Scalar(b)) => (x - b).abs() <= value_tolerance(*b),
        (_, TargetValue::Range([lo, hi])) => *lo <= x && x <= *hi,
        (TargetType::Range, TargetValue::Scalar(_)) => false,
    }
}

/// How closely a satisfied target pins the material's value.
fn looseness(v: &TargetValue, x: f64) -> f64 {
    match v {
        TargetValue::Scalar(b) => (x - b).abs(),
        TargetValue::Range([lo, hi]) => (x - lo).max(hi - x),
    }
}

/// Choose the tightest satisfied descriptor group for each property.
pub fn select_targets(
    props: &PropertyVector,
    chosen: &[String],
    reference: &ReferenceDictionary,
    seed: u64,
) -> Result<TargetProfile, BenchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets = Vec::with_capacity(chosen.len());
    for key in chosen {
        let entry = reference.get(key)?;
        let x = props.get(key).ok_or_else(|| BenchError::UnknownProperty(key.clone()))?;
        // Groups keyed by (target type, value) in first-seen order.
        let mut groups: Vec<(TargetType, TargetValue, Vec<TargetDescription>)> = Vec::new();
        for (pos, d) in entry.descriptors() {
            if !satisfied(d.target_type, &d.target_value, x) {
                continue;
            }
            let desc = TargetDescription { description: d.description.clone(), description_type: pos };
            match groups.iter_mut().find(|g| g.0 == d.target_type && g.1 == d.target_value) {
                Some(g) => g.2.push(desc),
                None => groups.push((d.target_type, d.target_value, vec![desc])),
            }
        }
        let best = groups.iter().map(|g| looseness(&g.1, x)).fold(f64::INFINITY, f64::min);
        let tight: Vec<usize> = (0..groups.len()).filter(|&i| looseness(&groups[i].1, x) <= best + 1e-12).collect();
        let target = if tight.is_empty() {
            let v = round_2sf(x);
            Target {
                property: key.clone(),
                target_type: TargetType::Value,
                target_value: TargetValue::Scalar(v),
                target_descriptions: vec![TargetDescription {
                    description: format!("a {} of {v}", entry.full_prop_name),
                    description_type: PartOfSpeech::Noun,
                }],
            }
        } else {
            // Tied groups share a value and differ only in bound type.
            let (t, v, descs) = groups.swap_remove(*tight.choose(&mut rng).expect("non-empty"));
            Target { property: key.clone(), target_type: t, target_value: v, target_descriptions: descs }
        };
        targets.push(target);
    }
    Ok(TargetProfile { targets })
}

fn aside(t: &Target) -> String {
    let p = &t.property;
    match (t.target_type, t.target_value) {
        (_, TargetValue::Range([lo, hi])) => format!("({lo} < {p} < {hi})"),
        (TargetType::UpperBound, TargetValue::Scalar(v)) => format!("({p} < {v})"),
        (TargetType::LowerBound, TargetValue::Scalar(v)) => format!("({p} > {v})"),
        (_, TargetValue::Scalar(v)) => format!("({p} = {v})"),
    }
}

fn join_english(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [a] => a.clone(),
        [a, b] => format!("{a} and {b}"),
        [rest @ .., last] => format!("{}, and {last}", rest.join(", ")),
    }
}

/// The part of the request after the fixed prefix, without the final period.
pub(super) fn query_target(profile: &TargetProfile, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bins: BTreeMap<PartOfSpeech, Vec<String>> = BTreeMap::new();
    for t in &profile.targets {
        let Some(d) = t.target_descriptions.choose(&mut rng) else { continue };
        let mut phrase = d.description.clone();
        if !phrase.chars().any(|c| c.is_ascii_digit()) {
            phrase = format!("{phrase} {}", aside(t));
        }
        bins.entry(d.description_type).or_default().push(phrase);
    }
    for list in bins.values_mut() {
        list.shuffle(&mut rng);
    }
    let mut adjectives = bins.remove(&PartOfSpeech::Adjective).unwrap_or_default();
    let back = if adjectives.is_empty() {
        Vec::new()
    } else {
        let front_count = rng.gen_range(1..=adjectives.len());
        adjectives.split_off(front_count)
    };
    let front = adjectives;
    let article = match front.first().and_then(|a| a.chars().next()) {
        Some(c) if "aeiouAEIOU".contains(c) => "an",
        _ => "a",
    };
    let mut clauses = Vec::new();
    if !back.is_empty() {
        clauses.push(format!("that is {}", join_english(&back)));
    }
    if let Some(verbs) = bins.get(&PartOfSpeech::Verb) {
        clauses.push(format!("that {}", join_english(verbs)));
    }
    if let Some(nouns) = bins.get(&PartOfSpeech::Noun) {
        clauses.push(format!("with {}", join_english(nouns)));
    }
    let mut text = article.to_string();
    if !front.is_empty() {
        text = format!("{text} {}", front.join(", "));
    }
    text.push_str(" material");
    if !clauses.is_empty() {
        text = format!("{text} {}", join_english(&clauses));
    }
    text
}

/// Natural-language request for a target profile.
pub fn render_inverse_query(profile: &TargetProfile, seed: u64) -> String {
    format!("{QUERY_PREFIX} {}.", query_target(profile, seed))
}
