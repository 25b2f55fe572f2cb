use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::inverse::{query_target, select_active_properties, select_targets};
use super::records::{TaskRecord, TaskType};
use super::reference::{PropertyRanges, ReferenceDictionary};
use super::BenchError;
use crate::discretize::View;
use crate::homogenize::{round_2sf, PropertyVector};

const RECONSTRUCTION_TEMPLATE: &str = include_str!("../../assets/templates/reconstruction.txt");
const INVERSE_TEMPLATE: &str = include_str!("../../assets/templates/inverse_design.txt");
const SINGLE_VIEW_TEMPLATE: &str = include_str!("../../assets/templates/understanding_single.txt");
const MULTIVIEW_TEMPLATE: &str = include_str!("../../assets/templates/understanding_multiview.txt");

/// Properties predicted in material understanding tasks, in template order.
pub const UNDERSTANDING_KEYS: [&str; 6] = ["A", "E", "K", "G", "nu", "V"];

/// What a database model contributes to task construction. Paths are database paths.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelAssets {
    pub id: String,
    pub source: Option<String>,
    /// Render paths in `View::ALL` order.
    pub renders: [Option<String>; 4],
    pub voxels: Option<String>,
    pub code: Option<String>,
    pub properties: Option<PropertyVector>,
}

impl ModelAssets {
    fn renders(&self) -> Result<[&str; 4], BenchError> {
        let mut out = [""; 4];
        for (slot, r) in out.iter_mut().zip(&self.renders) {
            *slot = r.as_deref().ok_or_else(|| BenchError::MissingRenders(self.id.clone()))?;
        }
        Ok(out)
    }

    fn properties(&self) -> Result<&PropertyVector, BenchError> {
        self.properties.as_ref().ok_or_else(|| BenchError::MissingProperties(self.id.clone()))
    }

    fn code_response(&self) -> Option<String> {
        self.code.as_ref().map(|c| format!("```python\n{}\n```", c.trim_end()))
    }
}

/// Stable per-item seed (FNV-1a over the label, mixed with the base seed).
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Template placeholder used for each view.
fn placeholder(view: View) -> &'static str {
    match view {
        View::Top => "{top}",
        View::Front => "{front}",
        View::Right => "{right}",
        View::Angled => "{top_right}",
    }
}

fn fill_views(template: &str, paths: &[(View, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    for line in template.split_inclusive('\n') {
        let mentioned = View::ALL.into_iter().find(|v| line.contains(placeholder(*v)));
        match mentioned {
            Some(v) => {
                if let Some((_, path)) = paths.iter().find(|(pv, _)| *pv == v) {
                    out.push_str(&line.replace(placeholder(v), path));
                }
            }
            None => out.push_str(line),
        }
    }
    out
}

fn image_map(paths: &[(View, &str)]) -> Value {
    let map: Map<String, Value> = paths.iter().map(|(v, p)| (v.name().to_string(), json!(p))).collect();
    Value::Object(map)
}

fn subsets(n: usize) -> Vec<Vec<View>> {
    (0u8..16)
        .filter(|m| m.count_ones() as usize == n)
        .map(|m| View::ALL.into_iter().enumerate().filter(|(i, _)| m & (1 << i) != 0).map(|(_, v)| v).collect())
        .collect()
}

/// One record per choice of `n` views out of four.
pub fn build_reconstruction_tasks(model: &ModelAssets, n: usize) -> Result<Vec<TaskRecord>, BenchError> {
    if !(1..=4).contains(&n) {
        return Err(BenchError::ViewCount(n));
    }
    let renders = model.renders()?;
    let mut records = Vec::new();
    for views in subsets(n) {
        let paths: Vec<(View, &str)> =
            views.iter().map(|v| (*v, renders[View::ALL.iter().position(|x| x == v).unwrap()])).collect();
        let names: Vec<&str> = views.iter().map(|v| v.name()).collect();
        let mut data = Map::new();
        data.insert("views".into(), json!(names));
        data.insert("images".into(), image_map(&paths));
        if let Some(vox) = &model.voxels {
            data.insert("voxels".into(), json!(vox));
        }
        records.push(TaskRecord {
            task_type: TaskType::Reconstruction,
            label: format!("{}:reconstruction:{}", model.id, names.join("+")),
            source: model.source.clone(),
            data,
            query: fill_views(RECONSTRUCTION_TEMPLATE, &paths),
            response: model.code_response(),
        });
    }
    Ok(records)
}

fn rounded_global_properties(p: &PropertyVector) -> Map<String, Value> {
    UNDERSTANDING_KEYS.iter().map(|k| (k.to_string(), json!(round_2sf(p.get(k).unwrap())))).collect()
}

/// The single-image and multiview-with-code understanding records.
pub fn build_understanding_tasks(model: &ModelAssets) -> Result<Vec<TaskRecord>, BenchError> {
    let props = rounded_global_properties(model.properties()?);
    let renders = model.renders()?;
    let code = model.code.as_deref().ok_or_else(|| BenchError::MissingCode(model.id.clone()))?;
    let answer = format!("```json\n{}\n```", serde_json::to_string_pretty(&props).expect("numbers serialize"));
    let all: Vec<(View, &str)> = View::ALL.into_iter().zip(renders).collect();
    let angled = [(View::Angled, renders[3])];
    let mut records = Vec::new();
    for (kind, paths, query) in [
        ("single_image", &angled[..], fill_views(SINGLE_VIEW_TEMPLATE, &angled)),
        ("multiview_and_code", &all[..], fill_views(&MULTIVIEW_TEMPLATE.replace("{code}", code.trim_end()), &all)),
    ] {
        let mut data = Map::new();
        data.insert("query_type".into(), json!(kind));
        data.insert("images".into(), image_map(paths));
        data.insert("properties".into(), Value::Object(props.clone()));
        records.push(TaskRecord {
            task_type: TaskType::MaterialUnderstanding,
            label: format!("{}:material_understanding:{kind}", model.id),
            source: model.source.clone(),
            data,
            query,
            response: Some(answer.clone()),
        });
    }
    Ok(records)
}

/// One inverse-design record for each target count from 1 to 6.
pub fn build_inverse_tasks(
    model: &ModelAssets,
    reference: &ReferenceDictionary,
    ranges: &PropertyRanges,
    seed: u64,
) -> Result<Vec<TaskRecord>, BenchError> {
    let props = model.properties()?;
    let mut records = Vec::new();
    for n in 1..=6 {
        let label = format!("{}:inverse_design:{n}", model.id);
        let s = derive_seed(seed, &label);
        let chosen = select_active_properties(props, ranges, n, s)?;
        let profile = select_targets(props, &chosen, reference, s.wrapping_add(1))?;
        let target = query_target(&profile, s.wrapping_add(2));
        let mut data = Map::new();
        data.insert("targets".into(), serde_json::to_value(&profile.targets).expect("profile serializes"));
        records.push(TaskRecord {
            task_type: TaskType::InverseDesign,
            label,
            source: model.source.clone(),
            data,
            query: INVERSE_TEMPLATE.replace("{query_target}", &target),
            response: model.code_response(),
        });
    }
    Ok(records)
}
