use serde::{Deserialize, Serialize};
use serde_yaml::{Mapping, Value};

use super::{HeaderBlock, MetaDbError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProvenanceKind {
    Authored,
    Generated,
    Mutated,
    Hybridized,
}

impl ProvenanceKind {
    pub fn name(self) -> &'static str {
        match self {
            ProvenanceKind::Authored => "authored",
            ProvenanceKind::Generated => "generated",
            ProvenanceKind::Mutated => "mutated",
            ProvenanceKind::Hybridized => "hybridized",
        }
    }
}

/// Inputs for a provenance record; which fields are required depends on the kind.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceDetails {
    /// Extra source references (database path, note), e.g. literature.
    #[serde(default)]
    pub sources: Vec<(String, String)>,
    /// Parent model paths for mutations and hybrids.
    #[serde(default)]
    pub parents: Vec<String>,
    pub script: Option<String>,
    pub arguments: Option<serde_json::Value>,
    pub structure_details: Option<serde_json::Value>,
    /// Mutation trace, stored as the structure details of a mutated model.
    pub trace: Option<serde_json::Value>,
    pub prompt_hash: Option<String>,
    pub model_name: Option<String>,
}

pub const MUTATE_SCRIPT: &str = "/generators/mutate";
pub const HYBRIDIZE_SCRIPT: &str = "/generators/hybridize";

fn yaml(v: &serde_json::Value) -> Value {
    serde_yaml::to_value(v).unwrap_or(Value::Null)
}

fn s(text: &str) -> Value {
    Value::String(text.to_string())
}

/// Recursively sort mapping keys so serialization is deterministic.
fn sorted(v: Value) -> Value {
    match v {
        Value::Mapping(m) => {
            let mut entries: Vec<(Value, Value)> = m.into_iter().map(|(k, v)| (k, sorted(v))).collect();
            entries.sort_by(|a, b| key_text(&a.0).cmp(&key_text(&b.0)));
            Value::Mapping(entries.into_iter().collect())
        }
        Value::Sequence(items) => Value::Sequence(items.into_iter().map(sorted).collect()),
        other => other,
    }
}

fn key_text(k: &Value) -> String {
    match k {
        Value::String(s) => s.clone(),
        other => serde_yaml::to_string(other).unwrap_or_default(),
    }
}

/// Header fragment describing how a model came to be, with sorted keys.
pub fn record_provenance(kind: ProvenanceKind, details: &ProvenanceDetails) -> Result<Mapping, MetaDbError> {
    let missing = |field| MetaDbError::MissingField { kind: kind.name(), field };
    let mut sources = Mapping::new();
    let mut info: Option<Mapping> = None;
    match kind {
        ProvenanceKind::Authored => {
            if details.sources.is_empty() {
                return Err(missing("sources"));
            }
        }
        ProvenanceKind::Generated => {
            let script = details.script.as_deref().ok_or_else(|| missing("script"))?;
            let arguments = details.arguments.as_ref().ok_or_else(|| missing("arguments"))?;
            let structure = details.structure_details.as_ref().ok_or_else(|| missing("structure_details"))?;
            sources.insert(s(script), s("generator"));
            let mut gi = Mapping::new();
            gi.insert(s("script"), s(script));
            gi.insert(s("arguments"), yaml(arguments));
            gi.insert(s("structure_details"), yaml(structure));
            info = Some(gi);
        }
        ProvenanceKind::Mutated => {
            let parent = details.parents.first().ok_or_else(|| missing("parent"))?;
            let trace = details.trace.as_ref().ok_or_else(|| missing("trace"))?;
            sources.insert(s(parent), s("mutation parent"));
            let mut gi = Mapping::new();
            gi.insert(s("script"), s(details.script.as_deref().unwrap_or(MUTATE_SCRIPT)));
            gi.insert(s("arguments"), details.arguments.as_ref().map_or(Value::Mapping(Mapping::new()), yaml));
            gi.insert(s("structure_details"), yaml(trace));
            info = Some(gi);
        }
        ProvenanceKind::Hybridized => {
            if details.parents.len() < 2 {
                return Err(missing("parents"));
            }
            let hash = details.prompt_hash.as_deref().ok_or_else(|| missing("prompt_hash"))?;
            let model = details.model_name.as_deref().ok_or_else(|| missing("model_name"))?;
            for p in &details.parents {
                sources.insert(s(p), s("hybridization parent"));
            }
            let mut args = Mapping::new();
            args.insert(s("model"), s(model));
            args.insert(s("prompt_hash"), s(hash));
            let mut structure = Mapping::new();
            structure.insert(s("parents"), Value::Sequence(details.parents.iter().map(|p| s(p)).collect()));
            let mut gi = Mapping::new();
            gi.insert(s("script"), s(details.script.as_deref().unwrap_or(HYBRIDIZE_SCRIPT)));
            gi.insert(s("arguments"), Value::Mapping(args));
            gi.insert(s("structure_details"), Value::Mapping(structure));
            info = Some(gi);
        }
    }
    for (path, note) in &details.sources {
        sources.insert(s(path), s(note));
    }

    let mut file_info = Mapping::new();
    file_info.insert(s("provenance"), s(kind.name()));
    if let Some(gi) = info {
        file_info.insert(s("generator_info"), Value::Mapping(gi));
    }
    let mut out = Mapping::new();
    out.insert(s("sources"), Value::Mapping(sources));
    out.insert(s("file_info"), Value::Mapping(file_info));
    match sorted(Value::Mapping(out)) {
        Value::Mapping(m) => Ok(m),
        _ => unreachable!("sorting preserves the mapping"),
    }
}

fn deep_merge(into: &mut Mapping, from: &Mapping) {
    for (k, v) in from {
        match (into.get_mut(k), v) {
            (Some(Value::Mapping(dst)), Value::Mapping(src)) => deep_merge(dst, src),
            _ => {
                into.insert(k.clone(), v.clone());
            }
        }
    }
}

/// Merge a fragment into a header; the result has sorted keys throughout.
pub fn merge_fragment(header: &HeaderBlock, fragment: &Mapping) -> HeaderBlock {
    let mut merged = header.parsed.clone();
    deep_merge(&mut merged, fragment);
    match sorted(Value::Mapping(merged)) {
        Value::Mapping(m) => HeaderBlock::from_mapping(m),
        _ => unreachable!("sorting preserves the mapping"),
    }
}

/// Stable 64-bit FNV-1a digest of a text, as lowercase hex.
pub fn content_hash(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}
