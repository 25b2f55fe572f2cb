use serde_yaml::{Mapping, Value};

use super::MetaDbError;

pub const HEADER_DELIMITER: &str = "'''";

/// YAML metadata block at the start of a model file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HeaderBlock {
    /// Text between the delimiters, as found in the file.
    pub yaml_text: String,
    pub parsed: Mapping,
}

impl HeaderBlock {
    pub fn from_mapping(parsed: Mapping) -> Self {
        let yaml_text = if parsed.is_empty() { String::new() } else { serde_yaml::to_string(&parsed).unwrap_or_default() };
        HeaderBlock { yaml_text, parsed }
    }

    pub fn is_empty(&self) -> bool {
        self.parsed.is_empty()
    }

    /// Keys of the `sources` map in file order.
    pub fn sources(&self) -> Vec<String> {
        match self.parsed.get("sources") {
            Some(Value::Mapping(m)) => m.keys().filter_map(|k| k.as_str().map(str::to_string)).collect(),
            _ => Vec::new(),
        }
    }

    pub fn generator_info(&self) -> Option<&Mapping> {
        self.parsed.get("file_info")?.get("generator_info")?.as_mapping()
    }
}

/// Split a model file into its header block and body. A file without a leading
/// delimiter has an empty header and its whole text as body.
pub fn parse_header(text: &str) -> Result<(HeaderBlock, String), MetaDbError> {
    let lead = text.len() - text.trim_start().len();
    let Some(rest) = text[lead..].strip_prefix(HEADER_DELIMITER) else {
        return Ok((HeaderBlock::default(), text.to_string()));
    };
    let open_line = 1 + text[..lead].matches('\n').count();
    let Some(end) = rest.find(HEADER_DELIMITER) else {
        return Err(MetaDbError::MalformedHeader { line: open_line, message: "unterminated header block".into() });
    };
    let yaml_text = rest[..end].to_string();
    let body = rest[end + HEADER_DELIMITER.len()..].trim_start_matches(['\r', '\n']).to_string();
    let parsed = if yaml_text.trim().is_empty() {
        Mapping::new()
    } else {
        match serde_yaml::from_str::<Value>(&yaml_text) {
            Ok(Value::Mapping(m)) => m,
            Ok(Value::Null) => Mapping::new(),
            Ok(_) => {
                return Err(MetaDbError::MalformedHeader { line: open_line, message: "header is not a YAML mapping".into() })
            }
            Err(e) => {
                let line = open_line + e.location().map_or(0, |l| l.line().saturating_sub(1));
                return Err(MetaDbError::MalformedHeader { line, message: e.to_string() });
            }
        }
    };
    Ok((HeaderBlock { yaml_text, parsed }, body))
}

/// Serialize a header block with its delimiters. An empty header writes nothing.
pub fn write_header(header: &HeaderBlock) -> String {
    if header.parsed.is_empty() {
        return String::new();
    }
    let yaml = serde_yaml::to_string(&header.parsed).unwrap_or_default();
    format!("{HEADER_DELIMITER}\n{yaml}{HEADER_DELIMITER}\n")
}

/// Replace (or add) the header block of a model file.
pub fn with_header(text: &str, header: &HeaderBlock) -> Result<String, MetaDbError> {
    let (_, body) = parse_header(text)?;
    Ok(format!("{}{}", write_header(header), body))
}
