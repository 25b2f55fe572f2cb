use std::fmt;
use std::path::{Component, Path, PathBuf};

use super::MetaDbError;

/// Database reference: absolute when it starts with `/` (rooted at the
/// database), otherwise relative to the referring file's directory.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DbPath {
    pub raw: String,
    pub absolute: bool,
}

impl DbPath {
    pub fn new(raw: &str) -> Self {
        DbPath { raw: raw.to_string(), absolute: raw.starts_with('/') }
    }
}

impl fmt::Display for DbPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl From<&str> for DbPath {
    fn from(raw: &str) -> Self {
        DbPath::new(raw)
    }
}

/// Lexically normalize `parts` below the root, failing if `..` climbs past it.
fn push_normalized(stack: &mut Vec<String>, path: &str, original: &DbPath) -> Result<(), MetaDbError> {
    for comp in Path::new(path).components() {
        match comp {
            Component::Normal(s) => stack.push(s.to_string_lossy().into_owned()),
            Component::ParentDir => {
                if stack.pop().is_none() {
                    return Err(MetaDbError::PathEscape(original.raw.clone()));
                }
            }
            Component::CurDir | Component::RootDir | Component::Prefix(_) => {}
        }
    }
    Ok(())
}

/// Map a database reference to a filesystem path under `db_root`.
///
/// `referrer` is the referring file, given either as a database path or as a
/// filesystem path inside `db_root`. With `must_exist`, a missing target is an
/// error.
pub fn resolve_path(db_root: &Path, referrer: &Path, target: &DbPath, must_exist: bool) -> Result<PathBuf, MetaDbError> {
    let mut stack = Vec::new();
    if !target.absolute {
        let referrer = referrer.strip_prefix(db_root).unwrap_or(referrer);
        let dir = referrer.parent().map(|p| p.to_string_lossy().into_owned()).unwrap_or_default();
        push_normalized(&mut stack, &dir, &DbPath::new(&referrer.to_string_lossy()))?;
    }
    push_normalized(&mut stack, &target.raw, target)?;
    let resolved = stack.iter().fold(db_root.to_path_buf(), |p, s| p.join(s));
    if must_exist && !resolved.exists() {
        return Err(MetaDbError::NotFound(resolved.display().to_string()));
    }
    Ok(resolved)
}
