//! Corpus manifests: one JSON record per line.
//!
//! ```text
//! {"dataset_root":"/data/shapenet"}
//! {"object_id":"chair/1a2b","category":"chair","binvox":"chair/1a2b/model.binvox","views":["chair/1a2b/00.png"]}
//! ```
//!
//! The optional first line sets the directory relative paths are resolved
//! against; without it the manifest's own directory is used. Blank lines and
//! lines starting with `#` are ignored.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_VIEWS: usize = 24;
pub const BINVOX_EXTENSION: &str = "binvox";
const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub object_id: String,
    pub category: String,
    pub binvox: PathBuf,
    /// Rendered views paired with the voxels; carried through untouched.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub views: Vec<PathBuf>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RootLine {
    dataset_root: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusManifest {
    pub dataset_root: PathBuf,
    pub records: Vec<ManifestRecord>,
}

impl CorpusManifest {
    pub fn new(dataset_root: impl Into<PathBuf>, records: Vec<ManifestRecord>) -> Result<Self> {
        let manifest = CorpusManifest {
            dataset_root: dataset_root.into(),
            records,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    /// Checks id uniqueness and view counts. Missing binvox files are not an
    /// error here; they surface as per-object failures during processing.
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        let mut stems = HashSet::new();
        for (i, r) in self.records.iter().enumerate() {
            if r.object_id.is_empty() {
                return Err(Error::InvalidArgument(format!("record {i} has an empty object_id")));
            }
            if !ids.insert(r.object_id.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate object_id {:?}", r.object_id)));
            }
            if !stems.insert(r.file_stem()) {
                return Err(Error::InvalidArgument(format!(
                    "object_id {:?} collides with another id once path separators are replaced",
                    r.object_id
                )));
            }
            if r.views.len() > MAX_VIEWS {
                return Err(Error::InvalidArgument(format!(
                    "object {:?} lists {} views; at most {MAX_VIEWS} are allowed",
                    r.object_id,
                    r.views.len()
                )));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.dataset_root.join(path)
    }

    pub fn parse(text: &str, manifest_dir: &Path) -> Result<Self> {
        let mut dataset_root = manifest_dir.to_path_buf();
        let mut records = Vec::new();
        let lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        for (n, (lineno, line)) in lines.enumerate() {
            let bad = |e: serde_json::Error| Error::Format(format!("manifest line {}: {e}", lineno + 1));
            if n == 0 && line.contains("\"dataset_root\"") {
                let root: RootLine = serde_json::from_str(line).map_err(bad)?;
                dataset_root = manifest_dir.join(root.dataset_root);
                continue;
            }
            records.push(serde_json::from_str(line).map_err(bad)?);
        }
        Self::new(dataset_root, records)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, dir)
    }

    pub fn to_text(&self) -> String {
        let mut out = serde_json::to_string(&RootLine {
            dataset_root: self.dataset_root.clone(),
        })
        .expect("root line serializes");
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Scans a directory tree for `.binvox` files.
    ///
    /// Each file becomes one record: the object id is its path relative to
    /// `root` without the extension, the category is the first path component
    /// (`uncategorized` for files directly under `root`), and image files in
    /// the same directory are attached as views, sorted, at most 24.
    pub fn scan(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref();
        if !root.is_dir() {
            return Err(Error::InvalidArgument(format!("{} is not a directory", root.display())));
        }
        let mut binvox_files = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(dir) = stack.pop() {
            let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
            for entry in entries {
                let path = entry.map_err(|e| Error::io(&dir, e))?.path();
                if path.is_dir() {
                    stack.push(path);
                } else if has_extension(&path, &[BINVOX_EXTENSION]) {
                    binvox_files.push(path);
                }
            }
        }
        binvox_files.sort();

        let mut records = Vec::with_capacity(binvox_files.len());
        for path in binvox_files {
            let rel = path.strip_prefix(root).expect("scanned under root").to_path_buf();
            let parts: Vec<String> = rel
                .with_extension("")
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect();
            let category = if parts.len() > 1 {
                parts[0].clone()
            } else {
                "uncategorized".to_string()
            };
            let dir = path.parent().expect("file has a parent");
            let mut views: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(|e| Error::io(dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && has_extension(p, &IMAGE_EXTENSIONS))
                .map(|p| p.strip_prefix(root).expect("scanned under root").to_path_buf())
                .collect();
            views.sort();
            if views.len() > MAX_VIEWS {
                log::warn!("{}: keeping the first {MAX_VIEWS} of {} views", rel.display(), views.len());
                views.truncate(MAX_VIEWS);
            }
            records.push(ManifestRecord {
                object_id: parts.join("/"),
                category,
                binvox: rel,
                views,
            });
        }
        Self::new(root, records)
    }
}

impl ManifestRecord {
    /// File name stem for per-object outputs: the object id with path separators replaced.
    pub fn file_stem(&self) -> String {
        self.object_id.replace(['/', '\\'], "__")
    }
}

fn has_extension(path: &Path, exts: &[&str]) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| exts.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str) -> ManifestRecord {
        ManifestRecord {
            object_id: id.into(),
            category: "chair".into(),
            binvox: format!("{id}.binvox").into(),
            views: Vec::new(),
        }
    }

    #[test]
    fn parse_with_and_without_root() {
        let text = "{\"object_id\":\"a\",\"category\":\"chair\",\"binvox\":\"a.binvox\"}\n\n# comment\n{\"object_id\":\"b\",\"category\":\"car\",\"binvox\":\"b.binvox\",\"views\":[\"b0.png\"]}\n";
        let m = CorpusManifest::parse(text, Path::new("/data")).unwrap();
        assert_eq!(m.dataset_root, Path::new("/data"));
        assert_eq!(m.records.len(), 2);
        assert_eq!(m.records[1].views, [PathBuf::from("b0.png")]);
        assert_eq!(m.resolve(&m.records[0].binvox), Path::new("/data/a.binvox"));

        let text = format!("{{\"dataset_root\":\"sub\"}}\n{text}");
        let m = CorpusManifest::parse(&text, Path::new("/data")).unwrap();
        assert_eq!(m.dataset_root, Path::new("/data/sub"));
        assert_eq!(CorpusManifest::parse(&m.to_text(), Path::new("/elsewhere")).unwrap(), m);
    }

    #[test]
    fn validation() {
        assert!(CorpusManifest::new("/", vec![record("a"), record("a")]).is_err());
        assert!(CorpusManifest::new("/", vec![record("a/b"), record("a__b")]).is_err());
        assert!(CorpusManifest::new("/", vec![record("")]).is_err());
        let mut r = record("a");
        r.views = (0..25).map(|i| PathBuf::from(format!("{i}.png"))).collect();
        assert!(CorpusManifest::new("/", vec![r]).is_err());
        assert!(CorpusManifest::parse("{\"object_id\":1}", Path::new("/")).is_err());
        assert!(CorpusManifest::parse("{\"object_id\":\"a\",\"category\":\"c\",\"binvox\":\"x\",\"extra\":1}", Path::new("/")).is_err());
    }

    #[test]
    fn scan_tree() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        for p in ["chair/c1/model.binvox", "chair/c1/00.png", "chair/c1/01.jpg", "car/k1/model.binvox", "loose.binvox", "notes.txt"] {
            let path = root.join(p);
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(path, b"").unwrap();
        }
        let m = CorpusManifest::scan(root).unwrap();
        let ids: Vec<_> = m.records.iter().map(|r| (r.object_id.as_str(), r.category.as_str())).collect();
        assert_eq!(ids, [("car/k1/model", "car"), ("chair/c1/model", "chair"), ("loose", "uncategorized")]);
        assert_eq!(m.records[1].views, [PathBuf::from("chair/c1/00.png"), PathBuf::from("chair/c1/01.jpg")]);
        assert_eq!(m.records[1].file_stem(), "chair__c1__model");
    }
}
