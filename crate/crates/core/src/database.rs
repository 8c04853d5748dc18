//! Directory of crystal documents, one `<crystal_id>.json` per crystal.

use std::path::{Path, PathBuf};

use crate::dispersion::DispersionModel;
use crate::error::{QpmError, Result};

#[derive(Debug, Clone)]
pub struct CrystalDatabase {
    dir: PathBuf,
}

impl CrystalDatabase {
    pub fn open(dir: impl Into<PathBuf>) -> Self {
        CrystalDatabase { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn load(&self, crystal_id: &str) -> Result<DispersionModel> {
        let bad_id = crystal_id.is_empty() || crystal_id.contains(['/', '\\']) || crystal_id.starts_with('.');
        let path = self.dir.join(format!("{crystal_id}.json"));
        if bad_id || !path.is_file() {
            return Err(QpmError::CrystalNotFound {
                id: crystal_id.to_string(),
                path: self.dir.clone(),
            });
        }
        let model = DispersionModel::from_path(&path)?;
        if model.crystal_id() != crystal_id {
            return Err(QpmError::Schema(format!(
                "{} declares crystal_id `{}`",
                path.display(),
                model.crystal_id()
            )));
        }
        Ok(model)
    }

    /// Crystal ids available in the directory, sorted.
    pub fn ids(&self) -> Result<Vec<String>> {
        let entries = std::fs::read_dir(&self.dir).map_err(|source| QpmError::Io {
            path: self.dir.clone(),
            source,
        })?;
        let mut ids: Vec<String> = entries
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .filter_map(|p| p.file_stem().and_then(|s| s.to_str()).map(str::to_owned))
            .collect();
        ids.sort();
        Ok(ids)
    }
}
