use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::coeffs::{read_cache, write_cache, FormKind, FormSpec, PrimeEigenvalueTable};
use crate::error::Result;

/// Prime tables backed by a cache directory.
pub struct TableStore {
    dir: PathBuf,
    loaded: HashMap<String, Arc<PrimeEigenvalueTable>>,
}

/// File-name stem identifying a form's table independent of its limit.
pub fn cache_stem(form: &FormSpec) -> String {
    match form.kind {
        FormKind::SatoTateSynthetic => format!("satotate-s{}", form.seed),
        FormKind::VanishingModel => format!("vanishing-s{}-d{}", form.seed, form.vanishing_density),
        kind => kind.name().to_string(),
    }
}

pub fn cache_path(dir: &Path, form: &FormSpec, limit: u64) -> PathBuf {
    dir.join(format!("{}-{limit}.hsgn", cache_stem(form)))
}

impl TableStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TableStore {
            dir: dir.into(),
            loaded: HashMap::new(),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Smallest cached table for `form` reaching `limit`.
    fn find(&self, form: &FormSpec, limit: u64) -> Result<Option<(u64, PathBuf)>> {
        let Ok(entries) = fs::read_dir(&self.dir) else {
            return Ok(None);
        };
        let prefix = format!("{}-", cache_stem(form));
        let mut best: Option<(u64, PathBuf)> = None;
        for entry in entries {
            let entry = entry?;
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            let Some(rest) = name.strip_prefix(&prefix).and_then(|r| r.strip_suffix(".hsgn")) else {
                continue;
            };
            let Ok(have) = rest.parse::<u64>() else { continue };
            if have >= limit && best.as_ref().is_none_or(|b| have < b.0) {
                best = Some((have, entry.path()));
            }
        }
        Ok(best)
    }

    /// Reads a cached table covering `limit`, or builds and caches one.
    /// Returns the table and whether it was computed.
    pub fn ensure(&mut self, form: &FormSpec, limit: u64) -> Result<(Arc<PrimeEigenvalueTable>, bool)> {
        let stem = cache_stem(form);
        if let Some(t) = self.loaded.get(&stem).filter(|t| t.limit >= limit) {
            return Ok((t.clone(), false));
        }
        let (table, built) = match self.find(form, limit)? {
            Some((_, path)) => (read_cache(&path)?, false),
            None => {
                let t = form.build_table(limit)?;
                write_cache(&cache_path(&self.dir, form, limit), &t)?;
                (t, true)
            }
        };
        let table = Arc::new(table);
        self.loaded.insert(stem, table.clone());
        Ok((table, built))
    }

    pub fn table(&mut self, form: &FormSpec, limit: u64) -> Result<Arc<PrimeEigenvalueTable>> {
        Ok(self.ensure(form, limit)?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reuses_larger_tables() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = TableStore::new(dir.path());
        let (t, built) = s.ensure(&FormSpec::cm(), 5000).unwrap();
        assert!(built && t.limit == 5000);
        let mut fresh = TableStore::new(dir.path());
        let (t, built) = fresh.ensure(&FormSpec::cm(), 3000).unwrap();
        assert!(!built && t.limit == 5000);
        let (_, built) = fresh.ensure(&FormSpec::cm(), 6000).unwrap();
        assert!(built);
        assert!(cache_path(dir.path(), &FormSpec::cm(), 6000).exists());
    }
}
