//! One JSON file per block: the reduced ideal rows over free coordinates.
//! Free coordinates are recomputed on load (enumeration is cheap compared
//! to elimination), so a file is only valid for the same free dimension.

use super::{BlockKey, SpanBasis, SpanEngine};
use crate::exact_linalg::{parse_rational, Rational};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Serialize, Deserialize)]
struct CachedBlock {
    key: BlockKey,
    clusters: Option<usize>,
    free_dim: usize,
    rows: Vec<Vec<(usize, String)>>,
}

impl SpanEngine {
    fn cache_path(&self, key: BlockKey, clusters: Option<usize>) -> Option<PathBuf> {
        let dir = self.cache_dir.as_ref()?;
        let parity: String = self.orient.gen_odd.iter().map(|&b| if b { '1' } else { '0' }).collect();
        let v = clusters.map_or_else(|| "p".to_string(), |v| format!("v{v}"));
        Some(dir.join(format!(
            "{}-{parity}-{}-{}-{}-{}-{v}.json",
            &self.pres.hash_hex()[..16],
            key.m,
            key.n,
            key.weight,
            key.genus
        )))
    }

    pub(super) fn cache_load(
        &self,
        key: BlockKey,
        clusters: Option<usize>,
        free_dim: usize,
    ) -> Option<Vec<BTreeMap<usize, Rational>>> {
        let path = self.cache_path(key, clusters)?;
        let text = std::fs::read_to_string(path).ok()?;
        let c: CachedBlock = serde_json::from_str(&text).ok()?;
        if c.key != key || c.clusters != clusters || c.free_dim != free_dim {
            return None;
        }
        c.rows
            .into_iter()
            .map(|r| r.into_iter().map(|(j, x)| parse_rational(&x).ok().map(|x| (j, x))).collect())
            .collect()
    }

    pub(super) fn cache_store(&self, key: BlockKey, clusters: Option<usize>, b: &SpanBasis) {
        let Some(path) = self.cache_path(key, clusters) else { return };
        if path.exists() {
            return;
        }
        let c = CachedBlock {
            key,
            clusters,
            free_dim: b.free_dim(),
            rows: b.ideal_rows().into_iter().map(|r| r.into_iter().map(|(j, x)| (j, x.to_string())).collect()).collect(),
        };
        if let Some(dir) = path.parent() {
            let _ = std::fs::create_dir_all(dir);
        }
        // write then rename so concurrent readers never see a partial file
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        if std::fs::write(&tmp, serde_json::to_string(&c).unwrap_or_default()).is_ok() {
            let _ = std::fs::rename(&tmp, &path);
        }
    }
}
