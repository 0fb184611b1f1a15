use super::{cobar_block, ComplexError};
use crate::exact_linalg::HomologyProfile;
use crate::presentations::{quadratic_dual, Presentation};
use crate::span_engine::{BlockKey, SpanEngine};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Blocks to check: (m, n) in the given boxes, optionally restricted to the
/// diagonal or to m + n ≤ `max_arity_sum`; all genera and weights up to the
/// bounds. The degenerate (1,1) block is skipped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranges {
    pub m: (usize, usize),
    pub n: (usize, usize),
    pub max_genus: usize,
    pub max_weight: usize,
    pub diagonal_only: bool,
    pub max_arity_sum: Option<usize>,
}

impl Ranges {
    pub fn square(max_arity: usize, max_genus: usize, max_weight: usize) -> Self {
        Ranges { m: (1, max_arity), n: (1, max_arity), max_genus, max_weight, diagonal_only: false, max_arity_sum: None }
    }

    pub fn keys(&self) -> Vec<BlockKey> {
        let mut out = Vec::new();
        for m in self.m.0..=self.m.1 {
            for n in self.n.0..=self.n.1 {
                if (m == 1 && n == 1) || (self.diagonal_only && m != n) || self.max_arity_sum.is_some_and(|s| m + n > s) {
                    continue;
                }
                for genus in 0..=self.max_genus {
                    for weight in 1..=self.max_weight {
                        out.push(BlockKey { m, n, weight, genus });
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "status")]
pub enum Verdict {
    Pass,
    Fail { block: BlockKey, degree: usize },
    Inconclusive { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockReport {
    pub presentation: String,
    pub block: BlockKey,
    pub homology: HomologyProfile,
    /// quotient dimension of the predual in this block
    pub expected_h0: usize,
    pub verdict: Verdict,
}

#[derive(Serialize)]
struct BlockJson {
    m: usize,
    n: usize,
    #[serde(rename = "W")]
    w: usize,
    g: usize,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    presentation: &'a str,
    block: BlockJson,
    dims_by_syzygy: &'a BTreeMap<usize, usize>,
    verdict: &'a Verdict,
}

impl BlockReport {
    pub fn to_json(&self) -> serde_json::Value {
        let k = self.block;
        serde_json::to_value(ReportJson {
            presentation: &self.presentation,
            block: BlockJson { m: k.m, n: k.n, w: k.weight, g: k.genus },
            dims_by_syzygy: &self.homology.dims,
            verdict: &self.verdict,
        })
        .expect("report serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KoszulVerdict {
    pub presentation: String,
    pub ranges: Ranges,
    pub blocks: Vec<BlockReport>,
    pub verdict: Verdict,
}

impl KoszulVerdict {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "presentation": self.presentation,
            "ranges": self.ranges,
            "blocks": self.blocks.iter().map(BlockReport::to_json).collect::<Vec<_>>(),
            "verdict": self.verdict,
        })
    }
}

/// Diamond cobar complex of the quadratic dual, block by block: each block
/// must have homology only in syzygy degree 0, equal there to the quotient
/// block of `p`.
pub fn koszul_report(p: &Presentation, ranges: &Ranges) -> KoszulVerdict {
    let dual = quadratic_dual(p);
    koszul_report_with(&SpanEngine::new(p), &SpanEngine::new(&dual), ranges)
}

/// [`koszul_report`] on prepared engines for a presentation and its dual
/// (sharing their caches and resource caps).
pub fn koszul_report_with(pe: &SpanEngine, de: &SpanEngine, ranges: &Ranges) -> KoszulVerdict {
    let p = &pe.pres;
    let mut blocks = Vec::new();
    let mut verdict = Verdict::Pass;
    for key in ranges.keys() {
        let run = || -> Result<(HomologyProfile, usize), ComplexError> {
            let h = cobar_block(de, key)?.homology()?;
            Ok((h, pe.block(key)?.quotient_dim()))
        };
        let (homology, expected_h0, v) = match run() {
            Ok((h, e)) => {
                let v = match h.support().into_iter().find(|&k| k > 0) {
                    Some(k) => Verdict::Fail { block: key, degree: k },
                    None if h.get(0) != e => Verdict::Fail { block: key, degree: 0 },
                    None => Verdict::Pass,
                };
                (h, e, v)
            }
            Err(e) => (HomologyProfile::default(), 0, Verdict::Inconclusive { reason: e.to_string() }),
        };
        match (&verdict, &v) {
            (Verdict::Pass, Verdict::Fail { .. } | Verdict::Inconclusive { .. }) => verdict = v.clone(),
            (Verdict::Inconclusive { .. }, Verdict::Fail { .. }) => verdict = v.clone(),
            _ => {}
        }
        blocks.push(BlockReport { presentation: p.name.clone(), block: key, homology, expected_h0, verdict: v });
    }
    KoszulVerdict { presentation: p.name.clone(), ranges: ranges.clone(), blocks, verdict }
}
