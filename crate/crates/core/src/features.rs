//! Deterministic signed feature hashing over code tokens.
//!
//! Hash: FNV-1a 64 over `seed (LE u64) || order (u8) || tokens joined by 0x1f`,
//! followed by the SplitMix64 finaliser. The low `log2(dimension)` bits pick the
//! bucket and the next bit picks the sign. All inputs are serialised explicitly,
//! so the result does not depend on platform endianness.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HASH_ALGORITHM: &str = "fnv1a64+splitmix64/v1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturizerConfig {
    pub dimension: usize,
    pub max_tokens: usize,
    pub ngram_orders: Vec<u8>,
    pub hash_seed: u64,
}

impl Default for FeaturizerConfig {
    fn default() -> Self {
        FeaturizerConfig {
            dimension: 1 << 14,
            max_tokens: 512,
            ngram_orders: vec![1, 2],
            hash_seed: 0,
        }
    }
}

impl FeaturizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 || !self.dimension.is_power_of_two() {
            return Err(Error::config(
                "featurizer.dimension",
                "must be a power of two ≥ 2",
            ));
        }
        if self.max_tokens == 0 {
            return Err(Error::config("featurizer.max_tokens", "must be ≥ 1"));
        }
        if self.ngram_orders.is_empty() || self.ngram_orders.iter().any(|o| !(1..=2).contains(o)) {
            return Err(Error::config(
                "featurizer.ngram_orders",
                "must be a non-empty subset of {1, 2}",
            ));
        }
        Ok(())
    }
}

/// L2-normalised hashed features, stored as sorted `(index, value)` pairs.
///
/// Semantically a dense vector of length `dimension`; absent indices are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub dimension: usize,
    pub entries: Vec<(u32, f64)>,
    pub l2_norm: f64,
}

impl FeatureVector {
    pub fn zeros(dimension: usize) -> Self {
        FeatureVector {
            dimension,
            entries: Vec::new(),
            l2_norm: 0.0,
        }
    }

    /// Builds from sparse pairs without renormalising.
    pub fn from_entries(dimension: usize, mut entries: Vec<(u32, f64)>) -> Self {
        entries.retain(|&(_, v)| v != 0.0);
        entries.sort_by_key(|&(i, _)| i);
        let l2_norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        FeatureVector {
            dimension,
            entries,
            l2_norm,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension];
        for &(i, v) in &self.entries {
            out[i as usize] = v;
        }
        out
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, v)| weights[i as usize] * v)
            .sum()
    }
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Identifier runs (`[A-Za-z0-9_]+`) and single non-whitespace characters.
pub fn tokenize(code: &str, max_tokens: usize) -> Vec<&str> {
    let mut tokens = Vec::new();
    let mut chars = code.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        if tokens.len() >= max_tokens {
            break;
        }
        if c.is_whitespace() {
            continue;
        }
        let mut end = start + c.len_utf8();
        if is_ident(c) {
            while let Some(&(i, n)) = chars.peek() {
                if !is_ident(n) {
                    break;
                }
                end = i + n.len_utf8();
                chars.next();
            }
        }
        tokens.push(&code[start..end]);
    }
    tokens
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(state, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of an n-gram.
pub fn ngram_hash(seed: u64, gram: &[&str]) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &seed.to_le_bytes());
    h = fnv1a(h, &[gram.len() as u8]);
    for (i, tok) in gram.iter().enumerate() {
        if i > 0 {
            h = fnv1a(h, &[0x1f]);
        }
        h = fnv1a(h, tok.as_bytes());
    }
    splitmix64(h)
}

pub fn featurize(code: &str, config: &FeaturizerConfig) -> FeatureVector {
    let tokens = tokenize(code, config.max_tokens);
    let bits = config.dimension.trailing_zeros();
    let mask = (config.dimension as u64) - 1;
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    for &order in &config.ngram_orders {
        let order = order as usize;
        if tokens.len() < order {
            continue;
        }
        for gram in tokens.windows(order) {
            let h = ngram_hash(config.hash_seed, gram);
            let bucket = (h & mask) as u32;
            let sign = if (h >> bits) & 1 == 0 { 1.0 } else { -1.0 };
            *acc.entry(bucket).or_insert(0.0) += sign;
        }
    }
    let raw = FeatureVector::from_entries(config.dimension, acc.into_iter().collect());
    if raw.l2_norm == 0.0 {
        return FeatureVector::zeros(config.dimension);
    }
    let norm = raw.l2_norm;
    let entries: Vec<(u32, f64)> = raw
        .entries
        .into_iter()
        .map(|(i, v)| (i, v / norm))
        .collect();
    FeatureVector::from_entries(config.dimension, entries)
}

/// Writes a debugging dump: a JSON header line, then one JSON line per sample
/// with its non-zero `(index, value)` pairs.
pub fn write_feature_dump<W: Write>(
    mut out: W,
    config: &FeaturizerConfig,
    rows: &[(&str, &FeatureVector)],
) -> Result<()> {
    let header = serde_json::json!({
        "format": "selfpace-feature-dump/1",
        "algorithm": HASH_ALGORITHM,
        "hash_seed": config.hash_seed,
        "dimension": config.dimension,
        "max_tokens": config.max_tokens,
        "ngram_orders": config.ngram_orders,
    });
    let io = |e| Error::io("<feature dump>", e);
    writeln!(out, "{header}").map_err(io)?;
    for (id, fv) in rows {
        let line = serde_json::json!({
            "id": id,
            "dimension": fv.dimension,
            "nonzero": fv.entries,
        });
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("a+b", 512), vec!["a", "+", "b"]);
        assert!(tokenize("", 512).is_empty());
        assert_eq!(
            tokenize("if (p->len >= 10)", 512),
            vec!["if", "(", "p", "-", ">", "len", ">", "=", "10", ")"]
        );
        let long: String = (0..600).map(|i| format!("t{i} ")).collect();
        let toks = tokenize(&long, 512);
        assert_eq!(toks.len(), 512);
        assert_eq!(toks[0], "t0");
        assert_eq!(toks[511], "t511");
    }

    #[test]
    fn tokenize_non_ascii() {
        assert_eq!(tokenize("x=é;", 10), vec!["x", "=", "é", ";"]);
    }

    #[test]
    fn empty_code_is_zero_vector() {
        let fv = featurize("", &FeaturizerConfig::default());
        assert!(fv.entries.is_empty());
        assert_eq!(fv.l2_norm, 0.0);
        assert_eq!(fv.to_dense().len(), 1 << 14);
    }

    #[test]
    fn featurize_is_deterministic_and_normalised() {
        let cfg = FeaturizerConfig::default();
        let a = featurize("int f(int *p) { return p[3]; }", &cfg);
        let b = featurize("int f(int *p) { return p[3]; }", &cfg);
        assert_eq!(a, b);
        assert!((a.l2_norm - 1.0).abs() < 1e-12);
        let c = featurize("if (p == NULL) return 0;", &cfg);
        assert!((c.l2_norm - 1.0).abs() < 1e-12);
        assert_ne!(a, c);
    }

    #[test]
    fn hash_is_pinned() {
        // Guards bit-exactness of the documented hash across platforms and releases.
        assert_eq!(ngram_hash(0, &["a"]), ngram_hash(0, &["a"]));
        assert_ne!(ngram_hash(0, &["a"]), ngram_hash(1, &["a"]));
        assert_ne!(ngram_hash(0, &["a", "b"]), ngram_hash(0, &["ab"]));
        assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(fnv1a(FNV_OFFSET, b"a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn config_validation() {
        let bad = FeaturizerConfig {
            dimension: 1000,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = FeaturizerConfig {
            ngram_orders: vec![3],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn dump_has_header_and_rows() {
        let cfg = FeaturizerConfig {
            dimension: 64,
            ..Default::default()
        };
        let fv = featurize("a + b", &cfg);
        let mut buf = Vec::new();
        write_feature_dump(&mut buf, &cfg, &[("s1", &fv)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains(HASH_ALGORITHM));
        assert!(lines[1].contains("\"id\":\"s1\""));
    }
}
