//! Synthetic vulnerability corpora, stratified splitting and JSONL I/O.
//!
//! Generated samples are small C functions from three vulnerable families
//! (unchecked array index, unchecked null use, unchecked size arithmetic before
//! allocation), each with a guarded safe counterpart. Two kinds of noise are
//! planted on top: uniform label flips, and positive-labelled samples whose body
//! is swapped for guard-complete benign code.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Label, Sample};

// RNG streams; each concern draws from its own so that, for example, the noise
// rate never changes the generated code.
const STREAM_LABELS: u64 = 1;
const STREAM_TEMPLATES: u64 = 2;
const STREAM_FLIPS: u64 = 3;
const STREAM_UNRELATED: u64 = 4;
const STREAM_SPLIT: u64 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ArrayIndex,
    NullDeref,
    AllocOverflow,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::ArrayIndex, Family::NullDeref, Family::AllocOverflow];

    pub fn cwe(self) -> &'static str {
        match self {
            Family::ArrayIndex => "CWE-129",
            Family::NullDeref => "CWE-476",
            Family::AllocOverflow => "CWE-190",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_samples: usize,
    pub positive_ratio: f64,
    pub label_noise_rate: f64,
    pub unrelated_noise_rate: f64,
    pub seed: u64,
    /// Weights over [array_index, null_deref, alloc_overflow].
    pub template_mix: [f64; 3],
    /// Train / validation / test fractions.
    pub split: [f64; 3],
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_samples: 5000,
            positive_ratio: 0.3,
            label_noise_rate: 0.2,
            unrelated_noise_rate: 0.1,
            seed: 42,
            template_mix: [1.0 / 3.0; 3],
            split: [0.8, 0.1, 0.1],
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::config("n_samples", "must be positive"));
        }
        if !(self.positive_ratio > 0.0 && self.positive_ratio < 1.0) {
            return Err(Error::config("positive_ratio", "must be in (0, 1)"));
        }
        for (name, r) in [
            ("label_noise_rate", self.label_noise_rate),
            ("unrelated_noise_rate", self.unrelated_noise_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::config(name, "must be in [0, 1]"));
            }
        }
        if self.template_mix.iter().any(|w| !(*w >= 0.0))
            || (self.template_mix.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::config(
                "template_mix",
                "weights must be non-negative and sum to 1",
            ));
        }
        validate_split_ratios(&self.split)
    }
}

fn validate_split_ratios(r: &[f64; 3]) -> Result<()> {
    if r.iter().any(|x| !(*x > 0.0)) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::config(
            "split",
            "ratios must be positive and sum to 1",
        ));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    Flipped,
    Unrelated,
    FlippedUnrelated,
}

/// Ground truth for one generated sample, written to the sidecar file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanLabel {
    pub id: String,
    /// Label of the template before any noise.
    pub template_label: Label,
    /// True label of the emitted code.
    pub clean_label: Label,
    pub family: Family,
    pub noise: NoiseKind,
}

impl CleanLabel {
    pub fn is_mislabeled(&self, observed: Label) -> bool {
        observed != self.clean_label
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthCorpus {
    pub samples: Vec<Sample>,
    pub truth: Vec<CleanLabel>,
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn generate(config: &SynthConfig) -> Result<SynthCorpus> {
    config.validate()?;
    let n = config.n_samples;

    let n_pos = ((n as f64) * config.positive_ratio).round() as usize;
    let mut template_labels: Vec<Label> = (0..n).map(|i| u8::from(i < n_pos)).collect();
    template_labels.shuffle(&mut stream(config.seed, STREAM_LABELS));

    let mut trng = stream(config.seed, STREAM_TEMPLATES);
    let mut families = Vec::with_capacity(n);
    let mut samples = Vec::with_capacity(n);
    for (i, &label) in template_labels.iter().enumerate() {
        let family = pick_family(&config.template_mix, &mut trng);
        let code = render(family, label == 0, &mut trng);
        families.push(family);
        samples.push(Sample {
            id: format!("s{i:06}"),
            code,
            label,
            category: Some(family.cwe().to_owned()),
            project: Some("synthetic".to_owned()),
        });
    }

    let mut noise = vec![NoiseKind::None; n];
    let n_flip = ((n as f64) * config.label_noise_rate).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(config.seed, STREAM_FLIPS));
    for &i in &order[..n_flip] {
        samples[i].label = 1 - samples[i].label;
        noise[i] = NoiseKind::Flipped;
    }

    let mut clean: Vec<Label> = template_labels.clone();
    let mut urng = stream(config.seed, STREAM_UNRELATED);
    let mut positives: Vec<usize> = (0..n).filter(|&i| samples[i].label == 1).collect();
    let n_unrel = ((positives.len() as f64) * config.unrelated_noise_rate).round() as usize;
    positives.shuffle(&mut urng);
    let mut replaced: Vec<usize> = positives[..n_unrel].to_vec();
    replaced.sort_unstable();
    for i in replaced {
        let family = pick_family(&config.template_mix, &mut urng);
        samples[i].code = render(family, true, &mut urng);
        samples[i].category = Some(family.cwe().to_owned());
        families[i] = family;
        clean[i] = 0;
        noise[i] = match noise[i] {
            NoiseKind::Flipped => NoiseKind::FlippedUnrelated,
            _ => NoiseKind::Unrelated,
        };
    }

    let truth = (0..n)
        .map(|i| CleanLabel {
            id: samples[i].id.clone(),
            template_label: template_labels[i],
            clean_label: clean[i],
            family: families[i],
            noise: noise[i],
        })
        .collect();
    Ok(SynthCorpus { samples, truth })
}

fn pick_family<R: Rng>(mix: &[f64; 3], rng: &mut R) -> Family {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (w, f) in mix.iter().zip(Family::ALL) {
        acc += w;
        if u < acc {
            return f;
        }
    }
    // rounding in the cumulative sum; take the last family with weight
    Family::ALL
        .into_iter()
        .zip(mix)
        .rev()
        .find(|(_, w)| **w > 0.0)
        .map(|(f, _)| f)
        .unwrap_or(Family::ArrayIndex)
}

const VERBS: &[&str] = &[
    "get", "read", "load", "fetch", "parse", "lookup", "copy", "take", "peek", "scan", "decode",
    "handle",
];
const NOUNS: &[&str] = &[
    "item", "entry", "slot", "record", "frame", "packet", "node", "header", "block", "chunk",
    "token", "field", "cell", "page",
];
const VARS: &[&str] = &[
    "buf", "data", "arr", "tbl", "vec", "list", "pool", "ring", "cache", "map", "store", "queue",
];
const TYPES: &[&str] = &[
    "conn", "session", "device", "request", "ctx", "inode", "socket", "stream", "config", "peer",
];
const MEMBERS: &[&str] = &[
    "len", "count", "flags", "state", "refcnt", "size", "mode", "id", "offset", "owner",
];
const LOGS: &[&str] = &["trace", "log_debug", "audit", "stat_add", "metric_inc"];

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs[rng.gen_range(0..xs.len())]
}

fn ident<R: Rng>(rng: &mut R, xs: &[&str]) -> String {
    format!("{}{}", pick(rng, xs), rng.gen_range(0..100))
}

fn filler<R: Rng>(rng: &mut R, var: &str) -> String {
    let count = rng.gen_range(0..=3);
    let mut out = String::new();
    for _ in 0..count {
        let line = match rng.gen_range(0..4) {
            0 => format!("    {var} = {var} + {};\n", rng.gen_range(1..64)),
            1 => format!(
                "    {}(\"{}\", {var});\n",
                pick(rng, LOGS),
                pick(rng, NOUNS)
            ),
            2 => format!("    {var} ^= 0x{:x};\n", rng.gen_range(1..256)),
            _ => format!("    {}_{}++;\n", pick(rng, NOUNS), pick(rng, MEMBERS)),
        };
        out.push_str(&line);
    }
    out
}

/// Renders one function. `guarded` selects the safe counterpart.
fn render<R: Rng>(family: Family, guarded: bool, rng: &mut R) -> String {
    let fname = format!(
        "{}_{}{}",
        pick(rng, VERBS),
        pick(rng, NOUNS),
        rng.gen_range(0..100)
    );
    let tmp = ident(rng, &["tmp", "val", "res", "out", "ret"]);
    match family {
        Family::ArrayIndex => {
            let buf = ident(rng, VARS);
            let idx = ident(rng, &["idx", "pos", "i", "off", "n"]);
            let size = rng.gen_range(4..1024);
            let body = filler(rng, &tmp);
            let guard = if guarded {
                format!("    if ({idx} < 0 || {idx} >= {size}) return -1;\n")
            } else {
                String::new()
            };
            format!(
                "int {fname}(int *{buf}, int {idx}) {{\n    int {tmp} = {init};\n{body}{guard}    {tmp} = {buf}[{idx}];\n    return {tmp};\n}}\n",
                init = rng.gen_range(0..16),
            )
        }
        Family::NullDeref => {
            let ty = pick(rng, TYPES);
            let p = ident(rng, &["p", "ptr", "obj", "h", "s"]);
            let member = pick(rng, MEMBERS);
            let fallback = rng.gen_range(0..8);
            let body = filler(rng, &tmp);
            let guard = if guarded {
                format!("    if ({p} == NULL) return {fallback};\n")
            } else {
                String::new()
            };
            format!(
                "int {fname}(struct {ty} *{p}) {{\n    int {tmp} = {init};\n{body}{guard}    {tmp} = {p}->{member};\n    return {tmp};\n}}\n",
                init = rng.gen_range(0..16),
            )
        }
        Family::AllocOverflow => {
            let out = ident(rng, VARS);
            let n = ident(rng, &["n", "count", "nmemb", "len"]);
            let sz = ident(rng, &["sz", "size", "width", "elem"]);
            let body = filler(rng, &tmp);
            let guard = if guarded {
                format!("    if ({sz} != 0 && {n} > SIZE_MAX / {sz}) return NULL;\n")
            } else {
                String::new()
            };
            format!(
                "char *{fname}(size_t {n}, size_t {sz}) {{\n    char *{out};\n    int {tmp} = {init};\n{body}{guard}    {out} = malloc({n} * {sz});\n    return {out};\n}}\n",
                init = rng.gen_range(0..16),
            )
        }
    }
}

/// Largest-remainder apportionment of `total` across `ratios`.
fn apportion(total: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let raw: Vec<f64> = ratios.iter().map(|r| r * total as f64).collect();
    let mut out = [0usize; 3];
    for (o, r) in out.iter_mut().zip(&raw) {
        *o = r.floor() as usize;
    }
    let mut rest = total - out.iter().sum::<usize>();
    let mut by_frac: Vec<usize> = (0..3).collect();
    by_frac.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())));
    for &i in by_frac.iter().cycle() {
        if rest == 0 {
            break;
        }
        out[i] += 1;
        rest -= 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Splits {
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
    pub test: Vec<Sample>,
}

/// Seeded, label-stratified split into train / validation / test.
pub fn split(corpus: &[Sample], ratios: [f64; 3], seed: u64) -> Result<Splits> {
    validate_split_ratios(&ratios)?;
    if corpus.len() < 3 {
        return Err(Error::Data(format!(
            "corpus of {} samples is too small to split",
            corpus.len()
        )));
    }
    let mut sizes = apportion(corpus.len(), &ratios);
    // every split gets at least one sample
    for i in 0..3 {
        if sizes[i] == 0 {
            let donor = (0..3).max_by_key(|&j| sizes[j]).unwrap_or(0);
            sizes[donor] -= 1;
            sizes[i] += 1;
        }
    }

    let mut rng = stream(seed, STREAM_SPLIT);
    let mut pos: Vec<usize> = (0..corpus.len())
        .filter(|&i| corpus[i].label == 1)
        .collect();
    let mut neg: Vec<usize> = (0..corpus.len())
        .filter(|&i| corpus[i].label != 1)
        .collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let mut pos_sizes = apportion(pos.len(), &ratios);
    // keep each split's positive count within its total size
    loop {
        let over = (0..3).find(|&k| pos_sizes[k] > sizes[k]);
        let Some(k) = over else { break };
        let room = (0..3)
            .filter(|&j| pos_sizes[j] < sizes[j])
            .max_by_key(|&j| sizes[j] - pos_sizes[j]);
        let Some(j) = room else { break };
        pos_sizes[k] -= 1;
        pos_sizes[j] += 1;
    }

    let mut parts: [Vec<Sample>; 3] = Default::default();
    let (mut pi, mut ni) = (0, 0);
    for k in 0..3 {
        let take_neg = sizes[k] - pos_sizes[k];
        let mut idx: Vec<usize> = pos[pi..pi + pos_sizes[k]]
            .iter()
            .chain(&neg[ni..ni + take_neg])
            .copied()
            .collect();
        pi += pos_sizes[k];
        ni += take_neg;
        idx.shuffle(&mut rng);
        parts[k] = idx.into_iter().map(|i| corpus[i].clone()).collect();
    }
    let [train, validation, test] = parts;
    Ok(Splits {
        train,
        validation,
        test,
    })
}

#[derive(Deserialize)]
struct RawSample {
    id: Option<serde_json::Value>,
    code: Option<serde_json::Value>,
    label: Option<serde_json::Value>,
    #[serde(default)]
    category: Option<String>,
    #[serde(default)]
    project: Option<String>,
}

pub fn parse_jsonl<R: BufRead>(reader: R, path: &Path) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in reader.lines().enumerate() {
        let lineno = n + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |reason: String| Error::Parse {
            path: path.to_owned(),
            line: lineno,
            reason,
        };
        let raw: RawSample = serde_json::from_str(&line).map_err(|e| fail(e.to_string()))?;
        let id = match raw.id {
            Some(serde_json::Value::String(s)) => s,
            _ => return Err(fail("field \"id\" must be a string".into())),
        };
        let code = match raw.code {
            Some(serde_json::Value::String(s)) => s,
            _ => return Err(fail("field \"code\" must be a string".into())),
        };
        let label = match raw.label.as_ref().and_then(|v| v.as_u64()) {
            Some(l @ (0 | 1)) => l as Label,
            _ => {
                return Err(fail(format!(
                    "field \"label\" must be 0 or 1, got {}",
                    raw.label.map_or("nothing".into(), |v| v.to_string())
                )))
            }
        };
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        out.push(Sample {
            id,
            code,
            label,
            category: raw.category,
            project: raw.project,
        });
    }
    Ok(out)
}

pub fn load_jsonl(path: &Path) -> Result<Vec<Sample>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_jsonl(BufReader::new(f), path)
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_clean_labels(path: &Path) -> Result<Vec<CleanLabel>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(f)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|(n, line)| {
            let line = line.map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: path.to_owned(),
                line: n + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> SynthConfig {
        SynthConfig {
            n_samples: n,
            label_noise_rate: 0.0,
            unrelated_noise_rate: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn clean_corpus_labels_match_templates() {
        let c = generate(&cfg(300)).unwrap();
        for (s, t) in c.samples.iter().zip(&c.truth) {
            assert_eq!(s.label, t.template_label);
            assert_eq!(s.label, t.clean_label);
            assert_eq!(t.noise, NoiseKind::None);
            let guarded = s.code.contains(" if (");
            assert_eq!(guarded, s.label == 0, "{}", s.code);
        }
    }

    #[test]
    fn full_flip() {
        let clean = generate(&cfg(200)).unwrap();
        let flipped = generate(&SynthConfig {
            label_noise_rate: 1.0,
            ..cfg(200)
        })
        .unwrap();
        for (a, b) in clean.samples.iter().zip(&flipped.samples) {
            assert_eq!(a.code, b.code);
            assert_eq!(a.label, 1 - b.label);
        }
    }

    #[test]
    fn positive_count_before_noise() {
        let c = generate(&SynthConfig {
            positive_ratio: 0.058,
            ..cfg(1000)
        })
        .unwrap();
        assert_eq!(c.samples.iter().filter(|s| s.label == 1).count(), 58);
    }

    #[test]
    fn noise_preserves_size_and_ids() {
        let clean = generate(&cfg(500)).unwrap();
        let noisy = generate(&SynthConfig {
            label_noise_rate: 0.2,
            unrelated_noise_rate: 0.1,
            ..cfg(500)
        })
        .unwrap();
        assert_eq!(clean.samples.len(), noisy.samples.len());
        for (a, b) in clean.samples.iter().zip(&noisy.samples) {
            assert_eq!(a.id, b.id);
        }
        let flipped = noisy
            .truth
            .iter()
            .filter(|t| matches!(t.noise, NoiseKind::Flipped | NoiseKind::FlippedUnrelated))
            .count();
        assert_eq!(flipped, 100);
        // unrelated replacements keep label 1 with benign, guarded code
        for (s, t) in noisy.samples.iter().zip(&noisy.truth) {
            if matches!(t.noise, NoiseKind::Unrelated | NoiseKind::FlippedUnrelated) {
                assert_eq!(s.label, 1);
                assert_eq!(t.clean_label, 0);
                assert!(s.code.contains(" if ("));
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let c = SynthConfig::default();
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        let other = generate(&SynthConfig {
            seed: 43,
            ..c.clone()
        })
        .unwrap();
        assert_ne!(generate(&c).unwrap().samples, other.samples);
    }

    #[test]
    fn invalid_configs() {
        let e = generate(&SynthConfig {
            n_samples: 0,
            ..Default::default()
        })
        .unwrap_err();
        assert!(e.to_string().contains("n_samples must be positive"));
        assert!(generate(&SynthConfig {
            template_mix: [0.5, 0.5, 0.5],
            ..Default::default()
        })
        .is_err());
        assert!(generate(&SynthConfig {
            label_noise_rate: 1.5,
            ..Default::default()
        })
        .is_err());
    }

    fn toy(n: usize, positives: usize) -> Vec<Sample> {
        (0..n)
            .map(|i| Sample {
                id: format!("t{i}"),
                code: String::new(),
                label: u8::from(i < positives),
                category: None,
                project: None,
            })
            .collect()
    }

    #[test]
    fn split_sizes_and_stratification() {
        let s = split(&toy(10, 3), [0.8, 0.1, 0.1], 1).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (8, 1, 1));
        let s = split(&toy(100, 20), [0.8, 0.1, 0.1], 9).unwrap();
        assert_eq!(s.train.iter().filter(|x| x.label == 1).count(), 16);
        assert_eq!(s.validation.iter().filter(|x| x.label == 1).count(), 2);
        let s = split(&toy(3, 1), [0.8, 0.1, 0.1], 0).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (1, 1, 1));
        assert!(split(&toy(2, 1), [0.8, 0.1, 0.1], 0).is_err());
        assert!(split(&toy(10, 1), [0.8, 0.3, 0.1], 0).is_err());
    }

    #[test]
    fn split_is_deterministic_partition() {
        let c = generate(&SynthConfig::default()).unwrap().samples;
        let a = split(&c, [0.8, 0.1, 0.1], 5).unwrap();
        assert_eq!(a, split(&c, [0.8, 0.1, 0.1], 5).unwrap());
        let mut ids: Vec<&str> = a
            .train
            .iter()
            .chain(&a.validation)
            .chain(&a.test)
            .map(|s| s.id.as_str())
            .collect();
        assert_eq!(ids.len(), c.len());
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), c.len());
        let total_pos = c.iter().filter(|s| s.label == 1).count() as f64;
        for (part, r) in [(&a.train, 0.8), (&a.validation, 0.1), (&a.test, 0.1)] {
            let p = part.iter().filter(|s| s.label == 1).count() as f64;
            assert!((p - total_pos * r).abs() <= 1.0);
        }
    }

    #[test]
    fn jsonl_parsing() {
        let p = Path::new("mem.jsonl");
        let ok = "{\"id\":\"a\",\"code\":\"x\",\"label\":1}\n{\"id\":\"b\",\"code\":\"\",\"label\":0,\"category\":\"CWE-476\"}\n";
        let v = parse_jsonl(ok.as_bytes(), p).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1].category.as_deref(), Some("CWE-476"));

        let dup = "{\"id\":\"a\",\"code\":\"x\",\"label\":1}\n{\"id\":\"a\",\"code\":\"y\",\"label\":0}\n";
        let e = parse_jsonl(dup.as_bytes(), p).unwrap_err();
        assert!(e.to_string().contains("\"a\""), "{e}");

        let bad = "{\"id\":\"a\",\"code\":\"x\",\"label\":1}\n{\"id\":\"b\",\"code\":\"y\",\"label\":\"2\"}\n";
        let e = parse_jsonl(bad.as_bytes(), p).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");

        let bad = "{\"id\":\"a\",\"code\":\"x\",\"label\":2}\n";
        assert!(matches!(
            parse_jsonl(bad.as_bytes(), p).unwrap_err(),
            Error::Parse { line: 1, .. }
        ));

        let broken = "{\"id\":\"a\",\n";
        assert!(matches!(
            parse_jsonl(broken.as_bytes(), p).unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
    }
}
