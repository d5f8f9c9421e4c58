//! Similarities and equivalences between next-symbol distributions.
//!
//! Similarities are thresholded distance functions (`vd`, `sdr`, `wer_r`,
//! `ndcg_r`) and are not transitive in general. Equivalences are realized
//! through canonical [`ClassSignature`]s: two distributions are equivalent
//! iff their signatures are byte-equal, so transitivity holds structurally.
//!
//! Grammar (shared by the CLI and config files):
//!
//! ```text
//! equivalence := quant:<κ> | rank:<r> | top:<r> | supp | exact
//!              | combo:<equivalence>+<equivalence>[+...]
//! similarity  := vd:<t> | sdr:<t> | wer:<r>:<t> | ndcg:<r>:<t>
//! ```

use std::fmt;
use std::str::FromStr;

use crate::distribution::Distribution;
use crate::error::{Error, Result};

/// Variation distance: `max_σ |δ(σ) − δ'(σ)|`.
pub fn vd(d1: &Distribution, d2: &Distribution) -> Result<f64> {
    d1.check_same_alphabet(d2)?;
    Ok(d1
        .probs()
        .iter()
        .zip(d2.probs())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max))
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> usize {
    // both sorted
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

/// Support difference rate.
pub fn sdr(d1: &Distribution, d2: &Distribution) -> Result<f64> {
    d1.check_same_alphabet(d2)?;
    let diff = symmetric_difference(&d1.support(), &d2.support());
    Ok(diff as f64 / d1.len() as f64)
}

/// Word error rate on the top-`r` symbols.
pub fn wer(d1: &Distribution, d2: &Distribution, r: usize) -> Result<f64> {
    d1.check_same_alphabet(d2)?;
    if r == 0 {
        return Err(Error::spec("wer", "r must be at least 1"));
    }
    let diff = symmetric_difference(&d1.top_r(r), &d2.top_r(r));
    Ok(diff as f64 / (2 * r) as f64)
}

/// Normalized DCG of `candidate` against the rank-`r` relevance of `reference`.
///
/// Positions run up to `min(r, |Σ_$|)`: there is no `k`-th ranked symbol
/// past the alphabet size, and the normalizer covers the same positions.
fn ndcg_one_sided(candidate: &Distribution, reference: &Distribution, r: usize) -> f64 {
    let positions = r.min(candidate.len());
    let relevance = reference.rank_r(r);
    let ranking = candidate.ranking();
    let mut gain = 0.0;
    let mut ideal = 0.0;
    for k in 1..=positions {
        let discount = ((k + 1) as f64).log2();
        gain += (r + 1 - relevance[ranking[k - 1]]) as f64 / discount;
        ideal += (r + 1 - k) as f64 / discount;
    }
    gain / ideal
}

/// `1 − (NDCG_r(δ'|δ) + NDCG_r(δ|δ')) / 2`.
pub fn ndcg(d1: &Distribution, d2: &Distribution, r: usize) -> Result<f64> {
    d1.check_same_alphabet(d2)?;
    if r == 0 {
        return Err(Error::spec("ndcg", "r must be at least 1"));
    }
    Ok(1.0 - (ndcg_one_sided(d2, d1, r) + ndcg_one_sided(d1, d2, r)) / 2.0)
}

/// Distance function of a similarity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimilarityKind {
    Vd,
    Sdr,
    Wer(usize),
    Ndcg(usize),
}

/// A similarity `δ ≈ δ' ⟺ z(δ, δ') ≤ t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilaritySpec {
    pub kind: SimilarityKind,
    pub threshold: f64,
}

impl SimilaritySpec {
    pub fn new(kind: SimilarityKind, threshold: f64) -> Result<Self> {
        let spec = SimilaritySpec { kind, threshold };
        spec.validate()?;
        Ok(spec)
    }

    pub fn vd(threshold: f64) -> Self {
        SimilaritySpec {
            kind: SimilarityKind::Vd,
            threshold,
        }
    }

    fn validate(&self) -> Result<()> {
        let text = self.to_string();
        if !self.threshold.is_finite() || self.threshold < 0.0 {
            return Err(Error::spec(&text, "threshold must be non-negative"));
        }
        match self.kind {
            SimilarityKind::Vd => {}
            SimilarityKind::Sdr => {
                if self.threshold > 1.0 {
                    return Err(Error::spec(&text, "threshold must be in [0,1]"));
                }
            }
            SimilarityKind::Wer(r) | SimilarityKind::Ndcg(r) => {
                if r == 0 {
                    return Err(Error::spec(&text, "r must be at least 1"));
                }
                if self.threshold > 1.0 {
                    return Err(Error::spec(&text, "threshold must be in [0,1]"));
                }
            }
        }
        Ok(())
    }

    pub fn distance(&self, d1: &Distribution, d2: &Distribution) -> Result<f64> {
        match self.kind {
            SimilarityKind::Vd => vd(d1, d2),
            SimilarityKind::Sdr => sdr(d1, d2),
            SimilarityKind::Wer(r) => wer(d1, d2, r),
            SimilarityKind::Ndcg(r) => ndcg(d1, d2, r),
        }
    }

    pub fn similar(&self, d1: &Distribution, d2: &Distribution) -> Result<bool> {
        Ok(self.distance(d1, d2)? <= self.threshold)
    }
}

/// Free-function form of [`SimilaritySpec::similar`].
pub fn similar(d1: &Distribution, d2: &Distribution, s: &SimilaritySpec) -> Result<bool> {
    s.similar(d1, d2)
}

impl fmt::Display for SimilaritySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SimilarityKind::Vd => write!(f, "vd:{}", self.threshold),
            SimilarityKind::Sdr => write!(f, "sdr:{}", self.threshold),
            SimilarityKind::Wer(r) => write!(f, "wer:{r}:{}", self.threshold),
            SimilarityKind::Ndcg(r) => write!(f, "ndcg:{r}:{}", self.threshold),
        }
    }
}

fn parse_num<T: FromStr>(spec: &str, field: &str, text: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::spec(spec, format!("cannot parse {field} `{text}`")))
}

impl FromStr for SimilaritySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let (kind, threshold) = match parts.as_slice() {
            ["vd", t] => (SimilarityKind::Vd, parse_num(s, "threshold", t)?),
            ["sdr", t] => (SimilarityKind::Sdr, parse_num(s, "threshold", t)?),
            ["wer", r, t] => (
                SimilarityKind::Wer(parse_num(s, "r", r)?),
                parse_num(s, "threshold", t)?,
            ),
            ["ndcg", r, t] => (
                SimilarityKind::Ndcg(parse_num(s, "r", r)?),
                parse_num(s, "threshold", t)?,
            ),
            _ => return Err(Error::spec(s, "expected vd:<t>, sdr:<t>, wer:<r>:<t> or ndcg:<r>:<t>")),
        };
        SimilaritySpec::new(kind, threshold)
    }
}

/// Canonical key of an equivalence class of distributions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassSignature(Vec<u8>);

impl ClassSignature {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        ClassSignature(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        hex::decode(text)
            .map(ClassSignature)
            .map_err(|e| Error::Format(format!("bad signature hex: {e}")))
    }
}

impl fmt::Debug for ClassSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClassSignature({})", self.to_hex())
    }
}

/// An equivalence relation on distributions, presented by class signatures.
pub trait Equivalence: Send + Sync {
    fn signature(&self, d: &Distribution) -> Result<ClassSignature>;

    /// Stable textual name, stored in quotient files.
    fn label(&self) -> String;

    fn equivalent(&self, d1: &Distribution, d2: &Distribution) -> Result<bool> {
        d1.check_same_alphabet(d2)?;
        Ok(self.signature(d1)? == self.signature(d2)?)
    }
}

impl<E: Equivalence + ?Sized> Equivalence for &E {
    fn signature(&self, d: &Distribution) -> Result<ClassSignature> {
        (**self).signature(d)
    }

    fn label(&self) -> String {
        (**self).label()
    }
}

/// Equivalences expressible in the spec grammar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivalenceSpec {
    Quant(u32),
    Rank(usize),
    Top(usize),
    Supp,
    Exact,
    Combo(Vec<EquivalenceSpec>),
}

const TAG_QUANT: u8 = 1;
const TAG_RANK: u8 = 2;
const TAG_TOP: u8 = 3;
const TAG_SUPP: u8 = 4;
const TAG_EXACT: u8 = 5;
const TAG_COMBO: u8 = 6;

const QUANT_SCALE: u128 = 1_000_000_000_000;
const EXACT_SCALE: f64 = 1e9;

/// Quantization interval index of `p`, in `0..kappa`.
///
/// `p` is first rounded to 12 decimals; the arithmetic after that is exact,
/// so boundaries such as `1/3 · 3` land deterministically.
pub fn quant_bucket(p: f64, kappa: u32) -> u32 {
    let scaled = (p * QUANT_SCALE as f64).round().max(0.0) as u128;
    let bucket = scaled * kappa as u128 / QUANT_SCALE;
    bucket.min(kappa as u128 - 1) as u32
}

fn push_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

impl EquivalenceSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EquivalenceSpec::Quant(0) => Err(Error::spec(&self.to_string(), "κ must be at least 1")),
            EquivalenceSpec::Rank(0) | EquivalenceSpec::Top(0) => {
                Err(Error::spec(&self.to_string(), "r must be at least 1"))
            }
            EquivalenceSpec::Combo(members) => {
                if members.is_empty() {
                    return Err(Error::spec("combo", "empty member list"));
                }
                for m in members {
                    if matches!(m, EquivalenceSpec::Combo(_)) {
                        return Err(Error::spec(&self.to_string(), "nested combo"));
                    }
                    m.validate()?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Canonical signature of `d`. The spec must be valid.
    pub fn signature_of(&self, d: &Distribution) -> ClassSignature {
        let mut out = Vec::new();
        self.write_signature(d, &mut out);
        ClassSignature(out)
    }

    fn write_signature(&self, d: &Distribution, out: &mut Vec<u8>) {
        match self {
            EquivalenceSpec::Quant(kappa) => {
                out.push(TAG_QUANT);
                push_u32(out, *kappa as usize);
                for &p in d.probs() {
                    push_u32(out, quant_bucket(p, *kappa) as usize);
                }
            }
            EquivalenceSpec::Rank(r) => {
                out.push(TAG_RANK);
                push_u32(out, *r);
                for k in d.rank_r(*r) {
                    push_u32(out, k);
                }
            }
            EquivalenceSpec::Top(r) => {
                out.push(TAG_TOP);
                push_u32(out, *r);
                let top = d.top_r(*r);
                push_u32(out, top.len());
                for s in top {
                    push_u32(out, s);
                }
            }
            EquivalenceSpec::Supp => {
                out.push(TAG_SUPP);
                let supp = d.support();
                push_u32(out, supp.len());
                for s in supp {
                    push_u32(out, s);
                }
            }
            EquivalenceSpec::Exact => {
                out.push(TAG_EXACT);
                for &p in d.probs() {
                    let key = (p * EXACT_SCALE).round() as i64;
                    out.extend_from_slice(&key.to_le_bytes());
                }
            }
            EquivalenceSpec::Combo(members) => {
                out.push(TAG_COMBO);
                push_u32(out, members.len());
                for m in members {
                    m.write_signature(d, out);
                }
            }
        }
    }
}

/// Free-function form of [`EquivalenceSpec::signature_of`] with validation.
pub fn signature(d: &Distribution, e: &EquivalenceSpec) -> Result<ClassSignature> {
    e.validate()?;
    Ok(e.signature_of(d))
}

impl Equivalence for EquivalenceSpec {
    fn signature(&self, d: &Distribution) -> Result<ClassSignature> {
        Ok(self.signature_of(d))
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for EquivalenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivalenceSpec::Quant(k) => write!(f, "quant:{k}"),
            EquivalenceSpec::Rank(r) => write!(f, "rank:{r}"),
            EquivalenceSpec::Top(r) => write!(f, "top:{r}"),
            EquivalenceSpec::Supp => write!(f, "supp"),
            EquivalenceSpec::Exact => write!(f, "exact"),
            EquivalenceSpec::Combo(members) => {
                write!(f, "combo:")?;
                for (i, m) in members.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{m}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_simple(s: &str, whole: &str) -> Result<EquivalenceSpec> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    let spec = match parts.as_slice() {
        ["quant", k] => EquivalenceSpec::Quant(parse_num(whole, "κ", k)?),
        ["rank", r] => EquivalenceSpec::Rank(parse_num(whole, "r", r)?),
        ["top", r] => EquivalenceSpec::Top(parse_num(whole, "r", r)?),
        ["supp"] => EquivalenceSpec::Supp,
        ["exact"] => EquivalenceSpec::Exact,
        ["combo", ..] => return Err(Error::spec(whole, "nested combo")),
        _ => {
            return Err(Error::spec(
                whole,
                "expected quant:<κ>, rank:<r>, top:<r>, supp, exact or combo:<spec>+<spec>",
            ))
        }
    };
    Ok(spec)
}

impl FromStr for EquivalenceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let spec = match s.strip_prefix("combo:") {
            Some(rest) => EquivalenceSpec::Combo(
                rest.split('+')
                    .map(|m| parse_simple(m, s))
                    .collect::<Result<_>>()?,
            ),
            None => parse_simple(s, s)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}
