//! Rating-profile encoding into two-field term-frequency documents.
//!
//! Each rating in a profile becomes a term whose id is the opposing id (the
//! item id when encoding users, the user id when encoding items) and whose
//! frequency is the truncated, scaled magnitude of its mean-centered rate.
//! The sign of the deviation is carried by a one-character prefix: `p` for
//! positive deviations, `n` for negative ones. The `prate` field holds the
//! true prefixes; `nrate` is the same multiset with every prefix flipped, so
//! cross-sign matches can be scored by querying that field instead.

use alloc::collections::BTreeMap;
use core::fmt;

/// Deviation sign carried by a term prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn flipped(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    pub fn prefix_char(self) -> char {
        match self {
            Sign::Positive => 'p',
            Sign::Negative => 'n',
        }
    }
}

/// A prefixed term id, e.g. `p37` or `n24`.
///
/// Ordered by raw id first so that flipping every prefix of a term set does
/// not change its iteration order; scores summed term-at-a-time then match
/// bit-for-bit between a query and its flipped mirror.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermId {
    pub raw_id: u64,
    pub sign: Sign,
}

impl TermId {
    pub fn positive(raw_id: u64) -> Self {
        TermId { raw_id, sign: Sign::Positive }
    }

    pub fn negative(raw_id: u64) -> Self {
        TermId { raw_id, sign: Sign::Negative }
    }

    pub fn flipped(self) -> Self {
        TermId { raw_id: self.raw_id, sign: self.sign.flipped() }
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sign.prefix_char(), self.raw_id)
    }
}

/// A profile encoded into the two mirrored fields, with the profile mean and
/// the Euclidean norm of the frequency vector precomputed for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDocument {
    pub doc_id: u64,
    pub scale_factor: u32,
    pub prate: BTreeMap<TermId, u32>,
    pub nrate: BTreeMap<TermId, u32>,
    pub stored_mean: f64,
    pub norm: f64,
}

impl EncodedDocument {
    /// Total term count of one field (both fields agree by construction).
    pub fn doc_length(&self) -> u64 {
        self.prate.values().map(|&f| f as u64).sum()
    }
}

/// Guard added before truncation so that deviations which are exact multiples
/// of `1/scale_factor` survive the float round-trip (e.g. |4 - 3.95| * 100
/// evaluates to 4.999999999999998 and must still quantize to 5). The guard is
/// far above accumulated representation error (< 1e-9 here) and far below the
/// gap to the next representable deviation for any realistic profile length.
const QUANT_EPS: f64 = 1e-6;

fn quantize(deviation_magnitude: f64, scale_factor: u32) -> u32 {
    libm::floor(deviation_magnitude * scale_factor as f64 + QUANT_EPS) as u32
}

/// Encodes a profile into a two-field document.
///
/// Terms quantizing to frequency 0 (deviations smaller than `1/scale_factor`
/// in magnitude, including exact ties at the mean) are omitted; a profile of
/// all near-mean ratings legally encodes to an empty document with norm 0.
pub fn encode_profile(
    doc_id: u64,
    profile: &[(u64, f64)],
    mean: f64,
    scale_factor: u32,
) -> EncodedDocument {
    debug_assert!(scale_factor >= 1);
    let mut prate = BTreeMap::new();
    let mut nrate = BTreeMap::new();
    let mut norm_sq = 0.0;
    for &(raw_id, rating) in profile {
        let deviation = rating - mean;
        let freq = quantize(deviation.abs(), scale_factor);
        if freq == 0 {
            continue;
        }
        let sign = if deviation > 0.0 { Sign::Positive } else { Sign::Negative };
        prate.insert(TermId { raw_id, sign }, freq);
        nrate.insert(TermId { raw_id, sign: sign.flipped() }, freq);
        norm_sq += (freq as f64) * (freq as f64);
    }
    EncodedDocument {
        doc_id,
        scale_factor,
        prate,
        nrate,
        stored_mean: mean,
        norm: libm::sqrt(norm_sq),
    }
}

/// Encodes the query side: identical to the `prate` field of
/// [`encode_profile`]. No mirror is needed because the same query is issued
/// against both fields.
pub fn encode_query(
    profile: &[(u64, f64)],
    mean: f64,
    scale_factor: u32,
) -> BTreeMap<TermId, u32> {
    encode_profile(0, profile, mean, scale_factor).prate
}

/// Flips the prefix of every term in a query.
pub fn flip_query(query: &BTreeMap<TermId, u32>) -> BTreeMap<TermId, u32> {
    query.iter().map(|(t, &f)| (t.flipped(), f)).collect()
}
