//! One-hot and generalized (order-`m`) message codebooks.
//!
//! A codebook of size `M` and order `m` maps each message to a probability
//! vector of length `M` with exactly `m` entries equal to `1/m`. The order-1
//! codebook is the conventional one-hot representation. Of the `C(M, m)`
//! possible supports only `2^⌊log₂ C(M, m)⌋` are used, so that every message
//! carries a whole number of bits.
//!
//! Messages are zero-based.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Upper bound on the number of entries a codebook may hold.
pub const MAX_ENTRIES: usize = 1 << 16;

/// Vector sizes used by the sweep recipes; other powers of two also work.
pub const STANDARD_SIZES: [usize; 5] = [4, 8, 16, 32, 64];

/// How the `2^k` supports are picked out of all `C(M, m)` candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Selection {
    /// The first `2^k` index combinations in lexicographic order.
    Lexicographic,
    /// A seeded random subset, kept in lexicographic order.
    Random { seed: u64 },
}

impl Selection {
    pub fn name(&self) -> &'static str {
        match self {
            Selection::Lexicographic => "lexicographic",
            Selection::Random { .. } => "random",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Selection::Lexicographic => 0,
            Selection::Random { seed } => *seed,
        }
    }

    pub fn from_parts(name: &str, seed: u64) -> Option<Self> {
        match name {
            "lexicographic" => Some(Selection::Lexicographic),
            "random" => Some(Selection::Random { seed }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MessageId(pub usize);

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Text description of a codebook, embedded in checkpoints and CSV headers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodebookManifest {
    pub size: usize,
    pub order: usize,
    pub selection: Selection,
    pub bits_per_message: u32,
}

impl fmt::Display for CodebookManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "M={} m={} selection={} seed={} bits_per_message={}",
            self.size,
            self.order,
            self.selection.name(),
            self.selection.seed(),
            self.bits_per_message
        )
    }
}

#[derive(Debug, Clone)]
pub struct Codebook {
    size: usize,
    order: usize,
    selection: Selection,
    bits: u32,
    supports: Vec<Vec<usize>>,
    entries: Vec<Vec<f64>>,
    index: HashMap<Vec<usize>, usize>,
}

impl PartialEq for Codebook {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
            && self.order == other.order
            && self.selection == other.selection
            && self.supports == other.supports
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `⌊log₂ C(M, m)⌋`, the whole number of bits an order-`m` codebook carries.
pub fn bits_for(size: usize, order: usize) -> u32 {
    let c = binomial(size, order);
    if c == 0 {
        0
    } else {
        127 - c.leading_zeros()
    }
}

/// Next combination of `0..n` in lexicographic order, in place.
fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - k + i {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// One-hot codebook of size `size`.
pub fn build_onehot(size: usize) -> Result<Codebook> {
    if size < 2 {
        return Err(Error::domain(format!("one-hot size must be at least 2, got {size}")));
    }
    if !size.is_power_of_two() {
        return Err(Error::domain(format!(
            "one-hot size must be a power of two, got {size}"
        )));
    }
    build_gdr(size, 1)
}

/// Order-`order` codebook with lexicographic support selection.
pub fn build_gdr(size: usize, order: usize) -> Result<Codebook> {
    build_gdr_with(size, order, Selection::Lexicographic)
}

pub fn build_gdr_with(size: usize, order: usize, selection: Selection) -> Result<Codebook> {
    if size < 2 {
        return Err(Error::domain(format!("vector size must be at least 2, got {size}")));
    }
    if order < 1 || order > size / 2 {
        return Err(Error::domain(format!(
            "order must lie in 1..={} for M={size}, got {order}",
            size / 2
        )));
    }
    let bits = bits_for(size, order);
    let count = 1usize.checked_shl(bits).filter(|c| *c <= MAX_ENTRIES).ok_or_else(|| {
        Error::domain(format!(
            "M={size}, m={order} needs 2^{bits} entries, above the {MAX_ENTRIES} limit"
        ))
    })?;
    if order == 1 && !size.is_power_of_two() {
        return Err(Error::domain(format!(
            "one-hot size must be a power of two, got {size}"
        )));
    }

    let supports = match selection {
        Selection::Lexicographic => {
            let mut comb: Vec<usize> = (0..order).collect();
            let mut out = Vec::with_capacity(count);
            loop {
                out.push(comb.clone());
                if out.len() == count || !next_combination(&mut comb, size) {
                    break;
                }
            }
            out
        }
        Selection::Random { seed } => {
            let mut all = Vec::with_capacity(binomial(size, order) as usize);
            let mut comb: Vec<usize> = (0..order).collect();
            loop {
                all.push(comb.clone());
                if !next_combination(&mut comb, size) {
                    break;
                }
            }
            let mut rng = seeded(seed);
            all.shuffle(&mut rng);
            all.truncate(count);
            all.sort();
            all
        }
    };

    let value = 1.0 / order as f64;
    let entries = supports
        .iter()
        .map(|support| {
            let mut v = vec![0.0; size];
            for &i in support {
                v[i] = value;
            }
            v
        })
        .collect();
    let index = supports.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();

    Ok(Codebook {
        size,
        order,
        selection,
        bits,
        supports,
        entries,
        index,
    })
}

impl Codebook {
    /// Vector length `M`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Non-zero entries per vector, `m`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn selection(&self) -> Selection {
        self.selection
    }

    pub fn bits_per_message(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_onehot(&self) -> bool {
        self.order == 1
    }

    pub fn entry(&self, id: MessageId) -> &[f64] {
        &self.entries[id.0]
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn support(&self, id: MessageId) -> &[usize] {
        &self.supports[id.0]
    }

    pub fn lookup(&self, support: &[usize]) -> Option<MessageId> {
        self.index.get(support).copied().map(MessageId)
    }

    pub fn message(&self, value: usize) -> Result<MessageId> {
        if value < self.len() {
            Ok(MessageId(value))
        } else {
            Err(Error::domain(format!(
                "message {value} outside codebook of {} entries",
                self.len()
            )))
        }
    }

    pub fn manifest(&self) -> CodebookManifest {
        CodebookManifest {
            size: self.size,
            order: self.order,
            selection: self.selection,
            bits_per_message: self.bits,
        }
    }

    pub fn from_manifest(manifest: &CodebookManifest) -> Result<Self> {
        let cb = build_gdr_with(manifest.size, manifest.order, manifest.selection)?;
        if cb.bits != manifest.bits_per_message {
            return Err(Error::domain(format!(
                "manifest claims {} bits, M={} m={} gives {}",
                manifest.bits_per_message, manifest.size, manifest.order, cb.bits
            )));
        }
        Ok(cb)
    }

    /// Top-`m` decision: the `m` largest probabilities (ties toward the lower
    /// index) form a support; if that support is not a codeword, the entry
    /// with the largest probability mass on its support wins.
    pub fn decode_top_m(&self, p: &[f64]) -> Result<MessageId> {
        if p.len() != self.size {
            return Err(Error::shape(format!(
                "probability vector has {} entries, codebook size is {}",
                p.len(),
                self.size
            )));
        }
        if self.order == 1 {
            return Ok(MessageId(argmax(p)));
        }
        let support = top_m(p, self.order);
        if let Some(id) = self.lookup(&support) {
            return Ok(id);
        }
        Ok(self.max_mass(p, 0..self.len()))
    }

    /// Decision restricted to the listed entries (adaptive transmission: the
    /// receiver knows which labels it fed back).
    pub fn decode_within(&self, p: &[f64], allowed: &[MessageId]) -> Result<MessageId> {
        if p.len() != self.size {
            return Err(Error::shape(format!(
                "probability vector has {} entries, codebook size is {}",
                p.len(),
                self.size
            )));
        }
        if allowed.is_empty() {
            return Err(Error::domain("empty transmit subset"));
        }
        if self.order > 1 {
            if let Some(id) = self.lookup(&top_m(p, self.order)) {
                if allowed.contains(&id) {
                    return Ok(id);
                }
            }
        }
        Ok(self.max_mass(p, allowed.iter().map(|m| m.0)))
    }

    fn max_mass(&self, p: &[f64], candidates: impl Iterator<Item = usize>) -> MessageId {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for i in candidates {
            let mass: f64 = self.supports[i].iter().map(|&j| p[j]).sum();
            if mass > best.1 || (mass == best.1 && i < best.0) {
                best = (i, mass);
            }
        }
        MessageId(best.0)
    }
}

fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Indices of the `m` largest values, ascending.
fn top_m(p: &[f64], m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    idx.truncate(m);
    idx.sort_unstable();
    idx
}

/// Free-function form of [`Codebook::decode_top_m`].
pub fn decode_top_m(p: &[f64], codebook: &Codebook) -> Result<MessageId> {
    codebook.decode_top_m(p)
}

/// Bits per channel use: `bits_per_message / n`.
pub fn data_rate(codebook: &Codebook, channel_uses: usize) -> f64 {
    codebook.bits_per_message() as f64 / channel_uses as f64
}

/// Binary-reflected gray code of `id` on `k` bits, most significant first.
pub fn gray_bits(id: MessageId, k: u32) -> Result<Vec<u8>> {
    if k < usize::BITS && id.0 >> k != 0 {
        return Err(Error::domain(format!("message {id} does not fit in {k} bits")));
    }
    let g = id.0 ^ (id.0 >> 1);
    Ok((0..k).rev().map(|b| ((g >> b) & 1) as u8).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn onehot_examples() {
        let cb = build_onehot(16).unwrap();
        let mut expected = vec![0.0; 16];
        expected[1] = 1.0;
        assert_eq!(cb.entry(MessageId(1)), expected.as_slice());
        let cb4 = build_onehot(4).unwrap();
        assert_eq!(cb4.len(), 4);
        assert!(cb4.entries().iter().all(|e| e.iter().sum::<f64>() == 1.0));
        assert_eq!(build_onehot(8).unwrap().bits_per_message(), 3);
        assert!(build_onehot(1).is_err());
        assert!(build_onehot(6).is_err());
    }

    #[test]
    fn gdr_examples() {
        let cb = build_gdr(8, 2).unwrap();
        assert_eq!(binomial(8, 2), 28);
        assert_eq!(cb.len(), 16);
        assert_eq!(cb.bits_per_message(), 4);
        assert_eq!(cb.entry(MessageId(0)), &[0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(cb.entry(MessageId(1)), &[0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(cb.entry(MessageId(2)), &[0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(build_gdr(8, 1).unwrap(), build_onehot(8).unwrap());
        assert!(build_gdr(8, 0).is_err());
        assert!(build_gdr(8, 5).is_err());
    }

    #[test]
    fn gdr_table_tail_rows() {
        // The last three listed rows of the M=8, m=2 table carry supports
        // {2,3}, {2,4}, {2,5} under lexicographic order.
        let cb = build_gdr(8, 2).unwrap();
        assert_eq!(cb.support(MessageId(13)), &[2, 3]);
        assert_eq!(cb.support(MessageId(14)), &[2, 4]);
        assert_eq!(cb.support(MessageId(15)), &[2, 5]);
    }

    #[test]
    fn data_rates() {
        let rate = |m: usize, o: usize| data_rate(&build_gdr(m, o).unwrap(), 7);
        assert_eq!(rate(8, 1), 3.0 / 7.0);
        assert_eq!(rate(8, 4), 6.0 / 7.0);
        assert_eq!(rate(16, 2), 6.0 / 7.0);
        assert_eq!(binomial(16, 8), 12_870);
        assert_eq!(bits_for(16, 8), 13);
    }

    #[test]
    fn decode_examples() {
        let cb = build_onehot(4).unwrap();
        assert_eq!(cb.decode_top_m(&[0.1, 0.6, 0.2, 0.1]).unwrap(), MessageId(1));

        let gdr = build_gdr(8, 2).unwrap();
        let p = [0.40, 0.35, 0.05, 0.05, 0.05, 0.04, 0.03, 0.03];
        assert_eq!(gdr.decode_top_m(&p).unwrap(), MessageId(0));
        assert_eq!(gdr.decode_top_m(&[0.125; 8]).unwrap(), MessageId(0));
        assert!(gdr.decode_top_m(&[0.5; 4]).is_err());
    }

    #[test]
    fn decode_falls_back_to_max_mass() {
        // {6,7} is not among the 16 lexicographic supports of M=8, m=2; the
        // best codeword by mass is {1,6} (0.60) ahead of {1,7} (0.59).
        let gdr = build_gdr(8, 2).unwrap();
        assert!(gdr.lookup(&[6, 7]).is_none());
        let p = [0.01, 0.25, 0.01, 0.01, 0.01, 0.02, 0.35, 0.34];
        let id = gdr.decode_top_m(&p).unwrap();
        assert_eq!(gdr.support(id), &[1, 6]);
    }

    #[test]
    fn decode_within_subset() {
        let cb = build_onehot(8).unwrap();
        let p = [0.05, 0.6, 0.05, 0.2, 0.05, 0.02, 0.02, 0.01];
        let allowed = [MessageId(0), MessageId(3)];
        assert_eq!(cb.decode_within(&p, &allowed).unwrap(), MessageId(3));
        assert!(cb.decode_within(&p, &[]).is_err());
    }

    #[test]
    fn gray_examples() {
        assert_eq!(gray_bits(MessageId(0), 2).unwrap(), vec![0, 0]);
        assert_eq!(gray_bits(MessageId(2), 2).unwrap(), vec![1, 1]);
        assert_eq!(gray_bits(MessageId(3), 2).unwrap(), vec![1, 0]);
        assert!(gray_bits(MessageId(4), 2).is_err());
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for k in 1..8u32 {
            for i in 1..(1usize << k) {
                let a = gray_bits(MessageId(i - 1), k).unwrap();
                let b = gray_bits(MessageId(i), k).unwrap();
                assert_eq!(a.iter().zip(&b).filter(|(x, y)| x != y).count(), 1);
            }
        }
    }

    #[test]
    fn random_selection_is_seeded() {
        let a = build_gdr_with(8, 2, Selection::Random { seed: 3 }).unwrap();
        let b = build_gdr_with(8, 2, Selection::Random { seed: 3 }).unwrap();
        let c = build_gdr_with(8, 2, Selection::Random { seed: 4 }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn manifest_round_trip() {
        let cb = build_gdr_with(16, 3, Selection::Random { seed: 9 }).unwrap();
        let back = Codebook::from_manifest(&cb.manifest()).unwrap();
        assert_eq!(cb, back);
        assert_eq!(
            cb.manifest().to_string(),
            "M=16 m=3 selection=random seed=9 bits_per_message=9"
        );
    }

    #[test]
    fn rate_non_decreasing_in_order() {
        for size in [4usize, 8, 16, 32, 64] {
            let mut last = 0;
            for order in 1..=size / 2 {
                let b = bits_for(size, order);
                assert!(b >= last);
                last = b;
            }
        }
    }

    fn small_codebook() -> impl Strategy<Value = (usize, usize)> {
        prop::sample::select(vec![4usize, 8, 16, 32]).prop_flat_map(|size| {
            let max_order = if size == 32 { 3 } else { size / 2 };
            (Just(size), 1..=max_order)
        })
    }

    proptest! {
        #[test]
        fn codebook_invariants((size, order) in small_codebook()) {
            let cb = build_gdr(size, order).unwrap();
            prop_assert_eq!(cb.len(), 1usize << cb.bits_per_message());
            let mut seen = std::collections::HashSet::new();
            for e in cb.entries() {
                prop_assert!((e.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert_eq!(e.iter().filter(|v| **v != 0.0).count(), order);
                prop_assert!(e.iter().all(|v| *v == 0.0 || *v == 1.0 / order as f64));
                prop_assert!(seen.insert(e.iter().map(|v| v.to_bits()).collect::<Vec<_>>()));
            }
        }

        #[test]
        fn noiseless_round_trip((size, order) in small_codebook(), pick in 0usize..1000) {
            let cb = build_gdr(size, order).unwrap();
            let id = MessageId(pick % cb.len());
            prop_assert_eq!(cb.decode_top_m(cb.entry(id)).unwrap(), id);
        }
    }
}
