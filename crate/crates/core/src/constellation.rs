//! Antenna-activation alphabets: SSK, GSSK, HSSK and the code partitions that
//! feed the energy-efficient design.
//!
//! A symbol is an `N_T`-long 0/1 vector; entry `j` set means transmit antenna
//! `j` is active. Symbols are printed left to right as `x_1 .. x_{N_T}`.
//!
//! Canonical order within a weight class is lexicographic on the set of active
//! positions counted from the *right* end of the vector, which reproduces the
//! row order of the classic GSSK/HSSK mapping tables (`00011, 00101, 01001,
//! 10001, 00110, ...`). Across classes, canonical order is ascending weight.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::bits::{format_bits, natural_binary, parse_bits};
use crate::error::{Error, Result};

/// Largest antenna count a [`BinarySymbol`] can hold.
pub const MAX_ANTENNAS: usize = 63;

/// Fixed-length antenna activation pattern.
///
/// Bit `p` of `mask` is the entry `p` places from the right end, i.e. `x_{N_T - p}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct BinarySymbol {
    mask: u64,
    len: u8,
    weight: u8,
}

impl BinarySymbol {
    /// Builds a symbol from its mask (bit `p` = entry `p` from the right).
    pub fn from_mask(mask: u64, len: usize) -> Result<Self> {
        if len == 0 || len > MAX_ANTENNAS {
            return Err(Error::InvalidAlphabet(format!(
                "antenna count {len} outside 1..={MAX_ANTENNAS}"
            )));
        }
        if mask >> len != 0 {
            return Err(Error::InvalidAlphabet(format!(
                "mask {mask:#x} does not fit in {len} antennas"
            )));
        }
        Ok(BinarySymbol {
            mask,
            len: len as u8,
            weight: mask.count_ones() as u8,
        })
    }

    /// Builds a symbol from entries `x_1 .. x_{N_T}`.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let len = bits.len();
        let mask = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0u64, |m, (j, _)| m | 1 << (len - 1 - j));
        Self::from_mask(mask, len)
    }

    /// The all-zero (idle) symbol.
    pub fn idle(len: usize) -> Result<Self> {
        Self::from_mask(0, len)
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Number of antennas `N_T`.
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of active antennas (the symbol power in units of `Es`).
    pub fn weight(&self) -> u32 {
        self.weight as u32
    }

    pub fn is_idle(&self) -> bool {
        self.mask == 0
    }

    /// Entry `x_{j+1}` (0-based antenna index `j`).
    pub fn is_active(&self, antenna: usize) -> bool {
        antenna < self.len() && self.mask >> (self.len() - 1 - antenna) & 1 == 1
    }

    /// Active antenna indices, 0-based from the left, ascending.
    pub fn active_antennas(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.is_active(j)).collect()
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len()).map(|j| self.is_active(j)).collect()
    }

    pub fn distance(&self, other: &BinarySymbol) -> u32 {
        (self.mask ^ other.mask).count_ones()
    }

    /// Canonical order: ascending weight, then lexicographic on active
    /// positions counted from the right.
    pub fn canonical_cmp(&self, other: &BinarySymbol) -> Ordering {
        self.weight.cmp(&other.weight).then_with(|| {
            let diff = self.mask ^ other.mask;
            if diff == 0 {
                Ordering::Equal
            } else if self.mask >> diff.trailing_zeros() & 1 == 1 {
                // Owning the lowest differing position sorts first.
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl fmt::Display for BinarySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_bits(&self.bits()))
    }
}

impl FromStr for BinarySymbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s
            .chars()
            .filter(|c| !matches!(c, '[' | ']' | ',' | ' ' | 'T' | '^'))
            .collect();
        BinarySymbol::from_bits(&parse_bits(&cleaned)?)
    }
}

/// Binomial coefficient, saturating at `u128::MAX`.
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

/// All `C(N_T, i)` symbols of weight `i`, in canonical order.
pub fn enumerate_weight_class(n_t: usize, weight: usize) -> Result<Vec<BinarySymbol>> {
    if n_t == 0 || n_t > MAX_ANTENNAS || weight > n_t {
        return Err(Error::InvalidAlphabet(format!("weight {weight} with {n_t} antennas")));
    }
    let mut out = Vec::with_capacity(binomial(n_t, weight).min(1 << 20) as usize);
    // Lexicographic k-combinations of right-counted positions.
    let mut positions: Vec<usize> = (0..weight).collect();
    loop {
        let mask = positions.iter().fold(0u64, |m, &p| m | 1 << p);
        out.push(BinarySymbol::from_mask(mask, n_t)?);
        let mut i = weight;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if positions[i] < n_t - weight + i {
                break;
            }
        }
        positions[i] += 1;
        for k in i + 1..weight {
            positions[k] = positions[k - 1] + 1;
        }
    }
}

/// Exhaustive pairwise minimum Hamming distance.
pub fn min_distance(symbols: &[BinarySymbol]) -> Result<u32> {
    if symbols.len() < 2 {
        return Err(Error::DegenerateAlphabet(format!(
            "{} symbol(s), need at least 2",
            symbols.len()
        )));
    }
    let mut best = u32::MAX;
    for (i, a) in symbols.iter().enumerate() {
        for b in &symbols[i + 1..] {
            best = best.min(a.distance(b));
        }
    }
    Ok(best)
}

/// The active-antenna count `n_t` for a GSSK alphabet of `2^m` symbols:
/// `C(N_T, n_t - 1) < 2^m <= C(N_T, n_t)` with `n_t <= N_T / 2`.
pub fn choose_gssk_nt(n_t: usize, m: u32) -> Result<usize> {
    if m == 0 || m >= 127 {
        return Err(Error::RateInfeasible(format!("rate {m} bits")));
    }
    let size = 1u128 << m;
    (1..=n_t / 2).find(|&k| size <= binomial(n_t, k)).ok_or_else(|| {
        Error::RateInfeasible(format!(
            "2^{m} exceeds C({n_t}, {}) = {}",
            n_t / 2,
            binomial(n_t, n_t / 2)
        ))
    })
}

/// Per-weight classes of a binary code with the all-zero word removed.
#[derive(Clone, Debug, PartialEq)]
pub struct CodePartition {
    n_t: usize,
    classes: BTreeMap<u32, Vec<BinarySymbol>>,
}

impl CodePartition {
    /// Groups `words` by weight. Rejects duplicates, mixed lengths and the
    /// all-zero word.
    pub fn from_symbols(n_t: usize, words: &[BinarySymbol]) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut classes: BTreeMap<u32, Vec<BinarySymbol>> = BTreeMap::new();
        for w in words {
            if w.len() != n_t {
                return Err(Error::InvalidCode(format!(
                    "codeword {w} has length {}, expected {n_t}",
                    w.len()
                )));
            }
            if w.is_idle() {
                return Err(Error::InvalidCode("all-zero word is reserved".into()));
            }
            if !seen.insert(w.mask()) {
                return Err(Error::InvalidCode(format!("duplicate codeword {w}")));
            }
            classes.entry(w.weight()).or_default().push(*w);
        }
        for class in classes.values_mut() {
            class.sort_by(|a, b| a.canonical_cmp(b));
        }
        Ok(CodePartition { n_t, classes })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Largest weight present (the RF chains the full code needs).
    pub fn max_weight(&self) -> u32 {
        self.classes.keys().next_back().copied().unwrap_or(0)
    }

    pub fn classes(&self) -> &BTreeMap<u32, Vec<BinarySymbol>> {
        &self.classes
    }

    pub fn class(&self, weight: u32) -> &[BinarySymbol] {
        self.classes.get(&weight).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn class_sizes(&self) -> BTreeMap<u32, u64> {
        self.classes.iter().map(|(&w, c)| (w, c.len() as u64)).collect()
    }

    pub fn len(&self) -> usize {
        self.classes.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Keeps only classes of weight `<= max_rf`.
    pub fn restrict(&self, max_rf: u32) -> CodePartition {
        CodePartition {
            n_t: self.n_t,
            classes: self.classes.range(..=max_rf).map(|(&w, c)| (w, c.clone())).collect(),
        }
    }

    /// All codewords in canonical order.
    pub fn symbols(&self) -> Vec<BinarySymbol> {
        self.classes.values().flatten().copied().collect()
    }

    pub fn min_distance(&self) -> Result<u32> {
        min_distance(&self.symbols())
    }
}

/// Code partition with minimum distance at least `d_min`.
///
/// With an external `generator` list the code is validated and returned with
/// the all-zero word dropped. Otherwise `d_min = 2` gives the full odd-weight
/// (parity-check) partition and `d_min >= 3` a greedy lexicode over canonical
/// order.
pub fn build_code_dmin(n_t: usize, d_min: u32, generator: Option<&[BinarySymbol]>) -> Result<CodePartition> {
    if d_min < 2 {
        return Err(Error::InvalidCode(format!("d_min {d_min} < 2")));
    }
    if n_t == 0 || n_t > MAX_ANTENNAS {
        return Err(Error::InvalidCode(format!("antenna count {n_t}")));
    }
    if let Some(words) = generator {
        let words: Vec<BinarySymbol> = words.iter().filter(|w| !w.is_idle()).copied().collect();
        let partition = CodePartition::from_symbols(n_t, &words)?;
        if partition.len() >= 2 {
            let d = partition.min_distance()?;
            if d < d_min {
                return Err(Error::InvalidCode(format!(
                    "external code has minimum distance {d} < {d_min}"
                )));
            }
        }
        return Ok(partition);
    }
    if n_t > 24 {
        return Err(Error::InvalidCode(format!(
            "code enumeration over 2^{n_t} words is not supported"
        )));
    }
    let words = if d_min == 2 {
        (1..=n_t)
            .step_by(2)
            .map(|w| enumerate_weight_class(n_t, w))
            .collect::<Result<Vec<_>>>()?
            .concat()
    } else {
        let mut kept: Vec<BinarySymbol> = Vec::new();
        for w in 1..=n_t {
            for cand in enumerate_weight_class(n_t, w)? {
                if kept.iter().all(|k| k.distance(&cand) >= d_min) {
                    kept.push(cand);
                }
            }
        }
        kept
    };
    CodePartition::from_symbols(n_t, &words)
}

/// Ordered symbol set with priors and an optional source-bit mapping.
#[derive(Clone, Debug, PartialEq)]
pub struct Alphabet {
    symbols: Vec<BinarySymbol>,
    priors: Vec<f64>,
    bitmap: Option<Vec<Vec<bool>>>,
    d_min: u32,
}

impl Alphabet {
    pub fn new(symbols: Vec<BinarySymbol>, priors: Vec<f64>, bitmap: Option<Vec<Vec<bool>>>) -> Result<Self> {
        if symbols.len() != priors.len() {
            return Err(Error::InvalidAlphabet(format!(
                "{} symbols but {} priors",
                symbols.len(),
                priors.len()
            )));
        }
        let d_min = min_distance(&symbols)?;
        let n_t = symbols[0].len();
        if let Some(s) = symbols.iter().find(|s| s.len() != n_t) {
            return Err(Error::InvalidAlphabet(format!("{s} is not {n_t} long")));
        }
        if d_min == 0 {
            return Err(Error::InvalidAlphabet("duplicate symbols".into()));
        }
        if symbols.iter().any(BinarySymbol::is_idle) {
            return Err(Error::InvalidAlphabet(
                "the all-zero symbol is reserved as the idle delimiter".into(),
            ));
        }
        if priors.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidAlphabet("prior outside [0, 1]".into()));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidAlphabet(format!("priors sum to {total}")));
        }
        if let Some(map) = &bitmap {
            if map.len() != symbols.len() {
                return Err(Error::InvalidAlphabet("bitmap size mismatch".into()));
            }
            if !is_prefix_free(map) {
                return Err(Error::InvalidAlphabet("bitmap is not prefix-free".into()));
            }
        }
        Ok(Alphabet {
            symbols,
            priors,
            bitmap,
            d_min,
        })
    }

    /// Equiprobable alphabet with a fixed-length natural-binary mapping in
    /// table order. `symbols.len()` must be a power of two.
    pub fn fixed_length(symbols: Vec<BinarySymbol>) -> Result<Self> {
        let n = symbols.len();
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::InvalidAlphabet(format!(
                "{n} symbols is not a power of two >= 2"
            )));
        }
        let width = n.trailing_zeros() as usize;
        let bitmap = (0..n).map(|k| natural_binary(k as u64, width)).collect();
        Alphabet::new(symbols, vec![1.0 / n as f64; n], Some(bitmap))
    }

    pub fn symbols(&self) -> &[BinarySymbol] {
        &self.symbols
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn bitmap(&self) -> Option<&[Vec<bool>]> {
        self.bitmap.as_deref()
    }

    pub fn d_min(&self) -> u32 {
        self.d_min
    }

    pub fn n_t(&self) -> usize {
        self.symbols[0].len()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `E[x^H x]` under the priors.
    pub fn avg_power(&self) -> f64 {
        self.symbols
            .iter()
            .zip(&self.priors)
            .map(|(s, p)| p * s.weight() as f64)
            .sum()
    }

    /// Text table with header `bits_string,weight,prior,codeword`.
    pub fn to_table(&self) -> String {
        let mut out = String::from("bits_string,weight,prior,codeword\n");
        for (k, (s, p)) in self.symbols.iter().zip(&self.priors).enumerate() {
            let bits = self
                .bitmap
                .as_ref()
                .map(|m| format_bits(&m[k]))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!("{bits},{},{p},{s}\n", s.weight()));
        }
        out
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("bits_string,weight,prior,codeword") => {}
            other => return Err(Error::Parse(format!("bad header {other:?}"))),
        }
        let mut symbols = Vec::new();
        let mut priors = Vec::new();
        let mut bitmap = Vec::new();
        let mut mapped = None;
        for line in lines {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("expected 4 columns: {line}")));
            }
            let symbol: BinarySymbol = cols[3].parse()?;
            let weight: u32 = cols[1]
                .parse()
                .map_err(|e| Error::Parse(format!("weight {:?}: {e}", cols[1])))?;
            if weight != symbol.weight() {
                return Err(Error::Parse(format!("weight column disagrees with {symbol}")));
            }
            let prior: f64 = cols[2]
                .parse()
                .map_err(|e| Error::Parse(format!("prior {:?}: {e}", cols[2])))?;
            let has_bits = cols[0] != "-";
            if *mapped.get_or_insert(has_bits) != has_bits {
                return Err(Error::Parse("bitmap present on some rows only".into()));
            }
            if has_bits {
                bitmap.push(parse_bits(cols[0])?);
            }
            symbols.push(symbol);
            priors.push(prior);
        }
        Alphabet::new(symbols, priors, mapped.unwrap_or(false).then_some(bitmap))
    }
}

/// True when no string is a prefix of another (duplicates included).
pub fn is_prefix_free(codes: &[Vec<bool>]) -> bool {
    let mut sorted: Vec<&Vec<bool>> = codes.iter().collect();
    sorted.sort();
    // Lexicographic sort puts any prefix directly before some extension of it.
    sorted.windows(2).all(|w| !w[1].starts_with(w[0]))
}

/// GSSK: the first `2^m` weight-`n_t` symbols in canonical order with a
/// fixed-length natural-binary mapping.
pub fn build_gssk(n_t: usize, m: u32) -> Result<Alphabet> {
    let active = choose_gssk_nt(n_t, m)?;
    let mut class = enumerate_weight_class(n_t, active)?;
    class.truncate(1 << m);
    Alphabet::fixed_length(class)
}

/// SSK: GSSK with a single active antenna.
pub fn build_ssk(n_t: usize, m: u32) -> Result<Alphabet> {
    if m == 0 || m >= 63 || (1u64 << m) > n_t as u64 {
        return Err(Error::RateInfeasible(format!("SSK needs 2^{m} <= {n_t} antennas")));
    }
    build_gssk(n_t, m)
}

/// HSSK over the first `2^m` codewords of `partition` (ascending weight,
/// canonical order within each class), equiprobable, fixed-length mapping.
pub fn build_hssk(partition: &CodePartition, m: u32) -> Result<Alphabet> {
    let size = if m == 0 || m >= 63 {
        return Err(Error::RateInfeasible(format!("rate {m} bits")));
    } else {
        1usize << m
    };
    let all = partition.symbols();
    if all.len() < size {
        return Err(Error::RateInfeasible(format!(
            "2^{m} symbols requested, code holds {}",
            all.len()
        )));
    }
    Alphabet::fixed_length(all[..size].to_vec())
}

/// HSSK with `d_min = 2`: odd-weight symbols filled by ascending weight.
pub fn build_hssk_dmin2(n_t: usize, m: u32) -> Result<Alphabet> {
    build_hssk(&build_code_dmin(n_t, 2, None)?, m)
}
