//! Prefix-free bit mapping built from symbol priors.
//!
//! The transmitter runs the *decoder* direction (bits to symbols) and the
//! receiver the *encoder* direction (symbols to bits). Each symbol is sent
//! with probability `2^-len` when input bits are i.i.d. uniform, so those
//! achieved probabilities replace the design priors downstream.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use crate::bits::format_bits;
use crate::constellation::{is_prefix_free, Alphabet, BinarySymbol};
use crate::error::{Error, Result};

/// One symbol with its source-bit string.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeEntry {
    pub symbol: BinarySymbol,
    pub code: Vec<bool>,
    /// Design prior the code was built from.
    pub prior: f64,
}

impl CodeEntry {
    /// `2^-len`, the symbol frequency under uniform input bits.
    pub fn achieved_probability(&self) -> f64 {
        0.5f64.powi(self.code.len() as i32)
    }
}

#[derive(Clone, Copy, Debug)]
enum TrieNode {
    Branch([u32; 2]),
    Leaf(u32),
}

const NO_CHILD: u32 = u32::MAX;

/// Complete prefix code over an alphabet, with encode and decode tables.
#[derive(Clone, Debug)]
pub struct PrefixCodebook {
    entries: Vec<CodeEntry>,
    max_len: usize,
    index: HashMap<u64, usize>,
    trie: Vec<TrieNode>,
}

#[derive(PartialEq)]
struct HeapItem {
    prob: f64,
    first_symbol: usize,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prob
            .total_cmp(&other.prob)
            .then(self.first_symbol.cmp(&other.first_symbol))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Huffman code lengths. Merges take the smaller total first, ties going to
/// the subtree holding the earlier symbol.
pub fn huffman_lengths(priors: &[f64]) -> Vec<usize> {
    let n = priors.len();
    if n < 2 {
        return vec![0; n];
    }
    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut heap: BinaryHeap<Reverse<HeapItem>> = priors
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            Reverse(HeapItem {
                prob: p,
                first_symbol: k,
                node: k,
            })
        })
        .collect();
    let mut next = n;
    while heap.len() > 1 {
        let Reverse(a) = heap.pop().expect("len > 1");
        let Reverse(b) = heap.pop().expect("len > 1");
        parent[a.node] = next;
        parent[b.node] = next;
        heap.push(Reverse(HeapItem {
            prob: a.prob + b.prob,
            first_symbol: a.first_symbol.min(b.first_symbol),
            node: next,
        }));
        next += 1;
    }
    // Internal nodes are created after their children, so depths resolve top-down.
    let mut depth = vec![0usize; 2 * n - 1];
    for node in (0..2 * n - 2).rev() {
        depth[node] = depth[parent[node]] + 1;
    }
    depth.truncate(n);
    depth
}

/// Exact Kraft equality `sum 2^-len == 1` by carrying counts up the levels.
pub fn kraft_is_complete(lengths: &[usize]) -> bool {
    let Some(&max) = lengths.iter().max() else {
        return false;
    };
    if lengths.contains(&0) {
        return lengths.len() == 1;
    }
    let mut count = vec![0usize; max + 1];
    for &l in lengths {
        count[l] += 1;
    }
    for l in (1..=max).rev() {
        if count[l] % 2 == 1 {
            return false;
        }
        count[l - 1] += count[l] / 2;
    }
    count[0] == 1
}

/// Increments a big-endian bit string in place; false on overflow.
fn increment(code: &mut [bool]) -> bool {
    for bit in code.iter_mut().rev() {
        if *bit {
            *bit = false;
        } else {
            *bit = true;
            return true;
        }
    }
    false
}

impl PrefixCodebook {
    /// Huffman code for `symbols` with design `priors`.
    ///
    /// Symbols with zero prior are left out. Lengths are handed out in
    /// ascending order to symbols sorted by descending prior (ties by input
    /// order), and code strings are assigned canonically by `(length, input
    /// order)`. Pass symbols in canonical order for reproducible tables.
    pub fn build(symbols: &[BinarySymbol], priors: &[f64]) -> Result<Self> {
        if symbols.len() != priors.len() {
            return Err(Error::DegenerateInput(format!(
                "{} symbols but {} priors",
                symbols.len(),
                priors.len()
            )));
        }
        if priors.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::DegenerateInput("priors must be finite and >= 0".into()));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::DegenerateInput(format!("priors sum to {total}")));
        }
        let live: Vec<usize> = (0..symbols.len()).filter(|&k| priors[k] > 0.0).collect();
        if live.len() < 2 {
            return Err(Error::DegenerateInput(format!(
                "{} symbol(s) with positive prior, need at least 2",
                live.len()
            )));
        }
        let live_priors: Vec<f64> = live.iter().map(|&k| priors[k]).collect();
        let mut lengths = huffman_lengths(&live_priors);
        lengths.sort_unstable();
        let mut by_prior: Vec<usize> = (0..live.len()).collect();
        by_prior.sort_by(|&a, &b| live_priors[b].total_cmp(&live_priors[a]).then(a.cmp(&b)));
        let mut assigned = vec![0usize; live.len()];
        for (rank, &k) in by_prior.iter().enumerate() {
            assigned[k] = lengths[rank];
        }

        let mut order: Vec<usize> = (0..live.len()).collect();
        order.sort_by_key(|&k| (assigned[k], k));
        let mut codes: Vec<Vec<bool>> = vec![Vec::new(); live.len()];
        let mut code: Vec<bool> = Vec::new();
        for (pos, &k) in order.iter().enumerate() {
            if pos > 0 && !increment(&mut code) {
                return Err(Error::DegenerateInput("code space exhausted".into()));
            }
            code.resize(assigned[k], false);
            codes[k] = code.clone();
        }
        let entries = live
            .iter()
            .zip(codes)
            .map(|(&k, code)| CodeEntry {
                symbol: symbols[k],
                code,
                prior: priors[k],
            })
            .collect();
        Self::from_entries(entries)
    }

    /// Huffman code for an alphabet's symbols and priors.
    pub fn from_alphabet(alphabet: &Alphabet) -> Result<Self> {
        Self::build(alphabet.symbols(), alphabet.priors())
    }

    /// Wraps explicit `(symbol, code)` pairs; the code must be complete and prefix-free.
    pub fn from_entries(entries: Vec<CodeEntry>) -> Result<Self> {
        let codes: Vec<Vec<bool>> = entries.iter().map(|e| e.code.clone()).collect();
        if entries.len() < 2 || !is_prefix_free(&codes) {
            return Err(Error::DegenerateInput("code is not prefix-free".into()));
        }
        let lengths: Vec<usize> = codes.iter().map(Vec::len).collect();
        if !kraft_is_complete(&lengths) {
            return Err(Error::DegenerateInput("code is not complete".into()));
        }
        let mut index = HashMap::with_capacity(entries.len());
        for (k, e) in entries.iter().enumerate() {
            if index.insert(e.symbol.mask(), k).is_some() || e.symbol.is_idle() {
                return Err(Error::DegenerateInput(format!(
                    "symbol {} is duplicated or idle",
                    e.symbol
                )));
            }
        }
        let mut trie = vec![TrieNode::Branch([NO_CHILD; 2])];
        for (k, e) in entries.iter().enumerate() {
            let mut at = 0usize;
            for (depth, &bit) in e.code.iter().enumerate() {
                let child = match trie[at] {
                    TrieNode::Branch(ch) => ch[bit as usize],
                    TrieNode::Leaf(_) => unreachable!("prefix-free"),
                };
                let child = if child == NO_CHILD {
                    let fresh = trie.len() as u32;
                    trie.push(if depth + 1 == e.code.len() {
                        TrieNode::Leaf(k as u32)
                    } else {
                        TrieNode::Branch([NO_CHILD; 2])
                    });
                    if let TrieNode::Branch(ch) = &mut trie[at] {
                        ch[bit as usize] = fresh;
                    }
                    fresh
                } else {
                    child
                };
                at = child as usize;
            }
        }
        let max_len = lengths.into_iter().max().unwrap_or(0);
        Ok(PrefixCodebook {
            entries,
            max_len,
            index,
            trie,
        })
    }

    pub fn entries(&self) -> &[CodeEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Longest code string `L_max`.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn n_t(&self) -> usize {
        self.entries[0].symbol.len()
    }

    pub fn symbols(&self) -> Vec<BinarySymbol> {
        self.entries.iter().map(|e| e.symbol).collect()
    }

    /// `2^-len` per entry, in entry order.
    pub fn achieved_priors(&self) -> Vec<f64> {
        self.entries.iter().map(CodeEntry::achieved_probability).collect()
    }

    pub fn index_of(&self, symbol: &BinarySymbol) -> Option<usize> {
        self.index.get(&symbol.mask()).copied()
    }

    /// Bits per symbol and average power under uniform input bits.
    pub fn achieved_stats(&self) -> (f64, f64) {
        self.entries.iter().fold((0.0, 0.0), |(r, p), e| {
            let q = e.achieved_probability();
            (r + q * e.code.len() as f64, p + q * e.symbol.weight() as f64)
        })
    }

    /// Greedy prefix decode into entry indices. Stops before a trailing
    /// fragment and returns the number of bits consumed.
    pub fn decode_indices(&self, bits: &[bool]) -> (Vec<usize>, usize) {
        let mut out = Vec::new();
        let mut consumed = 0;
        let mut at = 0usize;
        for (k, &bit) in bits.iter().enumerate() {
            let TrieNode::Branch(ch) = self.trie[at] else {
                unreachable!("cursor rests on branches")
            };
            at = ch[bit as usize] as usize;
            if let TrieNode::Leaf(sym) = self.trie[at] {
                out.push(sym as usize);
                consumed = k + 1;
                at = 0;
            }
        }
        (out, consumed)
    }

    /// Transmitter direction: bit stream to symbols, plus bits consumed.
    pub fn bits_to_symbols(&self, bits: &[bool]) -> (Vec<BinarySymbol>, usize) {
        let (idx, consumed) = self.decode_indices(bits);
        (idx.into_iter().map(|k| self.entries[k].symbol).collect(), consumed)
    }

    /// Appends the code strings of `indices` to `out`.
    pub fn encode_indices_into(&self, indices: &[usize], out: &mut Vec<bool>) {
        for &k in indices {
            out.extend_from_slice(&self.entries[k].code);
        }
    }

    /// Receiver direction: symbols to the concatenated bit stream.
    pub fn symbols_to_bits(&self, symbols: &[BinarySymbol]) -> Result<Vec<bool>> {
        let mut out = Vec::new();
        for s in symbols {
            let k = self.index_of(s).ok_or_else(|| Error::UnknownSymbol(s.to_string()))?;
            out.extend_from_slice(&self.entries[k].code);
        }
        Ok(out)
    }

    /// Table layout: `source_bits,symbol` rows in code order.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<&CodeEntry> = self.entries.iter().collect();
        rows.sort_by(|a, b| (a.code.len(), &a.code).cmp(&(b.code.len(), &b.code)));
        let mut out = String::from("source_bits,symbol,weight,prior,achieved\n");
        for e in rows {
            out.push_str(&format!(
                "{},{},{},{:.6},{}\n",
                format_bits(&e.code),
                e.symbol,
                e.symbol.weight(),
                e.prior,
                e.achieved_probability()
            ));
        }
        out
    }

    /// Alphabet view with achieved priors and the code as bitmap.
    pub fn to_alphabet(&self) -> Result<Alphabet> {
        Alphabet::new(
            self.symbols(),
            self.achieved_priors(),
            Some(self.entries.iter().map(|e| e.code.clone()).collect()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::enumerate_weight_class;

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    #[test]
    fn two_symbols_get_one_bit_each() {
        let syms = enumerate_weight_class(3, 1).unwrap();
        let cb = PrefixCodebook::build(&syms[..2], &uniform(2)).unwrap();
        assert_eq!(cb.entries()[0].code, vec![false]);
        assert_eq!(cb.entries()[1].code, vec![true]);
        assert_eq!(cb.achieved_stats(), (1.0, 1.0));
    }

    #[test]
    fn uniform_dyadic_input_is_fixed_length() {
        let syms = enumerate_weight_class(6, 3).unwrap();
        let cb = PrefixCodebook::build(&syms[..16], &uniform(16)).unwrap();
        assert!(cb.entries().iter().all(|e| e.code.len() == 4));
        for (k, e) in cb.entries().iter().enumerate() {
            assert_eq!(e.code, crate::bits::natural_binary(k as u64, 4));
        }
    }

    #[test]
    fn degenerate_inputs() {
        let syms = enumerate_weight_class(3, 1).unwrap();
        assert!(PrefixCodebook::build(&syms[..1], &[1.0]).is_err());
        assert!(PrefixCodebook::build(&syms[..2], &[1.0, 0.0]).is_err());
        assert!(PrefixCodebook::build(&syms[..2], &[0.7, 0.7]).is_err());
    }

    #[test]
    fn kraft_counting() {
        assert!(kraft_is_complete(&[1, 2, 2]));
        assert!(!kraft_is_complete(&[1, 2]));
        assert!(!kraft_is_complete(&[1, 1, 2]));
        assert!(kraft_is_complete(&[2, 2, 3, 3, 3, 6, 6, 6, 6, 6, 6, 7, 7, 7, 7]));
    }

    #[test]
    fn decode_stops_before_fragment() {
        let syms = enumerate_weight_class(3, 1).unwrap();
        let cb = PrefixCodebook::build(&syms, &[0.5, 0.25, 0.25]).unwrap();
        let (out, used) = cb.bits_to_symbols(&[true, false, true]);
        assert_eq!(out, vec![syms[1]]);
        assert_eq!(used, 2);
        assert_eq!(cb.bits_to_symbols(&[]), (vec![], 0));
        assert!(cb.symbols_to_bits(&[]).unwrap().is_empty());
        let stranger: BinarySymbol = "110".parse().unwrap();
        assert!(matches!(cb.symbols_to_bits(&[stranger]), Err(Error::UnknownSymbol(_))));
    }

    #[test]
    fn long_codes_for_tiny_priors() {
        // Geometric priors force an 83-deep tree.
        let syms = enumerate_weight_class(9, 3).unwrap();
        let mut priors: Vec<f64> = (1..=83).map(|k| 0.5f64.powi(k)).collect();
        let last = *priors.last().unwrap();
        priors.push(last);
        let cb = PrefixCodebook::build(&syms[..84], &priors).unwrap();
        assert_eq!(cb.max_len(), 83);
        let (rate, _) = cb.achieved_stats();
        assert!((rate - 2.0).abs() < 1e-12);
    }
}
