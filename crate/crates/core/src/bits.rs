//! Bit-string helpers shared by the mapper, framing and table I/O.

use crate::error::{Error, Result};

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Parse(format!("not a bit: {other:?} in {s:?}"))),
        })
        .collect()
}

/// `value` as a `width`-bit big-endian string.
pub fn natural_binary(value: u64, width: usize) -> Vec<bool> {
    (0..width).rev().map(|k| value >> k & 1 == 1).collect()
}

/// Bit-by-bit comparison over the first `len` positions of `truth`; positions
/// missing from `got` count as errors.
pub fn bit_errors(truth: &[bool], got: &[bool]) -> usize {
    truth.iter().enumerate().filter(|&(k, b)| got.get(k) != Some(b)).count()
}
