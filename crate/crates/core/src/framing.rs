//! Frame-based transmission: segmentation, residual-bit borrowing, idle
//! delimiting, length-based error detection and retransmission.

use std::fmt;
use std::str::FromStr;

use crate::bits::bit_errors;
use crate::constellation::BinarySymbol;
use crate::error::{Error, Result};
use crate::huffman::PrefixCodebook;

/// Default payload size of one frame in bits.
pub const DEFAULT_FRAME_BITS: usize = 100;

/// Frame size together with the prefix code used inside frames.
#[derive(Clone, Debug)]
pub struct FramePlan {
    frame_bits: usize,
    codebook: PrefixCodebook,
}

impl FramePlan {
    /// Requires `frame_bits >= L_max`.
    pub fn new(frame_bits: usize, codebook: PrefixCodebook) -> Result<Self> {
        if frame_bits == 0 || frame_bits < codebook.max_len() {
            return Err(Error::InvalidProblem(format!(
                "frame of {frame_bits} bits is shorter than the longest codeword ({})",
                codebook.max_len()
            )));
        }
        Ok(FramePlan { frame_bits, codebook })
    }

    pub fn frame_bits(&self) -> usize {
        self.frame_bits
    }

    pub fn codebook(&self) -> &PrefixCodebook {
        &self.codebook
    }

    pub fn max_len(&self) -> usize {
        self.codebook.max_len()
    }

    /// Recovered lengths outside `[F, F + L_max - 1]` are flagged.
    pub fn length_is_suspect(&self, recovered_bits: usize) -> bool {
        recovered_bits < self.frame_bits || recovered_bits > self.frame_bits + self.max_len() - 1
    }

    /// Index form of [`frame_to_symbols`].
    pub fn encode_frame(&self, frame: &[bool], next: Option<&[bool]>) -> Result<(Vec<usize>, usize)> {
        if frame.len() != self.frame_bits {
            return Err(Error::DimensionMismatch {
                expected: self.frame_bits,
                got: frame.len(),
            });
        }
        let (mut indices, consumed) = self.codebook.decode_indices(frame);
        if consumed == frame.len() {
            return Ok((indices, 0));
        }
        let fragment = &frame[consumed..];
        let next = next.unwrap_or(&[]);
        let take = next.len().min(self.max_len());
        let mut tail = Vec::with_capacity(fragment.len() + take);
        tail.extend_from_slice(fragment);
        tail.extend_from_slice(&next[..take]);
        let (extra, used) = self.codebook.decode_indices(&tail);
        match extra.first() {
            Some(&k) => {
                indices.push(k);
                let used_first = self.codebook.entries()[k].code.len();
                debug_assert!(used >= used_first);
                Ok((indices, used_first - fragment.len()))
            }
            None => Err(Error::ExhaustedInput { available: next.len() }),
        }
    }

    /// Index form of [`symbols_to_frame`].
    pub fn judge_indices(&self, detected: &[usize], truth: &[bool]) -> FrameVerdict {
        let mut recovered = Vec::with_capacity(self.frame_bits + self.max_len());
        self.codebook.encode_indices_into(detected, &mut recovered);
        self.verdict(&recovered, truth)
    }

    fn verdict(&self, recovered: &[bool], truth: &[bool]) -> FrameVerdict {
        let payload = &recovered[..recovered.len().min(self.frame_bits)];
        let errors = bit_errors(&truth[..truth.len().min(self.frame_bits)], payload);
        FrameVerdict {
            recovered_bits: recovered.len(),
            ed_flag: self.length_is_suspect(recovered.len()),
            bit_errors: errors,
            frame_error: errors > 0,
        }
    }
}

/// Receiver-side assessment of one frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameVerdict {
    /// Length of the re-encoded bit string before truncation.
    pub recovered_bits: usize,
    /// Length outside `[F, F + L_max - 1]`.
    pub ed_flag: bool,
    pub bit_errors: usize,
    pub frame_error: bool,
}

/// Prefix-decodes one frame into symbols, borrowing the fewest bits of
/// `next` that complete a trailing fragment. Returns the borrowed count.
pub fn frame_to_symbols(plan: &FramePlan, frame: &[bool], next: Option<&[bool]>) -> Result<(Vec<BinarySymbol>, usize)> {
    let (idx, borrowed) = plan.encode_frame(frame, next)?;
    let entries = plan.codebook().entries();
    Ok((idx.into_iter().map(|k| entries[k].symbol).collect(), borrowed))
}

/// Re-encodes detected symbols, keeps the first `F` bits as payload and
/// compares them with `truth`.
pub fn symbols_to_frame(plan: &FramePlan, detected: &[BinarySymbol], truth: &[bool]) -> Result<FrameVerdict> {
    let recovered = plan.codebook().symbols_to_bits(detected)?;
    Ok(plan.verdict(&recovered, truth))
}

/// Retransmission policy for flagged frames.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ArqMode {
    /// Single shot.
    #[default]
    Off,
    /// A flagged frame counts as delivered (ideal retransmission).
    Ideal,
    /// A flagged frame is sent once more and judged again.
    Real,
}

impl FromStr for ArqMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "off" | "none" => Ok(ArqMode::Off),
            "paper" | "ideal" => Ok(ArqMode::Ideal),
            "real" => Ok(ArqMode::Real),
            other => Err(Error::Parse(format!("unknown ARQ mode '{other}'"))),
        }
    }
}

impl fmt::Display for ArqMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArqMode::Off => "off",
            ArqMode::Ideal => "paper",
            ArqMode::Real => "real",
        })
    }
}

/// Outcome of a frame after the retransmission policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArqOutcome {
    pub verdict: FrameVerdict,
    pub transmissions: usize,
}

/// Applies `mode` to a frame. `send` performs one transmission and returns
/// its verdict; it is called a second time only in [`ArqMode::Real`].
pub fn run_arq<F>(mode: ArqMode, mut send: F) -> Result<ArqOutcome>
where
    F: FnMut() -> Result<FrameVerdict>,
{
    let first = send()?;
    if !first.ed_flag {
        return Ok(ArqOutcome {
            verdict: first,
            transmissions: 1,
        });
    }
    match mode {
        ArqMode::Off => Ok(ArqOutcome {
            verdict: first,
            transmissions: 1,
        }),
        ArqMode::Ideal => Ok(ArqOutcome {
            verdict: FrameVerdict {
                bit_errors: 0,
                frame_error: false,
                ..first
            },
            transmissions: 2,
        }),
        ArqMode::Real => Ok(ArqOutcome {
            verdict: send()?,
            transmissions: 2,
        }),
    }
}

/// Frames of a bit stream ready for transmission.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedFrame {
    /// Payload bits, zero-padded to `F` for the final frame.
    pub payload: Vec<bool>,
    pub indices: Vec<usize>,
    pub borrowed: usize,
}

/// Splits `bits` into frames of `F` bits. The final frame is zero-padded
/// to `F`, and a fragment at the very end is completed with zero bits.
pub fn encode_stream(plan: &FramePlan, bits: &[bool]) -> Result<Vec<EncodedFrame>> {
    let f = plan.frame_bits();
    let mut frames = Vec::with_capacity(bits.len().div_ceil(f));
    let pad = vec![false; plan.max_len()];
    for (k, chunk) in bits.chunks(f).enumerate() {
        let mut payload = chunk.to_vec();
        payload.resize(f, false);
        let rest = &bits[((k + 1) * f).min(bits.len())..];
        let next: Vec<bool> = rest.iter().chain(&pad).take(plan.max_len()).copied().collect();
        let (indices, borrowed) = plan.encode_frame(&payload, Some(&next))?;
        frames.push(EncodedFrame {
            payload,
            indices,
            borrowed,
        });
    }
    Ok(frames)
}

/// Concatenates the payloads recovered from per-frame detected symbols.
pub fn decode_stream(plan: &FramePlan, detected: &[Vec<usize>]) -> Vec<bool> {
    let f = plan.frame_bits();
    let mut out = Vec::with_capacity(detected.len() * f);
    let mut scratch = Vec::new();
    for frame in detected {
        scratch.clear();
        plan.codebook().encode_indices_into(frame, &mut scratch);
        out.extend_from_slice(&scratch[..scratch.len().min(f)]);
    }
    out
}

/// Joins frames with exactly one idle symbol between consecutive frames.
pub fn delimit(frames: &[Vec<BinarySymbol>]) -> Result<Vec<BinarySymbol>> {
    let n_t = match frames.iter().flatten().next() {
        Some(s) => s.len(),
        None => return Ok(Vec::new()),
    };
    let idle = BinarySymbol::idle(n_t)?;
    let mut out = Vec::new();
    for (k, f) in frames.iter().enumerate() {
        if k > 0 {
            out.push(idle);
        }
        out.extend_from_slice(f);
    }
    Ok(out)
}

/// Splits a symbol stream at idle symbols.
pub fn split_frames(stream: &[BinarySymbol]) -> Vec<Vec<BinarySymbol>> {
    if stream.is_empty() {
        return Vec::new();
    }
    stream.split(BinarySymbol::is_idle).map(<[_]>::to_vec).collect()
}
