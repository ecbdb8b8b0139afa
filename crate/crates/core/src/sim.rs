//! Seeded Monte Carlo link simulation, power-versus-rate sweeps and the
//! QAM comparison baseline.
//!
//! Every random quantity of frame `k` comes from a ChaCha stream keyed by
//! `(seed, purpose)` with stream id `k`, so results do not depend on the
//! thread count. Bits, channels and noise are shared across the Eb/N0 grid
//! (common random numbers), which keeps curves from different points and
//! schemes directly comparable.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constellation::{build_code_dmin, build_gssk, build_hssk, build_ssk, Alphabet, BinarySymbol, CodePartition};
use crate::design::{optimal_power_at, optimum_locus, solve, tilt_grid, DesignProblem, DesignSolution};
use crate::error::{Error, Result};
use crate::framing::{ArqMode, FramePlan, FrameVerdict, DEFAULT_FRAME_BITS};
use crate::huffman::{CodeEntry, PrefixCodebook};
use crate::link::{complex_gaussian, n0_for_ebn0_db, Channel, DetectorMetric, LinkConfig, MapDetector};
use crate::qam::{label_of, QamConstellation};

/// Frames simulated between two checks of the stop rule.
pub const BATCH_FRAMES: u64 = 200;
/// Default minimum number of frame errors per grid point.
pub const DEFAULT_MIN_FRAME_ERRORS: u64 = 300;
/// Default cap on frames per grid point.
pub const DEFAULT_MAX_FRAMES: u64 = 200_000;
/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Modulation scheme under test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Ssk,
    Gssk,
    Hssk,
    EeHssk,
    QamBaseline,
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "ssk" => Ok(Scheme::Ssk),
            "gssk" => Ok(Scheme::Gssk),
            "hssk" => Ok(Scheme::Hssk),
            "ee-hssk" | "eehssk" => Ok(Scheme::EeHssk),
            "qam" | "qam-baseline" => Ok(Scheme::QamBaseline),
            other => Err(Error::Parse(format!("unknown scheme '{other}'"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Ssk => "ssk",
            Scheme::Gssk => "gssk",
            Scheme::Hssk => "hssk",
            Scheme::EeHssk => "ee-hssk",
            Scheme::QamBaseline => "qam-baseline",
        })
    }
}

/// When the channel matrix is redrawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FadingMode {
    #[default]
    PerSymbol,
    PerFrame,
}

impl FromStr for FadingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "per-symbol" | "symbol" => Ok(FadingMode::PerSymbol),
            "per-frame" | "frame" | "block" => Ok(FadingMode::PerFrame),
            other => Err(Error::Parse(format!("unknown fading mode '{other}'"))),
        }
    }
}

impl fmt::Display for FadingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FadingMode::PerSymbol => "per-symbol",
            FadingMode::PerFrame => "per-frame",
        })
    }
}

/// Stop after `min_frame_errors` single-shot frame errors or `max_frames` frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StopRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_frame_errors: DEFAULT_MIN_FRAME_ERRORS,
            max_frames: DEFAULT_MAX_FRAMES,
        }
    }
}

/// Full description of a link simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct SimSpec {
    pub scheme: Scheme,
    pub n_t: usize,
    pub n_r: usize,
    /// Target rate in bits per channel use; integral except for EE-HSSK.
    pub rate: f64,
    pub d_min: u32,
    /// RF-chain limit; `None` means `N_T`.
    pub max_rf: Option<u32>,
    pub ebn0_grid: Vec<f64>,
    pub frame_bits: usize,
    pub stop: StopRule,
    pub seed: u64,
    pub arq: ArqMode,
    pub fading: FadingMode,
    pub metric: DetectorMetric,
}

impl SimSpec {
    pub fn new(scheme: Scheme, n_t: usize, n_r: usize, rate: f64) -> Self {
        SimSpec {
            scheme,
            n_t,
            n_r,
            rate,
            d_min: 2,
            max_rf: None,
            ebn0_grid: vec![0.0],
            frame_bits: DEFAULT_FRAME_BITS,
            stop: StopRule::default(),
            seed: 1,
            arq: ArqMode::Off,
            fading: FadingMode::PerSymbol,
            metric: DetectorMetric::Scaled,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ebn0_grid.is_empty() || self.ebn0_grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("Eb/N0 grid must be nonempty and finite".into()));
        }
        if self.stop.min_frame_errors == 0 || self.stop.max_frames == 0 {
            return Err(Error::Config("stop rule values must be positive".into()));
        }
        if self.n_t == 0 || self.n_r == 0 || self.frame_bits == 0 {
            return Err(Error::Config("antenna counts and frame size must be positive".into()));
        }
        if !(self.rate > 0.0) {
            return Err(Error::Config(format!("rate {} must be positive", self.rate)));
        }
        Ok(())
    }

    pub fn max_rf_or_default(&self) -> u32 {
        self.max_rf.unwrap_or(self.n_t as u32)
    }

    fn integral_rate(&self) -> Result<u32> {
        let m = self.rate.round();
        if (self.rate - m).abs() > 1e-9 || m < 1.0 {
            return Err(Error::RateInfeasible(format!(
                "{} needs an integral rate, got {}",
                self.scheme, self.rate
            )));
        }
        Ok(m as u32)
    }
}

/// Class structure of the `d_min` code restricted to `max_rf` active antennas.
pub fn code_partition(n_t: usize, d_min: u32, max_rf: u32) -> Result<CodePartition> {
    let p = build_code_dmin(n_t, d_min, None)?.restrict(max_rf);
    if p.is_empty() {
        return Err(Error::RateInfeasible(format!(
            "no codeword has at most {max_rf} active antennas"
        )));
    }
    Ok(p)
}

/// Optimized priors for a target rate and their Huffman realization.
pub fn ee_hssk_codebook(n_t: usize, d_min: u32, max_rf: u32, rate: f64) -> Result<(DesignSolution, PrefixCodebook)> {
    let partition = code_partition(n_t, d_min, max_rf)?;
    let problem = DesignProblem::from_partition(&partition, max_rf, rate)?;
    let solution = solve(&problem)?;
    let (symbols, priors): (Vec<BinarySymbol>, Vec<f64>) = solution.symbol_priors(&partition).into_iter().unzip();
    let book = PrefixCodebook::build(&symbols, &priors)?;
    Ok((solution, book))
}

fn fixed_codebook(alphabet: &Alphabet) -> Result<PrefixCodebook> {
    let bitmap = alphabet
        .bitmap()
        .ok_or_else(|| Error::InvalidAlphabet("fixed-length alphabet without a bit map".into()))?;
    let entries = alphabet
        .symbols()
        .iter()
        .zip(bitmap)
        .zip(alphabet.priors())
        .map(|((s, c), &p)| CodeEntry {
            symbol: *s,
            code: c.clone(),
            prior: p,
        })
        .collect();
    PrefixCodebook::from_entries(entries)
}

/// Prefix codebook transmitted by an SSK-family scheme.
pub fn scheme_codebook(spec: &SimSpec) -> Result<PrefixCodebook> {
    let max_rf = spec.max_rf_or_default();
    match spec.scheme {
        Scheme::Ssk => fixed_codebook(&build_ssk(spec.n_t, spec.integral_rate()?)?),
        Scheme::Gssk => fixed_codebook(&build_gssk(spec.n_t, spec.integral_rate()?)?),
        Scheme::Hssk => {
            let partition = code_partition(spec.n_t, spec.d_min, max_rf)?;
            fixed_codebook(&build_hssk(&partition, spec.integral_rate()?)?)
        }
        Scheme::EeHssk => Ok(ee_hssk_codebook(spec.n_t, spec.d_min, max_rf, spec.rate)?.1),
        Scheme::QamBaseline => Err(Error::Unsupported("QAM has no activation codebook".into())),
    }
}

/// Counts for one Eb/N0 point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointStats {
    pub ebn0_db: f64,
    pub n0: f64,
    pub symbols: u64,
    pub symbol_errors: u64,
    pub frames: u64,
    /// Frame errors after the configured retransmission policy.
    pub frame_errors: u64,
    /// Frame errors without retransmission.
    pub frame_errors_single_shot: u64,
    /// Frame errors when flagged frames count as delivered.
    pub frame_errors_ideal_arq: u64,
    pub flagged_frames: u64,
    /// Frames in error that the length check did not flag.
    pub undetected_frame_errors: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub transmissions: u64,
    /// The stop rule reached its error target before the frame cap.
    pub reliable: bool,
}

fn half_width(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    Z95 * (p * (1.0 - p) / n as f64).sqrt()
}

impl PointStats {
    pub fn ser(&self) -> f64 {
        ratio(self.symbol_errors, self.symbols)
    }

    pub fn fer(&self) -> f64 {
        ratio(self.frame_errors, self.frames)
    }

    pub fn fer_single_shot(&self) -> f64 {
        ratio(self.frame_errors_single_shot, self.frames)
    }

    pub fn fer_ideal_arq(&self) -> f64 {
        ratio(self.frame_errors_ideal_arq, self.frames)
    }

    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.bits)
    }

    /// 95% half-width of the SER estimate (binomial normal approximation).
    pub fn ser_ci(&self) -> f64 {
        half_width(self.ser(), self.symbols)
    }

    pub fn fer_ci(&self) -> f64 {
        half_width(self.fer(), self.frames)
    }

    fn absorb(&mut self, t: &FrameTally) {
        self.symbols += t.symbols;
        self.symbol_errors += t.symbol_errors;
        self.frames += 1;
        self.frame_errors += t.frame_error as u64;
        self.frame_errors_single_shot += t.single_shot_error as u64;
        self.frame_errors_ideal_arq += t.ideal_arq_error as u64;
        self.flagged_frames += t.flagged as u64;
        self.undetected_frame_errors += (t.single_shot_error && !t.flagged) as u64;
        self.bits += t.bits;
        self.bit_errors += t.bit_errors;
        self.transmissions += t.transmissions;
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Outcome of [`run_link_sim`] or [`qam_baseline`].
#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub spec: SimSpec,
    /// Achieved bits per channel use.
    pub rate: f64,
    /// Achieved average symbol power in units of `Es`.
    pub avg_power: f64,
    pub points: Vec<PointStats>,
}

impl SimResult {
    pub fn all_reliable(&self) -> bool {
        self.points.iter().all(|p| p.reliable)
    }

    /// CSV with header `ebn0_db,ser,ser_ci,fer,fer_ci,symbols,frames`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ebn0_db,ser,ser_ci,fer,fer_ci,symbols,frames\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{:.6e},{:.3e},{:.6e},{:.3e},{},{}\n",
                p.ebn0_db,
                p.ser(),
                p.ser_ci(),
                p.fer(),
                p.fer_ci(),
                p.symbols,
                p.frames
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct FrameTally {
    symbols: u64,
    symbol_errors: u64,
    bits: u64,
    bit_errors: u64,
    frame_error: bool,
    single_shot_error: bool,
    ideal_arq_error: bool,
    flagged: bool,
    transmissions: u64,
}

#[derive(Clone, Copy)]
enum Purpose {
    Bits = 0,
    Link = 1,
    Retransmission = 2,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn frame_rng(seed: u64, purpose: Purpose, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(purpose as u64)));
    rng.set_stream(frame);
    rng
}

/// Source bits of frame `frame`: `len` bits from its own stream.
fn source_bits(seed: u64, frame: u64, len: usize) -> Vec<bool> {
    let mut rng = frame_rng(seed, Purpose::Bits, frame);
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let w: u64 = rng.random();
        out.extend((0..64).map(|b| w >> (63 - b) & 1 == 1).take(len - out.len()));
    }
    out
}

/// Runs frames in fixed batches until the stop rule fires.
fn run_point<F>(stop: &StopRule, frame: F) -> Result<PointStats>
where
    F: Fn(u64) -> Result<FrameTally> + Sync,
{
    let mut stats = PointStats::default();
    let mut next = 0u64;
    while next < stop.max_frames && stats.frame_errors_single_shot < stop.min_frame_errors {
        let end = (next + BATCH_FRAMES).min(stop.max_frames);
        let tallies: Vec<FrameTally> = (next..end).into_par_iter().map(&frame).collect::<Result<_>>()?;
        for t in &tallies {
            stats.absorb(t);
        }
        next = end;
    }
    stats.reliable = stats.frame_errors_single_shot >= stop.min_frame_errors;
    Ok(stats)
}

struct SskLink<'a> {
    spec: &'a SimSpec,
    plan: &'a FramePlan,
    symbols: Vec<BinarySymbol>,
    priors: Vec<f64>,
}

impl SskLink<'_> {
    /// Sends `tx` once and returns the detected indices.
    fn send(&self, config: &LinkConfig, tx: &[usize], rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(tx.len());
        let mut y = vec![Complex64::new(0.0, 0.0); config.n_r];
        let mut detector: Option<(Channel, MapDetector)> = None;
        for &k in tx {
            if detector.is_none() || self.spec.fading == FadingMode::PerSymbol {
                let h = Channel::draw(config, rng);
                let det = MapDetector::new(config, &h, &self.symbols, &self.priors, self.spec.metric)?;
                detector = Some((h, det));
            }
            let (h, det) = detector.as_ref().expect("drawn above");
            h.signal_into(&self.symbols[k], config.es, &mut y);
            for v in &mut y {
                *v += complex_gaussian(rng, config.n0 / 2.0);
            }
            out.push(det.detect(&y));
        }
        Ok(out)
    }

    fn frame(&self, config: &LinkConfig, k: u64) -> Result<FrameTally> {
        let f = self.plan.frame_bits();
        let truth = source_bits(self.spec.seed, k, f);
        let next = source_bits(self.spec.seed, k + 1, self.plan.max_len());
        let (tx, _) = self.plan.encode_frame(&truth, Some(&next))?;
        let mut rng = frame_rng(self.spec.seed, Purpose::Link, k);
        let first_rx = self.send(config, &tx, &mut rng)?;
        let first = self.plan.judge_indices(&first_rx, &truth);
        let symbol_errors = tx.iter().zip(&first_rx).filter(|(a, b)| a != b).count() as u64;
        let mut tally = FrameTally {
            symbols: tx.len() as u64,
            symbol_errors,
            bits: f as u64,
            bit_errors: first.bit_errors as u64,
            single_shot_error: first.frame_error,
            ideal_arq_error: first.frame_error && !first.ed_flag,
            flagged: first.ed_flag,
            transmissions: 1,
            frame_error: false,
        };
        let mut calls = 0;
        let outcome = crate::framing::run_arq(self.spec.arq, || -> Result<FrameVerdict> {
            calls += 1;
            if calls == 1 {
                return Ok(first);
            }
            let mut rng = frame_rng(self.spec.seed, Purpose::Retransmission, k);
            let rx = self.send(config, &tx, &mut rng)?;
            Ok(self.plan.judge_indices(&rx, &truth))
        })?;
        tally.frame_error = outcome.verdict.frame_error;
        tally.transmissions = outcome.transmissions as u64;
        Ok(tally)
    }
}

/// Simulates an SSK-family link (or the QAM baseline) over the Eb/N0 grid.
pub fn run_link_sim(spec: &SimSpec) -> Result<SimResult> {
    spec.validate()?;
    if spec.scheme == Scheme::QamBaseline {
        return qam_baseline(spec);
    }
    let book = scheme_codebook(spec)?;
    let (rate, avg_power) = book.achieved_stats();
    let plan = FramePlan::new(spec.frame_bits, book)?;
    let link = SskLink {
        spec,
        symbols: plan.codebook().symbols(),
        priors: plan.codebook().achieved_priors(),
        plan: &plan,
    };
    let mut points = Vec::with_capacity(spec.ebn0_grid.len());
    for &db in &spec.ebn0_grid {
        let n0 = n0_for_ebn0_db(1.0, avg_power, rate, db)?;
        let config = LinkConfig::new(spec.n_t, spec.n_r, 1.0, n0)?;
        let mut stats = run_point(&spec.stop, |k| link.frame(&config, k))?;
        stats.ebn0_db = db;
        stats.n0 = n0;
        points.push(stats);
    }
    Ok(SimResult {
        spec: spec.clone(),
        rate,
        avg_power,
        points,
    })
}

struct QamLink {
    n_t: usize,
    n_r: usize,
    bits_per_stream: usize,
    constellation: QamConstellation,
}

impl QamLink {
    fn new(spec: &SimSpec) -> Result<Self> {
        let m = spec.integral_rate()? as usize;
        if !m.is_multiple_of(spec.n_t) {
            return Err(Error::Unsupported(format!(
                "{m} bits cannot be split evenly over {} streams",
                spec.n_t
            )));
        }
        let bits_per_stream = m / spec.n_t;
        let combos = 1u64.checked_shl((m) as u32).unwrap_or(u64::MAX);
        if combos > 1 << 12 {
            return Err(Error::Unsupported(format!("joint detection over 2^{m} hypotheses")));
        }
        Ok(QamLink {
            n_t: spec.n_t,
            n_r: spec.n_r,
            bits_per_stream,
            constellation: QamConstellation::new(1 << bits_per_stream)?,
        })
    }

    fn bits_per_use(&self) -> usize {
        self.bits_per_stream * self.n_t
    }

    /// Transmit vector for a joint label (stream 0 in the high bits).
    fn vector(&self, label: usize) -> Vec<Complex64> {
        (0..self.n_t)
            .map(|s| {
                let shift = (self.n_t - 1 - s) * self.bits_per_stream;
                self.constellation
                    .point(label >> shift & ((1 << self.bits_per_stream) - 1))
            })
            .collect()
    }

    fn centers(&self, h: &Channel) -> Vec<Complex64> {
        let hyps = 1usize << self.bits_per_use();
        let mut out = vec![Complex64::new(0.0, 0.0); hyps * self.n_r];
        for (label, c) in out.chunks_exact_mut(self.n_r).enumerate() {
            for (t, s) in self.vector(label).into_iter().enumerate() {
                for (o, hv) in c.iter_mut().zip(h.column(t)) {
                    *o += hv * s;
                }
            }
        }
        out
    }

    fn frame(&self, spec: &SimSpec, config: &LinkConfig, k: u64) -> Result<FrameTally> {
        let f = spec.frame_bits;
        let b = self.bits_per_use();
        let uses = f.div_ceil(b);
        // Filler after the frame payload comes from the same stream and is ignored.
        let bits = source_bits(spec.seed, k, uses * b);
        let mut rng = frame_rng(spec.seed, Purpose::Link, k);
        let mut centers = Vec::new();
        let mut y = vec![Complex64::new(0.0, 0.0); self.n_r];
        let mut tally = FrameTally {
            bits: f as u64,
            transmissions: 1,
            ..Default::default()
        };
        for (u, chunk) in bits.chunks(b).enumerate() {
            if u == 0 || spec.fading == FadingMode::PerSymbol {
                let h = Channel::draw(config, &mut rng);
                centers = self.centers(&h);
            }
            let label = label_of(chunk);
            y.copy_from_slice(&centers[label * self.n_r..(label + 1) * self.n_r]);
            for v in &mut y {
                *v += complex_gaussian(&mut rng, config.n0 / 2.0);
            }
            let mut best = (f64::INFINITY, 0);
            for (cand, c) in centers.chunks_exact(self.n_r).enumerate() {
                let d: f64 = y.iter().zip(c).map(|(a, b)| (a - b).norm_sqr()).sum();
                if d < best.0 {
                    best = (d, cand);
                }
            }
            tally.symbols += 1;
            if best.1 != label {
                tally.symbol_errors += 1;
                for bit in 0..b {
                    let pos = u * b + bit;
                    let differs = (best.1 ^ label) >> (b - 1 - bit) & 1 == 1;
                    if pos < f && differs {
                        tally.bit_errors += 1;
                    }
                }
            }
        }
        tally.frame_error = tally.bit_errors > 0;
        tally.single_shot_error = tally.frame_error;
        tally.ideal_arq_error = tally.frame_error;
        Ok(tally)
    }
}

/// Gray-mapped QAM with independent streams per transmit antenna and joint
/// ML detection, over the same channel and stop rule.
pub fn qam_baseline(spec: &SimSpec) -> Result<SimResult> {
    spec.validate()?;
    let link = QamLink::new(spec)?;
    let rate = link.bits_per_use() as f64;
    let avg_power = spec.n_t as f64 * link.constellation.avg_energy();
    let mut points = Vec::with_capacity(spec.ebn0_grid.len());
    for &db in &spec.ebn0_grid {
        let n0 = n0_for_ebn0_db(1.0, avg_power, rate, db)?;
        let config = LinkConfig::new(spec.n_t, spec.n_r, 1.0, n0)?;
        let mut stats = run_point(&spec.stop, |k| link.frame(spec, &config, k))?;
        stats.ebn0_db = db;
        stats.n0 = n0;
        points.push(stats);
    }
    Ok(SimResult {
        spec: spec.clone(),
        rate,
        avg_power,
        points,
    })
}

/// One row of a power-versus-rate sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    /// Scheme label, e.g. `ee-hssk-m3` or `optimum-m10`.
    pub scheme: String,
    pub target_rate: f64,
    pub rate_bits: f64,
    pub avg_power: f64,
    /// Optimum power at `rate_bits` for the row's class structure.
    pub theoretical_power: Option<f64>,
}

/// Settings of [`run_power_rate_sweep`].
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub n_t: usize,
    pub d_min: u32,
    /// RF-chain limits for the EE-HSSK and optimum curves.
    pub max_rf: Vec<u32>,
    pub rates: Vec<f64>,
    pub schemes: Vec<Scheme>,
    /// Tilt samples per optimum curve.
    pub locus_points: usize,
}

/// Rows plus notes on skipped infeasible points.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub notes: Vec<String>,
}

impl Sweep {
    /// CSV with header `scheme,rate_bits,avg_power,theoretical_power`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scheme,rate_bits,avg_power,theoretical_power\n");
        for r in &self.rows {
            let theory = r.theoretical_power.map(|v| format!("{v:.9}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{:.9},{:.9},{}\n",
                r.scheme, r.rate_bits, r.avg_power, theory
            ));
        }
        out
    }

    pub fn rows_for<'a>(&'a self, scheme: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }
}

fn theory_at(problem: &DesignProblem, rate: f64) -> Option<f64> {
    optimal_power_at(problem, rate).ok()
}

/// Achieved `(rate, power)` of each scheme on the rate grid, with the
/// optimum curve of the same class structure.
pub fn run_power_rate_sweep(spec: &SweepSpec) -> Result<Sweep> {
    let mut sweep = Sweep::default();
    let full_rf = spec.n_t as u32;
    let full = DesignProblem::from_partition(&code_partition(spec.n_t, spec.d_min, full_rf)?, full_rf, 0.0)?;
    for &m in &spec.max_rf {
        let partition = match code_partition(spec.n_t, spec.d_min, m) {
            Ok(p) => p,
            Err(e) => {
                sweep.notes.push(format!("max-rf {m}: {e}"));
                continue;
            }
        };
        let problem = DesignProblem::from_partition(&partition, m, 0.0)?;
        for p in optimum_locus(&problem, &tilt_grid(spec.locus_points.max(1)))? {
            sweep.rows.push(SweepRow {
                scheme: format!("optimum-m{m}"),
                target_rate: p.rate,
                rate_bits: p.rate,
                avg_power: p.avg_power,
                theoretical_power: Some(p.avg_power),
            });
        }
    }
    for &scheme in &spec.schemes {
        for &rate in &spec.rates {
            let limits: Vec<Option<u32>> = match scheme {
                Scheme::EeHssk => spec.max_rf.iter().map(|&m| Some(m)).collect(),
                _ => vec![None],
            };
            for limit in limits {
                let mut sim = SimSpec::new(scheme, spec.n_t, 1, rate);
                sim.d_min = spec.d_min;
                sim.max_rf = limit;
                let label = match limit {
                    Some(m) => format!("{scheme}-m{m}"),
                    None => scheme.to_string(),
                };
                let built = if scheme == Scheme::QamBaseline {
                    Err(Error::Unsupported("QAM is not an activation scheme".into()))
                } else {
                    scheme_codebook(&sim)
                };
                match built {
                    Ok(book) => {
                        let (r, p) = book.achieved_stats();
                        let reference = match limit {
                            Some(m) => {
                                DesignProblem::from_partition(&code_partition(spec.n_t, spec.d_min, m)?, m, 0.0)?
                            }
                            None => full.clone(),
                        };
                        sweep.rows.push(SweepRow {
                            scheme: label,
                            target_rate: rate,
                            rate_bits: r,
                            avg_power: p,
                            theoretical_power: theory_at(&reference, r),
                        });
                    }
                    Err(e) => sweep.notes.push(format!("{label} at {rate} bits: {e}")),
                }
            }
        }
    }
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(scheme: Scheme, n_t: usize, rate: f64, grid: &[f64]) -> SimSpec {
        let mut s = SimSpec::new(scheme, n_t, n_t, rate);
        s.ebn0_grid = grid.to_vec();
        s.stop = StopRule {
            min_frame_errors: 20,
            max_frames: 2_000,
        };
        s.seed = 7;
        s
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [
            Scheme::Ssk,
            Scheme::Gssk,
            Scheme::Hssk,
            Scheme::EeHssk,
            Scheme::QamBaseline,
        ] {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert!("foo".parse::<Scheme>().is_err());
    }

    #[test]
    fn source_bits_prefix_is_stable() {
        let a = source_bits(3, 9, 100);
        let b = source_bits(3, 9, 7);
        assert_eq!(&a[..7], &b[..]);
        assert_ne!(source_bits(3, 10, 100), a);
    }

    #[test]
    fn deterministic_and_consistent_counts() {
        let spec = quick(Scheme::EeHssk, 5, 3.0, &[4.0, 8.0]);
        let a = run_link_sim(&spec).unwrap();
        let b = run_link_sim(&spec).unwrap();
        assert_eq!(a, b);
        for p in &a.points {
            assert!(p.symbol_errors <= p.symbols && p.frame_errors <= p.frames);
            assert!((0.0..=1.0).contains(&p.ser()) && (0.0..=1.0).contains(&p.fer()));
        }
        assert!(a.to_csv().starts_with("ebn0_db,ser,ser_ci,fer,fer_ci,symbols,frames\n"));
    }

    #[test]
    fn noiseless_limit_has_no_errors() {
        let spec = quick(Scheme::Gssk, 5, 3.0, &[80.0]);
        let r = run_link_sim(&spec).unwrap();
        assert_eq!(r.points[0].symbol_errors, 0);
        assert!(!r.points[0].reliable);
        let q = quick(Scheme::QamBaseline, 1, 2.0, &[80.0]);
        assert_eq!(qam_baseline(&q).unwrap().points[0].symbol_errors, 0);
    }

    #[test]
    fn integral_rate_required_for_fixed_schemes() {
        let spec = quick(Scheme::Gssk, 5, 2.5, &[0.0]);
        assert!(matches!(run_link_sim(&spec), Err(Error::RateInfeasible(_))));
    }

    #[test]
    fn ideal_arq_never_hurts() {
        let mut spec = quick(Scheme::EeHssk, 5, 3.0, &[2.0, 6.0]);
        spec.arq = ArqMode::Ideal;
        let r = run_link_sim(&spec).unwrap();
        for p in &r.points {
            assert!(p.frame_errors <= p.frame_errors_single_shot);
            assert_eq!(p.frame_errors, p.frame_errors_ideal_arq);
        }
    }

    #[test]
    fn sweep_has_optimum_endpoints() {
        let s = run_power_rate_sweep(&SweepSpec {
            n_t: 7,
            d_min: 2,
            max_rf: vec![7],
            rates: vec![3.0, 4.0],
            schemes: vec![Scheme::Gssk, Scheme::EeHssk],
            locus_points: 10,
        })
        .unwrap();
        let locus: Vec<&SweepRow> = s.rows_for("optimum-m7").collect();
        assert!((locus[0].rate_bits - 7f64.log2()).abs() < 1e-12 && locus[0].avg_power == 1.0);
        let last = locus.last().unwrap();
        assert!((last.rate_bits - 6.0).abs() < 1e-12 && (last.avg_power - 3.5).abs() < 1e-12);
        assert_eq!(s.rows_for("gssk").count(), 2);
        assert!(s.to_csv().starts_with("scheme,rate_bits,avg_power,theoretical_power\n"));
    }
}
