//! Flat Rayleigh MIMO link: `y = H sqrt(Es) x + v` and MAP detection.
//!
//! `H` has i.i.d. circularly symmetric complex Gaussian entries of variance
//! `sigma_h2`; `v` has i.i.d. complex entries of variance `N0 / 2` (each real
//! component `N0 / 4`).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::constellation::BinarySymbol;
use crate::error::{Error, Result};

/// Antenna counts and power levels of one simulated link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkConfig {
    pub n_t: usize,
    pub n_r: usize,
    /// Transmit power per active antenna.
    pub es: f64,
    pub n0: f64,
    pub sigma_h2: f64,
}

impl LinkConfig {
    pub fn new(n_t: usize, n_r: usize, es: f64, n0: f64) -> Result<Self> {
        let cfg = LinkConfig {
            n_t,
            n_r,
            es,
            n0,
            sigma_h2: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.n_r == 0 {
            return Err(Error::Config("antenna counts must be >= 1".into()));
        }
        if !(self.es > 0.0 && self.n0 > 0.0 && self.sigma_h2 > 0.0) {
            return Err(Error::Config(format!(
                "Es, N0 and channel variance must be positive (Es={}, N0={}, var={})",
                self.es, self.n0, self.sigma_h2
            )));
        }
        Ok(())
    }

    /// Noise standard deviation of each real component.
    pub fn noise_component_std(&self) -> f64 {
        (self.n0 / 4.0).sqrt()
    }
}

/// Circularly symmetric complex Gaussian with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// One channel draw, `N_R x N_T`, stored column-major so that each transmit
/// antenna's receive signature is contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    n_r: usize,
    n_t: usize,
    columns: Vec<Complex64>,
}

impl Channel {
    pub fn draw<R: Rng + ?Sized>(config: &LinkConfig, rng: &mut R) -> Self {
        let columns = (0..config.n_r * config.n_t)
            .map(|_| complex_gaussian(rng, config.sigma_h2))
            .collect();
        Channel {
            n_r: config.n_r,
            n_t: config.n_t,
            columns,
        }
    }

    /// Builds a channel from rows `H[r][t]`.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n_r = rows.len();
        let n_t = rows.first().map_or(0, Vec::len);
        if n_r == 0 || n_t == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n_t) {
            return Err(Error::DimensionMismatch {
                expected: n_t,
                got: bad.len(),
            });
        }
        let mut columns = Vec::with_capacity(n_r * n_t);
        for t in 0..n_t {
            columns.extend(rows.iter().map(|r| r[t]));
        }
        Ok(Channel { n_r, n_t, columns })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Column `t`: the receive signature of transmit antenna `t`.
    pub fn column(&self, t: usize) -> &[Complex64] {
        &self.columns[t * self.n_r..(t + 1) * self.n_r]
    }

    pub fn entry(&self, r: usize, t: usize) -> Complex64 {
        self.columns[t * self.n_r + r]
    }

    /// Noiseless receive point `H sqrt(es) x` written into `out`.
    pub fn signal_into(&self, symbol: &BinarySymbol, es: f64, out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let amp = es.sqrt();
        for t in symbol.active_antennas() {
            for (o, h) in out.iter_mut().zip(self.column(t)) {
                *o += h * amp;
            }
        }
    }
}

fn check_dims(config: &LinkConfig, channel: &Channel, symbol: &BinarySymbol) -> Result<()> {
    if channel.n_t != config.n_t || channel.n_r != config.n_r {
        return Err(Error::DimensionMismatch {
            expected: config.n_r * config.n_t,
            got: channel.n_r * channel.n_t,
        });
    }
    if symbol.len() != config.n_t {
        return Err(Error::DimensionMismatch {
            expected: config.n_t,
            got: symbol.len(),
        });
    }
    Ok(())
}

/// One channel use: `y = H sqrt(Es) x + v`.
pub fn transmit<R: Rng + ?Sized>(
    config: &LinkConfig,
    channel: &Channel,
    symbol: &BinarySymbol,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    check_dims(config, channel, symbol)?;
    let mut y = vec![Complex64::new(0.0, 0.0); config.n_r];
    channel.signal_into(symbol, config.es, &mut y);
    for v in &mut y {
        *v += complex_gaussian(rng, config.n0 / 2.0);
    }
    Ok(y)
}

/// How the prior enters the detection metric.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DetectorMetric {
    /// `(2/N0) ||y - H sqrt(Es) x||^2 - ln P(x)`, the exact log-posterior.
    #[default]
    Scaled,
    /// `||y - H sqrt(Es) x||^2 - ln P(x)` without the noise scaling.
    Unscaled,
}

/// MAP detector for one channel realization. Ties go to the earliest symbol.
#[derive(Clone, Debug)]
pub struct MapDetector {
    n_r: usize,
    centers: Vec<Complex64>,
    penalty: Vec<f64>,
    scale: f64,
}

impl MapDetector {
    /// `priors` must be positive; pass equal priors for ML detection.
    pub fn new(
        config: &LinkConfig,
        channel: &Channel,
        symbols: &[BinarySymbol],
        priors: &[f64],
        metric: DetectorMetric,
    ) -> Result<Self> {
        if symbols.len() != priors.len() || symbols.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: symbols.len(),
                got: priors.len(),
            });
        }
        if priors.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Domain("MAP priors must be positive".into()));
        }
        let mut centers = vec![Complex64::new(0.0, 0.0); symbols.len() * config.n_r];
        for (s, out) in symbols.iter().zip(centers.chunks_exact_mut(config.n_r)) {
            check_dims(config, channel, s)?;
            channel.signal_into(s, config.es, out);
        }
        let penalty = priors.iter().map(|p| -p.ln()).collect();
        let scale = match metric {
            DetectorMetric::Scaled => 2.0 / config.n0,
            DetectorMetric::Unscaled => 1.0,
        };
        Ok(MapDetector {
            n_r: config.n_r,
            centers,
            penalty,
            scale,
        })
    }

    pub fn metric(&self, y: &[Complex64], k: usize) -> f64 {
        let c = &self.centers[k * self.n_r..(k + 1) * self.n_r];
        let dist: f64 = y.iter().zip(c).map(|(a, b)| (a - b).norm_sqr()).sum();
        self.scale * dist + self.penalty[k]
    }

    /// Index of the detected symbol.
    pub fn detect(&self, y: &[Complex64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for k in 0..self.penalty.len() {
            let m = self.metric(y, k);
            if m < best.0 {
                best = (m, k);
            }
        }
        best.1
    }
}

/// Pure minimum-distance rule. Ties go to the earliest symbol.
pub fn detect_ml(
    config: &LinkConfig,
    channel: &Channel,
    y: &[Complex64],
    symbols: &[BinarySymbol],
) -> Result<BinarySymbol> {
    let mut point = vec![Complex64::new(0.0, 0.0); config.n_r];
    let mut best = (f64::INFINITY, None);
    for s in symbols {
        check_dims(config, channel, s)?;
        channel.signal_into(s, config.es, &mut point);
        let d: f64 = y.iter().zip(&point).map(|(a, b)| (a - b).norm_sqr()).sum();
        if d < best.0 {
            best = (d, Some(*s));
        }
    }
    best.1.ok_or(Error::DegenerateAlphabet("empty alphabet".into()))
}

/// MAP estimate of the transmitted symbol.
pub fn detect_map(
    config: &LinkConfig,
    channel: &Channel,
    y: &[Complex64],
    symbols: &[BinarySymbol],
    priors: &[f64],
    metric: DetectorMetric,
) -> Result<BinarySymbol> {
    if y.len() != config.n_r {
        return Err(Error::DimensionMismatch {
            expected: config.n_r,
            got: y.len(),
        });
    }
    let det = MapDetector::new(config, channel, symbols, priors, metric)?;
    Ok(symbols[det.detect(y)])
}

/// Energy per bit: `Es * E[x^H x] / m`.
pub fn eb_from_es(es: f64, avg_power: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::Domain(format!("rate {rate} must be positive")));
    }
    Ok(es * avg_power / rate)
}

/// Per-antenna power for a given energy per bit.
pub fn es_from_eb(eb: f64, avg_power: f64, rate: f64) -> Result<f64> {
    if !(avg_power > 0.0) {
        return Err(Error::Domain(format!("average power {avg_power} must be positive")));
    }
    Ok(eb * rate / avg_power)
}

/// `N0` that places the link at `ebn0_db` with `Es` fixed.
pub fn n0_for_ebn0_db(es: f64, avg_power: f64, rate: f64, ebn0_db: f64) -> Result<f64> {
    Ok(eb_from_es(es, avg_power, rate)? / 10f64.powf(ebn0_db / 10.0))
}
