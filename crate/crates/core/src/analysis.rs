//! Pairwise error probabilities and averaged symbol-error predictions.
//!
//! The PEP of deciding `x_j` when `x_i` was sent is
//! `int_0^inf Q(sqrt(z) + L/(N0 sqrt(z))) f_Z(z) dz`, where `L = ln(P_i/P_j)`
//! and `Z` is a sum of `2 N_R` squared zero-mean Gaussians of variance
//! `sigma_z^2 = Es d / (2 N_T N0)`, i.e. Gamma(`N_R`, `2 sigma_z^2`).
//! `Es` is fixed to 1 so `N0 = 1/snr`.

use std::collections::HashMap;

use libm::erfc;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::constellation::BinarySymbol;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Absolute accuracy of [`pep_exact`].
pub const PEP_ABS_TOL: f64 = 1e-10;
/// Relative accuracy of [`pep_exact`]; keeps small PEPs meaningful.
pub const PEP_REL_TOL: f64 = 1e-9;
/// Gamma tail mass left beyond the integration limit.
const TAIL_MASS: f64 = 1e-14;

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Inputs of a single pairwise error probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PepInputs {
    /// Hamming distance between the two symbols.
    pub distance: u32,
    /// `ln(P(x_i) / P(x_j))`.
    pub log_ratio: f64,
    /// `Es / N0` (linear).
    pub snr: f64,
    pub n_t: usize,
    pub n_r: usize,
    /// Keep the `1/N_T` factor in `sigma_z^2`. Without it the variance
    /// matches the unnormalized signal model used by the simulator.
    pub nt_normalization: bool,
}

impl PepInputs {
    pub fn new(distance: u32, log_ratio: f64, snr: f64, n_t: usize, n_r: usize) -> Self {
        PepInputs {
            distance,
            log_ratio,
            snr,
            n_t,
            n_r,
            nt_normalization: true,
        }
    }

    pub fn without_nt_normalization(mut self) -> Self {
        self.nt_normalization = false;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.distance == 0 {
            return Err(Error::Domain("distance must be >= 1".into()));
        }
        if !(self.snr > 0.0) || !self.snr.is_finite() {
            return Err(Error::Domain(format!("snr {} must be positive", self.snr)));
        }
        if self.n_t == 0 || self.n_r == 0 {
            return Err(Error::Domain("antenna counts must be >= 1".into()));
        }
        if !self.log_ratio.is_finite() {
            return Err(Error::Domain("log-ratio must be finite".into()));
        }
        Ok(())
    }

    /// Per-component variance of the Gaussians making up `Z`.
    pub fn sigma_z2(&self) -> f64 {
        let norm = if self.nt_normalization { self.n_t as f64 } else { 1.0 };
        self.snr * self.distance as f64 / (2.0 * norm)
    }
}

/// Density of `Z ~ Gamma(shape, scale)`.
pub fn gamma_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return if shape == 1.0 && x == 0.0 { 1.0 / scale } else { 0.0 };
    }
    ((shape - 1.0) * (x / scale).ln() - x / scale - ln_gamma(shape) - scale.ln()).exp()
}

/// Point beyond which a Gamma(shape, scale) variable has mass below `tail`.
pub fn gamma_upper_limit(shape: f64, scale: f64, tail: f64) -> f64 {
    let mut u = shape + 10.0 * shape.sqrt() + 10.0;
    while gamma_ur(shape, u) > tail {
        u *= 1.5;
    }
    u * scale
}

fn breakpoints(shape: f64, scale: f64, upper: f64) -> Vec<f64> {
    let mean = shape * scale;
    let mut b: Vec<f64> = [1e-3, 1e-2, 0.1, 0.3, 1.0, 2.0, 4.0]
        .iter()
        .map(|f| f * mean)
        .chain([0.25, 1.0, 4.0, 16.0, 64.0, 256.0])
        .filter(|&x| x > 0.0 && x < upper)
        .collect();
    b.sort_by(f64::total_cmp);
    b
}

/// Integrates the Gamma density of `Z` alone over `(0, upper)`.
pub fn gamma_mass(shape: f64, scale: f64) -> Result<f64> {
    let upper = gamma_upper_limit(shape, scale, TAIL_MASS);
    let br = breakpoints(shape, scale, upper);
    Ok(integrate(|x| gamma_pdf(x, shape, scale), 0.0, upper, &br, 1e-12, 1e-12, 4000)?.value)
}

/// Exact PEP by adaptive quadrature.
pub fn pep_exact(inputs: &PepInputs) -> Result<f64> {
    inputs.validate()?;
    let shift = inputs.log_ratio * inputs.snr; // L / N0 with Es = 1
    let sigma2 = inputs.sigma_z2();
    if sigma2 < 1e-200 {
        // Z collapses to 0: the Q argument tends to sign(L) * inf, or 0.
        return Ok(match shift.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => 0.0,
            Some(std::cmp::Ordering::Less) => 1.0,
            _ => 0.5,
        });
    }
    let shape = inputs.n_r as f64;
    let scale = 2.0 * sigma2;
    let upper = gamma_upper_limit(shape, scale, TAIL_MASS);
    let integrand = |x: f64| {
        let s = x.sqrt();
        q_function(s + shift / s) * gamma_pdf(x, shape, scale)
    };
    let br = breakpoints(shape, scale, upper);
    let r = integrate(integrand, 0.0, upper, &br, PEP_ABS_TOL, PEP_REL_TOL, 4000)?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Chernoff-style closed-form bound; requires `L >= 0`.
pub fn pep_chernoff(inputs: &PepInputs) -> Result<f64> {
    inputs.validate()?;
    if inputs.log_ratio < 0.0 {
        return Err(Error::Domain(format!(
            "bound needs a nonnegative log-ratio, got {}",
            inputs.log_ratio
        )));
    }
    Ok(0.5 * (-inputs.log_ratio * inputs.snr).exp() * (inputs.sigma_z2() + 1.0).powi(-(inputs.n_r as i32)))
}

/// Averaged symbol-error prediction and the plain union sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SerEstimate {
    /// `sum_{i != j} P_i * P_j / (1 - P_i) * PEP(i -> j)`.
    pub estimate: f64,
    /// `sum_i P_i sum_{j != i} PEP(i -> j)`.
    pub union_bound: f64,
}

/// Options for [`symbol_error_estimate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SerOptions {
    pub snr: f64,
    pub n_r: usize,
    /// Use the closed-form bound for pairs with `L >= 0`; pairs with `L < 0`
    /// always use the exact PEP since the bound does not apply there.
    pub use_bound: bool,
    pub nt_normalization: bool,
}

/// Averages pairwise error probabilities over an alphabet.
pub fn symbol_error_estimate(symbols: &[BinarySymbol], priors: &[f64], opts: &SerOptions) -> Result<SerEstimate> {
    if symbols.len() != priors.len() || symbols.len() < 2 {
        return Err(Error::DegenerateAlphabet(format!(
            "{} symbols, {} priors",
            symbols.len(),
            priors.len()
        )));
    }
    if priors.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::Domain("priors must lie in (0, 1)".into()));
    }
    let n_t = symbols[0].len();
    let mut cache: HashMap<(u32, u64), f64> = HashMap::new();
    let mut estimate = 0.0;
    let mut union_bound = 0.0;
    for (i, (xi, &pi)) in symbols.iter().zip(priors).enumerate() {
        let mut row = 0.0;
        for (j, (xj, &pj)) in symbols.iter().zip(priors).enumerate() {
            if i == j {
                continue;
            }
            let d = xi.distance(xj);
            let log_ratio = (pi / pj).ln();
            let key = (d, log_ratio.to_bits());
            let pep = match cache.get(&key) {
                Some(&v) => v,
                None => {
                    let mut inp = PepInputs::new(d, log_ratio, opts.snr, n_t, opts.n_r);
                    inp.nt_normalization = opts.nt_normalization;
                    let v = if opts.use_bound && log_ratio >= 0.0 {
                        pep_chernoff(&inp)?
                    } else {
                        pep_exact(&inp)?
                    };
                    cache.insert(key, v);
                    v
                }
            };
            estimate += pi * (pj / (1.0 - pi)) * pep;
            row += pep;
        }
        union_bound += pi * row;
    }
    Ok(SerEstimate { estimate, union_bound })
}
