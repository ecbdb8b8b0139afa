//! Entropy-constrained minimum-power prior design.
//!
//! Minimizes `sum_i i |C_i| P_i` subject to `sum_i |C_i| P_i = 1` and an
//! entropy of at least `m` bits, over the weight classes `C_i` admitted by the
//! RF-chain limit. The stationary point has the tilted form
//! `P_i = beta^i / sum_j |C_j| beta^j` with `0 < beta <= 1`, so the whole
//! problem reduces to finding the scalar tilt that meets the rate.

use std::collections::BTreeMap;
use std::fmt;

use crate::constellation::{BinarySymbol, CodePartition};
use crate::error::{Error, Result};

/// Target accuracy of the bisection on the rate, in bits.
pub const RATE_TOLERANCE: f64 = 1e-9;

/// Grid used to check that rate and power grow with the tilt.
const MONOTONE_GRID: usize = 1000;

/// Per-class sizes, RF-chain limit and rate target.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignProblem {
    class_sizes: BTreeMap<u32, u64>,
    max_rf: u32,
    rate: f64,
}

impl DesignProblem {
    /// Classes heavier than `max_rf` are dropped; the rest must be non-empty.
    pub fn new(class_sizes: BTreeMap<u32, u64>, max_rf: u32, rate: f64) -> Result<Self> {
        if max_rf == 0 {
            return Err(Error::InvalidProblem("RF-chain limit must be >= 1".into()));
        }
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::InvalidProblem(format!("rate {rate} must be >= 0")));
        }
        if class_sizes.contains_key(&0) {
            return Err(Error::InvalidProblem("weight-0 class is reserved".into()));
        }
        if let Some((w, _)) = class_sizes.iter().find(|(_, &n)| n == 0) {
            return Err(Error::InvalidProblem(format!("class {w} is empty")));
        }
        let class_sizes: BTreeMap<u32, u64> = class_sizes.into_iter().filter(|(w, _)| *w <= max_rf).collect();
        if class_sizes.is_empty() {
            return Err(Error::InvalidProblem(format!(
                "no class admissible with at most {max_rf} RF chains"
            )));
        }
        Ok(DesignProblem {
            class_sizes,
            max_rf,
            rate,
        })
    }

    pub fn from_partition(partition: &CodePartition, max_rf: u32, rate: f64) -> Result<Self> {
        Self::new(partition.class_sizes(), max_rf, rate)
    }

    pub fn class_sizes(&self) -> &BTreeMap<u32, u64> {
        &self.class_sizes
    }

    pub fn max_rf(&self) -> u32 {
        self.max_rf
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn with_rate(&self, rate: f64) -> Result<Self> {
        Self::new(self.class_sizes.clone(), self.max_rf, rate)
    }

    fn lightest(&self) -> (u32, u64) {
        let (&w, &n) = self.class_sizes.iter().next().expect("validated non-empty");
        (w, n)
    }

    /// Rate with only the lightest class in use.
    pub fn min_rate(&self) -> f64 {
        (self.lightest().1 as f64).log2()
    }

    /// Rate with every admissible codeword equiprobable.
    pub fn capacity(&self) -> f64 {
        (self.class_sizes.values().sum::<u64>() as f64).log2()
    }
}

/// Tilt parameter; `ZeroPlus` is the limit `beta -> 0+`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tilt {
    ZeroPlus,
    Value(f64),
}

impl Tilt {
    pub fn value(&self) -> f64 {
        match *self {
            Tilt::ZeroPlus => 0.0,
            Tilt::Value(b) => b,
        }
    }
}

impl fmt::Display for Tilt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tilt::ZeroPlus => f.write_str("0+"),
            Tilt::Value(b) => write!(f, "{b}"),
        }
    }
}

fn check_tilt(beta: Tilt) -> Result<()> {
    match beta {
        Tilt::Value(b) if !(b > 0.0 && b <= 1.0) => Err(Error::Domain(format!("tilt {b} outside (0, 1]"))),
        _ => Ok(()),
    }
}

/// Per-class priors `P_i` for the given tilt.
pub fn priors_for_beta(problem: &DesignProblem, beta: Tilt) -> Result<BTreeMap<u32, f64>> {
    check_tilt(beta)?;
    let (lightest, lightest_size) = problem.lightest();
    Ok(match beta {
        Tilt::ZeroPlus => problem
            .class_sizes
            .keys()
            .map(|&w| (w, if w == lightest { 1.0 / lightest_size as f64 } else { 0.0 }))
            .collect(),
        Tilt::Value(b) => {
            // Powers relative to the lightest class keep tiny tilts finite.
            let rel = |w: u32| b.powi((w - lightest) as i32);
            let norm: f64 = problem.class_sizes.iter().map(|(&w, &n)| n as f64 * rel(w)).sum();
            problem.class_sizes.keys().map(|&w| (w, rel(w) / norm)).collect()
        }
    })
}

fn entropy_bits(problem: &DesignProblem, priors: &BTreeMap<u32, f64>) -> f64 {
    problem
        .class_sizes
        .iter()
        .map(|(w, &n)| {
            let p = priors[w];
            if p > 0.0 {
                -(n as f64) * p * p.log2()
            } else {
                0.0
            }
        })
        .sum()
}

fn power(problem: &DesignProblem, priors: &BTreeMap<u32, f64>) -> f64 {
    problem
        .class_sizes
        .iter()
        .map(|(&w, &n)| w as f64 * n as f64 * priors[&w])
        .sum()
}

/// Entropy of the tilted priors, in bits.
pub fn rate_of_beta(problem: &DesignProblem, beta: Tilt) -> Result<f64> {
    Ok(entropy_bits(problem, &priors_for_beta(problem, beta)?))
}

/// Expected number of active antennas under the tilted priors.
pub fn power_of_beta(problem: &DesignProblem, beta: Tilt) -> Result<f64> {
    Ok(power(problem, &priors_for_beta(problem, beta)?))
}

/// Optimal priors for one problem.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignSolution {
    pub beta: Tilt,
    /// Per-symbol prior of each weight class.
    pub priors: BTreeMap<u32, f64>,
    pub rate: f64,
    pub avg_power: f64,
    pub constraint_active: bool,
}

impl DesignSolution {
    fn at(problem: &DesignProblem, beta: Tilt, constraint_active: bool) -> Result<Self> {
        let priors = priors_for_beta(problem, beta)?;
        Ok(DesignSolution {
            beta,
            rate: entropy_bits(problem, &priors),
            avg_power: power(problem, &priors),
            priors,
            constraint_active,
        })
    }

    /// Per-symbol priors for the codewords of `partition`, in canonical order.
    /// Symbols of classes outside the solution get prior zero.
    pub fn symbol_priors(&self, partition: &CodePartition) -> Vec<(BinarySymbol, f64)> {
        partition
            .symbols()
            .into_iter()
            .map(|s| (s, self.priors.get(&s.weight()).copied().unwrap_or(0.0)))
            .collect()
    }
}

/// Checks that rate and power are nondecreasing along a uniform tilt grid.
pub fn check_monotone(problem: &DesignProblem) -> Result<()> {
    let slack = 1e-12;
    let mut prev: Option<(f64, f64, f64)> = None;
    for k in 1..=MONOTONE_GRID {
        let b = k as f64 / MONOTONE_GRID as f64;
        let priors = priors_for_beta(problem, Tilt::Value(b))?;
        let (r, p) = (entropy_bits(problem, &priors), power(problem, &priors));
        if let Some((pb, pr, pp)) = prev {
            if r < pr - slack || p < pp - slack {
                return Err(Error::NonMonotone(format!(
                    "tilt {pb} -> {b}: rate {pr} -> {r}, power {pp} -> {p}"
                )));
            }
        }
        prev = Some((b, r, p));
    }
    Ok(())
}

/// Minimum-power priors meeting the rate target.
pub fn solve(problem: &DesignProblem) -> Result<DesignSolution> {
    let target = problem.rate;
    if target <= problem.min_rate() {
        return DesignSolution::at(problem, Tilt::ZeroPlus, false);
    }
    let capacity = problem.capacity();
    if target > capacity + RATE_TOLERANCE {
        return Err(Error::RateInfeasible(format!(
            "{target} bits exceeds capacity {capacity} bits of classes {:?}",
            problem.class_sizes
        )));
    }
    if capacity - target <= RATE_TOLERANCE {
        return DesignSolution::at(problem, Tilt::Value(1.0), true);
    }
    check_monotone(problem)?;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut best = Tilt::Value(1.0);
    for _ in 0..256 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = rate_of_beta(problem, Tilt::Value(mid))?;
        best = Tilt::Value(mid);
        if (r - target).abs() <= RATE_TOLERANCE {
            break;
        }
        if r < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sol = DesignSolution::at(problem, best, true)?;
    if (sol.rate - target).abs() > RATE_TOLERANCE {
        return Err(Error::NonMonotone(format!(
            "bisection stalled at rate {} for target {target}",
            sol.rate
        )));
    }
    Ok(sol)
}

/// One point on the power-versus-rate optimum curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocusPoint {
    pub beta: Tilt,
    pub rate: f64,
    pub avg_power: f64,
}

/// `(rate, power)` along the given tilts.
pub fn optimum_locus(problem: &DesignProblem, betas: &[Tilt]) -> Result<Vec<LocusPoint>> {
    betas
        .iter()
        .map(|&beta| {
            let priors = priors_for_beta(problem, beta)?;
            Ok(LocusPoint {
                beta,
                rate: entropy_bits(problem, &priors),
                avg_power: power(problem, &priors),
            })
        })
        .collect()
}

/// `0+` followed by `n` evenly spaced tilts ending at 1.
pub fn tilt_grid(n: usize) -> Vec<Tilt> {
    std::iter::once(Tilt::ZeroPlus)
        .chain((1..=n).map(|k| Tilt::Value(k as f64 / n as f64)))
        .collect()
}

/// Minimum average power reachable at `rate` with this class structure.
pub fn optimal_power_at(problem: &DesignProblem, rate: f64) -> Result<f64> {
    Ok(solve(&problem.with_rate(rate)?)?.avg_power)
}
