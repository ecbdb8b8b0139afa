use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ssk_core::analysis::{pep_chernoff, pep_exact, symbol_error_estimate, PepInputs, SerOptions};
use ssk_core::constellation::{build_gssk, build_hssk, build_ssk};
use ssk_core::design::{optimum_locus, solve, tilt_grid};
use ssk_core::gssk_props::{bounds_csv, check_distance_bounds, check_even_distances, certify_min_distance, SearchOptions};
use ssk_core::sim::{
    code_partition, ee_hssk_codebook, run_link_sim, run_power_rate_sweep, scheme_codebook, FadingMode, Scheme, SimSpec,
    StopRule, SweepSpec,
};
use ssk_core::{Alphabet, DesignProblem, DetectorMetric, Error};

use crate::config::parse_grid;
use crate::{
    DesignArgs, MetricChoice, PepArgs, SerArgs, SimulateArgs, SweepArgs, TableArgs, TableLayout, Unreliable, VerifyArgs,
};

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn design(a: DesignArgs) -> Result<()> {
    let max_rf = a.max_rf.unwrap_or(a.nt as u32);
    let partition = code_partition(a.nt, a.dmin, max_rf)?;
    let problem = DesignProblem::from_partition(&partition, max_rf, a.rate)?;
    let sol = solve(&problem)?;
    let mut out = String::new();
    writeln!(out, "antennas        {}", a.nt)?;
    writeln!(out, "min distance    {}", a.dmin)?;
    writeln!(out, "max rf chains   {max_rf}")?;
    writeln!(out, "target rate     {}", a.rate)?;
    writeln!(out, "capacity        {:.9}", problem.capacity())?;
    writeln!(out, "beta            {}", sol.beta)?;
    writeln!(out, "rate            {:.9}", sol.rate)?;
    writeln!(out, "avg power       {:.9}", sol.avg_power)?;
    writeln!(out, "rate binding    {}", sol.constraint_active)?;
    writeln!(out)?;
    writeln!(out, "weight,class_size,prior,class_mass")?;
    let sizes = problem.class_sizes();
    for (w, p) in &sol.priors {
        let n = sizes[w];
        writeln!(out, "{w},{n},{p:.12},{:.12}", p * n as f64)?;
    }
    print!("{out}");
    if let Some(points) = a.locus {
        let mut csv = String::from("beta,rate_bits,avg_power\n");
        for p in optimum_locus(&problem, &tilt_grid(points.max(1)))? {
            writeln!(csv, "{},{:.9},{:.9}", p.beta, p.rate, p.avg_power)?;
        }
        if a.output.is_none() {
            println!();
        }
        emit(a.output.as_deref(), &csv)?;
    }
    Ok(())
}

pub fn table(a: TableArgs) -> Result<()> {
    let mut spec = SimSpec::new(a.scheme, a.nt, a.nt, a.rate);
    spec.d_min = a.dmin;
    spec.max_rf = a.max_rf;
    let book = scheme_codebook(&spec)?;
    let text = match a.layout {
        TableLayout::Codebook => book.to_table(),
        TableLayout::Alphabet => book.to_alphabet()?.to_table(),
    };
    let (rate, power) = book.achieved_stats();
    eprintln!(
        "{} symbols, achieved rate {rate:.6} bits, avg power {power:.6}",
        book.len()
    );
    emit(a.output.as_deref(), &text)
}

pub fn pep(a: PepArgs) -> Result<()> {
    let mut inputs = PepInputs::new(a.d, a.log_ratio, db_to_linear(a.snr_db), a.nt, a.nr);
    if a.no_nt_norm {
        inputs = inputs.without_nt_normalization();
    }
    let value = if a.bound {
        pep_chernoff(&inputs)?
    } else {
        pep_exact(&inputs)?
    };
    println!("{value:.12e}");
    Ok(())
}

fn load_alphabet(a: &SerArgs) -> Result<Alphabet> {
    let s = &a.source;
    if let Some(path) = &s.alphabet {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(Alphabet::from_table(&text)?);
    }
    let (Some(nt), Some(rate)) = (s.nt, s.rate) else {
        bail!("give --alphabet or both --nt and --rate");
    };
    let max_rf = s.max_rf.unwrap_or(nt as u32);
    let integral = || -> Result<u32> {
        if rate.fract() != 0.0 || rate < 1.0 {
            return Err(Error::RateInfeasible(format!("{} needs an integral rate, got {rate}", s.scheme)).into());
        }
        Ok(rate as u32)
    };
    Ok(match s.scheme {
        Scheme::Ssk => build_ssk(nt, integral()?)?,
        Scheme::Gssk => build_gssk(nt, integral()?)?,
        Scheme::Hssk => build_hssk(&code_partition(nt, s.dmin, max_rf)?, integral()?)?,
        Scheme::EeHssk => ee_hssk_codebook(nt, s.dmin, max_rf, rate)?.1.to_alphabet()?,
        Scheme::QamBaseline => return Err(Error::Unsupported("QAM has no activation alphabet".into()).into()),
    })
}

pub fn ser_estimate(a: SerArgs) -> Result<()> {
    let alphabet = load_alphabet(&a)?;
    let grid = parse_grid(&a.snr_db)?;
    let mut csv = String::from("snr_db,estimate,union_bound\n");
    for db in grid {
        let opts = SerOptions {
            snr: db_to_linear(db),
            n_r: a.nr,
            use_bound: a.bound,
            nt_normalization: !a.no_nt_norm,
        };
        let est = symbol_error_estimate(alphabet.symbols(), alphabet.priors(), &opts)?;
        writeln!(csv, "{db},{:.9e},{:.9e}", est.estimate, est.union_bound)?;
    }
    emit(a.output.as_deref(), &csv)
}

/// `SSK_SEED` beats `--seed`, which beats the default.
fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    match std::env::var("SSK_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("SSK_SEED={v:?} is not an unsigned integer")),
        Err(_) => Ok(flag.unwrap_or(1)),
    }
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let mut spec = SimSpec::new(a.scheme, a.nt, a.nr.unwrap_or(a.nt), a.rate);
    spec.d_min = a.dmin;
    spec.max_rf = a.max_rf;
    spec.ebn0_grid = parse_grid(&a.ebn0)?;
    spec.frame_bits = a.frame_bits;
    spec.stop = StopRule {
        min_frame_errors: a.min_frame_errors,
        max_frames: a.max_frames,
    };
    spec.seed = resolve_seed(a.seed)?;
    spec.arq = a.arq;
    spec.fading = if a.block_fading {
        FadingMode::PerFrame
    } else {
        FadingMode::PerSymbol
    };
    spec.metric = match a.metric {
        MetricChoice::Scaled => DetectorMetric::Scaled,
        MetricChoice::Eq5 => DetectorMetric::Unscaled,
    };
    let result = run_link_sim(&spec)?;
    eprintln!(
        "{} {}x{}: rate {:.6} bits, avg power {:.6}, seed {}, arq {}, fading {}",
        spec.scheme, spec.n_t, spec.n_r, result.rate, result.avg_power, spec.seed, spec.arq, spec.fading
    );
    emit(a.output.as_deref(), &result.to_csv())?;
    let weak: Vec<String> = result
        .points
        .iter()
        .filter(|p| !p.reliable)
        .map(|p| format!("{} dB", p.ebn0_db))
        .collect();
    if !weak.is_empty() {
        return Err(Unreliable(format!(
            "frame cap reached before {} frame errors at {}",
            spec.stop.min_frame_errors,
            weak.join(", ")
        ))
        .into());
    }
    Ok(())
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let spec = SweepSpec {
        n_t: a.nt,
        d_min: a.dmin,
        max_rf: if a.max_rf.is_empty() {
            vec![a.nt as u32]
        } else {
            a.max_rf
        },
        rates: parse_grid(&a.rates)?,
        schemes: a.schemes,
        locus_points: a.locus_points,
    };
    let sweep = run_power_rate_sweep(&spec)?;
    for note in &sweep.notes {
        eprintln!("skipped: {note}");
    }
    emit(a.output.as_deref(), &sweep.to_csv())
}

pub fn verify(a: VerifyArgs) -> Result<()> {
    let opts = SearchOptions {
        node_budget: a.node_budget,
        ..SearchOptions::default()
    };
    let weights: Vec<usize> = match a.ntx {
        Some(w) => vec![w],
        None => (1..a.nt).collect(),
    };
    let mut out = String::new();
    writeln!(out, "even-distance check, {} antennas", a.nt)?;
    for &w in &weights {
        let r = check_even_distances(a.nt, w)?;
        let hist: Vec<String> = r.histogram.iter().map(|(d, n)| format!("d{d}:{n}")).collect();
        writeln!(
            out,
            "  weight {w}: {} pairs, all even and >= 2 [{}]",
            r.pairs,
            hist.join(" ")
        )?;
    }
    if let Some(m) = a.rate {
        let c = certify_min_distance(a.nt, m, opts)?;
        writeln!(
            out,
            "rate {m}: weight {} alphabet of {} symbols, largest distance-4 subset {}, min distance 2 {}",
            c.weight,
            c.alphabet_size,
            c.max_distance4_set,
            if c.certified { "certified" } else { "NOT certified" }
        )?;
    }
    let mut reports = Vec::new();
    writeln!(out, "distance-4/6 set sizes against closed-form bounds")?;
    for &w in &weights {
        if w == 0 || w >= a.nt {
            continue;
        }
        match check_distance_bounds(a.nt, w, opts) {
            Ok(r) => {
                writeln!(
                    out,
                    "  weight {w}: exact {} <= {} (distance 4), exact {} <= {} (distance 6)",
                    r.exact4, r.bound4, r.exact6, r.bound6
                )?;
                reports.push(r);
            }
            Err(Error::BudgetExceeded { nodes, budget }) if a.ntx.is_none() => {
                writeln!(out, "  weight {w}: skipped, {nodes} patterns exceed budget {budget}")?;
            }
            Err(e) => return Err(e.into()),
        }
    }
    print!("{out}");
    let csv = bounds_csv(&reports);
    if a.csv.is_none() {
        println!();
    }
    emit(a.csv.as_deref(), &csv)
}
