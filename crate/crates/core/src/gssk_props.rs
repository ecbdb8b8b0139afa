//! Exhaustive certification of the distance properties of constant-weight
//! activation patterns: even pairwise distances, the size of the largest
//! subset with distance at least 4 or 6, and the resulting `d_min = 2` of
//! every fixed-weight alphabet.

use std::collections::{BTreeMap, HashMap};

use crate::clique::{find_clique_of_size, max_clique, CliqueOptions, Graph};
use crate::constellation::{binomial, choose_gssk_nt, enumerate_weight_class, BinarySymbol};
use crate::error::{Error, Result};

/// Default cap on the number of graph vertices `C(N_T, n_t)`.
pub const DEFAULT_NODE_BUDGET: usize = 500;

/// Swap moves allowed to the local search that tries to meet the ceiling.
const TABU_MOVES: u64 = 200_000;

/// Distance histogram of one weight class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvenDistanceReport {
    pub n_t: usize,
    pub weight: usize,
    pub pairs: u64,
    /// Distance to number of unordered pairs.
    pub histogram: BTreeMap<u32, u64>,
}

/// Verifies that every pair of distinct weight-`weight` patterns is at an
/// even distance of at least 2.
pub fn check_even_distances(n_t: usize, weight: usize) -> Result<EvenDistanceReport> {
    if weight == 0 || weight > n_t {
        return Err(Error::InvalidProblem(format!("weight {weight} outside 1..={n_t}")));
    }
    let class = enumerate_weight_class(n_t, weight)?;
    let mut histogram = BTreeMap::new();
    let mut pairs = 0;
    for (k, a) in class.iter().enumerate() {
        for b in &class[k + 1..] {
            let d = a.distance(b);
            if d < 2 || d % 2 == 1 {
                return Err(Error::Counterexample(format!("{a} and {b} are at distance {d}")));
            }
            *histogram.entry(d).or_insert(0) += 1;
            pairs += 1;
        }
    }
    Ok(EvenDistanceReport {
        n_t,
        weight,
        pairs,
        histogram,
    })
}

/// Size bound for distance-4 subsets: `floor(C(N, n) / (N - n + 1))`.
pub fn distance4_bound(n_t: usize, weight: usize) -> u128 {
    binomial(n_t, weight) / (n_t - weight + 1) as u128
}

/// Size bound for distance-6 subsets: `floor(C(N, n) / (N n - n^2 + 1))`.
pub fn distance6_bound(n_t: usize, weight: usize) -> u128 {
    binomial(n_t, weight) / (n_t * weight - weight * weight + 1) as u128
}

/// Search settings for [`max_set_with_min_distance`].
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub node_budget: usize,
    /// Stop once the closed-form distance-4/6 bound is met.
    pub use_ceilings: bool,
    /// Stop once the recursive bound built from smaller exact instances is met.
    pub use_recursive_bound: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            node_budget: DEFAULT_NODE_BUDGET,
            use_ceilings: true,
            use_recursive_bound: true,
        }
    }
}

/// Largest subset found, with the ceiling that was applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxSet {
    pub size: usize,
    pub witness: Vec<BinarySymbol>,
    pub ceiling: Option<usize>,
    pub search_nodes: u64,
}

/// Exact maximum number of weight-`weight` patterns with pairwise distance
/// at least `threshold`.
///
/// The search may stop early on the closed-form bound and on the recursive
/// bounds `A(N, d, n) <= floor(N / n * A(N - 1, d, n - 1))` and
/// `A(N, d, n) <= floor(N / (N - n) * A(N - 1, d, n))`, whose right-hand
/// sides come from exact searches on smaller instances.
pub fn max_set_with_min_distance(n_t: usize, weight: usize, threshold: u32, opts: SearchOptions) -> Result<MaxSet> {
    if weight == 0 || weight > n_t {
        return Err(Error::InvalidProblem(format!("weight {weight} outside 1..={n_t}")));
    }
    if threshold < 4 || threshold % 2 == 1 {
        return Err(Error::InvalidProblem(format!(
            "threshold {threshold} must be even and >= 4"
        )));
    }
    let nodes = binomial(n_t, weight);
    if nodes > opts.node_budget as u128 {
        return Err(Error::BudgetExceeded {
            nodes: nodes as usize,
            budget: opts.node_budget,
        });
    }
    let mut memo = HashMap::new();
    search(n_t, weight, threshold, opts, &mut memo)
}

fn closed_form_bound(n_t: usize, weight: usize, threshold: u32) -> Option<usize> {
    match threshold {
        4 => Some(distance4_bound(n_t, weight) as usize),
        6 => Some(distance6_bound(n_t, weight) as usize),
        _ => None,
    }
}

fn exact_cached(
    n_t: usize,
    weight: usize,
    threshold: u32,
    opts: SearchOptions,
    memo: &mut HashMap<(usize, usize), usize>,
) -> Result<usize> {
    if weight == 0 || weight >= n_t || threshold > 2 * weight.min(n_t - weight) as u32 {
        return Ok(1);
    }
    if let Some(&v) = memo.get(&(n_t, weight)) {
        return Ok(v);
    }
    let v = search(n_t, weight, threshold, opts, memo)?.size;
    memo.insert((n_t, weight), v);
    Ok(v)
}

fn search(
    n_t: usize,
    weight: usize,
    threshold: u32,
    opts: SearchOptions,
    memo: &mut HashMap<(usize, usize), usize>,
) -> Result<MaxSet> {
    let class = enumerate_weight_class(n_t, weight)?;
    let mut ceilings = Vec::new();
    if opts.use_ceilings {
        ceilings.extend(closed_form_bound(n_t, weight, threshold));
    }
    if opts.use_recursive_bound && weight >= 2 && weight < n_t {
        let fewer_ones = exact_cached(n_t - 1, weight - 1, threshold, opts, memo)?;
        ceilings.push(n_t * fewer_ones / weight);
        let fewer_zeros = exact_cached(n_t - 1, weight, threshold, opts, memo)?;
        ceilings.push(n_t * fewer_zeros / (n_t - weight));
    }
    let ceiling = ceilings.into_iter().min().map(|c| c.max(1));
    let graph = Graph::from_predicate(class.len(), |u, v| class[u].distance(&class[v]) >= threshold);
    // A set as large as a proven ceiling is maximum; try to construct one first.
    if let Some(c) = ceiling.filter(|&c| c > 1) {
        let seed = (n_t as u64) << 32 | (weight as u64) << 16 | threshold as u64;
        if let Some(set) = find_clique_of_size(&graph, c, seed, TABU_MOVES) {
            return Ok(MaxSet {
                size: c,
                witness: set.iter().map(|&v| class[v]).collect(),
                ceiling,
                search_nodes: 0,
            });
        }
    }
    // Every weight class is vertex-transitive under antenna permutations,
    // so some maximum set contains the first pattern.
    let found = max_clique(
        &graph,
        CliqueOptions {
            ceiling,
            anchor: Some(0),
        },
    );
    Ok(MaxSet {
        size: found.vertices.len(),
        witness: found.vertices.iter().map(|&v| class[v]).collect(),
        ceiling,
        search_nodes: found.nodes,
    })
}

/// Certification that no fixed-weight alphabet of `2^m` symbols reaches
/// distance 4.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinDistanceCertificate {
    pub n_t: usize,
    pub m: u32,
    pub weight: usize,
    pub alphabet_size: u64,
    /// Largest distance-4 subset of the weight class.
    pub max_distance4_set: usize,
    pub certified: bool,
}

/// Certifies that every `2^m`-symbol fixed-weight alphabet of `N_T`
/// antennas has minimum distance exactly 2.
pub fn certify_min_distance(n_t: usize, m: u32, opts: SearchOptions) -> Result<MinDistanceCertificate> {
    let weight = choose_gssk_nt(n_t, m)?;
    let alphabet_size = 1u64 << m;
    let max_distance4_set = if alphabet_size < 2 {
        return Err(Error::InvalidProblem("need at least two symbols".into()));
    } else if weight == 1 || n_t - weight == 1 {
        // All distinct pairs are at distance exactly 2.
        1
    } else {
        max_set_with_min_distance(n_t, weight, 4, opts)?.size
    };
    Ok(MinDistanceCertificate {
        n_t,
        m,
        weight,
        alphabet_size,
        max_distance4_set,
        certified: (max_distance4_set as u64) < alphabet_size,
    })
}

/// Exact set sizes against the closed-form bounds for one weight class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub n_t: usize,
    pub weight: usize,
    pub class_size: u128,
    pub exact4: usize,
    pub bound4: u128,
    pub exact6: usize,
    pub bound6: u128,
}

impl BoundReport {
    /// Exact distance-4 size as a fraction of the class size.
    pub fn density4(&self) -> f64 {
        self.exact4 as f64 / self.class_size as f64
    }

    pub fn tight4(&self) -> bool {
        self.exact4 as u128 == self.bound4
    }

    pub fn tight6(&self) -> bool {
        self.exact6 as u128 == self.bound6
    }
}

fn exact_size(n_t: usize, weight: usize, threshold: u32, opts: SearchOptions) -> Result<usize> {
    // Distances inside a class never exceed 2 min(n, N - n).
    if threshold > 2 * weight.min(n_t - weight) as u32 {
        return Ok(1);
    }
    Ok(max_set_with_min_distance(n_t, weight, threshold, opts)?.size)
}

/// Computes exact distance-4 and distance-6 sizes and checks them against
/// the closed-form bounds. A violation is reported as a counterexample.
/// The closed-form bounds are never used to stop these searches.
pub fn check_distance_bounds(n_t: usize, weight: usize, opts: SearchOptions) -> Result<BoundReport> {
    let opts = SearchOptions {
        use_ceilings: false,
        ..opts
    };
    if weight == 0 || weight >= n_t {
        return Err(Error::InvalidProblem(format!("weight {weight} outside 1..{n_t}")));
    }
    let report = BoundReport {
        n_t,
        weight,
        class_size: binomial(n_t, weight),
        exact4: exact_size(n_t, weight, 4, opts)?,
        bound4: distance4_bound(n_t, weight),
        exact6: exact_size(n_t, weight, 6, opts)?,
        bound6: distance6_bound(n_t, weight),
    };
    if report.exact4 as u128 > report.bound4.max(1) || report.exact6 as u128 > report.bound6.max(1) {
        return Err(Error::Counterexample(format!("{report:?}")));
    }
    Ok(report)
}

/// CSV rows `n_t,weight,class_size,exact4,bound4,exact6,bound6`.
pub fn bounds_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from("n_t,weight,class_size,exact4,bound4,exact6,bound6\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n_t, r.weight, r.class_size, r.exact4, r.bound4, r.exact6, r.bound6
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> BinarySymbol {
        s.parse().unwrap()
    }

    #[test]
    fn even_distances_small_cases() {
        let r = check_even_distances(5, 2).unwrap();
        assert_eq!(r.pairs, 45);
        assert_eq!(r.histogram.keys().copied().collect::<Vec<_>>(), vec![2, 4]);
        let r = check_even_distances(6, 1).unwrap();
        assert_eq!(r.histogram.keys().copied().collect::<Vec<_>>(), vec![2]);
        let r = check_even_distances(8, 4).unwrap();
        assert_eq!(r.histogram.keys().copied().collect::<Vec<_>>(), vec![2, 4, 6, 8]);
    }

    #[test]
    fn five_choose_two_distance4() {
        let r = max_set_with_min_distance(5, 2, 4, SearchOptions::default()).unwrap();
        assert_eq!(r.size, 2);
        assert_eq!(r.witness[0].distance(&r.witness[1]), 4);
        let exact = max_set_with_min_distance(
            5,
            2,
            4,
            SearchOptions {
                use_ceilings: false,
                use_recursive_bound: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(exact.size, 2);
        assert!(sym("11000").distance(&sym("00110")) == 4);
    }

    #[test]
    fn distance6_cases() {
        assert_eq!(
            max_set_with_min_distance(5, 2, 6, SearchOptions::default())
                .unwrap()
                .size,
            1
        );
        assert_eq!(
            max_set_with_min_distance(7, 3, 6, SearchOptions::default())
                .unwrap()
                .size,
            2
        );
        assert_eq!(distance6_bound(7, 3), 2);
    }

    #[test]
    fn budget_and_argument_errors() {
        let tight = SearchOptions {
            node_budget: 100,
            ..Default::default()
        };
        assert!(matches!(
            max_set_with_min_distance(10, 5, 4, tight),
            Err(Error::BudgetExceeded { nodes: 252, .. })
        ));
        assert!(max_set_with_min_distance(5, 2, 3, SearchOptions::default()).is_err());
    }

    #[test]
    fn certificates() {
        let c = certify_min_distance(5, 3, SearchOptions::default()).unwrap();
        assert_eq!((c.weight, c.max_distance4_set, c.certified), (2, 2, true));
        let c = certify_min_distance(4, 2, SearchOptions::default()).unwrap();
        assert!(c.certified && c.weight == 1);
    }

    #[test]
    fn known_exact_sizes_without_ceilings() {
        let raw = SearchOptions {
            use_ceilings: false,
            use_recursive_bound: false,
            ..Default::default()
        };
        for (n, w, t, want) in [(6, 3, 4, 4), (8, 3, 4, 8), (8, 4, 4, 14), (7, 3, 4, 7)] {
            assert_eq!(
                max_set_with_min_distance(n, w, t, raw).unwrap().size,
                want,
                "({n},{w},{t})"
            );
        }
    }

    #[test]
    fn bound_report() {
        let r = check_distance_bounds(6, 3, SearchOptions::default()).unwrap();
        assert_eq!(r.bound4, 5);
        assert!(r.exact4 <= 5);
        assert!(bounds_csv(&[r]).starts_with("n_t,weight"));
    }
}
