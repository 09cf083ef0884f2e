//! Shared test oracles: independent reference implementations that the
//! optimized estimators are checked against. These deliberately take the
//! slow, literal route (hash-map tuple enumeration, exhaustive search) and
//! share no code with the library paths they verify.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spillnet::encode::SymbolSeries;

pub fn uniform_symbols(n: usize, alphabet: u8, seed: u64) -> SymbolSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols = (0..n).map(|_| rng.random_range(1..=alphabet)).collect();
    SymbolSeries::from_symbols(symbols, alphabet).unwrap()
}

/// Transfer entropy by direct tuple enumeration: collect every observed
/// (z_{t+1}, z-history, y-history) tuple, estimate the probabilities by
/// relative frequency, and sum p * log2(p(z+|zh,yh) / p(z+|zh)) term by
/// term.
pub fn naive_te(source: &[u8], target: &[u8], k: usize, l: usize) -> f64 {
    assert_eq!(source.len(), target.len());
    let len = target.len();
    let offset = k.max(l);
    assert!(len >= offset + 2);

    type Hist = Vec<u8>;
    let mut c_full: HashMap<(u8, Hist, Hist), f64> = HashMap::new();
    let mut c_zh_yh: HashMap<(Hist, Hist), f64> = HashMap::new();
    let mut c_zn_zh: HashMap<(u8, Hist), f64> = HashMap::new();
    let mut c_zh: HashMap<Hist, f64> = HashMap::new();
    let mut n = 0.0;
    for t in (offset - 1)..(len - 1) {
        let zh: Hist = (0..k).map(|j| target[t - j]).collect();
        let yh: Hist = (0..l).map(|j| source[t - j]).collect();
        let zn = target[t + 1];
        *c_full.entry((zn, zh.clone(), yh.clone())).or_insert(0.0) += 1.0;
        *c_zh_yh.entry((zh.clone(), yh)).or_insert(0.0) += 1.0;
        *c_zn_zh.entry((zn, zh.clone())).or_insert(0.0) += 1.0;
        *c_zh.entry(zh).or_insert(0.0) += 1.0;
        n += 1.0;
    }

    let mut te = 0.0;
    for ((zn, zh, yh), c) in &c_full {
        let p = c / n;
        let p_given_both = c / c_zh_yh[&(zh.clone(), yh.clone())];
        let p_given_zh = c_zn_zh[&(*zn, zh.clone())] / c_zh[zh];
        te += p * (p_given_both / p_given_zh).log2();
    }
    te
}

/// Exhaustive maximum-arborescence search for tiny graphs: try every parent
/// assignment over positive edges and keep the acyclic spanning one with the
/// largest total weight.
pub fn exhaustive_max_arborescence(w: &DMatrix<f64>, root: usize) -> Option<f64> {
    let n = w.nrows();
    let vertices: Vec<usize> = (0..n).filter(|&v| v != root).collect();
    let choices: Vec<Vec<usize>> = vertices
        .iter()
        .map(|&v| (0..n).filter(|&u| u != v && w[(u, v)] > 0.0).collect())
        .collect();
    if choices.iter().any(|c: &Vec<usize>| c.is_empty()) {
        return None;
    }

    let mut best: Option<f64> = None;
    let mut assignment = vec![0usize; vertices.len()];
    loop {
        // parent map for this assignment
        let mut parent = vec![usize::MAX; n];
        for (slot, &v) in vertices.iter().enumerate() {
            parent[v] = choices[slot][assignment[slot]];
        }
        // valid iff every vertex reaches the root through parents
        let mut ok = true;
        for &v in &vertices {
            let mut cur = v;
            let mut hops = 0;
            while cur != root {
                cur = parent[cur];
                hops += 1;
                if hops > n {
                    ok = false;
                    break;
                }
            }
            if !ok {
                break;
            }
        }
        if ok {
            let total: f64 = vertices.iter().map(|&v| w[(parent[v], v)]).sum();
            best = Some(best.map_or(total, |b: f64| b.max(total)));
        }

        // advance the odometer
        let mut slot = 0;
        loop {
            if slot == assignment.len() {
                return best;
            }
            assignment[slot] += 1;
            if assignment[slot] < choices[slot].len() {
                break;
            }
            assignment[slot] = 0;
            slot += 1;
        }
    }
}

/// Largest eigenvalue magnitude, straight from the full eigendecomposition.
pub fn eigen_spectral_radius(w: &DMatrix<f64>) -> f64 {
    w.complex_eigenvalues()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}
