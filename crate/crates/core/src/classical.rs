//! Road-colored deterministic automata: each color `c` is a map
//! `γ(·, c): S → S` drawn with probability `ν(c)`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{subdominant_modulus, KrausChannel};
use crate::tensor::{basis_vector, c64, ComplexMatrix};

/// Largest number of words `|C|ⁿ` the enumeration oracle will visit.
pub const ENUMERATION_MAX: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub struct RoadColoring {
    states: Vec<String>,
    colors: Vec<String>,
    /// `gamma[c][s]`
    gamma: Vec<Vec<usize>>,
    nu: Vec<f64>,
}

impl RoadColoring {
    pub fn new(states: Vec<String>, colors: Vec<String>, gamma: Vec<Vec<usize>>, nu: Vec<f64>) -> Result<Self> {
        let n = states.len();
        if n == 0 || colors.is_empty() {
            return Err(Error::InvalidColoring("need at least one state and one color".into()));
        }
        if gamma.len() != colors.len() || nu.len() != colors.len() {
            return Err(Error::InvalidColoring("gamma and nu must have one entry per color".into()));
        }
        for (c, row) in gamma.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidColoring(format!("color {:?} maps {} of {n} states", colors[c], row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&t| t >= n) {
                return Err(Error::InvalidColoring(format!("color {:?} targets state index {bad}", colors[c])));
            }
        }
        if nu.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidColoring("negative or non-finite color probability".into()));
        }
        let total: f64 = nu.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidColoring(format!("color probabilities sum to {total}")));
        }
        let unique: BTreeSet<&String> = colors.iter().collect();
        if unique.len() != colors.len() {
            return Err(Error::InvalidColoring("duplicate color label".into()));
        }
        Ok(Self { states, colors, gamma, nu })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn colors(&self) -> &[String] {
        &self.colors
    }

    pub fn gamma(&self) -> &[Vec<usize>] {
        &self.gamma
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn color_index(&self, label: &str) -> Result<usize> {
        self.colors
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownColor(label.to_string()))
    }

    /// Image of a set of states under one color.
    fn step_set(&self, set: &[usize], color: usize) -> Vec<usize> {
        let image: BTreeSet<usize> = set.iter().map(|&s| self.gamma[color][s]).collect();
        image.into_iter().collect()
    }
}

/// `T[s][s'] = Σ_{c: γ(s,c) = s'} ν(c)`.
pub fn stochastic_matrix(rc: &RoadColoring) -> ComplexMatrix {
    let n = rc.num_states();
    let mut t = ComplexMatrix::zeros(n, n);
    for (row, &p) in rc.gamma.iter().zip(&rc.nu) {
        for (s, &target) in row.iter().enumerate() {
            t[(s, target)] += c64(p, 0.0);
        }
    }
    t
}

fn real_rows(m: &ComplexMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect()
}

/// `γ̂((s, s'), c) = (γ(s, c), γ(s', c))` on states indexed `s·|S| + s'`.
pub fn graph_product(rc: &RoadColoring) -> RoadColoring {
    let n = rc.num_states();
    let states = rc
        .states
        .iter()
        .flat_map(|a| rc.states.iter().map(move |b| format!("({a},{b})")))
        .collect();
    let gamma = rc
        .gamma
        .iter()
        .map(|row| (0..n * n).map(|ij| row[ij / n] * n + row[ij % n]).collect())
        .collect();
    RoadColoring { states, colors: rc.colors.clone(), gamma, nu: rc.nu.clone() }
}

/// Whether every start state ends in the same state. The empty word
/// synchronizes only a single-state automaton.
pub fn is_synchronizing_word(rc: &RoadColoring, word: &[&str]) -> Result<bool> {
    let indices = word.iter().map(|c| rc.color_index(c)).collect::<Result<Vec<_>>>()?;
    Ok(synchronizes(rc, &indices))
}

fn synchronizes(rc: &RoadColoring, word: &[usize]) -> bool {
    let mut set: Vec<usize> = (0..rc.num_states()).collect();
    for &c in word {
        set = rc.step_set(&set, c);
    }
    set.len() == 1
}

/// Probability that an i.i.d. `ν` word of length `n` does not synchronize,
/// by propagating the law of the image of `S` through the subset automaton.
pub fn nonsync_probability(rc: &RoadColoring, n: usize) -> f64 {
    nonsync_series(rc, n)[n]
}

/// `nonsync_probability` for every horizon `0..=n_max`.
pub fn nonsync_series(rc: &RoadColoring, n_max: usize) -> Vec<f64> {
    let mut law: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    law.insert((0..rc.num_states()).collect(), 1.0);
    let mass = |law: &BTreeMap<Vec<usize>, f64>| law.iter().filter(|(s, _)| s.len() > 1).map(|(_, p)| p).sum();
    let mut out = vec![mass(&law)];
    for _ in 0..n_max {
        let mut next = BTreeMap::new();
        for (set, p) in &law {
            // singletons are absorbing for the question asked
            if set.len() == 1 {
                *next.entry(set.clone()).or_insert(0.0) += p;
                continue;
            }
            for (c, &q) in rc.nu.iter().enumerate() {
                if q > 0.0 {
                    *next.entry(rc.step_set(set, c)).or_insert(0.0) += p * q;
                }
            }
        }
        law = next;
        out.push(mass(&law));
    }
    out
}

/// Sum of the `ν`-weights of all non-synchronizing words of length `n`.
pub fn nonsync_enumeration_oracle(rc: &RoadColoring, n: usize) -> Result<f64> {
    let k = rc.colors.len();
    if (k as f64).powi(n as i32) > ENUMERATION_MAX {
        return Err(Error::HorizonTooLarge(format!("{k}^{n} words exceed {ENUMERATION_MAX:e}")));
    }
    let mut word = vec![0usize; n];
    let mut total = 0.0;
    loop {
        if !synchronizes(rc, &word) {
            total += word.iter().map(|&c| rc.nu[c]).product::<f64>();
        }
        // odometer increment
        let mut i = 0;
        while i < n {
            word[i] += 1;
            if word[i] < k {
                break;
            }
            word[i] = 0;
            i += 1;
        }
        if i == n {
            return Ok(total);
        }
    }
}

/// Whether some word synchronizes, by reachability of a singleton in the
/// subset automaton.
pub fn is_synchronizable(rc: &RoadColoring) -> bool {
    let start: Vec<usize> = (0..rc.num_states()).collect();
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(set) = queue.pop_front() {
        if set.len() == 1 {
            return true;
        }
        for c in (0..rc.colors.len()).filter(|&c| rc.nu[c] > 0.0) {
            let image = rc.step_set(&set, c);
            if seen.insert(image.clone()) {
                queue.push_back(image);
            }
        }
    }
    false
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Rate `1/2 + √2/6` of the three-state example.
pub fn three_state_rate() -> f64 {
    0.5 + 2f64.sqrt() / 6.0
}

/// Closed-form non-synchronization sum for the three-state coloring
/// (colors with probabilities `1/3`, `1/2`, `1/6`, the middle one the
/// identity) and the comparison value `2·(1/2 + √2/6)ⁿ`.
///
/// `Σ_k C(n,k) (1/2)^{n−k} c_k` with `c₀ = 1`, `c_k = 2·(1/18)^{k/2}` for even
/// `k > 0` and `c_k = (1/2)·(1/18)^{(k−1)/2}` for odd `k`.
pub fn alternating_sum_bound(n: usize) -> (f64, f64) {
    let q: f64 = 1.0 / 18.0;
    let sum = (0..=n)
        .map(|k| {
            let c = if k == 0 {
                1.0
            } else if k % 2 == 0 {
                2.0 * q.powi(k as i32 / 2)
            } else {
                0.5 * q.powi((k as i32 - 1) / 2)
            };
            binomial(n, k) * 0.5f64.powi((n - k) as i32) * c
        })
        .sum();
    (sum, 2.0 * three_state_rate().powi(n as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumComparison {
    pub n: usize,
    pub binomial_sum: f64,
    pub closed_form: f64,
    pub holds: bool,
}

/// Row-by-row comparison of the two sides of [`alternating_sum_bound`].
pub fn alternating_sum_report(n_max: usize) -> Vec<SumComparison> {
    (0..=n_max)
        .map(|n| {
            let (binomial_sum, closed_form) = alternating_sum_bound(n);
            SumComparison { n, binomial_sum, closed_form, holds: binomial_sum <= closed_form }
        })
        .collect()
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = b.len();
    let m = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..m).map(|j| (0..n).map(|k| row[k] * b[k][j]).sum()).collect())
        .collect()
}

fn identity_rows(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// `2·max_{(s,s')} P[pair chain off the diagonal after n steps]`.
pub fn classical_mixing_bound(rc: &RoadColoring, n: usize) -> f64 {
    classical_mixing_series(rc, n)[n]
}

/// [`classical_mixing_bound`] for every horizon `0..=n_max`.
pub fn classical_mixing_series(rc: &RoadColoring, n_max: usize) -> Vec<f64> {
    let s = rc.num_states();
    let pair = real_rows(&stochastic_matrix(&graph_product(rc)));
    let mut power = identity_rows(s * s);
    let mut out = Vec::with_capacity(n_max + 1);
    for step in 0..=n_max {
        if step > 0 {
            power = mat_mul(&power, &pair);
        }
        let worst = power
            .iter()
            .map(|row| 1.0 - (0..s).map(|i| row[i * s + i]).sum::<f64>())
            .fold(0.0, f64::max);
        out.push(2.0 * worst.clamp(0.0, 1.0));
    }
    out
}

/// `max_{s,s'} ‖δ_s Tⁿ − δ_{s'} Tⁿ‖₁` by direct matrix powers.
pub fn max_pair_distance(rc: &RoadColoring, n: usize) -> f64 {
    let t = real_rows(&stochastic_matrix(rc));
    let mut power = identity_rows(t.len());
    for _ in 0..n {
        power = mat_mul(&power, &t);
    }
    let mut worst = 0.0_f64;
    for a in &power {
        for b in &power {
            worst = worst.max(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum());
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct SyncReport {
    pub horizon: usize,
    /// Non-synchronization probability for `n = 0..=horizon`.
    pub exact_nonsync: Vec<f64>,
    /// `2·rateⁿ`
    pub closed_form: Vec<f64>,
    /// Subdominant eigenvalue modulus of the stochastic matrix.
    pub rate: f64,
    pub synchronizable: bool,
}

pub fn sync_report(rc: &RoadColoring, horizon: usize) -> SyncReport {
    let rate = subdominant_modulus(&stochastic_matrix(rc)).clamp(0.0, 1.0);
    SyncReport {
        horizon,
        exact_nonsync: nonsync_series(rc, horizon),
        closed_form: (0..=horizon).map(|n| 2.0 * rate.powi(n as i32)).collect(),
        rate,
        synchronizable: is_synchronizable(rc),
    }
}

/// Heisenberg channel of one color map, Kraus operators `|γ(s)⟩⟨s|`.
pub fn color_channel(rc: &RoadColoring, color: usize) -> KrausChannel {
    let n = rc.num_states();
    let kraus = (0..n)
        .map(|s| basis_vector(n, rc.gamma[color][s]) * basis_vector(n, s).transpose())
        .collect();
    KrausChannel::new(kraus).expect("deterministic maps are unital")
}

/// `T` as a channel: the `ν`-mixture of the color channels.
pub fn coloring_channel(rc: &RoadColoring) -> KrausChannel {
    let kraus = (0..rc.colors.len())
        .filter(|&c| rc.nu[c] > 0.0)
        .flat_map(|c| color_channel(rc, c).kraus().iter().map(|k| k.scale(rc.nu[c].sqrt())).collect::<Vec<_>>())
        .collect();
    KrausChannel::new(kraus).expect("mixture of unital maps")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::{coupling_from_convex, diagonal_restriction};
    use crate::fixtures::three_state_coloring;
    use crate::random::rng;

    fn random_coloring(seed: u64) -> RoadColoring {
        crate::random::random_coloring(&mut rng(seed), 3, 3)
    }

    fn single_color(gamma: Vec<usize>) -> RoadColoring {
        let states = (0..gamma.len()).map(|i| i.to_string()).collect();
        RoadColoring::new(states, vec!["x".into()], vec![gamma], vec![1.0]).unwrap()
    }

    #[test]
    fn rejects_invalid_colorings() {
        let s = vec!["a".to_string(), "b".to_string()];
        let c = vec!["x".to_string()];
        assert!(RoadColoring::new(s.clone(), c.clone(), vec![vec![0, 2]], vec![1.0]).is_err());
        assert!(RoadColoring::new(s.clone(), c.clone(), vec![vec![0, 1]], vec![0.9]).is_err());
        assert!(RoadColoring::new(s.clone(), c.clone(), vec![vec![0]], vec![1.0]).is_err());
        assert!(RoadColoring::new(s, vec!["x".into(), "x".into()], vec![vec![0, 1]; 2], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn three_state_transition_matrix() {
        let t = stochastic_matrix(&three_state_coloring());
        let expected = [[5. / 6., 1. / 6., 0.], [1. / 3., 0.5, 1. / 6.], [0., 1. / 3., 2. / 3.]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((t[(i, j)].re - expected[i][j]).abs() < 1e-15);
            }
        }
        let rate = subdominant_modulus(&t);
        assert!((rate - three_state_rate()).abs() < 1e-12);
    }

    #[test]
    fn trivial_transition_matrices() {
        let t = stochastic_matrix(&single_color(vec![0, 1, 2]));
        assert_eq!(t, ComplexMatrix::identity(3, 3));
        let t = stochastic_matrix(&single_color(vec![0]));
        assert_eq!(t, ComplexMatrix::identity(1, 1));
    }

    #[test]
    fn graph_products() {
        let rc = three_state_coloring();
        let g = graph_product(&rc);
        assert_eq!(g.num_states(), 9);
        assert_eq!(g.states()[5], "(2,3)");
        // red sends (s2, s3) to (s1, s2)
        assert_eq!(g.gamma()[0][5], 1);
        for c in 0..3 {
            for s in 0..3 {
                let t = g.gamma()[c][s * 3 + s];
                assert_eq!(t / 3, t % 3);
            }
        }
        let id = graph_product(&single_color(vec![0, 1]));
        assert_eq!(id.gamma()[0], vec![0, 1, 2, 3]);

        for rc in [three_state_coloring(), random_coloring(1), random_coloring(2)] {
            let t = real_rows(&stochastic_matrix(&rc));
            let p = real_rows(&stochastic_matrix(&graph_product(&rc)));
            let n = rc.num_states();
            for (a, b) in (0..n).flat_map(|a| (0..n).map(move |b| (a, b))) {
                for target in 0..n {
                    let first: f64 = (0..n).map(|x| p[a * n + b][target * n + x]).sum();
                    let second: f64 = (0..n).map(|x| p[a * n + b][x * n + target]).sum();
                    assert!((first - t[a][target]).abs() < 1e-14);
                    assert!((second - t[b][target]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn synchronizing_words() {
        let rc = three_state_coloring();
        assert!(is_synchronizing_word(&rc, &["r", "r"]).unwrap());
        assert!(!is_synchronizing_word(&rc, &["g"; 7]).unwrap());
        assert!(is_synchronizing_word(&rc, &["b", "g", "g", "b"]).unwrap());
        assert!(!is_synchronizing_word(&rc, &["r", "g", "b", "r"]).unwrap());
        assert!(matches!(is_synchronizing_word(&rc, &["x"]), Err(Error::UnknownColor(_))));
        let single = single_color(vec![0]);
        assert!(is_synchronizing_word(&single, &["x", "x"]).unwrap());
        assert!(is_synchronizing_word(&single, &[]).unwrap());
    }

    #[test]
    fn three_state_nonsync_values() {
        let rc = three_state_coloring();
        assert_eq!(nonsync_probability(&rc, 0), 1.0);
        assert!((nonsync_probability(&rc, 1) - 1.0).abs() < 1e-15);
        assert!((nonsync_probability(&rc, 2) - 31. / 36.).abs() < 1e-12);
        assert!((nonsync_probability(&rc, 3) - 25. / 36.).abs() < 1e-12);
        assert!((nonsync_enumeration_oracle(&rc, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((nonsync_enumeration_oracle(&rc, 2).unwrap() - 31. / 36.).abs() < 1e-12);
        assert!((nonsync_enumeration_oracle(&rc, 3).unwrap() - 25. / 36.).abs() < 1e-12);
    }

    #[test]
    fn subset_construction_matches_enumeration() {
        let mut cases = vec![three_state_coloring()];
        cases.extend((0..20).map(|s| random_coloring(500 + s)));
        for rc in cases {
            let series = nonsync_series(&rc, 10);
            for (n, p) in series.iter().enumerate() {
                assert!((p - nonsync_enumeration_oracle(&rc, n).unwrap()).abs() < 1e-12);
            }
            assert!(series.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        }
    }

    #[test]
    fn enumeration_guard() {
        let rc = three_state_coloring();
        assert!(matches!(nonsync_enumeration_oracle(&rc, 15), Err(Error::HorizonTooLarge(_))));
    }

    #[test]
    fn alternating_sum_is_exact_for_three_states() {
        let (s2, c2) = alternating_sum_bound(2);
        assert!((s2 - 31. / 36.).abs() < 1e-14);
        assert!((c2 - 2.0 * three_state_rate().powi(2)).abs() < 1e-14);
        assert!(c2 >= s2);
        assert!((alternating_sum_bound(3).0 - 25. / 36.).abs() < 1e-14);
        let series = nonsync_series(&three_state_coloring(), 12);
        for (n, p) in series.iter().enumerate() {
            assert!((alternating_sum_bound(n).0 - p).abs() < 1e-12, "n = {n}");
        }
        assert!(alternating_sum_report(7).iter().skip(2).all(|row| row.holds));
    }

    #[test]
    fn synchronizability() {
        let rc = three_state_coloring();
        assert!(is_synchronizable(&rc));
        assert!(nonsync_probability(&rc, 200) < 1e-12);
        let perm = single_color(vec![1, 2, 0]);
        assert!(!is_synchronizable(&perm));
        assert_eq!(nonsync_probability(&perm, 50), 1.0);
        for s in 0..20 {
            let rc = random_coloring(600 + s);
            // a shortest synchronizing word on 3 states has length at most 4
            let tail = nonsync_probability(&rc, 8);
            assert_eq!(is_synchronizable(&rc), tail < 1.0 - 1e-9, "seed {s}");
        }
    }

    #[test]
    fn mixing_bounds() {
        let rc = three_state_coloring();
        assert_eq!(classical_mixing_bound(&rc, 0), 2.0);
        let bounds = classical_mixing_series(&rc, 20);
        for n in 2..=7 {
            assert!(bounds[n] <= 4.0 * three_state_rate().powi(n as i32));
        }
        for s in 0..5 {
            let other = random_coloring(700 + s);
            let ob = classical_mixing_series(&other, 20);
            for n in 0..=20 {
                assert!(max_pair_distance(&other, n) <= ob[n] + 1e-12);
            }
        }
        for n in 0..=20 {
            assert!(max_pair_distance(&rc, n) <= bounds[n] + 1e-12);
        }
    }

    #[test]
    fn sync_reports() {
        let report = sync_report(&three_state_coloring(), 10);
        assert_eq!(report.exact_nonsync.len(), 11);
        assert!((report.rate - three_state_rate()).abs() < 1e-12);
        assert!(report.synchronizable);
        assert!(report.exact_nonsync.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn color_decomposition_gives_graph_product() {
        let rc = three_state_coloring();
        let t = coloring_channel(&rc);
        let p = diagonal_restriction(&t);
        let st = real_rows(&stochastic_matrix(&rc));
        assert!(p.iter().flatten().zip(st.iter().flatten()).all(|(a, b)| (a - b).abs() < 1e-14));

        let parts: Vec<_> = (0..3)
            .map(|c| (rc.nu()[c], color_channel(&rc, c), color_channel(&rc, c)))
            .collect();
        let hat = coupling_from_convex(&parts).unwrap();
        assert!(crate::diagonal::is_channel_coupling(&hat, &t).unwrap());
        let restricted = diagonal_restriction(&hat);
        let product = real_rows(&stochastic_matrix(&graph_product(&rc)));
        assert!(restricted.iter().flatten().zip(product.iter().flatten()).all(|(a, b)| (a - b).abs() < 1e-14));
    }
}
