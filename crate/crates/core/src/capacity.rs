//! Channel capacity: Blahut–Arimoto prior optimization and the analytic
//! bounds used to sandwich the capacities of the modelled theories.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::{self, BipartiteMeasurement, BipartiteState, EPS_EXACT};
use crate::hadamard::{self, BitString};
use crate::protocols;
use crate::sampling;
use crate::theory::TheoryConfig;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Result of maximizing `I(X:Y)` over the input prior of a fixed channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    /// Mutual information at `optimal_prior`; never above the true capacity.
    pub capacity_bits: f64,
    /// `max_x D(p(.|x) || q)` at the last iterate; never below the capacity.
    pub upper_bound_bits: f64,
    pub optimal_prior: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Divergences `D(p(.|x) || q)` of every row from the output distribution
/// induced by `prior`, with the lower estimate `sum_x p(x) D(x)` and the
/// upper estimate `max_x D(x)`.
struct Evaluator<'a> {
    conditional: &'a [Vec<f64>],
    // sum_y w log2 w per row; D(x) subtracts sum_y w log2 q(y)
    row_terms: Vec<f64>,
    log_q: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(conditional: &'a [Vec<f64>]) -> Self {
        let row_terms = conditional
            .iter()
            .map(|row| row.iter().filter(|&&w| w > 0.0).map(|&w| w * w.log2()).sum())
            .collect();
        Evaluator { conditional, row_terms, log_q: vec![0.0; conditional[0].len()] }
    }

    fn eval(&mut self, prior: &[f64], divergences: &mut [f64]) -> (f64, f64) {
        let q = gpt::output_distribution(prior, self.conditional);
        for (l, &qy) in self.log_q.iter_mut().zip(&q) {
            *l = if qy > 0.0 { qy.log2() } else { 0.0 };
        }
        for ((d, row), &fixed) in divergences.iter_mut().zip(self.conditional).zip(&self.row_terms) {
            let cross: f64 = row
                .iter()
                .zip(&self.log_q)
                .filter(|(&w, _)| w > 0.0)
                .map(|(&w, &l)| w * l)
                .sum();
            *d = fixed - cross;
        }
        let lower = prior.iter().zip(divergences.iter()).map(|(p, d)| p * d).sum();
        let upper = divergences.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lower, upper)
    }
}

/// `p(x) <- p(x) 2^(step D(x))`, normalized. `step = 1` is the classical
/// update.
fn reweight(prior: &[f64], divergences: &[f64], upper: f64, step: f64, out: &mut [f64]) {
    let mut total = 0.0;
    for ((o, p), d) in out.iter_mut().zip(prior).zip(divergences) {
        // shift by the max exponent so 2^d never overflows
        *o = p * (step * (d - upper)).exp2();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

const MAX_STEP: f64 = 16.0;

/// Blahut–Arimoto iteration on a row-stochastic `conditional` (rows are
/// inputs). Stops once the gap between the upper and lower capacity
/// estimates falls below `tol`; if `max_iter` is hit first the best iterate
/// is returned with `converged = false`.
///
/// The multiplicative update is over-relaxed (`p 2^(s D)` with `s >= 1`);
/// `s` doubles after each step that raises the lower estimate and resets to
/// the classical `s = 1` otherwise, so the lower estimate never decreases.
/// The reported upper estimate is the smallest seen over all iterates, each
/// of which bounds the capacity from above.
pub fn blahut_arimoto(conditional: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<CapacityResult> {
    gpt::validate_conditional(conditional)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let k = conditional.len();
    let mut ev = Evaluator::new(conditional);
    let mut prior = vec![1.0 / k as f64; k];
    let mut divergences = vec![0.0; k];
    let (mut lower, mut upper) = ev.eval(&prior, &mut divergences);
    let mut best_upper = upper;
    let mut candidate = vec![0.0; k];
    let mut cand_div = vec![0.0; k];
    let mut step = 1.0;
    let mut iterations = 0;
    loop {
        let converged = best_upper - lower < tol;
        if converged || iterations >= max_iter {
            return Ok(CapacityResult {
                capacity_bits: lower.max(0.0),
                upper_bound_bits: best_upper.max(0.0),
                optimal_prior: prior,
                iterations,
                converged,
            });
        }
        reweight(&prior, &divergences, upper, step, &mut candidate);
        let (cand_lower, cand_upper) = ev.eval(&candidate, &mut cand_div);
        iterations += 1;
        best_upper = best_upper.min(cand_upper);
        if step > 1.0 && cand_lower < lower {
            step = 1.0;
            continue;
        }
        std::mem::swap(&mut prior, &mut candidate);
        std::mem::swap(&mut divergences, &mut cand_div);
        lower = cand_lower;
        upper = cand_upper;
        step = (step * 2.0).min(MAX_STEP);
    }
}

/// [`blahut_arimoto`] with the default tolerance and iteration cap.
pub fn channel_capacity(conditional: &[Vec<f64>]) -> Result<CapacityResult> {
    blahut_arimoto(conditional, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

/// Settings used inside randomized searches: every iterate is a valid lower
/// bound, so a looser stop keeps sweeps fast without overstating anything.
pub(crate) fn search_capacity(conditional: &[Vec<f64>]) -> Result<CapacityResult> {
    blahut_arimoto(conditional, 1e-8, 20_000)
}

/// Upper bound `log2(1 + M R)` on the classical capacity of a theory whose
/// effects are `gamma (1, m)` with `|m| <= M` and whose states are `(1, r)`
/// with `|r| <= R`.
pub fn capacity_upper_bound(m_norm: f64, r_norm: f64) -> Result<f64> {
    if !(m_norm >= 0.0 && r_norm >= 0.0) {
        return Err(Error::Domain(format!(
            "norm bounds must be non-negative, got M = {m_norm}, R = {r_norm}"
        )));
    }
    Ok((1.0 + m_norm * r_norm).log2())
}

/// Mutual information of the explicit dense coding protocol of `theory`: a
/// certified lower bound on its dense coding capacity and hence on the
/// classical capacity of the bipartite system.
pub fn dc_capacity_lower_bound(theory: &TheoryConfig) -> Result<f64> {
    Ok(protocols::dense_coding(theory, 0)?.info_bits)
}

/// `2N`: log2 of the dimension of the entangled sector, an upper bound on
/// the bipartite classical capacity of the Hadamard extension.
pub fn dimension_upper_bound(n_bits: u32) -> Result<f64> {
    if n_bits == 0 {
        return Err(Error::Domain("number of bits must be at least 1".into()));
    }
    Ok(2.0 * f64::from(n_bits))
}

/// `log2(1 + |lambda| (2^N - 1))`, the dense coding bound of the weakly
/// entangled theory.
pub fn weak_entanglement_bound(lambda: f64, n_bits: u32) -> Result<f64> {
    check_weak(lambda, n_bits)?;
    let n = (n_bits as f64).exp2() - 1.0;
    Ok((1.0 + lambda.abs() * n).log2())
}

/// Threshold `(1 + 2j) / (2^N - 1)` for `j` in {0, 1}: at or below `j = 0`
/// there is no superdense coding, at or below `j = 1` no hyperdense coding.
pub fn weak_threshold(j: u32, n_bits: u32) -> Result<f64> {
    if j > 1 {
        return Err(Error::Domain(format!("threshold index must be 0 or 1, got {j}")));
    }
    check_weak(0.0, n_bits)?;
    Ok(f64::from(1 + 2 * j) / ((n_bits as f64).exp2() - 1.0))
}

fn check_weak(lambda: f64, n_bits: u32) -> Result<()> {
    if n_bits < 2 || n_bits > hadamard::MAX_BITS {
        return Err(Error::Domain(format!(
            "weakly entangled theory needs 2 <= N <= {}, got {n_bits}",
            hadamard::MAX_BITS
        )));
    }
    if !(lambda.abs() <= 1.0) {
        return Err(Error::Domain(format!("|lambda| must be at most 1, got {lambda}")));
    }
    Ok(())
}

/// Summary of a randomized capacity search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSummary {
    pub trials: usize,
    pub max_capacity_bits: f64,
    /// Largest Blahut–Arimoto upper estimate over all trials; bounds the
    /// capacity of every sampled channel even when a run did not converge.
    pub max_upper_bound_bits: f64,
    pub best_trial: usize,
    pub unconverged: usize,
}

pub(crate) fn summarize(results: Vec<CapacityResult>) -> SearchSummary {
    let trials = results.len();
    let unconverged = results.iter().filter(|r| !r.converged).count();
    let (best_trial, max_capacity_bits) = results
        .iter()
        .map(|r| r.capacity_bits)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, c)| if c > best.1 { (i, c) } else { best });
    let max_upper_bound_bits = results
        .iter()
        .map(|r| r.upper_bound_bits)
        .fold(f64::NEG_INFINITY, f64::max);
    SearchSummary {
        trials,
        max_capacity_bits,
        max_upper_bound_bits,
        best_trial,
        unconverged,
    }
}

/// Randomized search for large capacities of the Hadamard bipartite theory.
///
/// Trial 0 is the Bell protocol itself (`phi_x` decoded with `{E_y}`). Other
/// trials encode messages into random mixtures of entangled states and
/// product states and decode with a random coarse-graining of the Bell
/// measurement mixed with a product of canonical measurements. Each channel
/// is then optimized over priors.
pub fn bipartite_capacity_search(n_bits: u32, trials: usize, seed: u64) -> Result<SearchSummary> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let dim = 1usize << n_bits;
    let n = dim - 1;
    let bell = hadamard::bell_measurement(n_bits)?;
    let states: Vec<BipartiteState> = BitString::all(n_bits)?.map(hadamard::entangled_state).collect();
    let results: Result<Vec<CapacityResult>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            if t == 0 {
                let table = outcome_table(&states, &bell)?;
                return channel_capacity(&table);
            }
            let mut rng = sampling::rng_for(seed, t as u64);
            let messages = rand::Rng::random_range(&mut rng, 2..=dim);
            let encodings: Vec<BipartiteState> = (0..messages)
                .map(|_| {
                    let mu = rand::Rng::random_range(&mut rng, 0..dim);
                    let ent = &states[mu];
                    let prod = gpt::product_state(
                        &sampling::any_state(n, &mut rng),
                        &sampling::any_state(n, &mut rng),
                    );
                    let w: f64 = rand::Rng::random(&mut rng);
                    ent.mix(&prod, w.sqrt()).expect("equal shapes")
                })
                .collect();
            let outcomes = rand::Rng::random_range(&mut rng, 2..=dim);
            let decoder = random_bipartite_decoder(&bell, n, outcomes, &mut rng);
            let table = outcome_table(&encodings, &decoder)?;
            search_capacity(&table)
        })
        .collect();
    Ok(summarize(results?))
}

/// Coarse-grained Bell measurement mixed with a product of canonical
/// measurements; valid in the Hadamard theory for any weights.
fn random_bipartite_decoder<R: rand::Rng + ?Sized>(
    bell: &BipartiteMeasurement,
    n: usize,
    outcomes: usize,
    rng: &mut R,
) -> BipartiteMeasurement {
    let w: f64 = rng.random();
    let mut acc = vec![nalgebra::DMatrix::<f64>::zeros(n + 1, n + 1); outcomes];
    for e in bell.effects() {
        let label = rng.random_range(0..outcomes);
        acc[label] += e.matrix() * w;
    }
    let ma = sampling::hst_measurement(n, 2, 2, rng);
    let mb = sampling::hst_measurement(n, 2, 2, rng);
    for ea in ma.effects() {
        for eb in mb.effects() {
            let label = rng.random_range(0..outcomes);
            acc[label] += gpt::product_effect(ea, eb).matrix() * (1.0 - w);
        }
    }
    BipartiteMeasurement::new(acc.into_iter().map(gpt::BipartiteEffect::new).collect())
        .expect("effects share a shape")
}

/// `p(y|x) = E_y . phi_x`, with tiny negative rounding clamped at zero.
pub fn outcome_table(
    states: &[BipartiteState],
    measurement: &BipartiteMeasurement,
) -> Result<Vec<Vec<f64>>> {
    states
        .iter()
        .map(|phi| {
            measurement
                .probabilities(phi)
                .map(|row| row.into_iter().map(|p| clamp_rounding(p)).collect())
        })
        .collect()
}

/// Clears sub-tolerance negative rounding; anything larger is left for the
/// channel validation to reject.
pub(crate) fn clamp_rounding(p: f64) -> f64 {
    if p < 0.0 && p > -EPS_EXACT {
        0.0
    } else {
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpt::{binary_entropy, mutual_information, Channel};

    fn bsc(f: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - f, f], vec![f, 1.0 - f]]
    }

    #[test]
    fn identity_channels() {
        for bits in 1..=5u32 {
            let ch = Channel::identity(1 << bits);
            let r = channel_capacity(ch.conditional()).unwrap();
            assert!(r.converged);
            assert!((r.capacity_bits - f64::from(bits)).abs() < 1e-12);
            for p in &r.optimal_prior {
                assert!((p - (-(bits as f64)).exp2()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn binary_symmetric_capacity_matches_closed_form() {
        let r = channel_capacity(&bsc(0.25)).unwrap();
        let oracle = 1.0 - binary_entropy(0.25);
        assert!((r.capacity_bits - oracle).abs() < 1e-9);
        assert!((oracle - 0.188_721_875_540_867).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_channel_beats_uniform_prior() {
        // Z channel: capacity log2(1 + (1-p) p^(p/(1-p))) for flip p on input 1
        let p: f64 = 0.5;
        let table = vec![vec![1.0, 0.0], vec![p, 1.0 - p]];
        let uniform = mutual_information(&Channel::with_uniform_prior(table.clone()).unwrap());
        let r = channel_capacity(&table).unwrap();
        let oracle = (1.0 + (1.0 - p) * p.powf(p / (1.0 - p))).log2();
        assert!(r.converged);
        assert!((r.capacity_bits - oracle).abs() < 1e-8);
        assert!(r.capacity_bits > uniform);
        assert!(r.upper_bound_bits >= r.capacity_bits);
    }

    #[test]
    fn two_input_channels_match_ternary_search() {
        // I(p) is concave in p for two inputs; locate its maximum directly
        let mut rng = crate::sampling::rng_for(12, 0);
        for _ in 0..50 {
            let rows: Vec<Vec<f64>> = (0..2)
                .map(|_| crate::sampling::simplex_weights(4, &mut rng))
                .collect();
            let info = |p: f64| crate::gpt::mutual_information_raw(&[p, 1.0 - p], &rows);
            let (mut a, mut b) = (0.0, 1.0);
            for _ in 0..200 {
                let m1 = a + (b - a) / 3.0;
                let m2 = b - (b - a) / 3.0;
                if info(m1) < info(m2) {
                    a = m1;
                } else {
                    b = m2;
                }
            }
            let oracle = info(0.5 * (a + b));
            let r = channel_capacity(&rows).unwrap();
            assert!(r.converged);
            assert!((r.capacity_bits - oracle).abs() < 1e-9, "{} vs {oracle}", r.capacity_bits);
            assert!(r.upper_bound_bits >= oracle - 1e-12);
            let at_prior = crate::gpt::mutual_information_raw(&r.optimal_prior, &rows);
            assert!((at_prior - r.capacity_bits).abs() < 1e-14);
        }
    }

    #[test]
    fn iteration_cap_flags_nonconvergence() {
        let table = vec![vec![1.0, 0.0], vec![0.3, 0.7], vec![0.5, 0.5]];
        let r = blahut_arimoto(&table, 1e-300, 3).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn deterministic_iterates() {
        let table = vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.1, 0.8], vec![0.3, 0.4, 0.3]];
        let a = channel_capacity(&table).unwrap();
        let b = channel_capacity(&table).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(blahut_arimoto(&[vec![0.5, 0.4]], 1e-9, 10).is_err());
        assert!(blahut_arimoto(&bsc(0.1), 0.0, 10).is_err());
    }

    #[test]
    fn analytic_bounds() {
        assert_eq!(capacity_upper_bound(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(capacity_upper_bound(0.0, 1.0).unwrap(), 0.0);
        assert!(capacity_upper_bound(-1.0, 1.0).is_err());
        assert_eq!(dimension_upper_bound(2).unwrap(), 4.0);
        assert_eq!(dimension_upper_bound(5).unwrap(), 10.0);
        for n in 2..=8u32 {
            let l0 = weak_threshold(0, n).unwrap();
            let l1 = weak_threshold(1, n).unwrap();
            assert!(0.0 < l0 && l0 < l1 && l1 <= 1.0);
            assert!((weak_entanglement_bound(l0, n).unwrap() - 1.0).abs() < 1e-15);
            assert!((weak_entanglement_bound(l1, n).unwrap() - 2.0).abs() < 1e-15);
            assert_eq!(weak_entanglement_bound(0.0, n).unwrap(), 0.0);
        }
        assert!(weak_entanglement_bound(1.5, 3).is_err());
        assert!(weak_threshold(2, 3).is_err());
        assert!(weak_threshold(0, 1).is_err());
    }

    #[test]
    fn bipartite_search_sandwich_small() {
        for n in 1..=3u32 {
            let s = bipartite_capacity_search(n, 20, 4).unwrap();
            assert!(s.max_capacity_bits >= f64::from(n) - 1e-9);
            assert!(s.max_capacity_bits <= dimension_upper_bound(n).unwrap());
        }
    }
}
