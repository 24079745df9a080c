//! Dense coding, teleportation and entanglement swapping, plus the
//! separable-state baseline.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{self, CapacityResult};
use crate::error::{Error, Result};
use crate::gpt::{
    contract, mutual_information, product_effect, product_state, BipartiteEffect,
    BipartiteMeasurement, BipartiteState, Channel, Effect, State, EPS_EXACT, EPS_OPT,
};
use crate::hadamard::{self, BitString};
use crate::sampling;
use crate::theory::TheoryConfig;
use crate::variants::{self, EmbeddedTheory, LambdaTauTheory, WeakTheory};

/// Outcome of a dense coding simulation. Rows of `channel` are messages
/// `x`, columns decoded outcomes `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCodingRun {
    pub n_bits: u32,
    pub initial_state: BipartiteState,
    pub channel: Channel,
    pub info_bits: f64,
}

/// Shares `phi_0`, applies `T_x` on Alice's side and decodes with the
/// theory's Bell-type measurement. `seed` only matters for the embedded
/// theory, whose encoding uses a random rotation of the extra block.
pub fn dense_coding(theory: &TheoryConfig, seed: u64) -> Result<DenseCodingRun> {
    theory.validate()?;
    let (n_bits, initial_state, channel) = match *theory {
        TheoryConfig::Hst { .. } => {
            return Err(Error::Domain("dense coding needs a bipartite theory".into()))
        }
        TheoryConfig::Base { n_bits } => {
            let phi0 = hadamard::entangled_state(BitString::zero(n_bits)?);
            let encoded: Vec<BipartiteState> = BitString::all(n_bits)?
                .map(|x| hadamard::local_transformation(x).apply_a(&phi0))
                .collect::<Result<_>>()?;
            let table = capacity::outcome_table(&encoded, &hadamard::bell_measurement(n_bits)?)?;
            (n_bits, phi0, Channel::with_uniform_prior(table)?)
        }
        TheoryConfig::LambdaTau { n_bits, lambda, tau } => {
            let th = LambdaTauTheory::new(n_bits, lambda, tau)?;
            (n_bits, th.state(BitString::zero(n_bits)?)?, variants::lt_channel(&th)?)
        }
        TheoryConfig::Embedded { n_bits, m } => {
            let th = EmbeddedTheory::new(n_bits, m)?;
            (
                n_bits,
                th.entangled_state(BitString::zero(n_bits)?)?,
                variants::embedded_dense_coding(&th, seed)?,
            )
        }
        TheoryConfig::Weak { n_bits, lambda } => {
            let th = WeakTheory::new(n_bits, lambda)?;
            (n_bits, th.state(BitString::zero(n_bits)?)?, variants::weak_dense_coding(&th)?)
        }
    };
    let info_bits = mutual_information(&channel);
    Ok(DenseCodingRun { n_bits, initial_state, channel, info_bits })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProtocolKind {
    Ordinary,
    Superdense,
    Hyperdense,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolClass {
    pub class: ProtocolKind,
    pub dc_info_bits: f64,
    pub local_capacity_bits: f64,
}

/// Superdense iff `dc_info - eps > local`, hyperdense iff
/// `dc_info - eps > 2 local`, with `eps = EPS_OPT`.
pub fn classify(dc_info_bits: f64, local_capacity_bits: f64) -> ProtocolClass {
    let lhs = dc_info_bits - EPS_OPT;
    let class = if lhs > 2.0 * local_capacity_bits {
        ProtocolKind::Hyperdense
    } else if lhs > local_capacity_bits {
        ProtocolKind::Superdense
    } else {
        ProtocolKind::Ordinary
    };
    ProtocolClass { class, dc_info_bits, local_capacity_bits }
}

/// Number of Hadamard bits of an `n`-ball, if `n = 2^N - 1`.
fn bits_of_dim(n: usize) -> Result<u32> {
    let d = n + 1;
    if !d.is_power_of_two() || d < 2 || d.trailing_zeros() > hadamard::MAX_BITS {
        return Err(Error::Domain(format!(
            "dimension {n} is not of the form 2^N - 1 with 1 <= N <= {}",
            hadamard::MAX_BITS
        )));
    }
    Ok(d.trailing_zeros())
}

/// Encodes messages `x` into `(T_x (1, a)) (x) (1, b)` and decodes with the
/// Bell measurement. Every row is a valid distribution because the Bell
/// effects are bounded by `2^-(N-1)` on product states.
pub fn product_bell_channel(a: &[f64], b: &[f64], labels: &[BitString]) -> Result<Channel> {
    let n_bits = bits_of_dim(a.len())?;
    let wa = crate::hst::make_state(a)?;
    let wb = crate::hst::make_state(b)?;
    let states: Vec<BipartiteState> = labels
        .iter()
        .map(|&x| Ok(product_state(&hadamard::local_transformation(x).apply_state(&wa)?, &wb)))
        .collect::<Result<_>>()?;
    let table = capacity::outcome_table(&states, &hadamard::bell_measurement(n_bits)?)?;
    Channel::with_uniform_prior(table)
}

/// Convex combination of up to `max_components` products of local
/// measurements, with outcomes relabelled onto `0..outcomes`.
pub fn product_decoder<R: Rng + ?Sized>(
    n: usize,
    outcomes: usize,
    max_components: usize,
    rng: &mut R,
) -> BipartiteMeasurement {
    let components = rng.random_range(1..=max_components.max(1));
    let weights = sampling::simplex_weights(components, rng);
    let mut acc = vec![DMatrix::<f64>::zeros(n + 1, n + 1); outcomes];
    for w in weights {
        let ka = rng.random_range(1..=3);
        let kb = rng.random_range(1..=3);
        let ma = sampling::hst_measurement(n, ka, 3, rng);
        let mb = sampling::hst_measurement(n, kb, 3, rng);
        for ea in ma.effects() {
            for eb in mb.effects() {
                acc[rng.random_range(0..outcomes)] += product_effect(ea, eb).matrix() * w;
            }
        }
    }
    BipartiteMeasurement::new(acc.into_iter().map(BipartiteEffect::new).collect())
        .expect("effects share a shape")
}

/// Result of [`separable_baseline`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineSummary {
    pub trials: usize,
    pub max_info_bits: f64,
    /// Largest Blahut–Arimoto upper estimate over all trials.
    pub max_upper_bound_bits: f64,
    pub best_trial: usize,
    pub unconverged: usize,
}

/// Dense coding from random product states of two `n`-balls
/// (`n = 2^N - 1`). Each trial picks random messages `T_x` and decodes
/// either with the Bell measurement (odd trials) or with a convex
/// combination of at most 8 product measurements (even trials), then
/// optimizes the prior. Returns the largest information seen.
pub fn separable_baseline(n: usize, trials: usize, seed: u64) -> Result<BaselineSummary> {
    let n_bits = bits_of_dim(n)?;
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let d = n + 1;
    let bell = hadamard::bell_measurement(n_bits)?;
    let results: Result<Vec<CapacityResult>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = sampling::rng_for(seed, t as u64);
            let wa = sampling::any_state(n, &mut rng);
            let wb = sampling::any_state(n, &mut rng);
            let k = rng.random_range(2..=d.min(8));
            let states: Vec<BipartiteState> = (0..k)
                .map(|_| {
                    let x = BitString::new(rng.random_range(0..d), n_bits)?;
                    Ok(product_state(&hadamard::local_transformation(x).apply_state(&wa)?, &wb))
                })
                .collect::<Result<_>>()?;
            let decoder = if t % 2 == 1 {
                bell.clone()
            } else {
                let outcomes = rng.random_range(2..=d.min(8));
                product_decoder(n, outcomes, 8, &mut rng)
            };
            capacity::search_capacity(&capacity::outcome_table(&states, &decoder)?)
        })
        .collect();
    let summary = capacity::summarize(results?);
    Ok(BaselineSummary {
        trials: summary.trials,
        max_info_bits: summary.max_capacity_bits,
        max_upper_bound_bits: summary.max_upper_bound_bits,
        best_trial: summary.best_trial,
        unconverged: summary.unconverged,
    })
}

/// Largest change, over messages `x`, of Bob's marginal distribution when
/// a random product decoding is applied to `T_x phi_0`. Zero up to
/// rounding, since Alice's local operation cannot signal.
pub fn no_signalling_residual(n_bits: u32, trials: usize, seed: u64) -> Result<f64> {
    let n = (1usize << n_bits) - 1;
    let phi0 = hadamard::entangled_state(BitString::zero(n_bits)?);
    let encoded: Vec<BipartiteState> = BitString::all(n_bits)?
        .map(|x| hadamard::local_transformation(x).apply_a(&phi0))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let mut rng = sampling::rng_for(seed, t as u64);
        let ma = sampling::hst_measurement(n, 3, 4, &mut rng);
        let mb = sampling::hst_measurement(n, 3, 4, &mut rng);
        let mut reference: Option<Vec<f64>> = None;
        for phi in &encoded {
            let marginal: Vec<f64> = mb
                .effects()
                .iter()
                .map(|eb| {
                    ma.effects()
                        .iter()
                        .map(|ea| crate::gpt::bipartite_contract(&product_effect(ea, eb), phi))
                        .sum::<Result<f64>>()
                })
                .collect::<Result<_>>()?;
            match &reference {
                None => reference = Some(marginal),
                Some(r) => {
                    for (a, b) in r.iter().zip(&marginal) {
                        worst = worst.max((a - b).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Teleportation of one `(2^N - 1)`-ball state through `phi_0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeleportationRun {
    pub n_bits: u32,
    pub input_state: Vec<f64>,
    /// `p_tel(x, y)`, rows indexed by Alice's outcome, columns by Bob's effect.
    pub joint: Vec<Vec<f64>>,
    pub p_x: Vec<f64>,
    /// `p_tel(y | x)`.
    pub conditional: Vec<Vec<f64>>,
    /// `e_y . omega_a` for each of Bob's effects.
    pub direct: Vec<f64>,
    /// Label of Bob's correction `T_x` for each outcome `x`.
    pub corrections: Vec<usize>,
    pub max_residual: f64,
}

/// Bob's half after Alice sees `x` and Bob applies `T_x`:
/// `v = M^t E_x^t omega` with `M = phi_0 T_x^t`, so that
/// `p_tel(x, y) = e_y . v`.
fn teleported_vector(omega: &DVector<f64>, x: BitString) -> DVector<f64> {
    let n_bits = x.len();
    let e_x = hadamard::entangled_effect(x);
    let phi0 = hadamard::entangled_state(BitString::zero(n_bits).expect("valid"));
    let m = phi0.matrix() * hadamard::local_transformation(x).matrix().matrix().transpose();
    m.transpose() * e_x.matrix().transpose() * omega
}

/// Teleports `omega_a` and checks `p_tel(y|x) = e_y . omega_a` on Bob's
/// effects, a list of 100 seeded random extremal effects plus `u`.
pub fn teleport(omega_a: &State, n_bits: u32, seed: u64) -> Result<TeleportationRun> {
    let n = (1usize << n_bits.min(hadamard::MAX_BITS)) - 1;
    let mut rng = sampling::rng_for(seed, 0);
    let mut effects: Vec<Effect> = (0..100)
        .map(|_| sampling::extremal_effect_random(n, &mut rng))
        .collect();
    effects.push(Effect::unit(n));
    teleport_with_effects(omega_a, n_bits, &effects)
}

/// [`teleport`] with explicit effects for Bob.
pub fn teleport_with_effects(omega_a: &State, n_bits: u32, effects: &[Effect]) -> Result<TeleportationRun> {
    BitString::zero(n_bits)?;
    let d = 1usize << n_bits;
    if omega_a.len() != d {
        return Err(Error::dims(d, omega_a.len()));
    }
    if omega_a.coord_norm() > 1.0 + EPS_EXACT {
        return Err(Error::Norm {
            what: "input state".into(),
            norm: omega_a.coord_norm(),
            bound: "<= 1".into(),
        });
    }
    if let Some(e) = effects.iter().find(|e| e.len() != d) {
        return Err(Error::dims(d, e.len()));
    }
    let direct: Vec<f64> = effects.iter().map(|e| contract(e, omega_a)).collect::<Result<_>>()?;
    let scale = 1.0 / d as f64;
    let unit = Effect::unit(d - 1);
    let mut run = TeleportationRun {
        n_bits,
        input_state: omega_a.entries().iter().cloned().collect(),
        joint: Vec::with_capacity(d),
        p_x: Vec::with_capacity(d),
        conditional: Vec::with_capacity(d),
        direct,
        corrections: Vec::with_capacity(d),
        max_residual: 0.0,
    };
    for x in BitString::all(n_bits)? {
        let v = teleported_vector(omega_a.entries(), x);
        let joint: Vec<f64> = effects.iter().map(|e| e.entries().dot(&v)).collect();
        let p_x = unit.entries().dot(&v);
        let cond: Vec<f64> = joint.iter().map(|p| p / p_x).collect();
        let mut worst = (p_x - scale).abs();
        let mut witness = None;
        for (y, (&c, &direct)) in cond.iter().zip(&run.direct).enumerate() {
            let r = (c - direct).abs().max((joint[y] - scale * direct).abs());
            if r > worst {
                worst = r;
                witness = Some(y);
            }
        }
        if worst > EPS_EXACT {
            return Err(Error::ProtocolFailure(format!(
                "teleportation residual {worst} at x = {}, effect {witness:?}",
                x.value()
            )));
        }
        run.max_residual = run.max_residual.max(worst);
        run.joint.push(joint);
        run.p_x.push(p_x);
        run.conditional.push(cond);
        run.corrections.push(x.value());
    }
    Ok(run)
}

/// Entanglement swapping of a state `phi` on `A'C` through `phi_0` on `AB`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapRun {
    pub n_bits: u32,
    /// `p_swap(x, y)`, rows by Alice's Bell outcome, columns by the effect
    /// measured on `BC`.
    pub joint: Vec<Vec<f64>>,
    pub p_x: Vec<f64>,
    pub conditional: Vec<Vec<f64>>,
    /// `E'_y . phi`.
    pub direct: Vec<f64>,
    pub max_residual: f64,
}

/// State on `BC` after Alice's outcome `x` and Bob's correction:
/// `H = M^t E_x^t phi`, so that `p_swap(x, y) = E'_y . H`.
fn swapped_matrix(phi: &DMatrix<f64>, x: BitString) -> DMatrix<f64> {
    let e_x = hadamard::entangled_effect(x);
    let phi0 = hadamard::entangled_state(BitString::zero(x.len()).expect("valid"));
    let m = phi0.matrix() * hadamard::local_transformation(x).matrix().matrix().transpose();
    m.transpose() * e_x.matrix().transpose() * phi
}

/// Swaps `phi` and checks `p_swap(y|x) = E'_y . phi` for every `E'_y` in
/// `effects`, along with `p_x = 2^-N`.
pub fn entanglement_swap(phi: &BipartiteState, n_bits: u32, effects: &[BipartiteEffect]) -> Result<SwapRun> {
    BitString::zero(n_bits)?;
    let d = 1usize << n_bits;
    if phi.shape() != (d, d) {
        return Err(Error::dims(format!("{d}x{d}"), format!("{:?}", phi.shape())));
    }
    if let Some(e) = effects.iter().find(|e| e.shape() != (d, d)) {
        return Err(Error::dims(format!("{d}x{d}"), format!("{:?}", e.shape())));
    }
    let direct: Vec<f64> = effects
        .iter()
        .map(|e| crate::gpt::bipartite_contract(e, phi))
        .collect::<Result<_>>()?;
    let scale = 1.0 / d as f64;
    let mut run = SwapRun {
        n_bits,
        joint: Vec::with_capacity(d),
        p_x: Vec::with_capacity(d),
        conditional: Vec::with_capacity(d),
        direct,
        max_residual: 0.0,
    };
    for x in BitString::all(n_bits)? {
        let h = swapped_matrix(phi.matrix(), x);
        let joint: Vec<f64> = effects.iter().map(|e| e.matrix().dot(&h)).collect();
        let p_x = h[(0, 0)];
        let cond: Vec<f64> = joint.iter().map(|p| p / p_x).collect();
        let mut worst = (p_x - scale).abs();
        for (y, (&c, &direct)) in cond.iter().zip(&run.direct).enumerate() {
            worst = worst.max((c - direct).abs()).max((joint[y] - scale * direct).abs());
        }
        if worst > EPS_EXACT {
            return Err(Error::ProtocolFailure(format!(
                "swap residual {worst} at x = {}",
                x.value()
            )));
        }
        run.max_residual = run.max_residual.max(worst);
        run.joint.push(joint);
        run.p_x.push(p_x);
        run.conditional.push(cond);
    }
    Ok(run)
}

/// Swaps `phi_mu` and measures the Bell effects on `BC`; the conditional is
/// `delta_{y, mu}` for every `x`.
pub fn swap_entangled(mu: BitString) -> Result<SwapRun> {
    let meas = hadamard::bell_measurement(mu.len())?;
    entanglement_swap(&hadamard::entangled_state(mu), mu.len(), meas.effects())
}
