//! Variant bipartite theories built on hypersphere systems of dimension
//! `2^N - 1`:
//!
//! * [`LambdaTauTheory`]: entangled states and Bell effects with their
//!   correlation blocks scaled by `lambda` and `tau`, as required when local
//!   transformations form the full rotation group.
//! * [`EmbeddedTheory`]: the Hadamard block embedded next to an
//!   `m`-dimensional ball, which keeps hyperdense coding but loses
//!   tomographic locality.
//! * [`WeakTheory`]: the discrete entangled set with correlation block
//!   scaled by `lambda`.
//!
//! The norm constraints that no-signalling and tomographic locality impose
//! on hypersphere bipartite states and effects are exposed as
//! [`lemma_state_check`] and [`lemma_effect_check`].

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{self, CapacityResult, SearchSummary};
use crate::error::{Error, Result};
use crate::gpt::{
    bipartite_contract, binary_entropy, mutual_information, product_effect, product_state,
    BipartiteEffect, BipartiteMeasurement, BipartiteState, Channel, Effect, State, Transformation,
    EPS_EXACT,
};
use crate::hadamard::{self, BitString};
use crate::sampling;

fn check_bits(n_bits: u32) -> Result<()> {
    if !(2..=hadamard::MAX_BITS).contains(&n_bits) {
        return Err(Error::Domain(format!(
            "theory needs 2 <= N <= {}, got {n_bits} (N = 1 is the classical bit)",
            hadamard::MAX_BITS
        )));
    }
    Ok(())
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(v.abs() <= 1.0) {
        return Err(Error::Domain(format!("|{name}| must be at most 1, got {v}")));
    }
    Ok(())
}

fn dim(n_bits: u32) -> usize {
    1usize << n_bits
}

fn pow2(n_bits: u32) -> f64 {
    f64::from(n_bits).exp2()
}

/// `block-diag(1, s * T_hat_mu)` scaled overall by `outer`.
fn scaled_diagonal(mu: BitString, s: f64, outer: f64) -> DMatrix<f64> {
    let d = hadamard::hadamard_vector(mu);
    let diag = DVector::from_iterator(
        d.len(),
        d.entries()
            .iter()
            .enumerate()
            .map(|(i, &x)| outer * if i == 0 { 1.0 } else { s * f64::from(x) }),
    );
    DMatrix::from_diagonal(&diag)
}

/// Closed-interval bounds on `lambda * tau` for which every `E^(tau)` is a
/// valid effect: `-(2^N - 1)^-1 <= lambda tau <= (2^N - 3)^-1`.
pub fn admissible_range(n_bits: u32) -> Result<(f64, f64)> {
    check_bits(n_bits)?;
    let p = pow2(n_bits);
    Ok((-1.0 / (p - 1.0), 1.0 / (p - 3.0)))
}

/// Theory with `phi_mu = block-diag(1, lambda T_hat_mu)` and
/// `E_mu = 2^-N block-diag(1, tau T_hat_mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaTauTheory {
    n_bits: u32,
    lambda: f64,
    tau: f64,
}

impl LambdaTauTheory {
    pub fn new(n_bits: u32, lambda: f64, tau: f64) -> Result<Self> {
        check_bits(n_bits)?;
        check_unit_interval("lambda", lambda)?;
        check_unit_interval("tau", tau)?;
        let (lo, hi) = admissible_range(n_bits)?;
        let lt = lambda * tau;
        if lt < lo - EPS_EXACT || lt > hi + EPS_EXACT {
            return Err(Error::Admissibility(format!(
                "-(2^N-1)^-1 <= lambda*tau <= (2^N-3)^-1 violated for N = {n_bits}: \
                 lambda*tau = {lt}, allowed [{lo}, {hi}]"
            )));
        }
        Ok(LambdaTauTheory { n_bits, lambda, tau })
    }

    /// The product `lambda tau` that maximizes the decoding probability.
    pub fn optimal(n_bits: u32) -> Result<Self> {
        let (_, hi) = admissible_range(n_bits)?;
        LambdaTauTheory::new(n_bits, hi, 1.0)
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn state(&self, mu: BitString) -> Result<BipartiteState> {
        lambda_state(mu, self.n_bits, self.lambda)
    }

    pub fn effect(&self, mu: BitString) -> Result<BipartiteEffect> {
        tau_effect(mu, self.n_bits, self.tau)
    }

    pub fn measurement(&self) -> Result<BipartiteMeasurement> {
        BipartiteMeasurement::new(
            BitString::all(self.n_bits)?
                .map(|mu| self.effect(mu))
                .collect::<Result<_>>()?,
        )
    }

    /// `phi_0^(lambda) T'` with `T' = diag(1, 1, -1, ..., -1)`, a member of
    /// the rotated entangled family.
    pub fn witness_state(&self) -> BipartiteState {
        witness_state(self.n_bits, self.lambda)
    }

    /// `T phi_0^(lambda) T'^t` for `T = block-diag(1, r_a)` and
    /// `T' = block-diag(1, r_b)`.
    pub fn rotated_state(&self, r_a: &DMatrix<f64>, r_b: &DMatrix<f64>) -> Result<BipartiteState> {
        let n = dim(self.n_bits) - 1;
        if r_a.shape() != (n, n) || r_b.shape() != (n, n) {
            return Err(Error::dims(format!("{n}x{n} rotations"), format!("{:?}", r_a.shape())));
        }
        let core = r_a * r_b.transpose() * self.lambda;
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m[(0, 0)] = 1.0;
        m.view_mut((1, 1), (n, n)).copy_from(&core);
        Ok(BipartiteState::from_matrix_unchecked(m))
    }
}

fn lambda_state(mu: BitString, n_bits: u32, lambda: f64) -> Result<BipartiteState> {
    if mu.len() != n_bits {
        return Err(Error::dims(n_bits, mu.len()));
    }
    Ok(BipartiteState::from_matrix_unchecked(scaled_diagonal(mu, lambda, 1.0)))
}

fn tau_effect(mu: BitString, n_bits: u32, tau: f64) -> Result<BipartiteEffect> {
    if mu.len() != n_bits {
        return Err(Error::dims(n_bits, mu.len()));
    }
    Ok(BipartiteEffect::new(scaled_diagonal(mu, tau, 1.0 / pow2(n_bits))))
}

fn witness_state(n_bits: u32, lambda: f64) -> BipartiteState {
    let d = dim(n_bits);
    let flip = DMatrix::from_diagonal(&DVector::from_fn(d, |i, _| if i < 2 { 1.0 } else { -1.0 }));
    let phi0 = scaled_diagonal(BitString::zero(n_bits).expect("checked"), lambda, 1.0);
    BipartiteState::from_matrix_unchecked(phi0 * flip)
}

/// Direct contractions that decide whether `E^(tau)` is a valid effect on
/// the rotated entangled family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityProbe {
    pub n_bits: u32,
    pub lambda_tau: f64,
    /// `E_0^(tau) . phi_0^(lambda)`.
    pub on_phi0: f64,
    /// `E_0^(tau) . phi_0^(lambda) T'`.
    pub on_witness: f64,
    pub admissible: bool,
}

/// Evaluates `E_0^(tau)` on `phi_0^(lambda)` and on the witness state without
/// assuming admissibility; `admissible` is false as soon as either value
/// leaves `[0, 1]`.
pub fn admissibility_probe(n_bits: u32, lambda: f64, tau: f64) -> Result<AdmissibilityProbe> {
    check_bits(n_bits)?;
    check_unit_interval("lambda", lambda)?;
    check_unit_interval("tau", tau)?;
    let zero = BitString::zero(n_bits)?;
    let e0 = tau_effect(zero, n_bits, tau)?;
    let on_phi0 = bipartite_contract(&e0, &lambda_state(zero, n_bits, lambda)?)?;
    let on_witness = bipartite_contract(&e0, &witness_state(n_bits, lambda))?;
    let ok = |p: f64| (-EPS_EXACT..=1.0 + EPS_EXACT).contains(&p);
    Ok(AdmissibilityProbe {
        n_bits,
        lambda_tau: lambda * tau,
        on_phi0,
        on_witness,
        admissible: ok(on_phi0) && ok(on_witness),
    })
}

/// Dense coding in the `(lambda, tau)` theory: `phi_x = T_x phi_0^(lambda)`
/// decoded with `{E_y^(tau)}`. Every entry is checked against
/// `lambda tau delta_xy + 2^-N (1 - lambda tau)`.
pub fn lt_channel(theory: &LambdaTauTheory) -> Result<Channel> {
    let n_bits = theory.n_bits;
    let lt = theory.lambda * theory.tau;
    let scale = 1.0 / pow2(n_bits);
    let phi0 = theory.state(BitString::zero(n_bits)?)?;
    let meas = theory.measurement()?;
    let mut rows = Vec::with_capacity(dim(n_bits));
    for x in BitString::all(n_bits)? {
        let phi_x = hadamard::local_transformation(x).apply_a(&phi0)?;
        let mut row = meas.probabilities(&phi_x)?;
        for (y, p) in row.iter_mut().enumerate() {
            let closed = if y == x.value() { lt } else { 0.0 } + scale * (1.0 - lt);
            if (*p - closed).abs() > EPS_EXACT {
                return Err(Error::ProtocolFailure(format!(
                    "p({y}|{}) = {p} differs from closed form {closed}",
                    x.value()
                )));
            }
            *p = capacity::clamp_rounding(*p);
        }
        rows.push(row);
    }
    Channel::with_uniform_prior(rows)
}

/// Entropy of a `2^N`-valued variable that takes one value with
/// probability `p` and the rest uniformly: `h(p) + (1 - p) log2(2^N - 1)`.
pub fn lt_entropy(p: f64, n_bits: u32) -> f64 {
    binary_entropy(p) + (1.0 - p) * (pow2(n_bits) - 1.0).log2()
}

/// `Q_N = 2^(1-N) (2^N - 2) / (2^N - 3)`, the largest attainable
/// probability of decoding the right message.
pub fn optimal_success_probability(n_bits: u32) -> Result<f64> {
    check_bits(n_bits)?;
    let p = pow2(n_bits);
    Ok(2.0 / p * (p - 2.0) / (p - 3.0))
}

/// Best mutual information of the `(lambda, tau)` dense coding family:
/// `N - H(Q_N)`.
pub fn lt_optimal_info(n_bits: u32) -> Result<f64> {
    let q = optimal_success_probability(n_bits)?;
    Ok(f64::from(n_bits) - lt_entropy(q, n_bits))
}

/// The Hadamard block embedded in a `(2^N + m)`-dimensional local space
/// whose states are `(1, 0_n, r)` with `|r| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EmbeddedTheory {
    n_bits: u32,
    m: usize,
}

impl EmbeddedTheory {
    pub fn new(n_bits: u32, m: usize) -> Result<Self> {
        check_bits(n_bits)?;
        if m == 0 || m > crate::hst::MAX_DIM {
            return Err(Error::Domain(format!("embedding dimension must be positive, got {m}")));
        }
        Ok(EmbeddedTheory { n_bits, m })
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Length of a local state vector, `1 + n + m` with `n = 2^N - 1`.
    pub fn local_len(&self) -> usize {
        dim(self.n_bits) + self.m
    }

    pub fn local_state(&self, r: &[f64]) -> Result<State> {
        if r.len() != self.m {
            return Err(Error::dims(self.m, r.len()));
        }
        let nr = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nr > 1.0 + EPS_EXACT {
            return Err(Error::Norm {
                what: "embedded state vector r".into(),
                norm: nr,
                bound: "<= 1".into(),
            });
        }
        let mut v = vec![0.0; self.local_len()];
        v[0] = 1.0;
        v[dim(self.n_bits)..].copy_from_slice(r);
        State::new(v)
    }

    /// `(chi, 0_n, alpha)`.
    pub fn local_effect(&self, chi: f64, alpha: &[f64]) -> Result<Effect> {
        if alpha.len() != self.m {
            return Err(Error::dims(self.m, alpha.len()));
        }
        let mut v = vec![0.0; self.local_len()];
        v[0] = chi;
        v[dim(self.n_bits)..].copy_from_slice(alpha);
        Ok(Effect::new(v))
    }

    fn pad(&self, block: &DMatrix<f64>) -> DMatrix<f64> {
        let len = self.local_len();
        let mut m = DMatrix::zeros(len, len);
        let d = block.nrows();
        m.view_mut((0, 0), (d, d)).copy_from(block);
        m
    }

    /// `Phi_mu`: `phi_mu` in the top-left corner, zero elsewhere.
    pub fn entangled_state(&self, mu: BitString) -> Result<BipartiteState> {
        if mu.len() != self.n_bits {
            return Err(Error::dims(self.n_bits, mu.len()));
        }
        Ok(BipartiteState::from_matrix_unchecked(
            self.pad(hadamard::entangled_state(mu).matrix()),
        ))
    }

    /// `F_y = 2^-N Phi_y`.
    pub fn effect(&self, y: BitString) -> Result<BipartiteEffect> {
        Ok(BipartiteEffect::new(
            self.entangled_state(y)?.matrix() / pow2(self.n_bits),
        ))
    }

    pub fn measurement(&self) -> Result<BipartiteMeasurement> {
        BipartiteMeasurement::new(
            BitString::all(self.n_bits)?
                .map(|y| self.effect(y))
                .collect::<Result<_>>()?,
        )
    }

    /// `T_mu^(R) = block-diag(T_mu, R)` for `R` in `SO(m)`.
    pub fn transformation(&self, mu: BitString, rotation: &DMatrix<f64>) -> Result<Transformation> {
        if rotation.shape() != (self.m, self.m) {
            return Err(Error::dims(
                format!("{0}x{0} rotation", self.m),
                format!("{:?}", rotation.shape()),
            ));
        }
        let orth = (rotation.transpose() * rotation - DMatrix::identity(self.m, self.m)).amax();
        if orth > 1e-9 || rotation.determinant() < 0.0 {
            return Err(Error::Domain("rotation must lie in SO(m)".into()));
        }
        let mut t = self.pad(hadamard::local_transformation(mu).matrix().matrix());
        let d = dim(self.n_bits);
        t.view_mut((d, d), (self.m, self.m)).copy_from(rotation);
        Transformation::new(t)
    }
}

/// Dense coding in the embedded theory with a seeded random rotation in the
/// embedding block. Checks `F_y . Phi_x = delta_xy` and returns the
/// resulting channel with a uniform prior.
pub fn embedded_dense_coding(theory: &EmbeddedTheory, seed: u64) -> Result<Channel> {
    let n_bits = theory.n_bits;
    let mut rng = sampling::rng_for(seed, 0);
    let rotation = sampling::rotation(theory.m, &mut rng);
    let phi0 = theory.entangled_state(BitString::zero(n_bits)?)?;
    let meas = theory.measurement()?;
    let mut rows = Vec::with_capacity(dim(n_bits));
    for x in BitString::all(n_bits)? {
        let phi_x = theory.transformation(x, &rotation)?.apply_a(&phi0)?;
        if (phi_x.matrix() - theory.entangled_state(x)?.matrix()).amax() > EPS_EXACT {
            return Err(Error::ProtocolFailure(format!(
                "T_x^(R) Phi_0 differs from Phi_x for x = {}",
                x.value()
            )));
        }
        let row = meas.probabilities(&phi_x)?;
        for (y, &p) in row.iter().enumerate() {
            let expected = if y == x.value() { 1.0 } else { 0.0 };
            if (p - expected).abs() > EPS_EXACT {
                return Err(Error::ProtocolFailure(format!(
                    "F_{y} . Phi_{} = {p}, expected {expected}",
                    x.value()
                )));
            }
        }
        rows.push(row);
    }
    Channel::with_uniform_prior(rows)
}

/// Largest deviation of `T_mu^(R) (1, 0, r)` from `(1, 0, R r)` together
/// with the largest change of `|r|`, over random rotations and states.
pub fn embedded_invariance(theory: &EmbeddedTheory, trials: usize, seed: u64) -> Result<f64> {
    let d = dim(theory.n_bits);
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let mut rng = sampling::rng_for(seed, t as u64);
        let rotation = sampling::rotation(theory.m, &mut rng);
        let mu = BitString::new(rand::Rng::random_range(&mut rng, 0..d), theory.n_bits)?;
        let r = sampling::ball_vector(theory.m, &mut rng);
        let w = theory.local_state(&r)?;
        let out = theory.transformation(mu, &rotation)?.apply(&w)?;
        let rr = &rotation * DVector::from_column_slice(&r);
        let expected = theory.local_state(rr.as_slice())?;
        worst = worst.max((out.entries() - expected.entries()).amax());
        let before = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        worst = worst.max((rr.norm() - before).abs());
    }
    Ok(worst)
}

/// Evidence that local statistics cannot tell the states `Phi_mu` apart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TlWitnessReport {
    pub trials: usize,
    /// Largest spread over `mu` of `(e (x) f) . Phi_mu`.
    pub max_spread: f64,
    /// Largest `|(e (x) f) . Phi_mu - chi xi|`.
    pub max_product_residual: f64,
    /// Entrywise L1 distance between `Phi_0` and `Phi_mu`, indexed by `mu`.
    pub l1_distances: Vec<f64>,
    /// Largest `|F_y . (w_a (x) w_b) - 2^-N|` on random product states.
    pub max_product_state_residual: f64,
}

impl TlWitnessReport {
    /// Local statistics agree while the states differ.
    pub fn witnessed(&self) -> bool {
        self.max_spread < EPS_EXACT
            && self.max_product_residual < EPS_EXACT
            && self.l1_distances.iter().skip(1).all(|&d| d > 0.5)
    }
}

/// Samples random local effects `e = (chi, 0, alpha)`, `f = (xi, 0, beta)`
/// from the convex hull of zero, `u` and the extremal effects, and records
/// their joint probabilities on every `Phi_mu`.
pub fn tl_violation_witness(theory: &EmbeddedTheory, trials: usize, seed: u64) -> Result<TlWitnessReport> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let n_bits = theory.n_bits;
    let states: Vec<BipartiteState> = BitString::all(n_bits)?
        .map(|mu| theory.entangled_state(mu))
        .collect::<Result<_>>()?;
    let meas = theory.measurement()?;
    let mut rng = sampling::rng_for(seed, 0);
    let mut report = TlWitnessReport {
        trials,
        max_spread: 0.0,
        max_product_residual: 0.0,
        l1_distances: states
            .iter()
            .map(|s| (s.matrix() - states[0].matrix()).abs().sum())
            .collect(),
        max_product_state_residual: 0.0,
    };
    let random_local = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<(f64, Effect)> {
        let eff = sampling::any_effect(theory.m, rng);
        let chi = eff.entries()[0];
        let alpha: Vec<f64> = eff.entries().iter().skip(1).cloned().collect();
        Ok((chi, theory.local_effect(chi, &alpha)?))
    };
    for _ in 0..trials {
        let (chi, e) = random_local(&mut rng)?;
        let (xi, f) = random_local(&mut rng)?;
        let ef = product_effect(&e, &f);
        let values: Vec<f64> = states
            .iter()
            .map(|s| bipartite_contract(&ef, s))
            .collect::<Result<_>>()?;
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        report.max_spread = report.max_spread.max(hi - lo);
        for v in &values {
            report.max_product_residual = report.max_product_residual.max((v - chi * xi).abs());
        }
        let wa = theory.local_state(&sampling::ball_vector(theory.m, &mut rng))?;
        let wb = theory.local_state(&sampling::ball_vector(theory.m, &mut rng))?;
        let prod = product_state(&wa, &wb);
        for p in meas.probabilities(&prod)? {
            let r = (p - 1.0 / pow2(n_bits)).abs();
            report.max_product_state_residual = report.max_product_state_residual.max(r);
        }
    }
    Ok(report)
}

/// Discrete entangled set `block-diag(1, lambda T_hat_mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakTheory {
    n_bits: u32,
    lambda: f64,
}

impl WeakTheory {
    pub fn new(n_bits: u32, lambda: f64) -> Result<Self> {
        check_bits(n_bits)?;
        check_unit_interval("lambda", lambda)?;
        Ok(WeakTheory { n_bits, lambda })
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn state(&self, mu: BitString) -> Result<BipartiteState> {
        lambda_state(mu, self.n_bits, self.lambda)
    }

    /// Sign of the decoding block: the Bell effects are used as they are
    /// for `lambda >= 0` and with the correlation block negated otherwise,
    /// which keeps every outcome probability non-negative.
    pub fn decoding_sign(&self) -> f64 {
        if self.lambda < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn effect(&self, y: BitString) -> Result<BipartiteEffect> {
        tau_effect(y, self.n_bits, self.decoding_sign())
    }

    pub fn measurement(&self) -> Result<BipartiteMeasurement> {
        BipartiteMeasurement::new(
            BitString::all(self.n_bits)?
                .map(|y| self.effect(y))
                .collect::<Result<_>>()?,
        )
    }

    fn encodings(&self) -> Result<Vec<BipartiteState>> {
        let phi0 = self.state(BitString::zero(self.n_bits)?)?;
        BitString::all(self.n_bits)?
            .map(|x| hadamard::local_transformation(x).apply_a(&phi0))
            .collect()
    }
}

/// Dense coding with `T_x phi_0^(lambda)` and the (sign-matched) Bell
/// measurement; the channel is `|lambda| delta_xy + 2^-N (1 - |lambda|)`.
pub fn weak_dense_coding(theory: &WeakTheory) -> Result<Channel> {
    let table = capacity::outcome_table(&theory.encodings()?, &theory.measurement()?)?;
    Channel::with_uniform_prior(table)
}

/// Randomized search over decodings for the weak theory. Trial 0 is the
/// sign-matched Bell measurement; the rest coarse-grain the scaled family
/// `{E^(s t)}` for random `t` in `[0, 1]` and mix it with a product of
/// canonical measurements. Messages are random subsets of the encodings
/// `T_x phi_0^(lambda)`, and priors are optimized.
pub fn weak_decoding_search(theory: &WeakTheory, trials: usize, seed: u64) -> Result<SearchSummary> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let n_bits = theory.n_bits;
    let d = dim(n_bits);
    let n = d - 1;
    let encodings = theory.encodings()?;
    let results: Result<Vec<CapacityResult>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            if t == 0 {
                return capacity::channel_capacity(&capacity::outcome_table(
                    &encodings,
                    &theory.measurement()?,
                )?);
            }
            let mut rng = sampling::rng_for(seed, t as u64);
            let k = rand::Rng::random_range(&mut rng, 2..=d);
            let chosen: Vec<BipartiteState> = (0..k)
                .map(|_| encodings[rand::Rng::random_range(&mut rng, 0..d)].clone())
                .collect();
            let scale: f64 = rand::Rng::random(&mut rng);
            let w: f64 = rand::Rng::random(&mut rng);
            let outcomes = rand::Rng::random_range(&mut rng, 2..=d);
            let mut acc = vec![DMatrix::<f64>::zeros(d, d); outcomes];
            for y in BitString::all(n_bits)? {
                let e = tau_effect(y, n_bits, theory.decoding_sign() * scale)?;
                acc[rand::Rng::random_range(&mut rng, 0..outcomes)] += e.matrix() * w;
            }
            let ma = sampling::hst_measurement(n, 2, 2, &mut rng);
            let mb = sampling::hst_measurement(n, 2, 2, &mut rng);
            for ea in ma.effects() {
                for eb in mb.effects() {
                    acc[rand::Rng::random_range(&mut rng, 0..outcomes)] +=
                        product_effect(ea, eb).matrix() * (1.0 - w);
                }
            }
            let meas = BipartiteMeasurement::new(acc.into_iter().map(BipartiteEffect::new).collect())?;
            capacity::search_capacity(&capacity::outcome_table(&chosen, &meas)?)
        })
        .collect();
    Ok(capacity::summarize(results?))
}

/// Mutual information of [`weak_dense_coding`].
pub fn weak_dense_coding_info(theory: &WeakTheory) -> Result<f64> {
    Ok(mutual_information(&weak_dense_coding(theory)?))
}

/// One named norm inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct LemmaReport {
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LemmaCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn upper(&mut self, name: String, value: f64, bound: f64) {
        self.checks.push(LemmaCheck {
            name,
            value,
            bound,
            passed: value <= bound + EPS_EXACT,
        });
    }

    fn lower(&mut self, name: String, value: f64, bound: f64) {
        self.checks.push(LemmaCheck {
            name,
            value,
            bound,
            passed: value >= bound - EPS_EXACT,
        });
    }
}

/// Norm bounds on a bipartite hypersphere state `(1, b^t; a, C)`:
/// `|a| <= 1`, `|b| <= 1` and `|c_k| <= 1` for every column `c_k` of `C`.
pub fn lemma_state_check(phi: &BipartiteState) -> LemmaReport {
    let mut report = LemmaReport::default();
    report.upper("|a|".into(), phi.a().norm(), 1.0);
    report.upper("|b|".into(), phi.b().norm(), 1.0);
    let core = phi.core();
    for (k, col) in core.column_iter().enumerate() {
        report.upper(format!("|c_{}|", k + 1), col.norm(), 1.0);
    }
    report
}

/// Norm bounds on a bipartite hypersphere effect `(gamma, beta^t; alpha,
/// Gamma)`: `0 <= gamma <= 1` and `|alpha|`, `|beta|`, `|gamma_k|` all at
/// most `min(gamma, 1 - gamma)`. Dividing by `gamma` gives the factored form
/// `gamma (1, beta'^t; alpha', Gamma')` with every norm at most 1.
pub fn lemma_effect_check(effect: &BipartiteEffect) -> LemmaReport {
    let mut report = LemmaReport::default();
    let g = effect.gamma();
    report.lower("gamma".into(), g, 0.0);
    report.upper("gamma".into(), g, 1.0);
    let cap = g.min(1.0 - g).max(0.0);
    report.upper("|alpha|".into(), effect.alpha().norm(), cap);
    report.upper("|beta|".into(), effect.beta().norm(), cap);
    let core = effect.core();
    for (k, col) in core.column_iter().enumerate() {
        report.upper(format!("|gamma_{}|", k + 1), col.norm(), cap);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(v: usize, n: u32) -> BitString {
        BitString::new(v, n).unwrap()
    }

    #[test]
    fn lt_channel_optimal_two_bits_is_identity() {
        let th = LambdaTauTheory::optimal(2).unwrap();
        let ch = lt_channel(&th).unwrap();
        assert!(ch.is_exact_identity());
        assert_eq!(mutual_information(&ch), 2.0);
    }

    #[test]
    fn lt_channel_zero_product_is_uniform() {
        let th = LambdaTauTheory::new(3, 0.0, 1.0).unwrap();
        let ch = lt_channel(&th).unwrap();
        assert!(ch.conditional().iter().flatten().all(|&p| p == 0.125));
        assert_eq!(mutual_information(&ch), 0.0);
    }

    #[test]
    fn full_strength_is_inadmissible_from_three_bits() {
        assert!(LambdaTauTheory::new(2, 1.0, 1.0).is_ok());
        for n in 3..=6 {
            assert!(matches!(
                LambdaTauTheory::new(n, 1.0, 1.0),
                Err(Error::Admissibility(_))
            ));
        }
        assert!(LambdaTauTheory::new(3, 1.0 / 3.0, 1.0).is_err());
        assert!(LambdaTauTheory::new(3, -0.2, 1.0).is_err());
        assert!(LambdaTauTheory::new(1, 0.1, 0.1).is_err());
        assert!(LambdaTauTheory::new(3, 1.5, 0.0).is_err());
    }

    #[test]
    fn probe_matches_closed_form_and_flags_violations() {
        for n in 2..=6u32 {
            let (lo, hi) = admissible_range(n).unwrap();
            let p = pow2(n);
            for lt in [lo, 0.0, hi, lo - 1e-3, hi + 1e-3] {
                if lt.abs() > 1.0 {
                    continue;
                }
                let probe = admissibility_probe(n, lt, 1.0).unwrap();
                assert!((probe.on_phi0 - (1.0 + (p - 1.0) * lt) / p).abs() < EPS_EXACT);
                assert!((probe.on_witness - (1.0 - (p - 3.0) * lt) / p).abs() < EPS_EXACT);
                let inside = lt >= lo - EPS_EXACT && lt <= hi + EPS_EXACT;
                assert_eq!(probe.admissible, inside, "N={n} lt={lt}");
                assert_eq!(LambdaTauTheory::new(n, lt, 1.0).is_ok(), inside);
            }
        }
    }

    #[test]
    fn optimal_info_values() {
        assert!((lt_optimal_info(2).unwrap() - 2.0).abs() < 1e-12);
        let three = lt_optimal_info(3).unwrap();
        assert!((three - 0.154).abs() < 0.001, "{three}");
        assert!((lt_optimal_info(5).unwrap() - 0.02).abs() < 0.005);
        assert!(lt_optimal_info(1).is_err());
        let mut prev = f64::INFINITY;
        for n in 2..=10 {
            let v = lt_optimal_info(n).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn lt_channel_info_matches_closed_form() {
        for n in 2..=5u32 {
            let th = LambdaTauTheory::optimal(n).unwrap();
            let info = mutual_information(&lt_channel(&th).unwrap());
            assert!((info - lt_optimal_info(n).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn embedded_dense_coding_is_perfect() {
        for (n, m, seed) in [(2, 2, 0), (3, 4, 1), (3, 2, 99)] {
            let th = EmbeddedTheory::new(n, m).unwrap();
            let ch = embedded_dense_coding(&th, seed).unwrap();
            assert_eq!(mutual_information(&ch), f64::from(n));
        }
        assert!(EmbeddedTheory::new(1, 2).is_err());
        assert!(EmbeddedTheory::new(2, 0).is_err());
    }

    #[test]
    fn embedded_rejects_improper_rotation() {
        let th = EmbeddedTheory::new(2, 2).unwrap();
        let reflection = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(th.transformation(bs(0, 2), &reflection).is_err());
    }

    #[test]
    fn embedded_witness() {
        let th = EmbeddedTheory::new(3, 4).unwrap();
        let r = tl_violation_witness(&th, 200, 5).unwrap();
        assert!(r.witnessed(), "{r:?}");
        assert!(r.max_product_state_residual < EPS_EXACT);
        assert_eq!(r.l1_distances[0], 0.0);
        assert!(r.l1_distances[1..].iter().all(|&d| d == 8.0));
        assert!(embedded_invariance(&th, 200, 2).unwrap() < 1e-12);
    }

    #[test]
    fn weak_theory_reduces_to_base_at_full_strength() {
        for n in 2..=4 {
            let info = weak_dense_coding_info(&WeakTheory::new(n, 1.0).unwrap()).unwrap();
            assert_eq!(info, f64::from(n));
        }
    }

    #[test]
    fn weak_theory_negative_lambda_mirrors_positive() {
        let pos = weak_dense_coding(&WeakTheory::new(3, 0.4).unwrap()).unwrap();
        let neg = weak_dense_coding(&WeakTheory::new(3, -0.4).unwrap()).unwrap();
        for (a, b) in pos.conditional().iter().flatten().zip(neg.conditional().iter().flatten()) {
            assert!((a - b).abs() < EPS_EXACT);
        }
    }

    #[test]
    fn weak_theory_thresholds() {
        for n in 2..=5 {
            for (j, cap) in [(0, 1.0), (1, 2.0)] {
                let l = capacity::weak_threshold(j, n).unwrap();
                if l > 1.0 {
                    continue;
                }
                let th = WeakTheory::new(n, l).unwrap();
                let info = weak_dense_coding_info(&th).unwrap();
                assert!(info <= cap + 1e-6);
                assert!(info <= capacity::weak_entanglement_bound(l, n).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn lemma_checks_on_constructed_objects() {
        for mu in BitString::all(3).unwrap() {
            let s = lemma_state_check(&hadamard::entangled_state(mu));
            assert!(s.passed());
            assert!(s.checks.iter().filter(|c| c.name.starts_with("|c_")).all(|c| c.value == 1.0));
            assert!(lemma_effect_check(&hadamard::entangled_effect(mu)).passed());
        }
        let mut m = DMatrix::<f64>::identity(3, 3);
        m[(1, 1)] = 1.5;
        let bad = BipartiteState::new(m).unwrap();
        let r = lemma_state_check(&bad);
        assert!(!r.passed());
        assert_eq!(r.failures().next().unwrap().name, "|c_1|");
        let too_big = BipartiteEffect::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.6, 0.0]));
        assert!(!lemma_effect_check(&too_big).passed());
        assert!(lemma_effect_check(&BipartiteEffect::unit(3, 3)).passed());
    }
}
