//! Hadamard sign vectors, the entangled states and Bell-type effects built
//! from them, and the diagonal local transformation group.
//!
//! Bit strings are stored little-endian in a machine word: bit `l` of the
//! integer is the `l`-th bit of the string. The inner product `mu . nu` is
//! the parity of `mu & nu`, so group laws reduce to XOR and are exact.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::{
    bipartite_contract, product_effect, BipartiteEffect, BipartiteMeasurement, BipartiteState,
    State, Transformation, EPS_EXACT,
};
use crate::sampling;

/// Largest supported string length; `2^MAX_BITS` components stay addressable.
pub const MAX_BITS: u32 = 20;

/// A length-`len` bit string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BitString {
    value: usize,
    len: u32,
}

impl BitString {
    pub fn new(value: usize, len: u32) -> Result<Self> {
        check_bits(len)?;
        if value >= 1usize << len {
            return Err(Error::Domain(format!(
                "bit string value {value} does not fit in {len} bits"
            )));
        }
        Ok(BitString { value, len })
    }

    pub fn zero(len: u32) -> Result<Self> {
        BitString::new(0, len)
    }

    pub fn value(self) -> usize {
        self.value
    }

    pub fn len(self) -> u32 {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn bit(self, l: u32) -> bool {
        (self.value >> l) & 1 == 1
    }

    pub fn xor(self, other: BitString) -> Result<BitString> {
        if self.len != other.len {
            return Err(Error::dims(self.len, other.len));
        }
        Ok(BitString {
            value: self.value ^ other.value,
            len: self.len,
        })
    }

    /// `mu . nu` modulo 2.
    pub fn dot(self, other: BitString) -> u32 {
        parity(self.value & other.value)
    }

    /// All strings of the given length in increasing order.
    pub fn all(len: u32) -> Result<impl Iterator<Item = BitString>> {
        check_bits(len)?;
        Ok((0..1usize << len).map(move |value| BitString { value, len }))
    }
}

fn parity(x: usize) -> u32 {
    x.count_ones() & 1
}

fn check_bits(len: u32) -> Result<()> {
    if len == 0 || len > MAX_BITS {
        return Err(Error::Domain(format!(
            "number of bits must be in 1..={MAX_BITS}, got {len}"
        )));
    }
    Ok(())
}

/// The sign vector `d_mu` with components `(-1)^(mu . nu)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HadamardVector {
    n_bits: u32,
    entries: Vec<i8>,
}

impl HadamardVector {
    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Recovers `mu` from the components at `nu = 2^l`, which equal
    /// `(-1)^(mu_l)`.
    pub fn label(&self) -> BitString {
        let value = (0..self.n_bits)
            .filter(|&l| self.entries[1usize << l] < 0)
            .fold(0usize, |acc, l| acc | (1 << l));
        BitString {
            value,
            len: self.n_bits,
        }
    }

    /// Exact integer inner product.
    pub fn dot(&self, other: &HadamardVector) -> i64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| i64::from(a) * i64::from(b))
            .sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(|&x| f64::from(x)).collect()
    }

    /// Number of `-1` components.
    pub fn negatives(&self) -> usize {
        self.entries.iter().filter(|&&x| x < 0).count()
    }
}

/// `d_mu`.
pub fn hadamard_vector(mu: BitString) -> HadamardVector {
    let entries = (0..1usize << mu.len)
        .map(|nu| if parity(mu.value & nu) == 0 { 1 } else { -1 })
        .collect();
    HadamardVector {
        n_bits: mu.len,
        entries,
    }
}

/// Component-wise product `d_mu o d_mu'`.
pub fn elementwise_product(a: &HadamardVector, b: &HadamardVector) -> Result<HadamardVector> {
    if a.n_bits != b.n_bits {
        return Err(Error::dims(a.n_bits, b.n_bits));
    }
    Ok(HadamardVector {
        n_bits: a.n_bits,
        entries: a.entries.iter().zip(&b.entries).map(|(x, y)| x * y).collect(),
    })
}

fn diag_matrix(d: &HadamardVector, scale: f64) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(
        d.len(),
        d.entries.iter().map(|&x| scale * f64::from(x)),
    ))
}

/// The entangled state `phi_mu = diag(d_mu)`.
pub fn entangled_state(mu: BitString) -> BipartiteState {
    BipartiteState::from_matrix_unchecked(diag_matrix(&hadamard_vector(mu), 1.0))
}

/// The Bell-type effect `E_mu = 2^-N phi_mu`.
pub fn entangled_effect(mu: BitString) -> BipartiteEffect {
    let scale = (-(mu.len as f64)).exp2();
    BipartiteEffect::new(diag_matrix(&hadamard_vector(mu), scale))
}

/// The measurement `{E_mu}` over all `mu` of length `n_bits`, ordered by `mu`.
pub fn bell_measurement(n_bits: u32) -> Result<BipartiteMeasurement> {
    BipartiteMeasurement::new(BitString::all(n_bits)?.map(entangled_effect).collect())
}

/// Label of `phi` if it equals one of the `phi_mu` exactly.
pub fn entangled_label(phi: &BipartiteState, n_bits: u32) -> Option<BitString> {
    let dim = 1usize << n_bits;
    if phi.shape() != (dim, dim) {
        return None;
    }
    let m = phi.matrix();
    let mut value = 0usize;
    for l in 0..n_bits {
        if m[(1 << l, 1 << l)] < 0.0 {
            value |= 1 << l;
        }
    }
    let mu = BitString::new(value, n_bits).ok()?;
    (entangled_state(mu).matrix() == m).then_some(mu)
}

/// The local transformation `T_mu = diag(d_mu) = block-diag(1, T_hat_mu)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalTransformation {
    label: BitString,
    diagonal: HadamardVector,
}

impl LocalTransformation {
    pub fn label(&self) -> BitString {
        self.label
    }

    pub fn diagonal(&self) -> &HadamardVector {
        &self.diagonal
    }

    pub fn matrix(&self) -> Transformation {
        Transformation::new(diag_matrix(&self.diagonal, 1.0)).expect("diagonal matrix is square")
    }

    /// `T_mu' T_mu`, computed on the diagonals.
    pub fn compose(&self, other: &LocalTransformation) -> Result<LocalTransformation> {
        let diagonal = elementwise_product(&self.diagonal, &other.diagonal)?;
        let label = self.label.xor(other.label)?;
        debug_assert_eq!(diagonal.label(), label);
        Ok(LocalTransformation { label, diagonal })
    }

    /// Determinant of the lower block `T_hat_mu`, exact.
    pub fn hat_determinant(&self) -> i8 {
        self.diagonal.entries[1..].iter().product()
    }

    pub fn apply_state(&self, state: &State) -> Result<State> {
        self.matrix().apply(state)
    }

    /// `T_mu phi`.
    pub fn apply_a(&self, phi: &BipartiteState) -> Result<BipartiteState> {
        self.matrix().apply_a(phi)
    }

    /// `phi T_mu^t`.
    pub fn apply_b(&self, phi: &BipartiteState) -> Result<BipartiteState> {
        self.matrix().apply_b(phi)
    }
}

pub fn local_transformation(mu: BitString) -> LocalTransformation {
    LocalTransformation {
        label: mu,
        diagonal: hadamard_vector(mu),
    }
}

/// `T_a T_b`, which equals `T_{a xor b}`.
pub fn compose(a: &LocalTransformation, b: &LocalTransformation) -> Result<LocalTransformation> {
    a.compose(b)
}

/// Exhaustive checks of the algebra of `D_N` and `T_N` for one `N`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GroupReport {
    pub n_bits: u32,
    pub pairs_checked: usize,
    pub orthogonality_failures: usize,
    pub product_failures: usize,
    pub composition_failures: usize,
    pub column_sum_failures: usize,
    pub balance_failures: usize,
    pub determinant_failures: usize,
}

impl GroupReport {
    pub fn passed(&self) -> bool {
        self.orthogonality_failures == 0
            && self.product_failures == 0
            && self.composition_failures == 0
            && self.column_sum_failures == 0
            && self.balance_failures == 0
            && self.determinant_failures == 0
    }
}

/// Checks orthogonality `d_mu . d_mu' = 2^N delta`, closure
/// `d_mu o d_mu' = d_{mu xor mu'}`, `T_mu T_mu' = T_{mu xor mu'}`, the column
/// sums, the sign balance of each `d_mu` and `det T_hat_mu = +1` over every
/// pair of labels. All arithmetic is integer.
pub fn verify_group(n_bits: u32) -> Result<GroupReport> {
    check_bits(n_bits)?;
    let dim = 1usize << n_bits;
    let vectors: Vec<HadamardVector> = BitString::all(n_bits)?.map(hadamard_vector).collect();
    let transforms: Vec<LocalTransformation> =
        BitString::all(n_bits)?.map(local_transformation).collect();

    let per_mu: Vec<(usize, usize, usize)> = (0..dim)
        .into_par_iter()
        .map(|mu| {
            let mut orth = 0;
            let mut prod = 0;
            let mut comp = 0;
            for nu in 0..dim {
                let expected = if mu == nu { dim as i64 } else { 0 };
                if vectors[mu].dot(&vectors[nu]) != expected {
                    orth += 1;
                }
                let p = elementwise_product(&vectors[mu], &vectors[nu]).expect("same length");
                if p != vectors[mu ^ nu] {
                    prod += 1;
                }
                let c = transforms[nu].compose(&transforms[mu]).expect("same length");
                if c != transforms[mu ^ nu] {
                    comp += 1;
                }
            }
            (orth, prod, comp)
        })
        .collect();

    let mut report = GroupReport {
        n_bits,
        pairs_checked: dim * dim,
        ..GroupReport::default()
    };
    for (o, p, c) in per_mu {
        report.orthogonality_failures += o;
        report.product_failures += p;
        report.composition_failures += c;
    }
    for nu in 0..dim {
        let sum: i64 = vectors.iter().map(|d| i64::from(d.entries[nu])).sum();
        let expected = if nu == 0 { dim as i64 } else { 0 };
        if sum != expected {
            report.column_sum_failures += 1;
        }
    }
    for (mu, d) in vectors.iter().enumerate() {
        let expected = if mu == 0 { 0 } else { dim / 2 };
        if d.negatives() != expected || d.entries[0] != 1 {
            report.balance_failures += 1;
        }
    }
    if n_bits >= 2 {
        report.determinant_failures = transforms
            .iter()
            .filter(|t| t.hat_determinant() != 1)
            .count();
    }
    Ok(report)
}

/// Outcome of probing a bipartite state with random extremal product
/// effects.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub samples: usize,
    pub unit_value: f64,
    pub min_value: f64,
    pub max_value: f64,
    /// Largest deviation from `1/4 (1 + alpha . T_hat_mu beta)` when the
    /// state is one of the `phi_mu`.
    pub max_formula_residual: Option<f64>,
    pub violations: Vec<MembershipViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipViolation {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub value: f64,
    pub reason: String,
}

impl MembershipReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `phi` lies in the maximal tensor product on `samples` random
/// extremal product effects `e_alpha (x) e_beta`, plus the normalization
/// `u_AB . phi = 1`. For `phi = phi_mu` the value is additionally compared
/// with `1/4 (1 + alpha . T_hat_mu beta)` and must not exceed 1/2.
pub fn verify_max_tensor_membership(
    phi: &BipartiteState,
    n_bits: u32,
    samples: usize,
    seed: u64,
) -> Result<MembershipReport> {
    let dim = 1usize << n_bits;
    if phi.shape() != (dim, dim) {
        return Err(Error::dims(format!("{dim}x{dim}"), format!("{:?}", phi.shape())));
    }
    let n = dim - 1;
    let pure = entangled_label(phi, n_bits);
    let t_hat = pure.map(|mu| hadamard_vector(mu));
    let unit_value = bipartite_contract(&BipartiteEffect::unit(n, n), phi)?;
    let mut report = MembershipReport {
        samples,
        unit_value,
        min_value: f64::INFINITY,
        max_value: f64::NEG_INFINITY,
        max_formula_residual: pure.map(|_| 0.0),
        violations: Vec::new(),
    };
    if (unit_value - 1.0).abs() > EPS_EXACT {
        report.violations.push(MembershipViolation {
            alpha: vec![],
            beta: vec![],
            value: unit_value,
            reason: "unit effect does not give probability 1".into(),
        });
    }
    let mut rng = sampling::rng_for(seed, u64::from(n_bits));
    for _ in 0..samples {
        let alpha = sampling::unit_vector(n, &mut rng);
        let beta = sampling::unit_vector(n, &mut rng);
        let e = product_effect(
            &sampling::extremal_effect(&alpha),
            &sampling::extremal_effect(&beta),
        );
        let value = bipartite_contract(&e, phi)?;
        report.min_value = report.min_value.min(value);
        report.max_value = report.max_value.max(value);
        let mut reason = None;
        if !(-EPS_EXACT..=1.0 + EPS_EXACT).contains(&value) {
            reason = Some("probability outside [0, 1]".to_string());
        }
        if let Some(d) = &t_hat {
            let rotated: f64 = alpha
                .iter()
                .zip(&beta)
                .zip(&d.entries[1..])
                .map(|((a, b), &s)| a * b * f64::from(s))
                .sum();
            let formula = 0.25 * (1.0 + rotated);
            let residual = (value - formula).abs();
            if let Some(r) = report.max_formula_residual.as_mut() {
                *r = r.max(residual);
            }
            if residual > EPS_EXACT {
                reason = Some(format!("differs from closed form {formula}"));
            } else if value > 0.5 + EPS_EXACT {
                reason = Some("exceeds 1/2".into());
            }
        }
        if let Some(reason) = reason {
            report.violations.push(MembershipViolation {
                alpha,
                beta,
                value,
                reason,
            });
        }
    }
    Ok(report)
}

/// Rebuilds a bipartite state of shape `(n_a + 1) x (n_b + 1)` from the
/// probabilities that `oracle` assigns to local product effects
/// `1/2 (1, +-v_i) (x) 1/2 (1, +-v_j)` and products with the unit effect.
///
/// With `P(s, t)` the probability of `e_{s v_i} (x) e_{t v_j}`, the core entry
/// is `C_ij = P(+,+) - P(+,-) - P(-,+) + P(-,-)`; the marginal entries come
/// from `e_{+v_i} (x) u - e_{-v_i} (x) u`.
pub fn local_tomography<F>(n_a: usize, n_b: usize, oracle: F) -> BipartiteState
where
    F: Fn(&BipartiteEffect) -> f64,
{
    let axis = |n: usize, i: usize, sign: f64| {
        let mut v = vec![0.0; n];
        v[i] = sign;
        sampling::extremal_effect(&v)
    };
    let u_a = crate::gpt::Effect::unit(n_a);
    let u_b = crate::gpt::Effect::unit(n_b);
    let mut m = DMatrix::zeros(n_a + 1, n_b + 1);
    m[(0, 0)] = oracle(&product_effect(&u_a, &u_b));
    for i in 0..n_a {
        let plus = oracle(&product_effect(&axis(n_a, i, 1.0), &u_b));
        let minus = oracle(&product_effect(&axis(n_a, i, -1.0), &u_b));
        m[(i + 1, 0)] = plus - minus;
    }
    for j in 0..n_b {
        let plus = oracle(&product_effect(&u_a, &axis(n_b, j, 1.0)));
        let minus = oracle(&product_effect(&u_a, &axis(n_b, j, -1.0)));
        m[(0, j + 1)] = plus - minus;
    }
    for i in 0..n_a {
        for j in 0..n_b {
            let mut c = 0.0;
            for (s, t) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let p = oracle(&product_effect(&axis(n_a, i, s), &axis(n_b, j, t)));
                c += s * t * p;
            }
            m[(i + 1, j + 1)] = c;
        }
    }
    BipartiteState::from_matrix_unchecked(m)
}

/// Local tomography of a known state through exact contractions.
pub fn tomography_of(phi: &BipartiteState) -> BipartiteState {
    let (r, c) = phi.shape();
    local_tomography(r - 1, c - 1, |e| {
        bipartite_contract(e, phi).expect("shapes agree by construction")
    })
}
