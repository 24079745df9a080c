//! State/effect algebra for generalized probabilistic theories in the
//! matrix representation.
//!
//! Single-system vectors carry the normalization component at index 0.
//! Bipartite objects are `(n_A + 1) x (n_B + 1)` matrices with row index on
//! the A side and column index on the B side, so a bipartite state reads
//!
//! ```text
//! [ 1   b^t ]
//! [ a   C   ]
//! ```
//!
//! Probabilities are Euclidean inner products (`e . w`) for single systems
//! and the Frobenius product `Tr(E^t phi)` for bipartite systems.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for identities that are exact in dyadic arithmetic.
pub const EPS_EXACT: f64 = 1e-12;
/// Tolerance for outputs of iterative optimizers.
pub const EPS_OPT: f64 = 1e-6;

/// A normalized single-system state `(1, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State(DVector<f64>);

impl State {
    /// Wraps a raw vector; the leading component must equal 1.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        match entries.first() {
            None => Err(Error::Domain("state vector must be non-empty".into())),
            Some(&first) if (first - 1.0).abs() > EPS_EXACT => Err(Error::Domain(format!(
                "state normalization component is {first}, expected 1"
            ))),
            Some(_) => Ok(State(DVector::from_vec(entries))),
        }
    }

    /// Builds `(1, r)` from the coordinates `r`.
    pub fn from_coords(r: &[f64]) -> Self {
        let mut v = Vec::with_capacity(r.len() + 1);
        v.push(1.0);
        v.extend_from_slice(r);
        State(DVector::from_vec(v))
    }

    /// The maximally mixed state `(1, 0)` of an `n`-dimensional system.
    pub fn mixed(n: usize) -> Self {
        let mut v = DVector::zeros(n + 1);
        v[0] = 1.0;
        State(v)
    }

    pub fn entries(&self) -> &DVector<f64> {
        &self.0
    }

    /// Number of components including normalization (`n + 1`).
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The coordinate part `r`.
    pub fn coords(&self) -> &[f64] {
        &self.0.as_slice()[1..]
    }

    pub fn coord_norm(&self) -> f64 {
        self.coords().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &State, w: f64) -> Result<State> {
        same_len(self.len(), other.len())?;
        Ok(State(&self.0 * w + &other.0 * (1.0 - w)))
    }
}

/// A single-system effect.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect(DVector<f64>);

impl Effect {
    pub fn new(entries: Vec<f64>) -> Self {
        Effect(DVector::from_vec(entries))
    }

    pub fn from_vector(v: DVector<f64>) -> Self {
        Effect(v)
    }

    /// Unit effect `u = (1, 0)`.
    pub fn unit(n: usize) -> Self {
        let mut v = DVector::zeros(n + 1);
        v[0] = 1.0;
        Effect(v)
    }

    pub fn zero(n: usize) -> Self {
        Effect(DVector::zeros(n + 1))
    }

    pub fn entries(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, w: f64) -> Effect {
        Effect(&self.0 * w)
    }
}

/// An ordered list of effects that should sum to the unit effect.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    effects: Vec<Effect>,
}

impl Measurement {
    /// Collects effects of a common length. Whether they sum to the unit is
    /// checked by [`crate::theory::validate_measurement`].
    pub fn new(effects: Vec<Effect>) -> Result<Self> {
        let Some(first) = effects.first() else {
            return Err(Error::Domain("measurement needs at least one effect".into()));
        };
        let len = first.len();
        for e in &effects {
            same_len(len, e.len())?;
        }
        Ok(Measurement { effects })
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// Component-wise sum of all effects.
    pub fn effect_sum(&self) -> DVector<f64> {
        let mut acc = DVector::zeros(self.effects[0].len());
        for e in &self.effects {
            acc += &e.0;
        }
        acc
    }

    /// Outcome distribution on `state`.
    pub fn probabilities(&self, state: &State) -> Result<Vec<f64>> {
        self.effects.iter().map(|e| contract(e, state)).collect()
    }
}

/// A bipartite state matrix with unit top-left entry.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState(DMatrix<f64>);

impl BipartiteState {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::Domain("bipartite state must be non-empty".into()));
        }
        let corner = matrix[(0, 0)];
        if (corner - 1.0).abs() > EPS_EXACT {
            return Err(Error::Domain(format!(
                "bipartite state normalization entry is {corner}, expected 1"
            )));
        }
        Ok(BipartiteState(matrix))
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        BipartiteState(matrix)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    /// Local correlation vector `a` (first column below the corner).
    pub fn a(&self) -> DVector<f64> {
        self.0.column(0).rows(1, self.0.nrows() - 1).into_owned()
    }

    /// Local correlation vector `b` (first row right of the corner).
    pub fn b(&self) -> DVector<f64> {
        self.0.row(0).columns(1, self.0.ncols() - 1).transpose()
    }

    /// Correlation core `C`.
    pub fn core(&self) -> DMatrix<f64> {
        self.0
            .view((1, 1), (self.0.nrows() - 1, self.0.ncols() - 1))
            .into_owned()
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &BipartiteState, w: f64) -> Result<BipartiteState> {
        same_shape(self.shape(), other.shape())?;
        Ok(BipartiteState(&self.0 * w + &other.0 * (1.0 - w)))
    }
}

/// A bipartite effect matrix `(gamma, beta^t; alpha, Gamma)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteEffect(DMatrix<f64>);

impl BipartiteEffect {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        BipartiteEffect(matrix)
    }

    /// Unit effect `u_A (x) u_B`.
    pub fn unit(n_a: usize, n_b: usize) -> Self {
        let mut m = DMatrix::zeros(n_a + 1, n_b + 1);
        m[(0, 0)] = 1.0;
        BipartiteEffect(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn gamma(&self) -> f64 {
        self.0[(0, 0)]
    }

    pub fn alpha(&self) -> DVector<f64> {
        self.0.column(0).rows(1, self.0.nrows() - 1).into_owned()
    }

    pub fn beta(&self) -> DVector<f64> {
        self.0.row(0).columns(1, self.0.ncols() - 1).transpose()
    }

    pub fn core(&self) -> DMatrix<f64> {
        self.0
            .view((1, 1), (self.0.nrows() - 1, self.0.ncols() - 1))
            .into_owned()
    }

    pub fn scaled(&self, w: f64) -> BipartiteEffect {
        BipartiteEffect(&self.0 * w)
    }
}

/// A list of bipartite effects intended to form a measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteMeasurement {
    effects: Vec<BipartiteEffect>,
}

impl BipartiteMeasurement {
    pub fn new(effects: Vec<BipartiteEffect>) -> Result<Self> {
        let Some(first) = effects.first() else {
            return Err(Error::Domain("measurement needs at least one effect".into()));
        };
        let shape = first.shape();
        for e in &effects {
            same_shape(shape, e.shape())?;
        }
        Ok(BipartiteMeasurement { effects })
    }

    pub fn effects(&self) -> &[BipartiteEffect] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effect_sum(&self) -> DMatrix<f64> {
        let (r, c) = self.effects[0].shape();
        let mut acc = DMatrix::zeros(r, c);
        for e in &self.effects {
            acc += &e.0;
        }
        acc
    }

    pub fn probabilities(&self, state: &BipartiteState) -> Result<Vec<f64>> {
        self.effects
            .iter()
            .map(|e| bipartite_contract(e, state))
            .collect()
    }
}

/// A linear map on a single system, `block-diag(1, T_hat)` for the theories
/// modelled here.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformation(DMatrix<f64>);

impl Transformation {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dims("square matrix", format!("{:?}", matrix.shape())));
        }
        Ok(Transformation(matrix))
    }

    pub fn identity(len: usize) -> Self {
        Transformation(DMatrix::identity(len, len))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn apply(&self, state: &State) -> Result<State> {
        same_len(self.0.ncols(), state.len())?;
        Ok(State(&self.0 * &state.0))
    }

    /// `T phi`: acts on the A side of a bipartite state.
    pub fn apply_a(&self, phi: &BipartiteState) -> Result<BipartiteState> {
        same_len(self.0.ncols(), phi.0.nrows())?;
        Ok(BipartiteState(&self.0 * &phi.0))
    }

    /// `phi T^t`: acts on the B side of a bipartite state.
    pub fn apply_b(&self, phi: &BipartiteState) -> Result<BipartiteState> {
        same_len(self.0.ncols(), phi.0.ncols())?;
        Ok(BipartiteState(&phi.0 * self.0.transpose()))
    }

    /// `self * other`.
    pub fn compose(&self, other: &Transformation) -> Result<Transformation> {
        same_len(self.0.ncols(), other.0.nrows())?;
        Ok(Transformation(&self.0 * &other.0))
    }
}

/// Probability `e . w`.
pub fn contract(effect: &Effect, state: &State) -> Result<f64> {
    same_len(effect.len(), state.len())?;
    Ok(effect.0.dot(&state.0))
}

/// Probability `Tr(E^t phi) = sum_ij E_ij phi_ij`.
pub fn bipartite_contract(effect: &BipartiteEffect, state: &BipartiteState) -> Result<f64> {
    same_shape(effect.shape(), state.shape())?;
    Ok(effect.0.dot(&state.0))
}

/// `w_A (x) w_B` as the outer product `w_A w_B^t`.
pub fn product_state(a: &State, b: &State) -> BipartiteState {
    BipartiteState(&a.0 * b.0.transpose())
}

/// `e_A (x) e_B` as the outer product `e_A e_B^t`.
pub fn product_effect(a: &Effect, b: &Effect) -> BipartiteEffect {
    BipartiteEffect(&a.0 * b.0.transpose())
}

/// Marginals `(phi u_B, phi^t u_A)`, i.e. the first column and first row.
pub fn reduced_states(phi: &BipartiteState) -> (State, State) {
    let a = phi.0.column(0).into_owned();
    let b = phi.0.row(0).transpose();
    (State(a), State(b))
}

/// A classical channel: a prior over inputs and a row-stochastic table
/// `p(y|x)` with rows indexed by input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Channel {
    prior: Vec<f64>,
    conditional: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(prior: Vec<f64>, conditional: Vec<Vec<f64>>) -> Result<Self> {
        validate_conditional(&conditional)?;
        if prior.len() != conditional.len() {
            return Err(Error::dims(
                format!("prior of length {}", conditional.len()),
                prior.len(),
            ));
        }
        check_distribution(&prior, "prior")?;
        Ok(Channel { prior, conditional })
    }

    /// A channel with uniform prior over its inputs.
    pub fn with_uniform_prior(conditional: Vec<Vec<f64>>) -> Result<Self> {
        let k = conditional.len();
        if k == 0 {
            return Err(Error::InvalidChannel("channel has no inputs".into()));
        }
        Channel::new(vec![1.0 / k as f64; k], conditional)
    }

    /// The noiseless channel on `k` symbols with uniform prior.
    pub fn identity(k: usize) -> Self {
        let conditional = (0..k)
            .map(|x| (0..k).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Channel {
            prior: vec![1.0 / k as f64; k],
            conditional,
        }
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn conditional(&self) -> &[Vec<f64>] {
        &self.conditional
    }

    pub fn num_inputs(&self) -> usize {
        self.conditional.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.conditional[0].len()
    }

    pub fn with_prior(&self, prior: Vec<f64>) -> Result<Channel> {
        Channel::new(prior, self.conditional.clone())
    }

    /// Output marginal `p(y)`.
    pub fn output_distribution(&self) -> Vec<f64> {
        output_distribution(&self.prior, &self.conditional)
    }

    /// Whether `p(y|x) = delta_{x,y}` with no tolerance.
    pub fn is_exact_identity(&self) -> bool {
        self.num_inputs() == self.num_outputs()
            && self.conditional.iter().enumerate().all(|(x, row)| {
                row.iter()
                    .enumerate()
                    .all(|(y, &p)| p == if x == y { 1.0 } else { 0.0 })
            })
    }
}

pub(crate) fn validate_conditional(conditional: &[Vec<f64>]) -> Result<()> {
    let Some(first) = conditional.first() else {
        return Err(Error::InvalidChannel("channel has no inputs".into()));
    };
    let width = first.len();
    if width == 0 {
        return Err(Error::InvalidChannel("channel has no outputs".into()));
    }
    for (x, row) in conditional.iter().enumerate() {
        if row.len() != width {
            return Err(Error::InvalidChannel(format!(
                "row {x} has {} entries, expected {width}",
                row.len()
            )));
        }
        check_distribution(row, &format!("row {x}"))?;
    }
    Ok(())
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if let Some(v) = p
        .iter()
        .find(|&&v| !v.is_finite() || v < -EPS_EXACT || v > 1.0 + EPS_EXACT)
    {
        return Err(Error::InvalidChannel(format!(
            "{what} has entry {v} outside [0, 1]"
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > EPS_EXACT * p.len().max(1) as f64 {
        return Err(Error::InvalidChannel(format!("{what} sums to {total}")));
    }
    Ok(())
}

pub(crate) fn output_distribution(prior: &[f64], conditional: &[Vec<f64>]) -> Vec<f64> {
    let mut q = vec![0.0; conditional[0].len()];
    for (px, row) in prior.iter().zip(conditional) {
        for (qy, w) in q.iter_mut().zip(row) {
            *qy += px * w;
        }
    }
    q
}

/// `I(X:Y)` in bits with `0 log 0 = 0`.
pub fn mutual_information(channel: &Channel) -> f64 {
    mutual_information_raw(&channel.prior, &channel.conditional)
}

pub(crate) fn mutual_information_raw(prior: &[f64], conditional: &[Vec<f64>]) -> f64 {
    let q = output_distribution(prior, conditional);
    let mut info = 0.0;
    for (px, row) in prior.iter().zip(conditional) {
        if *px <= 0.0 {
            continue;
        }
        for (w, qy) in row.iter().zip(&q) {
            if *w > 0.0 && *qy > 0.0 {
                info += px * w * (w / qy).log2();
            }
        }
    }
    // rounding can leave a tiny negative value for independent channels
    info.max(0.0)
}

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.log2())
        .sum()
}

/// Binary entropy `h(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy(&[p, 1.0 - p])
}

fn same_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::dims(expected, actual))
    }
}

fn same_shape(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::dims(
            format!("{}x{}", expected.0, expected.1),
            format!("{}x{}", actual.0, actual.1),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half(m: &[f64]) -> Effect {
        let mut v = vec![0.5];
        v.extend(m.iter().map(|x| 0.5 * x));
        Effect::new(v)
    }

    #[test]
    fn unit_effect_is_normalization() {
        let u = Effect::unit(2);
        let w = State::from_coords(&[0.3, -0.4]);
        assert_eq!(contract(&u, &w).unwrap(), 1.0);
    }

    #[test]
    fn extremal_effect_on_aligned_and_antipodal_states() {
        let m = [0.6, 0.8, 0.0];
        let e = half(&m);
        let aligned = State::from_coords(&m);
        let anti = State::from_coords(&[-0.6, -0.8, 0.0]);
        assert!((contract(&e, &aligned).unwrap() - 1.0).abs() < EPS_EXACT);
        assert!(contract(&e, &anti).unwrap().abs() < EPS_EXACT);
    }

    #[test]
    fn contract_rejects_length_mismatch() {
        let e = Effect::unit(2);
        let w = State::mixed(3);
        assert!(matches!(
            contract(&e, &w),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bipartite_contract_rejects_shape_mismatch() {
        let e = BipartiteEffect::unit(2, 2);
        let phi = product_state(&State::mixed(2), &State::mixed(3));
        assert!(bipartite_contract(&e, &phi).is_err());
    }

    #[test]
    fn state_requires_unit_normalization() {
        assert!(State::new(vec![0.9, 0.0]).is_err());
        assert!(State::new(vec![]).is_err());
        assert!(State::new(vec![1.0, 0.2]).is_ok());
    }

    #[test]
    fn product_of_units_is_corner_matrix() {
        let phi = product_state(&State::mixed(2), &State::mixed(3));
        let e = BipartiteEffect::unit(2, 3);
        assert_eq!(phi.matrix(), e.matrix());
    }

    #[test]
    fn product_block_structure() {
        let a = State::from_coords(&[0.2, -0.1]);
        let b = State::from_coords(&[0.5, 0.5, 0.1]);
        let phi = product_state(&a, &b);
        assert_eq!(phi.matrix()[(0, 0)], 1.0);
        assert_eq!(phi.a().as_slice(), a.coords());
        assert_eq!(phi.b().as_slice(), b.coords());
        assert_eq!(phi.core()[(1, 2)], -0.1 * 0.1);
        let (ra, rb) = reduced_states(&phi);
        assert_eq!(ra, a);
        assert_eq!(rb, b);
    }

    #[test]
    fn reduced_states_are_linear() {
        let a1 = State::from_coords(&[0.2, 0.0]);
        let b1 = State::from_coords(&[0.0, 0.7]);
        let a2 = State::from_coords(&[-0.5, 0.5]);
        let b2 = State::from_coords(&[0.1, 0.1]);
        let mix = product_state(&a1, &b1)
            .mix(&product_state(&a2, &b2), 0.25)
            .unwrap();
        let (ra, rb) = reduced_states(&mix);
        let ea = a1.mix(&a2, 0.25).unwrap();
        let eb = b1.mix(&b2, 0.25).unwrap();
        assert!((ra.entries() - ea.entries()).amax() < EPS_EXACT);
        assert!((rb.entries() - eb.entries()).amax() < EPS_EXACT);
    }

    #[test]
    fn identity_channel_information() {
        for bits in 0..6u32 {
            let ch = Channel::identity(1 << bits);
            assert_eq!(mutual_information(&ch), bits as f64);
        }
    }

    #[test]
    fn constant_channel_carries_nothing() {
        let ch = Channel::with_uniform_prior(vec![vec![0.3, 0.7]; 3]).unwrap();
        assert_eq!(mutual_information(&ch), 0.0);
    }

    #[test]
    fn binary_symmetric_channel() {
        // direct evaluation of the I(X:Y) sum for flip 0.11 and uniform prior:
        // each of the four joint cells has p(x,y) = p(y|x)/2 and p(y) = 1/2
        let f: f64 = 0.11;
        let oracle = 2.0 * (0.5 * (1.0 - f) * (2.0 * (1.0 - f)).log2() + 0.5 * f * (2.0 * f).log2());
        let ch = Channel::with_uniform_prior(vec![vec![1.0 - f, f], vec![f, 1.0 - f]]).unwrap();
        let got = mutual_information(&ch);
        assert!((got - oracle).abs() < 1e-15);
        assert!((got - (1.0 - binary_entropy(f))).abs() < 1e-15);
        assert!((got - 0.5).abs() < 0.001);
    }

    #[test]
    fn zero_probability_outcomes_are_kept() {
        let ch = Channel::with_uniform_prior(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]])
            .unwrap();
        assert_eq!(ch.num_outputs(), 3);
        assert_eq!(mutual_information(&ch), 1.0);
    }

    #[test]
    fn channel_validation() {
        assert!(Channel::with_uniform_prior(vec![vec![0.5, 0.6]]).is_err());
        assert!(Channel::with_uniform_prior(vec![vec![1.2, -0.2]]).is_err());
        assert!(Channel::with_uniform_prior(vec![vec![1.0], vec![0.5, 0.5]]).is_err());
        assert!(Channel::new(vec![0.5, 0.4], vec![vec![1.0], vec![1.0]]).is_err());
    }

    #[test]
    fn transformation_sides() {
        let t = Transformation::new(DMatrix::from_diagonal(&DVector::from_vec(vec![
            1.0, -1.0,
        ])))
        .unwrap();
        let phi = BipartiteState::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.25, 0.125]))
            .unwrap();
        let left = t.apply_a(&phi).unwrap();
        let right = t.apply_b(&phi).unwrap();
        assert_eq!(left.matrix()[(1, 0)], -0.25);
        assert_eq!(right.matrix()[(0, 1)], -0.5);
    }
}
