//! Seeded random sampling of states, effects, measurements and rotations.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::gpt::{Effect, Measurement, State};

/// Generator for trial `stream` of a sweep seeded with `seed`. Streams are
/// independent, so trials can run in any order or in parallel.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform point on the unit sphere in `R^n` (normalized Gaussian).
pub fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform point in the closed unit ball of `R^n`.
pub fn ball_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let dir = unit_vector(n, rng);
    let u: f64 = rng.random();
    let radius = u.powf(1.0 / n as f64);
    dir.into_iter().map(|x| x * radius).collect()
}

/// Random pure hypersphere state `(1, r)` with `|r| = 1`.
pub fn pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> State {
    State::from_coords(&unit_vector(n, rng))
}

/// Random pure state with probability one half, otherwise a uniform point
/// of the ball.
pub fn any_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> State {
    if rng.random_bool(0.5) {
        pure_state(n, rng)
    } else {
        State::from_coords(&ball_vector(n, rng))
    }
}

/// Weights drawn from the flat Dirichlet distribution on `k` points.
pub fn simplex_weights<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Extremal effect `1/2 (1, m)` for a unit vector `m`.
pub fn extremal_effect(m: &[f64]) -> Effect {
    let mut v = Vec::with_capacity(m.len() + 1);
    v.push(0.5);
    v.extend(m.iter().map(|x| 0.5 * x));
    Effect::new(v)
}

/// Random extremal effect of an `n`-dimensional hypersphere system.
pub fn extremal_effect_random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Effect {
    extremal_effect(&unit_vector(n, rng))
}

/// Random effect in the convex hull of zero, `u` and the extremal effects.
pub fn any_effect<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Effect {
    let w = simplex_weights(3, rng);
    let ext = extremal_effect_random(n, rng);
    let mut v = ext.entries() * w[0];
    v[0] += w[1];
    Effect::from_vector(v)
}

/// Random measurement with `outcomes` outcomes on an `n`-dimensional
/// hypersphere system: a convex mixture of up to `max_components`
/// canonical (or trivial) measurements whose outcomes are relabelled at
/// random onto `0..outcomes`.
pub fn hst_measurement<R: Rng + ?Sized>(
    n: usize,
    outcomes: usize,
    max_components: usize,
    rng: &mut R,
) -> Measurement {
    let components = rng.random_range(1..=max_components.max(1));
    let weights = simplex_weights(components, rng);
    let mut acc = vec![DVector::<f64>::zeros(n + 1); outcomes];
    for w in weights {
        if rng.random_bool(0.9) {
            let m = unit_vector(n, rng);
            let neg: Vec<f64> = m.iter().map(|x| -x).collect();
            for dir in [m, neg] {
                let label = rng.random_range(0..outcomes);
                acc[label] += extremal_effect(&dir).entries() * w;
            }
        } else {
            let label = rng.random_range(0..outcomes);
            acc[label][0] += w;
        }
    }
    Measurement::new(acc.into_iter().map(Effect::from_vector).collect())
        .expect("effects share a length")
}

/// Haar-like random rotation in `SO(m)` from the QR decomposition of a
/// Gaussian matrix, with column signs fixed so the determinant is +1.
pub fn rotation<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    if m == 0 {
        return DMatrix::zeros(0, 0);
    }
    let g = DMatrix::from_fn(m, m, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}
