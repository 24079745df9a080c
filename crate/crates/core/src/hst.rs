//! Single hypersphere systems: states in the unit `n`-ball, extremal
//! effects `1/2 (1, m)` with `|m| = 1`, canonical measurements and the
//! one-bit capacity.

use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{self, CapacityResult, SearchSummary};
use crate::error::{Error, Result};
use crate::gpt::{contract, Channel, Effect, Measurement, State, EPS_EXACT};
use crate::sampling;

/// Largest supported ball dimension.
pub const MAX_DIM: usize = 1 << 20;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::Domain(format!(
            "hypersphere dimension must be in 1..={MAX_DIM}, got {n}"
        )));
    }
    Ok(())
}

/// A point `r` of the unit ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HstState {
    r: Vec<f64>,
}

impl HstState {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        check_dim(r.len())?;
        let nr = norm(&r);
        if !(nr <= 1.0 + EPS_EXACT) {
            return Err(Error::Norm {
                what: "state vector r".into(),
                norm: nr,
                bound: "<= 1".into(),
            });
        }
        Ok(HstState { r })
    }

    pub fn coords(&self) -> &[f64] {
        &self.r
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn is_pure(&self) -> bool {
        (norm(&self.r) - 1.0).abs() <= EPS_EXACT
    }

    pub fn to_state(&self) -> State {
        State::from_coords(&self.r)
    }
}

/// An effect `gamma (1, m)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HstEffect {
    gamma: f64,
    m: Vec<f64>,
}

impl HstEffect {
    /// Extremal effect `1/2 (1, m)` with `|m| = 1`.
    pub fn extremal(m: Vec<f64>) -> Result<Self> {
        check_dim(m.len())?;
        let nm = norm(&m);
        if (nm - 1.0).abs() > EPS_EXACT {
            return Err(Error::Norm {
                what: "effect direction m".into(),
                norm: nm,
                bound: "= 1".into(),
            });
        }
        Ok(HstEffect { gamma: 0.5, m })
    }

    /// General effect; valid iff `0 <= gamma (1 +- |m|) <= 1`.
    pub fn new(gamma: f64, m: Vec<f64>) -> Result<Self> {
        check_dim(m.len())?;
        let nm = norm(&m);
        if !(0.0..=1.0).contains(&gamma) || gamma * (1.0 + nm) > 1.0 + EPS_EXACT || nm > 1.0 + EPS_EXACT
        {
            return Err(Error::Norm {
                what: "effect gamma (1, m)".into(),
                norm: nm,
                bound: format!("gamma = {gamma} requires |m| <= min(1, 1/gamma - 1)"),
            });
        }
        Ok(HstEffect { gamma, m })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn direction(&self) -> &[f64] {
        &self.m
    }

    pub fn to_effect(&self) -> Effect {
        let mut v = Vec::with_capacity(self.m.len() + 1);
        v.push(self.gamma);
        v.extend(self.m.iter().map(|x| self.gamma * x));
        Effect::new(v)
    }
}

/// `(1, r)` for `|r| <= 1`.
pub fn make_state(r: &[f64]) -> Result<State> {
    Ok(HstState::new(r.to_vec())?.to_state())
}

/// `1/2 (1, m)` for `|m| = 1`.
pub fn make_extremal_effect(m: &[f64]) -> Result<Effect> {
    Ok(HstEffect::extremal(m.to_vec())?.to_effect())
}

/// `{e_m, e_-m}`.
pub fn canonical_measurement(m: &[f64]) -> Result<Measurement> {
    let neg: Vec<f64> = m.iter().map(|x| -x).collect();
    Measurement::new(vec![make_extremal_effect(m)?, make_extremal_effect(&neg)?])
}

/// `p(y|x) = e_y . w_x`.
pub fn outcome_table(states: &[State], measurement: &Measurement) -> Result<Vec<Vec<f64>>> {
    states
        .iter()
        .map(|w| {
            measurement
                .effects()
                .iter()
                .map(|e| contract(e, w).map(capacity::clamp_rounding))
                .collect()
        })
        .collect()
}

/// Encodes one bit in the antipodal pure states `(1, +-r)` with a uniform
/// prior and decodes with the canonical measurement along `m`.
pub fn antipodal_protocol(r: &[f64], m: &[f64]) -> Result<Channel> {
    let neg: Vec<f64> = r.iter().map(|x| -x).collect();
    let states = [make_state(r)?, make_state(&neg)?];
    let meas = canonical_measurement(m)?;
    Channel::with_uniform_prior(outcome_table(&states, &meas)?)
}

/// The one-bit protocol along the first axis of an `n`-ball; the channel
/// is the 2x2 identity.
pub fn one_bit_protocol(n: usize) -> Result<Channel> {
    check_dim(n)?;
    let mut r = vec![0.0; n];
    r[0] = 1.0;
    antipodal_protocol(&r, &r)
}

/// Randomized search over encode/decode protocols of an `n`-ball.
///
/// Each trial draws 2 to 8 encoding states (pure or mixed), a decoding
/// measurement with 2 to 6 outcomes built from convex mixtures of canonical
/// measurements and the unit effect, and optimizes the prior with
/// Blahut–Arimoto. Trials use independent seeded streams, so the summary is
/// identical for any thread count.
pub fn random_protocol_search(n: usize, trials: usize, seed: u64) -> Result<SearchSummary> {
    check_dim(n)?;
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let results: Result<Vec<CapacityResult>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = sampling::rng_for(seed, t as u64);
            let k = rand::Rng::random_range(&mut rng, 2..=8);
            let states: Vec<State> = (0..k).map(|_| sampling::any_state(n, &mut rng)).collect();
            let outcomes = rand::Rng::random_range(&mut rng, 2..=6);
            let meas = sampling::hst_measurement(n, outcomes, 8, &mut rng);
            capacity::search_capacity(&outcome_table(&states, &meas)?)
        })
        .collect();
    Ok(capacity::summarize(results?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpt::mutual_information;

    #[test]
    fn constructors() {
        assert_eq!(make_state(&[0.0, 0.0]).unwrap(), State::mixed(2));
        let bloch = HstState::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(bloch.is_pure());
        assert!(!HstState::new(vec![0.5, 0.0, 0.0]).unwrap().is_pure());
        assert!(matches!(
            make_extremal_effect(&[1.1, 0.0]),
            Err(Error::Norm { .. })
        ));
        assert!(make_state(&[1.0, 1.0]).is_err());
        assert!(make_state(&[]).is_err());
        assert!(HstEffect::new(0.8, vec![0.5]).is_err());
        assert!(HstEffect::new(0.5, vec![1.0]).is_ok());
    }

    #[test]
    fn canonical_measurement_probabilities() {
        let e1 = [1.0, 0.0, 0.0];
        let m = canonical_measurement(&e1).unwrap();
        assert_eq!(m.probabilities(&make_state(&e1).unwrap()).unwrap(), vec![1.0, 0.0]);
        assert_eq!(m.probabilities(&State::mixed(3)).unwrap(), vec![0.5, 0.5]);
        let r = [0.3, -0.2, 0.1];
        let p = m.probabilities(&make_state(&r).unwrap()).unwrap();
        assert!((p[0] - 0.5 * (1.0 + 0.3)).abs() < EPS_EXACT);
        assert!((p[1] - 0.5 * (1.0 - 0.3)).abs() < EPS_EXACT);
    }

    #[test]
    fn one_bit_channels() {
        for n in [1, 3, 7] {
            let ch = one_bit_protocol(n).unwrap();
            assert!(ch.is_exact_identity());
            assert_eq!(mutual_information(&ch), 1.0);
        }
    }

    #[test]
    fn orthogonal_decoding_carries_nothing() {
        let ch = antipodal_protocol(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(ch.conditional(), &[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert_eq!(mutual_information(&ch), 0.0);
    }

    #[test]
    fn random_probabilities_are_valid() {
        let mut rng = sampling::rng_for(17, 0);
        for n in 1..=8 {
            for _ in 0..1000 {
                let w = sampling::any_state(n, &mut rng);
                let m = canonical_measurement(&sampling::unit_vector(n, &mut rng)).unwrap();
                let p = m.probabilities(&w).unwrap();
                assert!(p.iter().all(|&x| (-EPS_EXACT..=1.0 + EPS_EXACT).contains(&x)));
                assert!((p[0] + p[1] - 1.0).abs() < EPS_EXACT);
            }
        }
    }

    #[test]
    fn upper_bound_is_monotone() {
        let grid = [0.0, 0.25, 0.5, 1.0, 2.0];
        for &a in &grid {
            for w in grid.windows(2) {
                let lo = capacity::capacity_upper_bound(a, w[0]).unwrap();
                let hi = capacity::capacity_upper_bound(a, w[1]).unwrap();
                assert!(lo <= hi);
                let lo = capacity::capacity_upper_bound(w[0], a).unwrap();
                let hi = capacity::capacity_upper_bound(w[1], a).unwrap();
                assert!(lo <= hi);
            }
        }
    }

    #[test]
    fn small_search_respects_one_bit() {
        for n in [1, 2, 3] {
            let s = random_protocol_search(n, 300, 9).unwrap();
            assert!(s.max_capacity_bits <= 1.0 + 1e-6, "{s:?}");
            assert!(s.max_capacity_bits > 0.5);
        }
    }

    #[test]
    fn search_is_deterministic() {
        let a = random_protocol_search(3, 64, 1).unwrap();
        let b = random_protocol_search(3, 64, 1).unwrap();
        assert_eq!(a, b);
    }
}
