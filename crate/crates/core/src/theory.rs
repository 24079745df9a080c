//! Theory selection and measurement validators.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::{
    bipartite_contract, product_state, BipartiteMeasurement, BipartiteState, Measurement, State,
    EPS_EXACT,
};
use crate::hadamard::{self, BitString};
use crate::hst;
use crate::sampling;
use crate::variants::{EmbeddedTheory, LambdaTauTheory, WeakTheory};

/// Parameters selecting the hypersphere theory or one of the bipartite
/// theories built on `N` bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "theory", rename_all = "kebab-case")]
pub enum TheoryConfig {
    /// A single `n`-ball system.
    Hst { n: usize },
    /// The Hadamard bipartite extension.
    Base { n_bits: u32 },
    LambdaTau { n_bits: u32, lambda: f64, tau: f64 },
    Embedded { n_bits: u32, m: usize },
    Weak { n_bits: u32, lambda: f64 },
}

impl TheoryConfig {
    /// Checks ranges and admissibility.
    pub fn validate(&self) -> Result<()> {
        match *self {
            TheoryConfig::Hst { n } => {
                if n == 0 || n > hst::MAX_DIM {
                    return Err(Error::Domain(format!("hypersphere dimension {n} out of range")));
                }
            }
            TheoryConfig::Base { n_bits } => {
                BitString::zero(n_bits)?;
            }
            TheoryConfig::LambdaTau { n_bits, lambda, tau } => {
                LambdaTauTheory::new(n_bits, lambda, tau)?;
            }
            TheoryConfig::Embedded { n_bits, m } => {
                EmbeddedTheory::new(n_bits, m)?;
            }
            TheoryConfig::Weak { n_bits, lambda } => {
                WeakTheory::new(n_bits, lambda)?;
            }
        }
        Ok(())
    }

    pub fn n_bits(&self) -> Option<u32> {
        match *self {
            TheoryConfig::Hst { .. } => None,
            TheoryConfig::Base { n_bits }
            | TheoryConfig::LambdaTau { n_bits, .. }
            | TheoryConfig::Embedded { n_bits, .. }
            | TheoryConfig::Weak { n_bits, .. } => Some(n_bits),
        }
    }

    /// Length of a local state vector.
    pub fn local_len(&self) -> Result<usize> {
        self.validate()?;
        Ok(match *self {
            TheoryConfig::Hst { n } => n + 1,
            TheoryConfig::Embedded { n_bits, m } => (1usize << n_bits) + m,
            TheoryConfig::Base { n_bits }
            | TheoryConfig::LambdaTau { n_bits, .. }
            | TheoryConfig::Weak { n_bits, .. } => 1usize << n_bits,
        })
    }

    /// Index where the ball coordinates of a local state start. Embedded
    /// systems keep their Hadamard block at zero.
    fn ball_offset(&self) -> usize {
        match *self {
            TheoryConfig::Embedded { n_bits, .. } => 1usize << n_bits,
            _ => 1,
        }
    }

    /// Entangled generators of the bipartite state space, without the
    /// product states. Rotated families are sampled with `seed`.
    pub fn entangled_generators(&self, samples: usize, seed: u64) -> Result<Vec<(String, BipartiteState)>> {
        self.validate()?;
        let mut out = Vec::new();
        match *self {
            TheoryConfig::Hst { .. } => {
                return Err(Error::Domain("hypersphere theory has no bipartite sector".into()))
            }
            TheoryConfig::Base { n_bits } => {
                for mu in BitString::all(n_bits)? {
                    out.push((format!("phi_{}", mu.value()), hadamard::entangled_state(mu)));
                }
            }
            TheoryConfig::LambdaTau { n_bits, lambda, tau } => {
                let th = LambdaTauTheory::new(n_bits, lambda, tau)?;
                for mu in BitString::all(n_bits)? {
                    out.push((format!("phi_{}^(lambda)", mu.value()), th.state(mu)?));
                }
                out.push(("phi_0^(lambda) T'".into(), th.witness_state()));
                let n = (1usize << n_bits) - 1;
                for s in 0..samples {
                    let mut rng = sampling::rng_for(seed, s as u64);
                    let ra = sampling::rotation(n, &mut rng);
                    let rb = sampling::rotation(n, &mut rng);
                    out.push((format!("rotated sample {s}"), th.rotated_state(&ra, &rb)?));
                }
            }
            TheoryConfig::Embedded { n_bits, m } => {
                let th = EmbeddedTheory::new(n_bits, m)?;
                for mu in BitString::all(n_bits)? {
                    out.push((format!("Phi_{}", mu.value()), th.entangled_state(mu)?));
                }
            }
            TheoryConfig::Weak { n_bits, lambda } => {
                let th = WeakTheory::new(n_bits, lambda)?;
                for mu in BitString::all(n_bits)? {
                    out.push((format!("phi_{}^(lambda)", mu.value()), th.state(mu)?));
                }
            }
        }
        Ok(out)
    }

    /// Local pure states used as probes: `+-` each ball axis plus `samples`
    /// random pure states.
    fn local_probes(&self, samples: usize, seed: u64) -> Result<Vec<(String, State)>> {
        let len = self.local_len()?;
        let off = self.ball_offset();
        let dim = len - off;
        let embed = |r: &[f64]| {
            let mut v = vec![0.0; len];
            v[0] = 1.0;
            v[off..].copy_from_slice(r);
            State::new(v).expect("normalized")
        };
        let mut out = vec![("mixed".to_string(), embed(&vec![0.0; dim]))];
        for k in 0..dim {
            for s in [1.0, -1.0] {
                let mut r = vec![0.0; dim];
                r[k] = s;
                let sign = if s > 0.0 { '+' } else { '-' };
                out.push((format!("{sign}axis {}", k + 1), embed(&r)));
            }
        }
        let mut rng = sampling::rng_for(seed, u64::MAX);
        for s in 0..samples {
            out.push((format!("random pure {s}"), embed(&sampling::unit_vector(dim, &mut rng))));
        }
        Ok(out)
    }
}

/// One failed check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub effect: Option<usize>,
    pub state: Option<String>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ValidationReport {
    pub checked_states: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn format_witness(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("(1, {})", parts.join(", "))
}

/// Checks that the effects sum to the unit effect and that every effect is
/// valid on the local state space of `theory`.
///
/// Local state spaces are balls, so validity is decided exactly: an effect
/// `(g, v)` takes values in `[g - |v|, g + |v|]`, and a failing bound comes
/// with the pure state that attains it.
pub fn validate_measurement(measurement: &Measurement, theory: &TheoryConfig) -> Result<ValidationReport> {
    let len = theory.local_len()?;
    let mut report = ValidationReport::default();
    if measurement.effects()[0].len() != len {
        return Err(Error::dims(len, measurement.effects()[0].len()));
    }
    let sum = measurement.effect_sum();
    let mut dev = (sum[0] - 1.0).abs();
    for k in 1..len {
        dev = dev.max(sum[k].abs());
    }
    if dev > EPS_EXACT {
        report.violations.push(Violation {
            check: "sum of effects equals u".into(),
            effect: None,
            state: None,
            value: dev,
        });
    }
    let off = theory.ball_offset();
    for (i, e) in measurement.effects().iter().enumerate() {
        let g = e.entries()[0];
        let v: Vec<f64> = e.entries().iter().skip(off).cloned().collect();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dir: Vec<f64> = if nv > 0.0 { v.iter().map(|x| x / nv).collect() } else { v.clone() };
        report.checked_states += 2;
        if g - nv < -EPS_EXACT {
            let w: Vec<f64> = dir.iter().map(|x| -x).collect();
            report.violations.push(Violation {
                check: "probability >= 0".into(),
                effect: Some(i),
                state: Some(format_witness(&w)),
                value: g - nv,
            });
        }
        if g + nv > 1.0 + EPS_EXACT {
            report.violations.push(Violation {
                check: "probability <= 1".into(),
                effect: Some(i),
                state: Some(format_witness(&dir)),
                value: g + nv,
            });
        }
    }
    Ok(report)
}

/// Checks a bipartite measurement: effects must sum to `u_A (x) u_B`, and
/// every effect must give probabilities in `[0, 1]` on the entangled
/// generators of `theory` and on product states built from local probes
/// (axes and `samples` random pure states).
pub fn validate_bipartite_measurement(
    measurement: &BipartiteMeasurement,
    theory: &TheoryConfig,
    samples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    let len = theory.local_len()?;
    let shape = measurement.effects()[0].shape();
    if shape != (len, len) {
        return Err(Error::dims(format!("{len}x{len}"), format!("{shape:?}")));
    }
    let mut report = ValidationReport::default();
    let mut unit = DMatrix::zeros(len, len);
    unit[(0, 0)] = 1.0;
    let dev = (measurement.effect_sum() - unit).amax();
    if dev > EPS_EXACT {
        report.violations.push(Violation {
            check: "sum of effects equals u_A (x) u_B".into(),
            effect: None,
            state: None,
            value: dev,
        });
    }
    let mut states = theory.entangled_generators(samples, seed)?;
    let probes = theory.local_probes(samples, seed)?;
    let mut rng = sampling::rng_for(seed, u64::MAX - 1);
    for _ in 0..samples.max(1) {
        let a = rand::Rng::random_range(&mut rng, 0..probes.len());
        let b = rand::Rng::random_range(&mut rng, 0..probes.len());
        states.push((
            format!("{} (x) {}", probes[a].0, probes[b].0),
            product_state(&probes[a].1, &probes[b].1),
        ));
    }
    for (la, wa) in probes.iter().take(1 + 2 * (len - theory.ball_offset())) {
        states.push((format!("{la} (x) {la}"), product_state(wa, wa)));
    }
    report.checked_states = states.len();
    for (label, phi) in &states {
        for (i, e) in measurement.effects().iter().enumerate() {
            let p = bipartite_contract(e, phi)?;
            if !(-EPS_EXACT..=1.0 + EPS_EXACT).contains(&p) {
                report.violations.push(Violation {
                    check: if p < 0.0 { "probability >= 0" } else { "probability <= 1" }.into(),
                    effect: Some(i),
                    state: Some(label.clone()),
                    value: p,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpt::Effect;

    #[test]
    fn canonical_measurement_passes() {
        let th = TheoryConfig::Hst { n: 3 };
        let m = hst::canonical_measurement(&[0.0, 0.6, 0.8]).unwrap();
        assert!(validate_measurement(&m, &th).unwrap().passed());
        let trivial = Measurement::new(vec![Effect::unit(3)]).unwrap();
        assert!(validate_measurement(&trivial, &th).unwrap().passed());
    }

    #[test]
    fn duplicated_effect_fails_the_sum() {
        let th = TheoryConfig::Hst { n: 2 };
        let e = hst::make_extremal_effect(&[1.0, 0.0]).unwrap();
        let m = Measurement::new(vec![e.clone(), e]).unwrap();
        let r = validate_measurement(&m, &th).unwrap();
        assert!(!r.passed());
        assert_eq!(r.violations[0].check, "sum of effects equals u");
        assert_eq!(r.violations[0].value, 1.0);
    }

    #[test]
    fn overlong_effect_gets_a_witness() {
        let th = TheoryConfig::Hst { n: 2 };
        let m = Measurement::new(vec![
            Effect::new(vec![0.5, 0.6, 0.0]),
            Effect::new(vec![0.5, -0.6, 0.0]),
        ])
        .unwrap();
        let r = validate_measurement(&m, &th).unwrap();
        assert_eq!(r.violations.len(), 4);
        let v = &r.violations[0];
        assert_eq!(v.effect, Some(0));
        assert_eq!(v.state.as_deref(), Some("(1, -1, -0)"));
        assert!((v.value + 0.1).abs() < 1e-15);
    }

    #[test]
    fn bell_measurements_pass_their_theories() {
        for n in 1..=3 {
            let r = validate_bipartite_measurement(
                &hadamard::bell_measurement(n).unwrap(),
                &TheoryConfig::Base { n_bits: n },
                50,
                0,
            )
            .unwrap();
            assert!(r.passed(), "{r:?}");
        }
        let th = LambdaTauTheory::optimal(3).unwrap();
        let cfg = TheoryConfig::LambdaTau { n_bits: 3, lambda: 0.2, tau: 1.0 };
        assert!(validate_bipartite_measurement(&th.measurement().unwrap(), &cfg, 50, 1)
            .unwrap()
            .passed());
    }

    #[test]
    fn full_bell_measurement_fails_rotated_generators() {
        // the unscaled Bell effects are invalid once rotated states are allowed
        let cfg = TheoryConfig::LambdaTau { n_bits: 3, lambda: 0.2, tau: 1.0 };
        let bell = hadamard::bell_measurement(3).unwrap();
        let strong = LambdaTauTheory::new(3, 1.0, 0.2).unwrap();
        let cfg_strong = TheoryConfig::LambdaTau { n_bits: 3, lambda: 1.0, tau: 0.2 };
        assert!(!validate_bipartite_measurement(&bell, &cfg_strong, 20, 0).unwrap().passed());
        assert!(validate_bipartite_measurement(&strong.measurement().unwrap(), &cfg_strong, 20, 0)
            .unwrap()
            .passed());
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn hst_has_no_bipartite_sector() {
        assert!(TheoryConfig::Hst { n: 3 }.entangled_generators(1, 0).is_err());
        assert!(TheoryConfig::LambdaTau { n_bits: 3, lambda: 1.0, tau: 1.0 }.validate().is_err());
    }
}
