//! Measurement validation against a theory, and the block-norm lemma checks.

use gptlab::hadamard::{bell_measurement, entangled_state};
use gptlab::variants::{lemma_state_check, LambdaTauTheory};
use gptlab::{hst, validate_bipartite_measurement, validate_measurement, BitString, Effect, Measurement, TheoryConfig};

fn main() -> gptlab::Result<()> {
    let hst3 = TheoryConfig::Hst { n: 3 };
    let good = hst::canonical_measurement(&[0.0, 1.0, 0.0])?;
    println!("canonical measurement: passed = {}", validate_measurement(&good, &hst3)?.passed());

    // half of (1, 0.8, 0.8, 0) overshoots the ball
    let e = Effect::new(vec![0.5, 0.4, 0.4, 0.0]);
    let rest = Effect::new(vec![0.5, -0.4, -0.4, 0.0]);
    let bad = Measurement::new(vec![e, rest])?;
    let report = validate_measurement(&bad, &hst3)?;
    println!("overshooting effect: passed = {}, {} violations", report.passed(), report.violations.len());
    if let Some(v) = report.violations.first() {
        println!("  {} fails at {:?}: {}", v.check, v.state, v.value);
    }

    let theory = TheoryConfig::LambdaTau { n_bits: 3, lambda: 1.0, tau: 0.2 };
    let bell = bell_measurement(3)?;
    let report = validate_bipartite_measurement(&bell, &theory, 50, 3)?;
    println!("unscaled Bell measurement in the lambda-tau theory: passed = {}", report.passed());
    let scaled = LambdaTauTheory::new(3, 1.0, 0.2)?.measurement()?;
    let report = validate_bipartite_measurement(&scaled, &theory, 50, 3)?;
    println!("E^(tau) measurement: passed = {}", report.passed());

    let lemma = lemma_state_check(&entangled_state(BitString::zero(3)?));
    println!("lemma checks on phi_0: passed = {}", lemma.passed());
    Ok(())
}
