//! Optimal dense coding in the lambda-tau family, where local symmetry is
//! continuous again.

use gptlab::capacity::channel_capacity;
use gptlab::variants::{self, admissible_range, admissibility_probe, LambdaTauTheory};

fn main() -> gptlab::Result<()> {
    println!("{:>3} {:>12} {:>10} {:>10}", "N", "max l*t", "Q_N", "I bits");
    for n in 2..=8 {
        let (_, hi) = admissible_range(n)?;
        let q = variants::optimal_success_probability(n)?;
        let info = variants::lt_optimal_info(n)?;
        println!("{n:>3} {hi:>12.6} {q:>10.6} {info:>10.6}");
    }

    let th = LambdaTauTheory::optimal(3)?;
    let ba = channel_capacity(variants::lt_channel(&th)?.conditional())?;
    println!("N = 3 Blahut-Arimoto check: {:.9}", ba.capacity_bits);

    // one step past the boundary the witness state yields a negative probability
    let probe = admissibility_probe(3, 1.0, 0.21)?;
    println!(
        "lambda*tau = 0.21: E_0 on phi_0 = {:.4}, on witness = {:.4}, admissible = {}",
        probe.on_phi0, probe.on_witness, probe.admissible
    );
    match LambdaTauTheory::new(3, 0.333333, 1.0) {
        Ok(_) => println!("unexpectedly admissible"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
