//! Swap `phi_mu` from `A'A` onto `BC` and read it back with the Bell
//! measurement.

use gptlab::protocols::swap_entangled;
use gptlab::BitString;

fn main() -> gptlab::Result<()> {
    let n_bits = 2;
    for mu in 0..1 << n_bits {
        let run = swap_entangled(BitString::new(mu, n_bits)?)?;
        let outcomes: Vec<usize> = run
            .conditional
            .iter()
            .map(|row| row.iter().position(|&p| p == 1.0).unwrap_or(usize::MAX))
            .collect();
        println!("mu = {mu}: Bell outcome on BC for each x = {outcomes:?}, residual {:e}", run.max_residual);
    }
    Ok(())
}
