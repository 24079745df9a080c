//! Dense coding over the Hadamard extension: one shared `phi_0`, Alice
//! applies `T_x`, Bob reads the label with the Bell measurement.

use gptlab::protocols::{classify, dense_coding};
use gptlab::TheoryConfig;

fn main() -> gptlab::Result<()> {
    for n_bits in 1..=6 {
        let run = dense_coding(&TheoryConfig::Base { n_bits }, 0)?;
        let class = classify(run.info_bits, 1.0);
        println!(
            "N = {n_bits}: {} messages, I = {} bits, {:?} (local capacity 1 bit)",
            run.channel.conditional().len(),
            run.info_bits,
            class.class,
        );
    }
    Ok(())
}
