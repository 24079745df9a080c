//! Without entanglement, dense coding with product states stays at one bit.

use gptlab::protocols::{no_signalling_residual, separable_baseline};

fn main() -> gptlab::Result<()> {
    for n in [1, 3, 7] {
        let s = separable_baseline(n, 400, 11)?;
        println!(
            "n = {n}: {} trials, max I = {:.9}, max upper estimate {:.9}",
            s.trials, s.max_info_bits, s.max_upper_bound_bits
        );
    }
    println!("no-signalling residual (N = 3): {:e}", no_signalling_residual(3, 200, 11)?);
    Ok(())
}
