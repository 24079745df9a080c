//! Hadamard states padded into a larger ball: dense coding still reaches
//! N bits, local statistics are blind to the label.

use gptlab::variants::{embedded_dense_coding, embedded_invariance, tl_violation_witness, EmbeddedTheory};
use gptlab::mutual_information;

fn main() -> gptlab::Result<()> {
    let theory = EmbeddedTheory::new(3, 4)?;
    println!("local vector length {}", theory.local_len());

    let ch = embedded_dense_coding(&theory, 1)?;
    println!("dense coding I = {} bits", mutual_information(&ch));

    let drift = embedded_invariance(&theory, 100, 1)?;
    println!("max drift of Phi_mu under T^(R), R random in SO(4): {drift:e}");

    let w = tl_violation_witness(&theory, 200, 1)?;
    println!(
        "local statistics spread {:e}, L1 distances {:?}, witnessed = {}",
        w.max_spread,
        w.l1_distances,
        w.witnessed()
    );
    Ok(())
}
