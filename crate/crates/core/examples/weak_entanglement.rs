//! Weakly entangled states `lambda phi_mu`: the information drops below
//! one bit once `|lambda|` falls under the first threshold.

use gptlab::capacity::{weak_entanglement_bound, weak_threshold};
use gptlab::variants::{weak_dense_coding_info, WeakTheory};

fn main() -> gptlab::Result<()> {
    let n_bits = 3;
    let thresholds: Vec<f64> = (0..2).map(|j| weak_threshold(j, n_bits)).collect::<Result<_, _>>()?;
    println!("N = {n_bits}: thresholds {thresholds:?}");

    for lambda in [-1.0, -0.5, 0.0, 0.1, 1.0 / 7.0, 0.3, 3.0 / 7.0, 0.7, 1.0] {
        let theory = WeakTheory::new(n_bits, lambda)?;
        let info = weak_dense_coding_info(&theory)?;
        let bound = weak_entanglement_bound(lambda, n_bits)?;
        println!("lambda = {lambda:>7.4}: I = {info:.6}, bound {bound:.6}");
    }
    Ok(())
}
