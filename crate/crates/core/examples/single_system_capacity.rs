//! A single hypersphere system carries at most one bit.

use gptlab::capacity::capacity_upper_bound;
use gptlab::{hst, mutual_information};

fn main() -> gptlab::Result<()> {
    let bound = capacity_upper_bound(1.0, 1.0)?;
    println!("log2(1 + MR) = {bound}");

    for n in [1, 3, 7] {
        let ch = hst::one_bit_protocol(n)?;
        println!("n = {n}: antipodal protocol, I = {}", mutual_information(&ch));
    }

    let seed = 2024;
    for n in [2, 3, 7, 15] {
        let s = hst::random_protocol_search(n, 500, seed)?;
        println!(
            "n = {n}: {} random protocols, max I = {:.9}, max upper estimate {:.9}",
            s.trials, s.max_capacity_bits, s.max_upper_bound_bits
        );
    }
    Ok(())
}
