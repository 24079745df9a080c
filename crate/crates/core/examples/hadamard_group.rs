//! Sign vectors, the XOR group law and the membership checks behind the
//! Hadamard extension.

use gptlab::hadamard::{self, hadamard_vector, local_transformation, BitString};

fn main() -> gptlab::Result<()> {
    for mu in BitString::all(3)? {
        println!("d_{} = {:?}", mu.value(), hadamard_vector(mu).entries());
    }

    let a = BitString::new(0b101, 3)?;
    let b = BitString::new(0b011, 3)?;
    let c = hadamard::compose(&local_transformation(a), &local_transformation(b))?;
    println!("T_5 T_3 = T_{}", c.label().value());

    for n in 1..=6 {
        let r = hadamard::verify_group(n)?;
        println!("N = {n}: {} pairs, passed = {}", r.pairs_checked, r.passed());
    }
    Ok(())
}
