//! Teleport a random pure state of a 3-ball and compare Bob's statistics
//! with the input.

use gptlab::protocols::teleport;
use gptlab::sampling;

fn main() -> gptlab::Result<()> {
    let n_bits = 2;
    let n = (1 << n_bits) - 1;
    let mut rng = sampling::rng_for(7, 0);
    let omega = sampling::pure_state(n, &mut rng);
    println!("input state  {:?}", omega.entries().as_slice());

    let run = teleport(&omega, n_bits, 7)?;
    println!("p(x)         {:?}", run.p_x);
    for (y, direct) in run.direct.iter().enumerate().take(5) {
        let col: Vec<String> = run.conditional.iter().map(|row| format!("{:.6}", row[y])).collect();
        println!("effect {y}: e.w = {direct:.6}, p(y|x) = [{}]", col.join(", "));
    }
    println!("max residual {:e}", run.max_residual);
    Ok(())
}
