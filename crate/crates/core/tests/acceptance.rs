//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; the process fails if any criterion
//! fails.

use std::time::{Duration, Instant};

use gptlab::capacity::{self, channel_capacity};
use gptlab::hadamard::{self, BitString};
use gptlab::protocols;
use gptlab::sampling;
use gptlab::variants::{self, EmbeddedTheory, LambdaTauTheory, WeakTheory};
use gptlab::{hst, mutual_information, Effect, TheoryConfig};

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: gptlab::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Sign vector from the parity definition, independent of the library.
fn sign_vector(mu: usize, n_bits: u32) -> Vec<i64> {
    (0..1usize << n_bits)
        .map(|nu| if (mu & nu).count_ones() % 2 == 0 { 1 } else { -1 })
        .collect()
}

fn entropy_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

fn c1_hyperdense_exact() -> Check {
    let start = Instant::now();
    for n in 1..=6u32 {
        let run = lib(protocols::dense_coding(&TheoryConfig::Base { n_bits: n }, 0))?;
        let d = 1usize << n;
        for (x, row) in run.channel.conditional().iter().enumerate() {
            ensure(row.len() == d, || format!("N={n}: row width {}", row.len()))?;
            for (y, &p) in row.iter().enumerate() {
                let expected = if x == y { 1.0 } else { 0.0 };
                ensure(p == expected, || format!("N={n}: p({y}|{x}) = {p}"))?;
            }
        }
        ensure(run.info_bits == f64::from(n), || format!("N={n}: I = {}", run.info_bits))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("I = N exactly for N = 1..6 in {elapsed:.2?}"))
}

fn c2_single_system() -> Check {
    let start = Instant::now();
    for n in [1, 2, 3, 7, 15] {
        let ch = lib(hst::one_bit_protocol(n))?;
        ensure(mutual_information(&ch) == 1.0, || format!("one-bit protocol n={n}"))?;
    }
    let bound = lib(capacity::capacity_upper_bound(1.0, 1.0))?;
    ensure(bound == 1.0, || format!("log2(1 + MR) = {bound}"))?;
    let mut worst = 0.0f64;
    let mut worst_upper = 0.0f64;
    for (i, n) in [2usize, 3, 7, 15].into_iter().enumerate() {
        let s = lib(hst::random_protocol_search(n, 10_000, 2024 + i as u64))?;
        ensure(s.max_capacity_bits <= bound + 1e-6, || format!("n={n}: {s:?}"))?;
        worst = worst.max(s.max_capacity_bits);
        worst_upper = worst_upper.max(s.max_upper_bound_bits);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "4 x 10^4 protocols, max I = {worst:.12} (BA upper estimate {worst_upper:.12}) in {elapsed:.2?}"
    ))
}

fn c3_lambda_tau_table() -> Check {
    let start = Instant::now();
    let reference = [(2u32, 2.0), (3, 0.15), (4, 0.05), (5, 0.02)];
    let mut values = Vec::new();
    for (n, published) in reference {
        let d = (1u64 << n) as f64;
        let q = 2.0 / d * (d - 2.0) / (d - 3.0);
        // entropy of (q, (1-q)/(d-1), ..., (1-q)/(d-1))
        let mut dist = vec![(1.0 - q) / (d - 1.0); d as usize - 1];
        dist.push(q);
        let oracle = f64::from(n) - entropy_bits(&dist);
        let info = lib(variants::lt_optimal_info(n))?;
        ensure((info - oracle).abs() < 1e-12, || format!("N={n}: {info} vs {oracle}"))?;
        ensure((info - published).abs() <= 0.005, || format!("N={n}: {info} vs {published}"))?;
        let th = lib(LambdaTauTheory::optimal(n))?;
        let cap = lib(channel_capacity(lib(variants::lt_channel(&th))?.conditional()))?;
        ensure((cap.capacity_bits - info).abs() <= 1e-6, || {
            format!("N={n}: BA {} vs {info}", cap.capacity_bits)
        })?;
        values.push(format!("{info:.4}"));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("N - H(Q_N) = [{}] in {elapsed:.2?}", values.join(", ")))
}

/// `sum_ijk (E_x)_ij (e_y)_k (w)_i (phi_0 T_x^t)_jk` by explicit loops.
fn teleport_oracle(x: usize, n_bits: u32, e: &[f64], w: &[f64]) -> f64 {
    let d = 1usize << n_bits;
    let dx = sign_vector(x, n_bits);
    let scale = 1.0 / d as f64;
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            let e_x = if i == j { scale * dx[i] as f64 } else { 0.0 };
            for k in 0..d {
                let m = if j == k { dx[j] as f64 } else { 0.0 };
                s += e_x * e[k] * w[i] * m;
            }
        }
    }
    s
}

fn c4_teleportation() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n_bits in [2u32, 3] {
        let n = (1usize << n_bits) - 1;
        let scale = 1.0 / (n + 1) as f64;
        let mut rng = sampling::rng_for(404, u64::from(n_bits));
        for s in 0..1000 {
            let w = sampling::pure_state(n, &mut rng);
            let mut effects: Vec<Effect> =
                (0..100).map(|_| sampling::extremal_effect_random(n, &mut rng)).collect();
            effects.push(Effect::unit(n));
            let run = lib(protocols::teleport_with_effects(&w, n_bits, &effects))?;
            ensure(run.p_x.iter().all(|&p| p == scale), || format!("p_x = {:?}", run.p_x))?;
            let wv: Vec<f64> = w.entries().iter().cloned().collect();
            for (x, row) in run.conditional.iter().enumerate() {
                for (y, e) in effects.iter().enumerate() {
                    let ev: Vec<f64> = e.entries().iter().cloned().collect();
                    let direct: f64 = ev.iter().zip(&wv).map(|(a, b)| a * b).sum();
                    worst = worst.max((row[y] - direct).abs());
                    if s < 10 {
                        let joint = teleport_oracle(x, n_bits, &ev, &wv);
                        worst = worst.max((run.joint[x][y] - joint).abs());
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(worst < 1e-12, || format!("residual {worst:e}"))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("max |p_tel(y|x) - e_y.w| = {worst:e} in {elapsed:.2?}"))
}

fn c5_swapping() -> Check {
    let mut worst = 0.0f64;
    for n_bits in [2u32, 3] {
        let d = 1usize << n_bits;
        for mu in 0..d {
            let run = lib(protocols::swap_entangled(lib(BitString::new(mu, n_bits))?))?;
            for (x, row) in run.conditional.iter().enumerate() {
                ensure(run.p_x[x] == 1.0 / d as f64, || format!("p_x = {}", run.p_x[x]))?;
                for (y, &p) in row.iter().enumerate() {
                    // E'_y . phi_mu = 2^-N d_y . d_mu = delta
                    let dy = sign_vector(y, n_bits);
                    let dm = sign_vector(mu, n_bits);
                    let direct = dy.iter().zip(&dm).map(|(a, b)| a * b).sum::<i64>() as f64 / d as f64;
                    worst = worst.max((p - direct).abs());
                }
            }
        }
    }
    ensure(worst < 1e-12, || format!("residual {worst:e}"))?;
    Ok(format!("all mu, N = 2, 3: max residual {worst:e}"))
}

fn c6_group() -> Check {
    let mut pairs = 0usize;
    for n in 1..=6u32 {
        let d = 1usize << n;
        let lib_vectors: Vec<Vec<i64>> = (0..d)
            .map(|mu| {
                let v = hadamard::hadamard_vector(BitString::new(mu, n).unwrap());
                v.entries().iter().map(|&x| i64::from(x)).collect()
            })
            .collect();
        let diagonals: Vec<Vec<f64>> = (0..d)
            .map(|mu| {
                let t = hadamard::local_transformation(BitString::new(mu, n).unwrap());
                let m = t.matrix().matrix().clone();
                for i in 0..d {
                    for j in 0..d {
                        assert!(i == j || m[(i, j)] == 0.0, "T_{mu} is not diagonal");
                    }
                }
                (0..d).map(|i| m[(i, i)]).collect()
            })
            .collect();
        for mu in 0..d {
            ensure(lib_vectors[mu] == sign_vector(mu, n), || format!("d_{mu} differs for N={n}"))?;
            for nu in 0..d {
                let dot: i64 = lib_vectors[mu].iter().zip(&lib_vectors[nu]).map(|(a, b)| a * b).sum();
                let expected = if mu == nu { d as i64 } else { 0 };
                ensure(dot == expected, || format!("N={n}: d_{mu}.d_{nu} = {dot}"))?;
                let prod: Vec<f64> = diagonals[mu].iter().zip(&diagonals[nu]).map(|(a, b)| a * b).collect();
                ensure(prod == diagonals[mu ^ nu], || format!("N={n}: T_{mu} T_{nu} != T_{}", mu ^ nu))?;
                pairs += 1;
            }
        }
        let report = lib(hadamard::verify_group(n))?;
        ensure(report.passed(), || format!("library report for N={n}: {report:?}"))?;
    }
    Ok(format!("{pairs} label pairs checked exactly for N <= 6"))
}

fn c7_separable_baseline() -> Check {
    let mut worst = 0.0f64;
    let mut upper = 0.0f64;
    let mut trials = 0;
    for (n, t) in [(3usize, 1000usize), (7, 500), (1, 200)] {
        let s = lib(protocols::separable_baseline(n, t, 77))?;
        ensure(s.max_info_bits <= 1.0 + 1e-6, || format!("n={n}: {s:?}"))?;
        worst = worst.max(s.max_info_bits);
        upper = upper.max(s.max_upper_bound_bits);
        trials += t;
    }
    Ok(format!("{trials} separable runs, max I = {worst:.12} (BA upper estimate {upper:.12})"))
}

fn c8_embedded() -> Check {
    let mut spreads = Vec::new();
    for (n, m) in [(2u32, 2usize), (3, 4)] {
        let th = lib(EmbeddedTheory::new(n, m))?;
        for seed in 0..10 {
            let ch = lib(variants::embedded_dense_coding(&th, seed))?;
            let info = mutual_information(&ch);
            ensure(info == f64::from(n), || format!("(N, m) = ({n}, {m}) seed {seed}: I = {info}"))?;
        }
        let w = lib(variants::tl_violation_witness(&th, 1000, 8))?;
        ensure(w.max_spread < 1e-12, || format!("spread {:e}", w.max_spread))?;
        ensure(w.l1_distances.iter().skip(1).all(|&d| d > 0.0), || "states coincide".into())?;
        spreads.push(format!("{:e}", w.max_spread));
    }
    Ok(format!("I = N for 10 rotation seeds each; local spread [{}]", spreads.join(", ")))
}

fn c9_weak_thresholds() -> Check {
    let mut lines = Vec::new();
    for n in 2..=6u32 {
        for (j, cap) in [(0u32, 1.0), (1, 2.0)] {
            let lambda = lib(capacity::weak_threshold(j, n))?;
            let oracle = (1.0 + 2.0 * f64::from(j)) / ((1u64 << n) as f64 - 1.0);
            ensure((lambda - oracle).abs() < 1e-15, || format!("threshold {lambda}"))?;
            if lambda > 1.0 {
                continue;
            }
            let bound = lib(capacity::weak_entanglement_bound(lambda, n))?;
            ensure((bound - cap).abs() < 1e-12, || format!("N={n} j={j}: bound {bound}"))?;
            for sign in [1.0, -1.0] {
                let th = lib(WeakTheory::new(n, sign * lambda))?;
                let info = lib(variants::weak_dense_coding_info(&th))?;
                ensure(info <= cap + 1e-6, || format!("N={n} j={j}: I = {info}"))?;
                if n <= 3 {
                    let s = lib(variants::weak_decoding_search(&th, 300, u64::from(n)))?;
                    ensure(s.max_capacity_bits <= cap + 1e-6, || format!("search {s:?}"))?;
                }
            }
            lines.push(format!("N={n},j={j}"));
        }
    }
    Ok(format!("thresholds respected at {}", lines.join(" ")))
}

fn c10_sandwich() -> Check {
    let mut parts = Vec::new();
    for n in 1..=6u32 {
        let upper = lib(capacity::dimension_upper_bound(n))?;
        let lower = lib(capacity::dc_capacity_lower_bound(&TheoryConfig::Base { n_bits: n }))?;
        ensure(upper == 2.0 * f64::from(n), || format!("upper {upper}"))?;
        ensure(lower == f64::from(n), || format!("lower {lower}"))?;
        let trials = match n {
            1..=3 => 300,
            4 => 60,
            _ => 8,
        };
        let s = lib(capacity::bipartite_capacity_search(n, trials, u64::from(n)))?;
        ensure(s.max_capacity_bits <= upper + 1e-6, || format!("N={n}: {s:?}"))?;
        ensure(s.max_capacity_bits >= lower - 1e-6, || format!("N={n}: {s:?}"))?;
        parts.push(format!("N={n}: {:.6}", s.max_capacity_bits));
    }
    Ok(format!("N <= observed <= 2N ({})", parts.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("1 hyperdense coding exactness", c1_hyperdense_exact),
        ("2 single-system capacity", c2_single_system),
        ("3 lambda-tau table", c3_lambda_tau_table),
        ("4 teleportation identity", c4_teleportation),
        ("5 entanglement swapping", c5_swapping),
        ("6 group and orthogonality", c6_group),
        ("7 separable baseline", c7_separable_baseline),
        ("8 embedded theory", c8_embedded),
        ("9 weak-theory thresholds", c9_weak_thresholds),
        ("10 sandwich bound", c10_sandwich),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
