//! Acceptance suite. One test per criterion; each prints a single
//! "criterion N ...: PASS/FAIL" line (visible with `--nocapture`) and
//! asserts the criterion, including its time budget where one applies.
//!
//! Run with:
//!     cargo test --test acceptance -- --nocapture

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use obstructor::obstruction::Engine;
use obstructor::oracles::{
    binom_parity, count_gram_zeros, crosscheck_peel_orders, family_instance, Family,
};
use obstructor::repcore::{Character, Representation, SphereDims};
use obstructor::stiefel::{
    fadell_husseini_target, theorem_main2_check, theorem_main_target, variety_check,
};

fn report(criterion: &str, ok: bool) {
    println!("criterion {criterion}: {}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed");
}

fn diagonal_rep(count: usize) -> Representation {
    Representation::new(2, vec![Character::from_bits(0b11, 2); count]).unwrap()
}

#[test]
fn criterion_01_classical_borsuk_ulam_family() {
    let start = Instant::now();
    let engine = Engine::new();
    let mut ok = true;
    for n in 1..=20u32 {
        let dims = SphereDims::new(vec![n]);
        let rep =
            Representation::new(1, vec![Character::basis(0, 1); n as usize]).unwrap();
        ok &= engine.parity(&dims, &rep).unwrap() == 1;
    }
    ok &= start.elapsed() < Duration::from_secs(1);
    report("1 (classical Borsuk-Ulam family, n <= 20, < 1 s)", ok);
}

#[test]
fn criterion_02_lucas_equivalence() {
    let start = Instant::now();
    let engine = Engine::new();
    let mut ok = true;
    let mut instances = 0;
    for s in 0..=24u64 {
        for n1 in 0..=s {
            let n2 = s - n1;
            let dims = SphereDims::new(vec![n1 as u32, n2 as u32]);
            let computed = engine.parity(&dims, &diagonal_rep(s as usize)).unwrap();
            ok &= computed == binom_parity(s, n1 as i64);
            instances += 1;
        }
    }
    ok &= instances == 325;
    ok &= start.elapsed() < Duration::from_secs(10);
    report("2 (Lucas equivalence, 325 instances, < 10 s)", ok);
}

#[test]
fn criterion_03_lemma_reduction() {
    let start = Instant::now();
    let engine = Engine::new();
    let mut ok = true;
    for k in 2..=8usize {
        let (dims, rep) = family_instance(&Family::Reduction(k)).unwrap();
        ok &= engine.parity(&dims, &rep).unwrap() == 1;
    }
    ok &= start.elapsed() < Duration::from_secs(5);
    report("3 (gram reduction, k = 2..8, < 5 s)", ok);
}

#[test]
fn criterion_04_gram_witness_agreement() {
    let engine = Engine::new();
    let mut ok = true;
    for k in 2..=6usize {
        let count = count_gram_zeros(k).unwrap();
        ok &= count.total == 1u64 << k;
        ok &= count.per_fundamental_domain == 1;
        let (dims, rep) = family_instance(&Family::Reduction(k)).unwrap();
        let recursion = engine.parity(&dims, &rep).unwrap();
        ok &= (count.per_fundamental_domain % 2) as u8 == recursion;
    }
    report("4 (gram witness zero count agrees, k = 2..6)", ok);
}

#[test]
fn criterion_05_theorem_main_condition() {
    let start = Instant::now();
    let engine = Engine::new();
    let mut ok = true;
    for n in 2..=8u32 {
        for k in 2..=n {
            let rep = theorem_main_target(n, k).unwrap();
            let verdict = theorem_main2_check(&engine, n, k, &rep).unwrap();
            ok &= verdict.condition_parity == 1;
        }
    }
    ok &= start.elapsed() < Duration::from_secs(30);
    report("5 (graded Stiefel condition, 2 <= k <= n <= 8, < 30 s)", ok);
}

#[test]
fn criterion_06_corollary_main_condition() {
    let engine = Engine::new();
    let mut ok = true;
    for n in 2..=8u32 {
        for k in 2..=n {
            let m_vec = SphereDims::new((0..k).map(|i| n - k + i).collect());
            let rep = fadell_husseini_target(n, k).unwrap();
            let verdict = variety_check(&engine, &m_vec, &rep).unwrap();
            ok &= verdict.condition_parity == 1;
        }
    }
    report("6 (orthogonality-variety condition, 2 <= k <= n <= 8)", ok);
}

#[test]
fn criterion_07_mani_family() {
    let engine = Engine::new();
    let mut ok = true;
    for t in 0..=2u32 {
        let (dims, rep) = family_instance(&Family::Mani(t)).unwrap();
        ok &= engine.parity(&dims, &rep).unwrap() == 1;
    }
    // the t = 3 instance (dims 23, 22; 45 summands) carries the time budget
    let start = Instant::now();
    let (dims, rep) = family_instance(&Family::Mani(3)).unwrap();
    ok &= dims.dims() == [23, 22];
    ok &= rep.dim() == 45;
    ok &= engine.parity(&dims, &rep).unwrap() == 1;
    ok &= start.elapsed() < Duration::from_secs(60);
    report("7 (mani family, t = 0..3, t = 3 < 60 s)", ok);
}

#[test]
fn criterion_08_power_of_two_variety_example() {
    let engine = Engine::new();
    let mut ok = true;
    for t in 1..=4u32 {
        let n_minus_1 = 1u32 << t; // n - 1 in {2, 4, 8, 16}
        let n = n_minus_1 + 1;
        let m_vec = SphereDims::new(vec![n - 1, n - 2]);
        let rep = diagonal_rep((2 * n - 4) as usize);
        let verdict = variety_check(&engine, &m_vec, &rep).unwrap();
        ok &= verdict.condition_parity == 1;
    }
    report("8 (diagonal variety example, n - 1 in {2,4,8,16})", ok);
}

/// Deterministic random instances: rank <= 4, total dimension <= 10, with
/// zero dims and zero characters allowed.
fn random_instance(rng: &mut ChaCha8Rng, force_zero_summand: bool) -> (SphereDims, Representation) {
    loop {
        let k = rng.gen_range(1..=4usize);
        let dims: Vec<u32> = (0..k).map(|_| rng.gen_range(0..=3u32)).collect();
        let total: u32 = dims.iter().sum();
        if total > 10 || (force_zero_summand && total == 0) {
            continue;
        }
        let mask_bound = 1u16 << k;
        let mut masks: Vec<u16> = (0..total).map(|_| rng.gen_range(0..mask_bound)).collect();
        if force_zero_summand {
            masks[0] = 0;
        }
        let rep = Representation::new(
            k,
            masks.iter().map(|&m| Character::from_bits(m, k)).collect(),
        )
        .unwrap();
        return (SphereDims::new(dims), rep);
    }
}

fn permute_instance(
    dims: &SphereDims,
    rep: &Representation,
    perm: &[usize],
) -> (SphereDims, Representation) {
    let k = dims.k();
    let new_dims: Vec<u32> = (0..k).map(|i| dims.dims()[perm[i]]).collect();
    let summands: Vec<Character> = rep
        .summands()
        .iter()
        .map(|c| {
            let mut bits = 0u16;
            for (i, &src) in perm.iter().enumerate() {
                bits |= ((c.bits() >> src) & 1) << i;
            }
            Character::from_bits(bits, k)
        })
        .collect();
    (
        SphereDims::new(new_dims),
        Representation::new(k, summands).unwrap(),
    )
}

#[test]
fn criterion_09_peel_order_and_permutation_invariance() {
    let engine = Engine::new();
    let mut ok = true;

    let mut rng = ChaCha8Rng::seed_from_u64(9_001);
    for _ in 0..500 {
        let (dims, rep) = random_instance(&mut rng, false);
        let report = crosscheck_peel_orders(&dims, &rep, 24).unwrap();
        ok &= report.all_agree;
        ok &= report.parity == engine.parity(&dims, &rep).unwrap();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9_002);
    for _ in 0..500 {
        let (dims, rep) = random_instance(&mut rng, false);
        let k = dims.k();
        let mut perm: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let (pdims, prep) = permute_instance(&dims, &rep, &perm);
        ok &= engine.parity(&dims, &rep).unwrap() == engine.parity(&pdims, &prep).unwrap();
    }

    report(
        "9 (peel-order + permutation invariance, 500 instances each)",
        ok,
    );
}

#[test]
fn criterion_10_trivial_summand_annihilation() {
    let engine = Engine::new();
    let mut ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(10_001);
    for _ in 0..200 {
        let (dims, rep) = random_instance(&mut rng, true);
        ok &= engine.parity(&dims, &rep).unwrap() == 0;
    }
    report("10 (trivial summand annihilates, 200 instances)", ok);
}

fn run_search(jobs: u32) -> (Vec<u8>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_obstructor"))
        .args(["search", "--dims", "1,1", "--jobs", &jobs.to_string()])
        .output()
        .expect("failed to run obstructor");
    assert!(out.status.success(), "search exited with {:?}", out.status);
    (out.stdout, out.stderr)
}

#[test]
fn criterion_11_search_correctness() {
    let (stdout, _) = run_search(1);
    let text = String::from_utf8(stdout).unwrap();
    let hits: Vec<&str> = text.lines().skip(1).collect();
    let ok = hits == ["10,01", "10,11", "01,11"];
    report("11 (search on dims (1,1) finds exactly three multisets)", ok);
}

#[test]
fn criterion_12_determinism_under_parallelism() {
    let mut ok = true;

    // the stiefel sweep of criterion 5, assembled to one report string,
    // evaluated in thread pools of size 1 and 8, twice each
    let sweep = |threads: usize| -> String {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let engine = Engine::new();
        let configs: Vec<(u32, u32)> = (2..=8u32)
            .flat_map(|n| (2..=n).map(move |k| (n, k)))
            .collect();
        let lines: Vec<String> = pool.install(|| {
            use rayon::prelude::*;
            configs
                .par_iter()
                .map(|&(n, k)| {
                    let rep = theorem_main_target(n, k).unwrap();
                    let v = theorem_main2_check(&engine, n, k, &rep).unwrap();
                    format!(
                        "n={n} k={k} m={} parity={} conclusion={}",
                        v.m,
                        v.condition_parity,
                        v.conclusion.tag()
                    )
                })
                .collect()
        });
        lines.join("\n")
    };
    let reference = sweep(1);
    for run in [sweep(1), sweep(8), sweep(8)] {
        ok &= run == reference;
    }

    // the search of criterion 11 through the real binary at both degrees
    let (ref_out, _) = run_search(1);
    for jobs in [1, 8, 1, 8] {
        let (out, _) = run_search(jobs);
        ok &= out == ref_out;
    }

    report("12 (byte-identical output at parallelism 1 and 8)", ok);
}
