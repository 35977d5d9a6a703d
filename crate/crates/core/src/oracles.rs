//! Independent verification paths for the recursion engine: the Lucas
//! parity criterion, exact zero counting for the explicit Gram witness map,
//! peel-order cross-checking, and the closed-form family values. None of
//! these call back into [`Engine`](crate::obstruction::Engine)'s evaluation
//! path, so agreement between the two sides is evidence, not tautology.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::repcore::{
    gram_representation, Character, Representation, SphereDims, MAX_RANK,
};

/// Parity of the binomial coefficient C(a, b); zero when b < 0 or b > a.
/// Uses the disjoint-binary-digits criterion: C(a, b) is odd iff the binary
/// expansions of b and a - b share no common 1.
pub fn binom_parity(a: u64, b: i64) -> u8 {
    if b < 0 || b as u64 > a {
        return 0;
    }
    let b = b as u64;
    u8::from((a - b) & b == 0)
}

/// Closed form for the diagonal k = 2 family:
/// r(n1, n2; (eps1+eps2)^(n1+n2)) equals the parity of C(n1+n2, n1).
pub fn diagonal_r_k2(n1: u64, n2: u64) -> u8 {
    binom_parity(n1 + n2, n1 as i64)
}

/// Exact zero count of the pairwise-inner-product map on the filtered
/// product of spheres.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ZeroCount {
    /// Zeros on the whole product.
    pub total: u64,
    /// Zeros per orbit of the free (Z/2)^k sign action (= orbit count).
    pub per_fundamental_domain: u64,
}

/// Count the zeros of (x_1, ..., x_k) -> (<x_i, x_j>)_{i<j} on
/// S^{k-1} x S^{k-2} x ... x S^0, where factor i lives on the sphere of the
/// span of the first k-i+1 coordinates.
///
/// The enumeration is exact and symbolic. Working from the S^0 factor
/// upward, each factor must be a unit vector orthogonal to all previously
/// chosen ones inside its filtered subspace; that orthocomplement is
/// one-dimensional at every step (the enumeration checks this rather than
/// assuming it), so each factor contributes exactly the two signed copies
/// of one basis vector. Zeros are counted by walking every signed choice.
pub fn count_gram_zeros(k: usize) -> Result<ZeroCount> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "gram witness needs k >= 2, got {k}"
        )));
    }
    if k > MAX_RANK {
        return Err(Error::InvalidArgument(format!(
            "rank {k} exceeds the supported maximum {MAX_RANK}"
        )));
    }

    let mut total = 0u64;
    let mut orbit_reps: BTreeSet<Vec<usize>> = BTreeSet::new();
    // chosen[s] = (basis index, sign) for the factor handled at step s;
    // step s has ambient dimension s + 1.
    let mut chosen: Vec<(usize, i8)> = Vec::with_capacity(k);
    enumerate_signed_bases(k, 0, &mut chosen, &mut total, &mut orbit_reps);

    Ok(ZeroCount {
        total,
        per_fundamental_domain: orbit_reps.len() as u64,
    })
}

fn enumerate_signed_bases(
    k: usize,
    step: usize,
    chosen: &mut Vec<(usize, i8)>,
    total: &mut u64,
    orbit_reps: &mut BTreeSet<Vec<usize>>,
) {
    if step == k {
        // a complete assignment is a zero iff all pairwise inner products
        // vanish, i.e. all basis indices are distinct
        for i in 0..k {
            for j in (i + 1)..k {
                let inner = if chosen[i].0 == chosen[j].0 {
                    (chosen[i].1 * chosen[j].1) as i32
                } else {
                    0
                };
                assert_eq!(inner, 0, "enumerated point is not a zero");
            }
        }
        *total += 1;
        orbit_reps.insert(chosen.iter().map(|&(idx, _)| idx).collect());
        return;
    }
    let ambient = step + 1;
    let used: BTreeSet<usize> = chosen.iter().map(|&(idx, _)| idx).collect();
    let available: Vec<usize> = (0..ambient).filter(|i| !used.contains(i)).collect();
    // the zero set is finite only if each orthocomplement is a 0-sphere
    assert!(
        available.len() <= 1,
        "orthocomplement at step {step} is {}-dimensional; zero set not finite",
        available.len()
    );
    for idx in available {
        for sign in [1i8, -1] {
            chosen.push((idx, sign));
            enumerate_signed_bases(k, step + 1, chosen, total, orbit_reps);
            chosen.pop();
        }
    }
}

/// Agreement report from evaluating one instance under several peel-order
/// policies.
#[derive(Clone, Debug)]
pub struct CrosscheckReport {
    /// Parity from the first policy (all policies agree when `all_agree`).
    pub parity: u8,
    pub all_agree: bool,
    pub orders_evaluated: usize,
    /// True when every permutation policy was evaluated; false means the
    /// budget truncated the enumeration and the report is partial.
    pub exhaustive: bool,
}

enum Policy {
    /// Peel the remaining summand with the smallest priority value.
    Priority(Vec<usize>),
    /// Peel a summand of minimal effective weight (ties: lowest position).
    MinWeight,
}

/// Evaluate r under multiple peel-order policies and compare. Always
/// includes "always first", "always last" and "min weight"; fills the
/// remaining budget with seeded random orders, or enumerates all summand
/// permutations when that fits the budget. The evaluator here shares no
/// code or memo state with the engine: factors that reach dimension 0 stay
/// in place and are masked out of every later peel, which is the same
/// rewrite as deleting the factor and projecting.
pub fn crosscheck_peel_orders(
    dims: &SphereDims,
    rep: &Representation,
    budget: usize,
) -> Result<CrosscheckReport> {
    if dims.k() != rep.k() {
        return Err(Error::RankMismatch {
            dims_k: dims.k(),
            rep_k: rep.k(),
        });
    }
    if dims.total() != rep.dim() as u64 {
        return Err(Error::DimensionMismatch {
            expected: dims.total(),
            actual: rep.dim() as u64,
        });
    }
    if budget == 0 {
        return Err(Error::InvalidArgument(
            "crosscheck budget must be at least 1".into(),
        ));
    }

    let n = rep.dim();
    let masks: Vec<u16> = rep.summands().iter().map(Character::bits).collect();

    let mut policies: Vec<Policy> = Vec::new();
    let exhaustive = match all_permutations_within(n, budget.saturating_sub(1)) {
        Some(perms) => {
            policies.extend(perms.into_iter().map(Policy::Priority));
            policies.push(Policy::MinWeight);
            true
        }
        None => {
            policies.push(Policy::Priority((0..n).collect()));
            policies.push(Policy::Priority((0..n).rev().collect()));
            policies.push(Policy::MinWeight);
            policies.truncate(budget);
            let mut rng = ChaCha8Rng::seed_from_u64(0xb0b5_c0de);
            while policies.len() < budget {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                // priority of position p = rank of p in the shuffled order
                let mut priority = vec![0usize; n];
                for (rank, &pos) in perm.iter().enumerate() {
                    priority[pos] = rank;
                }
                policies.push(Policy::Priority(priority));
            }
            false
        }
    };

    let mut parity = 0u8;
    let mut all_agree = true;
    for (i, policy) in policies.iter().enumerate() {
        let mut memo = HashMap::new();
        let remaining: Vec<usize> = (0..n).collect();
        let p = eval_policy(dims.dims(), &remaining, &masks, policy, &mut memo);
        if i == 0 {
            parity = p;
        } else if p != parity {
            all_agree = false;
        }
    }

    Ok(CrosscheckReport {
        parity,
        all_agree,
        orders_evaluated: policies.len(),
        exhaustive,
    })
}

/// All permutations of 0..n as priority vectors, if n! fits the budget.
fn all_permutations_within(n: usize, budget: usize) -> Option<Vec<Vec<usize>>> {
    let mut fact = 1u64;
    for i in 1..=n as u64 {
        fact = fact.checked_mul(i)?;
        if fact > budget as u64 {
            return None;
        }
    }
    if fact > budget as u64 {
        return None;
    }
    let mut perms = Vec::with_capacity(fact as usize);
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        // a permutation used as priorities selects summands in its order
        let mut priority = vec![0usize; n];
        for (rank, &pos) in current.iter().enumerate() {
            priority[pos] = rank;
        }
        perms.push(priority);
        if !next_permutation(&mut current) {
            break;
        }
    }
    Some(perms)
}

fn next_permutation(arr: &mut [usize]) -> bool {
    if arr.len() < 2 {
        return false;
    }
    let mut i = arr.len() - 1;
    while i > 0 && arr[i - 1] >= arr[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = arr.len() - 1;
    while arr[j] <= arr[i - 1] {
        j -= 1;
    }
    arr.swap(i - 1, j);
    arr[i..].reverse();
    true
}

/// Policy-driven evaluation keyed on (dims, remaining original positions).
/// Zero factors are never deleted; their coordinates are masked out of the
/// peeled summand instead.
fn eval_policy(
    dims: &[u32],
    remaining: &[usize],
    masks: &[u16],
    policy: &Policy,
    memo: &mut HashMap<(Vec<u32>, Vec<usize>), u8>,
) -> u8 {
    if remaining.is_empty() {
        debug_assert!(dims.iter().all(|&n| n == 0), "dimension balance violated");
        return 1;
    }
    let key = (dims.to_vec(), remaining.to_vec());
    if let Some(&p) = memo.get(&key) {
        return p;
    }
    let zero_mask: u16 = dims
        .iter()
        .enumerate()
        .filter(|&(_, &n)| n == 0)
        .fold(0, |acc, (j, _)| acc | (1 << j));
    let slot = match policy {
        Policy::Priority(priority) => remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, &pos)| priority[pos])
            .map(|(slot, _)| slot)
            .expect("remaining is nonempty"),
        Policy::MinWeight => remaining
            .iter()
            .enumerate()
            .min_by_key(|&(slot, &pos)| ((masks[pos] & !zero_mask).count_ones(), slot))
            .map(|(slot, _)| slot)
            .expect("remaining is nonempty"),
    };
    let pos = remaining[slot];
    let alpha = masks[pos] & !zero_mask;
    let mut rest = remaining.to_vec();
    rest.remove(slot);
    let mut parity = 0u8;
    for j in 0..dims.len() {
        if (alpha >> j) & 1 == 1 {
            let mut d = dims.to_vec();
            d[j] -= 1;
            parity ^= eval_policy(&d, &rest, masks, policy, memo);
        }
    }
    memo.insert(key, parity);
    parity
}

/// Families whose parity has a closed form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Family {
    /// r(n_1, ..., n_k; eps_1^(n_1) + ... + eps_k^(n_k)); always 1.
    ClassicalBu(Vec<u32>),
    /// r(k-1, ..., 1, 0; gram(k)); always 1.
    Reduction(usize),
    /// r(3*2^t - 1, 3*2^t - 2; (eps1 + eps2 + (eps1+eps2))^(2^(t+1) - 1));
    /// always 1.
    Mani(u32),
    /// r(n1, n2; (eps1+eps2)^(n1+n2)); the Lucas parity of C(n1+n2, n1).
    DiagonalK2(u64, u64),
}

/// Expected parity of a family instance, from the closed forms rather than
/// the recursion.
pub fn family_value(family: &Family) -> Result<u8> {
    match family {
        Family::ClassicalBu(_) | Family::Reduction(_) => Ok(1),
        Family::Mani(t) => {
            validate_mani(*t)?;
            Ok(1)
        }
        Family::DiagonalK2(n1, n2) => Ok(diagonal_r_k2(*n1, *n2)),
    }
}

/// The (dims, representation) instance a family describes, for feeding the
/// engine and comparing against [`family_value`].
pub fn family_instance(family: &Family) -> Result<(SphereDims, Representation)> {
    match family {
        Family::ClassicalBu(n_vec) => {
            let k = n_vec.len();
            if k > MAX_RANK {
                return Err(Error::InvalidArgument(format!(
                    "{k} factors exceed the supported maximum {MAX_RANK}"
                )));
            }
            let mut summands = Vec::new();
            for (j, &n) in n_vec.iter().enumerate() {
                summands.extend(std::iter::repeat_n(Character::basis(j, k), n as usize));
            }
            Ok((
                SphereDims::new(n_vec.clone()),
                Representation::new(k, summands)?,
            ))
        }
        Family::Reduction(k) => {
            let k = *k;
            if k == 0 || k > MAX_RANK {
                return Err(Error::InvalidArgument(format!(
                    "reduction family needs 1 <= k <= {MAX_RANK}, got {k}"
                )));
            }
            let dims: Vec<u32> = (0..k).map(|i| (k - 1 - i) as u32).collect();
            Ok((SphereDims::new(dims), gram_representation(k)))
        }
        Family::Mani(t) => {
            validate_mani(*t)?;
            let base = 3u32 << t;
            let copies = (2usize << t) - 1;
            let mut summands = Vec::new();
            for mask in [0b01u16, 0b10, 0b11] {
                summands.extend(std::iter::repeat_n(Character::from_bits(mask, 2), copies));
            }
            Ok((
                SphereDims::new(vec![base - 1, base - 2]),
                Representation::new(2, summands)?,
            ))
        }
        Family::DiagonalK2(n1, n2) => {
            let total = n1 + n2;
            if total > 1_000_000 {
                return Err(Error::InvalidArgument(format!(
                    "diagonal instance with {total} summands is unreasonably large"
                )));
            }
            let summands = vec![Character::from_bits(0b11, 2); total as usize];
            Ok((
                SphereDims::new(vec![*n1 as u32, *n2 as u32]),
                Representation::new(2, summands)?,
            ))
        }
    }
}

fn validate_mani(t: u32) -> Result<()> {
    if t > 10 {
        return Err(Error::InvalidArgument(format!(
            "mani family is supported for t <= 10, got {t}"
        )));
    }
    Ok(())
}
