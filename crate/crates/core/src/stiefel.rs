//! Checkers for the Stiefel-manifold theorems. Each checker builds the
//! condition representation (the user's target plus the weight-2 Gram
//! summands), validates the dimension bookkeeping, evaluates the
//! obstruction parity, and reports which theorem backs the conclusion.

use std::fmt;

use crate::error::{Error, Result};
use crate::obstruction::Engine;
use crate::repcore::{gram_representation, Character, Representation, SphereDims, MAX_RANK};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Conclusion {
    /// The condition parity is 1: every equivariant map from the domain to
    /// the target representation has a zero.
    ZeroGuaranteed,
    /// Parity 0 decides nothing.
    Inconclusive,
}

impl Conclusion {
    pub fn tag(&self) -> &'static str {
        match self {
            Conclusion::ZeroGuaranteed => "ZERO_GUARANTEED",
            Conclusion::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Which statement supports a ZERO_GUARANTEED conclusion for the queried
/// configuration.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TheoremBacking {
    /// Constant dims (n-1, ..., n-1): the Stiefel manifold theorem.
    ThmMain2,
    /// Ascending dims (n-k, ..., n-1) with the Fadell-Husseini target: the
    /// orthogonality-variety corollary.
    CorMain,
    /// Any other configuration: the parity is exact, but no proven theorem
    /// converts it into a statement about equivariant maps.
    GeneralizedUnproven,
}

impl TheoremBacking {
    pub fn tag(&self) -> &'static str {
        match self {
            TheoremBacking::ThmMain2 => "THM_MAIN2",
            TheoremBacking::CorMain => "COR_MAIN",
            TheoremBacking::GeneralizedUnproven => "GENERALIZED_UNPROVEN",
        }
    }
}

impl fmt::Display for TheoremBacking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Dimensional bookkeeping plus the computed condition parity.
#[derive(Clone, Debug)]
pub struct StiefelVerdict {
    pub n: u32,
    pub k: u32,
    /// Required dimension of the user's target representation.
    pub m: u64,
    pub condition_parity: u8,
    pub conclusion: Conclusion,
    pub theorem_backing: TheoremBacking,
}

fn validate_n_k(n: u32, k: u32) -> Result<()> {
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    if k as usize > MAX_RANK {
        return Err(Error::InvalidArgument(format!(
            "rank {k} exceeds the supported maximum {MAX_RANK}"
        )));
    }
    Ok(())
}

fn binom2(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

/// The target of the graded theorem: (n-j) copies of eps_j for j = 1..k,
/// so dimension k(n-1) - k(k-1)/2.
pub fn theorem_main_target(n: u32, k: u32) -> Result<Representation> {
    validate_n_k(n, k)?;
    let rank = k as usize;
    let mut summands = Vec::new();
    for j in 0..rank {
        let copies = (n as usize) - (j + 1);
        summands.extend(std::iter::repeat_n(Character::basis(j, rank), copies));
    }
    Representation::new(rank, summands)
}

/// The Fadell-Husseini target: (n-k) copies of each eps_j, dimension
/// k(n-k).
pub fn fadell_husseini_target(n: u32, k: u32) -> Result<Representation> {
    validate_n_k(n, k)?;
    let rank = k as usize;
    let copies = (n - k) as usize;
    let mut summands = Vec::new();
    for j in 0..rank {
        summands.extend(std::iter::repeat_n(Character::basis(j, rank), copies));
    }
    Representation::new(rank, summands)
}

/// Check the sufficient condition for the non-existence of an equivariant
/// map from the Stiefel manifold of k orthonormal vectors in R^n into the
/// sphere of `rep`: parity of r((n-1)^k; rep + gram(k)).
pub fn theorem_main2_check(
    engine: &Engine,
    n: u32,
    k: u32,
    rep: &Representation,
) -> Result<StiefelVerdict> {
    validate_n_k(n, k)?;
    if rep.k() != k as usize {
        return Err(Error::RankMismatch {
            dims_k: k as usize,
            rep_k: rep.k(),
        });
    }
    let m = k as u64 * (n as u64 - 1) - binom2(k as u64);
    if rep.dim() as u64 != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: rep.dim() as u64,
        });
    }
    let dims = SphereDims::new(vec![n - 1; k as usize]);
    let condition = rep.concat(&gram_representation(k as usize))?;
    let parity = engine.parity(&dims, &condition)?;
    Ok(StiefelVerdict {
        n,
        k,
        m,
        condition_parity: parity,
        conclusion: conclusion_for(parity),
        theorem_backing: TheoremBacking::ThmMain2,
    })
}

/// Check the condition parity for the orthogonality variety inside
/// S^{m_1} x ... x S^{m_k} (pairwise orthogonal tuples): parity of
/// r(m_vec; rep + gram(k)). The conclusion is theorem-backed only for the
/// two configurations the theorems cover; anything else is reported with
/// backing GENERALIZED_UNPROVEN and must be read as a bare parity.
pub fn variety_check(
    engine: &Engine,
    m_vec: &SphereDims,
    rep: &Representation,
) -> Result<StiefelVerdict> {
    let k = m_vec.k();
    if k < 1 {
        return Err(Error::InvalidArgument(
            "variety check needs at least one sphere factor".into(),
        ));
    }
    if k > MAX_RANK {
        return Err(Error::InvalidArgument(format!(
            "rank {k} exceeds the supported maximum {MAX_RANK}"
        )));
    }
    if rep.k() != k {
        return Err(Error::RankMismatch {
            dims_k: k,
            rep_k: rep.k(),
        });
    }
    // k pairwise orthogonal unit vectors fit in the filtered spheres only
    // if the i-th smallest dimension is at least i-1
    let mut sorted = m_vec.dims().to_vec();
    sorted.sort_unstable();
    for (i, &d) in sorted.iter().enumerate() {
        if (d as usize) < i {
            return Err(Error::InvalidArgument(format!(
                "orthogonality variety is empty: sorted dims {sorted:?} need entry {i} >= {i}"
            )));
        }
    }
    let m = m_vec.total() - binom2(k as u64);
    if rep.dim() as u64 != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: rep.dim() as u64,
        });
    }

    let condition = rep.concat(&gram_representation(k))?;
    let parity = engine.parity(m_vec, &condition)?;

    let n = m_vec.dims().iter().max().copied().unwrap_or(0) + 1;
    let ascending_run = m_vec
        .dims()
        .iter()
        .enumerate()
        .all(|(i, &d)| d as u64 == (n as u64 - k as u64) + i as u64);
    let constant = m_vec.dims().iter().all(|&d| d == n - 1);
    let backing = if ascending_run && is_fh_target(n, k as u32, rep) {
        TheoremBacking::CorMain
    } else if constant {
        TheoremBacking::ThmMain2
    } else {
        TheoremBacking::GeneralizedUnproven
    };

    Ok(StiefelVerdict {
        n,
        k: k as u32,
        m,
        condition_parity: parity,
        conclusion: conclusion_for(parity),
        theorem_backing: backing,
    })
}

fn conclusion_for(parity: u8) -> Conclusion {
    if parity == 1 {
        Conclusion::ZeroGuaranteed
    } else {
        Conclusion::Inconclusive
    }
}

fn is_fh_target(n: u32, k: u32, rep: &Representation) -> bool {
    match fadell_husseini_target(n, k) {
        Ok(target) => target.sorted_masks() == rep.sorted_masks(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> Engine {
        Engine::new()
    }

    #[test]
    fn main_target_shapes() {
        let r = theorem_main_target(3, 2).unwrap();
        assert_eq!(r.render(), "10,10,01");

        // n = k: the last generator contributes zero copies
        let r = theorem_main_target(4, 4).unwrap();
        assert_eq!(r.dim(), 6);
        assert_eq!(r.render(), "1000,1000,1000,0100,0100,0010");

        let r = theorem_main_target(2, 1).unwrap();
        assert_eq!(r.render(), "1");

        assert!(theorem_main_target(2, 3).is_err());
        assert!(theorem_main_target(2, 0).is_err());
    }

    #[test]
    fn fh_target_shapes() {
        let r = fadell_husseini_target(4, 2).unwrap();
        assert_eq!(r.render(), "10,10,01,01");

        assert!(fadell_husseini_target(3, 3).unwrap().is_empty());

        let r = fadell_husseini_target(3, 1).unwrap();
        assert_eq!(r.render(), "1,1");
    }

    #[test]
    fn main2_check_examples() {
        let e = engine();
        let rep = theorem_main_target(3, 2).unwrap();
        let v = theorem_main2_check(&e, 3, 2, &rep).unwrap();
        assert_eq!(v.m, 3);
        assert_eq!(v.condition_parity, 1);
        assert_eq!(v.conclusion, Conclusion::ZeroGuaranteed);
        assert_eq!(v.theorem_backing, TheoremBacking::ThmMain2);

        let rep = Representation::parse("11^3", 2).unwrap();
        let v = theorem_main2_check(&e, 3, 2, &rep).unwrap();
        assert_eq!(v.condition_parity, 0);
        assert_eq!(v.conclusion, Conclusion::Inconclusive);

        // with n - 1 = 4 the diagonal target alone gives condition
        // r(4,4; 11^8), which is the even C(8,4); the graded variant with
        // one eps_1 summand swapped in makes the condition odd
        let rep = Representation::parse("11^7", 2).unwrap();
        let v = theorem_main2_check(&e, 5, 2, &rep).unwrap();
        assert_eq!(v.m, 7);
        assert_eq!(v.condition_parity, 0);
        assert_eq!(v.conclusion, Conclusion::Inconclusive);

        let rep = Representation::parse("11^6,10", 2).unwrap();
        let v = theorem_main2_check(&e, 5, 2, &rep).unwrap();
        assert_eq!(v.condition_parity, 1);
        assert_eq!(v.conclusion, Conclusion::ZeroGuaranteed);
    }

    #[test]
    fn main2_check_reports_expected_dimension() {
        let e = engine();
        let rep = Representation::parse("11^4", 2).unwrap();
        let err = theorem_main2_check(&e, 3, 2, &rep).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 3,
                actual: 4
            }
        );
    }

    #[test]
    fn classical_borsuk_ulam_via_k1() {
        let e = engine();
        for n in 1..=20u32 {
            let rep = theorem_main_target(n, 1).unwrap();
            let v = theorem_main2_check(&e, n, 1, &rep).unwrap();
            assert_eq!(v.condition_parity, 1, "n = {n}");
        }
    }

    #[test]
    fn variety_check_examples() {
        let e = engine();

        let m_vec = SphereDims::new(vec![2, 3, 4]);
        let rep = fadell_husseini_target(5, 3).unwrap();
        let v = variety_check(&e, &m_vec, &rep).unwrap();
        assert_eq!(v.condition_parity, 1);
        assert_eq!(v.theorem_backing, TheoremBacking::CorMain);
        assert_eq!(v.n, 5);

        // descending dims do not match the variety filtration even though
        // the parity is the same by symmetry
        let m_vec = SphereDims::new(vec![4, 3]);
        let rep = Representation::parse("11^6", 2).unwrap();
        let v = variety_check(&e, &m_vec, &rep).unwrap();
        assert_eq!(v.m, 6);
        assert_eq!(v.condition_parity, 1);
        assert_eq!(v.theorem_backing, TheoremBacking::GeneralizedUnproven);

        let m_vec = SphereDims::new(vec![1, 0]);
        let rep = Representation::empty(2);
        let v = variety_check(&e, &m_vec, &rep).unwrap();
        assert_eq!(v.condition_parity, 1);
        assert_eq!(v.theorem_backing, TheoremBacking::GeneralizedUnproven);
    }

    #[test]
    fn variety_check_constant_dims_back_to_main2() {
        let e = engine();
        let m_vec = SphereDims::new(vec![2, 2]);
        let rep = theorem_main_target(3, 2).unwrap();
        let v = variety_check(&e, &m_vec, &rep).unwrap();
        assert_eq!(v.theorem_backing, TheoremBacking::ThmMain2);
        assert_eq!(v.condition_parity, 1);
    }

    #[test]
    fn variety_check_rejects_empty_variety() {
        let e = engine();
        // two orthogonal unit vectors cannot both live on S^0
        let m_vec = SphereDims::new(vec![0, 0]);
        let rep = Representation::empty(2);
        assert!(matches!(
            variety_check(&e, &m_vec, &rep),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn bookkeeping_holds_for_all_small_configurations() {
        for n in 1..=8u32 {
            for k in 1..=n {
                let main = theorem_main_target(n, k).unwrap();
                assert_eq!(
                    main.dim() as u64,
                    k as u64 * (n as u64 - 1) - binom2(k as u64)
                );
                let fh = fadell_husseini_target(n, k).unwrap();
                assert_eq!(fh.dim() as u64, k as u64 * (n as u64 - k as u64));
                // the variety dims for the FH target
                let m_vec = SphereDims::new((0..k).map(|i| n - k + i).collect());
                assert_eq!(fh.dim() as u64, m_vec.total() - binom2(k as u64));
            }
        }
    }
}
