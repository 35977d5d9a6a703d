//! The memoized recursion computing the mod-2 obstruction
//! r(n_1, ..., n_k; V) for a product of spheres S^{n_1} x ... x S^{n_k}
//! mapping into a (Z/2)^k-representation V of matching dimension.
//!
//! Evaluation rewrites a problem until it is empty:
//!
//! * any factor with n_i = 0 is forgotten (its coordinate is deleted from
//!   every summand),
//! * the empty problem (k = 0, no summands) has parity 1,
//! * otherwise one summand alpha is peeled: the parity is the XOR over the
//!   factors j in the support of alpha of the subproblem with n_j
//!   decremented and alpha removed.
//!
//! The peeled summand is chosen by minimal Hamming weight; the resulting
//! parity does not depend on this choice. Weight-1 summands give a single
//! branch, so representations made of basis characters evaluate in linear
//! time. Results are memoized under [`CanonicalKey`], which erases summand
//! order.
//!
//! Parity 1 certifies that every equivariant map into V has a zero. Parity
//! 0 decides nothing: it does not produce an equivariant map to the sphere
//! of V, so callers must report it as inconclusive.

use std::fmt;
use std::io::{self, BufRead, Write};

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::repcore::{compress_masks, CanonicalKey, Character, Representation, SphereDims};

/// First line of the persistent memo-cache format.
pub const CACHE_HEADER: &str = "obstructor-cache v1";

/// Outcome of a single obstruction computation.
#[derive(Clone, Debug)]
pub struct ObstructionResult {
    /// r(n_1, ..., n_k; V) in {0, 1}.
    pub parity: u8,
    /// Derivation tree, present only when requested. Certificate trees can
    /// be exponentially larger than the memoized evaluation.
    pub certificate: Option<DerivationNode>,
}

/// Rewrite rule applied at a certificate node.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Rule {
    /// k = 0, empty representation; parity 1.
    Base,
    /// Factors with n_i = 0 forgotten, summands projected.
    ReduceZeroFactor,
    /// One summand peeled, one child per factor in its support.
    Peel,
    /// Peel of a weight-1 summand: a single branch that just decrements the
    /// matching sphere dimension.
    FastpathEq2,
}

impl Rule {
    pub fn tag(&self) -> &'static str {
        match self {
            Rule::Base => "BASE",
            Rule::ReduceZeroFactor => "REDUCE_ZERO_FACTOR",
            Rule::Peel => "PEEL",
            Rule::FastpathEq2 => "FASTPATH_EQ2",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One node of a derivation certificate. The summand order of `rep` is the
/// caller's order; `peeled` indexes into it (0-based).
#[derive(Clone, Debug)]
pub struct DerivationNode {
    pub dims: SphereDims,
    pub rep: Representation,
    pub rule: Rule,
    pub peeled: Option<usize>,
    pub children: Vec<DerivationNode>,
    pub parity: u8,
}

impl DerivationNode {
    /// Recompute this node's parity from its children and check every local
    /// rule constraint. Returns false on any violation.
    pub fn verify(&self) -> bool {
        match self.rule {
            Rule::Base => {
                self.dims.k() == 0
                    && self.rep.is_empty()
                    && self.children.is_empty()
                    && self.parity == 1
            }
            Rule::ReduceZeroFactor => {
                if self.children.len() != 1 || !self.dims.dims().contains(&0) {
                    return false;
                }
                let child = &self.children[0];
                child.verify() && self.parity == child.parity
            }
            Rule::Peel | Rule::FastpathEq2 => {
                let Some(idx) = self.peeled else { return false };
                let Some(alpha) = self.rep.summands().get(idx) else {
                    return false;
                };
                if self.rule == Rule::FastpathEq2 && alpha.weight() != 1 {
                    return false;
                }
                if self.dims.dims().contains(&0) {
                    return false;
                }
                if self.children.len() != alpha.weight() as usize {
                    return false;
                }
                let xor = self
                    .children
                    .iter()
                    .fold(0u8, |acc, c| acc ^ c.parity);
                self.children.iter().all(DerivationNode::verify) && self.parity == xor
            }
        }
    }
}

/// Delete every factor with n_i = 0, projecting all summands by dropping
/// the corresponding coordinate. Summand order is preserved. The output has
/// all dims >= 1, or k = 0. This rewrite preserves the obstruction parity.
pub fn reduce_zero_factors(
    dims: &SphereDims,
    rep: &Representation,
) -> (SphereDims, Representation) {
    assert_eq!(dims.k(), rep.k(), "rank mismatch in reduce_zero_factors");
    let keep: Vec<usize> = (0..dims.k()).filter(|&i| dims.dims()[i] > 0).collect();
    let new_dims: Vec<u32> = keep.iter().map(|&i| dims.dims()[i]).collect();
    let new_k = keep.len();
    let summands: Vec<Character> = rep
        .summands()
        .iter()
        .map(|c| {
            let mut bits = 0u16;
            for (new_j, &old_j) in keep.iter().enumerate() {
                bits |= ((c.bits() >> old_j) & 1) << new_j;
            }
            Character::from_bits(bits, new_k)
        })
        .collect();
    (
        SphereDims::new(new_dims),
        Representation::new(new_k, summands).expect("projected summands have the new rank"),
    )
}

/// Peel summand `index`: one subproblem per factor j in the support of the
/// peeled character, with n_j decremented and the summand removed. Returns
/// an empty list iff the summand is the zero character. Panics if a dim is
/// 0 (callers must reduce zero factors first) or the index is out of range.
pub fn peel(
    dims: &SphereDims,
    rep: &Representation,
    index: usize,
) -> Vec<(usize, SphereDims, Representation)> {
    assert_eq!(dims.k(), rep.k(), "rank mismatch in peel");
    assert!(
        dims.dims().iter().all(|&n| n >= 1),
        "peel requires all sphere dimensions >= 1"
    );
    let alpha = rep.summands()[index];
    let mut rest = rep.summands().to_vec();
    rest.remove(index);
    let rest = Representation::new(rep.k(), rest).expect("remaining summands keep the rank");
    let mut out = Vec::new();
    for j in 0..dims.k() {
        if alpha.pairing(j) == 1 {
            let mut d = dims.dims().to_vec();
            d[j] -= 1;
            out.push((j, SphereDims::new(d), rest.clone()));
        }
    }
    out
}

/// Position of a summand of minimal Hamming weight (ties: lowest position).
/// Weight-1 summands give branch factor 1, so they are preferred.
pub fn choose_peel(rep: &Representation) -> Option<usize> {
    rep.summands()
        .iter()
        .enumerate()
        .min_by_key(|(i, c)| (c.weight(), *i))
        .map(|(i, _)| i)
}

/// The memoized obstruction engine. All methods take `&self`; the memo
/// table is safe for concurrent use and results are deterministic
/// regardless of scheduling (every evaluation order yields the same
/// parity).
pub struct Engine {
    memo: DashMap<CanonicalKey, u8>,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new()
    }
}

impl Engine {
    pub fn new() -> Self {
        Engine {
            memo: DashMap::new(),
        }
    }

    /// Number of memoized subproblems.
    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// Compute r(dims; rep). Requires rep.k == dims.k and
    /// dim(rep) == sum(dims); the recursion preserves both.
    pub fn compute_r(
        &self,
        dims: &SphereDims,
        rep: &Representation,
        want_certificate: bool,
    ) -> Result<ObstructionResult> {
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
        let parity = self.eval(dims.dims(), &compress_masks(&rep.sorted_masks()));
        let certificate = if want_certificate {
            let node = build_certificate(dims.clone(), rep.clone());
            debug_assert_eq!(node.parity, parity);
            Some(node)
        } else {
            None
        };
        Ok(ObstructionResult {
            parity,
            certificate,
        })
    }

    /// Convenience wrapper returning the bare parity.
    pub fn parity(&self, dims: &SphereDims, rep: &Representation) -> Result<u8> {
        Ok(self.compute_r(dims, rep, false)?.parity)
    }

    /// Parity for a pre-canonicalized state. `masks` must be sorted and
    /// balance the dims; used by the search driver to skip re-validation.
    pub(crate) fn parity_masks(&self, dims: &[u32], masks: &[u16]) -> u8 {
        debug_assert!(masks.windows(2).all(|w| w[0] <= w[1]));
        debug_assert_eq!(
            dims.iter().map(|&n| n as u64).sum::<u64>(),
            masks.len() as u64
        );
        self.eval(dims, &compress_masks(masks))
    }

    /// Core recursion on (dims, run-length-encoded summand multiset). The
    /// peeled summand is the smallest mask of minimal weight, the same
    /// choice [`choose_peel`] makes on a canonically sorted list.
    fn eval(&self, dims: &[u32], runs: &[(u16, u32)]) -> u8 {
        if dims.is_empty() {
            debug_assert!(runs.is_empty(), "dimension balance violated");
            return 1;
        }
        if dims.contains(&0) {
            let (dims, runs) = reduce_runs(dims, runs);
            return self.eval(&dims, &runs);
        }
        let key = CanonicalKey {
            dims: dims.to_vec(),
            runs: runs.to_vec(),
        };
        if let Some(p) = self.memo.get(&key) {
            return *p;
        }
        let pick = runs
            .iter()
            .enumerate()
            .min_by_key(|(i, (m, _))| (m.count_ones(), *i))
            .map(|(i, _)| i)
            .expect("balance guarantees a summand when some dim >= 1");
        let alpha = runs[pick].0;
        let mut rest = runs.to_vec();
        if rest[pick].1 == 1 {
            rest.remove(pick);
        } else {
            rest[pick].1 -= 1;
        }
        let mut parity = 0u8;
        for j in 0..dims.len() {
            if (alpha >> j) & 1 == 1 {
                let mut d = dims.to_vec();
                d[j] -= 1;
                parity ^= self.eval(&d, &rest);
            }
        }
        self.memo.insert(key, parity);
        parity
    }

    /// Load a persistent memo cache. The header line and every record are
    /// validated; any malformed line aborts the load with an error and
    /// leaves already-inserted records in place only up to that point.
    /// Returns the number of records loaded.
    pub fn load_cache<R: BufRead>(&self, reader: R) -> Result<usize> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Cache("empty cache file".into()))?
            .map_err(|e| Error::Cache(format!("read failure: {e}")))?;
        if header != CACHE_HEADER {
            return Err(Error::Cache(format!(
                "bad header {header:?}, expected {CACHE_HEADER:?}"
            )));
        }
        let mut count = 0usize;
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Cache(format!("read failure: {e}")))?;
            if line.is_empty() {
                continue;
            }
            let (key, parity) = parse_cache_record(&line)
                .map_err(|msg| Error::Cache(format!("record {}: {msg}", lineno + 1)))?;
            self.memo.insert(key, parity);
            count += 1;
        }
        Ok(count)
    }

    /// Write the memo table in the persistent format, records sorted so the
    /// output is deterministic. Returns the number of records written.
    pub fn write_cache<W: Write>(&self, mut writer: W) -> io::Result<usize> {
        let mut entries: Vec<(CanonicalKey, u8)> = self
            .memo
            .iter()
            .map(|e| (e.key().clone(), *e.value()))
            .collect();
        entries.sort();
        writeln!(writer, "{CACHE_HEADER}")?;
        for (key, parity) in &entries {
            let k = key.dims.len();
            let dims = key
                .dims
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let alphas = key
                .runs
                .iter()
                .flat_map(|&(m, count)| {
                    std::iter::repeat_n(Character::from_bits(m, k).render(), count as usize)
                })
                .collect::<Vec<_>>()
                .join(",");
            writeln!(writer, "{k};{dims};{alphas};{parity}")?;
        }
        Ok(entries.len())
    }
}

/// Parse one cache record "k;n1,..,nk;a1,..,aN;parity". Records must name a
/// state the engine could have memoized: 1 <= k <= 16, all dims >= 1,
/// alphas sorted canonically, and dimension balance.
fn parse_cache_record(line: &str) -> std::result::Result<(CanonicalKey, u8), String> {
    let fields: Vec<&str> = line.split(';').collect();
    if fields.len() != 4 {
        return Err(format!("expected 4 fields, got {}", fields.len()));
    }
    let k: usize = fields[0]
        .parse()
        .map_err(|_| format!("bad rank {:?}", fields[0]))?;
    if k == 0 || k > crate::repcore::MAX_RANK {
        return Err(format!("rank {k} out of range"));
    }
    let dims = fields[1]
        .split(',')
        .map(|t| t.parse::<u32>().map_err(|_| format!("bad dim {t:?}")))
        .collect::<std::result::Result<Vec<u32>, String>>()?;
    if dims.len() != k {
        return Err(format!("expected {k} dims, got {}", dims.len()));
    }
    if dims.contains(&0) {
        return Err("memoized states have all dims >= 1".into());
    }
    let masks = fields[2]
        .split(',')
        .map(|t| Character::parse(t, k).map(|c| c.bits()))
        .collect::<Result<Vec<u16>>>()
        .map_err(|e| e.to_string())?;
    if masks.windows(2).any(|w| w[0] > w[1]) {
        return Err("summands not in canonical order".into());
    }
    let total: u64 = dims.iter().map(|&n| n as u64).sum();
    if total != masks.len() as u64 {
        return Err(format!(
            "dimension balance violated: {total} vs {} summands",
            masks.len()
        ));
    }
    let parity = match fields[3] {
        "0" => 0,
        "1" => 1,
        other => return Err(format!("bad parity {other:?}")),
    };
    Ok((
        CanonicalKey {
            dims,
            runs: compress_masks(&masks),
        },
        parity,
    ))
}

/// Project the multiset onto the factors with positive dimension and
/// re-merge (projection can make distinct masks collide).
fn reduce_runs(dims: &[u32], runs: &[(u16, u32)]) -> (Vec<u32>, Vec<(u16, u32)>) {
    let keep: Vec<usize> = (0..dims.len()).filter(|&i| dims[i] > 0).collect();
    let new_dims: Vec<u32> = keep.iter().map(|&i| dims[i]).collect();
    let mut merged: std::collections::BTreeMap<u16, u32> = std::collections::BTreeMap::new();
    for &(mask, count) in runs {
        let mut bits = 0u16;
        for (new_j, &old_j) in keep.iter().enumerate() {
            bits |= ((mask >> old_j) & 1) << new_j;
        }
        *merged.entry(bits).or_insert(0) += count;
    }
    (new_dims, merged.into_iter().collect())
}

/// Build the full derivation tree for (dims, rep), preserving the caller's
/// summand order. No memoization: every branch is expanded, so this is the
/// non-memoized evaluation path as well.
fn build_certificate(dims: SphereDims, rep: Representation) -> DerivationNode {
    if dims.k() == 0 {
        return DerivationNode {
            dims,
            rep,
            rule: Rule::Base,
            peeled: None,
            children: Vec::new(),
            parity: 1,
        };
    }
    if dims.dims().contains(&0) {
        let (d, r) = reduce_zero_factors(&dims, &rep);
        let child = build_certificate(d, r);
        let parity = child.parity;
        return DerivationNode {
            dims,
            rep,
            rule: Rule::ReduceZeroFactor,
            peeled: None,
            children: vec![child],
            parity,
        };
    }
    let pick = choose_peel(&rep).expect("balance guarantees a summand");
    let alpha = rep.summands()[pick];
    let rule = if alpha.weight() == 1 {
        Rule::FastpathEq2
    } else {
        Rule::Peel
    };
    let children: Vec<DerivationNode> = peel(&dims, &rep, pick)
        .into_iter()
        .map(|(_, d, r)| build_certificate(d, r))
        .collect();
    let parity = children.iter().fold(0u8, |acc, c| acc ^ c.parity);
    DerivationNode {
        dims,
        rep,
        rule,
        peeled: Some(pick),
        children,
        parity,
    }
}
