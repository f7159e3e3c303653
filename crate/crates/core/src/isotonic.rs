//! Projection of review scores onto ranking-constrained cones.
//!
//! A [`Ranking`] lists items from best to worst: `ranking.as_slice()[0]` is
//! the index claimed to have the largest mean. The isotonic mechanism
//! returns the least-squares fit `μ̂` subject to
//! `μ̂[π(1)] ≥ μ̂[π(2)] ≥ … ≥ μ̂[π(n)]`, computed by pool-adjacent-violators on
//! the scores reordered by `π`.
//!
//! Indices are 0-based in the Rust API. Serialized rankings (JSON, CSV,
//! `Display`) are 1-based so that `(2,1,3,4)` means "item 2 is best".

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::expfam::Family;

/// Permutation `π` with `π[k]` the item claimed to be the `(k+1)`-th best.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Ranking {
    perm: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Ranking {
    type Error = Error;

    fn try_from(one_based: Vec<usize>) -> Result<Self> {
        Ranking::from_one_based(&one_based)
    }
}

impl From<Ranking> for Vec<usize> {
    fn from(r: Ranking) -> Self {
        r.to_one_based()
    }
}

impl Ranking {
    /// Validates a 0-based permutation.
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        if n == 0 {
            return Err(Error::InvalidInput("ranking must not be empty".into()));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidInput(format!(
                    "ranking {:?} is not a permutation of 1..={n}",
                    perm.iter().map(|p| p + 1).collect::<Vec<_>>()
                )));
            }
            seen[p] = true;
        }
        Ok(Ranking { perm })
    }

    pub fn from_one_based(perm: &[usize]) -> Result<Self> {
        if perm.contains(&0) {
            return Err(Error::InvalidInput(
                "1-based ranking contains index 0".into(),
            ));
        }
        Ranking::new(perm.iter().map(|p| p - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Ranking {
            perm: (0..n).collect(),
        }
    }

    /// Ranking of `scores` from largest to smallest; ties go to the lower index.
    pub fn by_descending(scores: &[f64]) -> Result<Self> {
        let mut perm: Vec<usize> = (0..scores.len()).collect();
        perm.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        Ranking::new(perm)
    }

    /// All `n!` rankings in lexicographic order.
    pub fn all(n: usize) -> Vec<Ranking> {
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            out.push(Ranking { perm: perm.clone() });
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
                break;
            };
            let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
            perm.swap(i - 1, j);
            perm[i..].reverse();
        }
        out
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.perm.iter().map(|p| p + 1).collect()
    }

    /// Inverse permutation: `position[item]` is the 0-based rank of `item`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.perm.len()];
        for (k, &item) in self.perm.iter().enumerate() {
            pos[item] = k;
        }
        pos
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(k, &p)| k == p)
    }
}

impl std::fmt::Display for Ranking {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, p) in self.perm.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", p + 1)?;
        }
        write!(f, ")")
    }
}

/// Ordered blocks `I₁, …, I_p` partitioning the items; every item in `I_j`
/// is claimed to beat every item in `I_{j+1}`, with no order inside a block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct CoarseRanking {
    blocks: Vec<Vec<usize>>,
}

impl TryFrom<Vec<Vec<usize>>> for CoarseRanking {
    type Error = Error;

    fn try_from(one_based: Vec<Vec<usize>>) -> Result<Self> {
        CoarseRanking::from_one_based(&one_based)
    }
}

impl From<CoarseRanking> for Vec<Vec<usize>> {
    fn from(c: CoarseRanking) -> Self {
        c.blocks
            .iter()
            .map(|b| b.iter().map(|i| i + 1).collect())
            .collect()
    }
}

impl CoarseRanking {
    /// Validates 0-based blocks. Items inside each block are stored sorted.
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n: usize = blocks.iter().map(Vec::len).sum();
        if n == 0 {
            return Err(Error::InvalidInput("coarse ranking must not be empty".into()));
        }
        let mut seen = vec![false; n];
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::InvalidInput("coarse ranking has an empty block".into()));
            }
            block.sort_unstable();
            for &i in block.iter() {
                if i >= n || seen[i] {
                    return Err(Error::InvalidInput(format!(
                        "blocks do not partition 1..={n} (item {} repeated or out of range)",
                        i + 1
                    )));
                }
                seen[i] = true;
            }
        }
        Ok(CoarseRanking { blocks })
    }

    pub fn from_one_based(blocks: &[Vec<usize>]) -> Result<Self> {
        if blocks.iter().flatten().any(|&i| i == 0) {
            return Err(Error::InvalidInput("1-based block contains index 0".into()));
        }
        CoarseRanking::new(
            blocks
                .iter()
                .map(|b| b.iter().map(|i| i - 1).collect())
                .collect(),
        )
    }

    /// Builds blocks from per-item levels (smaller level = better block).
    /// Distinct levels need not be contiguous.
    pub fn from_levels(levels: &[usize]) -> Result<Self> {
        let mut distinct: Vec<usize> = levels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let blocks = distinct
            .iter()
            .map(|&lv| {
                levels
                    .iter()
                    .enumerate()
                    .filter(|(_, &l)| l == lv)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        CoarseRanking::new(blocks)
    }

    /// Every block a singleton, in the order of `ranking`.
    pub fn from_ranking(ranking: &Ranking) -> Self {
        CoarseRanking {
            blocks: ranking.as_slice().iter().map(|&i| vec![i]).collect(),
        }
    }

    /// Ground-truth coarse ranking of `mu_star` with the given block sizes:
    /// the first block holds the `sizes[0]` largest means, and so on.
    pub fn truthful(mu_star: &[f64], sizes: &[usize]) -> Result<Self> {
        check_len(mu_star.len(), sizes.iter().sum())?;
        let order = Ranking::by_descending(mu_star)?;
        let mut blocks = Vec::with_capacity(sizes.len());
        let mut at = 0;
        for &s in sizes {
            blocks.push(order.as_slice()[at..at + s].to_vec());
            at += s;
        }
        CoarseRanking::new(blocks)
    }

    /// Every ordered partition of `0..n` with the given block sizes.
    pub fn all_with_sizes(sizes: &[usize]) -> Result<Vec<CoarseRanking>> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidInput("block sizes must be positive".into()));
        }
        let n: usize = sizes.iter().sum();
        let mut out = Vec::new();
        let mut blocks = Vec::new();
        let remaining: Vec<usize> = (0..n).collect();
        fill_blocks(sizes, &remaining, &mut blocks, &mut out);
        Ok(out)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Per-item 1-based block number.
    pub fn levels(&self) -> Vec<usize> {
        let mut lv = vec![0; self.len()];
        for (j, block) in self.blocks.iter().enumerate() {
            for &i in block {
                lv[i] = j + 1;
            }
        }
        lv
    }
}

fn fill_blocks(
    sizes: &[usize],
    remaining: &[usize],
    blocks: &mut Vec<Vec<usize>>,
    out: &mut Vec<CoarseRanking>,
) {
    let Some((&size, rest)) = sizes.split_first() else {
        out.push(CoarseRanking {
            blocks: blocks.clone(),
        });
        return;
    };
    let mut chosen = Vec::with_capacity(size);
    choose(remaining, size, 0, &mut chosen, &mut |picked| {
        let left: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|i| !picked.contains(i))
            .collect();
        blocks.push(picked.to_vec());
        fill_blocks(rest, &left, blocks, out);
        blocks.pop();
    });
}

fn choose(
    pool: &[usize],
    k: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    for i in from..pool.len() {
        if pool.len() - i < k - chosen.len() {
            break;
        }
        chosen.push(pool[i]);
        choose(pool, k, i + 1, chosen, visit);
        chosen.pop();
    }
}

impl std::fmt::Display for CoarseRanking {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (j, block) in self.blocks.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (k, i) in block.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", i + 1)?;
            }
            write!(f, "}}")?;
        }
        write!(f, ")")
    }
}

/// The order constraint a fit was computed under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Ranking(Ranking),
    Coarse(CoarseRanking),
}

impl From<Ranking> for Constraint {
    fn from(r: Ranking) -> Self {
        Constraint::Ranking(r)
    }
}

impl From<CoarseRanking> for Constraint {
    fn from(c: CoarseRanking) -> Self {
        Constraint::Coarse(c)
    }
}

impl Constraint {
    pub fn len(&self) -> usize {
        match self {
            Constraint::Ranking(r) => r.len(),
            Constraint::Coarse(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when `v` satisfies the constraint exactly.
    pub fn is_satisfied_by(&self, v: &[f64]) -> bool {
        if v.len() != self.len() {
            return false;
        }
        match self {
            Constraint::Ranking(r) => r.as_slice().windows(2).all(|w| v[w[0]] >= v[w[1]]),
            Constraint::Coarse(c) => c.blocks().windows(2).all(|w| {
                let low = w[0].iter().map(|&i| v[i]).fold(f64::INFINITY, f64::min);
                let high = w[1].iter().map(|&i| v[i]).fold(f64::NEG_INFINITY, f64::max);
                low >= high
            }),
        }
    }
}

/// A run of positions (in constraint order) pooled to a common value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pool {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotonicFit {
    pub input: Vec<f64>,
    pub constraint: Constraint,
    pub mu_hat: Vec<f64>,
    /// `(b′)⁻¹(μ̂)` when a family was supplied; `±∞` at boundary means.
    pub theta_hat: Option<Vec<f64>>,
    pub pools: Vec<Pool>,
}

fn check_scores(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::InvalidInput("score vector is empty".into()));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "score {} is not finite ({})",
            i + 1,
            x[i]
        )));
    }
    Ok(())
}

/// Weighted PAVA for a non-increasing fit. Stack-based, O(n).
fn pava_descending(values: &[f64], weights: &[f64]) -> (Vec<f64>, Vec<Pool>) {
    struct Block {
        start: usize,
        weight: f64,
        total: f64,
        value: f64,
    }
    let mut stack: Vec<Block> = Vec::with_capacity(values.len());
    for (i, (&v, &w)) in values.iter().zip(weights).enumerate() {
        let mut cur = Block {
            start: i,
            weight: w,
            total: v * w,
            value: v,
        };
        while let Some(prev) = stack.last() {
            // ties stay separate so a feasible input is returned bit for bit
            if prev.value >= cur.value {
                break;
            }
            let prev = stack.pop().unwrap();
            let weight = prev.weight + cur.weight;
            let total = prev.total + cur.total;
            cur = Block {
                start: prev.start,
                weight,
                total,
                value: total / weight,
            };
        }
        stack.push(cur);
    }

    let mut fitted = vec![0.0; values.len()];
    let mut pools: Vec<Pool> = Vec::with_capacity(stack.len());
    for (k, block) in stack.iter().enumerate() {
        let end = stack.get(k + 1).map_or(values.len(), |b| b.start);
        fitted[block.start..end].fill(block.value);
        match pools.last_mut() {
            Some(p) if p.value == block.value => p.end = end,
            _ => pools.push(Pool {
                start: block.start,
                end,
                value: block.value,
            }),
        }
    }
    (fitted, pools)
}

/// Euclidean projection onto `{μ : μ₁ ≥ μ₂ ≥ … ≥ μₙ}`.
pub fn project_descending(x: &[f64]) -> Result<IsotonicFit> {
    project_descending_weighted(x, &vec![1.0; x.len()])
}

/// Weighted projection onto the descending cone, minimizing `Σ wᵢ(xᵢ − μᵢ)²`.
pub fn project_descending_weighted(x: &[f64], weights: &[f64]) -> Result<IsotonicFit> {
    check_scores(x)?;
    check_len(x.len(), weights.len())?;
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidInput("weights must be positive and finite".into()));
    }
    let (mu_hat, pools) = pava_descending(x, weights);
    Ok(IsotonicFit {
        input: x.to_vec(),
        constraint: Constraint::Ranking(Ranking::identity(x.len())),
        mu_hat,
        theta_hat: None,
        pools,
    })
}

/// Isotonic mechanism for a full ranking.
pub fn isotonic_mechanism(x: &[f64], ranking: &Ranking) -> Result<IsotonicFit> {
    check_scores(x)?;
    check_len(ranking.len(), x.len())?;
    let sorted: Vec<f64> = ranking.as_slice().iter().map(|&i| x[i]).collect();
    let (fitted, pools) = pava_descending(&sorted, &vec![1.0; x.len()]);
    let mut mu_hat = vec![0.0; x.len()];
    for (k, &i) in ranking.as_slice().iter().enumerate() {
        mu_hat[i] = fitted[k];
    }
    Ok(IsotonicFit {
        input: x.to_vec(),
        constraint: Constraint::Ranking(ranking.clone()),
        mu_hat,
        theta_hat: None,
        pools,
    })
}

/// Expands blocks into a full ranking: block order kept, each block sorted
/// by descending score, equal scores by ascending index.
pub fn coarse_to_permutation(blocks: &CoarseRanking, x: &[f64]) -> Result<Ranking> {
    check_len(blocks.len(), x.len())?;
    let mut perm = Vec::with_capacity(x.len());
    for block in blocks.blocks() {
        let mut b = block.clone();
        b.sort_by(|&i, &j| x[j].total_cmp(&x[i]).then(i.cmp(&j)));
        perm.extend(b);
    }
    Ranking::new(perm)
}

/// Isotonic mechanism for a coarse ranking. Sorting each block by its own
/// scores reduces the problem to the full-ranking case.
pub fn coarse_isotonic_mechanism(x: &[f64], blocks: &CoarseRanking) -> Result<IsotonicFit> {
    check_scores(x)?;
    let ranking = coarse_to_permutation(blocks, x)?;
    let mut fit = isotonic_mechanism(x, &ranking)?;
    fit.constraint = Constraint::Coarse(blocks.clone());
    Ok(fit)
}

/// Dispatches on the constraint kind.
pub fn fit(x: &[f64], constraint: &Constraint) -> Result<IsotonicFit> {
    match constraint {
        Constraint::Ranking(r) => isotonic_mechanism(x, r),
        Constraint::Coarse(c) => coarse_isotonic_mechanism(x, c),
    }
}

/// Ranking-constrained maximum likelihood. The mean-scale solution coincides
/// with the isotonic mechanism for every family; `θ̂` is read off through
/// `(b′)⁻¹`.
pub fn ranking_constrained_mle(family: &Family, x: &[f64], ranking: &Ranking) -> Result<IsotonicFit> {
    check_scores(x)?;
    if let Some(i) = x.iter().position(|&v| !family.is_admissible_mean(v)) {
        return Err(Error::InvalidInput(format!(
            "score {} ({}) lies outside the support hull of {family}",
            i + 1,
            x[i]
        )));
    }
    let mut fit = isotonic_mechanism(x, ranking)?;
    let theta = fit
        .mu_hat
        .iter()
        .map(|&mu| family.natural_param_or_sentinel(mu))
        .collect::<Result<Vec<_>>>()?;
    fit.theta_hat = Some(theta);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r1(p: &[usize]) -> Ranking {
        Ranking::from_one_based(p).unwrap()
    }

    fn c1(blocks: &[&[usize]]) -> CoarseRanking {
        CoarseRanking::from_one_based(&blocks.iter().map(|b| b.to_vec()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn project_descending_examples() {
        assert_eq!(project_descending(&[3.0, 2.0, 1.0]).unwrap().mu_hat, vec![3.0, 2.0, 1.0]);
        // frozen from the pooling-pattern oracle in tests/isotonic_oracle.rs
        assert_eq!(project_descending(&[2.0, 3.0, 1.0]).unwrap().mu_hat, vec![2.5, 2.5, 1.0]);
        assert_eq!(project_descending(&[1.0, 1.0, 1.0]).unwrap().mu_hat, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn project_descending_rejects_bad_input() {
        assert!(matches!(project_descending(&[]), Err(Error::InvalidInput(_))));
        assert!(project_descending(&[1.0, f64::NAN]).is_err());
        assert!(project_descending_weighted(&[1.0, 2.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn pools_describe_the_fit() {
        let fit = project_descending(&[2.0, 3.0, 1.0, 4.0]).unwrap();
        assert_eq!(fit.mu_hat, vec![2.5, 2.5, 2.5, 2.5]);
        assert_eq!(fit.pools, vec![Pool { start: 0, end: 4, value: 2.5 }]);
        let fit = project_descending(&[5.0, 1.0, 2.0]).unwrap();
        assert_eq!(fit.pools.len(), 2);
        assert_eq!(fit.pools[1], Pool { start: 1, end: 3, value: 1.5 });
    }

    #[test]
    fn weighted_pooling() {
        let fit = project_descending_weighted(&[1.0, 4.0], &[3.0, 1.0]).unwrap();
        assert_eq!(fit.mu_hat, vec![1.75, 1.75]);
    }

    #[test]
    fn isotonic_mechanism_examples() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(isotonic_mechanism(&x, &r1(&[3, 2, 1])).unwrap().mu_hat, x.to_vec());
        assert_eq!(
            isotonic_mechanism(&x, &r1(&[1, 2, 3])).unwrap().mu_hat,
            vec![2.0, 2.0, 2.0]
        );
        let truth = [8.0, 7.0, 6.0, 4.0];
        assert_eq!(
            isotonic_mechanism(&truth, &Ranking::identity(4)).unwrap().mu_hat,
            truth.to_vec()
        );
        assert!(matches!(
            isotonic_mechanism(&x, &Ranking::identity(2)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn coarse_examples() {
        let fit = coarse_isotonic_mechanism(&[5.0, 4.0, 1.0], &c1(&[&[1, 2], &[3]])).unwrap();
        assert_eq!(fit.mu_hat, vec![5.0, 4.0, 1.0]);
        let fit = coarse_isotonic_mechanism(&[1.0, 3.0], &c1(&[&[1], &[2]])).unwrap();
        assert_eq!(fit.mu_hat, vec![2.0, 2.0]);
        let x = [0.3, 9.0, -2.0, 4.0];
        let fit = coarse_isotonic_mechanism(&x, &c1(&[&[1, 2, 3, 4]])).unwrap();
        assert_eq!(fit.mu_hat, x.to_vec());
        assert!(matches!(fit.constraint, Constraint::Coarse(_)));
    }

    #[test]
    fn coarse_to_permutation_examples() {
        let p = coarse_to_permutation(&c1(&[&[2], &[1]]), &[0.0, 7.0]).unwrap();
        assert_eq!(p, r1(&[2, 1]));
        let p = coarse_to_permutation(&c1(&[&[1, 2, 3]]), &[1.0, 3.0, 2.0]).unwrap();
        assert_eq!(p, r1(&[2, 3, 1]));
        let p = coarse_to_permutation(&c1(&[&[1, 2], &[3]]), &[5.0, 5.0, 0.0]).unwrap();
        assert_eq!(p, r1(&[1, 2, 3]));
    }

    #[test]
    fn coarse_ties_do_not_change_pooled_values() {
        let x = [2.0, 2.0, 5.0, 1.0];
        let blocks = c1(&[&[1, 2], &[3, 4]]);
        let a = coarse_isotonic_mechanism(&x, &blocks).unwrap().mu_hat;
        // the other within-block order of the tied pair
        let b = isotonic_mechanism(&x, &r1(&[2, 1, 3, 4])).unwrap().mu_hat;
        assert_eq!(a, b);
    }

    #[test]
    fn singleton_blocks_match_full_ranking() {
        let r = r1(&[3, 1, 4, 2]);
        let x = [0.5, 2.0, 1.0, 3.5];
        let a = isotonic_mechanism(&x, &r).unwrap().mu_hat;
        let b = coarse_isotonic_mechanism(&x, &CoarseRanking::from_ranking(&r)).unwrap().mu_hat;
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_partitions() {
        assert!(CoarseRanking::from_one_based(&[vec![1, 2], vec![2]]).is_err());
        assert!(CoarseRanking::from_one_based(&[vec![1], vec![]]).is_err());
        assert!(CoarseRanking::from_one_based(&[vec![1], vec![3]]).is_err());
        assert!(Ranking::from_one_based(&[1, 1]).is_err());
        assert!(Ranking::from_one_based(&[0, 1]).is_err());
        assert!(Ranking::new(vec![]).is_err());
    }

    #[test]
    fn mle_examples() {
        let b = Family::binomial(10).unwrap();
        let fit = ranking_constrained_mle(&b, &[4.0, 6.0], &r1(&[1, 2])).unwrap();
        assert_eq!(fit.mu_hat, vec![5.0, 5.0]);
        assert_eq!(fit.theta_hat.unwrap(), vec![0.0, 0.0]);

        let g = Family::gaussian(1.0).unwrap();
        let fit = ranking_constrained_mle(&g, &[0.5, -1.0, 2.0], &r1(&[3, 1, 2])).unwrap();
        assert_eq!(fit.theta_hat.unwrap(), fit.mu_hat);

        // boundary pools give infinite sentinels
        let fit = ranking_constrained_mle(&b, &[10.0, 0.0], &r1(&[1, 2])).unwrap();
        assert_eq!(fit.theta_hat.unwrap(), vec![f64::INFINITY, f64::NEG_INFINITY]);

        assert!(ranking_constrained_mle(&b, &[11.0, 0.0], &r1(&[1, 2])).is_err());
        assert!(ranking_constrained_mle(&Family::Poisson, &[-1.0], &r1(&[1])).is_err());
    }

    #[test]
    fn enumerations() {
        let all = Ranking::all(4);
        assert_eq!(all.len(), 24);
        assert_eq!(all[0], Ranking::identity(4));
        assert_eq!(all[23], r1(&[4, 3, 2, 1]));
        assert_eq!(Ranking::all(1).len(), 1);

        let coarse = CoarseRanking::all_with_sizes(&[1, 3]).unwrap();
        assert_eq!(coarse.len(), 4);
        let coarse = CoarseRanking::all_with_sizes(&[2, 1, 2]).unwrap();
        assert_eq!(coarse.len(), 30);
        assert!(CoarseRanking::all_with_sizes(&[2, 0]).is_err());
    }

    #[test]
    fn truthful_constructors() {
        let mu = [6.0, 8.0, 4.0, 7.0];
        assert_eq!(Ranking::by_descending(&mu).unwrap(), r1(&[2, 4, 1, 3]));
        let c = CoarseRanking::truthful(&mu, &[1, 3]).unwrap();
        assert_eq!(c, c1(&[&[2], &[1, 3, 4]]));
        assert_eq!(c.levels(), vec![2, 1, 2, 2]);
        let lv = CoarseRanking::from_levels(&[3, 1, 3, 3]).unwrap();
        assert_eq!(lv, c);
    }

    #[test]
    fn display_and_json_are_one_based() {
        let r = r1(&[2, 1, 3]);
        assert_eq!(r.to_string(), "(2,1,3)");
        assert_eq!(serde_json::to_string(&r).unwrap(), "[2,1,3]");
        let back: Ranking = serde_json::from_str("[2,1,3]").unwrap();
        assert_eq!(back, r);
        assert!(serde_json::from_str::<Ranking>("[2,2,3]").is_err());
        assert_eq!(c1(&[&[2], &[1, 3]]).to_string(), "({2},{1,3})");
    }

    #[test]
    fn constraint_check() {
        let c = Constraint::Coarse(c1(&[&[1, 2], &[3]]));
        assert!(c.is_satisfied_by(&[3.0, 5.0, 3.0]));
        assert!(!c.is_satisfied_by(&[3.0, 5.0, 3.5]));
        let r = Constraint::Ranking(r1(&[2, 1]));
        assert!(r.is_satisfied_by(&[1.0, 2.0]));
        assert!(!r.is_satisfied_by(&[2.0, 1.0]));
    }
}
