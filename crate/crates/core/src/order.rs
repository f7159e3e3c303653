//! Majorization orders and upward-swap chains between rankings.

use crate::error::{check_len, Error, Result};
use crate::isotonic::Ranking;
use serde::{Deserialize, Serialize};

// Prefix-sum rounding grows with the total magnitude summed, not the largest entry.
fn tolerance(a: &[f64], b: &[f64]) -> f64 {
    let l1: f64 = a.iter().chain(b).map(|v| v.abs()).sum();
    1e-9 * l1.max(1.0)
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn prefix_dominates(a: &[f64], b: &[f64], require_equal_total: bool) -> Result<bool> {
    check_len(a.len(), b.len())?;
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("majorization inputs must be finite".into()));
    }
    let tol = tolerance(a, b);
    let (mut sa, mut sb) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sa += x;
        sb += y;
        if sa < sb - tol {
            return Ok(false);
        }
    }
    Ok(!require_equal_total || (sa - sb).abs() <= tol)
}

/// `a ⪰ b`: prefix sums of the descending rearrangements dominate, totals equal.
pub fn majorizes(a: &[f64], b: &[f64]) -> Result<bool> {
    check_len(a.len(), b.len())?;
    prefix_dominates(&sorted_desc(a), &sorted_desc(b), true)
}

/// `a ⪰_no b`: prefix sums in the given order dominate, totals equal.
pub fn majorizes_natural_order(a: &[f64], b: &[f64]) -> Result<bool> {
    prefix_dominates(a, b, true)
}

/// `a ⪰_w b`: prefix sums of the descending rearrangements dominate.
pub fn weakly_majorizes(a: &[f64], b: &[f64]) -> Result<bool> {
    check_len(a.len(), b.len())?;
    prefix_dominates(&sorted_desc(a), &sorted_desc(b), false)
}

/// True when `pi` is an upward swap of `nu`: they differ only at positions
/// `i < j`, where `pi[i] = nu[j] < pi[j] = nu[i]`. Items are compared by
/// index, i.e. the ground truth is the identity ranking.
pub fn is_upward_swap(pi: &Ranking, nu: &Ranking) -> Result<bool> {
    check_len(pi.len(), nu.len())?;
    let diff: Vec<usize> = (0..pi.len())
        .filter(|&k| pi.as_slice()[k] != nu.as_slice()[k])
        .collect();
    if diff.len() != 2 {
        return Ok(false);
    }
    let (i, j) = (diff[0], diff[1]);
    let (p, v) = (pi.as_slice(), nu.as_slice());
    Ok(p[i] == v[j] && p[j] == v[i] && p[i] < p[j])
}

/// Upward-swap test relative to an arbitrary ground truth: items are
/// compared by their position in `truth` instead of by index.
pub fn is_upward_swap_relative(truth: &Ranking, pi: &Ranking, nu: &Ranking) -> Result<bool> {
    check_len(truth.len(), pi.len())?;
    let rank = truth.positions();
    let relabel = |r: &Ranking| Ranking::new(r.as_slice().iter().map(|&i| rank[i]).collect());
    is_upward_swap(&relabel(pi)?, &relabel(nu)?)
}

/// Rankings `π₁ = truth, …, π_m` where each entry is an upward swap of the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapChain {
    pub truth: Ranking,
    pub perms: Vec<Ranking>,
}

impl SwapChain {
    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    /// Checks the start point and every link.
    pub fn is_valid(&self) -> Result<bool> {
        if self.perms.first() != Some(&self.truth) {
            return Ok(false);
        }
        for w in self.perms.windows(2) {
            if !is_upward_swap_relative(&self.truth, &w[0], &w[1])? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Builds a chain from `truth` to `target` by induction on the last
/// position: move the worst remaining item into its true slot with one
/// transposition, then recurse on the prefix. At most `n` rankings.
pub fn upward_swap_chain(truth: &Ranking, target: &Ranking) -> Result<SwapChain> {
    check_len(truth.len(), target.len())?;
    let rank = truth.positions();
    let n = target.len();
    // work in truth-relative labels, where the truth is the identity
    let mut cur: Vec<usize> = target.as_slice().iter().map(|&i| rank[i]).collect();
    let mut seq = vec![cur.clone()];
    for top in (1..n).rev() {
        let j = cur.iter().position(|&v| v == top).unwrap();
        if j != top {
            cur.swap(j, top);
            seq.push(cur.clone());
        }
    }
    seq.reverse();
    let perms = seq
        .into_iter()
        .map(|rel| Ranking::new(rel.into_iter().map(|r| truth.as_slice()[r]).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SwapChain {
        truth: truth.clone(),
        perms,
    })
}
