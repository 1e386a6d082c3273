//! Feasibility constraints over candidates: matroids and general downward-closed
//! families of winner sets.

use log::warn;

use crate::error::{domain, Error, Result};
use crate::sets::{CandSet, MAX_CANDIDATES};

/// Largest ground set for which explicit families are validated and rank
/// tables are materialized.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// A downward-closed family of candidate sets, given by its listed members.
/// Every subset of a listed set is feasible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFamily {
    ground: usize,
    listed: Vec<CandSet>,
}

impl SetFamily {
    pub fn new(ground: usize, sets: &[Vec<usize>]) -> Result<Self> {
        if ground > MAX_CANDIDATES {
            return Err(Error::Capacity {
                what: "candidate count",
                limit: MAX_CANDIDATES,
                actual: ground,
                hint: "",
            });
        }
        let mut listed = Vec::with_capacity(sets.len());
        for set in sets {
            if let Some(&bad) = set.iter().find(|&&c| c >= ground) {
                return Err(domain(format!(
                    "feasible set mentions candidate {bad}, but there are only {ground}"
                )));
            }
            listed.push(CandSet::from_indices(set.iter().copied()));
        }
        listed.sort();
        listed.dedup();
        // Keep only inclusion-maximal sets.
        let maximal: Vec<CandSet> = listed
            .iter()
            .filter(|s| !listed.iter().any(|o| o != *s && s.is_subset(*o)))
            .copied()
            .collect();
        Ok(SetFamily {
            ground,
            listed: maximal,
        })
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    /// The inclusion-maximal feasible sets.
    pub fn maximal_sets(&self) -> &[CandSet] {
        &self.listed
    }

    pub fn contains(&self, set: CandSet) -> bool {
        set.is_empty() || self.listed.iter().any(|m| set.is_subset(*m))
    }

    /// Largest feasible subset of `set`.
    pub fn rank(&self, set: CandSet) -> usize {
        self.listed
            .iter()
            .map(|m| m.intersection(set).len())
            .max()
            .unwrap_or(0)
    }

    /// Rank of every subset of the ground set, indexed by bitmask.
    pub fn rank_table(&self) -> Vec<u8> {
        let size = 1usize << self.ground;
        let mut independent = vec![false; size];
        for m in &self.listed {
            independent[m.0 as usize] = true;
        }
        independent[0] = true;
        for mask in (0..size).rev() {
            if independent[mask] {
                continue;
            }
            let mut rest = !mask & (size - 1);
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                if independent[mask | bit] {
                    independent[mask] = true;
                    break;
                }
                rest &= rest - 1;
            }
        }
        let mut rank = vec![0u8; size];
        for mask in 1..size {
            if independent[mask] {
                rank[mask] = mask.count_ones() as u8;
            } else {
                let mut best = 0;
                let mut bits = mask;
                while bits != 0 {
                    let bit = bits & bits.wrapping_neg();
                    best = best.max(rank[mask ^ bit]);
                    bits &= bits - 1;
                }
                rank[mask] = best;
            }
        }
        rank
    }

    /// Whether the family is the independence system of a matroid.
    /// Checked through local submodularity of the rank table.
    pub fn is_matroid(&self) -> bool {
        let rank = self.rank_table();
        let n = self.ground;
        for mask in 0..rank.len() {
            for e in 0..n {
                if mask >> e & 1 == 1 {
                    continue;
                }
                for g in (e + 1)..n {
                    if mask >> g & 1 == 1 {
                        continue;
                    }
                    let with_e = rank[mask | 1 << e];
                    let with_g = rank[mask | 1 << g];
                    let both = rank[mask | 1 << e | 1 << g];
                    if with_e + with_g < both + rank[mask] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// A matroid over the candidates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Matroid {
    /// Any set of at most `k` candidates is independent.
    Uniform { ground: usize, k: usize },
    /// Blocks partition the candidates; at most `caps[b]` winners from block `b`.
    Partition {
        ground: usize,
        blocks: Vec<CandSet>,
        caps: Vec<usize>,
    },
    /// Independent sets listed explicitly (downward closure implied).
    Explicit(SetFamily),
}

impl Matroid {
    pub fn uniform(ground: usize, k: usize) -> Result<Self> {
        check_ground(ground)?;
        Ok(Matroid::Uniform { ground, k })
    }

    pub fn single_winner(ground: usize) -> Result<Self> {
        Self::uniform(ground, 1)
    }

    pub fn partition(ground: usize, blocks: &[Vec<usize>], caps: &[usize]) -> Result<Self> {
        check_ground(ground)?;
        if blocks.len() != caps.len() {
            return Err(domain(format!(
                "partition has {} blocks but {} capacities",
                blocks.len(),
                caps.len()
            )));
        }
        let mut seen = CandSet::EMPTY;
        let mut sets = Vec::with_capacity(blocks.len());
        for block in blocks {
            let mut set = CandSet::EMPTY;
            for &c in block {
                if c >= ground {
                    return Err(domain(format!("partition block mentions candidate {c}")));
                }
                if seen.contains(c) || set.contains(c) {
                    return Err(domain(format!("candidate {c} appears in two partition blocks")));
                }
                set = set.with(c);
            }
            seen = seen.union(set);
            sets.push(set);
        }
        if seen != CandSet::full(ground) {
            return Err(domain("partition blocks do not cover every candidate"));
        }
        Ok(Matroid::Partition {
            ground,
            blocks: sets,
            caps: caps.to_vec(),
        })
    }

    /// Builds a matroid from listed independent sets. The family is validated
    /// for the matroid axioms when the ground set has at most 20 candidates.
    pub fn explicit(ground: usize, independent: &[Vec<usize>]) -> Result<Self> {
        check_ground(ground)?;
        let family = SetFamily::new(ground, independent)?;
        if ground <= BRUTE_FORCE_LIMIT {
            if !family.is_matroid() {
                return Err(domain(
                    "listed independent sets violate the matroid exchange axiom",
                ));
            }
        } else {
            warn!("explicit matroid on {ground} candidates: axioms not validated");
        }
        Ok(Matroid::Explicit(family))
    }

    pub fn ground_size(&self) -> usize {
        match self {
            Matroid::Uniform { ground, .. } | Matroid::Partition { ground, .. } => *ground,
            Matroid::Explicit(family) => family.ground,
        }
    }

    pub fn is_single_winner(&self) -> bool {
        matches!(self, Matroid::Uniform { k: 1, .. })
    }

    pub fn rank(&self, set: CandSet) -> Result<usize> {
        if !set.is_subset(CandSet::full(self.ground_size())) {
            return Err(domain(format!(
                "candidate set {set:?} is not inside a ground set of {}",
                self.ground_size()
            )));
        }
        Ok(self.rank_unchecked(set))
    }

    pub(crate) fn rank_unchecked(&self, set: CandSet) -> usize {
        match self {
            Matroid::Uniform { k, .. } => set.len().min(*k),
            Matroid::Partition { blocks, caps, .. } => blocks
                .iter()
                .zip(caps)
                .map(|(b, &cap)| b.intersection(set).len().min(cap))
                .sum(),
            Matroid::Explicit(family) => family.rank(set),
        }
    }

    pub fn is_independent(&self, set: CandSet) -> bool {
        match self {
            Matroid::Explicit(family) => family.contains(set),
            _ => self.rank_unchecked(set) == set.len(),
        }
    }

    /// Rank of every candidate subset, indexed by bitmask.
    pub fn rank_table(&self) -> Result<Vec<u8>> {
        let n = self.ground_size();
        if n > BRUTE_FORCE_LIMIT {
            return Err(Error::Capacity {
                what: "candidate count for rank tables",
                limit: BRUTE_FORCE_LIMIT,
                actual: n,
                hint: "",
            });
        }
        Ok(match self {
            Matroid::Explicit(family) => family.rank_table(),
            _ => (0..1u32 << n)
                .map(|m| self.rank_unchecked(CandSet(m)) as u8)
                .collect(),
        })
    }

    /// Connected components: two candidates share a block iff some circuit
    /// contains both. Blocks are sorted by their smallest member.
    pub fn components(&self) -> Result<Vec<CandSet>> {
        let n = self.ground_size();
        let mut blocks: Vec<CandSet> = match self {
            Matroid::Uniform { k, .. } => {
                if *k >= 1 && *k < n {
                    vec![CandSet::full(n)]
                } else {
                    (0..n).map(CandSet::singleton).collect()
                }
            }
            Matroid::Partition { blocks, caps, .. } => {
                let mut out = Vec::new();
                for (b, &cap) in blocks.iter().zip(caps) {
                    if cap >= 1 && cap < b.len() {
                        out.push(*b);
                    } else {
                        out.extend(b.iter().map(CandSet::singleton));
                    }
                }
                out
            }
            Matroid::Explicit(_) => circuit_components(n, &self.rank_table()?),
        };
        blocks.sort_by_key(|b| b.0.trailing_zeros());
        Ok(blocks)
    }

    /// Restriction of the matroid to a subset of candidates, relabeled to
    /// `0..members.len()` in increasing order.
    pub fn restrict(&self, members: CandSet) -> Result<Matroid> {
        let index: Vec<usize> = members.iter().collect();
        let m = index.len();
        let relabel = |set: CandSet| {
            CandSet::from_indices(
                index
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| set.contains(c))
                    .map(|(i, _)| i),
            )
        };
        Ok(match self {
            Matroid::Uniform { k, .. } => Matroid::Uniform { ground: m, k: *k },
            Matroid::Partition { blocks, caps, .. } => {
                let mut new_blocks = Vec::new();
                let mut new_caps = Vec::new();
                for (b, &cap) in blocks.iter().zip(caps) {
                    let r = relabel(*b);
                    if !r.is_empty() {
                        new_blocks.push(r);
                        new_caps.push(cap);
                    }
                }
                Matroid::Partition {
                    ground: m,
                    blocks: new_blocks,
                    caps: new_caps,
                }
            }
            Matroid::Explicit(family) => {
                let sets: Vec<Vec<usize>> = family
                    .listed
                    .iter()
                    .map(|s| relabel(s.intersection(members)).iter().collect())
                    .collect();
                Matroid::Explicit(SetFamily::new(m, &sets)?)
            }
        })
    }
}

fn check_ground(ground: usize) -> Result<()> {
    if ground > MAX_CANDIDATES {
        return Err(Error::Capacity {
            what: "candidate count",
            limit: MAX_CANDIDATES,
            actual: ground,
            hint: "",
        });
    }
    Ok(())
}

fn circuit_components(n: usize, rank: &[u8]) -> Vec<CandSet> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], a: usize) -> usize {
        let mut root = a;
        while parent[root] != root {
            root = parent[root];
        }
        parent[a] = root;
        root
    }
    for mask in 1..rank.len() {
        let size = mask.count_ones() as u8;
        // A circuit is dependent with every single-element deletion independent.
        if rank[mask] != size - 1 || size < 2 {
            continue;
        }
        let mut bits = mask;
        let mut minimal = true;
        while bits != 0 {
            let bit = bits & bits.wrapping_neg();
            if rank[mask ^ bit] != size - 1 {
                minimal = false;
                break;
            }
            bits &= bits - 1;
        }
        if !minimal {
            continue;
        }
        let first = mask.trailing_zeros() as usize;
        let mut bits = mask & (mask - 1);
        while bits != 0 {
            let other = bits.trailing_zeros() as usize;
            let (a, b) = (find(&mut parent, first), find(&mut parent, other));
            parent[a] = b;
            bits &= bits - 1;
        }
    }
    let mut blocks: Vec<CandSet> = Vec::new();
    let mut root_block: Vec<Option<usize>> = vec![None; n];
    for c in 0..n {
        let root = find(&mut parent, c);
        match root_block[root] {
            Some(i) => blocks[i] = blocks[i].with(c),
            None => {
                root_block[root] = Some(blocks.len());
                blocks.push(CandSet::singleton(c));
            }
        }
    }
    blocks
}

/// The winner-set constraint of an environment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    Matroid(Matroid),
    /// A downward-closed family that need not be a matroid. Winners are the
    /// feasible set with maximum total positive score.
    Family(SetFamily),
}

impl Constraint {
    pub fn ground_size(&self) -> usize {
        match self {
            Constraint::Matroid(m) => m.ground_size(),
            Constraint::Family(f) => f.ground_size(),
        }
    }

    pub fn as_matroid(&self) -> Option<&Matroid> {
        match self {
            Constraint::Matroid(m) => Some(m),
            Constraint::Family(_) => None,
        }
    }

    pub fn is_single_winner(&self) -> bool {
        self.as_matroid().is_some_and(Matroid::is_single_winner)
    }

    pub fn rank(&self, set: CandSet) -> Result<usize> {
        match self {
            Constraint::Matroid(m) => m.rank(set),
            Constraint::Family(f) => {
                if !set.is_subset(CandSet::full(f.ground)) {
                    return Err(domain(format!("candidate set {set:?} is out of range")));
                }
                Ok(f.rank(set))
            }
        }
    }

    pub fn is_independent(&self, set: CandSet) -> bool {
        match self {
            Constraint::Matroid(m) => m.is_independent(set),
            Constraint::Family(f) => f.contains(set),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn appendix_family() -> SetFamily {
        SetFamily::new(4, &[vec![0, 1], vec![2, 3]]).unwrap()
    }

    #[test]
    fn rank_examples() {
        let u1 = Matroid::single_winner(3).unwrap();
        assert_eq!(u1.rank(CandSet::full(3)).unwrap(), 1);
        assert_eq!(u1.rank(CandSet::EMPTY).unwrap(), 0);
        assert!(u1.rank(CandSet::singleton(5)).is_err());
        let fam = Constraint::Family(appendix_family());
        assert_eq!(fam.rank(CandSet::from_indices([0, 1])).unwrap(), 2);
        assert_eq!(fam.rank(CandSet::from_indices([0, 2])).unwrap(), 1);
    }

    #[test]
    fn appendix_family_is_not_a_matroid() {
        assert!(!appendix_family().is_matroid());
        assert!(Matroid::explicit(4, &[vec![0, 1], vec![2, 3]]).is_err());
    }

    #[test]
    fn explicit_matroid_matches_uniform() {
        let sets: Vec<Vec<usize>> = vec![vec![0, 1], vec![0, 2], vec![1, 2]];
        let m = Matroid::explicit(3, &sets).unwrap();
        let u = Matroid::uniform(3, 2).unwrap();
        assert_eq!(m.rank_table().unwrap(), u.rank_table().unwrap());
        assert_eq!(m.components().unwrap(), vec![CandSet::full(3)]);
    }

    #[test]
    fn component_examples() {
        let u1 = Matroid::single_winner(3).unwrap();
        assert_eq!(u1.components().unwrap(), vec![CandSet::full(3)]);
        let p = Matroid::partition(4, &[vec![0, 1], vec![2, 3]], &[1, 1]).unwrap();
        assert_eq!(
            p.components().unwrap(),
            vec![CandSet::from_indices([0, 1]), CandSet::from_indices([2, 3])]
        );
        let free = Matroid::uniform(3, 3).unwrap();
        assert_eq!(free.components().unwrap().len(), 3);
        // The partition matroid written out explicitly gives the same blocks.
        let e = Matroid::explicit(4, &[vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]]).unwrap();
        assert_eq!(e.components().unwrap(), p.components().unwrap());
    }

    #[test]
    fn partition_validation() {
        assert!(Matroid::partition(3, &[vec![0, 1]], &[1]).is_err());
        assert!(Matroid::partition(2, &[vec![0, 1], vec![1]], &[1, 1]).is_err());
        assert!(Matroid::partition(2, &[vec![0, 1]], &[1, 2]).is_err());
    }

    #[test]
    fn restriction_relabels() {
        let p = Matroid::partition(4, &[vec![0, 1], vec![2, 3]], &[1, 1]).unwrap();
        let r = p.restrict(CandSet::from_indices([1, 2, 3])).unwrap();
        assert_eq!(r.rank(CandSet::full(3)).unwrap(), 2);
        assert_eq!(r.rank(CandSet::from_indices([1, 2])).unwrap(), 1);
    }
}
