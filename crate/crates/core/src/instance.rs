//! Problem data model, normalization and the exact brute-force oracle.

use crate::rational::{rat, Rat};
use crate::{Error, Result};
use num::{Signed, Zero};
use std::collections::BTreeMap;

/// A max-min allocation instance: `m` agents, `n` items, sparse utilities.
///
/// Agent and item ids are dense in `[0, m)` and `[0, n)`. Utilities are
/// non-negative exact rationals; absent pairs have utility zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub m: usize,
    pub n: usize,
    utilities: BTreeMap<(usize, usize), Rat>,
}

impl Instance {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(
                "instance needs at least one agent and one item".into(),
            ));
        }
        Ok(Instance {
            m,
            n,
            utilities: BTreeMap::new(),
        })
    }

    pub fn from_triples(
        m: usize,
        n: usize,
        triples: impl IntoIterator<Item = (usize, usize, Rat)>,
    ) -> Result<Self> {
        let mut inst = Instance::new(m, n)?;
        for (a, i, u) in triples {
            inst.set_utility(a, i, u)?;
        }
        Ok(inst)
    }

    pub fn set_utility(&mut self, agent: usize, item: usize, u: Rat) -> Result<()> {
        self.check_ids(agent, item)?;
        if u.is_negative() {
            return Err(Error::InvalidArgument(format!(
                "negative utility for agent {agent}, item {item}"
            )));
        }
        if u.is_zero() {
            self.utilities.remove(&(agent, item));
        } else {
            self.utilities.insert((agent, item), u);
        }
        Ok(())
    }

    fn check_ids(&self, agent: usize, item: usize) -> Result<()> {
        if agent >= self.m {
            return Err(Error::IdOutOfRange(format!("agent {agent} >= m={}", self.m)));
        }
        if item >= self.n {
            return Err(Error::IdOutOfRange(format!("item {item} >= n={}", self.n)));
        }
        Ok(())
    }

    pub fn utility(&self, agent: usize, item: usize) -> Rat {
        self.utilities
            .get(&(agent, item))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// Non-zero utility triples in (agent, item) order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, &Rat)> {
        self.utilities.iter().map(|(&(a, i), u)| (a, i, u))
    }

    /// Agents with positive utility for `item`, ascending.
    pub fn wanters(&self, item: usize) -> Vec<usize> {
        (0..self.m)
            .filter(|&a| self.utilities.contains_key(&(a, item)))
            .collect()
    }

    /// Items with positive utility for `agent`, ascending.
    pub fn wanted_items(&self, agent: usize) -> Vec<usize> {
        self.utilities
            .range((agent, 0)..=(agent, self.n - 1))
            .map(|(&(_, i), _)| i)
            .collect()
    }

    pub fn max_utility(&self) -> Rat {
        self.utilities
            .values()
            .max()
            .cloned()
            .unwrap_or_else(Rat::zero)
    }
}

/// A partial assignment of items to agents; each item owned by at most one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Allocation {
    owner: BTreeMap<usize, usize>,
}

impl Allocation {
    pub fn new() -> Self {
        Allocation::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut a = Allocation::new();
        for (item, agent) in pairs {
            a.assign(item, agent);
        }
        a
    }

    /// Gives `item` to `agent`, replacing any previous owner.
    pub fn assign(&mut self, item: usize, agent: usize) {
        self.owner.insert(item, agent);
    }

    pub fn owner_of(&self, item: usize) -> Option<usize> {
        self.owner.get(&item).copied()
    }

    pub fn items_of(&self, agent: usize) -> Vec<usize> {
        self.owner
            .iter()
            .filter(|(_, &a)| a == agent)
            .map(|(&i, _)| i)
            .collect()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.owner.iter().map(|(&i, &a)| (i, a))
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }
}

/// The objective: minimum over agents of the total owned utility.
pub fn value(inst: &Instance, alloc: &Allocation) -> Result<Rat> {
    let mut totals = vec![Rat::zero(); inst.m];
    for (item, agent) in alloc.pairs() {
        inst.check_ids(agent, item)?;
        totals[agent] += inst.utility(agent, item);
    }
    Ok(totals.into_iter().min().expect("m >= 1"))
}

/// Rescales utilities so every non-zero value lands in [1, 2n].
///
/// Values below M/2n are zeroed, the rest are scaled by 2n/M (values above
/// M are capped at M first; an optimal solution never needs more than M
/// from a single item). If the input optimum is at least M, the output
/// optimum is at least n.
pub fn normalize(inst: &Instance, m_guess: &Rat) -> Result<Instance> {
    if !m_guess.is_positive() {
        return Err(Error::InvalidArgument("guessed value M must be positive".into()));
    }
    let two_n = rat(2 * inst.n as i64);
    let threshold = m_guess / &two_n;
    let mut out = Instance::new(inst.m, inst.n)?;
    for (a, i, u) in inst.triples() {
        if *u < threshold {
            continue;
        }
        let capped = if u > m_guess { m_guess.clone() } else { u.clone() };
        out.set_utility(a, i, capped * &two_n / m_guess)?;
    }
    Ok(out)
}

const BRUTE_FORCE_GUARD: f64 = 1e7;

/// Exact optimum by exhaustive assignment enumeration.
///
/// Items wanted by at most one agent are pre-assigned (never worse), so the
/// state count is the product over contested items of their wanter counts.
/// On a dense instance that product is exactly m^n; the guard rejects
/// anything above 10^7 states.
pub fn brute_force_opt(inst: &Instance) -> Result<(Rat, Allocation)> {
    let mut contested: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut base = Allocation::new();
    for item in 0..inst.n {
        let w = inst.wanters(item);
        match w.len() {
            0 => {}
            1 => base.assign(item, w[0]),
            _ => contested.push((item, w)),
        }
    }
    let mut states = 1f64;
    for (_, w) in &contested {
        states *= w.len() as f64;
        if states > BRUTE_FORCE_GUARD {
            return Err(Error::GuardExceeded(format!(
                "brute force needs more than {BRUTE_FORCE_GUARD:.0} states"
            )));
        }
    }
    let mut base_totals = vec![Rat::zero(); inst.m];
    for (item, agent) in base.pairs() {
        base_totals[agent] += inst.utility(agent, item);
    }

    let mut best_val: Option<Rat> = None;
    let mut best_choice: Vec<usize> = vec![0; contested.len()];
    let mut choice = vec![0usize; contested.len()];
    let mut totals = base_totals.clone();
    // Depth-first over contested items with incremental totals.
    fn recurse(
        inst: &Instance,
        contested: &[(usize, Vec<usize>)],
        depth: usize,
        choice: &mut Vec<usize>,
        totals: &mut Vec<Rat>,
        best_val: &mut Option<Rat>,
        best_choice: &mut Vec<usize>,
    ) {
        if depth == contested.len() {
            let v = totals.iter().min().expect("m >= 1").clone();
            if best_val.as_ref().map_or(true, |b| v > *b) {
                *best_val = Some(v);
                best_choice.copy_from_slice(choice);
            }
            return;
        }
        let (item, wanters) = &contested[depth];
        for (k, &agent) in wanters.iter().enumerate() {
            let u = inst.utility(agent, *item);
            totals[agent] += &u;
            choice[depth] = k;
            recurse(inst, contested, depth + 1, choice, totals, best_val, best_choice);
            totals[agent] -= &u;
        }
    }
    recurse(
        inst,
        &contested,
        0,
        &mut choice,
        &mut totals,
        &mut best_val,
        &mut best_choice,
    );

    let mut alloc = base;
    for (k, (item, wanters)) in contested.iter().enumerate() {
        alloc.assign(*item, wanters[best_choice[k]]);
    }
    let v = value(inst, &alloc)?;
    Ok((v, alloc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn inst_2x2_diag() -> Instance {
        Instance::from_triples(
            2,
            2,
            [(0, 0, rat(4)), (0, 1, rat(1)), (1, 0, rat(1)), (1, 1, rat(4))],
        )
        .unwrap()
    }

    #[test]
    fn value_single_agent_sums() {
        let inst = Instance::from_triples(1, 2, [(0, 0, rat(3)), (0, 1, rat(5))]).unwrap();
        let alloc = Allocation::from_pairs([(0, 0), (1, 0)]);
        assert_eq!(value(&inst, &alloc).unwrap(), rat(8));
    }

    #[test]
    fn value_empty_allocation_is_zero() {
        let inst = inst_2x2_diag();
        assert_eq!(value(&inst, &Allocation::new()).unwrap(), rat(0));
    }

    #[test]
    fn value_identity_assignment() {
        // Oracle-checked by enumerating all 9 partial assignments by hand:
        // max-min is 4, achieved by the identity assignment.
        let inst = inst_2x2_diag();
        let alloc = Allocation::from_pairs([(0, 0), (1, 1)]);
        assert_eq!(value(&inst, &alloc).unwrap(), rat(4));
    }

    #[test]
    fn value_rejects_bad_ids() {
        let inst = inst_2x2_diag();
        let alloc = Allocation::from_pairs([(5, 0)]);
        assert!(matches!(value(&inst, &alloc), Err(Error::IdOutOfRange(_))));
    }

    #[test]
    fn normalize_paper_cases() {
        // n=4, M=8: u=8 maps to 2n=8; u=0.9 < M/2n=1 is dropped; u=2 stays 2.
        let inst = Instance::from_triples(
            1,
            4,
            [(0, 0, rat(8)), (0, 1, ratio(9, 10)), (0, 2, rat(2))],
        )
        .unwrap();
        let out = normalize(&inst, &rat(8)).unwrap();
        assert_eq!(out.utility(0, 0), rat(8));
        assert_eq!(out.utility(0, 1), rat(0));
        assert_eq!(out.utility(0, 2), rat(2));
    }

    #[test]
    fn normalize_bounds_exact() {
        let inst = Instance::from_triples(
            2,
            3,
            [
                (0, 0, ratio(17, 3)),
                (0, 1, ratio(1, 9)),
                (1, 1, rat(12)),
                (1, 2, ratio(5, 2)),
            ],
        )
        .unwrap();
        let m = ratio(11, 2);
        let out = normalize(&inst, &m).unwrap();
        for (_, _, u) in out.triples() {
            assert!(*u >= rat(1) && *u <= rat(6), "u={u} outside [1, 2n]");
        }
    }

    #[test]
    fn normalize_rejects_nonpositive_m() {
        let inst = inst_2x2_diag();
        assert!(normalize(&inst, &rat(0)).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let inst = Instance::from_triples(1, 2, [(0, 0, rat(3)), (0, 1, rat(5))]).unwrap();
        assert_eq!(brute_force_opt(&inst).unwrap().0, rat(8));

        let inst = inst_2x2_diag();
        assert_eq!(brute_force_opt(&inst).unwrap().0, rat(4));

        // One item wanted by both agents: someone is left with nothing.
        let inst = Instance::from_triples(2, 1, [(0, 0, rat(7)), (1, 0, rat(7))]).unwrap();
        assert_eq!(brute_force_opt(&inst).unwrap().0, rat(0));
    }

    #[test]
    fn brute_force_monotone_in_items() {
        let small = Instance::from_triples(2, 2, [(0, 0, rat(2)), (1, 1, rat(3))]).unwrap();
        let (v_small, _) = brute_force_opt(&small).unwrap();
        let big = Instance::from_triples(
            2,
            3,
            [(0, 0, rat(2)), (1, 1, rat(3)), (0, 2, rat(1)), (1, 2, rat(1))],
        )
        .unwrap();
        let (v_big, _) = brute_force_opt(&big).unwrap();
        assert!(v_big >= v_small);
    }

    #[test]
    fn brute_force_guard_trips() {
        // 24 items each wanted by both agents: 2^24 > 10^7 states.
        let mut inst = Instance::new(2, 24).unwrap();
        for i in 0..24 {
            inst.set_utility(0, i, rat(1)).unwrap();
            inst.set_utility(1, i, rat(1)).unwrap();
        }
        assert!(matches!(brute_force_opt(&inst), Err(Error::GuardExceeded(_))));
    }
}
