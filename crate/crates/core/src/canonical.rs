//! Canonical instances: bucketing transform, solution lifting, validation.
//!
//! A canonical instance has heavy agents (utility 0 or M per item) and light
//! agents (one distinct heavy item of utility M, plus uniform light items of
//! utility M/N_A). The transform costs an O(log n) factor and the lift
//! converts any alpha-approximate canonical solution back.

use crate::instance::{Allocation, Instance};
use crate::rational::{fmt_rat, rat, Rat};
use crate::{Error, Result};
use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;

/// One agent of a canonical instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CanonicalAgent {
    Heavy {
        /// Items with utility exactly M for this agent.
        gamma: BTreeSet<usize>,
    },
    Light {
        /// The distinct heavy item h(A); utility M.
        heavy_item: usize,
        /// Threshold N_A: the agent needs N_A light items (or h(A)).
        threshold: Rat,
        /// Light items S(A); utility M/N_A each.
        light_items: BTreeSet<usize>,
    },
}

impl CanonicalAgent {
    pub fn is_light(&self) -> bool {
        matches!(self, CanonicalAgent::Light { .. })
    }
}

/// Canonical instance over items `0..n_items`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalInstance {
    pub m_value: Rat,
    pub epsilon: Rat,
    pub n_items: usize,
    pub agents: Vec<CanonicalAgent>,
}

impl CanonicalInstance {
    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn light_ids(&self) -> Vec<usize> {
        (0..self.agents.len())
            .filter(|&a| self.agents[a].is_light())
            .collect()
    }

    pub fn heavy_ids(&self) -> Vec<usize> {
        (0..self.agents.len())
            .filter(|&a| !self.agents[a].is_light())
            .collect()
    }

    pub fn threshold(&self, agent: usize) -> Option<&Rat> {
        match &self.agents[agent] {
            CanonicalAgent::Light { threshold, .. } => Some(threshold),
            CanonicalAgent::Heavy { .. } => None,
        }
    }

    pub fn heavy_item(&self, agent: usize) -> Option<usize> {
        match &self.agents[agent] {
            CanonicalAgent::Light { heavy_item, .. } => Some(*heavy_item),
            CanonicalAgent::Heavy { .. } => None,
        }
    }

    /// The utility matrix this canonical structure denotes.
    pub fn to_instance(&self) -> Result<Instance> {
        let mut inst = Instance::new(self.agents.len(), self.n_items)?;
        for (a, agent) in self.agents.iter().enumerate() {
            match agent {
                CanonicalAgent::Heavy { gamma } => {
                    for &i in gamma {
                        inst.set_utility(a, i, self.m_value.clone())?;
                    }
                }
                CanonicalAgent::Light {
                    heavy_item,
                    threshold,
                    light_items,
                } => {
                    inst.set_utility(a, *heavy_item, self.m_value.clone())?;
                    let light_value = &self.m_value / threshold;
                    for &i in light_items {
                        inst.set_utility(a, i, light_value.clone())?;
                    }
                }
            }
        }
        Ok(inst)
    }

    /// Copy with `agents_to_drop` removed (items are kept); used by the
    /// iterative driver, which deletes already-satisfied light agents.
    /// Returns the instance and the map new id -> old id.
    pub fn without_agents(&self, agents_to_drop: &BTreeSet<usize>) -> (CanonicalInstance, Vec<usize>) {
        let mut agents = Vec::new();
        let mut old_ids = Vec::new();
        for (a, ag) in self.agents.iter().enumerate() {
            if !agents_to_drop.contains(&a) {
                agents.push(ag.clone());
                old_ids.push(a);
            }
        }
        (
            CanonicalInstance {
                m_value: self.m_value.clone(),
                epsilon: self.epsilon.clone(),
                n_items: self.n_items,
                agents,
            },
            old_ids,
        )
    }
}

/// Role of a canonical agent relative to its origin agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonicalRole {
    /// chi_j(B): heavy. j = 0 takes the top utility bucket.
    Chi { origin: usize, j: u32 },
    /// lambda_j(B): light, serving utility bucket (2^(j-1), 2^j].
    Lambda { origin: usize, j: u32 },
}

/// Origin of an item added by the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddedItem {
    /// h(lambda_j(B)).
    HeavyOf { origin: usize, j: u32 },
    /// Member k of the shared set Y_B.
    SharedY { origin: usize, k: u32 },
}

/// Book-keeping to lift canonical solutions back to the origin instance.
#[derive(Debug, Clone)]
pub struct BackMap {
    pub origin_m: usize,
    pub origin_n: usize,
    /// Exponent cap s; 0 means the transform short-circuited to the trivial
    /// single-bucket form (M <= n^eps log n).
    pub s: u32,
    pub roles: Vec<CanonicalRole>,
    /// Origin of items n.. in the canonical instance.
    pub added_items: Vec<AddedItem>,
    pub warnings: Vec<String>,
}

fn pow2(j: u32) -> Rat {
    Rat::from_integer(BigInt::one() << j)
}

/// n^eps < bound, exactly (epsilon = p/q on big integers).
fn pow_eps_lt(n: usize, epsilon: &Rat, bound: &Rat) -> bool {
    let p = epsilon.numer().to_u32().expect("epsilon numerator too big");
    let q = epsilon.denom().to_u32().expect("epsilon denominator too big");
    let n = BigInt::from(n);
    n.pow(p) * bound.denom().pow(q) < bound.numer().pow(q)
}

fn integer_log2_ceil(n: usize) -> u32 {
    crate::rational::ceil_log2(n).max(1)
}

/// Bucket index for a normalized utility u in [1, 2^s]: the smallest j >= 1
/// with u <= 2^j. Utility exactly 1 lands in bucket 1 so the buckets
/// partition every positive utility.
fn bucket_of(u: &Rat, s: u32) -> Option<u32> {
    if u > &pow2(s) {
        return None; // top bucket, handled by chi_0
    }
    for j in 1..=s {
        if u <= &pow2(j) {
            return Some(j);
        }
    }
    Some(s)
}

/// Transforms a normalized instance into an epsilon-canonical one.
///
/// Logarithms are base 2; s is the largest integer with
/// 2^s * ceil(log2 n) * n^eps <= M, computed exactly. When s would be 0 the
/// whole instance collapses to one heavy agent per origin wanting every
/// positive item (the trivial n^eps log n path).
pub fn canonicalize(inst: &Instance, m_value: &Rat, epsilon: &Rat) -> Result<(CanonicalInstance, BackMap)> {
    if !m_value.is_positive() {
        return Err(Error::InvalidArgument("M must be positive".into()));
    }
    if m_value > &rat(2 * inst.n as i64) {
        return Err(Error::Precondition(format!(
            "M = {} exceeds 2n = {}; normalize first",
            fmt_rat(m_value),
            2 * inst.n
        )));
    }
    if !epsilon.is_positive() {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let n = inst.n;
    let log_n = integer_log2_ceil(n);
    let mut warnings = Vec::new();
    let log8 = rat((log_n as i64).pow(8));
    if pow_eps_lt(n, epsilon, &log8) {
        warnings.push(format!(
            "n^epsilon < log^8 n at this scale (n = {n}, log2 n = {log_n}); \
             asymptotic guarantees are out of reach, proceeding anyway"
        ));
    }

    // Largest s with 2^s * log_n * n^eps <= M.
    let mut s = 0u32;
    loop {
        let next = s + 1;
        let bound = m_value / (pow2(next) * rat(log_n as i64));
        // n^eps <= bound
        if bound.is_positive() && crate::rational::pow_eps_le(n, epsilon, &bound) {
            s = next;
        } else {
            break;
        }
    }
    // s stays 0 when even 2 * log_n * n^eps > M.
    let base_ok = {
        let bound = m_value / (pow2(0) * rat(log_n as i64));
        bound.is_positive() && crate::rational::pow_eps_le(n, epsilon, &bound)
    };

    if s == 0 || !base_ok {
        // Single-bucket short circuit: each origin agent becomes one heavy
        // agent wanting all its positive items.
        let mut agents = Vec::with_capacity(inst.m);
        let mut roles = Vec::with_capacity(inst.m);
        for b in 0..inst.m {
            let gamma: BTreeSet<usize> = inst.wanted_items(b).into_iter().collect();
            agents.push(CanonicalAgent::Heavy { gamma });
            roles.push(CanonicalRole::Chi { origin: b, j: 0 });
        }
        let ci = CanonicalInstance {
            m_value: m_value.clone(),
            epsilon: epsilon.clone(),
            n_items: inst.n,
            agents,
        };
        let backmap = BackMap {
            origin_m: inst.m,
            origin_n: inst.n,
            s: 0,
            roles,
            added_items: Vec::new(),
            warnings,
        };
        return Ok((ci, backmap));
    }

    let per_origin = 2 * s as usize + 1;
    let mut agents = Vec::with_capacity(inst.m * per_origin);
    let mut roles = Vec::with_capacity(inst.m * per_origin);
    let mut added_items = Vec::with_capacity(inst.m * 2 * s as usize);
    let mut next_item = inst.n;

    for b in 0..inst.m {
        // Items n + b*2s .. : first h(lambda_1..s), then Y_B.
        let h_base = next_item;
        for j in 1..=s {
            added_items.push(AddedItem::HeavyOf { origin: b, j });
            next_item += 1;
        }
        let y_base = next_item;
        for k in 0..s {
            added_items.push(AddedItem::SharedY { origin: b, k });
            next_item += 1;
        }
        let y_items: BTreeSet<usize> = (y_base..y_base + s as usize).collect();

        // Bucket the origin agent's items.
        let mut top = BTreeSet::new();
        let mut buckets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); s as usize + 1];
        for i in inst.wanted_items(b) {
            let u = inst.utility(b, i);
            match bucket_of(&u, s) {
                None => {
                    top.insert(i);
                }
                Some(j) => {
                    buckets[j as usize].insert(i);
                }
            }
        }

        // chi_0(B): the top bucket plus the shared items.
        let mut gamma0 = top;
        gamma0.extend(y_items.iter().copied());
        agents.push(CanonicalAgent::Heavy { gamma: gamma0 });
        roles.push(CanonicalRole::Chi { origin: b, j: 0 });

        for j in 1..=s {
            let heavy_item = h_base + (j as usize - 1);
            let threshold = m_value / (rat(s as i64) * pow2(j));
            agents.push(CanonicalAgent::Light {
                heavy_item,
                threshold,
                light_items: buckets[j as usize].clone(),
            });
            roles.push(CanonicalRole::Lambda { origin: b, j });

            let mut gamma: BTreeSet<usize> = y_items.clone();
            gamma.insert(heavy_item);
            agents.push(CanonicalAgent::Heavy { gamma });
            roles.push(CanonicalRole::Chi { origin: b, j });
        }
    }

    let ci = CanonicalInstance {
        m_value: m_value.clone(),
        epsilon: epsilon.clone(),
        n_items: next_item,
        agents,
    };
    let backmap = BackMap {
        origin_m: inst.m,
        origin_n: inst.n,
        s,
        roles,
        added_items,
        warnings,
    };
    Ok((ci, backmap))
}

/// Checks that a canonical allocation alpha-satisfies every agent.
pub fn check_alpha_satisfied(ci: &CanonicalInstance, sol: &Allocation, alpha: &Rat) -> Result<()> {
    if !alpha.is_positive() {
        return Err(Error::InvalidArgument("alpha must be positive".into()));
    }
    let mut owned: Vec<Vec<usize>> = vec![Vec::new(); ci.agent_count()];
    for (item, agent) in sol.pairs() {
        if agent >= ci.agent_count() || item >= ci.n_items {
            return Err(Error::IdOutOfRange(format!("item {item} -> agent {agent}")));
        }
        owned[agent].push(item);
    }
    for (a, agent) in ci.agents.iter().enumerate() {
        match agent {
            CanonicalAgent::Heavy { gamma } => {
                if !owned[a].iter().any(|i| gamma.contains(i)) {
                    return Err(Error::Precondition(format!(
                        "heavy agent {a} is not satisfied"
                    )));
                }
            }
            CanonicalAgent::Light {
                heavy_item,
                threshold,
                light_items,
            } => {
                if owned[a].contains(heavy_item) {
                    continue;
                }
                let count = owned[a].iter().filter(|i| light_items.contains(i)).count();
                if rat(count as i64) * alpha < *threshold {
                    return Err(Error::Precondition(format!(
                        "light agent {a} holds {count} light items, needs N/alpha = {}",
                        fmt_rat(&(threshold / alpha))
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Lifts an alpha-approximate canonical solution back to the origin instance.
///
/// For each origin agent some chi_j(B) misses out on the s shared items; the
/// j = 0 case hands B a single top-bucket item, otherwise lambda_j(B) was
/// satisfied by light items and B receives those. Guarantees utility at
/// least min(2^s, M/(2 s alpha)) per origin agent.
pub fn lift_solution(
    ci: &CanonicalInstance,
    backmap: &BackMap,
    sol: &Allocation,
    alpha: &Rat,
) -> Result<Allocation> {
    check_alpha_satisfied(ci, sol, alpha)?;
    let mut owned: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ci.agent_count()];
    for (item, agent) in sol.pairs() {
        owned[agent].insert(item);
    }

    if backmap.s == 0 {
        // Short-circuit form: chi_0(B) holds one original item; give it to B.
        let mut out = Allocation::new();
        for (a, role) in backmap.roles.iter().enumerate() {
            let CanonicalRole::Chi { origin, .. } = role else {
                unreachable!("short-circuit backmap has only heavy roles");
            };
            let item = owned[a]
                .iter()
                .next()
                .copied()
                .ok_or_else(|| Error::Invariant(format!("satisfied heavy agent {a} owns nothing")))?;
            out.assign(item, *origin);
        }
        return Ok(out);
    }

    // Index canonical agents per origin.
    let s = backmap.s;
    let mut chi: Vec<Vec<usize>> = vec![vec![usize::MAX; s as usize + 1]; backmap.origin_m];
    let mut lambda: Vec<Vec<usize>> = vec![vec![usize::MAX; s as usize + 1]; backmap.origin_m];
    for (a, role) in backmap.roles.iter().enumerate() {
        match role {
            CanonicalRole::Chi { origin, j } => chi[*origin][*j as usize] = a,
            CanonicalRole::Lambda { origin, j } => lambda[*origin][*j as usize] = a,
        }
    }
    let is_added = |item: usize| item >= backmap.origin_n;

    let mut out = Allocation::new();
    for b in 0..backmap.origin_m {
        // Y_B has s members but s+1 heavy agents want them: someone misses.
        let mut free_chi = None;
        for j in 0..=s {
            let a = chi[b][j as usize];
            let CanonicalAgent::Heavy { gamma } = &ci.agents[a] else {
                unreachable!()
            };
            let y_hit = owned[a].iter().any(|&i| {
                is_added(i)
                    && matches!(
                        backmap.added_items[i - backmap.origin_n],
                        AddedItem::SharedY { .. }
                    )
                    && gamma.contains(&i)
            });
            if !y_hit {
                free_chi = Some(j);
                break;
            }
        }
        let j = free_chi.ok_or_else(|| {
            Error::Invariant(format!(
                "origin {b}: all {} heavy agents hold shared items, pigeonhole broken",
                s + 1
            ))
        })?;

        if j == 0 {
            // chi_0 holds an original top-bucket item.
            let item = owned[chi[b][0]]
                .iter()
                .copied()
                .find(|&i| !is_added(i))
                .ok_or_else(|| {
                    Error::Invariant(format!("origin {b}: chi_0 satisfied but holds no original item"))
                })?;
            out.assign(item, b);
        } else {
            // chi_j holds h(lambda_j), so lambda_j was satisfied by light
            // items from bucket j; those go to B.
            let la = lambda[b][j as usize];
            let CanonicalAgent::Light { light_items, .. } = &ci.agents[la] else {
                unreachable!()
            };
            let mut any = false;
            for &i in owned[la].iter() {
                if light_items.contains(&i) {
                    out.assign(i, b);
                    any = true;
                }
            }
            if !any {
                return Err(Error::Invariant(format!(
                    "origin {b}: lambda_{j} satisfied but holds no light items"
                )));
            }
        }
    }
    Ok(out)
}

/// Structural diagnostics for a canonical instance; empty means valid.
pub fn validate_canonical(ci: &CanonicalInstance) -> Vec<String> {
    let mut diags = Vec::new();
    let mut seen_heavy_items = BTreeSet::new();
    for (a, agent) in ci.agents.iter().enumerate() {
        match agent {
            CanonicalAgent::Heavy { gamma } => {
                for &i in gamma {
                    if i >= ci.n_items {
                        diags.push(format!("heavy agent {a}: item {i} out of range"));
                    }
                }
            }
            CanonicalAgent::Light {
                heavy_item,
                threshold,
                light_items,
            } => {
                if *heavy_item >= ci.n_items {
                    diags.push(format!("light agent {a}: heavy item {heavy_item} out of range"));
                }
                if !seen_heavy_items.insert(*heavy_item) {
                    diags.push(format!(
                        "light agent {a}: heavy item {heavy_item} is shared with another light agent"
                    ));
                }
                if light_items.contains(heavy_item) {
                    diags.push(format!(
                        "light agent {a}: heavy item {heavy_item} also appears in S(A)"
                    ));
                }
                if !threshold.is_positive() {
                    diags.push(format!("light agent {a}: threshold must be positive"));
                }
                // N_A >= n^eps, exactly.
                if ci.n_items > 0
                    && threshold.is_positive()
                    && pow_eps_lt_threshold(ci.n_items, &ci.epsilon, threshold)
                {
                    diags.push(format!(
                        "light agent {a}: N_A = {} is below n^epsilon",
                        fmt_rat(threshold)
                    ));
                }
                for &i in light_items {
                    if i >= ci.n_items {
                        diags.push(format!("light agent {a}: light item {i} out of range"));
                    }
                }
            }
        }
    }
    diags
}

// threshold < n^eps, exactly: the negation of n^eps <= threshold.
fn pow_eps_lt_threshold(n: usize, epsilon: &Rat, threshold: &Rat) -> bool {
    !crate::rational::pow_eps_le(n, epsilon, threshold)
}

/// Scales every light threshold down by (h+1), flooring at 1.
///
/// Run once before layered solving so an optimal h-layered solution can
/// 1-satisfy all agents; costs a factor (h+1) in the approximation.
pub fn scale_for_layers(ci: &CanonicalInstance, h: u32) -> Result<CanonicalInstance> {
    if h < 1 {
        return Err(Error::Precondition("h must be at least 1".into()));
    }
    let divisor = rat(h as i64 + 1);
    let mut out = ci.clone();
    for agent in &mut out.agents {
        if let CanonicalAgent::Light { threshold, .. } = agent {
            let scaled = (&*threshold / &divisor).floor();
            *threshold = if scaled < rat(1) { rat(1) } else { scaled };
        }
    }
    Ok(out)
}

/// Builds the 1-satisfying canonical solution the transform lemma promises,
/// starting from an origin allocation of value at least M.
///
/// Used as the oracle side of round-trip tests: bucket the items each origin
/// agent received; a non-empty top bucket feeds chi_0, otherwise some bucket
/// j holds at least N_lambda_j items and feeds lambda_j.
pub fn canonical_solution_from_origin(
    ci: &CanonicalInstance,
    backmap: &BackMap,
    origin_inst: &Instance,
    origin_alloc: &Allocation,
) -> Result<Allocation> {
    if backmap.s == 0 {
        // One positive item per origin agent satisfies its single heavy agent.
        let mut out = Allocation::new();
        for (a, role) in backmap.roles.iter().enumerate() {
            let CanonicalRole::Chi { origin, .. } = role else {
                unreachable!()
            };
            let item = origin_alloc
                .items_of(*origin)
                .into_iter()
                .find(|&i| origin_inst.utility(*origin, i).is_positive())
                .ok_or_else(|| {
                    Error::Precondition(format!("origin agent {origin} got no positive item"))
                })?;
            out.assign(item, a);
        }
        return Ok(out);
    }

    let s = backmap.s;
    let mut chi: Vec<Vec<usize>> = vec![vec![usize::MAX; s as usize + 1]; backmap.origin_m];
    let mut lambda: Vec<Vec<usize>> = vec![vec![usize::MAX; s as usize + 1]; backmap.origin_m];
    let mut y_items: Vec<Vec<usize>> = vec![Vec::new(); backmap.origin_m];
    let mut h_items: Vec<Vec<usize>> = vec![vec![usize::MAX; s as usize + 1]; backmap.origin_m];
    for (a, role) in backmap.roles.iter().enumerate() {
        match role {
            CanonicalRole::Chi { origin, j } => chi[*origin][*j as usize] = a,
            CanonicalRole::Lambda { origin, j } => lambda[*origin][*j as usize] = a,
        }
    }
    for (k, item) in backmap.added_items.iter().enumerate() {
        let id = backmap.origin_n + k;
        match item {
            AddedItem::HeavyOf { origin, j } => h_items[*origin][*j as usize] = id,
            AddedItem::SharedY { origin, .. } => y_items[*origin].push(id),
        }
    }

    let mut out = Allocation::new();
    for b in 0..backmap.origin_m {
        let items = origin_alloc.items_of(b);
        let mut top: Vec<usize> = Vec::new();
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); s as usize + 1];
        for &i in &items {
            let u = origin_inst.utility(b, i);
            if u.is_zero() {
                continue;
            }
            match bucket_of(&u, s) {
                None => top.push(i),
                Some(j) => buckets[j as usize].push(i),
            }
        }

        let give_y = |out: &mut Allocation, skip: u32| {
            let mut y = y_items[b].iter();
            for j in 0..=s {
                if j == skip {
                    continue;
                }
                let item = *y.next().expect("s shared items for s remaining agents");
                out.assign(item, chi[b][j as usize]);
            }
        };

        if let Some(&i) = top.first() {
            out.assign(i, chi[b][0]);
            give_y(&mut out, 0);
            for j in 1..=s {
                out.assign(h_items[b][j as usize], lambda[b][j as usize]);
            }
        } else {
            // Some bucket j carries utility >= M/s, so it holds at least
            // N_lambda_j = M/(s 2^j) items.
            let mut pick = None;
            for j in 1..=s {
                let needed = ci
                    .threshold(lambda[b][j as usize])
                    .expect("lambda is light")
                    .clone();
                if rat(buckets[j as usize].len() as i64) >= needed {
                    pick = Some(j);
                    break;
                }
            }
            let j = pick.ok_or_else(|| {
                Error::Precondition(format!(
                    "origin agent {b}: no bucket reaches its lambda threshold; \
                     allocation value below M?"
                ))
            })?;
            for &i in &buckets[j as usize] {
                out.assign(i, lambda[b][j as usize]);
            }
            out.assign(h_items[b][j as usize], chi[b][j as usize]);
            give_y(&mut out, j);
            for j2 in 1..=s {
                if j2 != j {
                    out.assign(h_items[b][j2 as usize], lambda[b][j2 as usize]);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::brute_force_opt;
    use crate::rational::ratio;

    #[test]
    fn s_matches_paper_example() {
        // n=16, eps=1/2, M=32: s = floor(log2(32 / (4 * 4))) = 1.
        let mut inst = Instance::new(1, 16).unwrap();
        inst.set_utility(0, 0, rat(32)).unwrap();
        let (_, bm) = canonicalize(&inst, &rat(32), &ratio(1, 2)).unwrap();
        assert_eq!(bm.s, 1);
    }

    #[test]
    fn agent_and_item_counts() {
        let mut inst = Instance::new(3, 16).unwrap();
        for a in 0..3 {
            for i in 0..5 {
                inst.set_utility(a, i, rat(1 + (a + i) as i64 % 8)).unwrap();
            }
        }
        let (ci, bm) = canonicalize(&inst, &rat(32), &ratio(1, 2)).unwrap();
        let s = bm.s as usize;
        assert!(s >= 1);
        assert_eq!(ci.agent_count(), 3 * (2 * s + 1));
        assert_eq!(ci.n_items, 16 + 3 * 2 * s);
        assert_eq!(bm.added_items.len(), 3 * 2 * s);
    }

    #[test]
    fn bucketing_partitions_positive_items() {
        let mut inst = Instance::new(2, 16).unwrap();
        let utilities = [1, 2, 3, 5, 8, 13, 21, 32];
        for (i, &u) in utilities.iter().enumerate() {
            inst.set_utility(0, i, rat(u)).unwrap();
            inst.set_utility(1, i, rat(33 - u)).unwrap();
        }
        let (ci, bm) = canonicalize(&inst, &rat(32), &ratio(1, 2)).unwrap();
        // Every original positive item appears in exactly one bucket of
        // exactly one canonical agent per origin.
        for b in 0..2usize {
            for i in 0..8usize {
                let mut hits = 0;
                for (a, role) in bm.roles.iter().enumerate() {
                    let owner = match role {
                        CanonicalRole::Chi { origin, j: 0 } => {
                            *origin == b
                                && matches!(&ci.agents[a], CanonicalAgent::Heavy { gamma } if gamma.contains(&i))
                        }
                        CanonicalRole::Lambda { origin, .. } => {
                            *origin == b
                                && matches!(&ci.agents[a], CanonicalAgent::Light { light_items, .. } if light_items.contains(&i))
                        }
                        _ => false,
                    };
                    if owner {
                        hits += 1;
                    }
                }
                assert_eq!(hits, 1, "item {i} of origin {b} in {hits} buckets");
            }
        }
    }

    #[test]
    fn validate_flags_injected_faults() {
        let mut inst = Instance::new(2, 16).unwrap();
        for i in 0..6 {
            inst.set_utility(0, i, rat(4)).unwrap();
            inst.set_utility(1, i, rat(4)).unwrap();
        }
        let (mut ci, _) = canonicalize(&inst, &rat(32), &ratio(1, 2)).unwrap();
        assert!(validate_canonical(&ci).is_empty());

        // Duplicate heavy item.
        let lights = ci.light_ids();
        if lights.len() >= 2 {
            let h0 = ci.heavy_item(lights[0]).unwrap();
            if let CanonicalAgent::Light { heavy_item, .. } = &mut ci.agents[lights[1]] {
                *heavy_item = h0;
            }
            assert!(!validate_canonical(&ci).is_empty());
        }
    }

    #[test]
    fn validate_flags_small_threshold() {
        let ci = CanonicalInstance {
            m_value: rat(8),
            epsilon: ratio(1, 2),
            n_items: 16,
            agents: vec![CanonicalAgent::Light {
                heavy_item: 0,
                threshold: rat(2), // below 16^(1/2) = 4
                light_items: (1..4).collect(),
            }],
        };
        assert!(!validate_canonical(&ci).is_empty());
    }

    #[test]
    fn scale_for_layers_cases() {
        let ci = CanonicalInstance {
            m_value: rat(32),
            epsilon: ratio(1, 2),
            n_items: 8,
            agents: vec![
                CanonicalAgent::Light {
                    heavy_item: 0,
                    threshold: rat(18),
                    light_items: (1..5).collect(),
                },
                CanonicalAgent::Light {
                    heavy_item: 5,
                    threshold: rat(3),
                    light_items: (6..8).collect(),
                },
            ],
        };
        let scaled = scale_for_layers(&ci, 8).unwrap();
        assert_eq!(scaled.threshold(0), Some(&rat(2)));
        assert_eq!(scaled.threshold(1), Some(&rat(1))); // floor guard
        assert!(scale_for_layers(&ci, 0).is_err());
    }

    #[test]
    fn heavy_branch_lift() {
        // m=1, one item with u = M: chi_0 takes it, lift hands it back.
        let mut inst = Instance::new(1, 16).unwrap();
        inst.set_utility(0, 3, rat(32)).unwrap();
        let m = rat(32);
        let (ci, bm) = canonicalize(&inst, &m, &ratio(1, 2)).unwrap();
        let alloc = Allocation::from_pairs([(3, 0)]);
        let sol = canonical_solution_from_origin(&ci, &bm, &inst, &alloc).unwrap();
        check_alpha_satisfied(&ci, &sol, &rat(1)).unwrap();
        let lifted = lift_solution(&ci, &bm, &sol, &rat(1)).unwrap();
        assert_eq!(lifted.owner_of(3), Some(0));
    }

    #[test]
    fn round_trip_meets_lemma_bound() {
        // Random-ish normalized instance; OPT from the oracle; the planted
        // canonical solution lifts back to utility >= min(2^s, M/(2s)).
        let mut inst = Instance::new(2, 12).unwrap();
        for i in 0..12 {
            inst.set_utility(0, i, rat(1 + (i as i64 * 5) % 12)).unwrap();
            inst.set_utility(1, i, rat(1 + (i as i64 * 7) % 12)).unwrap();
        }
        let (opt, alloc) = brute_force_opt(&inst).unwrap();
        let norm = crate::instance::normalize(&inst, &opt).unwrap();
        let (opt2, alloc2) = brute_force_opt(&norm).unwrap();
        let _ = alloc;
        let eps = ratio(1, 10);
        let (ci, bm) = canonicalize(&norm, &opt2, &eps).unwrap();
        let sol = canonical_solution_from_origin(&ci, &bm, &norm, &alloc2).unwrap();
        let lifted = lift_solution(&ci, &bm, &sol, &rat(1)).unwrap();
        let s = bm.s.max(1);
        let bound = if bm.s == 0 {
            rat(1)
        } else {
            let a = pow2(bm.s);
            let b = &opt2 / rat(2 * s as i64);
            if a < b {
                a
            } else {
                b
            }
        };
        for b_agent in 0..2 {
            let total: Rat = lifted
                .items_of(b_agent)
                .iter()
                .map(|&i| norm.utility(b_agent, i))
                .sum();
            assert!(
                total >= bound,
                "agent {b_agent}: lifted utility {} below bound {}",
                fmt_rat(&total),
                fmt_rat(&bound)
            );
        }
    }
}
