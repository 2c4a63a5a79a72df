//! Private-item assignment, the flow network N(I,P), path feasibility and
//! allocation extraction.

use crate::canonical::{CanonicalAgent, CanonicalInstance};
use crate::instance::Allocation;
use crate::matching::Matching;
use crate::rational::{rat, Rat};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Vertex of the flow network: the source, an agent, or an item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Source,
    Agent(usize),
    Item(usize),
}

impl std::fmt::Display for Vertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Vertex::Source => write!(f, "s"),
            Vertex::Agent(a) => write!(f, "A{a}"),
            Vertex::Item(i) => write!(f, "i{i}"),
        }
    }
}

/// A good assignment of private items.
///
/// Every light agent holds its heavy item, heavy agents hold distinct items
/// from their admissible sets, and the unmatched heavy agents are terminals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateAssignment {
    /// agent -> private item.
    pub private: BTreeMap<usize, usize>,
    /// Heavy agents without private items.
    pub terminals: BTreeSet<usize>,
    /// Items serving as no one's private item (the set S).
    pub free_items: BTreeSet<usize>,
}

impl PrivateAssignment {
    pub fn owner_of(&self, item: usize) -> Option<usize> {
        self.private
            .iter()
            .find(|(_, &i)| i == item)
            .map(|(&a, _)| a)
    }

    /// Checks the good-assignment conditions against `ci`.
    pub fn validate(&self, ci: &CanonicalInstance) -> Result<()> {
        let mut used = BTreeSet::new();
        for (&a, &i) in &self.private {
            if a >= ci.agent_count() || i >= ci.n_items {
                return Err(Error::IdOutOfRange(format!("private {a} -> {i}")));
            }
            if !used.insert(i) {
                return Err(Error::Precondition(format!(
                    "item {i} is a private item of two agents"
                )));
            }
            match &ci.agents[a] {
                CanonicalAgent::Light { heavy_item, .. } => {
                    if *heavy_item != i {
                        return Err(Error::Precondition(format!(
                            "light agent {a} must hold its heavy item"
                        )));
                    }
                }
                CanonicalAgent::Heavy { gamma } => {
                    if !gamma.contains(&i) {
                        return Err(Error::Precondition(format!(
                            "private item {i} of heavy agent {a} is not admissible"
                        )));
                    }
                }
            }
        }
        for (a, agent) in ci.agents.iter().enumerate() {
            match agent {
                CanonicalAgent::Light { .. } => {
                    if !self.private.contains_key(&a) {
                        return Err(Error::Precondition(format!(
                            "light agent {a} has no private item"
                        )));
                    }
                }
                CanonicalAgent::Heavy { .. } => {
                    let has = self.private.contains_key(&a);
                    let terminal = self.terminals.contains(&a);
                    if has == terminal {
                        return Err(Error::Precondition(format!(
                            "heavy agent {a} must be matched xor terminal"
                        )));
                    }
                }
            }
        }
        for i in 0..ci.n_items {
            let free = self.free_items.contains(&i);
            if free == used.contains(&i) {
                return Err(Error::Precondition(format!(
                    "item {i}: free set and private map disagree"
                )));
            }
        }
        Ok(())
    }
}

/// Maximum-matching assignment of private items (Section 2.3).
///
/// Light agents take their heavy items; heavy agents are matched by
/// augmenting paths against the remaining items, lowest id first, so the
/// terminal set has minimum cardinality and is deterministic.
pub fn assign_private_items(ci: &CanonicalInstance) -> Result<PrivateAssignment> {
    let mut private = BTreeMap::new();
    let mut light_held = BTreeSet::new();
    for a in ci.light_ids() {
        let h = ci.heavy_item(a).expect("light agent");
        if !light_held.insert(h) {
            return Err(Error::Precondition(format!(
                "heavy item {h} shared by two light agents"
            )));
        }
        private.insert(a, h);
    }

    let heavies = ci.heavy_ids();
    // Right side: items not held by light agents, compacted.
    let mut right_ids = Vec::new();
    let mut right_of_item = BTreeMap::new();
    for i in 0..ci.n_items {
        if !light_held.contains(&i) {
            right_of_item.insert(i, right_ids.len());
            right_ids.push(i);
        }
    }
    let adj: Vec<Vec<usize>> = heavies
        .iter()
        .map(|&a| {
            let CanonicalAgent::Heavy { gamma } = &ci.agents[a] else {
                unreachable!()
            };
            gamma
                .iter()
                .filter_map(|i| right_of_item.get(i).copied())
                .collect()
        })
        .collect();
    let matching = Matching::compute(heavies.len(), right_ids.len(), adj);

    let mut terminals = BTreeSet::new();
    for (k, &a) in heavies.iter().enumerate() {
        match matching.match_of_left[k] {
            Some(r) => {
                private.insert(a, right_ids[r]);
            }
            None => {
                terminals.insert(a);
            }
        }
    }
    let used: BTreeSet<usize> = private.values().copied().collect();
    let free_items = (0..ci.n_items).filter(|i| !used.contains(i)).collect();
    let pa = PrivateAssignment {
        private,
        terminals,
        free_items,
    };
    let net = build_network(ci, &pa)?;
    let (_, h_star) = net.reachable_without_lights();
    if let Some(t) = h_star.iter().find(|t| pa.terminals.contains(t)) {
        return Err(Error::Invariant(format!(
            "terminal {t} is directly reachable from the source; matching was not maximum"
        )));
    }
    Ok(pa)
}

/// The directed flow network N(I,P).
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    pub agent_count: usize,
    pub item_count: usize,
    pub is_light: Vec<bool>,
    pub terminals: BTreeSet<usize>,
    pub thresholds: BTreeMap<usize, Rat>,
    out: BTreeMap<Vertex, Vec<Vertex>>,
}

impl FlowNetwork {
    pub fn out_edges(&self, v: Vertex) -> &[Vertex] {
        self.out.get(&v).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn has_edge(&self, from: Vertex, to: Vertex) -> bool {
        self.out_edges(from).contains(&to)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        std::iter::once(Vertex::Source)
            .chain((0..self.agent_count).map(Vertex::Agent))
            .chain((0..self.item_count).map(Vertex::Item))
    }

    /// (I*, H*): items and heavy agents reachable from the source by paths
    /// with no light agents on them.
    pub fn reachable_without_lights(&self) -> (BTreeSet<usize>, BTreeSet<usize>) {
        let mut items = BTreeSet::new();
        let mut heavies = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([Vertex::Source]);
        seen.insert(Vertex::Source);
        while let Some(v) = queue.pop_front() {
            for &w in self.out_edges(v) {
                if seen.contains(&w) {
                    continue;
                }
                match w {
                    Vertex::Agent(a) if self.is_light[a] => {
                        // Reachable, but paths must not continue through it.
                        continue;
                    }
                    Vertex::Agent(a) => {
                        heavies.insert(a);
                    }
                    Vertex::Item(i) => {
                        items.insert(i);
                    }
                    Vertex::Source => {}
                }
                seen.insert(w);
                queue.push_back(w);
            }
        }
        (items, heavies)
    }
}

/// Builds N(I,P) from a validated private assignment.
///
/// Edges: s -> every free item; A -> P(A); item -> heavy agent for each
/// non-private admissible item; item -> light agent for each light item.
pub fn build_network(ci: &CanonicalInstance, pa: &PrivateAssignment) -> Result<FlowNetwork> {
    pa.validate(ci)?;
    let mut out: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
    let mut push = |from: Vertex, to: Vertex| out.entry(from).or_default().push(to);

    for &i in &pa.free_items {
        push(Vertex::Source, Vertex::Item(i));
    }
    for (&a, &i) in &pa.private {
        push(Vertex::Agent(a), Vertex::Item(i));
    }
    let mut is_light = vec![false; ci.agent_count()];
    let mut thresholds = BTreeMap::new();
    for (a, agent) in ci.agents.iter().enumerate() {
        match agent {
            CanonicalAgent::Heavy { gamma } => {
                let own = pa.private.get(&a);
                for &i in gamma {
                    if own != Some(&i) {
                        push(Vertex::Item(i), Vertex::Agent(a));
                    }
                }
            }
            CanonicalAgent::Light {
                threshold,
                light_items,
                ..
            } => {
                is_light[a] = true;
                thresholds.insert(a, threshold.clone());
                for &i in light_items {
                    push(Vertex::Item(i), Vertex::Agent(a));
                }
            }
        }
    }
    Ok(FlowNetwork {
        agent_count: ci.agent_count(),
        item_count: ci.n_items,
        is_light,
        terminals: pa.terminals.clone(),
        thresholds,
        out,
    })
}

/// A directed path with no light agent as an intermediate vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplePath {
    pub vertices: Vec<Vertex>,
}

/// Endpoint classes of a simple path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointClass {
    SourceToLight,
    LightToLight,
    LightToTerminal,
}

impl SimplePath {
    pub fn new(vertices: Vec<Vertex>) -> Self {
        SimplePath { vertices }
    }

    pub fn first(&self) -> Vertex {
        *self.vertices.first().expect("non-empty path")
    }

    pub fn last(&self) -> Vertex {
        *self.vertices.last().expect("non-empty path")
    }

    pub fn classify(&self, net: &FlowNetwork) -> Result<EndpointClass> {
        let is_light = |v: Vertex| matches!(v, Vertex::Agent(a) if net.is_light[a]);
        let is_terminal = |v: Vertex| matches!(v, Vertex::Agent(a) if net.terminals.contains(&a));
        match (self.first(), self.last()) {
            (Vertex::Source, l) if is_light(l) => Ok(EndpointClass::SourceToLight),
            (f, l) if is_light(f) && is_light(l) => Ok(EndpointClass::LightToLight),
            (f, l) if is_light(f) && is_terminal(l) => Ok(EndpointClass::LightToTerminal),
            (f, l) => Err(Error::Precondition(format!(
                "path endpoints {f} -> {l} have no allowed class"
            ))),
        }
    }
}

/// Structural and quota checks for a relaxed path solution.
///
/// True iff the paths are valid simple paths, no vertex carrying flow
/// through it is shared, each terminal receives exactly one path, and every
/// light agent with an outgoing path has at least N_A/alpha incoming ones.
pub fn check_alpha_feasible(
    net: &FlowNetwork,
    paths: &[SimplePath],
    alpha: &Rat,
) -> (bool, Vec<String>) {
    let mut diags = Vec::new();
    // Usage per vertex: (as first, as intermediate, as last).
    let mut usage: BTreeMap<Vertex, (usize, usize, usize)> = BTreeMap::new();

    for (k, p) in paths.iter().enumerate() {
        if p.vertices.len() < 2 {
            diags.push(format!("path {k}: fewer than two vertices"));
            continue;
        }
        for w in p.vertices.windows(2) {
            if !net.has_edge(w[0], w[1]) {
                diags.push(format!("path {k}: missing edge {} -> {}", w[0], w[1]));
            }
        }
        if p.classify(net).is_err() {
            diags.push(format!(
                "path {k}: endpoints {} -> {} not source/light/terminal shaped",
                p.first(),
                p.last()
            ));
        }
        let len = p.vertices.len();
        for (pos, &v) in p.vertices.iter().enumerate() {
            let slot = usage.entry(v).or_default();
            if pos == 0 {
                slot.0 += 1;
            } else if pos + 1 == len {
                slot.2 += 1;
            } else {
                slot.1 += 1;
                if matches!(v, Vertex::Agent(a) if net.is_light[a]) {
                    diags.push(format!("path {k}: light agent {v} used as intermediate"));
                }
            }
        }
    }

    // A vertex carrying flow through it belongs to exactly one path.
    for (&v, &(first, mid, last)) in &usage {
        if mid > 0 && first + mid + last > 1 {
            diags.push(format!("vertex {v} shared while intermediate on some path"));
        }
    }

    for &t in &net.terminals {
        let v = Vertex::Agent(t);
        let (first, mid, last) = usage.get(&v).copied().unwrap_or_default();
        if last != 1 || first != 0 || mid != 0 {
            diags.push(format!(
                "terminal {t}: wants exactly one terminating path, saw (first={first}, mid={mid}, last={last})"
            ));
        }
    }

    for (a, light) in net.is_light.iter().enumerate() {
        if !light {
            continue;
        }
        let v = Vertex::Agent(a);
        let (first, _, last) = usage.get(&v).copied().unwrap_or_default();
        if first > 1 {
            diags.push(format!("light agent {a}: {first} outgoing paths"));
        }
        if first >= 1 {
            let need = &net.thresholds[&a] / alpha;
            if rat(last as i64) < need {
                diags.push(format!(
                    "light agent {a}: sends but receives {last} < N_A/alpha"
                ));
            }
        }
    }

    (diags.is_empty(), diags)
}

/// Turns a feasible path solution into an allocation.
///
/// Agents on paths take the item immediately before them; everyone else
/// keeps their private item.
pub fn extract_allocation(
    ci: &CanonicalInstance,
    pa: &PrivateAssignment,
    paths: &[SimplePath],
    alpha: &Rat,
) -> Result<Allocation> {
    let net = build_network(ci, pa)?;
    let (ok, diags) = check_alpha_feasible(&net, paths, alpha);
    if !ok {
        return Err(Error::Precondition(format!(
            "path set is not alpha-feasible: {}",
            diags.join("; ")
        )));
    }
    let mut on_path: BTreeSet<usize> = BTreeSet::new();
    let mut alloc = Allocation::new();
    for p in paths {
        for w in p.vertices.windows(2) {
            if let (Vertex::Item(i), Vertex::Agent(a)) = (w[0], w[1]) {
                alloc.assign(i, a);
            }
        }
        for &v in &p.vertices {
            if let Vertex::Agent(a) = v {
                on_path.insert(a);
            }
        }
    }
    for (&a, &i) in &pa.private {
        if !on_path.contains(&a) {
            alloc.assign(i, a);
        }
    }
    Ok(alloc)
}

/// Terminal-rooted trees induced by a 1-feasible flow; children carry flow
/// toward the root.
#[derive(Debug, Clone)]
pub struct SolutionForest {
    pub trees: Vec<SolutionTree>,
}

#[derive(Debug, Clone)]
pub struct SolutionTree {
    pub root: Vertex,
    /// Flow predecessors per vertex.
    pub children: BTreeMap<Vertex, Vec<Vertex>>,
    /// Light agents per leaf-to-root path once layered; 0 before.
    pub height: u32,
}

impl SolutionTree {
    fn vertices(&self) -> BTreeSet<Vertex> {
        let mut vs = BTreeSet::new();
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            if vs.insert(v) {
                if let Some(cs) = self.children.get(&v) {
                    stack.extend(cs.iter().copied());
                }
            }
        }
        vs
    }

    fn light_agents(&self, net: &FlowNetwork) -> Vec<usize> {
        self.vertices()
            .into_iter()
            .filter_map(|v| match v {
                Vertex::Agent(a) if net.is_light[a] => Some(a),
                _ => None,
            })
            .collect()
    }
}

/// Builds the solution forest of a 1-feasible path set.
///
/// Union of path edges with the source dropped; every tree is rooted at a
/// terminal. Components not containing a terminal are rejected.
pub fn forest_from_paths(net: &FlowNetwork, paths: &[SimplePath]) -> Result<SolutionForest> {
    let mut parent: BTreeMap<Vertex, Vertex> = BTreeMap::new();
    for p in paths {
        for w in p.vertices.windows(2) {
            if w[0] == Vertex::Source {
                continue;
            }
            if let Some(&prev) = parent.get(&w[0]) {
                if prev != w[1] {
                    return Err(Error::Precondition(format!(
                        "vertex {} sends flow to both {} and {}",
                        w[0], prev, w[1]
                    )));
                }
            }
            parent.insert(w[0], w[1]);
        }
    }
    let mut children: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
    for (&c, &p) in &parent {
        children.entry(p).or_default().push(c);
    }
    let mut trees = Vec::new();
    let mut covered: BTreeSet<Vertex> = BTreeSet::new();
    for &t in &net.terminals {
        let root = Vertex::Agent(t);
        if !children.contains_key(&root) {
            continue;
        }
        let mut tree_children = BTreeMap::new();
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            covered.insert(v);
            if let Some(cs) = children.get(&v) {
                tree_children.insert(v, cs.clone());
                stack.extend(cs.iter().copied());
            }
        }
        trees.push(SolutionTree {
            root,
            children: tree_children,
            height: 0,
        });
    }
    for v in parent.keys() {
        if !covered.contains(v) {
            return Err(Error::Precondition(format!(
                "flow through {v} is not attached to any terminal"
            )));
        }
    }
    Ok(SolutionForest { trees })
}

/// Where a downward chain from a vertex ends: an S-leaf or a light agent.
enum ChainEnd {
    Leaf,
    Light(usize),
}

fn chain_end(tree: &SolutionTree, net: &FlowNetwork, start: Vertex) -> Result<ChainEnd> {
    let mut v = start;
    loop {
        if let Vertex::Agent(a) = v {
            if net.is_light[a] {
                return Ok(ChainEnd::Light(a));
            }
        }
        match tree.children.get(&v) {
            None => {
                return match v {
                    Vertex::Item(_) => Ok(ChainEnd::Leaf),
                    _ => Err(Error::Invariant(format!("chain dead-ends at {v}"))),
                };
            }
            Some(cs) => {
                if cs.len() != 1 {
                    return Err(Error::Invariant(format!(
                        "{v} has {} flow children but is not a light agent",
                        cs.len()
                    )));
                }
                v = cs[0];
            }
        }
    }
}

/// Iterative pruning that turns a feasible solution forest into an
/// h-layered forest at the cost of a factor (h+1) (Section 2.4 lemma).
///
/// Level-1 agents draw at least N_A/(h+1) branches straight from S-leaves;
/// level-j agents from level-(j-1) agents. Branches that do not qualify are
/// cut with their subtrees. Failing to level every surviving light agent is
/// an error: at desk scale the lemma's counting bound can genuinely fail
/// and silence would hide it.
pub fn layerize(forest: &SolutionForest, net: &FlowNetwork, h: u32) -> Result<SolutionForest> {
    if h < 1 {
        return Err(Error::Precondition("h must be at least 1".into()));
    }
    let divisor = rat(h as i64 + 1);
    let mut out_trees = Vec::new();
    for tree in &forest.trees {
        let mut tree = tree.clone();
        let mut level: BTreeMap<usize, u32> = BTreeMap::new();
        for j in 1..=h {
            // Lowest agent id first; agents pruned away are skipped.
            let agents = tree.light_agents(net);
            for a in agents {
                if level.contains_key(&a) {
                    continue;
                }
                let av = Vertex::Agent(a);
                let Some(branches) = tree.children.get(&av).cloned() else {
                    continue;
                };
                let mut qualifying = Vec::new();
                let mut rest = Vec::new();
                for b in branches {
                    let q = match chain_end(&tree, net, b)? {
                        ChainEnd::Leaf => j == 1,
                        ChainEnd::Light(a2) => j > 1 && level.get(&a2) == Some(&(j - 1)),
                    };
                    if q {
                        qualifying.push(b);
                    } else {
                        rest.push(b);
                    }
                }
                let needed = &net.thresholds[&a] / &divisor;
                if rat(qualifying.len() as i64) >= needed {
                    level.insert(a, j);
                    // Drop non-qualifying branches with their subtrees.
                    for b in rest {
                        remove_subtree(&mut tree, b, &mut level);
                    }
                    tree.children.insert(av, qualifying);
                }
            }
        }
        for a in tree.light_agents(net) {
            if !level.contains_key(&a) {
                return Err(Error::Invariant(format!(
                    "light agent {a} survives pruning without a level; \
                     the layering bound does not hold at this scale"
                )));
            }
        }
        // Height = level of the light agent feeding the root chain.
        let root_child = tree
            .children
            .get(&tree.root)
            .and_then(|cs| cs.first())
            .copied()
            .ok_or_else(|| Error::Invariant("terminal with no in-flow".into()))?;
        let height = match chain_end(&tree, net, root_child)? {
            ChainEnd::Light(a) => level[&a],
            ChainEnd::Leaf => {
                return Err(Error::Invariant(format!(
                    "tree at {} has a direct source-to-terminal chain",
                    tree.root
                )))
            }
        };
        if height > h {
            return Err(Error::Invariant(format!("tree height {height} exceeds h = {h}")));
        }
        tree.height = height;
        verify_uniform_depth(&tree, net, &level)?;
        out_trees.push(tree);
    }
    Ok(SolutionForest { trees: out_trees })
}

fn remove_subtree(tree: &mut SolutionTree, root: Vertex, level: &mut BTreeMap<usize, u32>) {
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        if let Vertex::Agent(a) = v {
            level.remove(&a);
        }
        if let Some(cs) = tree.children.remove(&v) {
            stack.extend(cs);
        }
    }
}

fn verify_uniform_depth(
    tree: &SolutionTree,
    net: &FlowNetwork,
    level: &BTreeMap<usize, u32>,
) -> Result<()> {
    // Every branch of a level-j agent comes from level j-1 (or S for j = 1),
    // so every leaf-to-root path crosses exactly h(tree) light agents.
    for (&a, &j) in level {
        let av = Vertex::Agent(a);
        for &b in tree.children.get(&av).map(|v| v.as_slice()).unwrap_or(&[]) {
            match chain_end(tree, net, b)? {
                ChainEnd::Leaf if j == 1 => {}
                ChainEnd::Light(a2) if j > 1 && level.get(&a2) == Some(&(j - 1)) => {}
                _ => {
                    return Err(Error::Invariant(format!(
                        "level-{j} agent {a} keeps a branch that is not level-{}",
                        j.saturating_sub(1)
                    )))
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    /// One terminal, one light agent with h(A) and a pool of light items.
    fn tiny_ci(pool: usize, threshold: i64) -> CanonicalInstance {
        CanonicalInstance {
            m_value: rat(4),
            epsilon: ratio(1, 10),
            n_items: pool + 1,
            agents: vec![
                CanonicalAgent::Light {
                    heavy_item: 0,
                    threshold: rat(threshold),
                    light_items: (1..=pool).collect(),
                },
                CanonicalAgent::Heavy {
                    gamma: BTreeSet::from([0]),
                },
            ],
        }
    }

    #[test]
    fn private_items_smallest_network() {
        let ci = tiny_ci(1, 1);
        let pa = assign_private_items(&ci).unwrap();
        assert_eq!(pa.private[&0], 0);
        assert!(pa.terminals.contains(&1));
        let net = build_network(&ci, &pa).unwrap();
        // s -> item1 -> A0 -> item0 -> A1 must exist edge by edge.
        assert!(net.has_edge(Vertex::Source, Vertex::Item(1)));
        assert!(net.has_edge(Vertex::Item(1), Vertex::Agent(0)));
        assert!(net.has_edge(Vertex::Agent(0), Vertex::Item(0)));
        assert!(net.has_edge(Vertex::Item(0), Vertex::Agent(1)));
        // No edge enters the source.
        for v in net.vertices() {
            assert!(!net.out_edges(v).contains(&Vertex::Source));
        }
    }

    #[test]
    fn distinct_items_leave_no_terminals() {
        let ci = CanonicalInstance {
            m_value: rat(4),
            epsilon: ratio(1, 10),
            n_items: 2,
            agents: vec![
                CanonicalAgent::Heavy {
                    gamma: BTreeSet::from([0]),
                },
                CanonicalAgent::Heavy {
                    gamma: BTreeSet::from([1]),
                },
            ],
        };
        let pa = assign_private_items(&ci).unwrap();
        assert!(pa.terminals.is_empty());
    }

    #[test]
    fn shared_item_pigeonholes_to_one_terminal() {
        let ci = CanonicalInstance {
            m_value: rat(4),
            epsilon: ratio(1, 10),
            n_items: 1,
            agents: vec![
                CanonicalAgent::Heavy {
                    gamma: BTreeSet::from([0]),
                },
                CanonicalAgent::Heavy {
                    gamma: BTreeSet::from([0]),
                },
            ],
        };
        let pa = assign_private_items(&ci).unwrap();
        assert_eq!(pa.terminals.len(), 1);
    }

    #[test]
    fn feasibility_and_extraction() {
        let ci = tiny_ci(2, 1);
        let pa = assign_private_items(&ci).unwrap();
        let net = build_network(&ci, &pa).unwrap();
        let paths = vec![
            SimplePath::new(vec![Vertex::Source, Vertex::Item(1), Vertex::Agent(0)]),
            SimplePath::new(vec![Vertex::Agent(0), Vertex::Item(0), Vertex::Agent(1)]),
        ];
        let (ok, diags) = check_alpha_feasible(&net, &paths, &rat(1));
        assert!(ok, "{diags:?}");
        let alloc = extract_allocation(&ci, &pa, &paths, &rat(1)).unwrap();
        assert_eq!(alloc.owner_of(1), Some(0));
        assert_eq!(alloc.owner_of(0), Some(1));

        // Duplicate intermediate vertex is called out by name.
        let bad = vec![
            SimplePath::new(vec![Vertex::Source, Vertex::Item(1), Vertex::Agent(0)]),
            SimplePath::new(vec![Vertex::Source, Vertex::Item(1), Vertex::Agent(0)]),
        ];
        let (ok, diags) = check_alpha_feasible(&net, &bad, &rat(1));
        assert!(!ok);
        assert!(diags.iter().any(|d| d.contains("i1")), "{diags:?}");
    }

    #[test]
    fn alpha_threshold_crossing() {
        let ci = tiny_ci(4, 4);
        let pa = assign_private_items(&ci).unwrap();
        let net = build_network(&ci, &pa).unwrap();
        // Two of four needed light items arrive: fine at alpha=2, not at 1.
        let mut paths = vec![SimplePath::new(vec![
            Vertex::Agent(0),
            Vertex::Item(0),
            Vertex::Agent(1),
        ])];
        for i in [1, 2] {
            paths.push(SimplePath::new(vec![
                Vertex::Source,
                Vertex::Item(i),
                Vertex::Agent(0),
            ]));
        }
        assert!(check_alpha_feasible(&net, &paths, &rat(2)).0);
        assert!(!check_alpha_feasible(&net, &paths, &rat(1)).0);
    }

    #[test]
    fn empty_paths_private_allocation() {
        let ci = CanonicalInstance {
            m_value: rat(4),
            epsilon: ratio(1, 10),
            n_items: 2,
            agents: vec![
                CanonicalAgent::Heavy {
                    gamma: BTreeSet::from([0]),
                },
                CanonicalAgent::Heavy {
                    gamma: BTreeSet::from([1]),
                },
            ],
        };
        let pa = assign_private_items(&ci).unwrap();
        let alloc = extract_allocation(&ci, &pa, &[], &rat(1)).unwrap();
        assert_eq!(alloc.owner_of(0), Some(0));
        assert_eq!(alloc.owner_of(1), Some(1));
    }

    fn depth2_fixture() -> (CanonicalInstance, PrivateAssignment, Vec<SimplePath>) {
        // A1 (light, N=2) fed by S items 2,3; A0 (light, N=1) fed by h(A1)=1;
        // terminal A2 wants h(A0)=0.
        let ci = CanonicalInstance {
            m_value: rat(4),
            epsilon: ratio(1, 10),
            n_items: 4,
            agents: vec![
                CanonicalAgent::Light {
                    heavy_item: 0,
                    threshold: rat(1),
                    light_items: BTreeSet::from([1]),
                },
                CanonicalAgent::Light {
                    heavy_item: 1,
                    threshold: rat(2),
                    light_items: BTreeSet::from([2, 3]),
                },
                CanonicalAgent::Heavy {
                    gamma: BTreeSet::from([0]),
                },
            ],
        };
        let pa = assign_private_items(&ci).unwrap();
        let paths = vec![
            SimplePath::new(vec![Vertex::Source, Vertex::Item(2), Vertex::Agent(1)]),
            SimplePath::new(vec![Vertex::Source, Vertex::Item(3), Vertex::Agent(1)]),
            SimplePath::new(vec![Vertex::Agent(1), Vertex::Item(1), Vertex::Agent(0)]),
            SimplePath::new(vec![Vertex::Agent(0), Vertex::Item(0), Vertex::Agent(2)]),
        ];
        (ci, pa, paths)
    }

    #[test]
    fn layerize_depth2_chain_retained() {
        let (ci, pa, paths) = depth2_fixture();
        let net = build_network(&ci, &pa).unwrap();
        assert!(check_alpha_feasible(&net, &paths, &rat(1)).0);
        let forest = forest_from_paths(&net, &paths).unwrap();
        assert_eq!(forest.trees.len(), 1);
        let layered = layerize(&forest, &net, 2).unwrap();
        assert_eq!(layered.trees[0].height, 2);
    }

    #[test]
    fn layerize_uniform_depth1() {
        let ci = tiny_ci(2, 2);
        let pa = assign_private_items(&ci).unwrap();
        let net = build_network(&ci, &pa).unwrap();
        let paths = vec![
            SimplePath::new(vec![Vertex::Source, Vertex::Item(1), Vertex::Agent(0)]),
            SimplePath::new(vec![Vertex::Source, Vertex::Item(2), Vertex::Agent(0)]),
            SimplePath::new(vec![Vertex::Agent(0), Vertex::Item(0), Vertex::Agent(1)]),
        ];
        let net_forest = forest_from_paths(&net, &paths).unwrap();
        let layered = layerize(&net_forest, &net, 3).unwrap();
        assert_eq!(layered.trees[0].height, 1);
        // Both branches qualify and are retained.
        let a0 = Vertex::Agent(0);
        assert_eq!(layered.trees[0].children[&a0].len(), 2);
    }

    #[test]
    fn layerize_error_on_starved_agent() {
        // Raise A1's threshold so N/(h+1) cannot be met by its branches.
        let (mut ci, pa, mut paths) = depth2_fixture();
        if let CanonicalAgent::Light { threshold, .. } = &mut ci.agents[1] {
            *threshold = rat(8);
        }
        paths.remove(1);
        let net = build_network(&ci, &pa).unwrap();
        let forest = forest_from_paths(&net, &paths).unwrap();
        assert!(layerize(&forest, &net, 2).is_err());
    }
}
