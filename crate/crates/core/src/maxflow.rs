//! Integer max-flow (Dinic) with decomposition of unit flows into paths.

/// Directed flow network with integer capacities.
#[derive(Debug, Clone)]
pub struct FlowGraph {
    pub vertex_count: usize,
    // Forward/backward edge pairs: edge e and e^1 are inverses.
    to: Vec<usize>,
    cap: Vec<i64>,
    head: Vec<Vec<usize>>,
}

impl FlowGraph {
    pub fn new(vertex_count: usize) -> Self {
        FlowGraph {
            vertex_count,
            to: Vec::new(),
            cap: Vec::new(),
            head: vec![Vec::new(); vertex_count],
        }
    }

    /// Adds a directed edge, returns its id.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64) -> usize {
        let id = self.to.len();
        self.to.push(to);
        self.cap.push(cap);
        self.head[from].push(id);
        self.to.push(from);
        self.cap.push(0);
        self.head[to].push(id + 1);
        id
    }

    /// Flow currently on edge `id` (capacity moved to the reverse edge).
    pub fn flow_on(&self, id: usize) -> i64 {
        self.cap[id ^ 1]
    }

    /// Dinic max flow from `s` to `t`.
    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let level = self.bfs_levels(s);
            if level[t].is_none() {
                return total;
            }
            let mut iter = vec![0usize; self.vertex_count];
            loop {
                let pushed = self.dfs_push(s, t, i64::MAX, &level, &mut iter);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn bfs_levels(&self, s: usize) -> Vec<Option<u32>> {
        let mut level = vec![None; self.vertex_count];
        level[s] = Some(0);
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            let lv = level[v].unwrap();
            for &e in &self.head[v] {
                if self.cap[e] > 0 && level[self.to[e]].is_none() {
                    level[self.to[e]] = Some(lv + 1);
                    queue.push_back(self.to[e]);
                }
            }
        }
        level
    }

    fn dfs_push(
        &mut self,
        v: usize,
        t: usize,
        limit: i64,
        level: &[Option<u32>],
        iter: &mut [usize],
    ) -> i64 {
        if v == t {
            return limit;
        }
        while iter[v] < self.head[v].len() {
            let e = self.head[v][iter[v]];
            let u = self.to[e];
            if self.cap[e] > 0 && level[u] == level[v].map(|x| x + 1) {
                let pushed = self.dfs_push(u, t, limit.min(self.cap[e]), level, iter);
                if pushed > 0 {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            iter[v] += 1;
        }
        0
    }

    /// Decomposes the current flow out of `s` into unit-flow paths.
    ///
    /// Only meaningful for unit-capacity networks. Each returned path lists
    /// vertices from `s` to `t`; every traversed edge has its flow consumed,
    /// so the paths are edge-disjoint.
    pub fn extract_unit_paths(&mut self, s: usize, t: usize) -> Vec<Vec<usize>> {
        let mut paths = Vec::new();
        loop {
            let mut path = vec![s];
            let mut v = s;
            let mut found = true;
            while v != t {
                // Lowest-id flow-carrying edge first, for determinism.
                let next = self.head[v]
                    .iter()
                    .copied()
                    .filter(|&e| e % 2 == 0 && self.flow_on(e) > 0)
                    .min();
                match next {
                    Some(e) => {
                        self.cap[e ^ 1] -= 1;
                        self.cap[e] += 1;
                        v = self.to[e];
                        path.push(v);
                        if path.len() > self.vertex_count + 1 {
                            // Circulation not reachable from s->t structure;
                            // bail rather than loop forever.
                            found = false;
                            break;
                        }
                    }
                    None => {
                        found = false;
                        break;
                    }
                }
            }
            if !found {
                return paths;
            }
            paths.push(path);
        }
    }
}
