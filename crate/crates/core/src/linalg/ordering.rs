//! Fill-reducing symmetric ordering by recursive nested dissection.
//!
//! Separators are middle levels of a breadth-first level structure rooted at a
//! pseudo-peripheral node. On grid graphs this gives `O(sqrt(n))` separators
//! and near-optimal fill for a direct factorization.

use std::collections::VecDeque;

use super::sparse::SparseMatrix;

const LEAF_SIZE: usize = 16;
const PERIPHERAL_SWEEPS: usize = 4;

/// Undirected adjacency of the off-diagonal pattern of `A + A^T`.
pub(crate) struct Graph {
    ptr: Vec<usize>,
    adj: Vec<usize>,
}

impl Graph {
    pub(crate) fn from_pattern(m: &SparseMatrix) -> Graph {
        let n = m.n_rows();
        let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for (j, _) in m.row(i) {
                if i != j {
                    edges[i].push(j);
                    edges[j].push(i);
                }
            }
        }
        let mut ptr = Vec::with_capacity(n + 1);
        let mut adj = Vec::new();
        ptr.push(0);
        for list in &mut edges {
            list.sort_unstable();
            list.dedup();
            adj.extend_from_slice(list);
            ptr.push(adj.len());
        }
        Graph { ptr, adj }
    }

    fn len(&self) -> usize {
        self.ptr.len() - 1
    }

    fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[self.ptr[v]..self.ptr[v + 1]]
    }
}

struct Dissector<'g> {
    graph: &'g Graph,
    owner: Vec<usize>,
    next_owner: usize,
    visit: Vec<usize>,
    next_visit: usize,
    level: Vec<usize>,
    order: Vec<usize>,
}

impl<'g> Dissector<'g> {
    fn claim(&mut self, nodes: &[usize]) -> usize {
        self.next_owner += 1;
        for &v in nodes {
            self.owner[v] = self.next_owner;
        }
        self.next_owner
    }

    /// Breadth-first search inside the set tagged `owner`; returns nodes in
    /// visiting order and fills `self.level` for them.
    fn bfs(&mut self, root: usize, owner: usize) -> Vec<usize> {
        self.next_visit += 1;
        let stamp = self.next_visit;
        let mut seen = vec![root];
        let mut queue = VecDeque::from([root]);
        self.visit[root] = stamp;
        self.level[root] = 0;
        while let Some(v) = queue.pop_front() {
            for &w in self.graph.neighbors(v) {
                if self.owner[w] == owner && self.visit[w] != stamp {
                    self.visit[w] = stamp;
                    self.level[w] = self.level[v] + 1;
                    seen.push(w);
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    fn dissect(&mut self, mut nodes: Vec<usize>) {
        if nodes.len() <= LEAF_SIZE {
            nodes.sort_unstable();
            self.order.extend(nodes);
            return;
        }
        let owner = self.claim(&nodes);

        let mut visited = self.bfs(nodes[0], owner);
        if visited.len() < nodes.len() {
            // disconnected: dissect each component on its own
            // re-tagging a finished component takes it out of `owner`
            self.claim(&visited);
            let mut components = vec![visited];
            for &v in &nodes {
                if self.owner[v] == owner {
                    let comp = self.bfs(v, owner);
                    self.claim(&comp);
                    components.push(comp);
                }
            }
            for comp in components {
                self.dissect(comp);
            }
            return;
        }

        // pseudo-peripheral root: restart from a min-degree node of the last level
        let mut depth = self.level[*visited.last().unwrap()];
        for _ in 0..PERIPHERAL_SWEEPS {
            let candidate = visited
                .iter()
                .rev()
                .take_while(|&&v| self.level[v] == depth)
                .copied()
                .min_by_key(|&v| self.graph.neighbors(v).len())
                .unwrap();
            let trial = self.bfs(candidate, owner);
            let trial_depth = self.level[*trial.last().unwrap()];
            if trial_depth <= depth {
                // restore levels of the best structure found so far
                let root = visited[0];
                visited = self.bfs(root, owner);
                break;
            }
            depth = trial_depth;
            visited = trial;
        }

        if depth < 2 {
            nodes.sort_unstable();
            self.order.extend(nodes);
            return;
        }

        let mut sizes = vec![0usize; depth + 1];
        for &v in &visited {
            sizes[self.level[v]] += 1;
        }
        let total = nodes.len();
        let mut before = 0usize;
        let mut best: Option<(usize, usize)> = None;
        let mut median = 1;
        for (l, &size) in sizes.iter().enumerate() {
            if l >= 1 && l < depth {
                let balanced = 10 * before >= 3 * total && 10 * (before + size) <= 7 * total;
                if balanced && best.is_none_or(|(_, s)| size < s) {
                    best = Some((l, size));
                }
                if 2 * before < total {
                    median = l;
                }
            }
            before += size;
        }
        let separator_level = best.map_or(median, |(l, _)| l);

        let mut low = Vec::new();
        let mut high = Vec::new();
        let mut separator = Vec::new();
        for &v in &visited {
            match self.level[v].cmp(&separator_level) {
                std::cmp::Ordering::Less => low.push(v),
                std::cmp::Ordering::Greater => high.push(v),
                std::cmp::Ordering::Equal => separator.push(v),
            }
        }
        self.dissect(low);
        self.dissect(high);
        separator.sort_unstable();
        self.order.extend(separator);
    }
}

/// Nested-dissection permutation of the symmetrized pattern of `m`:
/// `perm[new] = old`.
pub fn nested_dissection(m: &SparseMatrix) -> Vec<usize> {
    let graph = Graph::from_pattern(m);
    let n = graph.len();
    let mut dissector = Dissector {
        graph: &graph,
        owner: vec![0; n],
        next_owner: 0,
        visit: vec![0; n],
        next_visit: 0,
        level: vec![0; n],
        order: Vec::with_capacity(n),
    };
    dissector.dissect((0..n).collect());
    debug_assert_eq!(dissector.order.len(), n);
    dissector.order
}

/// Inverse of a permutation.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}
