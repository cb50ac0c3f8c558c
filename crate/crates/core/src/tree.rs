//! Rooted search tree with parent links, cost-from-start, reparenting with
//! immediate subtree cost propagation, and leaf pruning.

#[derive(Clone, Debug)]
pub struct TreeNode<S> {
    pub state: S,
    pub parent: Option<usize>,
    /// Cost of the edge from the parent (zero for the root).
    pub edge_cost: f64,
    pub cost: f64,
    pub children: Vec<usize>,
    pub removed: bool,
}

#[derive(Clone, Debug)]
pub struct SearchTree<S> {
    nodes: Vec<TreeNode<S>>,
    live: usize,
    rewires: u64,
    monotonicity_violations: u64,
}

impl<S> SearchTree<S> {
    pub fn new(root: S) -> Self {
        SearchTree {
            nodes: vec![TreeNode {
                state: root,
                parent: None,
                edge_cost: 0.0,
                cost: 0.0,
                children: Vec::new(),
                removed: false,
            }],
            live: 1,
            rewires: 0,
            monotonicity_violations: 0,
        }
    }

    pub const ROOT: usize = 0;

    /// Number of node slots ever allocated (removed ones included).
    pub fn capacity(&self) -> usize {
        self.nodes.len()
    }

    /// Number of nodes still in the tree.
    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    pub fn node(&self, id: usize) -> &TreeNode<S> {
        &self.nodes[id]
    }

    pub fn state(&self, id: usize) -> &S {
        &self.nodes[id].state
    }

    pub fn cost(&self, id: usize) -> f64 {
        self.nodes[id].cost
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.nodes[id].parent
    }

    pub fn is_live(&self, id: usize) -> bool {
        !self.nodes[id].removed
    }

    pub fn rewires(&self) -> u64 {
        self.rewires
    }

    /// Number of times a reparent raised some node's cost.
    pub fn monotonicity_violations(&self) -> u64 {
        self.monotonicity_violations
    }

    pub fn live_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.removed)
            .map(|(i, _)| i)
    }

    pub fn add_child(&mut self, parent: usize, state: S, edge_cost: f64) -> usize {
        debug_assert!(!self.nodes[parent].removed);
        let id = self.nodes.len();
        let cost = self.nodes[parent].cost + edge_cost;
        self.nodes.push(TreeNode {
            state,
            parent: Some(parent),
            edge_cost,
            cost,
            children: Vec::new(),
            removed: false,
        });
        self.nodes[parent].children.push(id);
        self.live += 1;
        id
    }

    /// True if `ancestor` lies on the root path of `id` (or equals it).
    pub fn is_ancestor(&self, ancestor: usize, mut id: usize) -> bool {
        loop {
            if id == ancestor {
                return true;
            }
            match self.nodes[id].parent {
                Some(p) => id = p,
                None => return false,
            }
        }
    }

    /// Moves `id` under `new_parent` and pushes the cost change through its
    /// subtree. Returns false (and does nothing) if that would create a cycle.
    pub fn reparent(&mut self, id: usize, new_parent: usize, edge_cost: f64) -> bool {
        if self.is_ancestor(id, new_parent) {
            return false;
        }
        if let Some(old) = self.nodes[id].parent {
            let children = &mut self.nodes[old].children;
            if let Some(pos) = children.iter().position(|&c| c == id) {
                children.swap_remove(pos);
            }
        }
        self.nodes[new_parent].children.push(id);
        self.nodes[id].parent = Some(new_parent);
        self.nodes[id].edge_cost = edge_cost;
        self.rewires += 1;

        let mut stack = vec![id];
        while let Some(v) = stack.pop() {
            let parent = self.nodes[v].parent.expect("non-root");
            let new_cost = self.nodes[parent].cost + self.nodes[v].edge_cost;
            if new_cost > self.nodes[v].cost {
                self.monotonicity_violations += 1;
            }
            self.nodes[v].cost = new_cost;
            stack.extend(self.nodes[v].children.iter().copied());
        }
        true
    }

    /// Removes a childless non-root node.
    pub fn remove_leaf(&mut self, id: usize) {
        assert!(self.nodes[id].children.is_empty(), "only leaves can be removed");
        let parent = self.nodes[id].parent.expect("root cannot be removed");
        let children = &mut self.nodes[parent].children;
        if let Some(pos) = children.iter().position(|&c| c == id) {
            children.swap_remove(pos);
        }
        self.nodes[id].removed = true;
        self.live -= 1;
    }

    /// `id` and all of its descendants.
    pub fn subtree(&self, id: usize) -> Vec<usize> {
        let mut out = vec![id];
        let mut k = 0;
        while k < out.len() {
            out.extend(self.nodes[out[k]].children.iter().copied());
            k += 1;
        }
        out
    }

    /// Node ids from the root to `id`.
    pub fn path_to(&self, mut id: usize) -> Vec<usize> {
        let mut out = vec![id];
        while let Some(p) = self.nodes[id].parent {
            out.push(p);
            id = p;
        }
        out.reverse();
        out
    }

    /// Largest deviation between stored costs and the recomputed sum of edge
    /// costs along each parent chain, over all live nodes.
    pub fn max_cost_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for id in self.live_ids() {
            let chain = self.path_to(id);
            let mut acc = 0.0;
            for &v in &chain[1..] {
                acc += self.nodes[v].edge_cost;
            }
            worst = worst.max((acc - self.nodes[id].cost).abs());
        }
        worst
    }

    /// Largest deviation between edge costs and `metric(parent, child)`.
    pub fn max_edge_deviation(&self, metric: impl Fn(&S, &S) -> f64) -> f64 {
        let mut worst = 0.0f64;
        for id in self.live_ids() {
            if let Some(p) = self.nodes[id].parent {
                let d = metric(&self.nodes[p].state, &self.nodes[id].state);
                worst = worst.max((d - self.nodes[id].edge_cost).abs());
            }
        }
        worst
    }
}
