use std::fmt;

use crate::symbol::Sym;

use super::StructureError;

/// Index of a node inside one [`CTree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Internal,
    Terminal,
    /// An open substitution site left behind by Frontier.
    Slot,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CNode {
    pub category: Sym,
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
}

impl CNode {
    pub fn internal(category: impl Into<Sym>, children: Vec<NodeId>) -> Self {
        CNode { category: category.into(), kind: NodeKind::Internal, children }
    }

    pub fn terminal(word: impl Into<Sym>) -> Self {
        CNode { category: word.into(), kind: NodeKind::Terminal, children: Vec::new() }
    }

    pub fn slot(category: impl Into<Sym>) -> Self {
        CNode { category: category.into(), kind: NodeKind::Slot, children: Vec::new() }
    }

    pub fn is_terminal(&self) -> bool {
        self.kind == NodeKind::Terminal
    }

    pub fn is_slot(&self) -> bool {
        self.kind == NodeKind::Slot
    }

    pub fn is_internal(&self) -> bool {
        self.kind == NodeKind::Internal
    }
}

/// A rooted, ordered constituent tree. Node ids index into a dense vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CTree {
    nodes: Vec<CNode>,
    root: NodeId,
}

impl CTree {
    /// Validates the tree invariants: every node reachable from `root`
    /// exactly once, and node kinds agree with their child lists.
    pub fn new(nodes: Vec<CNode>, root: NodeId) -> Result<Self, StructureError> {
        if root.index() >= nodes.len() {
            return Err(StructureError::UnknownNode(root));
        }
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            let node = nodes.get(id.index()).ok_or(StructureError::UnknownNode(id))?;
            if std::mem::replace(&mut seen[id.index()], true) {
                return Err(StructureError::NotATree(id));
            }
            match node.kind {
                NodeKind::Internal if node.children.is_empty() => {
                    return Err(StructureError::BadNodeKind(id, "internal node without children"))
                }
                NodeKind::Terminal | NodeKind::Slot if !node.children.is_empty() => {
                    return Err(StructureError::BadNodeKind(id, "leaf node with children"))
                }
                _ => {}
            }
            stack.extend(node.children.iter().rev().copied());
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return Err(StructureError::NotATree(NodeId(orphan as u32)));
        }
        Ok(CTree { nodes, root })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &CNode {
        &self.nodes[id.index()]
    }

    pub fn get(&self, id: NodeId) -> Option<&CNode> {
        self.nodes.get(id.index())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.node(id).children.iter().rev().copied());
        }
        out
    }

    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut parents = vec![None; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                parents[c.index()] = Some(NodeId(i as u32));
            }
        }
        parents
    }

    /// Leaves (terminals and slots) in left-to-right order.
    pub fn leaves(&self) -> Vec<NodeId> {
        self.preorder()
            .into_iter()
            .filter(|&id| self.node(id).children.is_empty())
            .collect()
    }

    pub fn slots(&self) -> Vec<NodeId> {
        self.leaves().into_iter().filter(|&id| self.node(id).is_slot()).collect()
    }

    pub fn words(&self) -> Vec<Sym> {
        self.leaves()
            .into_iter()
            .filter(|&id| self.node(id).is_terminal())
            .map(|id| self.node(id).category.clone())
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.nodes.iter().all(|n| !n.is_slot())
    }

    /// Length in edges of the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn go(t: &CTree, id: NodeId) -> usize {
            t.node(id).children.iter().map(|&c| 1 + go(t, c)).max().unwrap_or(0)
        }
        go(self, self.root)
    }

    /// Leaf-position span `[start, end)` of every node; slots and
    /// terminals each occupy one position.
    pub fn spans(&self) -> Vec<(usize, usize)> {
        let mut spans = vec![(0, 0); self.nodes.len()];
        fn go(t: &CTree, id: NodeId, pos: &mut usize, spans: &mut [(usize, usize)]) {
            let start = *pos;
            let node = t.node(id);
            if node.children.is_empty() {
                *pos += 1;
            } else {
                for &c in &node.children {
                    go(t, c, pos, spans);
                }
            }
            spans[id.index()] = (start, *pos);
        }
        let mut pos = 0;
        go(self, self.root, &mut pos, &mut spans);
        spans
    }

    /// Ids of all nodes dominated by `id`, including `id`, in preorder.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.node(n).children.iter().rev().copied());
        }
        out
    }
}
