//! Adjacency form of a trie and the allocator that packs it back into the
//! contiguous bitmap+offset array.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::trie::{Trie, MAX_NODES, TERMINAL};

#[derive(Clone, Debug, Default)]
pub(crate) struct GraphNode {
    /// `(symbol, child)` in ascending symbol order.
    pub children: Vec<(u16, usize)>,
    pub terminal: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct Graph {
    pub nodes: Vec<GraphNode>,
    /// Single terminal node shared by every collapsed child block.
    pub shared_final: Option<usize>,
}

impl Graph {
    pub fn from_trie(trie: &Trie) -> Self {
        let nodes = (0..trie.node_count())
            .map(|i| GraphNode {
                children: trie.children(i).map(|(s, c)| (s as u16, c)).collect(),
                terminal: trie.is_terminal(i),
            })
            .collect();
        let last = trie.node_count() - 1;
        let shared_final = (trie.stage() != crate::trie::Stage::Uncompressed).then_some(last);
        Self { nodes, shared_final }
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        let n = &self.nodes[id];
        n.terminal && n.children.is_empty()
    }

    fn collapsed(&self, id: usize) -> bool {
        let n = &self.nodes[id];
        !n.children.is_empty()
            && self.shared_final.is_some()
            && n.children.iter().all(|&(_, c)| Some(c) == self.shared_final)
    }

    /// Packs reachable nodes into `(bitmaps, links)`.
    ///
    /// Each non-root node is allocated inside one "home" block: the child
    /// block of a parent with several children, or a block of its own when
    /// every parent is unary. A block is allocated once every parent of every
    /// node in it has a slot, which keeps offsets pointing forward. The shared
    /// final node, if any, takes the last slot.
    pub fn layout(&self, words: usize) -> Result<(Vec<u32>, Vec<u32>)> {
        let n = self.nodes.len();
        let fin = self.shared_final;
        let mut reachable = vec![false; n];
        let mut stack = vec![0usize];
        reachable[0] = true;
        while let Some(u) = stack.pop() {
            for &(_, c) in &self.nodes[u].children {
                if !reachable[c] {
                    reachable[c] = true;
                    stack.push(c);
                }
            }
        }

        // Home block per child node.
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut block_of_list: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut home: Vec<Option<usize>> = vec![None; n];
        for u in (0..n).filter(|&u| reachable[u]) {
            if self.nodes[u].children.len() < 2 || self.collapsed(u) {
                continue;
            }
            let list: Vec<usize> = self.nodes[u].children.iter().map(|&(_, c)| c).collect();
            let next = blocks.len();
            let b = *block_of_list.entry(list.clone()).or_insert(next);
            if b == next {
                for &c in &list {
                    if Some(c) == fin || home[c].is_some() {
                        return Err(Error::Layout(format!(
                            "node {c} is shared by two different child blocks"
                        )));
                    }
                    home[c] = Some(b);
                }
                blocks.push(list);
            }
        }
        for u in (0..n).filter(|&u| reachable[u]) {
            if self.collapsed(u) {
                continue;
            }
            if let [(_, c)] = self.nodes[u].children[..] {
                if home[c].is_none() {
                    home[c] = Some(blocks.len());
                    blocks.push(vec![c]);
                }
            }
        }

        // Pending parent edges per block.
        let mut pending = vec![0usize; blocks.len()];
        for u in (0..n).filter(|&u| reachable[u]) {
            if self.collapsed(u) {
                continue;
            }
            for &(_, c) in &self.nodes[u].children {
                pending[home[c].expect("child has a home block")] += 1;
            }
        }

        let mut slot: Vec<Option<u32>> = vec![None; n];
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut ready: VecDeque<usize> = VecDeque::new();
        let assign = |id: usize, order: &mut Vec<usize>, slot: &mut Vec<Option<u32>>| {
            slot[id] = Some(order.len() as u32);
            order.push(id);
        };
        assign(0, &mut order, &mut slot);
        let mut cursor = 0;
        loop {
            while cursor < order.len() {
                let u = order[cursor];
                cursor += 1;
                if self.collapsed(u) {
                    continue;
                }
                for &(_, c) in &self.nodes[u].children {
                    let b = home[c].expect("child has a home block");
                    pending[b] -= 1;
                    if pending[b] == 0 {
                        ready.push_back(b);
                    }
                }
            }
            match ready.pop_front() {
                Some(b) => {
                    for &c in &blocks[b] {
                        assign(c, &mut order, &mut slot);
                    }
                }
                None => break,
            }
        }
        let referenced_final = fin.filter(|&f| reachable[f]);
        if let Some(f) = referenced_final {
            assign(f, &mut order, &mut slot);
        }
        let expected = reachable.iter().filter(|&&r| r).count();
        if order.len() != expected {
            return Err(Error::Layout("child blocks could not be ordered".into()));
        }
        if order.len() > MAX_NODES {
            return Err(Error::TooManyNodes { max: MAX_NODES });
        }

        let mut bitmaps = vec![0u32; order.len() * words];
        let mut links = vec![0u32; order.len()];
        for (i, &u) in order.iter().enumerate() {
            let node = &self.nodes[u];
            let mut link = if node.terminal { TERMINAL } else { 0 };
            for &(s, _) in &node.children {
                bitmaps[i * words + (s as usize >> 5)] |= 1 << (s & 31);
            }
            if !node.children.is_empty() {
                let first = slot[node.children[0].1].expect("allocated");
                if !self.collapsed(u) {
                    for (k, &(_, c)) in node.children.iter().enumerate() {
                        debug_assert_eq!(slot[c], Some(first + k as u32));
                    }
                }
                link |= first;
            }
            links[i] = link;
        }
        Ok((bitmaps, links))
    }
}
