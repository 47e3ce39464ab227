//! Path-maintaining DFS over an admissible network, shared by the graph
//! matcher and the compact geometric matcher.

use std::collections::HashSet;
use std::hash::Hash;

/// When an arc counts as visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marking {
    /// As soon as the DFS traverses it, including arcs that end up on the path.
    OnTraverse,
    /// Only when the DFS backtracks over it, or skips it because its head is
    /// already on the path. Arcs of the returned path stay unvisited.
    OnBacktrack,
}

/// The admissible, not-yet-deleted part of a residual network.
pub trait DfsNetwork {
    type Arc: Copy + Eq + Hash;

    /// Appends the usable outgoing arcs `(arc, head)` of `v` to `out`.
    fn out_arcs(&self, v: usize, out: &mut Vec<(Self::Arc, usize)>);

    /// Whether reaching `v` completes an augmenting path.
    fn is_target(&self, v: usize) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DfsOutcome<A> {
    Found {
        /// Vertices from the root to the target.
        vertices: Vec<usize>,
        /// Arcs between consecutive `vertices`.
        arcs: Vec<A>,
        /// Arcs marked visited, in marking order.
        visited: Vec<A>,
    },
    Failed { visited: Vec<A> },
}

impl<A> DfsOutcome<A> {
    pub fn visited(&self) -> &[A] {
        match self {
            DfsOutcome::Found { visited, .. } | DfsOutcome::Failed { visited } => visited,
        }
    }
}

struct Frame<A> {
    arcs: Vec<(A, usize)>,
    next: usize,
}

/// Runs one DFS from `root`.
///
/// Every arc starts unvisited. The search keeps a simple path from `root`,
/// extends it along the first unvisited arc of its last vertex, skips arcs
/// whose head is already on the path, and pops the last vertex when it has no
/// unvisited arcs left. It stops at the first target or when the root is
/// exhausted.
pub fn search<N: DfsNetwork>(net: &N, root: usize, marking: Marking) -> DfsOutcome<N::Arc> {
    let mut visited: HashSet<N::Arc> = HashSet::new();
    let mut visited_order: Vec<N::Arc> = Vec::new();
    let mut on_path: HashSet<usize> = HashSet::new();
    let mut vertices = vec![root];
    let mut arcs: Vec<N::Arc> = Vec::new();
    let mut frames = vec![frame(net, root)];
    on_path.insert(root);

    let mut mark = |arc: N::Arc, visited: &mut HashSet<N::Arc>| {
        if visited.insert(arc) {
            visited_order.push(arc);
        }
    };

    loop {
        let top = frames.last_mut().expect("frame stack holds the root");
        let mut next = None;
        while top.next < top.arcs.len() {
            let candidate = top.arcs[top.next];
            top.next += 1;
            if !visited.contains(&candidate.0) {
                next = Some(candidate);
                break;
            }
        }
        match next {
            None => {
                if vertices.len() == 1 {
                    return DfsOutcome::Failed {
                        visited: visited_order,
                    };
                }
                frames.pop();
                let v = vertices.pop().unwrap();
                on_path.remove(&v);
                let arc = arcs.pop().unwrap();
                if marking == Marking::OnBacktrack {
                    mark(arc, &mut visited);
                }
            }
            Some((arc, head)) => {
                if marking == Marking::OnTraverse || on_path.contains(&head) {
                    mark(arc, &mut visited);
                }
                if on_path.contains(&head) {
                    continue;
                }
                vertices.push(head);
                arcs.push(arc);
                if net.is_target(head) {
                    return DfsOutcome::Found {
                        vertices,
                        arcs,
                        visited: visited_order,
                    };
                }
                on_path.insert(head);
                frames.push(frame(net, head));
            }
        }
    }
}

fn frame<N: DfsNetwork>(net: &N, v: usize) -> Frame<N::Arc> {
    let mut arcs = Vec::new();
    net.out_arcs(v, &mut arcs);
    Frame { arcs, next: 0 }
}
