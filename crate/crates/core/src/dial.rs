//! Dial's bucket-queue Dijkstra over integer slacks.

use crate::graph::ResidualView;

/// Distance of a vertex the source cannot reach.
pub const INFINITE: u32 = u32::MAX;

/// Monotone bucket queue keyed by small non-negative integers.
///
/// Keys must never be pushed below the last popped key.
#[derive(Debug, Default)]
pub struct BucketQueue {
    buckets: Vec<Vec<usize>>,
    current: usize,
    len: usize,
}

impl BucketQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: u32, item: usize) {
        let key = key as usize;
        debug_assert!(key >= self.current, "bucket queue key went backwards");
        if key >= self.buckets.len() {
            self.buckets.resize_with(key + 1, Vec::new);
        }
        self.buckets[key].push(item);
        self.len += 1;
    }

    pub fn pop(&mut self) -> Option<(u32, usize)> {
        if self.len == 0 {
            return None;
        }
        while self.buckets[self.current].is_empty() {
            self.current += 1;
        }
        self.len -= 1;
        let item = self.buckets[self.current].pop().unwrap();
        Some((self.current as u32, item))
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// A directed network with non-negative integer arc lengths and a virtual
/// source joined to a set of vertices by 0-length arcs.
pub trait SlackNetwork {
    fn vertex_count(&self) -> usize;
    fn for_each_source(&self, f: &mut dyn FnMut(usize));
    /// Calls `f(head, slack)` for every outgoing arc of `v`.
    fn for_each_arc(&self, v: usize, f: &mut dyn FnMut(usize, i64));
}

/// Shortest distances from the virtual source; [`INFINITE`] if unreachable.
///
/// Panics on a negative arc length, which means dual feasibility was lost.
pub fn dijkstra<N: SlackNetwork + ?Sized>(net: &N) -> Vec<u32> {
    let n = net.vertex_count();
    let mut dist = vec![INFINITE; n];
    let mut done = vec![false; n];
    let mut queue = BucketQueue::new();
    net.for_each_source(&mut |s| {
        if dist[s] != 0 {
            dist[s] = 0;
            queue.push(0, s);
        }
    });
    while let Some((d, v)) = queue.pop() {
        if done[v] || d != dist[v] {
            continue;
        }
        done[v] = true;
        net.for_each_arc(v, &mut |head, slack| {
            assert!(slack >= 0, "negative slack {slack} on arc {v} -> {head}");
            let nd = d + slack as u32;
            if nd < dist[head] {
                dist[head] = nd;
                queue.push(nd, head);
            }
        });
    }
    dist
}

impl SlackNetwork for ResidualView<'_> {
    fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    fn for_each_source(&self, f: &mut dyn FnMut(usize)) {
        self.sources().for_each(f);
    }

    fn for_each_arc(&self, v: usize, f: &mut dyn FnMut(usize, i64)) {
        for (_, head, slack) in self.out_arcs(v) {
            f(head, slack);
        }
    }
}
