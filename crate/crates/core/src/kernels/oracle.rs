//! Straightforward in-memory reference implementations.

use std::collections::VecDeque;

use super::UNREACHED;
use crate::engine::IN_MEMORY_EDGE_LIMIT;
use crate::error::{Error, Result};
use crate::graph_model::Edge;

/// Vertex count up to which PageRank uses a dense matrix.
pub const DENSE_LIMIT: usize = 2048;

fn ensure_small(edges: &[Edge]) -> Result<()> {
    if edges.len() as u64 > IN_MEMORY_EDGE_LIMIT {
        return Err(Error::Oversize {
            edges: edges.len() as u64,
            limit: IN_MEMORY_EDGE_LIMIT,
        });
    }
    Ok(())
}

/// `iters` synchronous steps of `r'(v) = (1-α)/n + Σ α·r(u)/outdeg(u)`, from `1/n`.
pub fn pagerank(n: usize, edges: &[Edge], alpha: f64, iters: u32) -> Result<Vec<f64>> {
    ensure_small(edges)?;
    let mut outdeg = vec![0u32; n];
    for e in edges {
        outdeg[e.src as usize] += 1;
    }
    let base = (1.0 - alpha) / n as f64;
    let mut rank = vec![1.0 / n as f64; n];
    if n <= DENSE_LIMIT {
        let mut m = vec![0.0f64; n * n];
        for e in edges {
            m[e.dst as usize * n + e.src as usize] += alpha / outdeg[e.src as usize] as f64;
        }
        for _ in 0..iters {
            rank = (0..n)
                .map(|d| base + m[d * n..(d + 1) * n].iter().zip(&rank).map(|(w, r)| w * r).sum::<f64>())
                .collect();
        }
    } else {
        for _ in 0..iters {
            let mut next = vec![base; n];
            for e in edges {
                next[e.dst as usize] += alpha * rank[e.src as usize] / outdeg[e.src as usize] as f64;
            }
            rank = next;
        }
    }
    Ok(rank)
}

/// Queue BFS; unreached vertices get [`UNREACHED`].
pub fn bfs(n: usize, edges: &[Edge], root: u32) -> Result<Vec<u32>> {
    ensure_small(edges)?;
    let adj = adjacency(n, edges.iter().map(|e| (e.src, e.dst)));
    let mut depth = vec![UNREACHED; n];
    let mut queue = VecDeque::from([root]);
    depth[root as usize] = 0;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u as usize] {
            if depth[v as usize] == UNREACHED {
                depth[v as usize] = depth[u as usize] + 1;
                queue.push_back(v);
            }
        }
    }
    Ok(depth)
}

/// Union-find components labelled by their smallest id.
pub fn wcc(n: usize, edges: &[Edge]) -> Result<Vec<u32>> {
    ensure_small(edges)?;
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for e in edges {
        let (a, b) = (find(&mut parent, e.src), find(&mut parent, e.dst));
        if a != b {
            // Keep the smaller id as root so roots are component minima.
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            parent[hi as usize] = lo;
        }
    }
    Ok((0..n as u32).map(|v| find(&mut parent, v)).collect())
}

/// Iterative Tarjan; components labelled by their smallest id.
pub fn scc(n: usize, edges: &[Edge]) -> Result<Vec<u32>> {
    ensure_small(edges)?;
    let adj = adjacency(n, edges.iter().map(|e| (e.src, e.dst)));
    let mut index = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut label = vec![UNREACHED; n];
    let mut next = 0u32;
    let mut call: Vec<(u32, usize)> = Vec::new();
    for root in 0..n as u32 {
        if index[root as usize] != u32::MAX {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut child)) = call.last_mut() {
            let vi = v as usize;
            if *child == 0 && index[vi] == u32::MAX {
                index[vi] = next;
                low[vi] = next;
                next += 1;
                stack.push(v);
                on_stack[vi] = true;
            }
            if let Some(&w) = adj[vi].get(*child) {
                *child += 1;
                let wi = w as usize;
                if index[wi] == u32::MAX {
                    call.push((w, 0));
                } else if on_stack[wi] {
                    low[vi] = low[vi].min(index[wi]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[vi]);
            }
            if low[vi] == index[vi] {
                let start = stack.iter().rposition(|&x| x == v).expect("root on stack");
                let members = stack.split_off(start);
                let min = *members.iter().min().unwrap();
                for m in members {
                    on_stack[m as usize] = false;
                    label[m as usize] = min;
                }
            }
        }
    }
    Ok(label)
}

fn adjacency(n: usize, edges: impl Iterator<Item = (u32, u32)>) -> Vec<Vec<u32>> {
    let mut adj = vec![Vec::new(); n];
    for (s, d) in edges {
        adj[s as usize].push(d);
    }
    adj
}
