//! Maximum bipartite matching (Hopcroft–Karp), optionally warm-started.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

const FREE: usize = usize::MAX;

/// Maximum matching of left vertices `0..adj.len()` into right vertices
/// `0..right`. `initial` (left → right) is extended, never discarded; entries
/// that conflict are ignored. Returns the partner of each left vertex.
pub fn maximum_matching(adj: &[Vec<usize>], right: usize, initial: Option<&[Option<usize>]>) -> Vec<Option<usize>> {
    let left = adj.len();
    let mut match_l = alloc::vec![FREE; left];
    let mut match_r = alloc::vec![FREE; right];
    if let Some(init) = initial {
        for (u, m) in init.iter().enumerate().take(left) {
            if let Some(v) = *m {
                if v < right && match_r[v] == FREE && adj[u].contains(&v) {
                    match_l[u] = v;
                    match_r[v] = u;
                }
            }
        }
    }

    let mut dist = alloc::vec![0usize; left];
    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for u in 0..left {
            if match_l[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == FREE {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut augmented = false;
        for u in 0..left {
            if match_l[u] == FREE && augment(u, adj, &mut match_l, &mut match_r, &mut dist) {
                augmented = true;
            }
        }
        if !augmented {
            break;
        }
    }
    match_l.into_iter().map(|v| (v != FREE).then_some(v)).collect()
}

fn augment(u: usize, adj: &[Vec<usize>], match_l: &mut [usize], match_r: &mut [usize], dist: &mut [usize]) -> bool {
    // iterative DFS along the BFS layers
    let mut stack: Vec<(usize, usize)> = alloc::vec![(u, 0)];
    let mut path: Vec<(usize, usize)> = Vec::new();
    while let Some(&mut (x, ref mut next)) = stack.last_mut() {
        if *next >= adj[x].len() {
            dist[x] = usize::MAX;
            stack.pop();
            path.pop();
            continue;
        }
        let v = adj[x][*next];
        *next += 1;
        let w = match_r[v];
        if w == FREE {
            path.push((x, v));
            for &(a, b) in &path {
                match_l[a] = b;
                match_r[b] = a;
            }
            return true;
        }
        if dist[w] == dist[x].wrapping_add(1) {
            path.push((x, v));
            stack.push((w, 0));
        }
    }
    false
}
