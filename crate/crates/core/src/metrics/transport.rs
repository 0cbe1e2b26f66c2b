//! Exact optimal transport between uniform empirical measures with squared
//! Euclidean cost.

use crate::error::{invalid, Error, Result};
use crate::targets::SampleSet;

/// Minimum-cost perfect matching on a square cost matrix (row-major) by
/// shortest augmenting paths with potentials. Returns the column of each row.
pub fn assignment(cost: &[f64], n: usize) -> Vec<usize> {
    // 1-based arrays as in the classic formulation; column 0 is the virtual root.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col = vec![0; n];
    for j in 1..=n {
        col[p[j] - 1] = j - 1;
    }
    col
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Sum after sorting, so equal multisets of terms give identical totals.
pub(crate) fn canonical_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.total_cmp(b));
    terms.iter().sum()
}

/// Successive shortest paths on the transportation network with integer
/// supplies m at each of the n sources and demands n at each of the m sinks.
fn min_cost_flow(cost: &[f64], n: usize, m: usize) -> Result<Vec<f64>> {
    let nodes = n + m;
    let mut supply = vec![m as i64; n];
    let mut demand = vec![n as i64; m];
    // flow[i*m + j], residual reverse capacity equals the flow.
    let mut flow = vec![0i64; n * m];
    let mut pot = vec![0.0f64; nodes];
    let mut terms = Vec::new();
    let total = (n * m) as i64;
    let mut shipped = 0i64;
    while shipped < total {
        // Dijkstra from every source with remaining supply (multi-source).
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev = vec![usize::MAX; nodes];
        let mut done = vec![false; nodes];
        for i in 0..n {
            if supply[i] > 0 {
                dist[i] = 0.0;
            }
        }
        loop {
            let mut best = usize::MAX;
            let mut bd = f64::INFINITY;
            for k in 0..nodes {
                if !done[k] && dist[k] < bd {
                    bd = dist[k];
                    best = k;
                }
            }
            if best == usize::MAX {
                break;
            }
            done[best] = true;
            if best < n {
                let i = best;
                for j in 0..m {
                    let nd = bd + cost[i * m + j] + pot[i] - pot[n + j];
                    if !done[n + j] && nd < dist[n + j] {
                        dist[n + j] = nd;
                        prev[n + j] = i;
                    }
                }
            } else {
                let j = best - n;
                for i in 0..n {
                    if flow[i * m + j] > 0 {
                        let nd = bd - cost[i * m + j] + pot[n + j] - pot[i];
                        if !done[i] && nd < dist[i] {
                            dist[i] = nd;
                            prev[i] = best;
                        }
                    }
                }
            }
        }
        let sink = (0..m)
            .filter(|&j| demand[j] > 0 && dist[n + j].is_finite())
            .min_by(|&a, &b| dist[n + a].total_cmp(&dist[n + b]))
            .ok_or_else(|| Error::Internal("transport network became infeasible".into()))?;
        let cap = dist[n + sink];
        for k in 0..nodes {
            pot[k] += dist[k].min(cap);
        }
        // Walk back to a source with supply, taking the bottleneck over reverse edges.
        let mut amount = demand[sink];
        let mut node = n + sink;
        let origin = loop {
            let i = prev[node];
            if prev[i] == usize::MAX {
                break i;
            }
            let back = prev[i];
            amount = amount.min(flow[i * m + (back - n)]);
            node = back;
        };
        amount = amount.min(supply[origin]);
        let mut node = n + sink;
        loop {
            let i = prev[node];
            flow[i * m + (node - n)] += amount;
            if prev[i] == usize::MAX {
                break;
            }
            let back = prev[i];
            flow[i * m + (back - n)] -= amount;
            node = back;
        }
        supply[origin] -= amount;
        demand[sink] -= amount;
        shipped += amount;
    }
    for i in 0..n {
        for j in 0..m {
            if flow[i * m + j] > 0 {
                terms.push(flow[i * m + j] as f64 * cost[i * m + j]);
            }
        }
    }
    Ok(terms)
}

/// √(min over couplings of E‖X − Y‖²) between the two uniform empirical measures.
pub fn w2_empirical(x: &SampleSet, y: &SampleSet) -> Result<f64> {
    if x.dim != y.dim {
        return invalid("W2 sample sets differ in dimension");
    }
    let (n, m) = (x.len(), y.len());
    let mut cost = vec![0.0; n * m];
    for (i, a) in x.rows().enumerate() {
        for (j, b) in y.rows().enumerate() {
            cost[i * m + j] = sq_dist(a, b);
        }
    }
    let total = if n == m {
        let col = assignment(&cost, n);
        canonical_sum((0..n).map(|i| cost[i * n + col[i]]).collect()) / n as f64
    } else {
        canonical_sum(min_cost_flow(&cost, n, m)?) / (n * m) as f64
    };
    Ok(total.max(0.0).sqrt())
}
