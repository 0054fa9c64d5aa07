// Independent reference implementations used as test oracles. They share no
// code with the library beyond the public accessors used to read a state.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;

use evoter::{Bond, NetState, VertexId};
use rand::RngCore;

pub type Key = (Vec<u8>, Vec<(u32, u32)>);

pub fn key_of(state: &NetState) -> Key {
    let ops = state.opinions().to_vec();
    let edges = state.placements().iter().map(|b| (b.u().0.min(b.v().0), b.u().0.max(b.v().0))).collect();
    (ops, edges)
}

pub fn bond(u: u32, v: u32) -> Bond {
    Bond::new(VertexId(u), VertexId(v)).unwrap()
}

pub fn state(opinions: &[u8], edges: &[(u32, u32)]) -> NetState {
    NetState::from_parts(opinions.to_vec(), edges.iter().map(|&(u, v)| bond(u, v)).collect()).unwrap()
}

pub fn complete(n: u32, opinions: Option<Vec<u8>>) -> NetState {
    let edges: Vec<(u32, u32)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    state(&opinions.unwrap_or(vec![0; n as usize]), &edges)
}

/// Row-major coin per pair, then one coin per vertex; top bit of each draw.
pub fn initial_oracle(n: u32, rng: &mut dyn RngCore) -> Key {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.next_u64() & (1 << 63) != 0 {
                edges.push((u, v));
            }
        }
    }
    let ops = (0..n).map(|_| (rng.next_u64() & (1 << 63) != 0) as u8).collect();
    (ops, edges)
}

/// Brute-force one-step law.
///
/// `same`: rewire into the root's own class, else anywhere.
/// `direct`: choose among disagreeing edges, else among all edges with
/// agreeing choices as self-loops of the chain.
pub fn kernel_oracle(key: &Key, q: f64, same: bool, direct: bool) -> BTreeMap<Key, f64> {
    let (ops, edges) = key;
    let n = ops.len() as u32;
    let disagree = |&(u, v): &(u32, u32)| ops[u as usize] != ops[v as usize];
    let pool: Vec<usize> = (0..edges.len()).filter(|&i| !direct || disagree(&edges[i])).collect();
    let mut law: BTreeMap<Key, f64> = BTreeMap::new();
    let w = 1.0 / pool.len() as f64;
    for i in pool {
        if !disagree(&edges[i]) {
            *law.entry(key.clone()).or_default() += w;
            continue;
        }
        let (a, b) = edges[i];
        for root in [a, b] {
            let mut flipped = ops.clone();
            flipped[root as usize] ^= 1;
            *law.entry((flipped, edges.clone())).or_default() += w * 0.5 * q;
            let targets: Vec<u32> = (0..n)
                .filter(|&x| x != root && (!same || ops[x as usize] == ops[root as usize]))
                .collect();
            for &x in &targets {
                let mut moved = edges.clone();
                moved[i] = (root.min(x), root.max(x));
                *law.entry((ops.clone(), moved)).or_default() += w * 0.5 * (1.0 - q) / targets.len() as f64;
            }
        }
    }
    law
}

/// Adjacency-matrix Laplacian eigenvalues via Jacobi rotations; the
/// second smallest, scaled by `beta / (2n)`.
pub fn gap_oracle(state: &NetState, beta: f64) -> f64 {
    let n = state.n();
    let mut a = vec![vec![0.0f64; n]; n];
    for b in state.placements() {
        let (u, v) = (b.u().index(), b.v().index());
        a[u][v] -= 1.0;
        a[v][u] -= 1.0;
        a[u][u] += 1.0;
        a[v][v] += 1.0;
    }
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
                if a[p][q].abs() < 1e-15 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
        if off < 1e-24 {
            break;
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig[1].max(0.0) * beta / (2.0 * n as f64)
}

/// Exhaustive Cheeger constant over all subsets with `|S| <= n/2`.
pub fn cheeger_oracle(state: &NetState, beta: f64) -> f64 {
    let n = state.n();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) - 1 {
        let size = mask.count_ones() as usize;
        if size > n / 2 {
            continue;
        }
        let crossing = state
            .placements()
            .iter()
            .filter(|b| ((mask >> b.u().0) & 1) != ((mask >> b.v().0) & 1))
            .count();
        best = best.min(crossing as f64 * beta / (2.0 * size as f64 * n as f64));
    }
    best
}
