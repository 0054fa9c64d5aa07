//! Spectral gap of the walk generator `(beta / 2n) L`, `L` the multigraph
//! Laplacian.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{NetState, VertexId};

/// Above this size the gap is computed by Lanczos instead of a dense solve.
pub const DENSE_MAX_N: usize = 512;

const LANCZOS_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapMethod {
    Dense,
    Lanczos,
    /// Disconnected or isolated vertex: the gap is zero by definition.
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralGap {
    pub lambda: f64,
    pub disconnected: bool,
    pub method: GapMethod,
}

/// Dense multigraph Laplacian `D - A`.
pub fn laplacian(state: &NetState) -> DMatrix<f64> {
    let n = state.n();
    let mut l = DMatrix::zeros(n, n);
    for (b, m) in state.occupied_bonds() {
        let (u, v, m) = (b.u().index(), b.v().index(), m as f64);
        l[(u, v)] -= m;
        l[(v, u)] -= m;
        l[(u, u)] += m;
        l[(v, v)] += m;
    }
    l
}

pub fn is_connected(state: &NetState) -> bool {
    let n = state.n();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = stack.pop() {
        for &e in state.incident(VertexId(v as u32)) {
            let u = state.placement(e).other(VertexId(v as u32)).index();
            if !seen[u] {
                seen[u] = true;
                reached += 1;
                stack.push(u);
            }
        }
    }
    reached == n
}

pub fn spectral_gap(state: &NetState, beta: f64) -> SpectralGap {
    let method = if state.n() <= DENSE_MAX_N { GapMethod::Dense } else { GapMethod::Lanczos };
    spectral_gap_with(state, beta, method)
}

/// Forces the solver; `Trivial` is still returned for disconnected graphs.
pub fn spectral_gap_with(state: &NetState, beta: f64, method: GapMethod) -> SpectralGap {
    let n = state.n();
    if n < 2 || !is_connected(state) {
        return SpectralGap {
            lambda: 0.0,
            disconnected: true,
            method: GapMethod::Trivial,
        };
    }
    let scale = beta / (2.0 * n as f64);
    let l2 = match method {
        GapMethod::Dense | GapMethod::Trivial => {
            let mut ev: Vec<f64> = SymmetricEigen::new(laplacian(state)).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev[1]
        }
        GapMethod::Lanczos => lanczos_fiedler(state),
    };
    SpectralGap {
        lambda: scale * l2.max(0.0),
        disconnected: false,
        method: if method == GapMethod::Trivial { GapMethod::Dense } else { method },
    }
}

fn laplacian_apply(adj: &[Vec<(usize, f64)>], deg: &[f64], x: &DVector<f64>, out: &mut DVector<f64>) {
    for v in 0..deg.len() {
        let mut acc = deg[v] * x[v];
        for &(u, m) in &adj[v] {
            acc -= m * x[u];
        }
        out[v] = acc;
    }
}

fn project_out_constant(x: &mut DVector<f64>) {
    let mean = x.mean();
    x.add_scalar_mut(-mean);
}

/// Smallest Laplacian eigenvalue on the complement of the constant vector,
/// by Lanczos with full reorthogonalisation.
fn lanczos_fiedler(state: &NetState) -> f64 {
    let n = state.n();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut deg = vec![0.0; n];
    for (b, m) in state.occupied_bonds() {
        let (u, v, m) = (b.u().index(), b.v().index(), m as f64);
        adj[u].push((v, m));
        adj[v].push((u, m));
        deg[u] += m;
        deg[v] += m;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a9c);
    let mut q = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
    project_out_constant(&mut q);
    q /= q.norm();

    let max_iter = (n - 1).min(400);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(max_iter);
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = DVector::zeros(n);
    let mut previous = f64::INFINITY;
    let mut estimate = f64::INFINITY;
    for j in 0..max_iter {
        basis.push(q.clone());
        laplacian_apply(&adj, &deg, &q, &mut w);
        let a = q.dot(&w);
        alpha.push(a);
        for _ in 0..2 {
            project_out_constant(&mut w);
            for b in &basis {
                let c = b.dot(&w);
                w.axpy(-c, b, 1.0);
            }
        }
        project_out_constant(&mut w);
        let bnorm = w.norm();
        if j % 5 == 4 || bnorm < 1e-12 || j + 1 == max_iter {
            estimate = smallest_tridiagonal(&alpha, &beta);
            if (previous - estimate).abs() <= LANCZOS_TOL * estimate.abs().max(1e-300) || bnorm < 1e-12 {
                break;
            }
            previous = estimate;
        }
        beta.push(bnorm);
        q = &w / bnorm;
    }
    estimate
}

fn smallest_tridiagonal(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    SymmetricEigen::new(t).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}
