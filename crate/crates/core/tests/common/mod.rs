//! Independent reference computations shared by the integration tests.
//! Nothing here goes through the library's assembly or solver paths.

#![allow(dead_code)]

use ddtruss::{MaterialDataset, TrussConfig};

/// Textbook direct-stiffness solve of a linear-elastic planar truss:
/// global 4×4 element matrices `EA/L [c² cs; cs s²]` scattered into the
/// full 2n system, supports removed by deleting rows and columns, loads
/// scaled by `lambda`. Returns displacements keyed as `(node id, ux, uy)`.
pub fn direct_stiffness(cfg: &TrussConfig, modulus: f64, lambda: f64) -> Vec<(String, f64, f64)> {
    let n = cfg.nodes.len();
    let pos = |id: &str| cfg.nodes.iter().position(|nd| nd.id.0 == id).unwrap();
    let mut k = vec![vec![0.0; 2 * n]; 2 * n];
    for m in &cfg.members {
        let (a, b) = (pos(&m.from.0), pos(&m.to.0));
        let dx = cfg.nodes[b].x - cfg.nodes[a].x;
        let dy = cfg.nodes[b].y - cfg.nodes[a].y;
        let l = (dx * dx + dy * dy).sqrt();
        let (c, s) = (dx / l, dy / l);
        let ke = modulus * m.area / l;
        let local = [[c * c, c * s], [c * s, s * s]];
        let dofs = [2 * a, 2 * a + 1, 2 * b, 2 * b + 1];
        for i in 0..4 {
            for j in 0..4 {
                let sign = if (i < 2) == (j < 2) { 1.0 } else { -1.0 };
                k[dofs[i]][dofs[j]] += sign * ke * local[i % 2][j % 2];
            }
        }
    }
    let mut f = vec![0.0; 2 * n];
    for ld in &cfg.loads {
        let i = pos(&ld.node.0);
        f[2 * i] += lambda * ld.fx;
        f[2 * i + 1] += lambda * ld.fy;
    }
    let free: Vec<usize> = (0..2 * n)
        .filter(|&d| {
            let nd = &cfg.nodes[d / 2];
            if d % 2 == 0 {
                !nd.fixed_x
            } else {
                !nd.fixed_y
            }
        })
        .collect();
    let kr: Vec<Vec<f64>> = free.iter().map(|&i| free.iter().map(|&j| k[i][j]).collect()).collect();
    let fr: Vec<f64> = free.iter().map(|&i| f[i]).collect();
    let ur = gauss_solve(kr, fr);
    let mut full = vec![0.0; 2 * n];
    for (idx, &d) in free.iter().enumerate() {
        full[d] = ur[idx];
    }
    cfg.nodes
        .iter()
        .enumerate()
        .map(|(i, nd)| (nd.id.0.clone(), full[2 * i], full[2 * i + 1]))
        .collect()
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (x, p) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Root of a monotone increasing `g` on `[lo, hi]` by bisection to
/// machine resolution.
pub fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(g(lo) <= 0.0 && g(hi) >= 0.0, "root not bracketed");
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Brute-force leave-one-out: rebuilds the reduced dataset for every held
/// out point and evaluates the plain Gaussian-weighted mean without any
/// exponent shifting.
pub fn brute_force_loo_alpha(data: &MaterialDataset, grid: &[f64]) -> f64 {
    let pts = data.points();
    let mut best = (f64::NAN, f64::INFINITY);
    for &alpha in grid {
        let mut err = 0.0;
        for j in 0..pts.len() {
            let rest: Vec<_> = pts
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, p)| *p)
                .collect();
            let w: Vec<f64> = rest
                .iter()
                .map(|p| (-alpha * (pts[j].strain - p.strain).powi(2)).exp())
                .collect();
            let pred = w.iter().zip(&rest).map(|(w, p)| w * p.stress).sum::<f64>() / w.iter().sum::<f64>();
            err += (pts[j].stress - pred).powi(2);
        }
        if err < best.1 || (err == best.1 && alpha < best.0) {
            best = (alpha, err);
        }
    }
    best.0
}

/// Naive evaluation of `Σ c_k T_k(t) − c_0/2` via the three-term recurrence
/// for `T_k` on the mapped point.
pub fn naive_series(coeffs: &[f64], domain: (f64, f64), x: f64) -> f64 {
    let t = (2.0 * x - domain.0 - domain.1) / (domain.1 - domain.0);
    let (mut t0, mut t1) = (1.0, t);
    let mut sum = 0.5 * coeffs[0];
    for (k, c) in coeffs.iter().enumerate().skip(1) {
        if k > 1 {
            let t2 = 2.0 * t * t1 - t0;
            t0 = t1;
            t1 = t2;
        }
        sum += c * t1;
    }
    sum
}
