//! Exact discrete optimal transport (Euclidean cost) by successive shortest
//! paths with potentials. Dense; meant for ≲ 10³ atoms per side.

use crate::point::Point;

/// Mass resolution used when weights are not uniform.
const GENERAL_SCALE: f64 = (1u64 << 32) as f64;

#[derive(Clone, Debug)]
pub struct TransportPlan {
    pub cost: f64,
    /// A 1-Lipschitz function evaluated at the source atoms, then at the
    /// target atoms, with `Σ a f(x) − Σ b f(y)` equal to `cost` at optimum.
    pub potential_src: Vec<f64>,
    pub potential_dst: Vec<f64>,
}

/// Integer masses on the common scale `2^32` (largest-remainder rounding).
fn integer_masses(w: &[f64]) -> (Vec<u64>, u64) {
    let n = w.len();
    let total = GENERAL_SCALE as u64;
    let raw: Vec<f64> = w.iter().map(|x| x * GENERAL_SCALE).collect();
    let mut m: Vec<u64> = raw.iter().map(|x| x.floor() as u64).collect();
    let short = total.saturating_sub(m.iter().sum());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| (raw[j] - raw[j].floor()).total_cmp(&(raw[i] - raw[i].floor())).then(i.cmp(&j)));
    for &i in order.iter().take(short as usize) {
        m[i] += 1;
    }
    (m, total)
}

/// Minimum-cost coupling of `(xs, a)` and `(ys, b)`, probability weights.
pub fn transport(xs: &[Point], a: &[f64], ys: &[Point], b: &[f64]) -> TransportPlan {
    let (n, m) = (xs.len(), ys.len());
    let both_uniform = [a, b]
        .iter()
        .all(|w| w.iter().all(|&x| (x - 1.0 / w.len() as f64).abs() <= 1e-15));
    // uniform weights are represented exactly: each source carries m units,
    // each target n units
    let (mut supply, mut demand, total) = if both_uniform {
        (vec![m as u64; n], vec![n as u64; m], (n * m) as u64)
    } else {
        let (s, t) = integer_masses(a);
        let (d, _) = integer_masses(b);
        (s, d, t)
    };
    let c: Vec<f64> = (0..n * m).map(|k| xs[k / m].dist(&ys[k % m])).collect();
    let mut flow = vec![0u64; n * m];
    let mut pu = vec![0.0f64; n];
    let mut pv = vec![0.0f64; m];

    let mut remaining: u64 = supply.iter().sum();
    while remaining > 0 {
        // dense Dijkstra on reduced costs; sources are nodes with supply left
        let inf = f64::INFINITY;
        let mut du = vec![inf; n];
        let mut dv = vec![inf; m];
        let mut prev_v = vec![usize::MAX; m]; // u that reached v
        let mut prev_u = vec![usize::MAX; n]; // v that reached u (reverse edge)
        let mut done_u = vec![false; n];
        let mut done_v = vec![false; m];
        for i in 0..n {
            if supply[i] > 0 {
                du[i] = 0.0;
            }
        }
        let sink = loop {
            // pick the closest unfinished node
            let mut best = (inf, usize::MAX, false);
            for i in 0..n {
                if !done_u[i] && du[i] < best.0 {
                    best = (du[i], i, true);
                }
            }
            for j in 0..m {
                if !done_v[j] && dv[j] < best.0 {
                    best = (dv[j], j, false);
                }
            }
            let (d, k, is_u) = best;
            assert!(k != usize::MAX, "transport: unreachable demand");
            if is_u {
                done_u[k] = true;
                for j in 0..m {
                    if done_v[j] {
                        continue;
                    }
                    let rc = (c[k * m + j] + pu[k] - pv[j]).max(0.0);
                    if d + rc < dv[j] {
                        dv[j] = d + rc;
                        prev_v[j] = k;
                    }
                }
            } else {
                done_v[k] = true;
                if demand[k] > 0 {
                    break k;
                }
                for i in 0..n {
                    if done_u[i] || flow[i * m + k] == 0 {
                        continue;
                    }
                    let rc = (pv[k] - pu[i] - c[i * m + k]).max(0.0);
                    if d + rc < du[i] {
                        du[i] = d + rc;
                        prev_u[i] = k;
                    }
                }
            }
        };
        let cap = dv[sink];
        for i in 0..n {
            pu[i] += du[i].min(cap);
        }
        for j in 0..m {
            pv[j] += dv[j].min(cap);
        }
        // bottleneck along the path
        let mut amount = demand[sink];
        let mut j = sink;
        loop {
            let i = prev_v[j];
            if prev_u[i] == usize::MAX {
                amount = amount.min(supply[i]);
                break;
            }
            let jp = prev_u[i];
            amount = amount.min(flow[i * m + jp]);
            j = jp;
        }
        let mut j = sink;
        loop {
            let i = prev_v[j];
            flow[i * m + j] += amount;
            if prev_u[i] == usize::MAX {
                supply[i] -= amount;
                break;
            }
            let jp = prev_u[i];
            flow[i * m + jp] -= amount;
            j = jp;
        }
        demand[sink] -= amount;
        remaining -= amount;
    }

    let cost = flow
        .iter()
        .zip(&c)
        .map(|(&f, &cc)| f as f64 * cc)
        .sum::<f64>()
        / total as f64;

    // c-transform of the target potential: 1-Lipschitz on the whole space
    let g: Vec<f64> = pv.iter().map(|p| -p).collect();
    let lip = |z: &Point| -> f64 {
        ys.iter()
            .zip(&g)
            .map(|(y, gy)| z.dist(y) + gy)
            .fold(f64::INFINITY, f64::min)
    };
    TransportPlan {
        cost,
        potential_src: xs.iter().map(lip).collect(),
        potential_dst: ys.iter().map(lip).collect(),
    }
}
