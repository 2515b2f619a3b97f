//! Independent reference computations used to freeze expected values.
//!
//! Nothing here goes through `Dynamics::transport`, `chain_ket` or the probe
//! evolution: step matrices are written out by hand and the joint
//! particle-probe space is built explicitly with Kronecker products.

#![allow(dead_code)]

use nested_mzi::C64;

pub type Mat = Vec<Vec<C64>>;
pub type Vec3 = Vec<C64>;

pub const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Builds a matrix from columns (images of source basis kets).
pub fn from_columns(cols: &[[f64; 3]]) -> Mat {
    let n = cols[0].len();
    (0..n)
        .map(|i| cols.iter().map(|col| c(col[i])).collect())
        .collect()
}

/// The four step matrices of the nested interferometer.
pub fn mzi_steps(alpha2: f64) -> Vec<Mat> {
    let a = alpha2.sqrt();
    let b = (1.0 - alpha2).sqrt();
    vec![
        from_columns(&[[a, b, 0.0], [-b, a, 0.0], [0.0, 0.0, 1.0]]),
        from_columns(&[[1.0, 0.0, 0.0], [0.0, R, R], [0.0, R, -R]]),
        from_columns(&[[1.0, 0.0, 0.0], [0.0, -R, R], [0.0, R, R]]),
        from_columns(&[[a, b, 0.0], [b, -a, 0.0], [0.0, 0.0, 1.0]]),
    ]
}

/// Steps with splitters 3 and 4 replaced by straight-through routing.
pub fn no_bs34_steps(alpha2: f64) -> Vec<Mat> {
    let mut s = mzi_steps(alpha2);
    s[2] = from_columns(&[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
    s[3] = from_columns(&[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
    s
}

pub fn matvec(m: &Mat, v: &[C64]) -> Vec<C64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum())
                .collect()
        })
        .collect()
}

pub fn diag(d: &[f64]) -> Mat {
    let n = d.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { c(d[i]) } else { c(0.0) })
                .collect()
        })
        .collect()
}

pub fn identity(n: usize) -> Mat {
    diag(&vec![1.0; n])
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Dense product `P_last T ... P_1 T v`. `events[t]` is the projector at time
/// `t` (or `None` for the identity), for `t = 1..=steps.len()`.
pub fn chain_oracle(steps: &[Mat], initial: &[C64], events: &[Option<Mat>]) -> Vec<C64> {
    let mut v = initial.to_vec();
    let last = events.iter().rposition(Option::is_some).unwrap_or(0);
    for t in 1..=last {
        v = matvec(&steps[t - 1], &v);
        if let Some(p) = &events[t] {
            v = matvec(p, &v);
        }
    }
    v
}

/// Joint particle-probe evolution in the explicit `3 ⊗ 2^n` product space.
/// Probe `k` is the `k`-th qubit (most significant first in the Kronecker
/// order); `couplings[k]` lists `(time, channel index)` pairs. Returns the
/// amplitude array indexed `[channel][kappa]` with bit `k` of kappa set when
/// probe `k` is excited.
pub fn joint_oracle(
    steps: &[Mat],
    couplings: &[Vec<(usize, usize)>],
    epsilon: f64,
    completion_phase: Option<f64>,
) -> Vec<Vec<C64>> {
    let n = couplings.len();
    let probe_dim = 1usize << n;
    let eta = epsilon.sqrt();
    let zeta = (1.0 - epsilon).sqrt();
    let ph = completion_phase.map_or(c(1.0), |t| C64::from_polar(1.0, t));
    let rot: Mat = vec![vec![c(zeta), ph * -eta], vec![c(eta), ph * zeta]];

    // operator acting on probe k only
    let id2 = identity(2);
    let on_probe = |k: usize, op: &Mat| -> Mat {
        let mut m = vec![vec![c(1.0)]];
        for q in 0..n {
            m = kron(&m, if q == k { op } else { &id2 });
        }
        m
    };

    let mut state = vec![c(0.0); 3 * probe_dim];
    state[0] = c(1.0); // |S0> ⊗ |0...0>

    for t in 0..=steps.len() {
        for (k, list) in couplings.iter().enumerate() {
            for &(time, ch) in list {
                if time != t {
                    continue;
                }
                let mut p = vec![0.0; 3];
                p[ch] = 1.0;
                let mut q = vec![1.0; 3];
                q[ch] = 0.0;
                let u = add(
                    &kron(&diag(&p), &on_probe(k, &rot)),
                    &kron(&diag(&q), &identity(probe_dim)),
                );
                state = matvec(&u, &state);
            }
        }
        if t < steps.len() {
            state = matvec(&kron(&steps[t], &identity(probe_dim)), &state);
        }
    }

    // Kronecker index: channel * probe_dim + probe bits with probe 0 most significant
    let mut out = vec![vec![c(0.0); probe_dim]; 3];
    for ch in 0..3 {
        for idx in 0..probe_dim {
            let mut kappa = 0usize;
            for k in 0..n {
                if idx >> (n - 1 - k) & 1 == 1 {
                    kappa |= 1 << k;
                }
            }
            out[ch][kappa] = state[ch * probe_dim + idx];
        }
    }
    out
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub const ALPHA_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
