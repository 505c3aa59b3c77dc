//! Brute-force reference computations shared by the integration tests.
//!
//! Everything here works on explicit full-register matrices built with
//! Kronecker products and never calls `PureState::apply` or the partial
//! trace in the library.

#![allow(dead_code)]

use num_complex::Complex64;
use qwsn::{Amplitude, PureState};
use rand::Rng;

pub type Mat = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Mat {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
                .collect()
        })
        .collect()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn kron_all(ms: &[Mat]) -> Mat {
    ms.iter()
        .skip(1)
        .fold(ms[0].clone(), |acc, m| kron(&acc, m))
}

pub fn matvec(m: &Mat, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn h() -> Mat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]]
}

pub fn x() -> Mat {
    vec![
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(1.0, 0.0), c(0.0, 0.0)],
    ]
}

pub fn z() -> Mat {
    vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(-1.0, 0.0)],
    ]
}

pub fn i2() -> Mat {
    identity(2)
}

/// Full-register permutation matrix: `|i> -> |f(i)>`.
pub fn perm(n: usize, f: impl Fn(usize) -> usize) -> Mat {
    let dim = 1 << n;
    let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
    for i in 0..dim {
        m[f(i)][i] = c(1.0, 0.0);
    }
    m
}

fn bit(i: usize, n: usize, q: usize) -> usize {
    (i >> (n - q)) & 1
}

/// Controlled-NOT on an n-qubit register (1-based, qubit 1 most significant).
pub fn cnot(n: usize, control: usize, target: usize) -> Mat {
    perm(n, |i| {
        if bit(i, n, control) == 1 {
            i ^ (1 << (n - target))
        } else {
            i
        }
    })
}

pub fn ccnot(n: usize, c1: usize, c2: usize, target: usize) -> Mat {
    perm(n, |i| {
        if bit(i, n, c1) == 1 && bit(i, n, c2) == 1 {
            i ^ (1 << (n - target))
        } else {
            i
        }
    })
}

/// Stages phi_0..phi_4 of the Feynman circuit as plain vectors.
pub fn feynman_stages(alpha: Complex64, beta: Complex64) -> Vec<Vec<Complex64>> {
    let mut phi0 = vec![c(0.0, 0.0); 8];
    phi0[0] = alpha;
    phi0[4] = beta;
    let steps = [
        kron_all(&[i2(), h(), i2()]),
        cnot(3, 2, 3),
        cnot(3, 1, 2),
        kron_all(&[h(), i2(), i2()]),
    ];
    let mut out = vec![phi0];
    for m in &steps {
        let next = matvec(m, out.last().unwrap());
        out.push(next);
    }
    out
}

/// Stages of the ancilla Toffoli circuit, ancilla (qubit 4) projected onto |1>.
pub fn toffoli_stages(alpha: Complex64, beta: Complex64) -> Vec<Vec<Complex64>> {
    let mut phi0 = vec![c(0.0, 0.0); 16];
    phi0[0b0001] = alpha;
    phi0[0b1001] = beta;
    let steps = [
        kron_all(&[i2(), h(), i2(), i2()]),
        ccnot(4, 2, 4, 3),
        ccnot(4, 1, 4, 2),
        kron_all(&[h(), i2(), i2(), i2()]),
    ];
    let mut full = vec![phi0];
    for m in &steps {
        let next = matvec(m, full.last().unwrap());
        full.push(next);
    }
    full.into_iter()
        .map(|v| {
            assert!(
                v.iter().step_by(2).all(|a| a.norm() < 1e-14),
                "ancilla left |1>"
            );
            v.into_iter().skip(1).step_by(2).collect()
        })
        .collect()
}

/// Brute-force partial trace: rho_keep[a][b] = sum over the rest of psi[a,r] psi*[b,r].
pub fn partial_trace(psi: &[Complex64], n: usize, keep: &[usize]) -> Mat {
    let dim_k = 1 << keep.len();
    let mut rho = vec![vec![c(0.0, 0.0); dim_k]; dim_k];
    let sub = |i: usize| keep.iter().fold(0, |acc, &q| (acc << 1) | bit(i, n, q));
    let rest = |i: usize| {
        (1..=n)
            .filter(|q| !keep.contains(q))
            .fold(0, |acc, q| (acc << 1) | bit(i, n, q))
    };
    for i in 0..psi.len() {
        for j in 0..psi.len() {
            if rest(i) == rest(j) {
                rho[sub(i)][sub(j)] += psi[i] * psi[j].conj();
            }
        }
    }
    rho
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Random normalized (alpha, beta) with complex components.
pub fn random_qubit<R: Rng>(rng: &mut R) -> (Amplitude, Amplitude) {
    loop {
        let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return (c(v[0] / norm, v[1] / norm), c(v[2] / norm, v[3] / norm));
        }
    }
}

pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> PureState {
    let raw: Vec<Complex64> = (0..1 << n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    PureState::from_amplitudes(n, raw.into_iter().map(|a| a / norm).collect()).unwrap()
}

/// The pre-measurement pattern (a/2, b/2, b/2, a/2, a/2, -b/2, -b/2, a/2).
pub fn final_pattern(alpha: Complex64, beta: Complex64) -> Vec<Complex64> {
    vec![
        alpha / 2.0,
        beta / 2.0,
        beta / 2.0,
        alpha / 2.0,
        alpha / 2.0,
        -beta / 2.0,
        -beta / 2.0,
        alpha / 2.0,
    ]
}
