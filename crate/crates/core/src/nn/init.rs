//! Weight initialization: Glorot-uniform feedforward weights and orthogonal
//! recurrent matrices.

use super::tensor::Tensor;
use crate::rng::SeededRng;

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
pub fn glorot_uniform(rng: &mut SeededRng, rows: usize, cols: usize) -> Tensor {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.range_f64(-limit, limit)).collect();
    Tensor::from_vec(&[rows, cols], data)
}

/// Random n x n orthogonal matrix: Householder QR of a Gaussian matrix with
/// the R-diagonal sign correction.
pub fn orthogonal(rng: &mut SeededRng, n: usize) -> Tensor {
    let mut a: Vec<f64> = (0..n * n).map(|_| rng.normal()).collect();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);

    for k in 0..n {
        let mut v: Vec<f64> = (k..n).map(|i| a[i * n + k]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 < 1e-300 {
            reflectors.push(Vec::new());
            continue;
        }
        // apply H = I - 2 v v^T / (v.v) to the trailing block of A
        for c in k..n {
            let dot: f64 = v.iter().enumerate().map(|(i, &vi)| vi * a[(k + i) * n + c]).sum();
            let f = 2.0 * dot / vnorm2;
            for (i, &vi) in v.iter().enumerate() {
                a[(k + i) * n + c] -= f * vi;
            }
        }
        reflectors.push(v);
    }

    let signs: Vec<f64> = (0..n)
        .map(|j| if a[j * n + j] < 0.0 { -1.0 } else { 1.0 })
        .collect();

    // Q = H_0 H_1 ... H_{n-1}, formed by applying reflectors to I in reverse
    let mut q = vec![0.0; n * n];
    for j in 0..n {
        q[j * n + j] = 1.0;
    }
    for k in (0..n).rev() {
        let v = &reflectors[k];
        if v.is_empty() {
            continue;
        }
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        for c in 0..n {
            let dot: f64 = v.iter().enumerate().map(|(i, &vi)| vi * q[(k + i) * n + c]).sum();
            let f = 2.0 * dot / vnorm2;
            for (i, &vi) in v.iter().enumerate() {
                q[(k + i) * n + c] -= f * vi;
            }
        }
    }
    // sign-correct columns so the factorization is unique and Haar-like
    for j in 0..n {
        if signs[j] < 0.0 {
            for i in 0..n {
                q[i * n + j] = -q[i * n + j];
            }
        }
    }
    Tensor::from_vec(&[n, n], q)
}
