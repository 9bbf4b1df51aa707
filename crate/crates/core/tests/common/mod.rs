#![allow(dead_code)]

pub mod oracle;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use sensetrack::model::{GaussianKernel, KernelSet, MarkovChain};

/// Random column-stochastic chain with entries bounded away from zero.
pub fn random_positive_chain<R: Rng>(rng: &mut R, n: usize) -> MarkovChain {
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|v| v / s).collect()
        })
        .collect();
    let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    let prior: Vec<f64> = raw.iter().map(|v| v / s).collect();
    MarkovChain::from_columns(&cols, &prior).unwrap()
}

/// Random symmetric positive-definite matrix.
pub fn random_spd<R: Rng>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let m = &a * a.transpose() + DMatrix::identity(d, d) * (0.2 + rng.random::<f64>());
    (&m + m.transpose()) * 0.5
}

/// Random Gaussian kernel set for `n` states in dimension `d`.
pub fn random_kernels<R: Rng>(rng: &mut R, n: usize, d: usize) -> KernelSet {
    KernelSet::new(
        (0..n)
            .map(|_| {
                let m = DVector::from_fn(d, |_, _| rng.random::<f64>() * 4.0 - 2.0);
                GaussianKernel::new(m, random_spd(rng, d)).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

/// Random scalar two-state kernels.
pub fn random_scalar_pair<R: Rng>(rng: &mut R) -> KernelSet {
    KernelSet::new(
        (0..2)
            .map(|_| GaussianKernel::scalar(rng.random::<f64>() * 6.0 - 3.0, 0.05 + rng.random::<f64>() * 3.0).unwrap())
            .collect(),
    )
    .unwrap()
}

pub fn uninformative(n: usize) -> KernelSet {
    KernelSet::new((0..n).map(|_| GaussianKernel::scalar(0.0, 1.0).unwrap()).collect()).unwrap()
}

pub fn scalar_set(means: &[f64], vars: &[f64]) -> KernelSet {
    KernelSet::new(means.iter().zip(vars).map(|(&m, &v)| GaussianKernel::scalar(m, v).unwrap()).collect()).unwrap()
}

/// Random point on the simplex.
pub fn random_belief<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}
