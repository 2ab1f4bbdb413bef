#![allow(dead_code)]

use collapse_core::linalg::{ComplexMatrix, C64};
use collapse_core::model::{sample_uniform_state, sample_unitary, DensityMatrix, StateVector};
use collapse_core::RngStream;
use rand::Rng;

pub fn rng(seed: u64) -> RngStream {
    RngStream::new(seed)
}

pub fn random_state(dim: usize, rng: &mut RngStream) -> StateVector {
    sample_uniform_state(dim, rng)
}

/// `U diag(w) U†` with Dirichlet-like weights on the first `rank` slots.
pub fn random_density(dim: usize, rank: usize, rng: &mut RngStream) -> DensityMatrix {
    let u = sample_unitary(dim, rng);
    let mut w: Vec<f64> = (0..dim)
        .map(|i| if i < rank { rng.random::<f64>() + 0.05 } else { 0.0 })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let m = &(&u * &ComplexMatrix::from_real_diagonal(&w)) * &u.adjoint();
    DensityMatrix::new(m.hermitian_part()).expect("valid density matrix")
}

pub fn random_hermitian(dim: usize, rng: &mut RngStream) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    g.hermitian_part()
}

pub fn random_p(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
