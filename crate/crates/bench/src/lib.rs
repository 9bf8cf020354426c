//! Shared fixtures for the benchmarks.

use precond_core::{generate_synthetic, EntryDist, SparseSymMatrix};

pub fn fixture(n: usize, sigma: f64, seed: u64) -> SparseSymMatrix {
    generate_synthetic(n, sigma, 1e-3, EntryDist::Uniform01, seed).expect("valid fixture parameters")
}
