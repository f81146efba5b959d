//! Seeded randomness for fixtures and sampling.
//!
//! The generator is ChaCha20 keyed by the 64-bit seed (little-endian in the
//! first eight key bytes, remaining 24 bytes zero) with the stream id set to
//! an instance counter. Each draw takes one `u64` word from the keystream and
//! maps it to `[0, 1)` as `(word >> 11) * 2^-53`. All derived quantities
//! (complex boxes, disks, annuli) are built from these uniforms only, so the
//! sequence is reproducible from any ChaCha20 implementation.

use std::f64::consts::TAU;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::matrix_kernel::{ComplexMatrix, C64};

#[derive(Clone, Debug)]
pub struct SeededRng {
    inner: ChaCha20Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, len: usize) -> usize {
        ((self.uniform() * len as f64) as usize).min(len - 1)
    }

    /// Real and imaginary parts independently uniform on `[-r, r]`.
    pub fn complex_box(&mut self, r: f64) -> C64 {
        let re = self.range(-r, r);
        let im = self.range(-r, r);
        C64::new(re, im)
    }

    /// Uniform on the disk of radius `r`.
    pub fn disk(&mut self, r: f64) -> C64 {
        let rad = r * self.uniform().sqrt();
        let theta = TAU * self.uniform();
        C64::from_polar(rad, theta)
    }

    /// Modulus uniform on `[rmin, rmax]`, argument uniform.
    pub fn annulus(&mut self, rmin: f64, rmax: f64) -> C64 {
        let rad = self.range(rmin, rmax);
        let theta = TAU * self.uniform();
        C64::from_polar(rad, theta)
    }

    pub fn matrix(&mut self, n: usize, r: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |_, _| self.complex_box(r))
    }

    pub fn vector(&mut self, n: usize, r: f64) -> Vec<C64> {
        (0..n).map(|_| self.complex_box(r)).collect()
    }
}
