//! Splittable, counter-based random streams.
//!
//! A stream is identified by a root seed plus a hierarchical path of child
//! ids. The pair is hashed into a ChaCha8 key, and every draw is addressed by
//! its position in the keystream, so a matrix of uniforms comes out the same
//! whether it is filled in one pass or in parallel chunks.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    path: Vec<u64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub(crate) fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, path: Vec::new() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Independent sub-stream `id` of this stream.
    pub fn child(&self, id: u64) -> Self {
        let mut path = self.path.clone();
        path.push(id);
        Self { seed: self.seed, path }
    }

    /// Sub-stream addressed by a label, for readability at call sites.
    pub fn named(&self, label: &str) -> Self {
        // FNV-1a
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self.child(h)
    }

    fn key(&self) -> [u8; 32] {
        let mut state = splitmix64(self.seed);
        let mut words = [0u64; 4];
        for (depth, &id) in self.path.iter().enumerate() {
            state = splitmix64(state ^ splitmix64(id.wrapping_add(depth as u64 + 1)));
        }
        for (i, w) in words.iter_mut().enumerate() {
            state = splitmix64(state.wrapping_add(i as u64));
            *w = state;
        }
        let mut key = [0u8; 32];
        for (i, w) in words.iter().enumerate() {
            key[i * 8..(i + 1) * 8].copy_from_slice(&w.to_le_bytes());
        }
        key
    }

    /// Generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key())
    }

    /// Generator positioned at the `index`-th 64-bit draw.
    pub fn generator_at(&self, index: u64) -> ChaCha8Rng {
        let mut g = self.generator();
        g.set_word_pos(u128::from(index) * 2);
        g
    }

    /// Uniform draw number `index` in `[0, 1)`.
    pub fn uniform_at(&self, index: u64) -> f64 {
        unit_f64(self.generator_at(index).next_u64())
    }

    /// `len` uniforms in `[0, 1)`; element `i` is always draw number `i`.
    pub fn uniform_vec(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let mut g = self.generator_at((c * CHUNK) as u64);
            for v in chunk.iter_mut() {
                *v = unit_f64(g.next_u64());
            }
        });
        out
    }

    /// Row-major matrix of uniforms in `[0, 1)`.
    pub fn uniform_matrix(&self, rows: usize, cols: usize) -> Array2<f64> {
        Array2::from_shape_vec((rows, cols), self.uniform_vec(rows * cols))
            .expect("shape matches length")
    }

    /// Uniform matrix scaled into the box `[lower_j, upper_j]` per column.
    pub fn uniform_in_box(&self, rows: usize, lower: &[f64], upper: &[f64]) -> Array2<f64> {
        let mut m = self.uniform_matrix(rows, lower.len());
        for mut row in m.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = lower[j] + *v * (upper[j] - lower[j]);
            }
        }
        m
    }

    /// Uniformly random permutation of `0..n`.
    pub fn permutation(&self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut self.generator());
        idx
    }

    /// `count` integers drawn uniformly from `0..n` (with replacement).
    pub fn indices(&self, count: usize, n: usize) -> Vec<usize> {
        self.uniform_vec(count)
            .into_iter()
            .map(|u| ((u * n as f64) as usize).min(n - 1))
            .collect()
    }
}
