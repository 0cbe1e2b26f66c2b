//! Seeded random streams.
//!
//! Every particle gets its own ChaCha8 stream whose 256-bit key is built
//! directly from `(base_seed, round, particle, domain)`, so two streams in a
//! run can only coincide if those tuples do.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Rng = ChaCha8Rng;

/// Stream domains keep particle streams apart from auxiliary ones (TI, ground truth).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Particle = 0,
    Auxiliary = 1,
    Reference = 2,
}

pub fn stream(base: u64, round: u64, index: u64, domain: Domain) -> Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key
        .chunks_exact_mut(8)
        .zip([base, round, index, domain as u64])
    {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    Rng::from_seed(key)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSeed {
    pub base: u64,
    pub round: u64,
}

impl RunSeed {
    pub fn new(base: u64, round: u64) -> Self {
        Self { base, round }
    }

    pub fn particle(&self, i: u64) -> Rng {
        stream(self.base, self.round, i, Domain::Particle)
    }

    pub fn auxiliary(&self, tag: u64) -> Rng {
        stream(self.base, self.round, tag, Domain::Auxiliary)
    }

    pub fn reference(&self, tag: u64) -> Rng {
        stream(self.base, self.round, tag, Domain::Reference)
    }
}

/// First output word of a stream, used to check streams are distinct.
pub fn fingerprint(rng: &Rng) -> u64 {
    let mut probe = rng.clone();
    probe.random::<u64>()
}

#[inline]
pub fn normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn fill_normal(rng: &mut Rng, out: &mut [f64]) {
    for v in out {
        *v = rng.sample(StandardNormal);
    }
}

#[inline]
pub fn uniform(rng: &mut Rng) -> f64 {
    rng.random::<f64>()
}
