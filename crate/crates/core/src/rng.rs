use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Source of uniform draws on `[0, 1)`.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

/// A ChaCha8 stream keyed by a run seed, one independent stream per trial index.
#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Re-keys a freshly seeded stream; cheaper than `new` inside a hot loop.
    pub(crate) fn from_base(base: &ChaCha8Rng, stream: u64) -> Self {
        let mut rng = base.clone();
        rng.set_stream(stream);
        Self { rng }
    }

    pub(crate) fn base(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }
}

impl UniformSource for RandomStream {
    fn next_uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}
