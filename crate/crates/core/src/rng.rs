//! Seeded, platform-independent random streams.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::Vec3;
use crate::scalar::Real;

/// Independent generator identified by `(master_seed, stream_index)`.
///
/// ChaCha8 keyed by the master seed, with the stream index selecting the
/// ChaCha stream, so each trajectory gets a non-overlapping sequence and
/// the draws do not depend on scheduling.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
    master_seed: u64,
    stream_index: u64,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            rng,
            master_seed,
            stream_index,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Standard normal draw.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Bernoulli draw with success probability `p`.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Three independent N(0, variance) components.
    pub fn gaussian_vec3<T: Real>(&mut self, variance: T) -> Vec3<T> {
        let sd = variance.sqrt();
        Vec3::new(
            T::lit(self.normal()) * sd,
            T::lit(self.normal()) * sd,
            T::lit(self.normal()) * sd,
        )
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Uniform point on the unit sphere (Archimedes: uniform `z`, uniform azimuth).
pub fn sample_uniform_sphere<T: Real>(rng: &mut RandomStream) -> Vec3<T> {
    let z = 2.0 * rng.uniform() - 1.0;
    let phi = std::f64::consts::TAU * rng.uniform();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let v = Vec3::new(r * phi.cos(), r * phi.sin(), z);
    // renormalize in the target precision so |v| = 1 to rounding
    let v: Vec3<T> = v.cast();
    v * v.norm().recip()
}
