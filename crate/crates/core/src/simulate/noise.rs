use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Source of independent standard normal deviates.
pub trait NoiseSource {
    fn standard_normal(&mut self) -> f64;
}

/// Always returns 0. Turns the SDEs into their deterministic skeleton.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn standard_normal(&mut self) -> f64 {
        0.0
    }
}

/// Seeded Gaussian stream: ChaCha8 uniforms fed through the Marsaglia polar
/// method. Both deviates of each accepted pair are used, in order.
///
/// Stream `i` of master seed `s` is ChaCha8 seeded with `s` and positioned on
/// stream number `i`, so each path owns its randomness no matter which worker
/// runs it.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    /// Underlying uniform generator, for draws that are not Gaussian.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

impl NoiseSource for GaussianStream {
    fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.rng.random::<f64>() - 1.0;
            let v = 2.0 * self.rng.random::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

/// Increments of the two correlated Wiener processes over one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WienerPair {
    dw1: f64,
    dw2: f64,
}

impl WienerPair {
    /// `dw1 = √dt·z1`, `dw2 = √dt·(ρ·z1 + √(1−ρ²)·z2)` for independent standard normals.
    pub fn from_standard_normals(rho: f64, dt: f64, z1: f64, z2: f64) -> Self {
        let sq = dt.sqrt();
        let dw1 = sq * z1;
        let dw2 = if rho == 1.0 {
            dw1
        } else if rho == -1.0 {
            -dw1
        } else {
            sq * (rho * z1 + (1.0 - rho * rho).sqrt() * z2)
        };
        Self { dw1, dw2 }
    }

    pub fn dw1(&self) -> f64 {
        self.dw1
    }

    pub fn dw2(&self) -> f64 {
        self.dw2
    }
}

/// Draws one correlated pair. Always consumes two deviates, even for |ρ| = 1,
/// so a stream stays aligned across correlation settings.
pub fn correlated_increments<N: NoiseSource + ?Sized>(rho: f64, dt: f64, noise: &mut N) -> WienerPair {
    let z1 = noise.standard_normal();
    let z2 = noise.standard_normal();
    WienerPair::from_standard_normals(rho, dt, z1, z2)
}
