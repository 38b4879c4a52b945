use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::shadowing::Domain;

/// Stationary Gaussian shadowing with exponential autocorrelation
/// `σ² exp(−Δ/scale)`, generated as a first-order autoregression.
///
/// The random stream is ChaCha8 keyed by `seed`, with the stream number
/// selecting independent sequences under one key; normal deviates come from
/// the ziggurat sampler of `rand_distr`.
///
/// Internally the process keeps a unit-variance state `z` and emits `σ z`,
/// so changing `σ` rescales the current value by `σ_new / σ_old` without
/// breaking the correlation.
#[derive(Clone, Debug)]
pub struct ShadowingProcess {
    sigma: f64,
    follow_model: bool,
    scale: f64,
    domain: Domain,
    seed: u64,
    stream: u64,
    z: f64,
    coordinate: f64,
    rng: ChaCha8Rng,
}

impl ShadowingProcess {
    /// Process with a fixed standard deviation `sigma` dB (0 gives no shadowing).
    pub fn new(sigma: f64, scale: f64, domain: Domain, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("shadowing sigma must be >= 0, got {sigma}")));
        }
        Self::build(sigma, false, scale, domain, seed)
    }

    /// Process whose standard deviation is taken from the path-loss model at
    /// every simulated sample.
    pub fn model_driven(scale: f64, domain: Domain, seed: u64) -> Result<Self> {
        Self::build(1.0, true, scale, domain, seed)
    }

    fn build(sigma: f64, follow_model: bool, scale: f64, domain: Domain, seed: u64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::domain(format!("decorrelation scale must be > 0, got {scale}")));
        }
        let mut p = Self {
            sigma,
            follow_model,
            scale,
            domain,
            seed,
            stream: 0,
            z: 0.0,
            coordinate: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        p.restart();
        Ok(p)
    }

    /// Same process on an independent random stream, restarted from a fresh
    /// stationary draw.
    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self.restart();
        self
    }

    fn restart(&mut self) {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.rng.set_stream(self.stream);
        self.z = StandardNormal.sample(&mut self.rng);
        self.coordinate = 0.0;
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn follows_model(&self) -> bool {
        self.follow_model
    }

    /// Coordinate (meters or seconds) reached by the steps so far.
    pub fn coordinate(&self) -> f64 {
        self.coordinate
    }

    /// Current shadowing value, dB.
    pub fn value(&self) -> f64 {
        self.sigma * self.z
    }

    pub fn set_sigma(&mut self, sigma: f64) {
        debug_assert!(sigma >= 0.0);
        self.sigma = sigma;
    }

    /// Advances by `delta` (meters or seconds, matching the domain):
    /// `z' = ρ z + √(1 − ρ²) ε` with `ρ = exp(−delta/scale)`.
    pub fn step(&mut self, delta: f64) -> f64 {
        assert!(delta >= 0.0, "shadowing step must be non-negative, got {delta}");
        if delta > 0.0 {
            let rho = (-delta / self.scale).exp();
            let eps: f64 = StandardNormal.sample(&mut self.rng);
            self.z = rho * self.z + (1.0 - rho * rho).sqrt() * eps;
            self.coordinate += delta;
        }
        self.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_step_keeps_value() {
        let mut p = ShadowingProcess::new(4.5, 7.6, Domain::Time, 1).unwrap();
        let x = p.value();
        assert_eq!(p.step(0.0), x);
        assert_eq!(p.step(0.0), x);
    }

    #[test]
    fn huge_step_forgets_state() {
        let mut a = ShadowingProcess::new(1.0, 1.0, Domain::Time, 5).unwrap();
        let mut b = a.clone();
        b.z = 1e6;
        // same stream, so after a decorrelating step both draw the same innovation
        assert_eq!(a.step(1e6), b.step(1e6));
    }

    #[test]
    fn streams_are_independent_and_reproducible() {
        let base = ShadowingProcess::new(1.0, 5.0, Domain::Time, 9).unwrap();
        let run = |stream| {
            let mut p = base.clone().with_stream(stream);
            (0..100).map(|_| p.step(0.5)).collect::<Vec<_>>()
        };
        assert_eq!(run(1), run(1));
        assert_ne!(run(1), run(2));
    }

    #[test]
    fn sigma_change_rescales_value() {
        let mut p = ShadowingProcess::model_driven(10.0, Domain::Distance, 3).unwrap();
        p.set_sigma(2.2);
        let a = p.value();
        p.set_sigma(4.5);
        assert!((p.value() - a * 4.5 / 2.2).abs() < 1e-12);
    }

    #[test]
    fn stationary_statistics() {
        let (sigma, scale, delta) = (4.5, 7.6, 0.0165);
        let n = 1_000_000;
        let mut p = ShadowingProcess::new(sigma, scale, Domain::Time, 2024).unwrap();
        let xs: Vec<f64> = (0..n).map(|_| p.step(delta)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| x * x).sum::<f64>() / n as f64 - mean * mean;
        let std = var.sqrt();
        assert!((4.4..=4.6).contains(&std), "std {std}");
        for k in [1usize, 60, 300, 600, 909] {
            let r: f64 = xs[..n - k].iter().zip(&xs[k..]).map(|(a, b)| (a - mean) * (b - mean)).sum::<f64>()
                / ((n - k) as f64 * var);
            let expected = (-(k as f64) * delta / scale).exp();
            assert!((r - expected).abs() < 0.03, "lag {k}: {r} vs {expected}");
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(ShadowingProcess::new(-1.0, 1.0, Domain::Time, 0).is_err());
        assert!(ShadowingProcess::new(1.0, 0.0, Domain::Time, 0).is_err());
    }
}
