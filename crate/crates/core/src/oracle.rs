use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::point::Point;

/// Which operator a stream feeds. Inner is the constraint-level operator,
/// outer the objective-level one. Each gets its own sub-stream so their
/// noises are independent yet jointly reproducible from one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorTag {
    Inner,
    Outer,
}

impl OperatorTag {
    fn id(self) -> u64 {
        match self {
            OperatorTag::Inner => 1,
            OperatorTag::Outer => 2,
        }
    }
}

/// Identity of a noise stream. A draw is a pure function of
/// `(seed, replication, operator, iteration, slot)`, so parallel replications
/// and arbitrary evaluation orders produce bitwise-identical samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeededStream {
    pub seed: u64,
    pub replication: u64,
    pub operator: OperatorTag,
    pub iteration: u64,
}

impl SeededStream {
    pub fn new(seed: u64, replication: u64, operator: OperatorTag) -> Self {
        SeededStream {
            seed,
            replication,
            operator,
            iteration: 0,
        }
    }

    /// Same stream positioned at a given iteration.
    pub fn at(mut self, iteration: u64) -> Self {
        self.iteration = iteration;
        self
    }

    pub fn advance(&mut self) {
        self.iteration += 1;
    }

    fn draw_ctx(&self, slot: u64) -> DrawCtx {
        let mut key = sm64(self.seed);
        key = sm64(key ^ self.replication);
        key = sm64(key ^ self.operator.id());
        key = sm64(key ^ self.iteration);
        key = sm64(key ^ slot);
        DrawCtx {
            state: key,
            spare_normal: None,
        }
    }
}

// splitmix64 finalizer; full-avalanche, stable across platforms.
fn sm64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based generator for a single sample. All draws within one sample
/// are ordered, so a noise model may consume as many primitives as it needs.
pub struct DrawCtx {
    state: u64,
    spare_normal: Option<f64>,
}

impl DrawCtx {
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        sm64(self.state)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn next_uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_uniform()
    }

    /// Standard normal via Box-Muller; the second value is cached.
    pub fn next_standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let mut u1 = self.next_uniform();
        while u1 <= 0.0 {
            u1 = self.next_uniform();
        }
        let u2 = self.next_uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_normal = Some(r * angle.sin());
        r * angle.cos()
    }
}

type MeanMap = Arc<dyn Fn(&Point) -> Point + Send + Sync>;
type NoiseFn = Arc<dyn Fn(&Point, &mut DrawCtx) -> Vec<f64> + Send + Sync>;

/// Additive noise attached to a mean map.
#[derive(Clone)]
pub enum NoiseModel {
    None,
    /// Independent Gaussian per coordinate with the given standard deviations.
    AdditiveGaussian {
        std: Vec<f64>,
    },
    /// Arbitrary scenario-indexed noise; must be a pure function of the
    /// evaluation point and the draw context.
    Custom(NoiseFn),
}

impl std::fmt::Debug for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseModel::None => write!(f, "None"),
            NoiseModel::AdditiveGaussian { std } => write!(f, "AdditiveGaussian({std:?})"),
            NoiseModel::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// An unbiased sampler of an operator: `sample = mean_map(x) + noise`, with
/// `E||noise||^2 <= variance_bound`. A shared counter tracks how many samples
/// have been drawn, which the solver tests use to assert the one-evaluation-
/// per-operator-per-iteration property.
#[derive(Clone)]
pub struct StochasticOracle {
    dim: usize,
    mean_map: MeanMap,
    noise: NoiseModel,
    variance_bound: f64,
    samples: Arc<AtomicU64>,
}

impl std::fmt::Debug for StochasticOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StochasticOracle")
            .field("dim", &self.dim)
            .field("noise", &self.noise)
            .field("variance_bound", &self.variance_bound)
            .finish()
    }
}

impl StochasticOracle {
    pub fn new(dim: usize, mean_map: MeanMap, noise: NoiseModel, variance_bound: f64) -> Self {
        StochasticOracle {
            dim,
            mean_map,
            noise,
            variance_bound,
            samples: Arc::new(AtomicU64::new(0)),
        }
    }

    pub fn deterministic(
        dim: usize,
        mean_map: impl Fn(&Point) -> Point + Send + Sync + 'static,
    ) -> Self {
        Self::new(dim, Arc::new(mean_map), NoiseModel::None, 0.0)
    }

    pub fn with_gaussian_noise(
        dim: usize,
        mean_map: impl Fn(&Point) -> Point + Send + Sync + 'static,
        std: Vec<f64>,
    ) -> Self {
        let variance_bound = std.iter().map(|s| s * s).sum();
        Self::new(
            dim,
            Arc::new(mean_map),
            NoiseModel::AdditiveGaussian { std },
            variance_bound,
        )
    }

    pub fn with_custom_noise(
        dim: usize,
        mean_map: impl Fn(&Point) -> Point + Send + Sync + 'static,
        noise: impl Fn(&Point, &mut DrawCtx) -> Vec<f64> + Send + Sync + 'static,
        variance_bound: f64,
    ) -> Self {
        Self::new(
            dim,
            Arc::new(mean_map),
            NoiseModel::Custom(Arc::new(noise)),
            variance_bound,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn variance_bound(&self) -> f64 {
        self.variance_bound
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.noise, NoiseModel::None)
    }

    /// The exact mean map. Not counted as a sample.
    pub fn mean(&self, x: &Point) -> Point {
        (self.mean_map)(x)
    }

    /// One noisy evaluation at the stream's `(iteration, slot = 0)`.
    pub fn sample(&self, x: &Point, stream: &SeededStream) -> Result<Point> {
        self.sample_slot(x, stream, 0)
    }

    fn sample_slot(&self, x: &Point, stream: &SeededStream, slot: u64) -> Result<Point> {
        x.check_dim(self.dim)?;
        self.samples.fetch_add(1, Ordering::Relaxed);
        let mut out = (self.mean_map)(x);
        match &self.noise {
            NoiseModel::None => {}
            NoiseModel::AdditiveGaussian { std } => {
                let mut ctx = stream.draw_ctx(slot);
                for (v, s) in out.as_mut_slice().iter_mut().zip(std) {
                    if *s != 0.0 {
                        *v += s * ctx.next_standard_normal();
                    }
                }
            }
            NoiseModel::Custom(noise_fn) => {
                let mut ctx = stream.draw_ctx(slot);
                let delta = noise_fn(x, &mut ctx);
                if delta.len() != self.dim {
                    return Err(CoreError::DimensionMismatch {
                        expected: self.dim,
                        got: delta.len(),
                    });
                }
                for (v, d) in out.as_mut_slice().iter_mut().zip(delta) {
                    *v += d;
                }
            }
        }
        Ok(out)
    }

    /// Streaming arithmetic mean of `batch` independent draws, one per slot.
    pub fn sample_batch(&self, x: &Point, stream: &SeededStream, batch: usize) -> Result<Point> {
        if batch == 0 {
            return Err(CoreError::InvalidArgument(
                "batch size must be at least 1".into(),
            ));
        }
        let mut acc = self.sample_slot(x, stream, 0)?;
        for slot in 1..batch as u64 {
            let draw = self.sample_slot(x, stream, slot)?;
            // running mean keeps the accumulator at sample scale
            let w = 1.0 / (slot as f64 + 1.0);
            for (a, d) in acc.as_mut_slice().iter_mut().zip(draw.as_slice()) {
                *a += w * (d - *a);
            }
        }
        Ok(acc)
    }

    pub fn samples_drawn(&self) -> u64 {
        self.samples.load(Ordering::Relaxed)
    }

    pub fn reset_sample_count(&self) {
        self.samples.store(0, Ordering::Relaxed);
    }
}
