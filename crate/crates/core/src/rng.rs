//! Seeded, splittable random streams with work instrumentation.
//!
//! A stream is a ChaCha8 keystream selected by `(seed, stream id)`. Distinct
//! stream ids give disjoint keystreams, so substreams can be handed to
//! threads and replayed independently of scheduling.

use std::ops::{AddAssign, Sub};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Operation counts used as a machine-independent measure of running time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkCounters {
    pub uniforms: u64,
    /// Iterations of accept-reject loops (proposals made).
    pub rejections: u64,
    pub newton_iterations: u64,
    pub bisection_steps: u64,
    /// Number of adaptive quadratures performed.
    pub quadrature_calls: u64,
    /// Integrand evaluations across those quadratures.
    pub quadrature_evals: u64,
    /// Halvings performed while locating the log-concave sampler's break point.
    pub lc_preprocessing: u64,
    /// Calls to nested first-passage samplers.
    pub inner_calls: u64,
    /// Acceptance ratios found above one; nonzero means a broken bound.
    pub bound_violations: u64,
}

impl WorkCounters {
    /// Aggregate work: every counted operation costs one unit and a
    /// quadrature counts once regardless of its node count.
    pub fn total(&self) -> u64 {
        self.uniforms
            + self.rejections
            + self.newton_iterations
            + self.bisection_steps
            + self.quadrature_calls
            + self.lc_preprocessing
    }

    pub(crate) fn quadrature(&mut self, evals: usize) {
        self.quadrature_calls += 1;
        self.quadrature_evals += evals as u64;
    }
}

impl AddAssign for WorkCounters {
    fn add_assign(&mut self, o: Self) {
        self.uniforms += o.uniforms;
        self.rejections += o.rejections;
        self.newton_iterations += o.newton_iterations;
        self.bisection_steps += o.bisection_steps;
        self.quadrature_calls += o.quadrature_calls;
        self.quadrature_evals += o.quadrature_evals;
        self.lc_preprocessing += o.lc_preprocessing;
        self.inner_calls += o.inner_calls;
        self.bound_violations += o.bound_violations;
    }
}

impl Sub for WorkCounters {
    type Output = WorkCounters;
    fn sub(self, o: Self) -> Self {
        WorkCounters {
            uniforms: self.uniforms - o.uniforms,
            rejections: self.rejections - o.rejections,
            newton_iterations: self.newton_iterations - o.newton_iterations,
            bisection_steps: self.bisection_steps - o.bisection_steps,
            quadrature_calls: self.quadrature_calls - o.quadrature_calls,
            quadrature_evals: self.quadrature_evals - o.quadrature_evals,
            lc_preprocessing: self.lc_preprocessing - o.lc_preprocessing,
            inner_calls: self.inner_calls - o.inner_calls,
            bound_violations: self.bound_violations - o.bound_violations,
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// A reproducible random source.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
    draws: u64,
    /// Work performed by samplers that drew from this stream.
    pub work: WorkCounters,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> RngStream {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngStream { seed, stream, inner, draws: 0, work: WorkCounters::default() }
    }

    pub fn from_seed(seed: u64) -> RngStream {
        RngStream::new(seed, 0)
    }

    /// An independent stream derived from this one's identity and `id`.
    /// It does not depend on how much of the parent has been consumed.
    pub fn substream(&self, id: u64) -> RngStream {
        RngStream::new(self.seed, splitmix64(self.stream ^ splitmix64(id.wrapping_add(1))))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Number of 64-bit words drawn so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0,1): 52 random bits plus a half-step
    /// offset, so both endpoints are excluded exactly.
    pub fn uniform(&mut self) -> f64 {
        self.work.uniforms += 1;
        ((self.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
    }

    /// Resets the work counters, returning the old values.
    pub fn take_work(&mut self) -> WorkCounters {
        std::mem::take(&mut self.work)
    }
}
