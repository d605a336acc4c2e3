//! Counter-based deterministic random numbers.
//!
//! Sampling jobs here are embarrassingly parallel, but results must not
//! depend on how work is split across threads. A stateful generator shared
//! between workers cannot guarantee that, so instead each draw is a pure
//! function of `(seed, stream, counter)`: a splitmix64-style mixer applied
//! to a keyed counter. Worker threads pull disjoint index ranges and
//! reconstruct exactly the same values regardless of scheduling.

/// 2^64 / golden ratio, the standard splitmix64 increment.
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic generator for one stream of one seed.
///
/// `CounterRng::new(seed, stream)` always yields the same sequence; distinct
/// streams of the same seed are statistically independent. Typical use keys
/// the stream by a sample or trajectory index.
#[derive(Debug, Clone)]
pub struct CounterRng {
    base: u64,
    counter: u64,
    /// Spare normal from the last Box-Muller pair.
    cached_normal: Option<f64>,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        // Decorrelate (seed, stream) pairs by mixing each key in turn.
        let base = mix(mix(seed ^ GOLDEN).wrapping_add(stream.wrapping_mul(GOLDEN)));
        CounterRng {
            base,
            counter: 0,
            cached_normal: None,
        }
    }

    /// Next raw 64-bit value.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.base.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw from the half-open interval `(0, 1]`.
    ///
    /// The open left end keeps `ln(u)` finite for Box-Muller; the closed
    /// right end is harmless for inverse-CDF table lookups.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Fair coin flip.
    #[inline]
    pub fn bit(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// Standard normal draw via Box-Muller; pairs are cached so consecutive
    /// calls consume one uniform pair per two normals.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.cached_normal = Some(r * theta.sin());
        r * theta.cos()
    }
}
