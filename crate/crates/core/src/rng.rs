//! Named, independently seekable random streams.
//!
//! Every consumer of randomness in a simulation owns its own ChaCha8 stream,
//! keyed by `(seed, stream id)`. ChaCha is counter based, so a stream's
//! position is a single 128-bit word counter that can be saved and restored.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// The consumers that draw random numbers during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stream {
    Stimuli,
    StimulusDurations,
    RewardDelay,
    RewardAmplitude,
    NeuronNoise,
    ActionDurations,
    /// Scripted updates of the scalar drift and unlearning studies.
    ScalarUpdates,
}

impl Stream {
    pub const ALL: [Stream; 7] = [
        Stream::Stimuli,
        Stream::StimulusDurations,
        Stream::RewardDelay,
        Stream::RewardAmplitude,
        Stream::NeuronNoise,
        Stream::ActionDurations,
        Stream::ScalarUpdates,
    ];

    pub fn id(self) -> u64 {
        match self {
            Stream::Stimuli => 1,
            Stream::StimulusDurations => 2,
            Stream::RewardDelay => 3,
            Stream::RewardAmplitude => 4,
            Stream::NeuronNoise => 5,
            Stream::ActionDurations => 6,
            Stream::ScalarUpdates => 7,
        }
    }
}

/// Saved position of a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamPosition {
    pub seed: u64,
    pub stream: u64,
    pub word_pos: u128,
}

/// A deterministic generator for one `(seed, stream)` pair.
#[derive(Debug, Clone)]
pub struct StreamRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl PartialEq for StreamRng {
    fn eq(&self, other: &Self) -> bool {
        self.position() == other.position()
    }
}

impl StreamRng {
    pub fn position(&self) -> StreamPosition {
        StreamPosition {
            seed: self.seed,
            stream: self.inner.get_stream(),
            word_pos: self.inner.get_word_pos(),
        }
    }

    pub fn from_position(pos: StreamPosition) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(pos.seed);
        inner.set_stream(pos.stream);
        inner.set_word_pos(pos.word_pos);
        StreamRng {
            seed: pos.seed,
            inner,
        }
    }

    /// Uniform draw on `[lo, hi)`; returns `lo` when the range is empty.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi > lo {
            self.inner.random_range(lo..hi)
        } else {
            lo
        }
    }

    /// Gaussian draw with the given standard deviation (zero std yields 0).
    pub fn gaussian(&mut self, std: f64) -> f64 {
        if std > 0.0 {
            Normal::new(0.0, std)
                .expect("finite positive std")
                .sample(&mut self.inner)
        } else {
            0.0
        }
    }

    /// Uniform index in `0..n`. `n` must be non-zero.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.inner.random_bool(p)
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Opens the generator for `(seed, stream)` at its first draw.
pub fn rng_stream(seed: u64, stream: Stream) -> StreamRng {
    StreamRng::from_position(StreamPosition {
        seed,
        stream: stream.id(),
        word_pos: 0,
    })
}

/// The full set of streams used by one network simulation. Serializes as
/// the six stream positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "[StreamPosition; 6]", from = "[StreamPosition; 6]")]
pub struct SimRngs {
    pub stimuli: StreamRng,
    pub stimulus_durations: StreamRng,
    pub reward_delay: StreamRng,
    pub reward_amplitude: StreamRng,
    pub noise: StreamRng,
    pub action_durations: StreamRng,
}

impl SimRngs {
    pub fn new(seed: u64) -> Self {
        SimRngs {
            stimuli: rng_stream(seed, Stream::Stimuli),
            stimulus_durations: rng_stream(seed, Stream::StimulusDurations),
            reward_delay: rng_stream(seed, Stream::RewardDelay),
            reward_amplitude: rng_stream(seed, Stream::RewardAmplitude),
            noise: rng_stream(seed, Stream::NeuronNoise),
            action_durations: rng_stream(seed, Stream::ActionDurations),
        }
    }

    pub fn positions(&self) -> [StreamPosition; 6] {
        [
            self.stimuli.position(),
            self.stimulus_durations.position(),
            self.reward_delay.position(),
            self.reward_amplitude.position(),
            self.noise.position(),
            self.action_durations.position(),
        ]
    }

    pub fn from_positions(p: &[StreamPosition; 6]) -> Self {
        SimRngs {
            stimuli: StreamRng::from_position(p[0]),
            stimulus_durations: StreamRng::from_position(p[1]),
            reward_delay: StreamRng::from_position(p[2]),
            reward_amplitude: StreamRng::from_position(p[3]),
            noise: StreamRng::from_position(p[4]),
            action_durations: StreamRng::from_position(p[5]),
        }
    }
}

impl From<SimRngs> for [StreamPosition; 6] {
    fn from(r: SimRngs) -> Self {
        r.positions()
    }
}

impl From<[StreamPosition; 6]> for SimRngs {
    fn from(p: [StreamPosition; 6]) -> Self {
        SimRngs::from_positions(&p)
    }
}
