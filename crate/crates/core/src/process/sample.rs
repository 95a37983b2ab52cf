use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{stationary_distribution, EdgeKernel};
use crate::Result;

/// One realization: states `S_0..S_n`, bits `X_1..X_n`, observations `Y_1..Y_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePath {
    pub s: Vec<usize>,
    pub x: Vec<u8>,
    pub y: Vec<usize>,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Per-sample generator: stream `index` of a ChaCha generator keyed by
/// `seed`, so sample `i` is the same whichever worker draws it.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    cum: f64,
    to: usize,
    x: u8,
    y: usize,
}

/// Path sampler with precomputed cumulative edge tables.
#[derive(Debug, Clone)]
pub struct Sampler {
    init_cum: Vec<f64>,
    rows: Vec<Vec<Outcome>>,
}

impl Sampler {
    /// Starts from the stationary law.
    pub fn new(k: &EdgeKernel) -> Result<Self> {
        let pi = stationary_distribution(k)?.pi;
        Ok(Self::with_initial(k, &pi))
    }

    /// Starts from an arbitrary (normalized) initial state law.
    pub fn with_initial(k: &EdgeKernel, init: &[f64]) -> Self {
        let mut acc = 0.0;
        let init_cum = init
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let mut rows = vec![Vec::new(); k.num_states()];
        for e in k.edges() {
            rows[e.from].push(e);
        }
        let rows = rows
            .into_iter()
            .map(|edges| {
                let mut acc = 0.0;
                edges
                    .into_iter()
                    .map(|e| {
                        acc += e.p;
                        Outcome {
                            cum: acc,
                            to: e.to,
                            x: e.x,
                            y: e.y,
                        }
                    })
                    .collect()
            })
            .collect();
        Self { init_cum, rows }
    }

    fn pick_state<R: Rng>(&self, rng: &mut R) -> usize {
        let r = rng.gen::<f64>() * self.init_cum.last().copied().unwrap_or(1.0);
        self.init_cum
            .iter()
            .position(|&c| r < c)
            .unwrap_or(self.init_cum.len() - 1)
    }

    fn step<R: Rng>(&self, s: usize, rng: &mut R) -> Outcome {
        let row = &self.rows[s];
        let r = rng.gen::<f64>() * row.last().map_or(1.0, |o| o.cum);
        *row.iter()
            .find(|o| r < o.cum)
            .unwrap_or_else(|| row.last().expect("every state has an outgoing edge"))
    }

    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> SamplePath {
        let mut s = Vec::with_capacity(n + 1);
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let mut cur = self.pick_state(rng);
        s.push(cur);
        for _ in 0..n {
            let o = self.step(cur, rng);
            cur = o.to;
            s.push(cur);
            x.push(o.x);
            y.push(o.y);
        }
        SamplePath { s, x, y }
    }
}

/// Samples a stationary path of length `n`; deterministic in `seed`.
pub fn sample_path(k: &EdgeKernel, n: usize, seed: u64) -> Result<SamplePath> {
    let sampler = Sampler::new(k)?;
    Ok(sampler.sample(n, &mut sample_rng(seed, 0)))
}
