//! Stationary finite-state processes `(X_t, Y_t, S_t)`.
//!
//! Every model is compiled into one convention: the edge leaving `S_{t-1}`
//! emits the pair `(X_t, Y_t)` and lands in `S_t`. `S_0` is drawn from the
//! stationary law of the state chain.

mod forward;
mod sample;
mod spec_file;
mod stationary;

pub use forward::{
    entropy_rate_estimate, forward_prob, forward_prob_with_initial, EntropyRateEstimate, RateMethod,
};
pub use sample::{sample_path, sample_rng, SamplePath, Sampler};
pub use spec_file::{load_process, parse_preset, EdgeSpec, ProcessSpec};
pub use stationary::{
    psi_diagnostics, psi_k_bound, stationary_distribution, PsiDiagnostics, StationaryDistribution,
};

use crate::{Error, Result};

const ROW_TOL: f64 = 1e-12;

/// One weighted edge `from -> to` emitting bit `x` and observation `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub x: u8,
    pub y: usize,
    pub p: f64,
}

/// Stationary finite-state joint law of `(X, Y, S)`.
///
/// Probabilities are stored as one `m x m` matrix per emitted pair `(x, y)`,
/// which is the layout the forward recursion and the SC trellis consume.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeKernel {
    name: String,
    state_labels: Vec<String>,
    obs_labels: Vec<String>,
    mats: Vec<f64>,
    periodic_ok: bool,
}

impl EdgeKernel {
    /// Builds a kernel from an edge list. Duplicate edges accumulate.
    pub fn new(
        name: impl Into<String>,
        state_labels: Vec<String>,
        obs_labels: Vec<String>,
        edges: &[Edge],
        periodic_ok: bool,
    ) -> Result<Self> {
        let m = state_labels.len();
        let q = obs_labels.len();
        if m == 0 || q == 0 {
            return Err(Error::InvalidKernel(
                "state and observation alphabets must be non-empty".into(),
            ));
        }
        let mut k = Self {
            name: name.into(),
            state_labels,
            obs_labels,
            mats: vec![0.0; 2 * q * m * m],
            periodic_ok,
        };
        for e in edges {
            if e.from >= m || e.to >= m || e.x > 1 || e.y >= q {
                return Err(Error::InvalidKernel(format!("edge out of range: {e:?}")));
            }
            if !e.p.is_finite() || e.p < 0.0 {
                return Err(Error::InvalidKernel(format!(
                    "edge probability {} is not a finite non-negative number",
                    e.p
                )));
            }
            let idx = k.index(e.from, e.to, e.x, e.y);
            k.mats[idx] += e.p;
        }
        k.validate()?;
        Ok(k)
    }

    #[inline]
    fn index(&self, s: usize, s_next: usize, x: u8, y: usize) -> usize {
        let m = self.num_states();
        ((x as usize * self.num_obs() + y) * m + s) * m + s_next
    }

    fn validate(&self) -> Result<()> {
        for s in 0..self.num_states() {
            let total: f64 = self.row_mass(s);
            if (total - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidKernel(format!(
                    "outgoing mass of state {} is {total}, expected 1",
                    self.state_labels[s]
                )));
            }
        }
        Ok(())
    }

    fn row_mass(&self, s: usize) -> f64 {
        let m = self.num_states();
        let mut total = 0.0;
        for x in 0..2u8 {
            for y in 0..self.num_obs() {
                for s2 in 0..m {
                    total += self.mats[self.index(s, s2, x, y)];
                }
            }
        }
        total
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn num_states(&self) -> usize {
        self.state_labels.len()
    }

    pub fn num_obs(&self) -> usize {
        self.obs_labels.len()
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn obs_labels(&self) -> &[String] {
        &self.obs_labels
    }

    pub fn periodic_ok(&self) -> bool {
        self.periodic_ok
    }

    /// `Pr(S_t = s_next, X_t = x, Y_t = y | S_{t-1} = s)`.
    #[inline]
    pub fn prob(&self, s: usize, s_next: usize, x: u8, y: usize) -> f64 {
        self.mats[self.index(s, s_next, x, y)]
    }

    /// Row-major `m x m` matrix of edge probabilities emitting `(x, y)`.
    #[inline]
    pub fn emission_matrix(&self, x: u8, y: usize) -> &[f64] {
        let mm = self.num_states() * self.num_states();
        let start = (x as usize * self.num_obs() + y) * mm;
        &self.mats[start..start + mm]
    }

    /// All edges with positive probability.
    pub fn edges(&self) -> Vec<Edge> {
        let m = self.num_states();
        let mut out = Vec::new();
        for from in 0..m {
            for to in 0..m {
                for x in 0..2u8 {
                    for y in 0..self.num_obs() {
                        let p = self.prob(from, to, x, y);
                        if p > 0.0 {
                            out.push(Edge { from, to, x, y, p });
                        }
                    }
                }
            }
        }
        out
    }

    /// State-marginal transition matrix, row-major.
    pub fn state_transition(&self) -> Vec<f64> {
        let m = self.num_states();
        let mut t = vec![0.0; m * m];
        for x in 0..2u8 {
            for y in 0..self.num_obs() {
                for (acc, p) in t.iter_mut().zip(self.emission_matrix(x, y)) {
                    *acc += p;
                }
            }
        }
        t
    }

    /// Number of closed communicating classes of the state chain.
    pub fn closed_classes(&self) -> usize {
        stationary::closed_classes(&self.state_transition(), self.num_states())
    }

    /// Period of the state chain (1 = aperiodic). Only meaningful for
    /// irreducible chains.
    pub fn period(&self) -> usize {
        stationary::period(&self.state_transition(), self.num_states())
    }

    /// Checks the mixing preconditions: an irreducible state chain, and
    /// aperiodic unless the kernel is flagged `periodic_ok`.
    pub fn check_mixing_preconditions(&self) -> Result<()> {
        let classes = self.closed_classes();
        if classes != 1 || !stationary::is_irreducible(&self.state_transition(), self.num_states())
        {
            return Err(Error::Reducible {
                closed_classes: classes,
            });
        }
        if !self.periodic_ok && self.period() != 1 {
            return Err(Error::InvalidKernel(format!(
                "state chain has period {} and the kernel is not flagged periodic_ok",
                self.period()
            )));
        }
        Ok(())
    }
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn check_pmf(row: &[f64], what: &str) -> Result<()> {
    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "{what} has a negative or non-finite entry"
        )));
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > ROW_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{what} sums to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Single-state kernel whose pairs `(X_t, Y_t)` are i.i.d. with law
/// `p_xy[x][y]`.
pub fn make_iid(p_xy: &[Vec<f64>; 2]) -> Result<EdgeKernel> {
    let q = p_xy[0].len();
    if q == 0 || p_xy[1].len() != q {
        return Err(Error::DimensionMismatch(
            "both rows of p_xy need the same non-zero length".into(),
        ));
    }
    let flat: Vec<f64> = p_xy.iter().flatten().copied().collect();
    check_pmf(&flat, "joint law p_xy")?;
    let edges: Vec<Edge> = (0..2u8)
        .flat_map(|x| (0..q).map(move |y| (x, y)))
        .map(|(x, y)| Edge {
            from: 0,
            to: 0,
            x,
            y,
            p: p_xy[x as usize][y],
        })
        .collect();
    EdgeKernel::new("iid", vec!["s0".into()], labels("y", q), &edges, false)
}

/// `X ~ Ber(p)` with no side information.
pub fn make_iid_bernoulli(p: f64) -> Result<EdgeKernel> {
    Ok(make_iid(&[vec![1.0 - p], vec![p]])?.with_name(format!("iid:{p}")))
}

/// `X ~ Ber(1/2)` observed through a BSC with the given crossover.
pub fn make_bsc_side_info(crossover: f64) -> Result<EdgeKernel> {
    let a = 0.5 * (1.0 - crossover);
    let b = 0.5 * crossover;
    Ok(make_iid(&[vec![a, b], vec![b, a]])?.with_name(format!("bsc:{crossover}")))
}

/// Hidden-Markov source: `p(s_t | s_{t-1}) p(x_t | s_t)`, no side information.
/// `emit[s] = [Pr(X=0 | s), Pr(X=1 | s)]`.
pub fn make_hidden_markov(state_trans: &[Vec<f64>], emit: &[[f64; 2]]) -> Result<EdgeKernel> {
    let m = state_trans.len();
    if m == 0 || emit.len() != m || state_trans.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch(format!(
            "transition matrix must be {m}x{m} with {m} emission rows"
        )));
    }
    for (s, row) in state_trans.iter().enumerate() {
        check_pmf(row, &format!("transition row {s}"))?;
        check_pmf(&emit[s], &format!("emission row {s}"))?;
    }
    let mut edges = Vec::new();
    for (s, row) in state_trans.iter().enumerate() {
        for (s2, &t) in row.iter().enumerate() {
            for x in 0..2u8 {
                edges.push(Edge {
                    from: s,
                    to: s2,
                    x,
                    y: 0,
                    p: t * emit[s2][x as usize],
                });
            }
        }
    }
    EdgeKernel::new("hmm", labels("s", m), vec!["-".into()], &edges, false)
}

/// The two-state hidden-Markov preset: transitions `[[0.9,0.1],[0.2,0.8]]`,
/// state 0 emits `Ber(1/2)`, state 1 emits 0.
pub fn make_hmm2() -> EdgeKernel {
    make_hidden_markov(&[vec![0.9, 0.1], vec![0.2, 0.8]], &[[0.5, 0.5], [1.0, 0.0]])
        .expect("hmm2 preset is valid")
        .with_name("hmm2")
}

/// The period-4 source: states cycle `s -> s+1 mod 4`; the bit emitted on
/// the edge into `s'` is `Ber(1/2)` when `s' in {0,1}` and 0 otherwise.
pub fn make_periodic_bb00() -> EdgeKernel {
    let mut edges = Vec::new();
    for s in 0..4 {
        let s2 = (s + 1) % 4;
        if s2 < 2 {
            edges.push(Edge {
                from: s,
                to: s2,
                x: 0,
                y: 0,
                p: 0.5,
            });
            edges.push(Edge {
                from: s,
                to: s2,
                x: 1,
                y: 0,
                p: 0.5,
            });
        } else {
            edges.push(Edge {
                from: s,
                to: s2,
                x: 0,
                y: 0,
                p: 1.0,
            });
        }
    }
    EdgeKernel::new("bb00", labels("", 4), vec!["-".into()], &edges, true).expect("bb00 is valid")
}

/// Finite-state channel `W(s', y | x, s)`: from channel state `s` with input
/// `x`, move to `s'` and emit output `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteStateChannel {
    states: usize,
    outputs: usize,
    // [((s * 2 + x) * states + s') * outputs + y]
    w: Vec<f64>,
}

impl FiniteStateChannel {
    /// `w[s][x][s'][y]`.
    pub fn new(w: &[[Vec<Vec<f64>>; 2]]) -> Result<Self> {
        let states = w.len();
        if states == 0 {
            return Err(Error::DimensionMismatch(
                "channel needs at least one state".into(),
            ));
        }
        let outputs = w[0][0].first().map_or(0, |r| r.len());
        if outputs == 0 {
            return Err(Error::DimensionMismatch(
                "channel needs at least one output".into(),
            ));
        }
        let mut flat = Vec::with_capacity(states * 2 * states * outputs);
        for (s, per_x) in w.iter().enumerate() {
            for (x, rows) in per_x.iter().enumerate() {
                if rows.len() != states || rows.iter().any(|r| r.len() != outputs) {
                    return Err(Error::DimensionMismatch(format!(
                        "W(.|x={x}, s={s}) has the wrong shape"
                    )));
                }
                let row: Vec<f64> = rows.iter().flatten().copied().collect();
                check_pmf(&row, &format!("W(.|x={x}, s={s})"))?;
                flat.extend(row);
            }
        }
        Ok(Self {
            states,
            outputs,
            w: flat,
        })
    }

    /// Memoryless channel `W(y | x)`.
    pub fn memoryless(w_y_given_x: &[Vec<f64>; 2]) -> Result<Self> {
        Self::new(&[[vec![w_y_given_x[0].clone()], vec![w_y_given_x[1].clone()]]])
    }

    /// Gilbert-Elliott channel: the state chain moves with `trans`
    /// independently of the input, then the input passes through a BSC
    /// whose crossover is that of the new state.
    pub fn gilbert_elliott(trans: &[Vec<f64>], crossover: &[f64]) -> Result<Self> {
        let m = trans.len();
        if crossover.len() != m || trans.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch(
                "Gilbert-Elliott needs an m x m transition and m crossovers".into(),
            ));
        }
        let w: Vec<[Vec<Vec<f64>>; 2]> = (0..m)
            .map(|s| {
                let per_x = |x: usize| -> Vec<Vec<f64>> {
                    (0..m)
                        .map(|s2| {
                            let e = crossover[s2];
                            let keep = trans[s][s2] * (1.0 - e);
                            let flip = trans[s][s2] * e;
                            if x == 0 {
                                vec![keep, flip]
                            } else {
                                vec![flip, keep]
                            }
                        })
                        .collect()
                };
                [per_x(0), per_x(1)]
            })
            .collect();
        Self::new(&w)
    }

    #[inline]
    fn w(&self, s: usize, x: u8, s2: usize, y: usize) -> f64 {
        self.w[((s * 2 + x as usize) * self.states + s2) * self.outputs + y]
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs
    }
}

/// Joint process of a finite-state channel driven by a Markov input. The
/// input is any kernel without side information; the composed state is
/// `(channel state, input state)` with index `c * m_in + a`.
pub fn compose_channel_with_input(
    channel: &FiniteStateChannel,
    input: &EdgeKernel,
) -> Result<EdgeKernel> {
    if input.num_obs() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "input law must not carry observations, found alphabet of size {}",
            input.num_obs()
        )));
    }
    let mc = channel.num_states();
    let ma = input.num_states();
    let mut edges = Vec::new();
    for c in 0..mc {
        for a in 0..ma {
            for a2 in 0..ma {
                for x in 0..2u8 {
                    let pin = input.prob(a, a2, x, 0);
                    if pin == 0.0 {
                        continue;
                    }
                    for c2 in 0..mc {
                        for y in 0..channel.num_outputs() {
                            let p = pin * channel.w(c, x, c2, y);
                            if p > 0.0 {
                                edges.push(Edge {
                                    from: c * ma + a,
                                    to: c2 * ma + a2,
                                    x,
                                    y,
                                    p,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    let states = (0..mc)
        .flat_map(|c| {
            input
                .state_labels()
                .iter()
                .map(move |a| format!("c{c}|{a}"))
        })
        .collect();
    EdgeKernel::new(
        "channel",
        states,
        labels("y", channel.num_outputs()),
        &edges,
        input.periodic_ok(),
    )
}

/// Gilbert-Elliott channel with uniform i.i.d. input. Arguments follow the
/// preset syntax `ge:<pg>,<pb>,<g2b>,<b2g>`.
pub fn make_gilbert_elliott(pg: f64, pb: f64, g2b: f64, b2g: f64) -> Result<EdgeKernel> {
    let ch = FiniteStateChannel::gilbert_elliott(
        &[vec![1.0 - g2b, g2b], vec![b2g, 1.0 - b2g]],
        &[pg, pb],
    )?;
    let input = make_iid_bernoulli(0.5)?;
    Ok(compose_channel_with_input(&ch, &input)?.with_name(format!("ge:{pg},{pb},{g2b},{b2g}")))
}
