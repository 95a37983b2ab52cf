use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::EdgeKernel;
use crate::{Error, Result};

/// Stationary law of the state chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
}

/// Upper bounds on the psi-mixing coefficients for lags `k_values`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiDiagnostics {
    pub k_values: Vec<usize>,
    pub psi_bound: Vec<f64>,
}

impl PsiDiagnostics {
    /// True when the last reported bound is within `tol` of 1.
    pub fn approaches_one(&self, tol: f64) -> bool {
        self.psi_bound.last().is_some_and(|b| *b <= 1.0 + tol)
    }
}

fn reachability(t: &[f64], m: usize) -> Vec<Vec<bool>> {
    (0..m)
        .map(|s| {
            let mut seen = vec![false; m];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(a) = stack.pop() {
                for b in 0..m {
                    if t[a * m + b] > 0.0 && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            seen
        })
        .collect()
}

pub(super) fn closed_classes(t: &[f64], m: usize) -> usize {
    let reach = reachability(t, m);
    let recurrent: Vec<usize> = (0..m)
        .filter(|&s| (0..m).all(|b| !reach[s][b] || reach[b][s]))
        .collect();
    let mut classes: Vec<&Vec<bool>> = Vec::new();
    for s in recurrent {
        if !classes.iter().any(|c| c[s]) {
            classes.push(&reach[s]);
        }
    }
    classes.len()
}

pub(super) fn is_irreducible(t: &[f64], m: usize) -> bool {
    reachability(t, m).iter().all(|r| r.iter().all(|&b| b))
}

/// gcd of `level(a) + 1 - level(b)` over all edges of the BFS tree from
/// state 0; equals the period for irreducible chains.
pub(super) fn period(t: &[f64], m: usize) -> usize {
    let mut level = vec![usize::MAX; m];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(a) = queue.pop_front() {
        for b in 0..m {
            if t[a * m + b] > 0.0 && level[b] == usize::MAX {
                level[b] = level[a] + 1;
                queue.push_back(b);
            }
        }
    }
    let mut g = 0usize;
    for a in 0..m {
        for b in 0..m {
            if t[a * m + b] > 0.0 && level[a] != usize::MAX && level[b] != usize::MAX {
                let d = (level[a] as isize + 1 - level[b] as isize).unsigned_abs();
                g = gcd(g, d);
            }
        }
    }
    g.max(1)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Solves `pi K = pi`, `sum(pi) = 1` directly, so periodic chains work.
pub fn stationary_distribution(k: &EdgeKernel) -> Result<StationaryDistribution> {
    let m = k.num_states();
    let t = k.state_transition();
    let classes = closed_classes(&t, m);
    if classes != 1 {
        return Err(Error::Reducible {
            closed_classes: classes,
        });
    }
    // (K^T - I) pi = 0 with the last equation replaced by normalization.
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] = t[j * m + i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[m - 1] = 1.0;
    let sol = a.lu().solve(&b).ok_or(Error::Reducible {
        closed_classes: classes,
    })?;
    let mut pi: Vec<f64> = sol.iter().map(|p| p.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    Ok(StationaryDistribution { pi })
}

fn matmul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for l in 0..m {
            let ail = a[i * m + l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i * m + j] += ail * b[l * m + j];
            }
        }
    }
    out
}

fn ratio_bound(pk: &[f64], pi: &[f64], m: usize) -> f64 {
    let mut best = 0.0f64;
    for s in 0..m {
        for s2 in 0..m {
            best = best.max(pk[s * m + s2] / pi[s2]);
        }
    }
    best
}

fn positive_pi(k: &EdgeKernel) -> Result<Vec<f64>> {
    let pi = stationary_distribution(k)?.pi;
    if let Some(s) = pi.iter().position(|&p| p <= 0.0) {
        return Err(Error::ZeroStationaryMass(s));
    }
    Ok(pi)
}

/// State-bridging bound `max_{s,s'} P^lag(s'|s) / pi(s')` on `psi_lag`.
///
/// For `A` in the past up to time 0 and `B` in the future from time
/// `lag + 1`, `Pr(A,B) = sum Pr(A, S_0=s) P^lag(s'|s) Pr(B|S_lag=s')`, and
/// `Pr(B|S_lag=s') <= Pr(B)/pi(s')`.
pub fn psi_k_bound(k: &EdgeKernel, lag: usize) -> Result<f64> {
    let pi = positive_pi(k)?;
    let m = k.num_states();
    let t = k.state_transition();
    let mut result = identity(m);
    let mut base = t;
    let mut e = lag;
    while e > 0 {
        if e & 1 == 1 {
            result = matmul(&result, &base, m);
        }
        base = matmul(&base, &base, m);
        e >>= 1;
    }
    Ok(ratio_bound(&result, &pi, m))
}

fn identity(m: usize) -> Vec<f64> {
    let mut id = vec![0.0; m * m];
    for s in 0..m {
        id[s * m + s] = 1.0;
    }
    id
}

/// Bounds for every lag `0..=max_lag`.
pub fn psi_diagnostics(k: &EdgeKernel, max_lag: usize) -> Result<PsiDiagnostics> {
    let pi = positive_pi(k)?;
    let m = k.num_states();
    let t = k.state_transition();
    let mut pk = identity(m);
    let mut k_values = Vec::with_capacity(max_lag + 1);
    let mut psi_bound = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        if lag > 0 {
            pk = matmul(&pk, &t, m);
        }
        k_values.push(lag);
        psi_bound.push(ratio_bound(&pk, &pi, m));
    }
    Ok(PsiDiagnostics {
        k_values,
        psi_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{make_hidden_markov, make_hmm2, make_iid_bernoulli, make_periodic_bb00};
    use approx::assert_abs_diff_eq;

    fn check_fixed_point(k: &EdgeKernel, pi: &[f64]) {
        let m = k.num_states();
        let t = k.state_transition();
        for j in 0..m {
            let v: f64 = (0..m).map(|i| pi[i] * t[i * m + j]).sum();
            assert_abs_diff_eq!(v, pi[j], epsilon = 1e-10);
        }
        assert_abs_diff_eq!(pi.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn stationary_examples() {
        let bb = make_periodic_bb00();
        let pi = stationary_distribution(&bb).unwrap().pi;
        for p in &pi {
            assert_abs_diff_eq!(*p, 0.25, epsilon = 1e-14);
        }
        check_fixed_point(&bb, &pi);

        let h = make_hmm2();
        let pi = stationary_distribution(&h).unwrap().pi;
        assert_abs_diff_eq!(pi[0], 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(pi[1], 1.0 / 3.0, epsilon = 1e-14);
        check_fixed_point(&h, &pi);

        let one = make_iid_bernoulli(0.3).unwrap();
        assert_eq!(stationary_distribution(&one).unwrap().pi, vec![1.0]);
    }

    #[test]
    fn reducible_chain_is_an_error() {
        let k = make_hidden_markov(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[[0.5, 0.5], [0.5, 0.5]])
            .unwrap();
        assert!(matches!(
            stationary_distribution(&k),
            Err(Error::Reducible { closed_classes: 2 })
        ));
    }

    #[test]
    fn transient_state_has_zero_mass() {
        let k = make_hidden_markov(&[vec![0.5, 0.5], vec![0.0, 1.0]], &[[0.5, 0.5], [0.5, 0.5]])
            .unwrap();
        let pi = stationary_distribution(&k).unwrap().pi;
        assert_abs_diff_eq!(pi[0], 0.0, epsilon = 1e-14);
        assert!(matches!(
            psi_k_bound(&k, 0),
            Err(Error::ZeroStationaryMass(0))
        ));
    }

    #[test]
    fn psi_examples() {
        let iid = make_iid_bernoulli(0.3).unwrap();
        for lag in [0, 1, 5, 100] {
            assert_eq!(psi_k_bound(&iid, lag).unwrap(), 1.0);
        }
        let bb = make_periodic_bb00();
        for lag in [0, 1, 2, 3, 7, 64] {
            assert_abs_diff_eq!(psi_k_bound(&bb, lag).unwrap(), 4.0, epsilon = 1e-12);
        }
        let h = make_hmm2();
        assert_abs_diff_eq!(psi_k_bound(&h, 0).unwrap(), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(psi_k_bound(&h, 1).unwrap(), 2.4, epsilon = 1e-12);
        assert!(psi_k_bound(&h, 200).unwrap() <= 1.0 + 1e-3);
    }

    #[test]
    fn diagnostics_agree_with_pointwise_bound() {
        let h = make_hmm2();
        let d = psi_diagnostics(&h, 50).unwrap();
        assert_eq!(d.k_values.len(), 51);
        for (lag, b) in d.k_values.iter().zip(&d.psi_bound) {
            assert_abs_diff_eq!(*b, psi_k_bound(&h, *lag).unwrap(), epsilon = 1e-12);
        }
        assert!(d.psi_bound.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert!(d.psi_bound[0] >= 1.0);
    }
}
