//! Sliding min/max envelopes and the LB-Keogh lower bounds for DTW/CDTW.

use std::collections::VecDeque;

use crate::engines::Cutoff;
use crate::error::{Error, Result};
use crate::kernels::PointCost;

/// Running max/min of a series over `[i - w, i + w]`, clamped to the series.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub window: usize,
}

impl Envelope {
    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }
}

/// Lemire's streaming min/max. Every index enters and leaves each deque at
/// most once, so the work is linear in the length regardless of `w`.
pub fn build_envelope(s: &[f64], w: usize) -> Envelope {
    let n = s.len();
    let w_eff = w.min(n);
    let mut upper = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut maxq: VecDeque<usize> = VecDeque::with_capacity(2 * w_eff + 2);
    let mut minq: VecDeque<usize> = VecDeque::with_capacity(2 * w_eff + 2);

    for k in 0..n + w_eff {
        if k < n {
            while maxq.back().is_some_and(|&b| s[b] <= s[k]) {
                maxq.pop_back();
            }
            maxq.push_back(k);
            while minq.back().is_some_and(|&b| s[b] >= s[k]) {
                minq.pop_back();
            }
            minq.push_back(k);
        }
        // Output for the index whose right edge `k` just arrived.
        if k >= w_eff {
            let i = k - w_eff;
            let oldest = i.saturating_sub(w_eff);
            while maxq.front().is_some_and(|&f| f < oldest) {
                maxq.pop_front();
            }
            while minq.front().is_some_and(|&f| f < oldest) {
                minq.pop_front();
            }
            upper[i] = s[maxq[0]];
            lower[i] = s[minq[0]];
        }
    }
    Envelope {
        upper,
        lower,
        window: w,
    }
}

/// Sum of the costs from each point of `q` to the envelope band, zero for
/// points inside the band.
pub fn lb_keogh(q: &[f64], env: &Envelope, mode: PointCost) -> Result<f64> {
    if q.len() != env.len() {
        return Err(Error::Dimension(format!(
            "LB-Keogh needs equal lengths, got {} and an envelope of {}",
            q.len(),
            env.len()
        )));
    }
    let lb = q
        .iter()
        .zip(env.upper.iter().zip(&env.lower))
        .map(|(&x, (&u, &l))| {
            if x > u {
                mode.eval(x, u)
            } else if x < l {
                mode.eval(x, l)
            } else {
                0.0
            }
        })
        .sum();
    Ok(lb)
}

/// LB-Keogh in both directions. The second direction is skipped when the
/// first one already exceeds `cutoff`.
pub fn lb_keogh2(
    q: &[f64],
    c: &[f64],
    env_c: &Envelope,
    env_q: &Envelope,
    cutoff: Cutoff,
    mode: PointCost,
) -> Result<f64> {
    let first = lb_keogh(q, env_c, mode)?;
    if !cutoff.keeps(first) {
        return Ok(first);
    }
    Ok(first.max(lb_keogh(c, env_q, mode)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(s: &[f64], w: usize) -> (Vec<f64>, Vec<f64>) {
        (0..s.len())
            .map(|i| {
                let lo = i.saturating_sub(w);
                let hi = (i + w).min(s.len() - 1);
                let slice = &s[lo..=hi];
                (
                    slice.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    slice.iter().cloned().fold(f64::INFINITY, f64::min),
                )
            })
            .unzip()
    }

    #[test]
    fn small_envelope() {
        let env = build_envelope(&[1.0, 3.0, 2.0], 1);
        assert_eq!(env.upper, vec![3.0, 3.0, 3.0]);
        assert_eq!(env.lower, vec![1.0, 1.0, 2.0]);
    }

    #[test]
    fn zero_window_is_identity() {
        let s = [0.5, -1.0, 2.0, 2.0, 7.0];
        let env = build_envelope(&s, 0);
        assert_eq!(env.upper, s);
        assert_eq!(env.lower, s);
    }

    #[test]
    fn huge_window_is_global_extrema() {
        let s = [0.5, -1.0, 2.0, 7.0, 3.0];
        let env = build_envelope(&s, usize::MAX);
        assert!(env.upper.iter().all(|&u| u == 7.0));
        assert!(env.lower.iter().all(|&l| l == -1.0));
    }

    #[test]
    fn keogh_examples() {
        let env = build_envelope(&[1.0, 3.0, 2.0], 1);
        assert_eq!(
            lb_keogh(&[0.0, 0.0, 0.0], &env, PointCost::Squared).unwrap(),
            6.0
        );
        assert_eq!(
            lb_keogh(&[2.0, 2.0, 2.5], &env, PointCost::Squared).unwrap(),
            0.0
        );
        assert!(matches!(
            lb_keogh(&[0.0, 0.0], &env, PointCost::Squared),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn keogh2_short_circuits() {
        let q = [0.0, 0.0, 0.0];
        let c = [1.0, 3.0, 2.0];
        let env_c = build_envelope(&c, 1);
        let env_q = build_envelope(&q, 1);
        // The first direction (6) already exceeds 5.
        let lb = lb_keogh2(&q, &c, &env_c, &env_q, Cutoff::new(5.0), PointCost::Squared).unwrap();
        assert_eq!(lb, 6.0);
        // Reverse direction: c against the flat envelope of q gives 1 + 9 + 4.
        let lb = lb_keogh2(&q, &c, &env_c, &env_q, Cutoff::NONE, PointCost::Squared).unwrap();
        assert_eq!(lb, 14.0);
        let lb = lb_keogh2(&c, &c, &env_c, &env_c, Cutoff::NONE, PointCost::Squared).unwrap();
        assert_eq!(lb, 0.0);
    }

    proptest! {
        #[test]
        fn lemire_matches_naive(
            s in prop::collection::vec(-10.0f64..10.0, 1..80),
            w in 0usize..100,
        ) {
            let env = build_envelope(&s, w);
            let (upper, lower) = naive(&s, w);
            prop_assert_eq!(&env.upper, &upper);
            prop_assert_eq!(&env.lower, &lower);
            for (i, v) in s.iter().enumerate() {
                prop_assert!(env.lower[i] <= *v && *v <= env.upper[i]);
            }
        }

        #[test]
        fn widening_never_increases_keogh(
            pair in (1usize..40).prop_flat_map(|n| (
                prop::collection::vec(-5.0f64..5.0, n),
                prop::collection::vec(-5.0f64..5.0, n),
            )),
            w in 0usize..20,
        ) {
            let (q, c) = pair;
            let narrow = lb_keogh(&q, &build_envelope(&c, w), PointCost::Squared).unwrap();
            let wide = lb_keogh(&q, &build_envelope(&c, w + 1), PointCost::Squared).unwrap();
            prop_assert!(wide <= narrow);
        }
    }
}
