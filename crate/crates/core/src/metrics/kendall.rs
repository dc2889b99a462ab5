//! Kendall's tau-b in O(n log n) (Knight's algorithm).

use std::cmp::Ordering;

use crate::{Error, Result};

/// Integer pair counts behind tau-b. `pairs` is n(n-1)/2, `tied_x` and
/// `tied_y` count pairs tied in each variable, `tied_xy` pairs tied in both,
/// and `score` is concordant minus discordant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TauCounts {
    pub pairs: u64,
    pub tied_x: u64,
    pub tied_y: u64,
    pub tied_xy: u64,
    pub score: i64,
}

impl TauCounts {
    pub fn tau_b(&self) -> Result<f64> {
        let dx = self.pairs - self.tied_x;
        let dy = self.pairs - self.tied_y;
        if dx == 0 {
            return Err(Error::UndefinedCorrelation("all values tied in first variable"));
        }
        if dy == 0 {
            return Err(Error::UndefinedCorrelation("all values tied in second variable"));
        }
        Ok(self.score as f64 / ((dx as f64) * (dy as f64)).sqrt())
    }
}

fn tie_pairs(run: u64) -> u64 {
    run * run.saturating_sub(1) / 2
}

/// Pair counts for `(x, y)` samples. NaNs are ordered by `total_cmp`.
pub fn tau_counts(pairs: &[(f64, f64)]) -> TauCounts {
    let n = pairs.len();
    let mut v: Vec<(f64, f64)> = pairs.to_vec();
    v.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut tied_x = 0u64;
    let mut tied_xy = 0u64;
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for i in 1..n {
        if v[i].0.total_cmp(&v[i - 1].0) == Ordering::Equal {
            run_x += 1;
            if v[i].1.total_cmp(&v[i - 1].1) == Ordering::Equal {
                run_xy += 1;
            } else {
                tied_xy += tie_pairs(run_xy);
                run_xy = 1;
            }
        } else {
            tied_x += tie_pairs(run_x);
            tied_xy += tie_pairs(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    if n > 0 {
        tied_x += tie_pairs(run_x);
        tied_xy += tie_pairs(run_xy);
    }

    let mut ys: Vec<f64> = v.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut tied_y = 0u64;
    let mut run_y = 1u64;
    for i in 1..n {
        if ys[i].total_cmp(&ys[i - 1]) == Ordering::Equal {
            run_y += 1;
        } else {
            tied_y += tie_pairs(run_y);
            run_y = 1;
        }
    }
    if n > 0 {
        tied_y += tie_pairs(run_y);
    }

    let total = tie_pairs(n as u64);
    let score = total as i64 - tied_x as i64 - tied_y as i64 + tied_xy as i64 - 2 * swaps as i64;
    TauCounts {
        pairs: total,
        tied_x,
        tied_y,
        tied_xy,
        score,
    }
}

/// Sorts `v` ascending, returning the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j].total_cmp(&v[i]) == Ordering::Less {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + (mid - i)].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + (n - j)].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Tie-corrected Kendall rank correlation.
pub fn kendall_tau_b(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two items"));
    }
    tau_counts(pairs).tau_b()
}


#[cfg(test)]
mod tests {
    use super::oracle::brute_counts;
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn perfect_agreement_and_reversal() {
        let same = [(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)];
        assert_eq!(kendall_tau_b(&same).unwrap(), 1.0);
        let rev = [(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)];
        assert_eq!(kendall_tau_b(&rev).unwrap(), -1.0);
    }

    #[test]
    fn all_tied_is_undefined() {
        let flat = [(0.2, 1.0), (0.5, 1.0), (0.9, 1.0)];
        assert!(matches!(kendall_tau_b(&flat), Err(Error::UndefinedCorrelation(_))));
        assert!(kendall_tau_b(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn small_tied_example() {
        // one x-tied pair, two y-tied pairs, four concordant
        let v = [(1.0, 1.0), (1.0, 1.0), (2.0, 2.0), (3.0, 2.0)];
        let c = tau_counts(&v);
        assert_eq!(c, brute_counts(&v));
        assert_eq!(c.score, 4);
        let tau = c.tau_b().unwrap();
        assert!((tau - 4.0 / 20.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn matches_brute_force_on_tied_popularities() {
        let mut rng = crate::rng::from_seed(0xC0FFEE);
        let pairs: Vec<(f64, f64)> = (0..200)
            .map(|_| (rng.random::<f64>(), rng.random_range(1..8) as f64))
            .collect();
        let fast = tau_counts(&pairs);
        assert_eq!(fast, brute_counts(&pairs));
        assert_eq!(fast.tau_b().unwrap(), brute_counts(&pairs).tau_b().unwrap());
    }

    proptest! {
        #[test]
        fn counts_equal_oracle(v in prop::collection::vec((0u8..6, 0u8..6), 2..60)) {
            let pairs: Vec<(f64, f64)> = v.iter().map(|&(a, b)| (a as f64, b as f64)).collect();
            prop_assert_eq!(tau_counts(&pairs), brute_counts(&pairs));
        }

        #[test]
        fn antisymmetric_and_rank_invariant(v in prop::collection::vec((0u16..500, 0u16..50), 3..80)) {
            let pairs: Vec<(f64, f64)> = v.iter().map(|&(a, b)| (a as f64, b as f64)).collect();
            if let Ok(t) = kendall_tau_b(&pairs) {
                let neg: Vec<(f64, f64)> = pairs.iter().map(|&(a, b)| (a, -b)).collect();
                prop_assert!((kendall_tau_b(&neg).unwrap() + t).abs() < 1e-12);
                let mono: Vec<(f64, f64)> = pairs.iter().map(|&(a, b)| ((a + 1.0).ln(), b * b * b + 7.0)).collect();
                prop_assert!((kendall_tau_b(&mono).unwrap() - t).abs() < 1e-12);
            }
        }

        #[test]
        fn self_correlation_is_one(v in prop::collection::hash_set(0u32..100_000, 2..100)) {
            let pairs: Vec<(f64, f64)> = v.iter().map(|&a| (a as f64, a as f64)).collect();
            prop_assert_eq!(kendall_tau_b(&pairs).unwrap(), 1.0);
        }
    }
}
