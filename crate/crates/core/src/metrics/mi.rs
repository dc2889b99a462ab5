//! Plug-in mutual information between quality and popularity.

/// Mutual information (nats) of a joint count table.
pub fn mutual_information_table(table: &[Vec<f64>]) -> f64 {
    let total: f64 = table.iter().flatten().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let cols = table.iter().map(Vec::len).max().unwrap_or(0);
    let row_p: Vec<f64> = table.iter().map(|r| r.iter().sum::<f64>() / total).collect();
    let col_p: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r.get(j).copied().unwrap_or(0.0)).sum::<f64>() / total)
        .collect();
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0.0 {
                let p = c / total;
                mi += p * (p / (row_p[i] * col_p[j])).ln();
            }
        }
    }
    mi.max(0.0)
}

/// MI over `q_bins` equal-width quality bins on (0, 1] and logarithmic
/// popularity bins with edges growing by `p_factor`.
pub fn mutual_information(pairs: &[(f64, u64)], q_bins: usize, p_factor: f64) -> f64 {
    let q_bins = q_bins.max(1);
    let p_factor = if p_factor > 1.0 { p_factor } else { 2.0 };
    let p_bin = |p: u64| -> usize { ((p.max(1) as f64).ln() / p_factor.ln()).floor() as usize };
    let p_bins = pairs.iter().map(|&(_, p)| p_bin(p)).max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0.0; p_bins]; q_bins];
    for &(f, p) in pairs {
        let qi = ((f * q_bins as f64).ceil() as usize).clamp(1, q_bins) - 1;
        table[qi][p_bin(p)] += 1.0;
    }
    mutual_information_table(&table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    #[test]
    fn hand_evaluated_table() {
        let t = vec![
            vec![4.0, 1.0, 0.0, 1.0],
            vec![0.0, 3.0, 2.0, 1.0],
            vec![1.0, 0.0, 5.0, 2.0],
            vec![2.0, 2.0, 1.0, 3.0],
        ];
        // direct evaluation of sum p ln(p / (px py)) with n = 28
        let n: f64 = 28.0;
        let px = [6.0, 6.0, 8.0, 8.0];
        let py = [7.0, 6.0, 8.0, 7.0];
        let mut want: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let c: f64 = t[i][j];
                if c > 0.0 {
                    want += c / n * (c * n / (px[i] * py[j])).ln();
                }
            }
        }
        assert!((mutual_information_table(&t) - want).abs() < 1e-14);
    }

    #[test]
    fn product_table_has_zero_mi() {
        let t = vec![vec![2.0, 4.0, 6.0], vec![1.0, 2.0, 3.0]];
        assert!(mutual_information_table(&t).abs() < 1e-15);
        assert_eq!(mutual_information_table(&[vec![5.0]]), 0.0);
    }

    #[test]
    fn independent_pairs_have_small_mi() {
        let mut rng = StdRng::seed_from_u64(4);
        let pairs: Vec<(f64, u64)> = (0..100_000)
            .map(|_| (1.0 - rng.random::<f64>(), rng.random_range(1..300)))
            .collect();
        assert!(mutual_information(&pairs, 10, 2.0) < 0.01);
    }

    #[test]
    fn deterministic_channel_gives_marginal_entropy() {
        let mut rng = StdRng::seed_from_u64(8);
        let pairs: Vec<(f64, u64)> = (0..50_000)
            .map(|_| {
                let f = 1.0 - rng.random::<f64>();
                let bin = ((f * 10.0).ceil() as u32).clamp(1, 10) - 1;
                (f, 1u64 << bin)
            })
            .collect();
        let mut counts = [0.0; 10];
        for &(f, _) in &pairs {
            counts[((f * 10.0).ceil() as usize).clamp(1, 10) - 1] += 1.0;
        }
        let n = pairs.len() as f64;
        let h: f64 = counts.iter().filter(|&&c| c > 0.0).map(|&c| -(c / n) * (c / n).ln()).sum();
        assert!((mutual_information(&pairs, 10, 2.0) - h).abs() < 1e-12);
    }
}
