//! Brute-force references: direct variance evaluation over materialized
//! pixels, and exhaustive search for the scatter-optimal multilevel cut.

use thiserror::Error;

use crate::engine::{ClassArray, MergeRecord};
use crate::histogram::Histogram;
use crate::thresholds::ThresholdSet;

/// Largest `K(0)` [`naive_variances`] accepts.
pub const NAIVE_MAX_CLASSES: usize = 64;
/// Largest pixel count [`naive_variances`] accepts.
pub const NAIVE_MAX_PIXELS: u64 = 100_000;
/// Default cap on cut combinations enumerated by [`exhaustive_otsu`].
pub const MAX_COMBINATIONS: u128 = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("input too large for brute force: {0}")]
    TooLarge(String),
    #[error("{levels} classes requested but only {available} nonempty gray levels")]
    Infeasible { levels: usize, available: usize },
    #[error("at least two classes are required, got {0}")]
    InvalidLevel(usize),
    #[error("merge history does not match the class array: {0}")]
    Inconsistent(String),
}

/// Evaluates the within-class (`v`) and between-class (`w`) unbiased
/// variance estimators directly from every pixel of `original`, grouped by
/// the partition reached after replaying `history`. Pixels keep their
/// original gray values. `w` is `None` for a single class.
pub fn naive_variances(
    c: &ClassArray,
    original: &Histogram,
    history: &[MergeRecord],
) -> Result<(f64, Option<f64>), OracleError> {
    let bins: Vec<(usize, u64)> = original.nonempty().collect();
    if bins.len() > NAIVE_MAX_CLASSES {
        return Err(OracleError::TooLarge(format!(
            "{} initial classes > {NAIVE_MAX_CLASSES}",
            bins.len()
        )));
    }
    if original.total() > NAIVE_MAX_PIXELS {
        return Err(OracleError::TooLarge(format!(
            "{} pixels > {NAIVE_MAX_PIXELS}",
            original.total()
        )));
    }

    let mut pixels: Vec<(f64, usize)> = Vec::with_capacity(original.total() as usize);
    for (label, &(g, n)) in bins.iter().enumerate() {
        pixels.extend(std::iter::repeat_n((g as f64, label), n as usize));
    }
    let mut ranges: Vec<(u32, u32)> = bins.iter().map(|&(g, _)| (g as u32, g as u32)).collect();
    for rec in history {
        let pos = ranges
            .iter()
            .position(|r| r.1 == rec.boundary_gray)
            .filter(|&p| p + 1 < ranges.len())
            .ok_or_else(|| {
                OracleError::Inconsistent(format!("no class ends at gray {}", rec.boundary_gray))
            })?;
        ranges[pos].1 = ranges[pos + 1].1;
        ranges.remove(pos + 1);
        for (_, label) in pixels.iter_mut() {
            if *label > pos {
                *label -= 1;
            }
        }
    }
    let current: Vec<(u32, u32)> = c.classes().iter().map(|r| (r.g_lo, r.g_hi)).collect();
    if current != ranges {
        return Err(OracleError::Inconsistent(format!(
            "replayed {} classes, array holds {}",
            ranges.len(),
            current.len()
        )));
    }

    let k = ranges.len();
    let total = pixels.len();
    let mut sums = vec![0f64; k];
    let mut counts = vec![0usize; k];
    for &(x, label) in &pixels {
        sums[label] += x;
        counts[label] += 1;
    }
    let means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| s / n as f64)
        .collect();
    let grand = pixels.iter().map(|p| p.0).sum::<f64>() / total as f64;

    let within: f64 = pixels
        .iter()
        .map(|&(x, label)| (x - means[label]).powi(2))
        .sum();
    let v = if total > k {
        within / (total - k) as f64
    } else {
        0.0
    };
    let w = (k > 1).then(|| {
        let between: f64 = means
            .iter()
            .zip(&counts)
            .map(|(m, &n)| n as f64 * (m - grand).powi(2))
            .sum();
        between / (k - 1) as f64
    });
    Ok((v, w))
}

/// `C(n, r)`, saturating.
pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        match acc.checked_mul((n - i) as u128) {
            Some(x) => acc = x / (i as u128 + 1),
            None => return u128::MAX,
        }
    }
    acc
}

/// Exhaustive optimum with the default combination cap.
pub fn exhaustive_otsu(h: &Histogram, m: usize) -> Result<ThresholdSet, OracleError> {
    exhaustive_otsu_with_limit(h, m, MAX_COMBINATIONS)
}

/// Enumerates every way to split the nonempty gray levels of `h` into `m`
/// contiguous nonempty classes and returns the one with the largest
/// between-class scatter `sum_k n_k (a_k - a)^2`. Combinations are visited
/// in lexicographic order and the first optimum found is kept.
pub fn exhaustive_otsu_with_limit(
    h: &Histogram,
    m: usize,
    max_combinations: u128,
) -> Result<ThresholdSet, OracleError> {
    if m < 2 {
        return Err(OracleError::InvalidLevel(m));
    }
    let bins: Vec<(usize, u64)> = h.nonempty().collect();
    if bins.len() < m {
        return Err(OracleError::Infeasible {
            levels: m,
            available: bins.len(),
        });
    }
    let candidates = bins.len() - 1;
    let r = m - 1;
    let combos = binomial(candidates, r);
    if combos > max_combinations {
        return Err(OracleError::TooLarge(format!(
            "C({candidates}, {r}) = {combos} combinations > {max_combinations}"
        )));
    }

    // prefix[i] = (pixels, weighted sum) over the first i nonempty bins.
    let mut prefix = Vec::with_capacity(bins.len() + 1);
    prefix.push((0f64, 0f64));
    for &(g, n) in &bins {
        let (pn, ps) = *prefix.last().unwrap();
        prefix.push((pn + n as f64, ps + g as f64 * n as f64));
    }
    let score = |ends: &[usize]| -> f64 {
        let mut lo = 0;
        let mut acc = 0.0;
        for hi in ends
            .iter()
            .map(|&e| e + 1)
            .chain(std::iter::once(bins.len()))
        {
            let n = prefix[hi].0 - prefix[lo].0;
            let s = prefix[hi].1 - prefix[lo].1;
            acc += s * s / n;
            lo = hi;
        }
        acc
    };

    // ends[j] = index of the last nonempty bin in class j.
    let mut ends: Vec<usize> = (0..r).collect();
    let mut best = (score(&ends), ends.clone());
    while let Some(j) = (0..r).rev().find(|&j| ends[j] < candidates - r + j) {
        ends[j] += 1;
        for t in j + 1..r {
            ends[t] = ends[t - 1] + 1;
        }
        let s = score(&ends);
        if s > best.0 {
            best = (s, ends.clone());
        }
    }
    let cuts = best.1.iter().map(|&e| bins[e].0 as u32).collect();
    Ok(ThresholdSet::from_cuts(h, cuts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{build_initial, merge_step};

    fn toy() -> Histogram {
        Histogram::from_pairs(256, [(1, 2), (2, 2), (5, 1)]).unwrap()
    }

    #[test]
    fn naive_after_first_merge() {
        let h = toy();
        let c0 = build_initial(&h);
        let (v0, w0) = naive_variances(&c0, &h, &[]).unwrap();
        assert_eq!(v0, 0.0);
        assert!((w0.unwrap() - 5.4).abs() < 1e-12);

        let (c1, rec) = merge_step(&c0, 0.0, 5.4).unwrap();
        let (v, w) = naive_variances(&c1, &h, &[rec]).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        assert!((w.unwrap() - 9.8).abs() < 1e-12);

        let (c2, rec2) = merge_step(&c1, rec.v, rec.w.unwrap()).unwrap();
        let (v, w) = naive_variances(&c2, &h, &[rec, rec2]).unwrap();
        assert!((v - 2.7).abs() < 1e-12);
        assert_eq!(w, None);
    }

    #[test]
    fn naive_detects_mismatched_history() {
        let h = toy();
        let c0 = build_initial(&h);
        let (_, rec) = merge_step(&c0, 0.0, 5.4).unwrap();
        assert!(matches!(
            naive_variances(&c0, &h, &[rec]),
            Err(OracleError::Inconsistent(_))
        ));
    }

    #[test]
    fn naive_limits() {
        let wide = Histogram::new(vec![1; 100]).unwrap();
        assert!(matches!(
            naive_variances(&build_initial(&wide), &wide, &[]),
            Err(OracleError::TooLarge(_))
        ));
        let heavy = Histogram::from_pairs(4, [(0, 60_000), (3, 60_000)]).unwrap();
        assert!(matches!(
            naive_variances(&build_initial(&heavy), &heavy, &[]),
            Err(OracleError::TooLarge(_))
        ));
    }

    #[test]
    fn two_spikes() {
        let h = Histogram::from_pairs(256, [(0, 1), (255, 1)]).unwrap();
        let t = exhaustive_otsu(&h, 2).unwrap();
        assert_eq!(t.cuts(), &[0]);
        let between = h.total_scatter() - t.within_scatter(&h);
        assert!((between - 2.0 * 127.5f64.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn toy_two_levels_prefers_cut_at_two() {
        let h = toy();
        let t = exhaustive_otsu(&h, 2).unwrap();
        assert_eq!(t.cuts(), &[2]);
        assert!((h.total_scatter() - t.within_scatter(&h) - 9.8).abs() < 1e-12);
        // The alternative cut [1] keeps between-class scatter 2*1.2^2 + 3*0.8^2 = 4.8.
        let alt = ThresholdSet::from_cuts(&h, vec![1]);
        assert!((h.total_scatter() - alt.within_scatter(&h) - 4.8).abs() < 1e-12);
    }

    #[test]
    fn full_refinement_has_zero_within_scatter() {
        let h = toy();
        let t = exhaustive_otsu(&h, 3).unwrap();
        assert_eq!(t.cuts(), &[1, 2]);
        assert_eq!(t.within_scatter(&h), 0.0);
    }

    #[test]
    fn guards() {
        let h = toy();
        assert_eq!(
            exhaustive_otsu(&h, 4),
            Err(OracleError::Infeasible {
                levels: 4,
                available: 3
            })
        );
        assert_eq!(exhaustive_otsu(&h, 1), Err(OracleError::InvalidLevel(1)));
        let dense = Histogram::new(vec![1; 256]).unwrap();
        assert!(matches!(
            exhaustive_otsu(&dense, 5),
            Err(OracleError::TooLarge(_))
        ));
        assert!(matches!(
            exhaustive_otsu_with_limit(&dense, 4, 1_000_000),
            Err(OracleError::TooLarge(_))
        ));
    }

    #[test]
    fn tie_keeps_lexicographically_first() {
        // Symmetric: cuts [0] and [1] give the same scatter.
        let h = Histogram::from_pairs(3, [(0, 1), (1, 1), (2, 1)]).unwrap();
        assert_eq!(exhaustive_otsu(&h, 2).unwrap().cuts(), &[0]);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(255, 3), 2_731_135);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(10, 5), 252);
    }
}
