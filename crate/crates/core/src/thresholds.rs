//! Threshold sets: sorted cut points defining contiguous gray-level classes.

use serde::Serialize;

use crate::histogram::Histogram;

/// `M` contiguous classes over gray levels `0..levels`.
///
/// Class `k` holds every gray `g` with `cuts[k-1] < g <= cuts[k]`, where the
/// implicit outer bounds are `-1` and `levels - 1`. Each class carries the
/// pixel count and weighted mean gray level it had in the source histogram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdSet {
    levels: usize,
    cuts: Vec<u32>,
    means: Vec<f64>,
    counts: Vec<u64>,
}

impl ThresholdSet {
    /// Builds the threshold set for `cuts` over `h`. Cuts must be strictly
    /// increasing and below `levels - 1`; classes may be empty, in which case
    /// their mean is the midpoint of their gray range.
    pub fn from_cuts(h: &Histogram, cuts: Vec<u32>) -> Self {
        let levels = h.levels();
        debug_assert!(cuts.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(cuts.last().is_none_or(|&c| (c as usize) < levels - 1));

        let mut means = Vec::with_capacity(cuts.len() + 1);
        let mut counts = Vec::with_capacity(cuts.len() + 1);
        let mut lo = 0usize;
        for hi in cuts
            .iter()
            .map(|&c| c as usize)
            .chain(std::iter::once(levels - 1))
        {
            let (n, weighted) = h.counts()[lo..=hi]
                .iter()
                .enumerate()
                .fold((0u64, 0f64), |(n, s), (off, &c)| {
                    (n + c, s + (lo + off) as f64 * c as f64)
                });
            counts.push(n);
            means.push(if n > 0 {
                weighted / n as f64
            } else {
                (lo + hi) as f64 / 2.0
            });
            lo = hi + 1;
        }
        Self {
            levels,
            cuts,
            means,
            counts,
        }
    }

    pub(crate) fn from_parts(
        levels: usize,
        cuts: Vec<u32>,
        means: Vec<f64>,
        counts: Vec<u64>,
    ) -> Self {
        debug_assert_eq!(means.len(), cuts.len() + 1);
        debug_assert_eq!(counts.len(), cuts.len() + 1);
        Self {
            levels,
            cuts,
            means,
            counts,
        }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Interior cut points, each the inclusive upper gray level of a class.
    pub fn cuts(&self) -> &[u32] {
        &self.cuts
    }

    /// Weighted mean gray level of each class.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn class_count(&self) -> usize {
        self.cuts.len() + 1
    }

    /// Class index of gray level `g`, or `None` outside `0..levels`.
    pub fn class_of(&self, g: u32) -> Option<usize> {
        ((g as usize) < self.levels).then(|| self.cuts.partition_point(|&t| t < g))
    }

    /// Within-class scatter `sum_g h(g) (g - mean(class(g)))^2` of `h` under
    /// this partition, using the stored class means.
    pub fn within_scatter(&self, h: &Histogram) -> f64 {
        h.nonempty()
            .map(|(g, c)| {
                let k = self.cuts.partition_point(|&t| (t as usize) < g);
                let dev = g as f64 - self.means[k];
                c as f64 * dev * dev
            })
            .sum()
    }
}
